//! CSV and JSON report writers.
//!
//! CSV files open with `#` comment lines echoing the effective
//! configuration; JSON files embed it under `"config"`. Numbers use fixed
//! precision so repeated runs are byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::dgt::{BaselineReport, DgtScore, ModeSweep, SweepRow};
use crate::error::{Error, Result};
use crate::metrics::{TrustedProfile, WorkerProfile};
use crate::powerlaw::GofResult;
use crate::stats::RegressionResult;

pub const ABSENT: &str = "-";

/// p-values, R², proportions and other unit-scale quantities.
pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

/// F statistics, seconds and 0–100 scores.
pub fn fmt1(x: f64) -> String {
    format!("{x:.1}")
}

pub fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

fn opt(x: Option<f64>, f: fn(f64) -> String) -> String {
    x.map_or_else(|| ABSENT.to_string(), f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Json
    }

    pub fn json(self) -> bool {
        self != Format::Csv
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            other => Err(Error::Argument(format!("unknown format `{other}` (csv|json|both)"))),
        }
    }
}

/// An in-memory table with a header row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// CSV text preceded by one `# config: <json>` comment line.
    pub fn to_csv(&self, config: &Value) -> Result<String> {
        let mut buf = Vec::new();
        writeln!(buf, "# config: {config}").map_err(|e| Error::io("<csv>", e))?;
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header)?;
            for row in &self.rows {
                w.write_record(row)?;
            }
            w.flush().map_err(|e| Error::io("<csv>", e))?;
        }
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// Rows as JSON objects keyed by header. Numeric cells become numbers,
    /// absent cells become null.
    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(h, cell)| {
                        let v = if cell == ABSENT {
                            Value::Null
                        } else if let Ok(i) = cell.parse::<i64>() {
                            Value::from(i)
                        } else if let Some(n) = cell.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                            Value::Number(n)
                        } else if cell == "true" || cell == "false" {
                            Value::Bool(cell == "true")
                        } else {
                            Value::String(cell.clone())
                        };
                        (h.clone(), v)
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

pub fn write_csv(dir: &Path, stem: &str, config: &Value, table: &Table) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(format!("{stem}.csv"));
    fs::write(&path, table.to_csv(config)?).map_err(|e| Error::io(&path, e))
}

pub fn write_json(dir: &Path, stem: &str, config: &Value, body: Value) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(format!("{stem}.json"));
    let doc = json!({ "config": config, "report": body });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Write `<stem>.csv` and/or `<stem>.json` into `dir`.
pub fn write_report(dir: &Path, stem: &str, format: Format, config: &Value, table: &Table) -> Result<()> {
    if format.csv() {
        write_csv(dir, stem, config, table)?;
    }
    if format.json() {
        write_json(dir, stem, config, table.to_json())?;
    }
    Ok(())
}

fn model_cells(model: Option<&RegressionResult>) -> Vec<String> {
    match model {
        Some(m) => vec![
            m.n.to_string(),
            fmt4(m.r_squared),
            fmt1(m.f_statistic),
            m.df.0.to_string(),
            m.df.1.to_string(),
            fmt4(m.p_value),
        ],
        None => vec![ABSENT.to_string(); 6],
    }
}

const MODEL_HEADER: [&str; 6] = ["n", "r_squared", "f", "df1", "df2", "p_value"];

pub fn verify_table(ordered: &[TrustedProfile]) -> Table {
    let mut t = Table::new([
        "rank",
        "labeler_id",
        "verified_uis",
        "precision_t",
        "precision_sd",
        "sc",
        "sc_sd",
        "q",
    ]);
    for (i, p) in ordered.iter().enumerate() {
        t.push(vec![
            (i + 1).to_string(),
            p.labeler_id.clone(),
            p.n_verified.to_string(),
            opt(p.precision_t, fmt4),
            opt(p.precision_sd, fmt4),
            opt(p.sc.map(|s| s * 100.0), fmt1),
            opt(p.sc_sd, fmt1),
            opt(p.q, fmt4),
        ]);
    }
    t
}

pub fn trusted_profile_table(profiles: &[TrustedProfile]) -> Table {
    let mut t = Table::new(["labeler_id", "n_uis", "precision_t", "sc", "q", "eui_t"]);
    for p in profiles {
        t.push(vec![
            p.labeler_id.clone(),
            p.n_uis.to_string(),
            opt(p.precision_t, fmt4),
            opt(p.sc, fmt4),
            opt(p.q, fmt4),
            fmt1(p.eui_t),
        ]);
    }
    t
}

pub fn worker_profile_table(profiles: &[WorkerProfile]) -> Table {
    let mut t = Table::new(["worker_id", "attempted", "accepted", "precision_amt", "eui_amt", "tot_amt_s"]);
    for p in profiles {
        t.push(vec![
            p.worker_id.clone(),
            p.attempted.to_string(),
            p.accepted.to_string(),
            fmt4(p.precision_amt),
            fmt2(p.eui_amt),
            fmt1(p.tot_amt),
        ]);
    }
    t
}

pub fn score_table(scores: &[DgtScore], precision: &[f64], trusted_ids: &[String]) -> Table {
    let mut header = vec!["worker_id".to_string(), "precision_amt".to_string()];
    header.extend(trusted_ids.iter().map(|id| format!("p_{id}")));
    header.push("avg_p".into());
    let mut t = Table::new(header);
    for (s, p) in scores.iter().zip(precision) {
        let mut row = vec![s.worker_id.clone(), fmt4(*p)];
        row.extend(trusted_ids.iter().map(|id| opt(s.per_trusted_p.get(id).copied(), fmt4)));
        row.push(fmt4(s.avg_p));
        t.push(row);
    }
    t
}

fn sweep_cells(r: &SweepRow) -> Vec<String> {
    let mut row = vec![
        r.k.to_string(),
        r.trusted_ids.join(";"),
        r.uis_removed.to_string(),
        fmt4(r.uis_fraction),
        r.workers_in_subset.to_string(),
        r.accepted_hits.to_string(),
        r.rejected_hits.to_string(),
        opt(r.precision_mean, fmt4),
        opt(r.precision_sd, fmt4),
    ];
    row.extend(model_cells(r.model.as_ref()));
    row
}

const SWEEP_HEADER: [&str; 9] = [
    "k",
    "trusted_ids",
    "uis_removed",
    "uis_fraction",
    "workers",
    "accepted_hits",
    "rejected_hits",
    "precision_mean",
    "precision_sd",
];

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(SWEEP_HEADER.iter().chain(MODEL_HEADER.iter()).copied());
    for r in rows {
        t.push(sweep_cells(r));
    }
    t
}

pub fn mode_table(modes: &[ModeSweep]) -> Table {
    let mut t = Table::new(
        ["norm", "include_zeros"]
            .iter()
            .chain(SWEEP_HEADER.iter())
            .chain(MODEL_HEADER.iter())
            .copied(),
    );
    for m in modes {
        for r in &m.rows {
            let mut row = vec![m.ks.norm.to_string(), m.ks.include_zeros.to_string()];
            row.extend(sweep_cells(r));
            t.push(row);
        }
    }
    t
}

pub fn baseline_table(report: &BaselineReport) -> Table {
    let mut header = vec!["worker_id".to_string(), "precision_amt".to_string()];
    header.extend(report.trusted_ids.iter().map(|id| format!("p_{id}")));
    header.extend(["avg_p", "attempted", "tot_amt_s", "eui_amt", "gof_pl"].map(String::from));
    let mut t = Table::new(header);
    for r in &report.rows {
        let mut row = vec![r.worker_id.clone(), fmt4(r.precision_amt)];
        row.extend(report.trusted_ids.iter().map(|id| opt(r.per_trusted_p.get(id).copied(), fmt4)));
        row.extend([
            fmt4(r.avg_p),
            r.attempted.to_string(),
            fmt1(r.tot_amt),
            fmt2(r.eui_amt),
            opt(r.gof_pl, fmt4),
        ]);
        t.push(row);
    }
    t
}

/// One row per factor model plus the two-factor model with its betas.
pub fn baseline_model_table(report: &BaselineReport) -> Table {
    let mut t = Table::new(
        ["factor"]
            .iter()
            .chain(MODEL_HEADER.iter())
            .chain(["betas", "slope_p_values"].iter())
            .copied(),
    );
    let join = |v: &[f64]| v.iter().map(|x| fmt4(*x)).collect::<Vec<_>>().join(";");
    for f in &report.factors {
        let mut row = vec![f.factor.clone()];
        row.extend(model_cells(f.model.as_ref()));
        row.push(f.model.as_ref().map_or(ABSENT.into(), |m| join(&m.standardized_betas)));
        row.push(f.model.as_ref().map_or(ABSENT.into(), |m| join(&m.slope_p_values)));
        t.push(row);
    }
    let mut row = vec!["avg_p+eui".to_string()];
    row.extend(model_cells(report.two_factor.as_ref()));
    row.push(report.two_factor.as_ref().map_or(ABSENT.into(), |m| join(&m.standardized_betas)));
    row.push(report.two_factor.as_ref().map_or(ABSENT.into(), |m| join(&m.slope_p_values)));
    t.push(row);
    t
}

pub fn powerlaw_table(results: &[(String, Option<GofResult>)]) -> Table {
    let mut t = Table::new(["id", "alpha", "xmin", "n_tail", "d", "gof_p", "replicates_used"]);
    for (id, r) in results {
        match r {
            Some(g) => t.push(vec![
                id.clone(),
                fmt4(g.fit.alpha),
                fmt4(g.fit.xmin),
                g.fit.n_tail.to_string(),
                fmt4(g.fit.d_statistic),
                fmt4(g.p_value),
                g.replicates.to_string(),
            ]),
            None => {
                let mut row = vec![id.clone()];
                row.extend(std::iter::repeat_n(ABSENT.to_string(), 6));
                t.push(row);
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_precision() {
        assert_eq!(fmt4(0.85549), "0.8555");
        assert_eq!(fmt1(94.34), "94.3");
        assert_eq!(opt(None, fmt4), "-");
    }

    #[test]
    fn csv_has_config_comment() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        let text = t.to_csv(&json!({"seed": 3})).unwrap();
        assert_eq!(text, "# config: {\"seed\":3}\na,b\n1,\"x,y\"\n");
    }

    #[test]
    fn json_rows_mirror_cells() {
        let mut t = Table::new(["id", "n", "p", "missing", "flag"]);
        t.push(vec!["VY;SV".into(), "3".into(), "0.8555".into(), "-".into(), "true".into()]);
        assert_eq!(
            t.to_json(),
            json!([{"id": "VY;SV", "n": 3, "p": 0.8555, "missing": null, "flag": true}])
        );
    }

    #[test]
    fn writes_requested_formats() {
        let dir = tempfile::tempdir().unwrap();
        let t = Table::new(["a"]);
        write_report(dir.path(), "r", Format::Json, &json!({}), &t).unwrap();
        assert!(dir.path().join("r.json").exists());
        assert!(!dir.path().join("r.csv").exists());
        write_report(dir.path(), "s", Format::Both, &json!({}), &t).unwrap();
        assert!(dir.path().join("s.csv").exists() && dir.path().join("s.json").exists());
    }
}
