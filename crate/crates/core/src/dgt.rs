//! Distributional ground truth: score crowdworkers by how closely their
//! class distribution matches each trusted labeler's, then relate the score
//! to their acceptance rate.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::metrics::{normalize_distribution, worker_profiles, DistributionOptions, NormMode, TrustedProfile, WorkerProfile};
use crate::powerlaw::{self, FitMode, PowerLawFit};
use crate::seed::derive_seed;
use crate::stats::{ks_two_sample, mean_sd, ols, PValueMethod, RegressionResult};

/// How distributions are fed to the two-sample test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KsConfig {
    pub norm: NormMode,
    pub include_zeros: bool,
    pub pmethod: PValueMethod,
}

impl Default for KsConfig {
    fn default() -> Self {
        KsConfig {
            norm: NormMode::Mean,
            include_zeros: true,
            pmethod: PValueMethod::Asymptotic,
        }
    }
}

/// Which workers enter a testing subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct InclusionRule {
    pub min_attempted: usize,
    pub min_elements: usize,
}

impl Default for InclusionRule {
    fn default() -> Self {
        InclusionRule {
            min_attempted: 10,
            min_elements: 100,
        }
    }
}

impl InclusionRule {
    pub fn admits(&self, worker: &WorkerProfile) -> bool {
        worker.attempted >= self.min_attempted && worker.elements >= self.min_elements && worker.elements > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawConfig {
    pub mode: FitMode,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for PowerLawConfig {
    fn default() -> Self {
        PowerLawConfig {
            mode: FitMode::Continuous,
            replicates: 1000,
            seed: 0,
        }
    }
}

/// Everything a sweep needs besides the corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DgtConfig {
    pub ks: KsConfig,
    pub rule: InclusionRule,
    pub distribution: DistributionOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgtScore {
    pub worker_id: String,
    pub per_trusted_p: BTreeMap<String, f64>,
    pub avg_p: f64,
    pub ks_config: KsConfig,
}

/// Arithmetic mean of p-values.
pub fn average_p(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Argument("no p-values to average".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Trusted labelers by descending Q, then descending precision, then id.
/// Profiles without Q are left out.
pub fn order_trusted(profiles: &[TrustedProfile]) -> Vec<TrustedProfile> {
    let mut ordered: Vec<TrustedProfile> = profiles
        .iter()
        .filter(|p| {
            if p.q.is_none() {
                log::warn!("trusted labeler {} has no quality index and is not ordered", p.labeler_id);
            }
            p.q.is_some()
        })
        .cloned()
        .collect();
    ordered.sort_by(|a, b| {
        b.q.unwrap()
            .total_cmp(&a.q.unwrap())
            .then_with(|| b.precision_t.unwrap_or(0.0).total_cmp(&a.precision_t.unwrap_or(0.0)))
            .then_with(|| a.labeler_id.cmp(&b.labeler_id))
    });
    ordered
}

fn ks_input(dist: &crate::metrics::ClassDistribution, config: &KsConfig, party: &str) -> Result<Vec<f64>> {
    let dist = if config.include_zeros {
        dist.clone()
    } else {
        dist.without_zeros()
    };
    normalize_distribution(&dist, config.norm).map_err(|_| Error::Degenerate(format!("{party} has no labeled elements")))
}

/// Average KS p-value of one worker against every trusted labeler.
pub fn dgt_score(worker: &WorkerProfile, trusted: &[TrustedProfile], config: &KsConfig) -> Result<DgtScore> {
    if trusted.is_empty() {
        return Err(Error::Argument("trusted set is empty".into()));
    }
    let x = ks_input(&worker.distribution, config, &format!("worker {}", worker.worker_id))?;
    let mut per_trusted_p = BTreeMap::new();
    for t in trusted {
        let y = ks_input(&t.distribution, config, &format!("trusted labeler {}", t.labeler_id))?;
        let method = match config.pmethod {
            PValueMethod::Asymptotic => PValueMethod::Asymptotic,
            PValueMethod::Exact { replicates, seed } => PValueMethod::Exact {
                replicates,
                seed: derive_seed(seed, &["ks", &worker.worker_id, &t.labeler_id]),
            },
        };
        let result = ks_two_sample(&x, &y, method)?;
        if per_trusted_p.insert(t.labeler_id.clone(), result.p_value).is_some() {
            return Err(Error::Argument(format!("trusted labeler {} listed twice", t.labeler_id)));
        }
    }
    let values: Vec<f64> = per_trusted_p.values().copied().collect();
    Ok(DgtScore {
        worker_id: worker.worker_id.clone(),
        avg_p: average_p(&values)?,
        per_trusted_p,
        ks_config: *config,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestingSubset {
    pub k: usize,
    pub trusted_ids: Vec<String>,
    pub removed_screenshots: BTreeSet<String>,
    /// Distinct screenshots in the whole corpus.
    pub uis_total: usize,
    /// Workers admitted by the inclusion rule, recomputed on surviving records.
    pub workers: Vec<WorkerProfile>,
}

impl TestingSubset {
    pub fn uis_removed(&self) -> usize {
        self.removed_screenshots.len()
    }

    pub fn uis_fraction(&self) -> f64 {
        if self.uis_total == 0 {
            0.0
        } else {
            self.uis_removed() as f64 / self.uis_total as f64
        }
    }

    /// Screenshots worked on by admitted workers.
    pub fn screenshots(&self) -> BTreeSet<&str> {
        self.workers.iter().flat_map(|w| w.screenshots.iter().map(String::as_str)).collect()
    }

    pub fn accepted_hits(&self) -> usize {
        self.workers.iter().map(|w| w.accepted).sum()
    }

    pub fn rejected_hits(&self) -> usize {
        self.workers.iter().map(|w| w.rejected).sum()
    }
}

/// Remove the top-`k` trusted labelers' screenshots from the worker pool and
/// re-apply the inclusion rule on what remains.
pub fn testing_subset(
    corpus: &Corpus,
    ordered: &[TrustedProfile],
    k: usize,
    rule: &InclusionRule,
    options: &DistributionOptions,
) -> Result<TestingSubset> {
    if k == 0 || k > ordered.len() {
        return Err(Error::Argument(format!(
            "trusted set size {k} outside 1..={}",
            ordered.len()
        )));
    }
    let top = &ordered[..k];
    let removed: BTreeSet<String> = top.iter().flat_map(|t| t.screenshots.iter().cloned()).collect();
    let surviving = corpus
        .worker_records
        .iter()
        .filter(|r| !removed.contains(&r.screenshot_id));
    let workers = worker_profiles(surviving, &corpus.worker_vocabulary, options)
        .into_iter()
        .filter(|w| rule.admits(w))
        .collect();
    Ok(TestingSubset {
        k,
        trusted_ids: top.iter().map(|t| t.labeler_id.clone()).collect(),
        removed_screenshots: removed,
        uis_total: corpus.screenshot_ids().len(),
        workers,
    })
}

fn score_all(workers: &[WorkerProfile], trusted: &[TrustedProfile], ks: &KsConfig) -> Vec<(usize, DgtScore)> {
    workers
        .par_iter()
        .enumerate()
        .filter_map(|(i, w)| match dgt_score(w, trusted, ks) {
            Ok(s) => Some((i, s)),
            Err(e) => {
                log::warn!("worker {} not scored: {e}", w.worker_id);
                None
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub trusted_ids: Vec<String>,
    pub uis_removed: usize,
    pub uis_total: usize,
    pub uis_fraction: f64,
    pub workers_in_subset: usize,
    pub accepted_hits: usize,
    pub rejected_hits: usize,
    pub precision_mean: Option<f64>,
    pub precision_sd: Option<f64>,
    /// Scored workers, by id.
    pub scores: Vec<DgtScore>,
    /// Precision of each scored worker, aligned with `scores`.
    pub precision_amt: Vec<f64>,
    /// Precision regressed on avg_p; absent with fewer than 3 scored
    /// workers or a degenerate fit.
    pub model: Option<RegressionResult>,
}

fn single_predictor(x: &[f64], y: &[f64]) -> Option<RegressionResult> {
    if x.len() < 3 {
        return None;
    }
    match ols(&[x.to_vec()], y) {
        Ok(m) => Some(m),
        Err(e) => {
            log::warn!("regression skipped: {e}");
            None
        }
    }
}

pub fn sweep_row(corpus: &Corpus, ordered: &[TrustedProfile], k: usize, config: &DgtConfig) -> Result<SweepRow> {
    let subset = testing_subset(corpus, ordered, k, &config.rule, &config.distribution)?;
    let scored = score_all(&subset.workers, &ordered[..k], &config.ks);
    let precision: Vec<f64> = scored.iter().map(|(i, _)| subset.workers[*i].precision_amt).collect();
    let scores: Vec<DgtScore> = scored.into_iter().map(|(_, s)| s).collect();
    let avg: Vec<f64> = scores.iter().map(|s| s.avg_p).collect();
    let all_precision: Vec<f64> = subset.workers.iter().map(|w| w.precision_amt).collect();
    let (mean, sd) = if all_precision.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_sd(&all_precision);
        (Some(m), Some(s))
    };
    Ok(SweepRow {
        k,
        trusted_ids: subset.trusted_ids.clone(),
        uis_removed: subset.uis_removed(),
        uis_total: subset.uis_total,
        uis_fraction: subset.uis_fraction(),
        workers_in_subset: subset.workers.len(),
        accepted_hits: subset.accepted_hits(),
        rejected_hits: subset.rejected_hits(),
        precision_mean: mean,
        precision_sd: sd,
        model: single_predictor(&avg, &precision),
        scores,
        precision_amt: precision,
    })
}

/// One row per trusted-set size in `k_range`.
pub fn sweep(corpus: &Corpus, ordered: &[TrustedProfile], k_range: RangeInclusive<usize>, config: &DgtConfig) -> Result<Vec<SweepRow>> {
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo == 0 || lo > hi || hi > ordered.len() {
        return Err(Error::Argument(format!(
            "trusted set sizes {lo}..={hi} must lie within 1..={}",
            ordered.len()
        )));
    }
    k_range
        .into_par_iter()
        .map(|k| sweep_row(corpus, ordered, k, config))
        .collect()
}

/// A sweep under one normalization and zero-handling combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSweep {
    pub ks: KsConfig,
    pub rows: Vec<SweepRow>,
}

/// Run the sweep for every normalization mode with zeros kept and dropped.
pub fn compare_modes(corpus: &Corpus, ordered: &[TrustedProfile], k_range: RangeInclusive<usize>, config: &DgtConfig) -> Result<Vec<ModeSweep>> {
    let mut out = Vec::new();
    for include_zeros in [true, false] {
        for norm in NormMode::ALL {
            let mut cfg = config.clone();
            cfg.ks.norm = norm;
            cfg.ks.include_zeros = include_zeros;
            out.push(ModeSweep {
                ks: cfg.ks,
                rows: sweep(corpus, ordered, k_range.clone(), &cfg)?,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub worker_id: String,
    pub precision_amt: f64,
    pub per_trusted_p: BTreeMap<String, f64>,
    pub avg_p: f64,
    pub attempted: usize,
    pub tot_amt: f64,
    pub eui_amt: f64,
    pub gof_pl: Option<f64>,
    pub powerlaw: Option<PowerLawFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorModel {
    pub factor: String,
    pub n: usize,
    pub model: Option<RegressionResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub trusted_ids: Vec<String>,
    pub rows: Vec<BaselineRow>,
    pub factors: Vec<FactorModel>,
    /// Precision on (avg_p, eui_amt).
    pub two_factor: Option<RegressionResult>,
    pub ks_config: KsConfig,
    pub powerlaw_config: PowerLawConfig,
}

impl BaselineReport {
    pub fn factor(&self, name: &str) -> Option<&FactorModel> {
        self.factors.iter().find(|f| f.factor == name)
    }
}

fn gof_for(worker: &WorkerProfile, config: &PowerLawConfig) -> Option<(PowerLawFit, f64)> {
    let data: Vec<f64> = worker.distribution.counts.iter().filter(|&&c| c > 0).map(|&c| c as f64).collect();
    let attempt = powerlaw::fit(&data, config.mode).and_then(|fit| {
        let seed = derive_seed(config.seed, &["gof", &worker.worker_id]);
        powerlaw::gof_pvalue(&data, &fit, config.replicates, seed)
    });
    match attempt {
        Ok(g) => Some((g.fit, g.p_value)),
        Err(e) => {
            log::warn!("power-law fit failed for worker {}: {e}", worker.worker_id);
            None
        }
    }
}

/// Regress precision on avg_p and on each alternative factor.
pub fn baseline_compare(
    workers: &[WorkerProfile],
    trusted: &[TrustedProfile],
    ks: &KsConfig,
    powerlaw_config: &PowerLawConfig,
) -> Result<BaselineReport> {
    if workers.is_empty() {
        return Err(Error::Argument("baseline comparison needs at least one worker".into()));
    }
    let scored = score_all(workers, trusted, ks);
    let rows: Vec<BaselineRow> = scored
        .into_par_iter()
        .map(|(i, score)| {
            let w = &workers[i];
            let gof = gof_for(w, powerlaw_config);
            BaselineRow {
                worker_id: w.worker_id.clone(),
                precision_amt: w.precision_amt,
                per_trusted_p: score.per_trusted_p,
                avg_p: score.avg_p,
                attempted: w.attempted,
                tot_amt: w.tot_amt,
                eui_amt: w.eui_amt,
                gof_pl: gof.map(|g| g.1),
                powerlaw: gof.map(|g| g.0),
            }
        })
        .collect();

    let trusted_ids: Vec<String> = trusted.iter().map(|t| t.labeler_id.clone()).collect();
    let mut factors = Vec::new();
    let mut push = |name: String, pairs: Vec<(f64, f64)>| {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        factors.push(FactorModel {
            factor: name,
            n: x.len(),
            model: single_predictor(&x, &y),
        });
    };
    for id in &trusted_ids {
        push(format!("p_{id}"), rows.iter().map(|r| (r.per_trusted_p[id], r.precision_amt)).collect());
    }
    push("avg_p".into(), rows.iter().map(|r| (r.avg_p, r.precision_amt)).collect());
    push("attempted".into(), rows.iter().map(|r| (r.attempted as f64, r.precision_amt)).collect());
    push("tot".into(), rows.iter().map(|r| (r.tot_amt, r.precision_amt)).collect());
    push("eui".into(), rows.iter().map(|r| (r.eui_amt, r.precision_amt)).collect());
    push(
        "gof_pl".into(),
        rows.iter().filter_map(|r| r.gof_pl.map(|g| (g, r.precision_amt))).collect(),
    );

    let two_factor = if rows.len() >= 4 {
        let avg: Vec<f64> = rows.iter().map(|r| r.avg_p).collect();
        let eui: Vec<f64> = rows.iter().map(|r| r.eui_amt).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.precision_amt).collect();
        ols(&[avg, eui], &y).map_err(|e| log::warn!("two-factor model skipped: {e}")).ok()
    } else {
        None
    };

    Ok(BaselineReport {
        trusted_ids,
        rows,
        factors,
        two_factor,
        ks_config: *ks,
        powerlaw_config: powerlaw_config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BoundingBox, HitStatus, ScreenshotLabeling, WorkerTaskRecord};
    use crate::metrics::{trusted_profiles, ClassDistribution};
    use crate::stats::f_from_r_squared;
    use proptest::prelude::*;

    fn dist(counts: &[u64]) -> ClassDistribution {
        let vocab = (0..counts.len()).map(|i| format!("c{i}")).collect();
        ClassDistribution::new(vocab, counts.to_vec()).unwrap()
    }

    fn trusted(id: &str, q: f64, precision: f64, counts: &[u64]) -> TrustedProfile {
        TrustedProfile {
            labeler_id: id.into(),
            distribution: dist(counts),
            screenshots: BTreeSet::new(),
            n_uis: 1,
            n_verified: 1,
            precision_t: Some(precision),
            precision_sd: Some(0.0),
            sc: Some(q / precision),
            sc_sd: Some(0.0),
            q: Some(q),
            elements: counts.iter().sum::<u64>() as usize,
            eui_t: 1.0,
        }
    }

    fn worker(id: &str, counts: &[u64]) -> WorkerProfile {
        WorkerProfile {
            worker_id: id.into(),
            distribution: dist(counts),
            screenshots: BTreeSet::new(),
            attempted: 10,
            accepted: 5,
            rejected: 5,
            precision_amt: 0.5,
            elements: counts.iter().sum::<u64>() as usize,
            eui_amt: 1.0,
            tot_amt: 1.0,
        }
    }

    #[test]
    fn ordering_and_tie_breaks() {
        let a = trusted("A", 0.8, 0.8, &[1]);
        let b = trusted("B", 0.8, 0.9, &[1]);
        let c = trusted("C", 0.9, 0.9, &[1]);
        let mut none = trusted("D", 0.5, 0.5, &[1]);
        none.q = None;
        let order: Vec<String> = order_trusted(&[a.clone(), b, c, none]).into_iter().map(|t| t.labeler_id).collect();
        assert_eq!(order, ["C", "B", "A"]);
        assert_eq!(order_trusted(&[a.clone()]), vec![a]);
        let x = trusted("X", 0.5, 0.5, &[1]);
        let y = trusted("W", 0.5, 0.5, &[1]);
        let order: Vec<String> = order_trusted(&[x, y]).into_iter().map(|t| t.labeler_id).collect();
        assert_eq!(order, ["W", "X"]);
    }

    #[test]
    fn identical_distribution_scores_one() {
        let counts = [50, 20, 10, 5, 3, 1, 0, 0, 7, 2];
        let s = dgt_score(&worker("w", &counts), &[trusted("T", 0.9, 0.9, &counts)], &KsConfig::default()).unwrap();
        assert_eq!(s.avg_p, 1.0);
    }

    #[test]
    fn score_errors() {
        let t = trusted("T", 0.9, 0.9, &[3, 2, 1]);
        assert!(matches!(dgt_score(&worker("w", &[0, 0, 0]), &[t.clone()], &KsConfig::default()), Err(Error::Degenerate(_))));
        assert!(dgt_score(&worker("w", &[1, 2, 3]), &[], &KsConfig::default()).is_err());
        assert!(dgt_score(&worker("w", &[1, 2, 3]), &[t.clone(), t], &KsConfig::default()).is_err());
    }

    #[test]
    fn average_p_examples() {
        assert!((average_p(&[0.856, 0.837]).unwrap() - 0.847).abs() < 1e-3);
        assert!((average_p(&[0.002, 0.002]).unwrap() - 0.002).abs() < 1e-12);
        assert!(average_p(&[]).is_err());
    }

    #[test]
    fn exact_method_is_deterministic() {
        let ks = KsConfig {
            pmethod: PValueMethod::exact(11),
            ..Default::default()
        };
        let t = [trusted("A", 0.9, 0.9, &[40, 30, 2, 9, 1, 0, 5, 5, 3, 3, 6, 8]), trusted("B", 0.8, 0.9, &[4, 3, 2, 1])];
        let w = worker("w", &[9, 1, 1, 1, 0, 2, 3, 1, 1, 0]);
        assert_eq!(dgt_score(&w, &t, &ks).unwrap(), dgt_score(&w, &t, &ks).unwrap());
    }

    fn bx(label: &str) -> BoundingBox {
        BoundingBox::new(label, 0, 0, 1, 1).unwrap()
    }

    fn labeled(screenshot: &str, labeler: &str, labels: &[&str]) -> ScreenshotLabeling {
        let mut l = ScreenshotLabeling::new(screenshot, labeler, labels.iter().map(|s| bx(s)).collect());
        l.verdicts = vec![Some(crate::corpus::Verdict::Correct); l.boxes.len()];
        l.completeness = Some(100.0);
        l
    }

    fn rec(worker: &str, screenshot: &str, accepted: bool, labels: &[&str]) -> WorkerTaskRecord {
        WorkerTaskRecord {
            worker_id: worker.into(),
            screenshot_id: screenshot.into(),
            status: if accepted { HitStatus::Accepted } else { HitStatus::Rejected },
            time_on_task_s: 5.0,
            boxes: labels.iter().map(|s| bx(s)).collect(),
        }
    }

    #[test]
    fn full_coverage_leaves_empty_subset() {
        let corpus = Corpus::with_default_vocabularies(
            vec![labeled("s1", "T", &["link"]), labeled("s2", "T", &["image"])],
            vec![rec("w", "s1", true, &["link"]), rec("w", "s2", true, &["link"])],
        )
        .unwrap();
        let ordered = order_trusted(&trusted_profiles(&corpus, &DistributionOptions::default()));
        let rule = InclusionRule {
            min_attempted: 1,
            min_elements: 1,
        };
        let subset = testing_subset(&corpus, &ordered, 1, &rule, &DistributionOptions::default()).unwrap();
        assert!(subset.workers.is_empty());
        assert_eq!(subset.uis_fraction(), 1.0);
        assert!(testing_subset(&corpus, &ordered, 0, &rule, &DistributionOptions::default()).is_err());
        assert!(testing_subset(&corpus, &ordered, 2, &rule, &DistributionOptions::default()).is_err());
        assert!(sweep(&corpus, &ordered, 1..=2, &DgtConfig::default()).is_err());
    }

    #[test]
    fn two_workers_give_no_model() {
        let labels = ["link", "link", "button", "image", "panel"];
        let corpus = Corpus::with_default_vocabularies(
            vec![labeled("t1", "T", &["link", "link", "button", "image"])],
            vec![rec("a", "s1", true, &labels), rec("a", "s2", false, &labels), rec("b", "s1", true, &["link", "image", "image"])],
        )
        .unwrap();
        let ordered = order_trusted(&trusted_profiles(&corpus, &DistributionOptions::default()));
        let cfg = DgtConfig {
            rule: InclusionRule {
                min_attempted: 1,
                min_elements: 1,
            },
            ..Default::default()
        };
        let rows = sweep(&corpus, &ordered, 1..=1, &cfg).unwrap();
        assert_eq!(rows[0].workers_in_subset, 2);
        assert_eq!(rows[0].scores.len(), 2);
        assert!(rows[0].model.is_none());
    }

    #[test]
    fn affine_precision_gives_unit_r_squared() {
        let trusted_set = [trusted("A", 0.9, 0.9, &[60, 25, 10, 5, 3, 2, 1, 1, 0, 0]), trusted("B", 0.8, 0.8, &[30, 30, 20, 10, 5, 3, 1, 1, 0, 0])];
        let ks = KsConfig::default();
        let shapes: [&[u64]; 6] = [
            &[60, 25, 10, 5, 3, 2, 1, 1, 0, 0],
            &[10, 10, 10, 10, 10, 10, 10, 10, 10, 10],
            &[100, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            &[40, 30, 20, 5, 5, 0, 0, 0, 0, 0],
            &[5, 5, 5, 5, 5, 5, 30, 30, 5, 5],
            &[20, 20, 20, 20, 20, 0, 0, 0, 0, 0],
        ];
        let mut workers: Vec<WorkerProfile> = shapes.iter().enumerate().map(|(i, c)| worker(&format!("w{i}"), c)).collect();
        for (i, w) in workers.iter_mut().enumerate() {
            let s = dgt_score(w, &trusted_set, &ks).unwrap();
            w.precision_amt = 0.2 + 0.5 * s.avg_p;
            w.eui_amt = (i * i) as f64 + 1.0;
        }
        let pl = PowerLawConfig {
            replicates: 100,
            ..Default::default()
        };
        let report = baseline_compare(&workers, &trusted_set, &ks, &pl).unwrap();
        let avg = report.factor("avg_p").unwrap();
        assert!((avg.model.as_ref().unwrap().r_squared - 1.0).abs() < 1e-9);
        for r in &report.rows {
            let mean = r.per_trusted_p.values().sum::<f64>() / r.per_trusted_p.len() as f64;
            assert!((r.avg_p - mean).abs() < 1e-12);
        }
        let names: Vec<&str> = report.factors.iter().map(|f| f.factor.as_str()).collect();
        assert_eq!(names, ["p_A", "p_B", "avg_p", "attempted", "tot", "eui", "gof_pl"]);
        // constant attempted cannot be regressed on
        assert!(report.factor("attempted").unwrap().model.is_none());
        assert!(report.two_factor.is_some());
        assert!(baseline_compare(&[], &trusted_set, &ks, &pl).is_err());
    }

    fn arb_counts() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(0u64..60, 10).prop_filter("non-empty", |c| c.iter().filter(|&&x| x > 0).count() >= 2)
    }

    proptest! {
        #[test]
        fn score_is_permutation_invariant(w in arb_counts(), ts in prop::collection::vec(arb_counts(), 1..5), seed in any::<u64>()) {
            let trusted_set: Vec<TrustedProfile> = ts.iter().enumerate().map(|(i, c)| trusted(&format!("t{i}"), 0.5, 0.5, c)).collect();
            let mut shuffled = trusted_set.clone();
            let n = shuffled.len();
            shuffled.rotate_left((seed as usize) % n);
            shuffled.reverse();
            let wp = worker("w", &w);
            let a = dgt_score(&wp, &trusted_set, &KsConfig::default()).unwrap();
            let b = dgt_score(&wp, &shuffled, &KsConfig::default()).unwrap();
            prop_assert_eq!(a.avg_p, b.avg_p);
            let mean = a.per_trusted_p.values().sum::<f64>() / a.per_trusted_p.len() as f64;
            prop_assert!((a.avg_p - mean).abs() <= 1e-12);
        }

        #[test]
        fn score_is_scale_invariant(w in arb_counts(), ts in prop::collection::vec(arb_counts(), 1..4), k in 1u64..6, zeros in any::<bool>(), prop_mode in any::<bool>()) {
            let trusted_set: Vec<TrustedProfile> = ts.iter().enumerate().map(|(i, c)| trusted(&format!("t{i}"), 0.5, 0.5, c)).collect();
            let ks = KsConfig {
                norm: if prop_mode { NormMode::Proportion } else { NormMode::Mean },
                include_zeros: zeros,
                ..Default::default()
            };
            let scaled: Vec<u64> = w.iter().map(|c| c * k).collect();
            let a = dgt_score(&worker("w", &w), &trusted_set, &ks).unwrap();
            let b = dgt_score(&worker("w", &scaled), &trusted_set, &ks).unwrap();
            prop_assert!((a.avg_p - b.avg_p).abs() <= 1e-9);
        }

        #[test]
        fn subsets_never_overlap_and_nest(
            trusted_spec in prop::collection::vec((0usize..4, 0u8..3), 1..25),
            worker_spec in prop::collection::vec((0usize..6, 0usize..40, any::<bool>(), 0usize..6), 0..120),
        ) {
            let labels = ["link", "button", "image", "panel", "table", "input"];
            let trusted_labelings: Vec<ScreenshotLabeling> = trusted_spec
                .iter()
                .enumerate()
                .map(|(i, &(labeler, extra))| {
                    let mut l = labeled(&format!("s{i}"), &format!("T{labeler}"), &labels[..2 + extra as usize]);
                    l.completeness = Some(50.0 + labeler as f64 * 10.0);
                    l
                })
                .collect();
            let records: Vec<WorkerTaskRecord> = worker_spec
                .iter()
                .map(|&(w, s, acc, n)| rec(&format!("w{w}"), &format!("s{s}"), acc, &labels[..n]))
                .collect();
            let corpus = Corpus::with_default_vocabularies(trusted_labelings, records).unwrap();
            let ordered = order_trusted(&trusted_profiles(&corpus, &DistributionOptions::default()));
            let rule = InclusionRule { min_attempted: 2, min_elements: 3 };
            let mut previous: Option<TestingSubset> = None;
            for k in 1..=ordered.len() {
                let subset = testing_subset(&corpus, &ordered, k, &rule, &DistributionOptions::default()).unwrap();
                let screens = subset.screenshots();
                for t in &ordered[..k] {
                    for s in &t.screenshots {
                        prop_assert!(!screens.contains(s.as_str()));
                    }
                }
                prop_assert!((0.0..=1.0).contains(&subset.uis_fraction()));
                if let Some(prev) = &previous {
                    let prev_screens = prev.screenshots();
                    prop_assert!(screens.is_subset(&prev_screens));
                    prop_assert!(subset.workers.len() <= prev.workers.len());
                }
                previous = Some(subset);
            }
        }

        #[test]
        fn stored_f_matches_identity(shapes in prop::collection::vec((arb_counts(), 1usize..20, 0usize..20), 3..10)) {
            let trusted_set = [trusted("A", 0.9, 0.9, &[60, 25, 10, 5, 3, 2, 1, 1, 0, 0])];
            let workers: Vec<WorkerProfile> = shapes
                .iter()
                .enumerate()
                .map(|(i, (c, a, r))| {
                    let mut w = worker(&format!("w{i}"), c);
                    w.accepted = *a;
                    w.rejected = *r;
                    w.attempted = a + r;
                    w.precision_amt = *a as f64 / (a + r) as f64;
                    w
                })
                .collect();
            let avg: Vec<f64> = workers.iter().map(|w| dgt_score(w, &trusted_set, &KsConfig::default()).unwrap().avg_p).collect();
            let y: Vec<f64> = workers.iter().map(|w| w.precision_amt).collect();
            if let Some(m) = single_predictor(&avg, &y) {
                let f = f_from_r_squared(m.r_squared, m.df);
                prop_assert!((f - m.f_statistic).abs() <= 1e-9 * f.abs().max(1.0));
            }
        }
    }
}
