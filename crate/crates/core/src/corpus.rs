//! The labeled-UI corpus: trusted labelings parsed from Pascal-VOC XML,
//! crowdworker HIT records, verifier verdicts and completeness scores.
//!
//! A [`Corpus`] is immutable once built; loaders return new values.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classes offered to the trusted labelers.
pub const TRUSTED_VOCABULARY: [&str; 20] = [
    "image",
    "backgroundimage",
    "panel",
    "list",
    "table",
    "paragraph",
    "textblock",
    "text",
    "symbol",
    "checkbox",
    "radiobutton",
    "selectbox",
    "textinput",
    "textarea",
    "button",
    "label",
    "tabs",
    "scrollbar",
    "pagination",
    "link",
];

/// Classes offered to crowdworkers in the labeling HIT.
pub const WORKER_VOCABULARY: [&str; 10] = [
    "button",
    "link",
    "check",
    "input",
    "dropdown",
    "table",
    "image",
    "backgroundimage",
    "navigation",
    "panel",
];

pub const SNAPSHOT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    #[serde(rename = "class")]
    pub class_label: String,
    pub xmin: u32,
    pub ymin: u32,
    pub xmax: u32,
    pub ymax: u32,
}

impl BoundingBox {
    pub fn new(class_label: impl Into<String>, xmin: u32, ymin: u32, xmax: u32, ymax: u32) -> Result<Self> {
        let class_label = class_label.into();
        if class_label.trim().is_empty() {
            return Err(Error::Value("bounding box class label is empty".into()));
        }
        if xmin >= xmax || ymin >= ymax {
            return Err(Error::Value(format!(
                "degenerate box ({xmin},{ymin})-({xmax},{ymax})"
            )));
        }
        Ok(BoundingBox {
            class_label,
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    Incorrect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenshotLabeling {
    pub screenshot_id: String,
    pub labeler_id: String,
    pub boxes: Vec<BoundingBox>,
    /// One slot per box once any verdict is recorded, empty otherwise.
    #[serde(default)]
    pub verdicts: Vec<Option<Verdict>>,
    /// Verifier's completeness rating on a 0–100 scale.
    #[serde(default)]
    pub completeness: Option<f64>,
}

impl ScreenshotLabeling {
    pub fn new(screenshot_id: impl Into<String>, labeler_id: impl Into<String>, boxes: Vec<BoundingBox>) -> Self {
        ScreenshotLabeling {
            screenshot_id: screenshot_id.into(),
            labeler_id: labeler_id.into(),
            boxes,
            verdicts: Vec::new(),
            completeness: None,
        }
    }

    /// Every box carries a verdict (and there is at least one box).
    pub fn is_fully_verified(&self) -> bool {
        !self.boxes.is_empty()
            && self.verdicts.len() == self.boxes.len()
            && self.verdicts.iter().all(Option::is_some)
    }

    /// (correct, incorrect) counts when fully verified.
    pub fn verdict_counts(&self) -> Option<(usize, usize)> {
        if !self.is_fully_verified() {
            return None;
        }
        let correct = self
            .verdicts
            .iter()
            .filter(|v| **v == Some(Verdict::Correct))
            .count();
        Some((correct, self.boxes.len() - correct))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HitStatus {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerTaskRecord {
    pub worker_id: String,
    pub screenshot_id: String,
    pub status: HitStatus,
    pub time_on_task_s: f64,
    #[serde(default)]
    pub boxes: Vec<BoundingBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub trusted_labelings: Vec<ScreenshotLabeling>,
    pub worker_records: Vec<WorkerTaskRecord>,
    pub trusted_vocabulary: Vec<String>,
    pub worker_vocabulary: Vec<String>,
}

fn check_vocabulary(name: &str, vocab: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for label in vocab {
        if !seen.insert(label.as_str()) {
            return Err(Error::Value(format!("{name} vocabulary repeats `{label}`")));
        }
    }
    Ok(())
}

impl Corpus {
    pub fn new(
        trusted_labelings: Vec<ScreenshotLabeling>,
        worker_records: Vec<WorkerTaskRecord>,
        trusted_vocabulary: Vec<String>,
        worker_vocabulary: Vec<String>,
    ) -> Result<Self> {
        check_vocabulary("trusted", &trusted_vocabulary)?;
        check_vocabulary("worker", &worker_vocabulary)?;
        let mut seen = BTreeSet::new();
        for l in &trusted_labelings {
            if !seen.insert(l.screenshot_id.as_str()) {
                return Err(Error::Conflict(format!(
                    "screenshot `{}` has more than one trusted labeling",
                    l.screenshot_id
                )));
            }
            if !l.verdicts.is_empty() && l.verdicts.len() != l.boxes.len() {
                return Err(Error::Value(format!(
                    "screenshot `{}`: {} verdicts for {} boxes",
                    l.screenshot_id,
                    l.verdicts.len(),
                    l.boxes.len()
                )));
            }
            if let Some(sc) = l.completeness {
                check_completeness(&l.screenshot_id, sc)?;
            }
        }
        for r in &worker_records {
            if !(r.time_on_task_s >= 0.0) || !r.time_on_task_s.is_finite() {
                return Err(Error::Value(format!(
                    "worker `{}`: time on task must be non-negative, got {}",
                    r.worker_id, r.time_on_task_s
                )));
            }
        }
        Ok(Corpus {
            trusted_labelings,
            worker_records,
            trusted_vocabulary,
            worker_vocabulary,
        })
    }

    /// Corpus with the default 20-class trusted and 10-class worker vocabularies.
    pub fn with_default_vocabularies(
        trusted_labelings: Vec<ScreenshotLabeling>,
        worker_records: Vec<WorkerTaskRecord>,
    ) -> Result<Self> {
        Corpus::new(
            trusted_labelings,
            worker_records,
            TRUSTED_VOCABULARY.iter().map(|s| s.to_string()).collect(),
            WORKER_VOCABULARY.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn empty() -> Self {
        Corpus::with_default_vocabularies(Vec::new(), Vec::new()).expect("default vocabularies are valid")
    }

    /// All screenshot ids referenced by trusted labelings or worker records.
    pub fn screenshot_ids(&self) -> BTreeSet<&str> {
        self.trusted_labelings
            .iter()
            .map(|l| l.screenshot_id.as_str())
            .chain(self.worker_records.iter().map(|r| r.screenshot_id.as_str()))
            .collect()
    }
}

fn check_completeness(screenshot_id: &str, sc: f64) -> Result<()> {
    if !(0.0..=100.0).contains(&sc) {
        return Err(Error::Value(format!(
            "screenshot `{screenshot_id}`: completeness {sc} outside [0, 100]"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Pascal VOC annotations

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, tag: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|c| c.has_tag_name(tag))
}

fn parse_corner(bndbox: roxmltree::Node, field: &str, object_index: usize) -> Result<u32> {
    let text = child(bndbox, field)
        .and_then(|n| n.text())
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .ok_or_else(|| Error::MissingField {
            object_index,
            field: field.to_string(),
        })?;
    if let Ok(v) = text.parse::<u32>() {
        return Ok(v);
    }
    // some tools write integral coordinates as "12.0"
    match text.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Ok(v as u32),
        _ => Err(Error::Geometry {
            object_index,
            detail: format!("{field} = `{text}` is not a non-negative integer"),
        }),
    }
}

/// Parse one Pascal-VOC annotation document into a labeling.
pub fn parse_annotation(xml_text: &str, labeler_id: &str, screenshot_id: &str) -> Result<ScreenshotLabeling> {
    let doc = roxmltree::Document::parse(xml_text).map_err(|e| {
        let pos = e.pos();
        Error::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();
    if !root.has_tag_name("annotation") {
        let pos = doc.text_pos_at(root.range().start);
        return Err(Error::Xml {
            line: pos.row,
            column: pos.col,
            message: format!("expected <annotation> root, found <{}>", root.tag_name().name()),
        });
    }
    let mut boxes = Vec::new();
    for (object_index, object) in root.children().filter(|c| c.has_tag_name("object")).enumerate() {
        let name = child(object, "name")
            .and_then(|n| n.text())
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .ok_or_else(|| Error::MissingField {
                object_index,
                field: "name".into(),
            })?;
        let bndbox = child(object, "bndbox").ok_or_else(|| Error::MissingField {
            object_index,
            field: "bndbox".into(),
        })?;
        let xmin = parse_corner(bndbox, "xmin", object_index)?;
        let ymin = parse_corner(bndbox, "ymin", object_index)?;
        let xmax = parse_corner(bndbox, "xmax", object_index)?;
        let ymax = parse_corner(bndbox, "ymax", object_index)?;
        if xmin >= xmax || ymin >= ymax {
            return Err(Error::Geometry {
                object_index,
                detail: format!("({xmin},{ymin})-({xmax},{ymax}) requires xmin < xmax and ymin < ymax"),
            });
        }
        boxes.push(BoundingBox {
            class_label: name.to_string(),
            xmin,
            ymin,
            xmax,
            ymax,
        });
    }
    Ok(ScreenshotLabeling::new(screenshot_id, labeler_id, boxes))
}

/// Render a labeling as a Pascal-VOC annotation document.
pub fn write_annotation(labeling: &ScreenshotLabeling) -> String {
    fn escape(s: &str) -> String {
        s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
    }
    let mut out = String::from("<annotation>\n");
    out.push_str(&format!("  <filename>{}.png</filename>\n", escape(&labeling.screenshot_id)));
    for b in &labeling.boxes {
        out.push_str(&format!(
            "  <object>\n    <name>{}</name>\n    <bndbox>\n      <xmin>{}</xmin>\n      <ymin>{}</ymin>\n      <xmax>{}</xmax>\n      <ymax>{}</ymax>\n    </bndbox>\n  </object>\n",
            escape(&b.class_label),
            b.xmin,
            b.ymin,
            b.xmax,
            b.ymax
        ));
    }
    out.push_str("</annotation>\n");
    out
}

/// An annotation file that could not be parsed and was left out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub reason: String,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

/// Load every `<labeler_id>/<screenshot_id>.xml` under `root`.
///
/// Files that fail to parse are skipped with a warning and reported back.
pub fn load_annotation_dir(root: &Path) -> Result<(Vec<ScreenshotLabeling>, Vec<SkippedFile>)> {
    let mut files = Vec::new();
    for labeler_dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let labeler_id = labeler_dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for path in sorted_entries(&labeler_dir)? {
            if path.extension().is_some_and(|e| e == "xml") {
                let screenshot_id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                files.push((labeler_id.clone(), screenshot_id, path));
            }
        }
    }
    let parsed: Vec<(PathBuf, Result<ScreenshotLabeling>)> = files
        .into_par_iter()
        .map(|(labeler, screenshot, path)| {
            let result = fs::read_to_string(&path)
                .map_err(|e| Error::io(&path, e))
                .and_then(|text| parse_annotation(&text, &labeler, &screenshot));
            (path, result)
        })
        .collect();

    let mut labelings = Vec::new();
    let mut skipped = Vec::new();
    for (path, result) in parsed {
        match result {
            Ok(l) => labelings.push(l),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                skipped.push(SkippedFile {
                    path,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok((labelings, skipped))
}

// ---------------------------------------------------------------------------
// Worker log

#[derive(Deserialize)]
struct RawBox {
    class: String,
    xmin: i64,
    ymin: i64,
    xmax: i64,
    ymax: i64,
}

#[derive(Deserialize)]
struct RawRecord {
    worker_id: String,
    screenshot_id: String,
    status: String,
    time_on_task_s: f64,
    #[serde(default)]
    boxes: Vec<RawBox>,
}

fn convert_record(raw: RawRecord) -> std::result::Result<WorkerTaskRecord, String> {
    let status = match raw.status.as_str() {
        "accepted" => HitStatus::Accepted,
        "rejected" => HitStatus::Rejected,
        other => return Err(format!("status must be \"accepted\" or \"rejected\", got {other:?}")),
    };
    if !(raw.time_on_task_s >= 0.0) {
        return Err(format!("time_on_task_s must be non-negative, got {}", raw.time_on_task_s));
    }
    let boxes = raw
        .boxes
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let coord = |v: i64| u32::try_from(v).map_err(|_| format!("box {i}: coordinate {v} out of range"));
            BoundingBox::new(b.class.trim(), coord(b.xmin)?, coord(b.ymin)?, coord(b.xmax)?, coord(b.ymax)?)
                .map_err(|e| format!("box {i}: {e}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(WorkerTaskRecord {
        worker_id: raw.worker_id,
        screenshot_id: raw.screenshot_id,
        status,
        time_on_task_s: raw.time_on_task_s,
        boxes,
    })
}

/// Read line-delimited JSON HIT records in file order. Blank lines are ignored.
pub fn load_worker_log(reader: impl Read) -> Result<Vec<WorkerTaskRecord>> {
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Line {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Line {
            line: line_no,
            message: e.to_string(),
        })?;
        let record = convert_record(raw).map_err(|message| Error::Line { line: line_no, message })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_worker_log(records: &[WorkerTaskRecord], mut out: impl Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io("<worker log>", e))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Debug, Deserialize)]
struct VerdictRow {
    screenshot_id: String,
    box_index: usize,
    verdict: String,
}

#[derive(Debug, Deserialize)]
struct CompletenessRow {
    screenshot_id: String,
    sc: f64,
}

fn labeling_index(corpus: &Corpus) -> HashMap<String, usize> {
    corpus
        .trusted_labelings
        .iter()
        .enumerate()
        .map(|(i, l)| (l.screenshot_id.clone(), i))
        .collect()
}

/// Attach per-box verdicts from a CSV with columns
/// `screenshot_id, box_index, verdict`.
pub fn apply_verdicts(corpus: &Corpus, reader: impl Read) -> Result<Corpus> {
    let mut out = corpus.clone();
    let index = labeling_index(corpus);
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for row in rdr.deserialize() {
        let row: VerdictRow = row?;
        let verdict = match row.verdict.as_str() {
            "correct" => Verdict::Correct,
            "incorrect" => Verdict::Incorrect,
            other => return Err(Error::Value(format!("verdict must be correct|incorrect, got `{other}`"))),
        };
        let &i = index
            .get(&row.screenshot_id)
            .ok_or_else(|| Error::Reference(row.screenshot_id.clone()))?;
        let labeling = &mut out.trusted_labelings[i];
        if row.box_index >= labeling.boxes.len() {
            return Err(Error::Index {
                screenshot_id: row.screenshot_id,
                index: row.box_index,
                len: labeling.boxes.len(),
            });
        }
        if labeling.verdicts.is_empty() {
            labeling.verdicts = vec![None; labeling.boxes.len()];
        }
        let slot = &mut labeling.verdicts[row.box_index];
        if slot.is_some() {
            return Err(Error::Conflict(format!(
                "duplicate verdict for box {} of screenshot `{}`",
                row.box_index, row.screenshot_id
            )));
        }
        *slot = Some(verdict);
    }
    Ok(out)
}

/// Attach completeness scores from a CSV with columns `screenshot_id, sc`.
pub fn apply_completeness(corpus: &Corpus, reader: impl Read) -> Result<Corpus> {
    let mut out = corpus.clone();
    let index = labeling_index(corpus);
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for row in rdr.deserialize() {
        let row: CompletenessRow = row?;
        check_completeness(&row.screenshot_id, row.sc)?;
        let &i = index
            .get(&row.screenshot_id)
            .ok_or_else(|| Error::Reference(row.screenshot_id.clone()))?;
        let labeling = &mut out.trusted_labelings[i];
        if labeling.completeness.is_some() {
            return Err(Error::Conflict(format!(
                "duplicate completeness for screenshot `{}`",
                row.screenshot_id
            )));
        }
        labeling.completeness = Some(row.sc);
    }
    Ok(out)
}

/// Apply whichever verification files are available.
pub fn load_verification<V: Read, C: Read>(corpus: &Corpus, verdicts: Option<V>, completeness: Option<C>) -> Result<Corpus> {
    let mut out = corpus.clone();
    if let Some(r) = verdicts {
        out = apply_verdicts(&out, r)?;
    }
    if let Some(r) = completeness {
        out = apply_completeness(&out, r)?;
    }
    Ok(out)
}

pub fn write_verdicts(corpus: &Corpus, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["screenshot_id", "box_index", "verdict"])?;
    for l in &corpus.trusted_labelings {
        for (i, v) in l.verdicts.iter().enumerate() {
            if let Some(v) = v {
                let v = match v {
                    Verdict::Correct => "correct",
                    Verdict::Incorrect => "incorrect",
                };
                w.write_record([l.screenshot_id.as_str(), &i.to_string(), v])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<verdicts>", e))?;
    Ok(())
}

pub fn write_completeness(corpus: &Corpus, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["screenshot_id", "sc"])?;
    for l in &corpus.trusted_labelings {
        if let Some(sc) = l.completeness {
            w.write_record([l.screenshot_id.as_str(), &sc.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<completeness>", e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Summary

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub screenshots: usize,
    pub trusted_screenshots: usize,
    pub trusted_labelers: usize,
    pub workers: usize,
    pub trusted_elements: usize,
    pub worker_elements: usize,
    pub accepted_hits: usize,
    pub rejected_hits: usize,
}

pub fn corpus_summary(corpus: &Corpus) -> CorpusSummary {
    let trusted_labelers: BTreeSet<&str> = corpus.trusted_labelings.iter().map(|l| l.labeler_id.as_str()).collect();
    let workers: BTreeSet<&str> = corpus.worker_records.iter().map(|r| r.worker_id.as_str()).collect();
    let accepted_hits = corpus
        .worker_records
        .iter()
        .filter(|r| r.status == HitStatus::Accepted)
        .count();
    CorpusSummary {
        screenshots: corpus.screenshot_ids().len(),
        trusted_screenshots: corpus.trusted_labelings.len(),
        trusted_labelers: trusted_labelers.len(),
        workers: workers.len(),
        trusted_elements: corpus.trusted_labelings.iter().map(|l| l.boxes.len()).sum(),
        worker_elements: corpus.worker_records.iter().map(|r| r.boxes.len()).sum(),
        accepted_hits,
        rejected_hits: corpus.worker_records.len() - accepted_hits,
    }
}

// ---------------------------------------------------------------------------
// Snapshot

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SnapshotLine {
    Header {
        schema_version: u32,
        trusted_vocabulary: Vec<String>,
        worker_vocabulary: Vec<String>,
    },
    Trusted(ScreenshotLabeling),
    Worker(WorkerTaskRecord),
}

/// Write the corpus as line-delimited JSON: one header line, then one line
/// per trusted labeling and per worker record.
pub fn export_corpus(corpus: &Corpus, mut out: impl Write) -> Result<()> {
    let io = |e| Error::io("<snapshot>", e);
    let header = SnapshotLine::Header {
        schema_version: SNAPSHOT_SCHEMA_VERSION,
        trusted_vocabulary: corpus.trusted_vocabulary.clone(),
        worker_vocabulary: corpus.worker_vocabulary.clone(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n").map_err(io)?;
    for l in &corpus.trusted_labelings {
        serde_json::to_writer(&mut out, &SnapshotLine::Trusted(l.clone()))?;
        out.write_all(b"\n").map_err(io)?;
    }
    for r in &corpus.worker_records {
        serde_json::to_writer(&mut out, &SnapshotLine::Worker(r.clone()))?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn import_corpus(reader: impl Read) -> Result<Corpus> {
    let mut header = None;
    let mut trusted = Vec::new();
    let mut workers = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Line {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: SnapshotLine = serde_json::from_str(&line).map_err(|e| Error::Line {
            line: line_no,
            message: e.to_string(),
        })?;
        match parsed {
            SnapshotLine::Header {
                schema_version,
                trusted_vocabulary,
                worker_vocabulary,
            } => {
                if line_no != 1 || header.is_some() {
                    return Err(Error::Line {
                        line: line_no,
                        message: "header record must be the first line".into(),
                    });
                }
                if schema_version != SNAPSHOT_SCHEMA_VERSION {
                    return Err(Error::Value(format!("unsupported snapshot schema version {schema_version}")));
                }
                header = Some((trusted_vocabulary, worker_vocabulary));
            }
            SnapshotLine::Trusted(l) => trusted.push(l),
            SnapshotLine::Worker(r) => workers.push(r),
        }
        if header.is_none() {
            return Err(Error::Line {
                line: line_no,
                message: "snapshot must start with a header record".into(),
            });
        }
    }
    let (tv, wv) = header.ok_or_else(|| Error::Value("snapshot is empty".into()))?;
    Corpus::new(trusted, workers, tv, wv)
}

/// Labelings grouped by labeler id, in id order.
pub fn labelings_by_labeler(corpus: &Corpus) -> BTreeMap<&str, Vec<&ScreenshotLabeling>> {
    let mut out: BTreeMap<&str, Vec<&ScreenshotLabeling>> = BTreeMap::new();
    for l in &corpus.trusted_labelings {
        out.entry(l.labeler_id.as_str()).or_default().push(l);
    }
    out
}

/// Worker records grouped by worker id, in id order.
pub fn records_by_worker<'a>(records: impl IntoIterator<Item = &'a WorkerTaskRecord>) -> BTreeMap<&'a str, Vec<&'a WorkerTaskRecord>> {
    let mut out: BTreeMap<&str, Vec<&WorkerTaskRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.worker_id.as_str()).or_default().push(r);
    }
    out
}
