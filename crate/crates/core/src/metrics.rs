//! Per-person quality quantities: precision, completeness, quality index,
//! work volume, time on task, and class distributions.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{labelings_by_labeler, records_by_worker, Corpus, HitStatus, ScreenshotLabeling, WorkerTaskRecord};
use crate::error::{Error, Result};
use crate::stats::mean_sd;

/// Class-label frequency table aligned with an ordered vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub vocabulary: Vec<String>,
    pub counts: Vec<u64>,
}

impl ClassDistribution {
    pub fn new(vocabulary: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        if vocabulary.len() != counts.len() {
            return Err(Error::Argument(format!(
                "{} counts for {} classes",
                counts.len(),
                vocabulary.len()
            )));
        }
        Ok(ClassDistribution { vocabulary, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, label: &str) -> u64 {
        self.vocabulary
            .iter()
            .position(|v| v == label)
            .map_or(0, |i| self.counts[i])
    }

    /// Drop zero-count classes, keeping order.
    pub fn without_zeros(&self) -> ClassDistribution {
        let (vocabulary, counts) = self
            .vocabulary
            .iter()
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| (v.clone(), c))
            .unzip();
        ClassDistribution { vocabulary, counts }
    }

    /// Multiply every count by `factor`.
    pub fn scaled(&self, factor: u64) -> ClassDistribution {
        ClassDistribution {
            vocabulary: self.vocabulary.clone(),
            counts: self.counts.iter().map(|c| c * factor).collect(),
        }
    }
}

/// How raw labels are turned into a distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistributionOptions {
    /// Keep vocabulary classes with zero occurrences.
    pub include_zeros: bool,
    /// Append out-of-vocabulary labels as extra classes instead of dropping them.
    pub include_custom: bool,
    /// Label rewrites applied after trimming whitespace.
    pub aliases: BTreeMap<String, String>,
}

impl Default for DistributionOptions {
    fn default() -> Self {
        DistributionOptions {
            include_zeros: true,
            include_custom: false,
            aliases: BTreeMap::new(),
        }
    }
}

impl DistributionOptions {
    pub fn canonical_label<'a>(&'a self, label: &'a str) -> &'a str {
        let trimmed = label.trim();
        self.aliases.get(trimmed).map_or(trimmed, String::as_str)
    }
}

/// Count labels against `vocabulary`.
///
/// Custom classes, when kept, follow the vocabulary in lexicographic order.
pub fn class_distribution<'a>(
    labels: impl IntoIterator<Item = &'a str>,
    vocabulary: &[String],
    options: &DistributionOptions,
) -> ClassDistribution {
    let index: BTreeMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut counts = vec![0u64; vocabulary.len()];
    let mut custom: BTreeMap<String, u64> = BTreeMap::new();
    for label in labels {
        let label = options.canonical_label(label);
        match index.get(label) {
            Some(&i) => counts[i] += 1,
            None if options.include_custom => *custom.entry(label.to_string()).or_default() += 1,
            None => {}
        }
    }
    let mut dist = ClassDistribution {
        vocabulary: vocabulary.to_vec(),
        counts,
    };
    for (label, c) in custom {
        dist.vocabulary.push(label);
        dist.counts.push(c);
    }
    if options.include_zeros {
        dist
    } else {
        dist.without_zeros()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    Raw,
    #[default]
    Mean,
    Proportion,
}

impl NormMode {
    pub const ALL: [NormMode; 3] = [NormMode::Raw, NormMode::Mean, NormMode::Proportion];

    pub fn as_str(self) -> &'static str {
        match self {
            NormMode::Raw => "raw",
            NormMode::Mean => "mean",
            NormMode::Proportion => "proportion",
        }
    }
}

impl std::fmt::Display for NormMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(NormMode::Raw),
            "mean" => Ok(NormMode::Mean),
            "proportion" => Ok(NormMode::Proportion),
            other => Err(Error::Argument(format!("unknown normalization `{other}` (raw|mean|proportion)"))),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Normalize counts for the KS comparison.
///
/// Counts are reduced by their common divisor first, so multiplying a
/// distribution by an integer yields bitwise-identical mean and proportion
/// vectors.
pub fn normalize_distribution(dist: &ClassDistribution, mode: NormMode) -> Result<Vec<f64>> {
    let total = dist.total();
    if total == 0 {
        return Err(Error::Degenerate("distribution has no labeled elements".into()));
    }
    if mode == NormMode::Raw {
        return Ok(dist.counts.iter().map(|&c| c as f64).collect());
    }
    let g = dist.counts.iter().fold(0, |acc, &c| gcd(acc, c));
    let reduced_total = (total / g) as u128;
    let classes = dist.counts.len() as u128;
    Ok(dist
        .counts
        .iter()
        .map(|&c| {
            let c = (c / g) as u128;
            match mode {
                NormMode::Mean => (c * classes) as f64 / reduced_total as f64,
                _ => c as f64 / reduced_total as f64,
            }
        })
        .collect())
}

/// Values sorted by descending frequency, optionally averaging consecutive
/// pairs of ranks (used to draw a 20-class profile against 10 ranks).
pub fn rank_profile(values: &[f64], pair_average: bool) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if !pair_average {
        return sorted;
    }
    sorted
        .chunks(2)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// Macro-averaged precision over screenshots given (correct, incorrect) counts.
pub fn precision_trusted(per_screenshot: &[(usize, usize)]) -> Result<f64> {
    if per_screenshot.is_empty() {
        return Err(Error::Argument("precision needs at least one verified screenshot".into()));
    }
    let mut sum = 0.0;
    for (i, &(correct, incorrect)) in per_screenshot.iter().enumerate() {
        let n = correct + incorrect;
        if n == 0 {
            return Err(Error::Argument(format!("screenshot {i} has no verified elements")));
        }
        sum += correct as f64 / n as f64;
    }
    Ok(sum / per_screenshot.len() as f64)
}

/// Mean completeness score rescaled from 0–100 to [0, 1]. Absent scores are skipped.
pub fn subjective_completeness(scores: &[Option<f64>]) -> Result<f64> {
    let present: Vec<f64> = scores.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::Argument("no completeness scores recorded".into()));
    }
    if let Some(bad) = present.iter().find(|s| !(0.0..=100.0).contains(*s)) {
        return Err(Error::Argument(format!("completeness score {bad} outside [0, 100]")));
    }
    Ok(present.iter().sum::<f64>() / present.len() as f64 / 100.0)
}

pub fn quality_index(precision: f64, sc: f64) -> Result<f64> {
    for (name, v) in [("precision", precision), ("completeness", sc)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Argument(format!("{name} {v} outside [0, 1]")));
        }
    }
    Ok(precision * sc)
}

pub fn precision_worker(accepted: usize, rejected: usize) -> Result<f64> {
    let attempted = accepted + rejected;
    if attempted == 0 {
        return Err(Error::Undefined("precision of a worker with no attempted HITs".into()));
    }
    Ok(accepted as f64 / attempted as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustedProfile {
    pub labeler_id: String,
    pub distribution: ClassDistribution,
    pub screenshots: BTreeSet<String>,
    /// Screenshots labeled.
    pub n_uis: usize,
    /// Screenshots whose every box has a verdict.
    pub n_verified: usize,
    pub precision_t: Option<f64>,
    pub precision_sd: Option<f64>,
    pub sc: Option<f64>,
    /// Sample SD of completeness on the 0–100 scale.
    pub sc_sd: Option<f64>,
    pub q: Option<f64>,
    /// All boxes, custom classes included.
    pub elements: usize,
    pub eui_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerProfile {
    pub worker_id: String,
    pub distribution: ClassDistribution,
    pub screenshots: BTreeSet<String>,
    pub attempted: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub precision_amt: f64,
    /// All boxes across attempted HITs.
    pub elements: usize,
    pub eui_amt: f64,
    pub tot_amt: f64,
}

fn trusted_profile(
    labeler_id: &str,
    labelings: &[&ScreenshotLabeling],
    vocabulary: &[String],
    options: &DistributionOptions,
) -> TrustedProfile {
    let distribution = class_distribution(
        labelings.iter().flat_map(|l| l.boxes.iter().map(|b| b.class_label.as_str())),
        vocabulary,
        options,
    );
    let verified: Vec<(usize, usize)> = labelings.iter().filter_map(|l| l.verdict_counts()).collect();
    let per_screenshot: Vec<f64> = verified.iter().map(|&(c, i)| c as f64 / (c + i) as f64).collect();
    let (precision_t, precision_sd) = match precision_trusted(&verified) {
        Ok(p) => (Some(p), Some(mean_sd(&per_screenshot).1)),
        Err(_) => {
            log::warn!("trusted labeler {labeler_id} has no fully verified screenshots");
            (None, None)
        }
    };
    let scores: Vec<Option<f64>> = labelings.iter().map(|l| l.completeness).collect();
    let present: Vec<f64> = scores.iter().flatten().copied().collect();
    let (sc, sc_sd) = match subjective_completeness(&scores) {
        Ok(sc) => (Some(sc), Some(mean_sd(&present).1)),
        Err(_) => {
            log::warn!("trusted labeler {labeler_id} has no completeness scores");
            (None, None)
        }
    };
    let q = match (precision_t, sc) {
        (Some(p), Some(s)) => quality_index(p, s).ok(),
        _ => None,
    };
    let elements: usize = labelings.iter().map(|l| l.boxes.len()).sum();
    TrustedProfile {
        labeler_id: labeler_id.to_string(),
        distribution,
        screenshots: labelings.iter().map(|l| l.screenshot_id.clone()).collect(),
        n_uis: labelings.len(),
        n_verified: verified.len(),
        precision_t,
        precision_sd,
        sc,
        sc_sd,
        q,
        elements,
        eui_t: elements as f64 / labelings.len().max(1) as f64,
    }
}

fn worker_profile(
    worker_id: &str,
    records: &[&WorkerTaskRecord],
    vocabulary: &[String],
    options: &DistributionOptions,
) -> WorkerProfile {
    let distribution = class_distribution(
        records.iter().flat_map(|r| r.boxes.iter().map(|b| b.class_label.as_str())),
        vocabulary,
        options,
    );
    let attempted = records.len();
    let accepted = records.iter().filter(|r| r.status == HitStatus::Accepted).count();
    let elements: usize = records.iter().map(|r| r.boxes.len()).sum();
    let time: f64 = records.iter().map(|r| r.time_on_task_s).sum();
    WorkerProfile {
        worker_id: worker_id.to_string(),
        distribution,
        screenshots: records.iter().map(|r| r.screenshot_id.clone()).collect(),
        attempted,
        accepted,
        rejected: attempted - accepted,
        precision_amt: accepted as f64 / attempted as f64,
        elements,
        eui_amt: elements as f64 / attempted as f64,
        tot_amt: time / attempted as f64,
    }
}

/// One profile per trusted labeler, sorted by id.
pub fn trusted_profiles(corpus: &Corpus, options: &DistributionOptions) -> Vec<TrustedProfile> {
    let groups: Vec<(&str, Vec<&ScreenshotLabeling>)> = labelings_by_labeler(corpus).into_iter().collect();
    groups
        .par_iter()
        .map(|(id, ls)| trusted_profile(id, ls, &corpus.trusted_vocabulary, options))
        .collect()
}

/// One profile per worker appearing in `records`, sorted by id.
pub fn worker_profiles<'a>(
    records: impl IntoIterator<Item = &'a WorkerTaskRecord>,
    vocabulary: &[String],
    options: &DistributionOptions,
) -> Vec<WorkerProfile> {
    let groups: Vec<(&str, Vec<&WorkerTaskRecord>)> = records_by_worker(records).into_iter().collect();
    groups
        .par_iter()
        .map(|(id, rs)| worker_profile(id, rs, vocabulary, options))
        .collect()
}

pub fn build_profiles(corpus: &Corpus, options: &DistributionOptions) -> (Vec<TrustedProfile>, Vec<WorkerProfile>) {
    (
        trusted_profiles(corpus, options),
        worker_profiles(&corpus.worker_records, &corpus.worker_vocabulary, options),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BoundingBox, Verdict, WORKER_VOCABULARY};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn worker_vocab() -> Vec<String> {
        WORKER_VOCABULARY.iter().map(|s| s.to_string()).collect()
    }

    fn bx(label: &str) -> BoundingBox {
        BoundingBox::new(label, 0, 0, 1, 1).unwrap()
    }

    #[test]
    fn precision_is_macro_averaged() {
        let p = precision_trusted(&[(9, 1), (4, 1)]).unwrap();
        assert_abs_diff_eq!(p, 0.85, epsilon = 1e-15);
        assert!((p - 13.0 / 15.0).abs() > 0.01);
        assert_eq!(precision_trusted(&[(5, 0), (7, 0)]).unwrap(), 1.0);
        assert!(precision_trusted(&[]).is_err());
        assert!(precision_trusted(&[(1, 0), (0, 0)]).is_err());
    }

    #[test]
    fn completeness_examples() {
        assert_abs_diff_eq!(subjective_completeness(&[Some(80.0), Some(90.0)]).unwrap(), 0.85, epsilon = 1e-15);
        assert_eq!(subjective_completeness(&[Some(100.0), None]).unwrap(), 1.0);
        assert!(subjective_completeness(&[None, None]).is_err());
        assert!(subjective_completeness(&[]).is_err());
    }

    #[test]
    fn quality_index_examples() {
        assert_abs_diff_eq!(quality_index(0.928, 0.955).unwrap(), 0.886, epsilon = 5e-4);
        assert_abs_diff_eq!(quality_index(0.974, 0.804).unwrap(), 0.783, epsilon = 5e-4);
        assert_eq!(quality_index(1.0, 1.0).unwrap(), 1.0);
        assert!(quality_index(1.2, 0.5).is_err());
        assert!(quality_index(0.5, -0.1).is_err());
    }

    #[test]
    fn worker_precision_examples() {
        assert_abs_diff_eq!(precision_worker(38, 1).unwrap(), 0.974, epsilon = 1e-3);
        assert_eq!(precision_worker(0, 34).unwrap(), 0.0);
        assert!(matches!(precision_worker(0, 0), Err(Error::Undefined(_))));
    }

    #[test]
    fn distribution_counts_vocabulary() {
        let d = class_distribution(["link", "link", "button"], &worker_vocab(), &DistributionOptions::default());
        assert_eq!(d.len(), 10);
        assert_eq!(d.count("link"), 2);
        assert_eq!(d.count("button"), 1);
        assert_eq!(d.counts.iter().filter(|&&c| c == 0).count(), 8);
        assert_eq!(d.total(), 3);

        let empty = class_distribution(std::iter::empty(), &worker_vocab(), &DistributionOptions::default());
        assert_eq!(empty.total(), 0);
        assert_eq!(empty.len(), 10);
        assert!(normalize_distribution(&empty, NormMode::Mean).is_err());
    }

    #[test]
    fn distribution_custom_and_aliases() {
        let mut opts = DistributionOptions {
            include_zeros: false,
            ..Default::default()
        };
        opts.aliases.insert("hyperlink".into(), "link".into());
        let labels = [" link ", "hyperlink", "zzz", "aaa", "zzz"];
        let d = class_distribution(labels, &worker_vocab(), &opts);
        assert_eq!(d.vocabulary, ["link"]);
        assert_eq!(d.counts, [2]);
        opts.include_custom = true;
        let d = class_distribution(labels, &worker_vocab(), &opts);
        assert_eq!(d.vocabulary, ["link", "aaa", "zzz"]);
        assert_eq!(d.counts, [2, 1, 2]);
    }

    #[test]
    fn normalization_examples() {
        let d = class_distribution(["link", "link", "button"], &worker_vocab(), &DistributionOptions::default());
        let mean = normalize_distribution(&d, NormMode::Mean).unwrap();
        assert_abs_diff_eq!(mean[0], 10.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mean[1], 20.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mean.iter().sum::<f64>() / 10.0, 1.0, epsilon = 1e-12);
        let uniform = ClassDistribution::new(vec!["a".into(), "b".into(), "c".into(), "d".into()], vec![5; 4]).unwrap();
        assert_eq!(normalize_distribution(&uniform, NormMode::Mean).unwrap(), vec![1.0; 4]);
        assert_eq!(normalize_distribution(&d, NormMode::Raw).unwrap()[1], 2.0);
    }

    #[test]
    fn rank_profile_pairs() {
        let r = rank_profile(&[1.0, 4.0, 2.0, 3.0, 5.0], true);
        assert_eq!(r, vec![4.5, 2.5, 1.0]);
        assert_eq!(rank_profile(&[1.0, 3.0], false), vec![3.0, 1.0]);
    }

    fn record(worker: &str, screenshot: &str, accepted: bool, tot: f64, labels: &[&str]) -> WorkerTaskRecord {
        WorkerTaskRecord {
            worker_id: worker.into(),
            screenshot_id: screenshot.into(),
            status: if accepted { HitStatus::Accepted } else { HitStatus::Rejected },
            time_on_task_s: tot,
            boxes: labels.iter().map(|l| bx(l)).collect(),
        }
    }

    #[test]
    fn worker_profiles_include_empty_hits() {
        let ten = ["link"; 10];
        let twenty = ["button"; 20];
        let thirty = ["image"; 30];
        let recs = vec![
            record("w", "a", true, 10.0, &ten),
            record("w", "b", false, 20.0, &twenty),
            record("w", "c", true, 30.0, &thirty),
            record("v", "a", false, 50.0, &[]),
        ];
        let profiles = worker_profiles(&recs, &worker_vocab(), &DistributionOptions::default());
        assert_eq!(profiles.iter().map(|p| p.worker_id.as_str()).collect::<Vec<_>>(), ["v", "w"]);
        let w = &profiles[1];
        assert_eq!(w.eui_amt, 20.0);
        assert_eq!(w.tot_amt, 20.0);
        assert_eq!((w.attempted, w.accepted, w.rejected), (3, 2, 1));
        assert_abs_diff_eq!(w.precision_amt, 2.0 / 3.0);
        assert_eq!(w.distribution.total(), 60);
        let v = &profiles[0];
        assert_eq!((v.eui_amt, v.tot_amt, v.elements), (0.0, 50.0, 0));
    }

    #[test]
    fn trusted_profile_quality_fields() {
        let mut s1 = ScreenshotLabeling::new("s1", "VY", (0..10).map(|_| bx("link")).collect());
        s1.verdicts = (0..10).map(|i| Some(if i < 9 { Verdict::Correct } else { Verdict::Incorrect })).collect();
        s1.completeness = Some(90.0);
        let mut s2 = ScreenshotLabeling::new("s2", "VY", vec![bx("image"), bx("a"), bx("b"), bx("c"), bx("custom")]);
        s2.verdicts = vec![Some(Verdict::Correct), Some(Verdict::Correct), Some(Verdict::Correct), Some(Verdict::Correct), Some(Verdict::Incorrect)];
        s2.completeness = Some(80.0);
        let unverified = ScreenshotLabeling::new("s3", "SV", vec![bx("link")]);
        let corpus = Corpus::with_default_vocabularies(vec![s1, s2, unverified], vec![]).unwrap();
        let (trusted, workers) = build_profiles(&corpus, &DistributionOptions::default());
        assert!(workers.is_empty());
        let sv = &trusted[0];
        assert_eq!(sv.labeler_id, "SV");
        assert!(sv.q.is_none() && sv.precision_t.is_none() && sv.sc.is_none());
        let vy = &trusted[1];
        assert_abs_diff_eq!(vy.precision_t.unwrap(), 0.85, epsilon = 1e-15);
        assert_abs_diff_eq!(vy.sc.unwrap(), 0.85, epsilon = 1e-15);
        assert_eq!(vy.q.unwrap(), vy.precision_t.unwrap() * vy.sc.unwrap());
        assert_eq!(vy.eui_t, 7.5);
        assert_eq!(vy.distribution.total(), 11);
        assert_eq!(vy.n_verified, 2);
    }

    proptest! {
        #[test]
        fn normalized_mean_and_sum(counts in prop::collection::vec(0u64..10_000, 1..25)) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let vocab: Vec<String> = (0..counts.len()).map(|i| format!("c{i}")).collect();
            let d = ClassDistribution::new(vocab, counts.clone()).unwrap();
            let mean = normalize_distribution(&d, NormMode::Mean).unwrap();
            prop_assert!((mean.iter().sum::<f64>() / counts.len() as f64 - 1.0).abs() <= 1e-12);
            let prop = normalize_distribution(&d, NormMode::Proportion).unwrap();
            prop_assert!((prop.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn normalization_is_bitwise_scale_invariant(counts in prop::collection::vec(0u64..10_000, 1..25), k in 1u64..50) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let vocab: Vec<String> = (0..counts.len()).map(|i| format!("c{i}")).collect();
            let d = ClassDistribution::new(vocab, counts).unwrap();
            for mode in [NormMode::Mean, NormMode::Proportion] {
                prop_assert_eq!(
                    normalize_distribution(&d, mode).unwrap(),
                    normalize_distribution(&d.scaled(k), mode).unwrap()
                );
            }
        }

        #[test]
        fn identical_screenshots_keep_precision(c in 0usize..50, i in 0usize..50, k in 1usize..20) {
            prop_assume!(c + i > 0);
            let single = precision_trusted(&[(c, i)]).unwrap();
            let many = precision_trusted(&vec![(c, i); k]).unwrap();
            prop_assert!((single - many).abs() <= 1e-12);
        }

        #[test]
        fn worker_counts_sum_to_corpus_totals(
            recs in prop::collection::vec((0usize..5, prop::collection::vec(0usize..12, 0..15)), 0..40)
        ) {
            let vocab = worker_vocab();
            let mut all_labels: Vec<String> = vocab.clone();
            all_labels.push("other".into());
            all_labels.push("misc".into());
            let records: Vec<WorkerTaskRecord> = recs
                .iter()
                .enumerate()
                .map(|(n, (w, labels))| {
                    let labels: Vec<&str> = labels.iter().map(|&l| all_labels[l].as_str()).collect();
                    record(&format!("w{w}"), &format!("s{n}"), n % 2 == 0, 1.0, &labels)
                })
                .collect();
            let profiles = worker_profiles(&records, &vocab, &DistributionOptions::default());
            for (ci, class) in vocab.iter().enumerate() {
                let brute = records.iter().flat_map(|r| &r.boxes).filter(|b| &b.class_label == class).count() as u64;
                let summed: u64 = profiles.iter().map(|p| p.distribution.counts[ci]).sum();
                prop_assert_eq!(brute, summed);
            }
            let attempted: usize = profiles.iter().map(|p| p.attempted).sum();
            prop_assert_eq!(attempted, records.len());
            for p in &profiles {
                prop_assert_eq!(p.attempted, p.accepted + p.rejected);
            }
        }
    }
}
