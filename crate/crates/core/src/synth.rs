//! Seeded synthetic corpora: trusted labelers drawn from published class
//! frequencies plus crowdworkers of several behavioral archetypes.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    BoundingBox, Corpus, HitStatus, ScreenshotLabeling, Verdict, WorkerTaskRecord, TRUSTED_VOCABULARY, WORKER_VOCABULARY,
};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Class counts of labeler VY over the trusted vocabulary.
pub const VY_COUNTS: [u64; 20] = [509, 23, 124, 0, 0, 133, 6, 1022, 8, 0, 2, 58, 2, 22, 81, 128, 10, 23, 41, 1263];
/// Class counts of labeler SV over the trusted vocabulary.
pub const SV_COUNTS: [u64; 20] = [368, 71, 22, 18, 2, 128, 239, 375, 5, 4, 20, 63, 43, 1, 280, 226, 20, 19, 19, 1322];

/// Worker class each trusted class is folded into when deriving an honest
/// worker's shape. Text-like classes have no worker counterpart.
pub const CLASS_MAPPING: [(&str, Option<&str>); 20] = [
    ("image", Some("image")),
    ("backgroundimage", Some("backgroundimage")),
    ("panel", Some("panel")),
    ("list", Some("navigation")),
    ("table", Some("table")),
    ("paragraph", None),
    ("textblock", None),
    ("text", None),
    ("symbol", Some("image")),
    ("checkbox", Some("check")),
    ("radiobutton", Some("check")),
    ("selectbox", Some("dropdown")),
    ("textinput", Some("input")),
    ("textarea", Some("input")),
    ("button", Some("button")),
    ("label", None),
    ("tabs", Some("navigation")),
    ("scrollbar", Some("navigation")),
    ("pagination", Some("navigation")),
    ("link", Some("link")),
];

pub fn proportions(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Fold a trusted-vocabulary proportion vector onto the worker vocabulary.
pub fn map_to_worker_vocabulary(trusted: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; WORKER_VOCABULARY.len()];
    for (p, (_, target)) in trusted.iter().zip(CLASS_MAPPING.iter()) {
        if let Some(target) = target {
            let j = WORKER_VOCABULARY.iter().position(|w| w == target).expect("mapping targets worker classes");
            out[j] += p;
        }
    }
    let total: f64 = out.iter().sum();
    out.iter().map(|v| v / total).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustedArchetype {
    pub labeler_id: String,
    /// Proportions over the trusted vocabulary.
    pub proportions: Vec<f64>,
    pub screenshots: usize,
    pub elements_per_ui: usize,
    /// Probability that a box is judged correct.
    pub precision: f64,
    /// Mean and SD of completeness on the 0–100 scale.
    pub completeness_mean: f64,
    pub completeness_sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Archetype {
    /// Multinomial draws from a trusted shape perturbed by Dirichlet noise.
    Honest,
    /// Honest shape at a fraction of the usual volume.
    Sloppy,
    /// Nearly every box in one class.
    Spammer,
    /// Equal class probabilities.
    Uniform,
}

impl Archetype {
    pub fn as_str(self) -> &'static str {
        match self {
            Archetype::Honest => "honest",
            Archetype::Sloppy => "sloppy",
            Archetype::Spammer => "spammer",
            Archetype::Uniform => "uniform",
        }
    }

    pub fn is_malicious(self) -> bool {
        self != Archetype::Honest
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkerGroup {
    pub archetype: Archetype,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub trusted: Vec<TrustedArchetype>,
    pub workers: Vec<WorkerGroup>,
    pub hits_per_worker: usize,
    pub elements_per_hit: usize,
    /// Per-HIT element counts vary uniformly by this much either way.
    pub elements_jitter: usize,
    /// HITs per worker placed on screenshots the trusted labelers also label.
    pub overlap_hits: usize,
    /// Screenshots labeled only by workers.
    pub worker_screenshots: usize,
    /// Acceptance probability of an honest HIT.
    pub p_honest: f64,
    /// Acceptance probability of any other HIT.
    pub p_malicious: f64,
    /// Dirichlet concentration around the honest shape.
    pub concentration: f64,
    /// Volume multiplier of sloppy workers.
    pub sloppy_fraction: f64,
    /// Share of a spammer's boxes in its dominant class.
    pub spammer_dominance: f64,
    pub honest_tot_mean: f64,
    pub honest_tot_sd: f64,
    /// Time on task of other archetypes is uniform on this range.
    pub malicious_tot_range: (f64, f64),
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            trusted: vec![
                TrustedArchetype {
                    labeler_id: "VY".into(),
                    proportions: proportions(&VY_COUNTS),
                    screenshots: 44,
                    elements_per_ui: 85,
                    precision: 0.928,
                    completeness_mean: 95.5,
                    completeness_sd: 7.0,
                },
                TrustedArchetype {
                    labeler_id: "SV".into(),
                    proportions: proportions(&SV_COUNTS),
                    screenshots: 44,
                    elements_per_ui: 89,
                    precision: 0.974,
                    completeness_mean: 80.4,
                    completeness_sd: 12.9,
                },
            ],
            workers: vec![
                WorkerGroup {
                    archetype: Archetype::Honest,
                    count: 10,
                },
                WorkerGroup {
                    archetype: Archetype::Spammer,
                    count: 5,
                },
                WorkerGroup {
                    archetype: Archetype::Uniform,
                    count: 5,
                },
            ],
            hits_per_worker: 12,
            elements_per_hit: 40,
            elements_jitter: 5,
            overlap_hits: 1,
            worker_screenshots: 300,
            p_honest: 0.9,
            p_malicious: 0.1,
            concentration: 200.0,
            sloppy_fraction: 0.15,
            spammer_dominance: 0.95,
            honest_tot_mean: 600.0,
            honest_tot_sd: 200.0,
            malicious_tot_range: (30.0, 1500.0),
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trusted.is_empty() {
            return Err(Error::Argument("at least one trusted archetype is required".into()));
        }
        for t in &self.trusted {
            if t.proportions.len() != TRUSTED_VOCABULARY.len() {
                return Err(Error::Argument(format!(
                    "trusted archetype {} has {} proportions, expected {}",
                    t.labeler_id,
                    t.proportions.len(),
                    TRUSTED_VOCABULARY.len()
                )));
            }
            if t.proportions.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return Err(Error::Argument(format!("trusted archetype {} has a negative proportion", t.labeler_id)));
            }
            let sum: f64 = t.proportions.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Argument(format!(
                    "trusted archetype {} proportions sum to {sum}, not 1",
                    t.labeler_id
                )));
            }
            if t.screenshots == 0 || t.elements_per_ui == 0 {
                return Err(Error::Argument(format!("trusted archetype {} labels nothing", t.labeler_id)));
            }
            check_probability("trusted precision", t.precision)?;
            if !(0.0..=100.0).contains(&t.completeness_mean) || !(t.completeness_sd >= 0.0) {
                return Err(Error::Argument(format!("trusted archetype {} has invalid completeness", t.labeler_id)));
            }
        }
        let mut ids: Vec<&str> = self.trusted.iter().map(|t| t.labeler_id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument("trusted archetype ids must be distinct".into()));
        }
        check_probability("p_honest", self.p_honest)?;
        check_probability("p_malicious", self.p_malicious)?;
        check_probability("spammer_dominance", self.spammer_dominance)?;
        if self.hits_per_worker == 0 || self.elements_per_hit == 0 {
            return Err(Error::Argument("workers need at least one HIT and one element per HIT".into()));
        }
        if self.elements_jitter > self.elements_per_hit {
            return Err(Error::Argument("elements_jitter exceeds elements_per_hit".into()));
        }
        if self.overlap_hits > self.hits_per_worker {
            return Err(Error::Argument("overlap_hits exceeds hits_per_worker".into()));
        }
        let trusted_total: usize = self.trusted.iter().map(|t| t.screenshots).sum();
        if self.overlap_hits > trusted_total || self.hits_per_worker - self.overlap_hits > self.worker_screenshots {
            return Err(Error::Argument("not enough screenshots for the requested HITs".into()));
        }
        if !(self.concentration > 0.0) || !(self.sloppy_fraction > 0.0 && self.sloppy_fraction <= 1.0) {
            return Err(Error::Argument("concentration must be positive and sloppy_fraction in (0, 1]".into()));
        }
        let (lo, hi) = self.malicious_tot_range;
        if !(self.honest_tot_mean >= 0.0) || !(self.honest_tot_sd >= 0.0) || !(lo >= 0.0 && lo <= hi) {
            return Err(Error::Argument("time-on-task parameters must be non-negative".into()));
        }
        Ok(())
    }
}

fn unit_boxes(labels: impl IntoIterator<Item = String>) -> Vec<BoundingBox> {
    labels
        .into_iter()
        .enumerate()
        .map(|(i, class_label)| {
            let x = (i % 100) as u32 * 2;
            let y = (i / 100) as u32 * 2;
            BoundingBox {
                class_label,
                xmin: x,
                ymin: y,
                xmax: x + 1,
                ymax: y + 1,
            }
        })
        .collect()
}

fn draw_labels(rng: &mut ChaCha8Rng, weights: &[f64], vocabulary: &[&str], n: usize) -> Vec<String> {
    let index = WeightedIndex::new(weights).expect("weights have positive mass");
    (0..n).map(|_| vocabulary[index.sample(rng)].to_string()).collect()
}

fn dirichlet_around(rng: &mut ChaCha8Rng, mean: &[f64], concentration: f64) -> Vec<f64> {
    let draws: Vec<f64> = mean
        .iter()
        .map(|&p| {
            if p > 0.0 {
                Gamma::new(concentration * p, 1.0).expect("positive shape").sample(rng)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        draws.iter().map(|d| d / total).collect()
    } else {
        mean.to_vec()
    }
}

/// Worker id used by the generator: `<archetype>-<nn>`.
pub fn worker_id(archetype: Archetype, index: usize) -> String {
    format!("{}-{:02}", archetype.as_str(), index + 1)
}

/// Archetype encoded in a generated worker id.
pub fn archetype_of(worker_id: &str) -> Option<Archetype> {
    match worker_id.split('-').next()? {
        "honest" => Some(Archetype::Honest),
        "sloppy" => Some(Archetype::Sloppy),
        "spammer" => Some(Archetype::Spammer),
        "uniform" => Some(Archetype::Uniform),
        _ => None,
    }
}

/// Generate a verified corpus. Output depends only on `spec` and `seed`.
pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<Corpus> {
    spec.validate()?;

    let mut trusted_labelings = Vec::new();
    let mut trusted_screens = Vec::new();
    let mut next_screen = 0usize;
    let mut screen_id = || {
        next_screen += 1;
        format!("ui-{next_screen:04}")
    };
    for t in &spec.trusted {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["trusted", &t.labeler_id]));
        let sc_noise = Normal::new(t.completeness_mean, t.completeness_sd).expect("finite completeness parameters");
        for _ in 0..t.screenshots {
            let id = screen_id();
            let labels = draw_labels(&mut rng, &t.proportions, &TRUSTED_VOCABULARY, t.elements_per_ui);
            let mut labeling = ScreenshotLabeling::new(id.clone(), t.labeler_id.clone(), unit_boxes(labels));
            labeling.verdicts = (0..labeling.boxes.len())
                .map(|_| {
                    Some(if rng.random::<f64>() < t.precision {
                        Verdict::Correct
                    } else {
                        Verdict::Incorrect
                    })
                })
                .collect();
            let sc: f64 = sc_noise.sample(&mut rng);
            labeling.completeness = Some(sc.clamp(0.0, 100.0).round());
            trusted_labelings.push(labeling);
            trusted_screens.push(id);
        }
    }
    let worker_screens: Vec<String> = (0..spec.worker_screenshots).map(|_| screen_id()).collect();

    let honest_shapes: Vec<Vec<f64>> = spec.trusted.iter().map(|t| map_to_worker_vocabulary(&t.proportions)).collect();
    let uniform = vec![1.0; WORKER_VOCABULARY.len()];
    let mut records = Vec::new();
    for group in &spec.workers {
        for i in 0..group.count {
            let id = worker_id(group.archetype, i);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["worker", &id]));
            let shape = match group.archetype {
                Archetype::Honest | Archetype::Sloppy => {
                    dirichlet_around(&mut rng, &honest_shapes[i % honest_shapes.len()], spec.concentration)
                }
                Archetype::Spammer => {
                    let dominant = rng.random_range(0..WORKER_VOCABULARY.len());
                    let rest = (1.0 - spec.spammer_dominance) / (WORKER_VOCABULARY.len() - 1) as f64;
                    (0..WORKER_VOCABULARY.len())
                        .map(|c| if c == dominant { spec.spammer_dominance } else { rest })
                        .collect()
                }
                Archetype::Uniform => uniform.clone(),
            };
            let volume = if group.archetype == Archetype::Sloppy {
                spec.sloppy_fraction
            } else {
                1.0
            };
            let mut screens: Vec<&String> = trusted_screens
                .choose_multiple(&mut rng, spec.overlap_hits)
                .chain(worker_screens.choose_multiple(&mut rng, spec.hits_per_worker - spec.overlap_hits))
                .collect();
            screens.shuffle(&mut rng);
            for screen in screens {
                let jitter = rng.random_range(0..=2 * spec.elements_jitter) as i64 - spec.elements_jitter as i64;
                let n = ((spec.elements_per_hit as i64 + jitter) as f64 * volume).round().max(1.0) as usize;
                let labels = draw_labels(&mut rng, &shape, &WORKER_VOCABULARY, n);
                let accept_p = if group.archetype == Archetype::Honest {
                    spec.p_honest
                } else {
                    spec.p_malicious
                };
                let status = if rng.random::<f64>() < accept_p {
                    HitStatus::Accepted
                } else {
                    HitStatus::Rejected
                };
                let tot = if group.archetype == Archetype::Honest {
                    Normal::new(spec.honest_tot_mean, spec.honest_tot_sd)
                        .expect("finite time-on-task parameters")
                        .sample(&mut rng)
                        .max(1.0)
                } else {
                    let (lo, hi) = spec.malicious_tot_range;
                    lo + (hi - lo) * rng.random::<f64>()
                };
                records.push(WorkerTaskRecord {
                    worker_id: id.clone(),
                    screenshot_id: screen.clone(),
                    status,
                    time_on_task_s: tot.round(),
                    boxes: unit_boxes(labels),
                });
            }
        }
    }
    Corpus::with_default_vocabularies(trusted_labelings, records)
}

/// Repeat every box `factor` times in each HIT of the selected workers,
/// leaving the class shape unchanged.
pub fn scale_worker_volume(corpus: &Corpus, factor: usize, select: impl Fn(&str) -> bool) -> Corpus {
    let mut out = corpus.clone();
    for r in out.worker_records.iter_mut().filter(|r| select(&r.worker_id)) {
        let labels: Vec<String> = r
            .boxes
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.class_label.clone(), factor))
            .collect();
        r.boxes = unit_boxes(labels);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::export_corpus;
    use crate::metrics::{build_profiles, DistributionOptions};

    #[test]
    fn embedded_columns_match_published_totals() {
        assert_eq!(VY_COUNTS.iter().sum::<u64>(), 3455);
        assert_eq!(SV_COUNTS.iter().sum::<u64>(), 3245);
        assert_eq!(VY_COUNTS[19], 1263);
        assert_eq!(VY_COUNTS[0], 509);
        for counts in [VY_COUNTS, SV_COUNTS] {
            assert!((proportions(&counts).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        for ((name, _), vocab) in CLASS_MAPPING.iter().zip(TRUSTED_VOCABULARY) {
            assert_eq!(*name, vocab);
        }
        let mapped = map_to_worker_vocabulary(&proportions(&VY_COUNTS));
        assert!((mapped.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SyntheticSpec::default();
        let mut a = Vec::new();
        let mut b = Vec::new();
        export_corpus(&generate(&spec, 5).unwrap(), &mut a).unwrap();
        export_corpus(&generate(&spec, 5).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let mut c = Vec::new();
        export_corpus(&generate(&spec, 6).unwrap(), &mut c).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_proportions_rejected() {
        let mut spec = SyntheticSpec::default();
        spec.trusted[0].proportions = spec.trusted[0].proportions.iter().map(|p| p * 0.9).collect();
        assert!(matches!(generate(&spec, 1), Err(Error::Argument(_))));
        let mut spec = SyntheticSpec::default();
        spec.trusted[0].proportions.pop();
        assert!(generate(&spec, 1).is_err());
        let mut spec = SyntheticSpec::default();
        spec.overlap_hits = 13;
        assert!(generate(&spec, 1).is_err());
    }

    #[test]
    fn every_default_worker_passes_inclusion() {
        let spec = SyntheticSpec {
            workers: vec![
                WorkerGroup {
                    archetype: Archetype::Honest,
                    count: 10,
                },
                WorkerGroup {
                    archetype: Archetype::Uniform,
                    count: 10,
                },
            ],
            ..Default::default()
        };
        let corpus = generate(&spec, 3).unwrap();
        let (trusted, workers) = build_profiles(&corpus, &DistributionOptions::default());
        assert_eq!(trusted.len(), 2);
        assert!(trusted.iter().all(|t| t.q.is_some()));
        assert_eq!(workers.len(), 20);
        assert!(workers.iter().all(|w| w.attempted == 12 && w.elements >= 100));
        assert!(workers.iter().all(|w| archetype_of(&w.worker_id).is_some()));
    }

    #[test]
    fn honest_proportions_match_source() {
        // Many short-lived honest workers so Dirichlet overdispersion stays small.
        let spec = SyntheticSpec {
            workers: vec![WorkerGroup {
                archetype: Archetype::Honest,
                count: 250,
            }],
            hits_per_worker: 1,
            overlap_hits: 0,
            elements_jitter: 0,
            trusted: vec![SyntheticSpec::default().trusted[0].clone()],
            ..Default::default()
        };
        let corpus = generate(&spec, 17).unwrap();
        let mut counts = vec![0f64; WORKER_VOCABULARY.len()];
        for r in &corpus.worker_records {
            for b in &r.boxes {
                counts[WORKER_VOCABULARY.iter().position(|w| *w == b.class_label).unwrap()] += 1.0;
            }
        }
        let n: f64 = counts.iter().sum();
        assert_eq!(n, 10_000.0);
        let expected = map_to_worker_vocabulary(&proportions(&VY_COUNTS));
        let mut chi2 = 0.0;
        let mut df = 0;
        for (o, p) in counts.iter().zip(&expected) {
            if *p > 0.0 {
                chi2 += (o - n * p).powi(2) / (n * p);
                df += 1;
            } else {
                assert_eq!(*o, 0.0);
            }
        }
        // 0.999 quantile of chi-square with 8 df is 26.1
        assert_eq!(df - 1, 8);
        assert!(chi2 < 26.1, "chi-square {chi2}");
    }

    #[test]
    fn volume_scaling_preserves_shape() {
        let corpus = generate(&SyntheticSpec::default(), 2).unwrap();
        let scaled = scale_worker_volume(&corpus, 3, |id| id.starts_with("spammer"));
        for (a, b) in corpus.worker_records.iter().zip(&scaled.worker_records) {
            let k = if a.worker_id.starts_with("spammer") { 3 } else { 1 };
            assert_eq!(b.boxes.len(), a.boxes.len() * k);
        }
    }
}
