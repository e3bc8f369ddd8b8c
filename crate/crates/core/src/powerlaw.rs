//! Power-law fitting with KS-minimizing `xmin` selection and the
//! semi-parametric bootstrap goodness-of-fit test.
//!
//! The continuous model has density ∝ x^(−α) on [xmin, ∞); the discrete model
//! has mass x^(−α)/ζ(α, xmin) on the integers ≥ xmin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest tail for which α is estimated.
pub const MIN_TAIL: usize = 3;
/// Search interval for the discrete MLE.
const DISCRETE_ALPHA_RANGE: (f64, f64) = (1.0 + 1e-6, 6.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    #[default]
    Continuous,
    Discrete,
}

impl std::str::FromStr for FitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(FitMode::Continuous),
            "discrete" => Ok(FitMode::Discrete),
            other => Err(Error::Argument(format!("unknown power-law mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub xmin: f64,
    pub n_tail: usize,
    pub d_statistic: f64,
    pub mode: FitMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub fit: PowerLawFit,
    pub p_value: f64,
    /// Replicates that re-fitted successfully and enter the p-value.
    pub replicates: usize,
    pub discarded: usize,
    pub seed: u64,
}

// B_{2j} / (2j)! for j = 1..=7
const EM_COEF: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
];

/// Hurwitz zeta ζ(s, a) = Σ_{k≥0} (k + a)^(−s) for s > 1, a > 0.
///
/// Nine terms are summed directly; the remainder is closed with the
/// Euler–Maclaurin integral and Bernoulli corrections.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    const DIRECT: usize = 9;
    let mut sum = 0.0;
    for k in 0..DIRECT {
        sum += (a + k as f64).powf(-s);
    }
    let b = a + DIRECT as f64;
    sum += b.powf(1.0 - s) / (s - 1.0) + 0.5 * b.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) times b^(-s-2j+1)
    let mut factor = s * b.powf(-s - 1.0);
    for (j, c) in EM_COEF.iter().enumerate() {
        let term = c * factor;
        sum += term;
        if term.abs() < 1e-17 * sum {
            break;
        }
        let m = 2.0 * j as f64;
        factor *= (s + m + 1.0) * (s + m + 2.0) / (b * b);
    }
    sum
}

fn check_data(data: &[f64]) -> Result<()> {
    if data.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::Argument("power-law data must be finite and strictly positive".into()));
    }
    if data.len() < MIN_TAIL {
        return Err(Error::InsufficientTail(format!(
            "need at least {MIN_TAIL} values, got {}",
            data.len()
        )));
    }
    Ok(())
}

fn check_integers(data: &[f64]) -> Result<()> {
    if data.iter().any(|v| v.fract() != 0.0) {
        return Err(Error::Argument("discrete power-law data must be integers".into()));
    }
    Ok(())
}

fn sorted(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Index ranges `[start, end)` of equal values in a sorted slice.
fn groups(sorted: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] != sorted[start] {
            out.push((start, i));
            start = i;
        }
    }
    out
}

/// KS distance between the ECDF of a sorted continuous tail and the fitted CDF.
fn continuous_distance(tail: &[f64], alpha: f64) -> f64 {
    let xmin = tail[0];
    let nt = tail.len() as f64;
    groups(tail)
        .into_iter()
        .map(|(s, e)| {
            let cdf = 1.0 - (tail[s] / xmin).powf(1.0 - alpha);
            (e as f64 / nt - cdf).abs().max((cdf - s as f64 / nt).abs())
        })
        .fold(0.0, f64::max)
}

/// KS distance for the discrete model; both CDFs are step functions on the
/// integers, so the supremum is attained at a data value or just before one.
fn discrete_distance(tail: &[f64], alpha: f64) -> f64 {
    let xmin = tail[0];
    let nt = tail.len() as f64;
    let z = hurwitz_zeta(alpha, xmin);
    let cdf = |x: f64| 1.0 - hurwitz_zeta(alpha, x + 1.0) / z;
    groups(tail)
        .into_iter()
        .map(|(s, e)| {
            let v = tail[s];
            let mut d = (e as f64 / nt - cdf(v)).abs();
            if v > xmin {
                d = d.max((cdf(v - 1.0) - s as f64 / nt).abs());
            }
            d
        })
        .fold(0.0, f64::max)
}

fn continuous_alpha(tail: &[f64], log_sum: f64) -> Option<f64> {
    let denom = log_sum - tail.len() as f64 * tail[0].ln();
    (denom > 0.0).then(|| 1.0 + tail.len() as f64 / denom)
}

fn discrete_alpha(tail: &[f64], log_sum: f64) -> Option<f64> {
    if tail.first() == tail.last() {
        return None;
    }
    let xmin = tail[0];
    let n = tail.len() as f64;
    let neg_ll = |a: f64| n * hurwitz_zeta(a, xmin).ln() + a * log_sum;
    Some(golden_section_min(neg_ll, DISCRETE_ALPHA_RANGE.0, DISCRETE_ALPHA_RANGE.1, 1e-10))
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    // the boundary itself may be the best point
    let mid = 0.5 * (lo + hi);
    if (hi - DISCRETE_ALPHA_RANGE.1).abs() < tol && f(DISCRETE_ALPHA_RANGE.1) <= f(mid) {
        return DISCRETE_ALPHA_RANGE.1;
    }
    mid
}

struct Candidate {
    alpha: f64,
    start: usize,
    d: f64,
}

/// All admissible `xmin` candidates of a sorted sample with their α and D.
fn candidates(sorted: &[f64], mode: FitMode) -> Vec<Candidate> {
    let n = sorted.len();
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + sorted[i].ln();
    }
    groups(sorted)
        .into_iter()
        .filter(|&(s, _)| n - s >= MIN_TAIL)
        .filter_map(|(s, _)| {
            let tail = &sorted[s..];
            let alpha = match mode {
                FitMode::Continuous => continuous_alpha(tail, suffix[s])?,
                FitMode::Discrete => discrete_alpha(tail, suffix[s])?,
            };
            let d = match mode {
                FitMode::Continuous => continuous_distance(tail, alpha),
                FitMode::Discrete => discrete_distance(tail, alpha),
            };
            Some(Candidate { alpha, start: s, d })
        })
        .collect()
}

fn fit_sorted(sorted: &[f64], mode: FitMode) -> Result<PowerLawFit> {
    let best = candidates(sorted, mode)
        .into_iter()
        .fold(None::<Candidate>, |best, c| match best {
            Some(b) if b.d <= c.d => Some(b),
            _ => Some(c),
        })
        .ok_or_else(|| {
            Error::InsufficientTail(format!(
                "no xmin candidate leaves {MIN_TAIL} or more values with at least two distinct"
            ))
        })?;
    Ok(PowerLawFit {
        alpha: best.alpha,
        xmin: sorted[best.start],
        n_tail: sorted.len() - best.start,
        d_statistic: best.d,
        mode,
    })
}

/// Continuous MLE with `xmin` chosen to minimize the KS distance.
pub fn fit_continuous(data: &[f64]) -> Result<PowerLawFit> {
    check_data(data)?;
    fit_sorted(&sorted(data), FitMode::Continuous)
}

/// Discrete MLE (Hurwitz-zeta normalized) with KS-minimizing `xmin`.
pub fn fit_discrete(data: &[f64]) -> Result<PowerLawFit> {
    check_data(data)?;
    check_integers(data)?;
    fit_sorted(&sorted(data), FitMode::Discrete)
}

pub fn fit(data: &[f64], mode: FitMode) -> Result<PowerLawFit> {
    match mode {
        FitMode::Continuous => fit_continuous(data),
        FitMode::Discrete => fit_discrete(data),
    }
}

/// Fit with `xmin` held fixed; values below it are ignored.
pub fn fit_fixed_xmin(data: &[f64], xmin: f64, mode: FitMode) -> Result<PowerLawFit> {
    check_data(data)?;
    if mode == FitMode::Discrete {
        check_integers(data)?;
    }
    if !(xmin > 0.0) {
        return Err(Error::Argument(format!("xmin must be positive, got {xmin}")));
    }
    let tail: Vec<f64> = sorted(data).into_iter().filter(|&v| v >= xmin).collect();
    if tail.len() < MIN_TAIL {
        return Err(Error::InsufficientTail(format!(
            "only {} values at or above xmin = {xmin}",
            tail.len()
        )));
    }
    // the tail's own minimum may exceed xmin; rescale to the requested cutoff
    let log_sum: f64 = tail.iter().map(|v| v.ln()).sum();
    let (alpha, d) = match mode {
        FitMode::Continuous => {
            let denom = log_sum - tail.len() as f64 * xmin.ln();
            if denom <= 0.0 {
                return Err(Error::InsufficientTail("all tail values equal xmin".into()));
            }
            let alpha = 1.0 + tail.len() as f64 / denom;
            let nt = tail.len() as f64;
            let d = groups(&tail)
                .into_iter()
                .map(|(s, e)| {
                    let cdf = 1.0 - (tail[s] / xmin).powf(1.0 - alpha);
                    (e as f64 / nt - cdf).abs().max((cdf - s as f64 / nt).abs())
                })
                .fold(0.0, f64::max);
            (alpha, d)
        }
        FitMode::Discrete => {
            let n = tail.len() as f64;
            let neg_ll = |a: f64| n * hurwitz_zeta(a, xmin).ln() + a * log_sum;
            let alpha = golden_section_min(neg_ll, DISCRETE_ALPHA_RANGE.0, DISCRETE_ALPHA_RANGE.1, 1e-10);
            let d = if tail[0] == xmin {
                discrete_distance(&tail, alpha)
            } else {
                f64::NAN
            };
            (alpha, d)
        }
    };
    Ok(PowerLawFit {
        alpha,
        xmin,
        n_tail: tail.len(),
        d_statistic: d,
        mode,
    })
}

/// Inverse CDF of the continuous power law; `u` is the upper-tail mass in (0, 1].
pub fn continuous_quantile(alpha: f64, xmin: f64, u: f64) -> f64 {
    xmin * u.powf(-1.0 / (alpha - 1.0))
}

/// Smallest integer `x ≥ xmin` whose upper tail mass P(X > x) is at most `u`.
pub fn discrete_quantile(alpha: f64, xmin: f64, u: f64) -> f64 {
    const CAP: f64 = 1e15;
    let z = hurwitz_zeta(alpha, xmin);
    let target = u * z;
    let above = |x: f64| hurwitz_zeta(alpha, x + 1.0) <= target;
    if above(xmin) {
        return xmin;
    }
    let mut lo = xmin; // invariant: !above(lo)
    let mut step = 1.0;
    let mut hi = xmin + step;
    while !above(hi) {
        if hi >= CAP {
            return CAP;
        }
        lo = hi;
        step *= 2.0;
        hi = (xmin + step).min(CAP);
    }
    while hi - lo > 1.0 {
        let mid = (lo + (hi - lo) / 2.0).floor();
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn draw(rng: &mut impl Rng, alpha: f64, xmin: f64, mode: FitMode) -> f64 {
    let u = 1.0 - rng.random::<f64>(); // (0, 1]
    match mode {
        FitMode::Continuous => continuous_quantile(alpha, xmin, u),
        FitMode::Discrete => discrete_quantile(alpha, xmin, u),
    }
}

/// `n` power-law variates, deterministic per seed.
pub fn sample_powerlaw(alpha: f64, xmin: f64, n: usize, seed: u64, mode: FitMode) -> Result<Vec<f64>> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::Argument(format!("alpha must exceed 1, got {alpha}")));
    }
    if !(xmin > 0.0 && xmin.is_finite()) {
        return Err(Error::Argument(format!("xmin must be positive, got {xmin}")));
    }
    if n == 0 {
        return Err(Error::Argument("sample size must be at least 1".into()));
    }
    if mode == FitMode::Discrete && xmin.fract() != 0.0 {
        return Err(Error::Argument("discrete xmin must be an integer".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| draw(&mut rng, alpha, xmin, mode)).collect())
}

/// Semi-parametric bootstrap p-value for the hypothesis that `data` follows
/// the fitted power law above `fit.xmin`.
///
/// Each replicate draws `data.len()` points: with probability n_tail/n from
/// the fitted law, otherwise uniformly from the observed values below xmin.
/// Replicates are re-fitted with the full xmin search. Replicate `i` uses
/// ChaCha stream `i` under `seed`, so results do not depend on scheduling.
pub fn gof_pvalue(data: &[f64], fit: &PowerLawFit, replicates: usize, seed: u64) -> Result<GofResult> {
    if replicates < 100 {
        return Err(Error::Argument(format!("at least 100 replicates required, got {replicates}")));
    }
    check_data(data)?;
    let below: Vec<f64> = data.iter().copied().filter(|&v| v < fit.xmin).collect();
    if data.len() - below.len() != fit.n_tail {
        return Err(Error::Argument(format!(
            "fit reports {} tail values but the data has {} at or above xmin",
            fit.n_tail,
            data.len() - below.len()
        )));
    }
    let n = data.len();
    let p_tail = fit.n_tail as f64 / n as f64;

    let distances: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let synthetic: Vec<f64> = (0..n)
                .map(|_| {
                    if below.is_empty() || rng.random::<f64>() < p_tail {
                        draw(&mut rng, fit.alpha, fit.xmin, fit.mode)
                    } else {
                        below[rng.random_range(0..below.len())]
                    }
                })
                .collect();
            fit_sorted(&sorted(&synthetic), fit.mode).ok().map(|f| f.d_statistic)
        })
        .collect();

    let discarded = distances.iter().filter(|d| d.is_none()).count();
    if discarded > 0 {
        log::warn!("power-law bootstrap: {discarded} of {replicates} replicates failed to re-fit");
    }
    if discarded * 10 > replicates {
        return Err(Error::Unstable {
            discarded,
            requested: replicates,
        });
    }
    let used = replicates - discarded;
    let exceed = distances.iter().flatten().filter(|&&d| d >= fit.d_statistic).count();
    Ok(GofResult {
        fit: *fit,
        p_value: exceed as f64 / used as f64,
        replicates: used,
        discarded,
        seed,
    })
}
