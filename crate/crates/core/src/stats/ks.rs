//! Two-sample Kolmogorov–Smirnov test.
//!
//! The statistic is tracked internally on the integer scale
//! `n·m·D = max |m·F_x·n − n·F_y·m|`, so permutation counts compare
//! statistics exactly instead of through floating-point `D` values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Enumerate relabelings when their count does not exceed this bound.
pub const ENUMERATION_LIMIT: u64 = 200_000;
/// Default Monte-Carlo relabeling count for the exact test.
pub const DEFAULT_MC_REPLICATES: usize = 10_000;

/// How the p-value of the two-sample test is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PValueMethod {
    /// Kolmogorov limiting distribution with the small-sample correction.
    #[default]
    Asymptotic,
    /// Permutation distribution over relabelings of the pooled sample:
    /// full enumeration when feasible, seeded Monte-Carlo otherwise.
    Exact { replicates: usize, seed: u64 },
}

impl PValueMethod {
    pub fn exact(seed: u64) -> Self {
        PValueMethod::Exact {
            replicates: DEFAULT_MC_REPLICATES,
            seed,
        }
    }
}

/// The route actually taken to compute a p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KsMethod {
    Asymptotic,
    ExactEnumeration,
    ExactMonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub method: KsMethod,
    pub sample_sizes: (usize, usize),
}

fn check_finite(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Argument(format!("sample `{name}` is empty")));
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument(format!("sample `{name}` contains a non-finite value")));
    }
    Ok(())
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// `n·m·D` for two sorted samples.
fn scaled_statistic(xs: &[f64], ys: &[f64]) -> u64 {
    let (n, m) = (xs.len() as i64, ys.len() as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0i64;
    while i < xs.len() || j < ys.len() {
        let t = match (xs.get(i), ys.get(j)) {
            (Some(a), Some(b)) => a.min(*b),
            (Some(a), None) => *a,
            (None, Some(b)) => *b,
            (None, None) => unreachable!(),
        };
        while i < xs.len() && xs[i] == t {
            i += 1;
        }
        while j < ys.len() && ys[j] == t {
            j += 1;
        }
        best = best.max((i as i64 * m - j as i64 * n).abs());
    }
    best as u64
}

/// Supremum distance between the right-continuous empirical CDFs of `x` and `y`.
pub fn ecdf_sup_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_finite("x", x)?;
    check_finite("y", y)?;
    let stat = scaled_statistic(&sorted(x), &sorted(y));
    Ok(stat as f64 / (x.len() as f64 * y.len() as f64))
}

/// Asymptotic Kolmogorov survival function
/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`.
///
/// For λ < 1.18 the alternating series converges slowly, so the equivalent
/// theta-function form `1 − √(2π)/λ Σ exp(−(2k−1)²π²/(8λ²))` is summed instead.
pub fn kolmogorov_sf(lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Argument(format!("lambda must be non-negative, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    if lambda.is_infinite() {
        return Ok(0.0);
    }
    let value = if lambda < 1.18 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let w = pi2 / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for k in 1..=100u32 {
            let j = (2 * k - 1) as f64;
            let term = (-j * j * w).exp();
            sum += term;
            if term < 1e-17 * sum || term == 0.0 {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..=100u32 {
            let k = k as f64;
            let term = (-2.0 * k * k * lambda * lambda).exp();
            sum += sign * term;
            if term <= 1e-12 * sum.abs() || term == 0.0 {
                break;
            }
            sign = -sign;
        }
        2.0 * sum
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Binomial coefficient, saturating at `u64::MAX`.
pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Pooled sample sorted ascending, with the index of the last element of
/// each tie group.
struct Pooled {
    group_ends: Vec<usize>,
    len: usize,
}

impl Pooled {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let mut values: Vec<f64> = x.iter().chain(y).copied().collect();
        values.sort_by(|a, b| a.total_cmp(b));
        let group_ends = (0..values.len())
            .filter(|&i| i + 1 == values.len() || values[i + 1] != values[i])
            .collect();
        Pooled {
            group_ends,
            len: values.len(),
        }
    }

    /// `n·m·D` for the labeling where `in_x[i]` marks pooled position `i` as
    /// belonging to the first sample.
    fn statistic(&self, in_x: &[bool], n: i64, m: i64) -> u64 {
        let (mut cx, mut cy) = (0i64, 0i64);
        let mut pos = 0;
        let mut best = 0i64;
        for &end in &self.group_ends {
            while pos <= end {
                if in_x[pos] {
                    cx += 1;
                } else {
                    cy += 1;
                }
                pos += 1;
            }
            best = best.max((cx * m - cy * n).abs());
        }
        best as u64
    }
}

fn exact_enumeration(pooled: &Pooled, n: usize, m: usize, observed: u64) -> f64 {
    let total = pooled.len;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut in_x = vec![false; total];
    let (mut hits, mut count) = (0u64, 0u64);
    loop {
        in_x.iter_mut().for_each(|b| *b = false);
        for &i in &idx {
            in_x[i] = true;
        }
        count += 1;
        if pooled.statistic(&in_x, n as i64, m as i64) >= observed {
            hits += 1;
        }
        // next n-combination of 0..total in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return hits as f64 / count as f64;
            }
            i -= 1;
            if idx[i] != i + total - n {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn exact_monte_carlo(
    pooled: &Pooled,
    n: usize,
    m: usize,
    observed: u64,
    replicates: usize,
    seed: u64,
) -> f64 {
    let total = pooled.len;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..total).collect();
    let mut in_x = vec![false; total];
    let mut hits = 0u64;
    for _ in 0..replicates {
        for i in 0..n {
            let j = rng.random_range(i..total);
            perm.swap(i, j);
        }
        in_x.iter_mut().for_each(|b| *b = false);
        for &p in &perm[..n] {
            in_x[p] = true;
        }
        if pooled.statistic(&in_x, n as i64, m as i64) >= observed {
            hits += 1;
        }
    }
    // the observed labeling is counted as one of the relabelings
    (hits + 1) as f64 / (replicates + 1) as f64
}

/// Two-sample Kolmogorov–Smirnov test of homogeneity.
pub fn ks_two_sample(x: &[f64], y: &[f64], method: PValueMethod) -> Result<KsResult> {
    check_finite("x", x)?;
    check_finite("y", y)?;
    let (n, m) = (x.len(), y.len());
    if n < 2 || m < 2 {
        return Err(Error::Argument(format!(
            "both samples need at least 2 values, got ({n}, {m})"
        )));
    }
    let observed = scaled_statistic(&sorted(x), &sorted(y));
    let d = observed as f64 / (n as f64 * m as f64);

    let (p, used) = match method {
        PValueMethod::Asymptotic => {
            let ne = (n * m) as f64 / (n + m) as f64;
            let en = ne.sqrt();
            let lambda = (en + 0.12 + 0.11 / en) * d;
            (kolmogorov_sf(lambda)?, KsMethod::Asymptotic)
        }
        PValueMethod::Exact { replicates, seed } => {
            if observed == 0 {
                (1.0, KsMethod::ExactEnumeration)
            } else {
                let pooled = Pooled::new(x, y);
                if binomial(n + m, n) <= ENUMERATION_LIMIT {
                    (
                        exact_enumeration(&pooled, n, m, observed),
                        KsMethod::ExactEnumeration,
                    )
                } else {
                    if replicates == 0 {
                        return Err(Error::Argument("Monte-Carlo replicates must be positive".into()));
                    }
                    (
                        exact_monte_carlo(&pooled, n, m, observed, replicates, seed),
                        KsMethod::ExactMonteCarlo,
                    )
                }
            }
        }
    };
    let p_value = if observed == 0 { 1.0 } else { p.clamp(0.0, 1.0) };
    Ok(KsResult {
        d_statistic: d,
        p_value,
        method: used,
        sample_sizes: (n, m),
    })
}

/// Exact test with the Monte-Carlo route forced, regardless of how many
/// relabelings exist. Used to cross-check against enumeration.
pub fn ks_two_sample_monte_carlo(
    x: &[f64],
    y: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<KsResult> {
    check_finite("x", x)?;
    check_finite("y", y)?;
    let (n, m) = (x.len(), y.len());
    if n < 2 || m < 2 {
        return Err(Error::Argument(format!(
            "both samples need at least 2 values, got ({n}, {m})"
        )));
    }
    if replicates == 0 {
        return Err(Error::Argument("Monte-Carlo replicates must be positive".into()));
    }
    let observed = scaled_statistic(&sorted(x), &sorted(y));
    let p = if observed == 0 {
        1.0
    } else {
        exact_monte_carlo(&Pooled::new(x, y), n, m, observed, replicates, seed)
    };
    Ok(KsResult {
        d_statistic: observed as f64 / (n as f64 * m as f64),
        p_value: p,
        method: KsMethod::ExactMonteCarlo,
        sample_sizes: (n, m),
    })
}
