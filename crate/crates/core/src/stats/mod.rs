//! Statistical kernel: empirical CDF distance, the two-sample
//! Kolmogorov–Smirnov test, Pearson correlation and OLS regression.

mod ks;
mod regression;
mod special;

pub use ks::{
    ecdf_sup_distance, kolmogorov_sf, ks_two_sample, ks_two_sample_monte_carlo, KsMethod,
    KsResult, PValueMethod, DEFAULT_MC_REPLICATES, ENUMERATION_LIMIT,
};
pub use regression::{f_from_r_squared, ols, pearson, CorrelationResult, RegressionResult};
pub use special::{f_survival, ln_gamma, regularized_incomplete_beta, student_t_two_tailed};

pub(crate) fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
