//! Pearson correlation and ordinary least squares with an intercept.

use serde::{Deserialize, Serialize};

use super::special::{f_survival, student_t_two_tailed};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub intercept: f64,
    pub slopes: Vec<f64>,
    pub standardized_betas: Vec<f64>,
    /// Two-tailed t-test p-value for each slope.
    pub slope_p_values: Vec<f64>,
    pub r_squared: f64,
    pub f_statistic: f64,
    pub df: (usize, usize),
    pub p_value: f64,
    pub n: usize,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn centered(xs: &[f64]) -> Vec<f64> {
    let mu = mean(xs);
    xs.iter().map(|v| v - mu).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_column(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument(format!("{name} contains a non-finite value")));
    }
    Ok(())
}

/// Sample Pearson correlation with a two-tailed t-test of r = 0.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Argument(format!("correlation needs at least 3 pairs, got {n}")));
    }
    check_column("x", x)?;
    check_column("y", y)?;
    let (cx, cy) = (centered(x), centered(y));
    let (sxx, syy) = (dot(&cx, &cx), dot(&cy, &cy));
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation with a constant variable".into()));
    }
    let mut r = (dot(&cx, &cy) / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    // exact collinearity can land a few ulps short of ±1
    if 1.0 - r.abs() < 1e-14 {
        r = r.signum();
    }
    let df = (n - 2) as f64;
    let t_statistic = if r.abs() == 1.0 {
        f64::INFINITY.copysign(r)
    } else {
        r * (df / (1.0 - r * r)).sqrt()
    };
    let p_value = student_t_two_tailed(t_statistic, df)?;
    Ok(CorrelationResult {
        r,
        t_statistic,
        p_value,
        n,
    })
}

/// F statistic of a regression with `df.0` predictors and `df.1` residual
/// degrees of freedom, from its R².
pub fn f_from_r_squared(r_squared: f64, df: (usize, usize)) -> f64 {
    if r_squared >= 1.0 {
        return f64::INFINITY;
    }
    (r_squared / df.0 as f64) / ((1.0 - r_squared) / df.1 as f64)
}

/// Least-squares fit of `y` on the given predictor columns plus an intercept.
///
/// Solved by Householder QR on the centered design so the intercept drops
/// out; rank deficiency is detected from the diagonal of R.
pub fn ols(predictors: &[Vec<f64>], y: &[f64]) -> Result<RegressionResult> {
    let k = predictors.len();
    let n = y.len();
    if k == 0 {
        return Err(Error::Argument("at least one predictor is required".into()));
    }
    if let Some(col) = predictors.iter().find(|c| c.len() != n) {
        return Err(Error::Argument(format!(
            "predictor length {} does not match response length {n}",
            col.len()
        )));
    }
    if n <= k + 1 {
        return Err(Error::Argument(format!(
            "need more than {} observations for {k} predictor(s), got {n}",
            k + 1
        )));
    }
    check_column("response", y)?;
    for col in predictors {
        check_column("predictor", col)?;
    }

    let yc = centered(y);
    let ss_tot = dot(&yc, &yc);
    if ss_tot == 0.0 {
        return Err(Error::Degenerate("response is constant (SS_tot = 0)".into()));
    }

    // Column-major centered design; reduced in place to R.
    let mut a: Vec<Vec<f64>> = predictors.iter().map(|c| centered(c)).collect();
    let norms: Vec<f64> = a.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut qty = yc.clone();
    for j in 0..k {
        let alpha_norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norms[j] == 0.0 || alpha_norm <= 1e-10 * norms[j] {
            return Err(Error::Singular(format!("predictor {j} is linearly dependent")));
        }
        let alpha = if a[j][j] > 0.0 { -alpha_norm } else { alpha_norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        for col in a.iter_mut().skip(j) {
            let s = 2.0 * dot(&v, &col[j..]) / vnorm2;
            for (c, vi) in col[j..].iter_mut().zip(&v) {
                *c -= s * vi;
            }
        }
        let s = 2.0 * dot(&v, &qty[j..]) / vnorm2;
        for (c, vi) in qty[j..].iter_mut().zip(&v) {
            *c -= s * vi;
        }
    }
    // back substitution R b = (Q^T y)[..k]
    let mut slopes = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = qty[i];
        for j in i + 1..k {
            acc -= a[j][i] * slopes[j];
        }
        slopes[i] = acc / a[i][i];
    }
    // R^{-1}, for slope standard errors
    let mut rinv = vec![vec![0.0; k]; k];
    for i in (0..k).rev() {
        rinv[i][i] = 1.0 / a[i][i];
        for j in i + 1..k {
            let mut acc = 0.0;
            for l in i + 1..=j {
                acc += a[l][i] * rinv[l][j];
            }
            rinv[i][j] = -acc / a[i][i];
        }
    }

    let means: Vec<f64> = predictors.iter().map(|c| mean(c)).collect();
    let y_mean = mean(y);
    let intercept = y_mean - dot(&slopes, &means);
    let ss_res: f64 = (0..n)
        .map(|i| {
            let fitted = intercept + predictors.iter().zip(&slopes).map(|(c, b)| c[i] * b).sum::<f64>();
            (y[i] - fitted).powi(2)
        })
        .sum();

    let df = (k, n - k - 1);
    let r_squared = (1.0 - ss_res / ss_tot).clamp(0.0, 1.0);
    let f_statistic = f_from_r_squared(r_squared, df);
    let p_value = f_survival(f_statistic, df.0 as f64, df.1 as f64)?;

    let sigma2 = ss_res / df.1 as f64;
    let slope_p_values = (0..k)
        .map(|j| {
            let var = sigma2 * rinv[j].iter().map(|v| v * v).sum::<f64>();
            let t = if var == 0.0 {
                f64::INFINITY
            } else {
                slopes[j] / var.sqrt()
            };
            student_t_two_tailed(t, df.1 as f64)
        })
        .collect::<Result<Vec<_>>>()?;

    let sd_y = (ss_tot / (n - 1) as f64).sqrt();
    let standardized_betas = slopes
        .iter()
        .zip(&norms)
        .map(|(b, norm)| b * (norm / ((n - 1) as f64).sqrt()) / sd_y)
        .collect();

    Ok(RegressionResult {
        intercept,
        slopes,
        standardized_betas,
        slope_p_values,
        r_squared,
        f_statistic,
        df,
        p_value,
        n,
    })
}
