//! Two-sample Kolmogorov-Smirnov test and Q-Q pairing.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub d: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
}

impl KsResult {
    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

pub const DEFAULT_ALPHA: f64 = 0.05;

fn sorted(sample: &[f64]) -> Result<Vec<f64>, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Largest vertical distance between the two empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        // step both ECDFs past every observation equal to x
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Asymptotic p-value of the statistic `d` for sample sizes `n`, `m`,
/// using the Kolmogorov series with the small-sample correction to λ.
pub fn ks_p_value(d: f64, n: usize, m: usize) -> f64 {
    assert!(n >= 1 && m >= 1, "sample sizes must be positive");
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    let lambda = d * (sq + 0.12 + 0.11 / sq);
    kolmogorov_q(lambda)
}

/// Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²), clamped to [0, 1].
fn kolmogorov_q(lambda: f64) -> f64 {
    const EPS: f64 = 1e-8;
    const MAX_TERMS: u32 = 100;
    let a2 = -2.0 * lambda * lambda;
    let mut sign = 1.0;
    let mut sum = 0.0;
    for k in 1..=MAX_TERMS {
        let term = (a2 * (k * k) as f64).exp();
        sum += sign * term;
        if term < EPS {
            return (2.0 * sum).clamp(0.0, 1.0);
        }
        sign = -sign;
    }
    // the series only fails to converge for λ near 0, where Q is 1
    1.0
}

pub fn ks_test(a: &[f64], b: &[f64]) -> Result<KsResult, StatsError> {
    let d = ks_statistic(a, b)?;
    Ok(KsResult { d, p_value: ks_p_value(d, a.len(), b.len()), n: a.len(), m: b.len() })
}

/// Linear interpolation of sorted `v` at plotting position `p`, with
/// order statistic `i` (0-based) sitting at `(i + 0.5) / len`.
fn interpolated_quantile(v: &[f64], p: f64) -> f64 {
    let h = (p * v.len() as f64 - 0.5).clamp(0.0, (v.len() - 1) as f64);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Quantile pairs `(quantile of a, quantile of b)`.
///
/// Equal sizes pair the sorted samples directly. Otherwise each order
/// statistic of the smaller sample, at plotting position `(i - 0.5)/n`, is
/// paired with the interpolated quantile of the larger one.
pub fn qq_pairs(a: &[f64], b: &[f64]) -> Result<Vec<(f64, f64)>, StatsError> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    if a.len() == b.len() {
        return Ok(a.into_iter().zip(b).collect());
    }
    let a_smaller = a.len() < b.len();
    let (small, large) = if a_smaller { (&a, &b) } else { (&b, &a) };
    let n = small.len() as f64;
    Ok(small
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let y = interpolated_quantile(large, (i as f64 + 0.5) / n);
            if a_smaller {
                (x, y)
            } else {
                (y, x)
            }
        })
        .collect())
}
