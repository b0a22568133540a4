//! Mixed volumes of the Euclidean ball and the cube, the Steiner-type
//! polynomial `vol(B_2^n + t B_∞^n)`, and centroid heights of the hull
//! `co[(K, 0), (L, c)]`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{ln_gamma, log_sum_exp, lp_ball_log_volume, Exponent, LogValue};

/// `V_{n−k,k}(B_2^n, B_∞^n) = 2^k vol_{n−k}(B_2^{n−k})` for `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedVolumeTable {
    pub n: usize,
    pub entries: Vec<LogValue>,
}

impl MixedVolumeTable {
    pub fn entry(&self, k: usize) -> LogValue {
        self.entries[k]
    }
}

pub fn mixed_volume_table(n: usize) -> Result<MixedVolumeTable> {
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let entries = (0..=n)
        .map(|k| {
            let ball = lp_ball_log_volume(Exponent::TWO, n - k)?;
            Ok(LogValue::from_ln(k as f64 * std::f64::consts::LN_2 + ball.ln()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MixedVolumeTable { n, entries })
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln vol(B_2^n + t B_∞^n) = ln Σ_k C(n,k) 2^k vol_{n−k}(B_2^{n−k}) t^k`.
pub fn minkowski_volume(n: usize, t: f64) -> Result<LogValue> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("dilation t must be non-negative, got {t}")));
    }
    let table = mixed_volume_table(n)?;
    if t == 0.0 {
        return Ok(table.entry(0));
    }
    let terms: Vec<f64> = (0..=n)
        .map(|k| ln_binomial(n, k) + table.entry(k).ln() + k as f64 * t.ln())
        .collect();
    Ok(LogValue::from_ln(log_sum_exp(&terms)))
}

/// `c/(n+2) · Σ (k+1) V_k / Σ V_k` from the log mixed volumes
/// `V_k = V_{n−k,k}(K, L)`, `k = 0..=n`.
pub fn centroid_height_from_mixed(log_mixed: &[f64], c: f64) -> Result<f64> {
    if log_mixed.is_empty() {
        return Err(Error::domain("need at least one mixed volume"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain(format!("height c must be positive, got {c}")));
    }
    let n = log_mixed.len() - 1;
    let num: Vec<f64> = log_mixed
        .iter()
        .enumerate()
        .map(|(k, w)| w + ((k + 1) as f64).ln())
        .collect();
    let ratio = (log_sum_exp(&num) - log_sum_exp(log_mixed)).exp();
    Ok(c * ratio / (n as f64 + 2.0))
}

// ln w_k = −(k/n) ln Γ(1+n/2) − ln Γ(1+(n−k)/2), proportional to V_{n−k,k}(K, L)
// for K = B_2^n / vol(B_2^n)^{1/n} and L = B_∞^n / 2.
fn hull_log_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let top = ln_gamma(1.0 + nf / 2.0);
    (0..=n)
        .map(|k| -(k as f64 / nf) * top - ln_gamma(1.0 + (n - k) as f64 / 2.0))
        .collect()
}

/// Height over the `K`-face of the centroid of `co[(K, 0), (L, c)]` with the
/// normalised ball `K` and the half cube `L`.
pub fn hull_centroid_height(n: usize, c: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    centroid_height_from_mixed(&hull_log_weights(n), c)
}

/// `hull_centroid_height(n, 1)`; tends to `1 − 1/e`.
pub fn centroid_ratio_sequence(n: usize) -> Result<f64> {
    hull_centroid_height(n, 1.0)
}

/// `−a/e + (1 − 1/e) b`, the limiting centroid of `co[(K, −a), (L, b)]`.
pub fn hull_centroid_limit(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!("need a > 0 and b > 0, got a={a}, b={b}")));
    }
    Ok(-a / E + (1.0 - 1.0 / E) * b)
}
