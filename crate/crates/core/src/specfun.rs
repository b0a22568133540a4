//! Special functions in log space: log-gamma, volumes of ℓp unit balls and
//! the Stirling sandwich for the n-th root of the Euclidean ball volume.
//!
//! Everything that can overflow in high dimension (ball volumes, powers like
//! `(1 + s a)^n`) is carried as a natural logarithm.

use std::f64::consts::{E, PI};
use std::fmt;
use std::ops::{Add, Div, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural logarithm of a non-negative quantity.
///
/// A zero quantity (degenerate body, apex section) is represented by
/// `-inf`; every strictly positive representable quantity has a finite log.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    pub fn from_ln(ln: f64) -> Self {
        LogValue(ln)
    }

    /// Takes the log of a linear-space value. Negative input is a domain error.
    pub fn from_linear(x: f64) -> Result<Self> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::domain(format!("log of negative quantity {x}")));
        }
        Ok(LogValue(x.ln()))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// Linear-space value. Overflows to `inf` / underflows to `0` outside the
    /// double range.
    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn powf(self, t: f64) -> LogValue {
        if self.is_zero() && t > 0.0 {
            return LogValue::ZERO;
        }
        LogValue(self.0 * t)
    }

    pub fn min(self, other: LogValue) -> LogValue {
        if self.0 <= other.0 {
            self
        } else {
            other
        }
    }
}

/// Product of the underlying quantities.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, other: LogValue) -> LogValue {
        LogValue(self.0 + other.0)
    }
}

/// Quotient of the underlying quantities.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for LogValue {
    type Output = LogValue;

    fn div(self, other: LogValue) -> LogValue {
        LogValue(self.0 - other.0)
    }
}

/// Sum of the underlying quantities (log-sum-exp of two terms).
impl Add for LogValue {
    type Output = LogValue;

    fn add(self, other: LogValue) -> LogValue {
        LogValue(log_sum_exp(&[self.0, other.0]))
    }
}

impl From<f64> for LogValue {
    fn from(ln: f64) -> Self {
        LogValue(ln)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

/// `ln(sum(exp(terms)))`, computed with the max shifted out.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

/// Exponent of an ℓp norm. `p = ∞` is its own variant so that `1/p` is
/// exactly zero rather than a rounded reciprocal of a large float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// Validates `p ≥ 1`; `f64::INFINITY` maps to [`Exponent::Infinity`].
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::domain(format!("exponent p = {p} must satisfy p >= 1")))
        }
    }

    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// Hölder conjugate `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::ONE,
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `‖x‖_p`.
    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            Exponent::Infinity => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Exponent::Finite(1.0) => x.iter().map(|v| v.abs()).sum(),
            Exponent::Finite(2.0) => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Exponent::Finite(p) => {
                let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k-1)) for k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

// Below this the argument is shifted up by the recurrence Γ(x+1) = xΓ(x).
const STIRLING_MIN: f64 = 15.0;

// Γ(171) is the last integer value below f64::MAX.
const DIRECT_MAX: f64 = 171.0;

// Γ(x) as a plain product when 2x is an integer and Γ(x) is representable.
fn gamma_half_integer(x: f64) -> Option<f64> {
    if x > DIRECT_MAX || (2.0 * x).fract() != 0.0 {
        return None;
    }
    let (mut g, mut y) = if x.fract() == 0.0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while y < x {
        g *= y;
        y += 1.0;
    }
    Some(g)
}

/// `ln Γ(x)` for `x > 0`.
///
/// Integers and half-integers up to 171 use the exact product. Other
/// arguments below 15 are shifted up with the recurrence, then the Stirling
/// series with eight Bernoulli terms is applied; the truncation error at the
/// shift point is below 1e-19.
pub fn log_gamma(x: f64) -> Result<LogValue> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    if let Some(g) = gamma_half_integer(x) {
        return Ok(LogValue(g.ln()));
    }
    let value = log_gamma_series(x);
    if !value.is_finite() {
        return Err(Error::domain(format!("log_gamma({x}) overflows")));
    }
    Ok(LogValue(value))
}

fn log_gamma_series(x: f64) -> f64 {
    let mut y = x;
    let mut product = 1.0;
    while y < STIRLING_MIN {
        product *= y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (y - 0.5) * y.ln() - y + HALF_LN_2PI + series - product.ln()
}

/// Shorthand for internal callers that have already validated `x > 0`.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    log_gamma(x).map(LogValue::ln).unwrap_or(f64::NAN)
}

/// `ln vol_n(B_p^n) = n ln(2Γ(1+1/p)) − ln Γ(1+n/p)`; for `p = ∞` it is `n ln 2`.
///
/// `n = 0` is accepted and returns `0` (the zero-dimensional ball has unit
/// volume by convention).
pub fn lp_ball_log_volume(p: Exponent, n: usize) -> Result<LogValue> {
    if let Exponent::Finite(pf) = p {
        if !(pf >= 1.0) {
            return Err(Error::domain(format!("p = {pf} must satisfy p >= 1")));
        }
    }
    if n == 0 {
        return Ok(LogValue::ONE);
    }
    let nf = n as f64;
    Ok(match p {
        Exponent::Infinity => LogValue(nf * std::f64::consts::LN_2),
        Exponent::Finite(pf) => {
            let per_axis = std::f64::consts::LN_2 + ln_gamma(1.0 + 1.0 / pf);
            LogValue(nf * per_axis - ln_gamma(1.0 + nf / pf))
        }
    })
}

/// `ln vol_n(B_2^n)` through the textbook form `π^{n/2} / Γ(n/2 + 1)`.
pub fn euclid_ball_log_volume(n: usize) -> LogValue {
    if n == 0 {
        return LogValue::ONE;
    }
    let half = n as f64 / 2.0;
    LogValue(half * PI.ln() - ln_gamma(half + 1.0))
}

/// Bounds on `vol_n(B_2^n)^{1/n}` from the Stirling sandwich for `Γ(n/2+1)`:
///
/// `√(2πe) / (√n (πn)^{1/2n} e^{1/(6n(n−2))}) ≤ vol_n(B_2^n)^{1/n} ≤ √(2πe) / (√n (πn)^{1/2n})`.
pub fn euclid_ball_root_bounds(n: usize) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::domain(format!(
            "root bounds need n >= 3, got {n}"
        )));
    }
    let nf = n as f64;
    let upper = (2.0 * PI * E).sqrt() / (nf.sqrt() * (PI * nf).powf(1.0 / (2.0 * nf)));
    let lower = upper / (1.0 / (6.0 * nf * (nf - 2.0))).exp();
    Ok((lower, upper))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn product_and_series_agree() {
        for x in [0.5, 3.0, 7.5, 15.0, 30.5, 100.0, 170.5, 171.0] {
            let direct = log_gamma(x).unwrap().ln();
            let series = log_gamma_series(x);
            assert!((direct - series).abs() <= 1e-13 * direct.abs().max(1.0), "x={x}: {direct} vs {series}");
        }
        assert_eq!(gamma_half_integer(6.0), Some(120.0));
        assert_eq!(gamma_half_integer(171.5), None);
        assert_eq!(gamma_half_integer(2.25), None);
    }

    // Reference values from a 40-digit mpmath evaluation.
    const LOG_GAMMA_REF: [(f64, f64); 13] = [
        (0.5, 0.572_364_942_924_700_087_1),
        (0.75, 0.203_280_951_431_295_371_5),
        (1.5, -0.120_782_237_635_245_222_3),
        (2.5, 0.284_682_870_472_919_159_6),
        (3.7, 1.428_072_326_665_387_921_9),
        (6.0, 4.787_491_742_782_045_994_2),
        (9.99, 12.779_315_214_350_192_880),
        (10.0, 12.801_827_480_081_469_611),
        (25.5, 56.389_167_643_719_946_744),
        (100.3, 360.514_705_729_058_131_24),
        (1234.5, 7_550.550_901_077_894_895_7),
        (10000.0, 82_099.717_496_442_377_273),
        (0.001, 6.907_178_885_383_853_682_5),
    ];

    #[test]
    fn log_gamma_matches_reference() {
        for (x, want) in LOG_GAMMA_REF {
            let got = log_gamma(x).unwrap().ln();
            // |Δ ln Γ| is the relative error of Γ itself.
            let tol = if x <= 10.0 { 1e-12 } else { 1e-10 };
            assert!((got - want).abs() <= tol, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn log_gamma_trivial_points() {
        assert_eq!(log_gamma(1.0).unwrap().ln(), 0.0);
        assert!((log_gamma(0.5).unwrap().ln() - PI.sqrt().ln()).abs() < 1e-14);
        assert!((log_gamma(6.0).unwrap().ln() - 120f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_rejects_bad_input() {
        for x in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(log_gamma(x), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn ball_volume_examples() {
        let disk = lp_ball_log_volume(Exponent::TWO, 2).unwrap().ln();
        assert!((disk - PI.ln()).abs() < 1e-14);
        let octa = lp_ball_log_volume(Exponent::ONE, 3).unwrap().ln();
        assert!((octa - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        let cube = lp_ball_log_volume(Exponent::Infinity, 5).unwrap().ln();
        assert_eq!(cube, 5.0 * std::f64::consts::LN_2);

        let p3 = lp_ball_log_volume(Exponent::Finite(3.0), 7).unwrap().ln();
        assert!((p3 - 3.037_900_480_638_576_891_5).abs() < 1e-12);
        let p15 = lp_ball_log_volume(Exponent::Finite(1.5), 40).unwrap().ln();
        assert!((p15 + 39.821_525_882_630_381_793).abs() < 1e-11);
    }

    #[test]
    fn ball_volume_rejects_small_p() {
        assert!(Exponent::new(0.5).is_err());
        assert!(lp_ball_log_volume(Exponent::Finite(0.9), 3).is_err());
    }

    #[test]
    fn euclid_forms_agree() {
        for n in 1..=600 {
            let a = lp_ball_log_volume(Exponent::TWO, n).unwrap().ln();
            let b = euclid_ball_log_volume(n).ln();
            // relative agreement of the volumes
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs() * 1e-3), "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn root_bounds_bracket_exact_root() {
        for n in 3..=500 {
            let (lo, hi) = euclid_ball_root_bounds(n).unwrap();
            let exact = (lp_ball_log_volume(Exponent::TWO, n).unwrap().ln() / n as f64).exp();
            assert!(lo <= exact && exact <= hi, "n={n}: {lo} {exact} {hi}");
        }
        let (lo, hi) = euclid_ball_root_bounds(3).unwrap();
        assert!(0.0 < lo && lo < hi);
        // vol_10(B_2^10) = π^5 / 120
        let root10 = (lp_ball_log_volume(Exponent::TWO, 10).unwrap().ln() / 10.0).exp();
        assert!((root10 - 1.098_137_725_900_947_5).abs() < 1e-13);
        assert!(euclid_ball_root_bounds(2).is_err());
    }

    #[test]
    fn volume_increases_with_p() {
        let ps = [1.0, 1.2, 1.5, 2.0, 3.0, 7.5, 40.0];
        // in one dimension every B_p is [−1, 1]
        for n in [2usize, 5, 17, 200] {
            let mut prev = f64::NEG_INFINITY;
            for p in ps {
                let v = lp_ball_log_volume(Exponent::Finite(p), n).unwrap().ln();
                assert!(v > prev, "n={n} p={p}");
                prev = v;
            }
            assert!(lp_ball_log_volume(Exponent::Infinity, n).unwrap().ln() > prev);
        }
    }

    #[test]
    fn consecutive_volume_ratio_grows_like_sqrt_n() {
        // vol_{n-1}/vol_n = Γ(n/2+1) / (√π Γ(n/2+1/2)) ~ √(n/(2π)), i.e. a
        // constant multiple (1/π) of √(πn/2).
        for n in 50..=2000 {
            let ratio = (euclid_ball_log_volume(n - 1).ln() - euclid_ball_log_volume(n).ln()).exp();
            let scaled = ratio / (PI * n as f64 / 2.0).sqrt();
            assert!(scaled * PI >= 0.95 && scaled * PI <= 1.05, "n={n}: {scaled}");
        }
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn conjugates() {
        assert_eq!(Exponent::ONE.conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::ONE);
        assert_eq!(Exponent::TWO.conjugate(), Exponent::TWO);
        assert_eq!(Exponent::Finite(3.0).norm(&[3.0, 4.0, 5.0]), (27.0f64 + 64.0 + 125.0).cbrt());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn log_value_round_trips(x in 1e-300f64..1e300) {
                let back = LogValue::from_linear(x).unwrap().exp();
                prop_assert!(((back - x) / x).abs() < 1e-12);
            }

            #[test]
            fn recurrence_holds(x in 0.01f64..500.0) {
                let lhs = log_gamma(x + 1.0).unwrap().ln();
                let rhs = log_gamma(x).unwrap().ln() + x.ln();
                prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
            }
        }
    }
}
