//! Monte-Carlo volume machinery built on p-generalised Gaussian vectors, plus
//! a deterministic grid oracle for bodies in dimension at most three.
//!
//! For `h` with i.i.d. coordinates of density `p/(2Γ(1/p)) e^{−|t|^p}` and
//! an independent `R = U^{1/n}`, the point `R·h/‖h‖_p` is uniform in `B_p^n`.
//! Hence `vol(B_p^n ∩ s B_q^n) = vol(B_p^n) · P(R ‖h‖_q/‖h‖_p ≤ s)`.

use std::f64::consts::PI;

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::{Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::Body;
use crate::error::{Error, Result};
use crate::specfun::{ln_gamma, lp_ball_log_volume, Exponent, LogValue};
use crate::stream::{run_blocks, RandomStream, BLOCK_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MonteCarlo,
    Grid,
    ClosedForm,
    AnalyticBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub log_value: LogValue,
    /// Standard error of `ln vol`, i.e. the relative error of the volume.
    pub std_err_log: f64,
    pub samples: u64,
    pub method: Method,
}

impl VolumeEstimate {
    pub fn closed_form(log_value: LogValue) -> Self {
        VolumeEstimate { log_value, std_err_log: 0.0, samples: 0, method: Method::ClosedForm }
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    /// Standard error of the volume itself.
    pub fn std_err(&self) -> f64 {
        if self.log_value.is_zero() {
            0.0
        } else {
            self.value() * self.std_err_log
        }
    }
}

/// An estimated probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub value: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl Fraction {
    /// Wilson score estimate at one standard deviation, which stays
    /// positive when the count sits at 0 or `samples`.
    pub fn from_count(hits: u64, samples: u64) -> Self {
        let n = samples as f64;
        let p = hits as f64 / n;
        let half = (p * (1.0 - p) / n + 0.25 / (n * n)).sqrt() / (1.0 + 1.0 / n);
        Fraction { value: p, std_err: half, samples }
    }

    /// `(ln value, std err of ln value)`; the log error is infinite at zero.
    pub fn log_parts(&self) -> (LogValue, f64) {
        if self.value > 0.0 {
            (LogValue::from_ln(self.value.ln()), self.std_err / self.value)
        } else {
            (LogValue::ZERO, f64::INFINITY)
        }
    }
}

/// Scaling of the p-Gaussian coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PGaussScale {
    /// Density `p/(2Γ(1/p)) e^{−|t|^p}`.
    Density,
    /// Rescaled to unit variance; for `p = 2` these are `N(0, 1)` draws.
    UnitVariance,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Laplace,
    Normal,
    Uniform,
    General(Gamma<f64>),
}

/// Draws one p-Gaussian coordinate at a time: `|h| = G^{1/p}` with
/// `G ~ Gamma(1/p)` and a random sign, with exact shortcuts for `p ∈ {1, 2, ∞}`.
#[derive(Debug, Clone, Copy)]
pub struct PGauss {
    kind: Kind,
    inv_p: f64,
    factor: f64,
}

impl PGauss {
    pub fn new(p: Exponent, scale: PGaussScale) -> Result<Self> {
        let p = Exponent::new(p.as_f64())?;
        let inv_p = p.reciprocal();
        let kind = match p {
            Exponent::Infinity => Kind::Uniform,
            Exponent::Finite(1.0) => Kind::Laplace,
            Exponent::Finite(2.0) => Kind::Normal,
            Exponent::Finite(_) => Kind::General(
                Gamma::new(inv_p, 1.0).map_err(|e| Error::domain(e.to_string()))?,
            ),
        };
        let base = match kind {
            // e^{−t²} is the N(0, 1/2) density
            Kind::Normal => std::f64::consts::FRAC_1_SQRT_2,
            _ => 1.0,
        };
        let factor = match scale {
            PGaussScale::Density => base,
            PGaussScale::UnitVariance => base / pq_moment(p, 2.0)?.sqrt(),
        };
        Ok(PGauss { kind, inv_p, factor })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let raw = match self.kind {
            Kind::Normal => {
                let z: f64 = StandardNormal.sample(rng);
                return self.factor * z;
            }
            Kind::Uniform => return self.factor * rng.random_range(-1.0..1.0),
            Kind::Laplace => {
                let e: f64 = Exp1.sample(rng);
                e
            }
            Kind::General(g) => {
                let x: f64 = g.sample(rng);
                x.powf(self.inv_p)
            }
        };
        let signed: f64 = if rng.random::<bool>() { raw } else { -raw };
        self.factor * signed
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.draw(rng);
        }
    }
}

/// `count` i.i.d. draws from the p-Gaussian density.
pub fn sample_pgauss(p: Exponent, count: usize, scale: PGaussScale, stream: &mut RandomStream) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::domain("count must be positive"));
    }
    let sampler = PGauss::new(p, scale)?;
    let mut out = vec![0.0; count];
    sampler.fill(stream, &mut out);
    Ok(out)
}

/// `E|h|^q = Γ((q+1)/p) / Γ(1/p)` for the density `p/(2Γ(1/p)) e^{−|t|^p}`;
/// for `p = ∞` the uniform law on `[−1, 1]` gives `1/(q+1)`.
pub fn pq_moment(p: Exponent, q: f64) -> Result<f64> {
    let p = Exponent::new(p.as_f64())?;
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::domain(format!("moment order q = {q} must be >= 0")));
    }
    Ok(match p {
        Exponent::Infinity => 1.0 / (q + 1.0),
        Exponent::Finite(v) => (ln_gamma((q + 1.0) / v) - ln_gamma(1.0 / v)).exp(),
    })
}

/// How the radial variable `R = U^{1/n}` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialSampling {
    #[default]
    Plain,
    /// `U` stratified into equal strata within each block.
    Stratified,
}

#[derive(Debug, Clone, Copy)]
struct RatioQuery {
    p: Exponent,
    q: Exponent,
    n: usize,
    threshold: f64,
    radial: Option<RadialSampling>,
}

// Counts samples with (R·)‖h‖_q/‖h‖_p ≤ threshold, block by block.
fn count_ratio_hits(query: RatioQuery, samples: usize, stream: &RandomStream) -> Result<Fraction> {
    if samples == 0 {
        return Err(Error::domain("samples must be positive"));
    }
    if query.n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let sampler = PGauss::new(query.p, PGaussScale::Density)?;
    let q = Exponent::new(query.q.as_f64())?;
    let inv_n = 1.0 / query.n as f64;
    let hits: u64 = run_blocks(stream, samples, |rng, len| {
        let mut h = vec![0.0; query.n];
        let mut count = 0u64;
        for i in 0..len {
            sampler.fill(rng, &mut h);
            let ratio = q.norm(&h) / query.p.norm(&h);
            let r = match query.radial {
                None => 1.0,
                Some(mode) => {
                    let u: f64 = Open01.sample(rng);
                    let u = match mode {
                        RadialSampling::Plain => u,
                        RadialSampling::Stratified => (i as f64 + u) / len as f64,
                    };
                    (u.ln() * inv_n).exp()
                }
            };
            if r * ratio <= query.threshold {
                count += 1;
            }
        }
        count
    })
    .into_iter()
    .sum();
    Ok(Fraction::from_count(hits, samples as u64))
}

/// Empirical `P(‖h‖_q / ‖h‖_p ≤ u)` for p-Gaussian `h ∈ R^n`.
pub fn ratio_cdf(p: Exponent, q: Exponent, n: usize, u: f64, samples: usize, stream: &RandomStream) -> Result<Fraction> {
    if !(u >= 0.0) {
        return Err(Error::domain(format!("u = {u} must be >= 0")));
    }
    count_ratio_hits(RatioQuery { p, q, n, threshold: u, radial: None }, samples, stream)
}

/// `vol(B_p^n ∩ s B_q^n) / vol(B_p^n)`.
pub fn intersect_fraction(
    p: Exponent,
    q: Exponent,
    n: usize,
    s: f64,
    samples: usize,
    sampling: RadialSampling,
    stream: &RandomStream,
) -> Result<Fraction> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("scale s = {s} must be >= 0")));
    }
    count_ratio_hits(RatioQuery { p, q, n, threshold: s, radial: Some(sampling) }, samples, stream)
}

/// `vol(B_p^n ∩ s B_q^n)` in log space.
pub fn intersect_volume(p: Exponent, q: Exponent, n: usize, s: f64, samples: usize, stream: &RandomStream) -> Result<VolumeEstimate> {
    intersect_volume_with(p, q, n, s, samples, RadialSampling::Plain, stream)
}

pub fn intersect_volume_with(
    p: Exponent,
    q: Exponent,
    n: usize,
    s: f64,
    samples: usize,
    sampling: RadialSampling,
    stream: &RandomStream,
) -> Result<VolumeEstimate> {
    let frac = intersect_fraction(p, q, n, s, samples, sampling, stream)?;
    let (log_frac, std_err_log) = frac.log_parts();
    Ok(VolumeEstimate {
        log_value: lp_ball_log_volume(p, n)? * log_frac,
        std_err_log,
        samples: samples as u64,
        method: Method::MonteCarlo,
    })
}

/// Midpoint-rule volume of a body in dimension ≤ 3 over the box
/// `anchor ± out_radius`.
///
/// The error is a heuristic: cells whose centre lies within half a cell
/// diagonal of the boundary (measured along the ray from the anchor) are
/// counted as `B`, and the error is taken as `B · cell_volume / 2`, which is
/// of order perimeter × cell width. Edges aligned with the lattice
/// diagonals do produce biases of that size.
pub fn grid_volume(body: &Body, resolution: usize) -> Result<VolumeEstimate> {
    let dim = body.dim();
    if dim > 3 {
        return Err(Error::unsupported(format!("grid volume needs dim <= 3, got {dim}")));
    }
    if resolution < 100 {
        return Err(Error::domain(format!("resolution {resolution} below 100")));
    }
    let (inside, boundary, cell) = rasterize(body, resolution, |_| 1.0);
    let vol = inside[0] * cell;
    if vol == 0.0 {
        return Ok(VolumeEstimate { log_value: LogValue::ZERO, std_err_log: 0.0, samples: 0, method: Method::Grid });
    }
    let err = 0.5 * cell * boundary as f64;
    Ok(VolumeEstimate {
        log_value: LogValue::from_ln(vol.ln()),
        std_err_log: err / vol,
        samples: (resolution as u64).pow(dim as u32),
        method: Method::Grid,
    })
}

/// Centroid of a body in dimension ≤ 3 by the same midpoint rule.
pub fn grid_centroid(body: &Body, resolution: usize) -> Result<Vec<f64>> {
    let dim = body.dim();
    if dim > 3 {
        return Err(Error::unsupported(format!("grid centroid needs dim <= 3, got {dim}")));
    }
    if resolution < 100 {
        return Err(Error::domain(format!("resolution {resolution} below 100")));
    }
    let mut out = Vec::with_capacity(dim);
    for axis in 0..dim {
        let (sums, _, _) = rasterize(body, resolution, |x| x[axis]);
        out.push(sums[1] / sums[0]);
    }
    Ok(out)
}

// Returns ([count, Σ weight] over interior cells, boundary cells, cell volume).
fn rasterize<W: Fn(&[f64]) -> f64 + Sync>(body: &Body, res: usize, weight: W) -> ([f64; 2], u64, f64) {
    let dim = body.dim();
    let anchor = body.anchor().to_vec();
    let r = body.out_radius() * (1.0 + 1e-9);
    let h = 2.0 * r / res as f64;
    let band = 0.5 * h * (dim as f64).sqrt();
    let inner = res.pow(dim as u32 - 1);
    let rows: Vec<([f64; 2], u64)> = (0..res)
        .into_par_iter()
        .map(|i| {
            let mut acc = [0.0; 2];
            let mut near = 0u64;
            let mut x = vec![0.0; dim];
            let mut y = vec![0.0; dim];
            for j in 0..inner {
                let mut idx = [i, j % res, j / res];
                if dim == 1 {
                    idx[1] = 0;
                }
                for d in 0..dim {
                    y[d] = -r + (idx[d] as f64 + 0.5) * h;
                    x[d] = anchor[d] + y[d];
                }
                let g = body.gauge(&y);
                let len = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                if g > 0.0 && (len - len / g).abs() <= band {
                    near += 1;
                }
                if g <= 1.0 {
                    acc[0] += 1.0;
                    acc[1] += weight(&x);
                }
            }
            (acc, near)
        })
        .collect();
    let mut acc = [0.0; 2];
    let mut near = 0;
    for (a, b) in rows {
        acc[0] += a[0];
        acc[1] += a[1];
        near += b;
    }
    let cell = h.powi(dim as i32);
    (acc, near, cell)
}

fn log_root_volumes(n: usize) -> Result<(f64, f64)> {
    let nf = n as f64;
    Ok((
        lp_ball_log_volume(Exponent::ONE, n)?.ln() / nf,
        lp_ball_log_volume(Exponent::TWO, n)?.ln() / nf,
    ))
}

fn check_threshold_args(n: usize, gamma: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("gamma = {gamma} must be positive")));
    }
    Ok(())
}

/// `(√(2/π) + γ) √n · vol(B_1^n)^{1/n} / vol(B_2^n)^{1/n}`: above this `t`
/// the normalised ball keeps half its volume inside `t` times the normalised cross-polytope.
pub fn threshold_ball_in_cross(n: usize, gamma: f64) -> Result<f64> {
    check_threshold_args(n, gamma)?;
    let (l1, l2) = log_root_volumes(n)?;
    Ok(((2.0 / PI).sqrt() + gamma) * (n as f64).sqrt() * (l1 - l2).exp())
}

/// `(√2 + γ)/√n · vol(B_2^n)^{1/n} / vol(B_1^n)^{1/n}`, tending to `√(π/e)`.
pub fn threshold_cross_in_ball(n: usize, gamma: f64) -> Result<f64> {
    check_threshold_args(n, gamma)?;
    let (l1, l2) = log_root_volumes(n)?;
    Ok((2f64.sqrt() + gamma) / (n as f64).sqrt() * (l2 - l1).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HalfTestKind {
    /// `vol(B_2^n/|B_2^n|^{1/n} ∩ t B_1^n/|B_1^n|^{1/n})`.
    BallInCross,
    /// `vol(B_1^n/|B_1^n|^{1/n} ∩ t B_2^n/|B_2^n|^{1/n})`.
    CrossInBall,
}

/// Monte-Carlo volume of the intersection of two volume-one bodies, one
/// of them dilated by `scale`.
pub fn half_test(kind: HalfTestKind, n: usize, scale: f64, samples: usize, stream: &RandomStream) -> Result<Fraction> {
    if !(scale >= 0.0) {
        return Err(Error::domain(format!("scale = {scale} must be >= 0")));
    }
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let (l1, l2) = log_root_volumes(n)?;
    let (outer, inner, s) = match kind {
        HalfTestKind::BallInCross => (Exponent::TWO, Exponent::ONE, scale * (l2 - l1).exp()),
        HalfTestKind::CrossInBall => (Exponent::ONE, Exponent::TWO, scale * (l1 - l2).exp()),
    };
    if s.is_infinite() {
        return Ok(Fraction::from_count(samples as u64, samples as u64));
    }
    intersect_fraction(outer, inner, n, s, samples, RadialSampling::Plain, stream)
}

/// Probability that an empirical norm ratio of an i.i.d. vector lies within
/// `γ` of its limit:
/// for `p = 2`, `N(0,1)` coordinates and `(Σ|g_i|/n) / (Σg_i²/n)^{1/2}` near `√(2/π)`;
/// for `p = 1`, density `½e^{−|t|}` and `(Σh_i²/n)^{1/2} / (Σ|h_i|/n)` near `√2`.
pub fn norm_ratio_concentration(p: Exponent, n: usize, gamma: f64, samples: usize, stream: &RandomStream) -> Result<Fraction> {
    check_threshold_args(n, gamma)?;
    if samples == 0 {
        return Err(Error::domain("samples must be positive"));
    }
    let (sampler, target, l2_over_l1) = match p {
        Exponent::Finite(2.0) => (PGauss::new(p, PGaussScale::UnitVariance)?, (2.0 / PI).sqrt(), false),
        Exponent::Finite(1.0) => (PGauss::new(p, PGaussScale::Density)?, 2f64.sqrt(), true),
        other => return Err(Error::unsupported(format!("norm ratio concentration for p = {other}"))),
    };
    let nf = n as f64;
    let hits: u64 = run_blocks(stream, samples, |rng, len| {
        let mut count = 0u64;
        for _ in 0..len {
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let x = sampler.draw(rng);
                s1 += x.abs();
                s2 += x * x;
            }
            let m1 = s1 / nf;
            let m2 = (s2 / nf).sqrt();
            let ratio = if l2_over_l1 { m2 / m1 } else { m1 / m2 };
            if (ratio - target).abs() <= gamma {
                count += 1;
            }
        }
        count
    })
    .into_iter()
    .sum();
    Ok(Fraction::from_count(hits, samples as u64))
}

/// Sample mean and its standard error of `|h|^q` over `samples` draws.
pub fn sample_moment(p: Exponent, q: f64, samples: usize, scale: PGaussScale, stream: &RandomStream) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::domain("samples must be positive"));
    }
    let sampler = PGauss::new(p, scale)?;
    let sums = run_blocks(stream, samples, |rng, len| {
        let mut s = [0.0; 2];
        for _ in 0..len {
            let v = sampler.draw(rng).abs().powf(q);
            s[0] += v;
            s[1] += v * v;
        }
        s
    });
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |(a, b), s| (a + s[0], b + s[1]));
    let n = samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Number of blocks an estimator with `samples` draws is split into.
pub fn block_count(samples: usize) -> usize {
    samples.div_ceil(BLOCK_SIZE)
}
