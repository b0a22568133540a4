//! Polar volumes and Santaló points.
//!
//! For `x` interior to `K`, the radial function of `(K − x)°` in direction
//! `θ` is `1/h_{K−x}(θ)`, so
//! `vol((K − x)°) = vol(B_2^n) · E_θ[h_{K−x}(θ)^{−n}]` and the centroid of
//! `(K − x)°` is `n/(n+1) · E_θ[θ h^{−(n+1)}] / E_θ[h^{−n}]` over uniform unit
//! vectors `θ`. Bodies invariant under rotations about an axis reduce both to
//! one-dimensional integrals over the polar angle with weight `sin^{n−2} φ`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bodies::{make_half_ball, Body};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::specfun::{ln_gamma, log_sum_exp, lp_ball_log_volume, Exponent, LogValue};
use crate::stream::{run_blocks, RandomStream};
use crate::volmc::{Method, VolumeEstimate};

const AXIAL_NODES: usize = 32;
const AXIAL_PANELS: usize = 64;

/// Default golden-section tolerance along the axis.
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

/// Residual below which a candidate is accepted as the Santaló point.
pub const RESIDUAL_THRESHOLD: f64 = 1e-2;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_polar_args(body: &Body, x: &[f64]) -> Result<()> {
    if x.len() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: x.len() });
    }
    if !body.has_support() {
        return Err(Error::unsupported("polar volume needs a support function"));
    }
    if !body.is_interior(x) {
        return Err(Error::domain("point is not interior to the body"));
    }
    Ok(())
}

// Axis `i` when the body is rotation invariant about it and x lies on it.
fn usable_axis(body: &Body, x: &[f64]) -> Option<usize> {
    let i = body.symmetry().axis?;
    if body.dim() < 2 {
        return None;
    }
    x.iter().enumerate().all(|(j, v)| j == i || *v == 0.0).then_some(i)
}

// h_{K−x}(θ(φ)) with θ = cos φ e_i + sin φ e_j.
fn axial_support(body: &Body, x: &[f64], axis: usize, phi: f64) -> f64 {
    let n = body.dim();
    let mut u = vec![0.0; n];
    u[axis] = phi.cos();
    u[(axis + 1) % n] = phi.sin();
    body.support(&u).expect("checked support") - dot(&u, x)
}

fn ln_sphere_angle_norm(n: usize) -> f64 {
    // ∫_0^π sin^{n−2} φ dφ = √π Γ((n−1)/2) / Γ(n/2)
    0.5 * PI.ln() + ln_gamma((n as f64 - 1.0) / 2.0) - ln_gamma(n as f64 / 2.0)
}

// ln ∫ over [lo, hi] of sin^{n−2}φ · weight(φ) · h^{−power}, split at π/2.
fn axial_log_integral<W: Fn(f64) -> f64>(
    body: &Body,
    x: &[f64],
    axis: usize,
    power: f64,
    log_weight: W,
    range: (f64, f64),
    panels: usize,
) -> Result<f64> {
    let n = body.dim();
    let rule = GaussLegendre::new(AXIAL_NODES);
    let mut bad = false;
    let mut f = |phi: f64| {
        let h = axial_support(body, x, axis, phi);
        if !(h > 0.0) {
            bad = true;
            return f64::NEG_INFINITY;
        }
        (n as f64 - 2.0) * phi.sin().ln() - power * h.ln() + log_weight(phi)
    };
    let mut parts = Vec::new();
    for (lo, hi) in [(range.0, range.1.min(FRAC_PI_2)), (range.0.max(FRAC_PI_2), range.1)] {
        if hi > lo {
            parts.push(rule.log_integrate(&mut f, lo, hi, panels));
        }
    }
    if bad {
        return Err(Error::domain("point is not interior to the body"));
    }
    Ok(log_sum_exp(&parts))
}

fn axial_log_volume(body: &Body, x: &[f64], axis: usize, panels: usize) -> Result<f64> {
    let n = body.dim();
    let li = axial_log_integral(body, x, axis, n as f64, |_| 0.0, (0.0, PI), panels)?;
    Ok(lp_ball_log_volume(Exponent::TWO, n)?.ln() + li - ln_sphere_angle_norm(n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct LogMoments {
    // ln Σ b_i, ln Σ b_i² and the per-component Σ a_i, Σ a_i², Σ a_i b_i scaled by e^{−max}
    max: f64,
    sum_b: f64,
    sum_b2: f64,
    count: u64,
}

/// Monte-Carlo accumulator of `b = e^{t}` and `a = e^{t} v` over samples,
/// rescaled whenever a larger exponent arrives.
#[derive(Debug, Clone)]
struct Accum {
    m: LogMoments,
    sum_a: Vec<f64>,
    sum_a2: Vec<f64>,
    sum_ab: Vec<f64>,
}

impl Accum {
    fn new(dim: usize) -> Self {
        Accum {
            m: LogMoments { max: f64::NEG_INFINITY, sum_b: 0.0, sum_b2: 0.0, count: 0 },
            sum_a: vec![0.0; dim],
            sum_a2: vec![0.0; dim],
            sum_ab: vec![0.0; dim],
        }
    }

    fn rescale(&mut self, new_max: f64) {
        if new_max > self.m.max {
            let f = if self.m.max.is_finite() { (self.m.max - new_max).exp() } else { 0.0 };
            let f2 = f * f;
            self.m.sum_b *= f;
            self.m.sum_b2 *= f2;
            for k in 0..self.sum_a.len() {
                self.sum_a[k] *= f;
                self.sum_a2[k] *= f2;
                self.sum_ab[k] *= f2;
            }
            self.m.max = new_max;
        }
    }

    // one sample: b = Σ_j e^{t_j} / m, a = Σ_j e^{t_j} v_j / m over antithetic members j
    fn push(&mut self, terms: &[(f64, &[f64])]) {
        let top = terms.iter().map(|(t, _)| *t).fold(f64::NEG_INFINITY, f64::max);
        self.rescale(top);
        let m = terms.len() as f64;
        let mut b = 0.0;
        let dim = self.sum_a.len();
        let mut a = vec![0.0; dim];
        for (t, v) in terms {
            let w = (t - self.m.max).exp() / m;
            b += w;
            for (ak, vk) in a.iter_mut().zip(v.iter()) {
                *ak += w * vk;
            }
        }
        self.m.sum_b += b;
        self.m.sum_b2 += b * b;
        for (k, &ak) in a.iter().enumerate() {
            self.sum_a[k] += ak;
            self.sum_a2[k] += ak * ak;
            self.sum_ab[k] += ak * b;
        }
        self.m.count += 1;
    }

    fn merge(&mut self, mut other: Accum) {
        let top = self.m.max.max(other.m.max);
        self.rescale(top);
        other.rescale(top);
        self.m.sum_b += other.m.sum_b;
        self.m.sum_b2 += other.m.sum_b2;
        self.m.count += other.m.count;
        for k in 0..self.sum_a.len() {
            self.sum_a[k] += other.sum_a[k];
            self.sum_a2[k] += other.sum_a2[k];
            self.sum_ab[k] += other.sum_ab[k];
        }
    }

    /// `(ln mean b, relative std err of mean b)`.
    fn log_mean_b(&self) -> (f64, f64) {
        let n = self.m.count as f64;
        let mean = self.m.sum_b / n;
        let var = (self.m.sum_b2 / n - mean * mean).max(0.0);
        (self.m.max + mean.ln(), (var / n).sqrt() / mean)
    }

    /// Ratio `Σa/Σb` per component and its delta-method standard error.
    fn ratio(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.m.count as f64;
        let mb = self.m.sum_b / n;
        let mut c = Vec::with_capacity(self.sum_a.len());
        let mut se = Vec::with_capacity(self.sum_a.len());
        for k in 0..self.sum_a.len() {
            let ck = self.sum_a[k] / self.m.sum_b;
            let resid = (self.sum_a2[k] - 2.0 * ck * self.sum_ab[k] + ck * ck * self.m.sum_b2) / n;
            c.push(ck);
            se.push((resid.max(0.0) / n).sqrt() / mb);
        }
        (c, se)
    }
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R, u: &mut [f64]) {
    loop {
        let mut r2 = 0.0;
        for v in u.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = z;
            r2 += z * z;
        }
        if r2 > 0.0 {
            let r = r2.sqrt();
            u.iter_mut().for_each(|v| *v /= r);
            return;
        }
    }
}

// Antithetic pairs (θ, −θ) sharing one draw; `vector` selects which moment to carry.
fn sphere_moments(
    body: &Body,
    x: &[f64],
    power: f64,
    with_vector: bool,
    pairs: usize,
    stream: &RandomStream,
) -> Result<Accum> {
    let n = body.dim();
    let vdim = if with_vector { n } else { 0 };
    let blocks = run_blocks(stream, pairs, |rng, len| {
        let mut acc = Accum::new(vdim);
        let mut u = vec![0.0; n];
        let mut neg = vec![0.0; n];
        for _ in 0..len {
            unit_vector(rng, &mut u);
            for k in 0..n {
                neg[k] = -u[k];
            }
            let hp = body.support(&u).expect("checked support") - dot(&u, x);
            let hm = body.support(&neg).expect("checked support") - dot(&neg, x);
            if !(hp > 0.0 && hm > 0.0) {
                return None;
            }
            let (vp, vm): (Vec<f64>, Vec<f64>) = if with_vector {
                (u.iter().map(|v| v / hp).collect(), neg.iter().map(|v| v / hm).collect())
            } else {
                (Vec::new(), Vec::new())
            };
            acc.push(&[(-power * hp.ln(), &vp), (-power * hm.ln(), &vm)]);
        }
        Some(acc)
    });
    let mut total = Accum::new(vdim);
    for b in blocks {
        match b {
            Some(acc) => total.merge(acc),
            None => return Err(Error::domain("point is not interior to the body")),
        }
    }
    Ok(total)
}

/// `ln vol((K − x)°)`. Rotation-invariant bodies with `x` on the axis use
/// Gauss–Legendre quadrature over the polar angle (`method = grid`, error
/// from halving the panels); everything else uses `angular_samples`
/// antithetic directions (`method = monte-carlo`).
pub fn polar_log_volume(body: &Body, x: &[f64], angular_samples: usize, stream: &RandomStream) -> Result<VolumeEstimate> {
    check_polar_args(body, x)?;
    let n = body.dim();
    if n == 1 {
        let hp = body.support(&[1.0]).expect("checked") - x[0];
        let hm = body.support(&[-1.0]).expect("checked") + x[0];
        return Ok(VolumeEstimate::closed_form(LogValue::from_ln((1.0 / hp + 1.0 / hm).ln())));
    }
    if let Some(axis) = usable_axis(body, x) {
        let fine = axial_log_volume(body, x, axis, AXIAL_PANELS)?;
        let coarse = axial_log_volume(body, x, axis, AXIAL_PANELS / 2)?;
        return Ok(VolumeEstimate {
            log_value: LogValue::from_ln(fine),
            std_err_log: (fine - coarse).abs(),
            samples: (2 * AXIAL_NODES * AXIAL_PANELS) as u64,
            method: Method::Grid,
        });
    }
    if angular_samples < 2 {
        return Err(Error::domain("need at least two angular samples"));
    }
    let acc = sphere_moments(body, x, n as f64, false, angular_samples / 2, stream)?;
    let (log_mean, rel) = acc.log_mean_b();
    Ok(VolumeEstimate {
        log_value: LogValue::from_ln(lp_ball_log_volume(Exponent::TWO, n)?.ln() + log_mean),
        std_err_log: rel,
        samples: (2 * (angular_samples / 2)) as u64,
        method: Method::MonteCarlo,
    })
}

/// Centroid of `(K − x)°` with per-coordinate standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarCentroidEstimate {
    pub centroid: Vec<f64>,
    pub std_err: Vec<f64>,
    pub samples: u64,
}

/// Monte-Carlo centroid of `(K − x)°`. For rotation-invariant bodies with
/// `x` on the axis, the transverse coordinates vanish by symmetry and are
/// reported as exactly zero.
pub fn polar_centroid(body: &Body, x: &[f64], samples: usize, stream: &RandomStream) -> Result<PolarCentroidEstimate> {
    check_polar_args(body, x)?;
    if samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let n = body.dim();
    let acc = sphere_moments(body, x, n as f64, true, samples / 2, stream)?;
    let (mut c, mut se) = acc.ratio();
    let scale = n as f64 / (n as f64 + 1.0);
    c.iter_mut().for_each(|v| *v *= scale);
    se.iter_mut().for_each(|v| *v *= scale);
    if let Some(axis) = usable_axis(body, x) {
        for k in (0..n).filter(|&k| k != axis) {
            c[k] = 0.0;
            se[k] = 0.0;
        }
    }
    Ok(PolarCentroidEstimate { centroid: c, std_err: se, samples: (2 * (samples / 2)) as u64 })
}

fn axial_centroid_with_panels(body: &Body, x: &[f64], axis: usize, panels: usize) -> Result<f64> {
    let n = body.dim() as f64;
    let lb = axial_log_integral(body, x, axis, n, |_| 0.0, (0.0, PI), panels)?;
    let lp = axial_log_integral(body, x, axis, n + 1.0, |p| p.cos().ln(), (0.0, FRAC_PI_2), panels)?;
    let ln = axial_log_integral(body, x, axis, n + 1.0, |p| (-p.cos()).ln(), (FRAC_PI_2, PI), panels)?;
    Ok(n / (n + 1.0) * ((lp - lb).exp() - (ln - lb).exp()))
}

/// Axial coordinate of the centroid of `(K − x)°` by quadrature.
pub fn axial_polar_centroid(body: &Body, x: &[f64]) -> Result<f64> {
    check_polar_args(body, x)?;
    let axis = usable_axis(body, x).ok_or_else(|| Error::unsupported("needs a rotation axis through x"))?;
    axial_centroid_with_panels(body, x, axis, AXIAL_PANELS)
}

/// Result of a fixed-point check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResidual {
    /// `‖centroid of (K − x)°‖₂`.
    pub residual: f64,
    pub std_err: f64,
    pub centroid: Vec<f64>,
}

/// The Santaló point is the unique `x` for which `(K − x)°` has its
/// centroid at the origin; the residual is the distance of that centroid from 0.
/// When `x` lies on a rotation axis of `K` only the axial coordinate can be
/// nonzero, and it is computed by quadrature (`samples` is then unused).
pub fn verify_santalo_fixed_point(body: &Body, candidate: &[f64], samples: usize, stream: &RandomStream) -> Result<FixedPointResidual> {
    check_polar_args(body, candidate)?;
    if let Some(axis) = usable_axis(body, candidate) {
        let fine = axial_centroid_with_panels(body, candidate, axis, AXIAL_PANELS)?;
        let coarse = axial_centroid_with_panels(body, candidate, axis, AXIAL_PANELS / 2)?;
        let mut centroid = vec![0.0; body.dim()];
        centroid[axis] = fine;
        return Ok(FixedPointResidual { residual: fine.abs(), std_err: (fine - coarse).abs(), centroid });
    }
    let est = polar_centroid(body, candidate, samples, stream)?;
    let residual = est.centroid.iter().map(|v| v * v).sum::<f64>().sqrt();
    let std_err = if residual > 0.0 {
        est.centroid.iter().zip(&est.std_err).map(|(c, s)| (c * s).powi(2)).sum::<f64>().sqrt() / residual
    } else {
        est.std_err.iter().map(|s| s * s).sum::<f64>().sqrt()
    };
    Ok(FixedPointResidual { residual, std_err, centroid: est.centroid })
}

/// Minimiser of a unimodal function found by golden-section search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldenSection {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
}

pub fn golden_section<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<GoldenSection> {
    if !(hi > lo) || !(tol > 0.0) {
        return Err(Error::domain(format!("bad golden-section bracket [{lo}, {hi}] with tol {tol}")));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut iterations = 0;
    while b - a > tol {
        if iterations >= max_iter {
            return Err(Error::diagnostics(format!("golden section did not reach {tol} in {max_iter} steps")));
        }
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok(GoldenSection { x, fx, iterations, lo: a, hi: b })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    AxisGoldenSection,
    Grid2d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SantaloReport {
    pub point: Vec<f64>,
    pub polar_log_volume: LogValue,
    pub iterations: usize,
    /// Fixed-point residual recomputed at `point` by [`verify_santalo_fixed_point`].
    pub residual: f64,
    pub residual_std_err: f64,
    pub method: SearchMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SantaloOptions {
    pub tolerance: f64,
    /// Directions per objective evaluation when quadrature is unavailable.
    pub angular_samples: usize,
    /// Directions for the fixed-point residual.
    pub verify_samples: usize,
    /// Search axis for origin-symmetric bodies without a rotation axis.
    pub axis: usize,
}

impl Default for SantaloOptions {
    fn default() -> Self {
        SantaloOptions { tolerance: DEFAULT_TOLERANCE, angular_samples: 100_000, verify_samples: 200_000, axis: 0 }
    }
}

// Stay this fraction of the chord away from the boundary, where h → 0.
const EDGE_MARGIN: f64 = 1e-3;

/// Minimises `vol((K − x)°)` over `x` on the symmetry axis through the anchor.
///
/// The body must be rotation invariant about an axis, or origin symmetric
/// (then `opts.axis` is searched with common random directions, which keeps
/// the Monte-Carlo objective convex and even).
pub fn santalo_axis_search(body: &Body, opts: &SantaloOptions, stream: &RandomStream) -> Result<SantaloReport> {
    let sym = body.symmetry();
    let axis = match (sym.axis, sym.origin) {
        (Some(i), _) => i,
        (None, true) if opts.axis < body.dim() => opts.axis,
        (None, true) => return Err(Error::domain(format!("axis {} out of range", opts.axis))),
        (None, false) => return Err(Error::unsupported("axis search needs an axially or origin symmetric body")),
    };
    if !body.has_support() {
        return Err(Error::unsupported("axis search needs a support function"));
    }
    let anchor = body.anchor().to_vec();
    if anchor.iter().enumerate().any(|(j, v)| j != axis && *v != 0.0) {
        return Err(Error::unsupported("anchor must lie on the search axis"));
    }
    let n = body.dim();
    let mut e = vec![0.0; n];
    e[axis] = 1.0;
    let up = 1.0 / body.gauge(&e);
    e[axis] = -1.0;
    let down = 1.0 / body.gauge(&e);
    let chord = up + down;
    let lo = anchor[axis] - down + EDGE_MARGIN * chord;
    let hi = anchor[axis] + up - EDGE_MARGIN * chord;
    let point_at = |t: f64| {
        let mut p = anchor.clone();
        p[axis] = t;
        p
    };
    let objective = |t: f64| -> Result<f64> {
        polar_log_volume(body, &point_at(t), opts.angular_samples, stream).map(|v| v.log_value.ln())
    };
    let gs = golden_section(objective, lo, hi, opts.tolerance, 200)?;
    if gs.x - lo < opts.tolerance || hi - gs.x < opts.tolerance {
        return Err(Error::diagnostics(format!(
            "minimiser {} collapsed onto the search interval end [{lo}, {hi}]",
            gs.x
        )));
    }
    let point = point_at(gs.x);
    let check = verify_santalo_fixed_point(body, &point, opts.verify_samples, &stream.substream(u64::MAX))?;
    Ok(SantaloReport {
        point,
        polar_log_volume: LogValue::from_ln(gs.fx),
        iterations: gs.iterations,
        residual: check.residual,
        residual_std_err: check.std_err,
        method: SearchMethod::AxisGoldenSection,
    })
}

// ½ Σ h(φ_k)^{−2} Δφ on an equally spaced angular grid.
fn planar_polar_area(body: &Body, x: &[f64], angles: &[[f64; 2]]) -> Option<f64> {
    let mut total = 0.0;
    for u in angles {
        let h = body.support(u)? - dot(u, x);
        if !(h > 0.0) {
            return None;
        }
        total += 1.0 / (h * h);
    }
    Some(0.5 * total * 2.0 * PI / angles.len() as f64)
}

/// Brute-force minimisation of the polar area over a square grid of
/// candidate points with spacing `step`, for planar bodies.
pub fn santalo_grid_2d(body: &Body, step: f64, angles: usize, opts: &SantaloOptions, stream: &RandomStream) -> Result<SantaloReport> {
    if body.dim() != 2 {
        return Err(Error::unsupported("grid search is planar only"));
    }
    if !body.has_support() {
        return Err(Error::unsupported("grid search needs a support function"));
    }
    if !(step > 0.0) || angles < 16 {
        return Err(Error::domain("need step > 0 and at least 16 angles"));
    }
    let dirs: Vec<[f64; 2]> = (0..angles)
        .map(|k| {
            let phi = 2.0 * PI * (k as f64 + 0.5) / angles as f64;
            [phi.cos(), phi.sin()]
        })
        .collect();
    let a = body.anchor();
    let r = body.out_radius();
    let m = (2.0 * r / step).ceil() as usize;
    let mut best: Option<(f64, [f64; 2])> = None;
    for i in 0..=m {
        for j in 0..=m {
            let p = [a[0] - r + i as f64 * step, a[1] - r + j as f64 * step];
            if !body.is_interior(&p) {
                continue;
            }
            if let Some(area) = planar_polar_area(body, &p, &dirs) {
                if best.is_none_or(|(v, _)| area < v) {
                    best = Some((area, p));
                }
            }
        }
    }
    let (area, p) = best.ok_or_else(|| Error::diagnostics("no grid point inside the body"))?;
    let check = verify_santalo_fixed_point(body, &p, opts.verify_samples, &stream.substream(u64::MAX))?;
    Ok(SantaloReport {
        point: p.to_vec(),
        polar_log_volume: LogValue::from_ln(area.ln()),
        iterations: (m + 1) * (m + 1),
        residual: check.residual,
        residual_std_err: check.std_err,
        method: SearchMethod::Grid2d,
    })
}

/// First coordinate of the centroid of `{‖x‖₂ ≤ 1, x₁ ≥ 0}`:
/// `2 vol_{n−1}(B_2^{n−1}) / ((n+1) vol_n(B_2^n))`.
pub fn half_ball_centroid(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("half-ball centroid needs n >= 2"));
    }
    let lower = lp_ball_log_volume(Exponent::TWO, n - 1)?.ln();
    let full = lp_ball_log_volume(Exponent::TWO, n)?.ln();
    Ok(2.0 * (lower - full).exp() / (n as f64 + 1.0))
}

/// `ln( vol(B_2^n)/(1−λ²)^{(n+1)/2} + vol_{n−1}(B_2^{n−1}) / (nλ(1+λ²)^{n−1}) )`,
/// the ellipsoid-plus-cone bound for the polar of the half ball about `λe₁`.
pub fn half_ball_polar_upper_bound(lambda: f64, n: usize) -> Result<LogValue> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain(format!("lambda = {lambda} must lie in (0, 1)")));
    }
    if n < 2 {
        return Err(Error::domain("needs n >= 2"));
    }
    let nf = n as f64;
    let ellipsoid = lp_ball_log_volume(Exponent::TWO, n)?.ln() - (nf + 1.0) / 2.0 * (1.0 - lambda * lambda).ln();
    let cone = lp_ball_log_volume(Exponent::TWO, n - 1)?.ln()
        - (nf * lambda).ln()
        - (nf - 1.0) * (1.0 + lambda * lambda).ln();
    Ok(LogValue::from_ln(log_sum_exp(&[ellipsoid, cone])))
}

/// One row of the half-ball example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfBallRow {
    pub n: usize,
    /// `g(B)(1)`.
    pub centroid: f64,
    /// `s(B)(1)`.
    pub santalo: f64,
    pub gap: f64,
    /// `√n · |g − s|`.
    pub scaled_gap: f64,
    /// `√n · s(B)(1)`.
    pub scaled_santalo: f64,
    pub residual: f64,
    /// Ellipsoid-plus-cone bound at `λ = 1/√n` over `vol(B_2^n)`.
    pub bound_over_ball: f64,
}

pub fn half_ball_row(n: usize, opts: &SantaloOptions, stream: &RandomStream) -> Result<HalfBallRow> {
    let body = make_half_ball(n)?;
    let report = santalo_axis_search(&body, opts, stream)?;
    let centroid = half_ball_centroid(n)?;
    let s = report.point[0];
    let root = (n as f64).sqrt();
    let bound = half_ball_polar_upper_bound(1.0 / root, n)?.ln() - lp_ball_log_volume(Exponent::TWO, n)?.ln();
    Ok(HalfBallRow {
        n,
        centroid,
        santalo: s,
        gap: (centroid - s).abs(),
        scaled_gap: root * (centroid - s).abs(),
        scaled_santalo: root * s,
        residual: report.residual,
        bound_over_ball: bound.exp(),
    })
}

/// `sqrt(2 ln(√e + (1/e)√(π/2)))`: a constant `γ` with `s(B)(1) ≤ γ/√n`
/// obtained by balancing the ellipsoid-plus-cone bound at `λ = γ/√n`
/// against the ellipsoid lower bound `e^{γ²/2} vol(B_2^n)`.
pub fn half_ball_gamma() -> f64 {
    let e = std::f64::consts::E;
    (2.0 * (e.sqrt() + (PI / 2.0).sqrt() / e).ln()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{make_euclid_ball, make_lp_ball, polar_ellipsoid_log_volume, translate};
    use crate::volmc::{grid_centroid, grid_volume};

    fn stream(id: u64) -> RandomStream {
        RandomStream::new(20240001, id)
    }

    #[test]
    fn ball_is_self_polar() {
        for n in [2usize, 3, 7] {
            let b = make_lp_ball(Exponent::TWO, n, 1.0).unwrap();
            let v = polar_log_volume(&b, &vec![0.0; n], 1000, &stream(0)).unwrap();
            let want = lp_ball_log_volume(Exponent::TWO, n).unwrap().ln();
            assert!((v.log_value.ln() - want).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn shifted_ball_polar_is_the_ellipsoid() {
        for n in [2usize, 5, 40] {
            let mut c = vec![0.0; n];
            c[0] = 0.4;
            let ball = make_euclid_ball(&c, 1.0).unwrap();
            let v = polar_log_volume(&ball, &vec![0.0; n], 1000, &stream(1)).unwrap();
            let want = polar_ellipsoid_log_volume(0.4, n).unwrap().ln();
            assert!((v.log_value.ln() - want).abs() < 1e-10, "n={n}: {} vs {want}", v.log_value.ln());
        }
    }

    #[test]
    fn dual_pairs_for_symmetric_bodies() {
        for n in [2usize, 4, 6] {
            for (p, q) in [(Exponent::ONE, Exponent::Infinity), (Exponent::Infinity, Exponent::ONE)] {
                let b = make_lp_ball(p, n, 1.0).unwrap();
                let v = polar_log_volume(&b, &vec![0.0; n], 400_000, &stream(2)).unwrap();
                let want = lp_ball_log_volume(q, n).unwrap().ln();
                assert_eq!(v.method, Method::MonteCarlo);
                assert!((v.log_value.ln() - want).abs() < 3.0 * v.std_err_log, "n={n} p={p}: {v:?} vs {want}");
            }
        }
    }

    #[test]
    fn half_disk_polar_area_matches_raster() {
        let hb = make_half_ball(2).unwrap();
        let x = hb.anchor().to_vec();
        let v = polar_log_volume(&hb, &x, 1000, &stream(3)).unwrap();
        let polar = hb.polar_about(&x).unwrap();
        let g = grid_volume(&polar, 3000).unwrap();
        assert!((v.value() / g.value() - 1.0).abs() < 0.01, "{} vs {}", v.value(), g.value());
    }

    #[test]
    fn quadrature_matches_monte_carlo_for_half_ball() {
        // shift the half ball so its rotation axis no longer passes through x
        let hb = make_half_ball(5).unwrap();
        let x = [0.3, 0.0, 0.0, 0.0, 0.0];
        let quad = polar_log_volume(&hb, &x, 1000, &stream(4)).unwrap();
        let moved = translate(&hb, &[0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(moved.symmetry().axis, Some(0));
        let acc = sphere_moments(&hb, &x, 5.0, false, 200_000, &stream(5)).unwrap();
        let (lm, rel) = acc.log_mean_b();
        let mc = lp_ball_log_volume(Exponent::TWO, 5).unwrap().ln() + lm;
        assert!((quad.log_value.ln() - mc).abs() < 3.0 * rel + 1e-9, "{} vs {mc} ± {rel}", quad.log_value.ln());
        assert!(quad.std_err_log < 1e-9);
    }

    #[test]
    fn exterior_points_are_rejected() {
        let hb = make_half_ball(2).unwrap();
        assert!(matches!(polar_log_volume(&hb, &[-0.1, 0.0], 100, &stream(6)), Err(Error::Domain(_))));
        assert!(matches!(polar_log_volume(&hb, &[0.0, 0.0, 0.0], 100, &stream(6)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn half_ball_centroid_values() {
        assert!((half_ball_centroid(2).unwrap() - 4.0 / (3.0 * PI)).abs() < 1e-14);
        assert!((half_ball_centroid(3).unwrap() - 0.375).abs() < 1e-14);
        let hb = make_half_ball(3).unwrap();
        let c = grid_centroid(&hb, 300).unwrap();
        assert!((c[0] / 0.375 - 1.0).abs() < 5e-3, "{c:?}");
        let r: Vec<f64> = [64usize, 256, 1024]
            .iter()
            .map(|&n| half_ball_centroid(n).unwrap() * (n as f64).sqrt())
            .collect();
        // √n g → 2/√(2π)
        assert!((r[2] - 2.0 / (2.0 * PI).sqrt()).abs() < 2e-3);
        assert!((r[1] - r[2]).abs() < (r[0] - r[1]).abs());
        assert!(half_ball_centroid(1).is_err());
    }

    // ½ ∫ h(φ)^{−2} dφ with 20 000 angles, independent of the crate's quadrature
    fn brute_polar_area(x: f64) -> f64 {
        let m = 20_000;
        let mut total = 0.0;
        for k in 0..m {
            let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            let (c, s) = (phi.cos(), phi.sin());
            let h = if c >= 0.0 { 1.0 } else { s.abs() } - x * c;
            total += 1.0 / (h * h);
        }
        0.5 * total * 2.0 * PI / m as f64
    }

    #[test]
    fn half_disk_search_matches_brute_force() {
        let hb = make_half_ball(2).unwrap();
        let rep = santalo_axis_search(&hb, &SantaloOptions::default(), &stream(7)).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..1000 {
            let x = i as f64 * 1e-3;
            let a = brute_polar_area(x);
            if a < best.0 {
                best = (a, x);
            }
        }
        let s = rep.point[0];
        assert!((s - best.1).abs() <= 2e-3, "{s} vs {}", best.1);
        assert!(s > 0.0 && s < half_ball_centroid(2).unwrap());
        assert!(rep.residual < RESIDUAL_THRESHOLD);
        let at_centroid = verify_santalo_fixed_point(&hb, &[4.0 / (3.0 * PI), 0.0], 200_000, &stream(8)).unwrap();
        assert!(at_centroid.residual > 5.0 * rep.residual.max(at_centroid.std_err));
    }

    #[test]
    fn axial_centroid_vanishes_at_the_minimiser() {
        for n in [2usize, 3, 10] {
            let hb = make_half_ball(n).unwrap();
            let rep = santalo_axis_search(&hb, &SantaloOptions::default(), &stream(9)).unwrap();
            let c = axial_polar_centroid(&hb, &rep.point).unwrap();
            assert!(c.abs() < 1e-3, "n={n}: {c}");
        }
    }

    #[test]
    fn residual_grows_away_from_the_minimiser() {
        let opts = SantaloOptions::default();
        for n in [2usize, 3] {
            let hb = make_half_ball(n).unwrap();
            let rep = santalo_axis_search(&hb, &opts, &stream(10)).unwrap();
            let at = |t: f64| {
                let mut p = rep.point.clone();
                p[0] = t;
                verify_santalo_fixed_point(&hb, &p, 200_000, &stream(11)).unwrap()
            };
            let s = rep.point[0];
            let r0 = at(s);
            let d = 0.05;
            for t in [s - d, s + d] {
                let r = at(t);
                assert!(r.residual - r0.residual > 3.0 * (r.std_err + r0.std_err), "n={n} t={t}");
            }
            let q0 = axial_polar_centroid(&hb, &rep.point).unwrap().abs();
            let mut p = rep.point.clone();
            p[0] = s + 5.0 * opts.tolerance;
            assert!(axial_polar_centroid(&hb, &p).unwrap().abs() > q0);
        }
    }

    #[test]
    fn symmetric_bodies_have_santalo_point_at_origin() {
        let opts = SantaloOptions { angular_samples: 20_000, verify_samples: 20_000, ..Default::default() };
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinity] {
            let b = make_lp_ball(p, 3, 1.0).unwrap();
            let rep = santalo_axis_search(&b, &opts, &stream(12)).unwrap();
            assert!(rep.point.iter().all(|v| v.abs() <= opts.tolerance), "p={p}: {:?}", rep.point);
            let r = verify_santalo_fixed_point(&b, &[0.0; 3], 10_000, &stream(13)).unwrap();
            assert!(r.residual <= 3.0 * r.std_err + 1e-15);
        }
        let hb = make_half_ball(2).unwrap();
        assert!(santalo_axis_search(&hb, &opts, &stream(0)).is_ok());
        let skew = crate::bodies::SectionBody { n: 2, r2: 1.0, r1: 1.2 }.body();
        assert!(matches!(santalo_axis_search(&skew, &opts, &stream(0)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn grid_search_agrees_with_axis_search() {
        let hb = make_half_ball(2).unwrap();
        let opts = SantaloOptions::default();
        let axis = santalo_axis_search(&hb, &opts, &stream(14)).unwrap();
        let grid = santalo_grid_2d(&hb, 0.01, 2000, &opts, &stream(15)).unwrap();
        assert_eq!(grid.method, SearchMethod::Grid2d);
        assert!((grid.point[0] - axis.point[0]).abs() <= 0.01 && grid.point[1].abs() <= 0.01);
    }

    #[test]
    fn golden_section_on_parabola() {
        let g = golden_section(|x| Ok((x - 0.3).powi(2)), -1.0, 2.0, 1e-8, 200).unwrap();
        assert!((g.x - 0.3).abs() < 1e-8);
        assert!(golden_section(Ok, 1.0, 0.0, 1e-3, 10).is_err());
        assert!(matches!(golden_section(Ok, 0.0, 1.0, 1e-12, 5), Err(Error::Diagnostics(_))));
    }

    #[test]
    fn polar_bound_examples() {
        // the ellipsoid-plus-cone bound dominates the ellipsoid alone
        for n in [2usize, 10, 100] {
            for lambda in [0.1, 0.5, 0.9] {
                let up = half_ball_polar_upper_bound(lambda, n).unwrap().ln();
                let low = polar_ellipsoid_log_volume(lambda, n).unwrap().ln();
                assert!(up >= low);
            }
        }
        let n = 4000;
        let r = half_ball_polar_upper_bound(1.0 / (n as f64).sqrt(), n).unwrap().ln()
            - lp_ball_log_volume(Exponent::TWO, n).unwrap().ln();
        let limit = std::f64::consts::E.sqrt() + (PI / 2.0).sqrt() / std::f64::consts::E;
        assert!(r.exp() <= limit * 1.01, "{}", r.exp());
        let hb = make_half_ball(2).unwrap();
        let v = polar_log_volume(&hb, &[0.3, 0.0], 1000, &stream(16)).unwrap();
        assert!(half_ball_polar_upper_bound(0.3, 2).unwrap().ln() >= v.log_value.ln());
        assert!(half_ball_polar_upper_bound(0.0, 2).is_err());
    }
}
