//! Section-volume profile of the polar hull `M_n°` and the height of its
//! centroid.
//!
//! The section at height `s` is `r2·B_2^n ∩ r1·B_1^n`. Its volume is written
//! either as `vol(r1·B_1^n) · P_{h¹}(R‖h‖₂/‖h‖₁ ≤ r2/r1)` (cross-polytope
//! outside) or as `vol(r2·B_2^n) · P_g(R‖g‖₁/‖g‖₂ ≤ r1/r2)` (ball outside).
//! The factor with the smaller volume carries the larger probability, which
//! is the one estimated. Outside a window around the concentration interval
//! `[s0, s1]` only the analytic envelope `min` of the two factor volumes is
//! used, as an upper bound.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::bodies::{polar_section, HullBodyParams, SectionBody};
use crate::error::{Error, Result};
use crate::quadrature::{trapezoid, GaussLegendre};
use crate::specfun::{log_sum_exp, Exponent, LogValue};
use crate::stream::RandomStream;
use crate::volmc::{intersect_fraction, Fraction, Method, RadialSampling, VolumeEstimate};

/// Below this probability a section falls back to its analytic envelope.
pub const FRACTION_FLOOR: f64 = 1e-3;

/// Largest tolerated ratio of the envelope tail mass to the window mass.
pub const MAX_TAIL_FRACTION: f64 = 0.1;

/// Published separation targets `(1 − 1/e)|s1|` and `(1 − 1/e)|s0|`.
pub const TARGET_LO: f64 = 0.142673;
pub const TARGET_HI: f64 = 0.18383;

pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConstants {
    pub s0: f64,
    pub s1: f64,
    pub a: f64,
    pub b: f64,
}

/// `s0 = (1 − √e)/(b + a√e)` and `s1 = (2 − √(πe))/(a√(πe) + 2b)`.
pub fn window_constants(a: f64, b: f64) -> Result<WindowConstants> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("need a > 0 and b > 0, got a={a}, b={b}")));
    }
    let re = E.sqrt();
    let rpe = (std::f64::consts::PI * E).sqrt();
    Ok(WindowConstants {
        s0: (1.0 - re) / (b + a * re),
        s1: (2.0 - rpe) / (a * rpe + 2.0 * b),
        a,
        b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Factorization {
    /// `vol(r1·B_1^n)` times a probability under Laplace coordinates.
    CrossOuter,
    /// `vol(r2·B_2^n)` times a probability under Gaussian coordinates.
    BallOuter,
    /// Zero-volume section at an apex.
    Apex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionEstimate {
    pub s: f64,
    pub volume: VolumeEstimate,
    pub envelope: LogValue,
    pub factorization: Factorization,
    pub fraction: Option<Fraction>,
}

/// Probability that a uniform point of the chosen outer factor lies in the section.
pub fn section_fraction(
    params: &HullBodyParams,
    s: f64,
    outer: Factorization,
    samples: usize,
    stream: &RandomStream,
) -> Result<Fraction> {
    let sec = polar_section(params, s)?;
    fraction_of(&sec, outer, samples, stream)
}

fn fraction_of(sec: &SectionBody, outer: Factorization, samples: usize, stream: &RandomStream) -> Result<Fraction> {
    if sec.is_degenerate() {
        return Ok(Fraction::from_count(0, samples.max(1) as u64));
    }
    let n = sec.n;
    match outer {
        Factorization::CrossOuter => {
            intersect_fraction(Exponent::ONE, Exponent::TWO, n, sec.r2 / sec.r1, samples, RadialSampling::Plain, stream)
        }
        Factorization::BallOuter => {
            intersect_fraction(Exponent::TWO, Exponent::ONE, n, sec.r1 / sec.r2, samples, RadialSampling::Plain, stream)
        }
        Factorization::Apex => Err(Error::domain("apex has no outer factor")),
    }
}

/// Volume of `M_n°(s)` with the chosen factorisation and diagnostics.
pub fn section_estimate(params: &HullBodyParams, s: f64, samples: usize, stream: &RandomStream) -> Result<SectionEstimate> {
    let sec = polar_section(params, s)?;
    if sec.is_degenerate() {
        return Ok(SectionEstimate {
            s,
            volume: VolumeEstimate::closed_form(LogValue::ZERO),
            envelope: LogValue::ZERO,
            factorization: Factorization::Apex,
            fraction: None,
        });
    }
    let cross = sec.log_volume_l1_factor();
    let ball = sec.log_volume_l2_factor();
    let (outer, outer_vol) = if cross.ln() <= ball.ln() {
        (Factorization::CrossOuter, cross)
    } else {
        (Factorization::BallOuter, ball)
    };
    let fraction = fraction_of(&sec, outer, samples, stream)?;
    let volume = if fraction.value < FRACTION_FLOOR {
        VolumeEstimate { log_value: outer_vol, std_err_log: 0.0, samples: samples as u64, method: Method::AnalyticBound }
    } else {
        let (log_frac, std_err_log) = fraction.log_parts();
        VolumeEstimate {
            log_value: outer_vol * log_frac,
            std_err_log,
            samples: samples as u64,
            method: Method::MonteCarlo,
        }
    };
    Ok(SectionEstimate { s, volume, envelope: outer_vol, factorization: outer, fraction: Some(fraction) })
}

/// `ln vol(M_n°(s))`.
pub fn section_log_volume(params: &HullBodyParams, s: f64, samples: usize, stream: &RandomStream) -> Result<VolumeEstimate> {
    Ok(section_estimate(params, s, samples, stream)?.volume)
}

/// Section volumes on a grid of heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionProfile {
    pub params: HullBodyParams,
    pub s_grid: Vec<f64>,
    pub log_vols: Vec<VolumeEstimate>,
    pub envelope: Vec<LogValue>,
    pub factorization: Vec<Factorization>,
}

/// Estimates every section on `s_grid`; grid point `i` draws from substream `i`.
pub fn section_profile(
    params: &HullBodyParams,
    s_grid: &[f64],
    samples: usize,
    stream: &RandomStream,
    progress: Option<Progress>,
) -> Result<SectionProfile> {
    let mut log_vols = Vec::with_capacity(s_grid.len());
    let mut envelope = Vec::with_capacity(s_grid.len());
    let mut factorization = Vec::with_capacity(s_grid.len());
    for (i, &s) in s_grid.iter().enumerate() {
        let est = section_estimate(params, s, samples, &stream.substream(i as u64))?;
        log_vols.push(est.volume);
        envelope.push(est.envelope);
        factorization.push(est.factorization);
        if let Some(report) = progress {
            report(i + 1, s_grid.len());
        }
    }
    Ok(SectionProfile { params: *params, s_grid: s_grid.to_vec(), log_vols, envelope, factorization })
}

/// `points` equally spaced heights on `[s0 − δ, s1 + δ]` clipped to `[−1/a, 1/b]`.
pub fn window_grid(params: &HullBodyParams, delta: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::domain("window grid needs at least two points"));
    }
    let wc = window_constants(params.a, params.b)?;
    let lo = (wc.s0 - delta).max(params.s_min());
    let hi = (wc.s1 + delta).min(params.s_max());
    if !(hi > lo) {
        return Err(Error::domain(format!("empty window [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { hi } else { lo + i as f64 * step }).collect())
}

/// Centroid height of a sampled profile by the trapezoid rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileMoments {
    pub height: f64,
    /// Propagated Monte-Carlo standard error of `height`.
    pub mc_err: f64,
    /// `|height − height on every other grid point|`.
    pub quadrature_err: f64,
    /// `ln ∫ vol` over the grid span.
    pub log_mass: f64,
    /// Relative standard error of the mass.
    pub mass_rel_err: f64,
}

pub fn profile_moments(s_grid: &[f64], log_vols: &[VolumeEstimate]) -> Result<ProfileMoments> {
    if s_grid.len() < 3 || s_grid.len() != log_vols.len() {
        return Err(Error::domain("profile needs at least three matching points"));
    }
    let max = log_vols.iter().map(|v| v.log_value.ln()).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::diagnostics("every section in the window has zero volume"));
    }
    let y: Vec<f64> = log_vols.iter().map(|v| (v.log_value.ln() - max).exp()).collect();
    let sy: Vec<f64> = s_grid.iter().zip(&y).map(|(s, v)| s * v).collect();
    let m0 = trapezoid(s_grid, &y);
    let m1 = trapezoid(s_grid, &sy);
    let height = m1 / m0;

    let m = s_grid.len();
    let mut var = 0.0;
    let mut mass_var = 0.0;
    for i in 0..m {
        let left = if i > 0 { s_grid[i] - s_grid[i - 1] } else { 0.0 };
        let right = if i + 1 < m { s_grid[i + 1] - s_grid[i] } else { 0.0 };
        let w = 0.5 * (left + right);
        let se = y[i] * log_vols[i].std_err_log;
        let se = if se.is_finite() { se } else { 0.0 };
        var += (w * (s_grid[i] - height) / m0 * se).powi(2);
        mass_var += (w * se).powi(2);
    }

    let idx: Vec<usize> = (0..m).filter(|i| i % 2 == 0 || i + 1 == m).collect();
    let hs: Vec<f64> = idx.iter().map(|&i| s_grid[i]).collect();
    let hy: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let hsy: Vec<f64> = idx.iter().map(|&i| sy[i]).collect();
    let coarse = trapezoid(&hs, &hsy) / trapezoid(&hs, &hy);

    Ok(ProfileMoments {
        height,
        mc_err: var.sqrt(),
        quadrature_err: (height - coarse).abs(),
        log_mass: max + m0.ln(),
        mass_rel_err: mass_var.sqrt() / m0,
    })
}

const TAIL_NODES: usize = 32;
const TAIL_PANELS: usize = 64;

/// Envelope upper bounds on `∫ vol` and `∫ |s| vol` over `[lo, hi]`, in log space.
pub fn envelope_tail(params: &HullBodyParams, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let lo = lo.max(params.s_min());
    let hi = hi.min(params.s_max());
    if !(hi > lo) {
        return Ok((f64::NEG_INFINITY, f64::NEG_INFINITY));
    }
    let rule = GaussLegendre::new(TAIL_NODES);
    let env = |s: f64| -> f64 {
        polar_section(params, s).map(|sec| sec.log_envelope().ln()).unwrap_or(f64::NEG_INFINITY)
    };
    let mass = rule.log_integrate(env, lo, hi, TAIL_PANELS);
    let moment = rule.log_integrate(|s| env(s) + s.abs().ln(), lo, hi, TAIL_PANELS);
    Ok((mass, moment))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentroidOptions {
    pub grid_points: usize,
    pub samples: usize,
    /// Padding of the window beyond `[s0, s1]`.
    pub delta: f64,
}

impl Default for CentroidOptions {
    fn default() -> Self {
        CentroidOptions { grid_points: 64, samples: 100_000, delta: 0.05 }
    }
}

/// `g(M_n°)(n+1)` with its error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarCentroid {
    pub height: f64,
    /// `mc_err + quadrature_err + tail_bias`.
    pub err: f64,
    pub mc_err: f64,
    pub quadrature_err: f64,
    /// Largest shift of the height the envelope-bounded tails can cause.
    pub tail_bias: f64,
    pub window: [f64; 2],
    pub log_window_mass: f64,
    /// Envelope bounds on the left and right tail masses, in log space.
    pub log_tail_mass: [f64; 2],
    pub log_tail_moment: [f64; 2],
    /// Envelope tail mass over window mass.
    pub tail_fraction: f64,
    pub profile: SectionProfile,
}

pub fn polar_centroid_height(
    params: &HullBodyParams,
    opts: &CentroidOptions,
    stream: &RandomStream,
    progress: Option<Progress>,
) -> Result<PolarCentroid> {
    if opts.grid_points < 16 {
        return Err(Error::domain(format!("grid_points = {} below 16", opts.grid_points)));
    }
    let grid = window_grid(params, opts.delta, opts.grid_points)?;
    let profile = section_profile(params, &grid, opts.samples, stream, progress)?;
    centroid_from_profile(profile)
}

/// Completes a window profile with envelope tails into a centroid estimate.
pub fn centroid_from_profile(profile: SectionProfile) -> Result<PolarCentroid> {
    let params = profile.params;
    let lo = profile.s_grid[0];
    let hi = *profile.s_grid.last().expect("non-empty grid");
    let mom = profile_moments(&profile.s_grid, &profile.log_vols)?;
    let (lm, lmom) = envelope_tail(&params, params.s_min(), lo)?;
    let (rm, rmom) = envelope_tail(&params, hi, params.s_max())?;
    let tail_fraction = (lm - mom.log_mass).exp() + (rm - mom.log_mass).exp();
    if tail_fraction > MAX_TAIL_FRACTION {
        return Err(Error::diagnostics(format!(
            "tail mass bound is {:.3} of the window mass (limit {MAX_TAIL_FRACTION}); the dimension is too small for concentration",
            tail_fraction
        )));
    }
    // with tails J0 ≤ T0 and |J1| ≤ T1: |(I1+J1)/(I0+J0) − I1/I0| ≤ (T1 + |h| T0)/I0
    let tail_moment = (log_sum_exp(&[lmom, rmom]) - mom.log_mass).exp();
    let tail_bias = tail_moment + mom.height.abs() * tail_fraction;
    Ok(PolarCentroid {
        height: mom.height,
        err: mom.mc_err + mom.quadrature_err + tail_bias,
        mc_err: mom.mc_err,
        quadrature_err: mom.quadrature_err,
        tail_bias,
        window: [lo, hi],
        log_window_mass: mom.log_mass,
        log_tail_mass: [lm, rm],
        log_tail_moment: [lmom, rmom],
        tail_fraction,
        profile,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub params: HullBodyParams,
    pub constants: WindowConstants,
    pub polar_centroid_height: f64,
    pub err: f64,
    /// `|g* − s*|`: the Santaló point of the recentred hull is the origin.
    pub separation: f64,
    /// Width `1/a + 1/b` of `M_n°` along the axis.
    pub polar_chord: f64,
    /// Width `a + b` of `M_n` along the axis.
    pub hull_height: f64,
    pub ratio_over_polar_chord: f64,
    pub ratio_over_hull_height: f64,
    pub target_lo: f64,
    pub target_hi: f64,
    pub normalization_note: String,
}

pub const NORMALIZATION_NOTE: &str = "the target interval equals (1-1/e)*[|s1|, |s0|], which is the separation divided by the hull height a+b; dividing by the polar chord 1/a+1/b gives smaller values";

pub fn separation_report(params: &HullBodyParams, centroid: &PolarCentroid) -> Result<SeparationReport> {
    let constants = window_constants(params.a, params.b)?;
    let separation = centroid.height.abs();
    let polar_chord = 1.0 / params.a + 1.0 / params.b;
    let hull_height = params.a + params.b;
    Ok(SeparationReport {
        params: *params,
        constants,
        polar_centroid_height: centroid.height,
        err: centroid.err,
        separation,
        polar_chord,
        hull_height,
        ratio_over_polar_chord: separation / polar_chord,
        ratio_over_hull_height: separation / hull_height,
        target_lo: TARGET_LO,
        target_hi: TARGET_HI,
        normalization_note: NORMALIZATION_NOTE.to_string(),
    })
}

/// Numerical check of the concentration of `vol(M_n°(s))` in
/// `[s0 − γ, s1 + γ]`:
/// (i) total mass ≤ (1 + γ) window mass;
/// (ii) each `|s|`-weighted tail ≤ γ total mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub gamma: f64,
    pub window: [f64; 2],
    pub log_window_mass: f64,
    pub window_rel_err: f64,
    pub tail_fraction: f64,
    pub left_moment_fraction: f64,
    pub right_moment_fraction: f64,
    pub total_within: bool,
    pub left_tail_small: bool,
    pub right_tail_small: bool,
}

impl ConcentrationReport {
    pub fn holds(&self) -> bool {
        self.total_within && self.left_tail_small && self.right_tail_small
    }
}

/// Uses a profile whose grid spans exactly `[s0 − γ, s1 + γ]` (clipped).
pub fn concentration_from_profile(profile: &SectionProfile, gamma: f64) -> Result<ConcentrationReport> {
    let params = profile.params;
    let lo = profile.s_grid[0];
    let hi = *profile.s_grid.last().expect("non-empty grid");
    let mom = profile_moments(&profile.s_grid, &profile.log_vols)?;
    // conservative window mass: three standard errors below the estimate
    let shrink = (1.0 - 3.0 * mom.mass_rel_err).max(1e-12);
    let log_w = mom.log_mass + shrink.ln();
    let (lm, lmom) = envelope_tail(&params, params.s_min(), lo)?;
    let (rm, rmom) = envelope_tail(&params, hi, params.s_max())?;
    let tail_fraction = (lm - log_w).exp() + (rm - log_w).exp();
    let left = (lmom - log_w).exp();
    let right = (rmom - log_w).exp();
    Ok(ConcentrationReport {
        n: params.n,
        gamma,
        window: [lo, hi],
        log_window_mass: mom.log_mass,
        window_rel_err: mom.mass_rel_err,
        tail_fraction,
        left_moment_fraction: left,
        right_moment_fraction: right,
        total_within: tail_fraction <= gamma,
        left_tail_small: left <= gamma,
        right_tail_small: right <= gamma,
    })
}

pub fn concentration_check(
    params: &HullBodyParams,
    gamma: f64,
    grid_points: usize,
    samples: usize,
    stream: &RandomStream,
    progress: Option<Progress>,
) -> Result<ConcentrationReport> {
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("gamma = {gamma} must be positive")));
    }
    let grid = window_grid(params, gamma, grid_points)?;
    let profile = section_profile(params, &grid, samples, stream, progress)?;
    concentration_from_profile(&profile, gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub s: f64,
    pub outer: Factorization,
    pub fraction: Fraction,
    /// `fraction ≥ 1/2 − 3σ`.
    pub pass: bool,
}

/// Section fractions at `points` heights beyond the window on each side:
/// above `s1 + offset` against the cross-polytope factor and below
/// `s0 − offset` against the ball factor. Both should be at least one half.
pub fn band_check(
    params: &HullBodyParams,
    offset: f64,
    points: usize,
    samples: usize,
    stream: &RandomStream,
) -> Result<(Vec<BandPoint>, Vec<BandPoint>)> {
    let wc = window_constants(params.a, params.b)?;
    let upper_start = wc.s1 + offset;
    let lower_start = wc.s0 - offset;
    let mut upper = Vec::with_capacity(points);
    let mut lower = Vec::with_capacity(points);
    for k in 0..points {
        let t = k as f64 / points as f64;
        let su = upper_start + t * (params.s_max() - upper_start);
        let sl = lower_start + t * (params.s_min() - lower_start);
        for (s, outer, out, id) in [
            (su, Factorization::CrossOuter, &mut upper, 2 * k),
            (sl, Factorization::BallOuter, &mut lower, 2 * k + 1),
        ] {
            let fraction = section_fraction(params, s, outer, samples, &stream.substream(id as u64))?;
            out.push(BandPoint { s, outer, fraction, pass: fraction.value >= 0.5 - 3.0 * fraction.std_err });
        }
    }
    Ok((upper, lower))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::SectionBody;
    use crate::volmc::grid_volume;

    fn standard(n: usize) -> HullBodyParams {
        HullBodyParams::standard(n).unwrap()
    }

    #[test]
    fn constants_match_published_values() {
        let wc = window_constants(1.0, 1.0 / (E - 1.0)).unwrap();
        assert!((wc.s0 + 0.290815).abs() < 5e-7, "{}", wc.s0);
        assert!((wc.s1 + 0.225705).abs() < 5e-7, "{}", wc.s1);
        assert!(((1.0 - 1.0 / E) * wc.s1.abs() - TARGET_LO).abs() < 5e-7);
        assert!(((1.0 - 1.0 / E) * wc.s0.abs() - TARGET_HI).abs() < 5e-6);
        assert!(wc.s0 < wc.s1 && wc.s1 < 0.0);
    }

    #[test]
    fn window_always_ordered() {
        for a in [0.01, 0.3, 1.0, 4.0, 100.0] {
            for b in [0.01, 0.5, 1.0, 7.0, 100.0] {
                let wc = window_constants(a, b).unwrap();
                assert!(wc.s0 < wc.s1, "a={a} b={b}");
            }
        }
        assert!(window_constants(0.0, 1.0).is_err());
    }

    #[test]
    fn apex_sections_vanish() {
        let p = standard(20);
        let stream = RandomStream::new(1, 0);
        for s in [p.s_min(), p.s_max()] {
            let v = section_log_volume(&p, s, 100, &stream).unwrap();
            assert!(v.log_value.is_zero());
            assert_eq!(v.method, Method::ClosedForm);
        }
        assert!(section_log_volume(&p, 2.0, 100, &stream).is_err());
    }

    #[test]
    fn planar_sections_match_grid() {
        let p = standard(2);
        let stream = RandomStream::new(2, 0);
        for s in [-0.8, -0.3, 0.0, 0.5, 1.2] {
            let est = section_estimate(&p, s, 100_000, &stream).unwrap();
            let sec = polar_section(&p, s).unwrap();
            let grid = grid_volume(&sec.body(), 3000).unwrap();
            let se = (est.volume.std_err().powi(2) + grid.std_err().powi(2)).sqrt();
            assert!(
                (est.volume.value() - grid.value()).abs() <= 3.0 * se,
                "s={s}: {:?} vs {:?}",
                est,
                grid
            );
            assert!(est.volume.log_value.ln() <= est.envelope.ln() + 1e-12);
        }
    }

    #[test]
    fn both_factorizations_agree() {
        let p = standard(12);
        let stream = RandomStream::new(3, 0);
        for s in [-0.4, -0.25, -0.1] {
            let sec = polar_section(&p, s).unwrap();
            let fa = fraction_of(&sec, Factorization::CrossOuter, 200_000, &stream).unwrap();
            let fb = fraction_of(&sec, Factorization::BallOuter, 200_000, &stream.substream(1)).unwrap();
            let va = sec.log_volume_l1_factor().ln() + fa.value.ln();
            let vb = sec.log_volume_l2_factor().ln() + fb.value.ln();
            let se = (fa.std_err / fa.value).hypot(fb.std_err / fb.value);
            assert!((va - vb).abs() < 3.5 * se, "s={s}: {va} vs {vb} ± {se}");
        }
    }

    #[test]
    fn symmetric_profile_has_zero_height() {
        // equal faces: sections (1 − |s|)^n K°, symmetric about 0
        let s: Vec<f64> = (0..41).map(|i| -1.0 + 0.05 * i as f64).collect();
        let vols: Vec<VolumeEstimate> = s
            .iter()
            .map(|x| VolumeEstimate::closed_form(LogValue::from_ln(30.0 * (1.0 - x.abs()).max(1e-300).ln())))
            .collect();
        let m = profile_moments(&s, &vols).unwrap();
        assert!(m.height.abs() < 1e-12);
        assert_eq!(m.mc_err, 0.0);
    }

    #[test]
    fn profile_moments_of_known_density() {
        // vol ∝ e^{−(s−0.3)²/0.02} on a wide grid: mean 0.3
        let s: Vec<f64> = (0..401).map(|i| -1.0 + 0.005 * i as f64).collect();
        let vols: Vec<VolumeEstimate> = s
            .iter()
            .map(|x| VolumeEstimate::closed_form(LogValue::from_ln(-(x - 0.3).powi(2) / 0.02 + 500.0)))
            .collect();
        let m = profile_moments(&s, &vols).unwrap();
        assert!((m.height - 0.3).abs() < 1e-9);
        assert!(m.quadrature_err < 1e-6);
        let mass = (std::f64::consts::PI * 0.02).sqrt();
        assert!((m.log_mass - 500.0 - mass.ln()).abs() < 1e-9);
    }

    #[test]
    fn envelope_tail_matches_direct_quadrature() {
        let p = standard(30);
        let (lm, _) = envelope_tail(&p, -1.0, -0.5).unwrap();
        // composite Simpson on the linear envelope, scaled out of overflow
        let m = 20_000;
        let h = 0.5 / m as f64;
        let f = |s: f64| polar_section(&p, s).unwrap().log_envelope().ln();
        let shift = f(-0.5);
        let mut acc = 0.0;
        for i in 0..=m {
            let x = -1.0 + i as f64 * h;
            let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * (f(x) - shift).exp();
        }
        let direct = shift + (acc * h / 3.0).ln();
        assert!((lm - direct).abs() < 1e-6, "{lm} vs {direct}");
    }

    #[test]
    fn small_dimension_fails_concentration() {
        let p = standard(3);
        let opts = CentroidOptions { grid_points: 16, samples: 2000, delta: 0.05 };
        let r = polar_centroid_height(&p, &opts, &RandomStream::new(4, 0), None);
        assert!(matches!(r, Err(Error::Diagnostics(_))));
        let opts = CentroidOptions { grid_points: 8, ..opts };
        assert!(matches!(polar_centroid_height(&p, &opts, &RandomStream::new(4, 0), None), Err(Error::Domain(_))));
    }

    #[test]
    fn section_body_envelope_holds_for_planar_grid() {
        let sec = SectionBody { n: 2, r2: 0.7, r1: 1.3 };
        let g = grid_volume(&sec.body(), 2000).unwrap();
        assert!(g.log_value.ln() <= sec.log_envelope().ln() + 3.0 * g.std_err_log);
    }
}
