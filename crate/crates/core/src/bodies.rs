//! Star bodies described by their Minkowski functional (gauge), an optional
//! support function and known inner/outer radii, together with the
//! constructors used throughout the crate: ℓp balls, the half ball, the polar
//! ellipsoid of a shifted ball, sections of the polar hull body, translates,
//! dilates, intersections and polars.
//!
//! Gauges of bodies that are not centred at the origin are taken about an
//! explicit interior *anchor*: `gauge(y) = inf { λ > 0 : anchor + y/λ ∈ K }`.
//! For origin-anchored bodies this is the usual `‖y‖_K`. Support functions
//! are always those of the body itself in absolute coordinates.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{lp_ball_log_volume, Exponent, LogValue};

/// Default interior anchor of the half ball, on the symmetry axis.
pub const HALF_BALL_ANCHOR: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Symmetry {
    /// `x ∈ K ⇒ −x ∈ K`.
    pub origin: bool,
    /// Invariant under rotations fixing this coordinate axis.
    pub axis: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
enum Region {
    /// `radius · B_p^n`.
    LpBall { p: Exponent, radius: f64 },
    /// Euclidean ball with arbitrary centre.
    Ball { center: Vec<f64>, radius: f64 },
    /// `{ ‖x‖₂ ≤ 1, x₁ ≥ 0 }`.
    HalfBall,
    /// Axis-aligned ellipsoid `Σ ((x_i − c_i)/a_i)² ≤ 1`.
    Ellipsoid { center: Vec<f64>, semi_axes: Vec<f64> },
    /// `r2·B_2^n ∩ r1·B_1^n`.
    Section { r2: f64, r1: f64 },
    /// `t · inner`.
    Scaled { inner: Box<Region>, t: f64 },
    /// `inner − shift`.
    Shifted { inner: Box<Region>, shift: Vec<f64> },
    Intersection(Vec<Region>),
    /// `(inner − about)°`.
    Polar { inner: Box<Region>, about: Vec<f64> },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

// Gauge about `c` of the Euclidean ball `‖x − center‖ ≤ r`, with d = c − center.
// The larger root μ* of ‖d + μy‖² = r² gives gauge 1/μ* = (B + √(B² − AC)) / (−C).
fn ball_gauge(d: &[f64], y: &[f64], radius: f64) -> f64 {
    let a = dot(y, y);
    if a == 0.0 {
        return 0.0;
    }
    let b = dot(d, y);
    let c = dot(d, d) - radius * radius;
    if c >= 0.0 {
        // anchor on or outside the sphere
        return f64::INFINITY;
    }
    (b + (b * b - a * c).max(0.0).sqrt()) / (-c)
}

impl Region {
    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::LpBall { p, radius } => p.norm(x) <= *radius,
            Region::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() <= radius * radius
            }
            Region::HalfBall => x[0] >= 0.0 && dot(x, x) <= 1.0,
            Region::Ellipsoid { center, semi_axes } => {
                x.iter()
                    .zip(center)
                    .zip(semi_axes)
                    .map(|((v, c), a)| ((v - c) / a).powi(2))
                    .sum::<f64>()
                    <= 1.0
            }
            Region::Section { r2, r1 } => {
                norm2(x) <= *r2 && x.iter().map(|v| v.abs()).sum::<f64>() <= *r1
            }
            Region::Scaled { inner, t } => {
                let y: Vec<f64> = x.iter().map(|v| v / t).collect();
                inner.contains(&y)
            }
            Region::Shifted { inner, shift } => {
                let y: Vec<f64> = x.iter().zip(shift).map(|(v, s)| v + s).collect();
                inner.contains(&y)
            }
            Region::Intersection(parts) => parts.iter().all(|r| r.contains(x)),
            Region::Polar { inner, about } => match inner.support(x) {
                Some(h) => h - dot(x, about) <= 1.0,
                None => false,
            },
        }
    }

    /// `inf { λ > 0 : c + y/λ ∈ K }` for `c` interior.
    fn gauge_about(&self, c: &[f64], y: &[f64]) -> f64 {
        let at_origin = c.iter().all(|v| *v == 0.0);
        match self {
            Region::LpBall { p, radius } if at_origin => p.norm(y) / radius,
            Region::Ball { center, radius } => {
                let d: Vec<f64> = c.iter().zip(center).map(|(a, b)| a - b).collect();
                ball_gauge(&d, y, *radius)
            }
            Region::HalfBall => {
                let sphere = ball_gauge(c, y, 1.0);
                // flat face {x₁ ≥ 0} as ⟨−e₁, x⟩ ≤ 0
                let face = if c[0] > 0.0 { (-y[0]).max(0.0) / c[0] } else { f64::INFINITY };
                sphere.max(face)
            }
            Region::Ellipsoid { center, semi_axes } => {
                let d: Vec<f64> = c
                    .iter()
                    .zip(center)
                    .zip(semi_axes)
                    .map(|((v, m), a)| (v - m) / a)
                    .collect();
                let z: Vec<f64> = y.iter().zip(semi_axes).map(|(v, a)| v / a).collect();
                ball_gauge(&d, &z, 1.0)
            }
            Region::Section { r2, r1 } if at_origin => {
                let n2 = norm2(y);
                let n1: f64 = y.iter().map(|v| v.abs()).sum();
                if n2 == 0.0 {
                    0.0
                } else if *r2 == 0.0 || *r1 == 0.0 {
                    f64::INFINITY
                } else {
                    (n2 / r2).max(n1 / r1)
                }
            }
            Region::Scaled { inner, t } => {
                let cs: Vec<f64> = c.iter().map(|v| v / t).collect();
                let ys: Vec<f64> = y.iter().map(|v| v / t).collect();
                inner.gauge_about(&cs, &ys)
            }
            Region::Shifted { inner, shift } => {
                let cs: Vec<f64> = c.iter().zip(shift).map(|(v, s)| v + s).collect();
                inner.gauge_about(&cs, y)
            }
            Region::Intersection(parts) => parts
                .iter()
                .map(|r| r.gauge_about(c, y))
                .fold(0.0, f64::max),
            Region::Polar { inner, about } if at_origin => match inner.support(y) {
                Some(h) => (h - dot(y, about)).max(0.0),
                None => f64::NAN,
            },
            _ => self.gauge_by_bisection(c, y),
        }
    }

    // Convexity makes {μ ≥ 0 : c + μy ∈ K} an interval [0, μ*].
    fn gauge_by_bisection(&self, c: &[f64], y: &[f64]) -> f64 {
        if y.iter().all(|v| *v == 0.0) {
            return 0.0;
        }
        let point = |mu: f64| -> Vec<f64> { c.iter().zip(y).map(|(a, b)| a + mu * b).collect() };
        let mut lo = 0.0;
        let mut hi = 1.0 / norm2(y);
        let mut doublings = 0;
        while self.contains(&point(hi)) {
            lo = hi;
            hi *= 2.0;
            doublings += 1;
            if doublings > 1100 {
                return 0.0;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.contains(&point(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (0.5 * (lo + hi))
        }
    }

    fn support(&self, u: &[f64]) -> Option<f64> {
        match self {
            Region::LpBall { p, radius } => Some(radius * p.conjugate().norm(u)),
            Region::Ball { center, radius } => Some(dot(u, center) + radius * norm2(u)),
            Region::HalfBall => Some(if u[0] >= 0.0 { norm2(u) } else { norm2(&u[1..]) }),
            Region::Ellipsoid { center, semi_axes } => Some(
                dot(u, center)
                    + u.iter()
                        .zip(semi_axes)
                        .map(|(v, a)| (v * a).powi(2))
                        .sum::<f64>()
                        .sqrt(),
            ),
            Region::Section { .. } | Region::Intersection(_) => None,
            Region::Scaled { inner, t } => inner.support(u).map(|h| t * h),
            Region::Shifted { inner, shift } => inner.support(u).map(|h| h - dot(u, shift)),
            Region::Polar { inner, about } => Some(inner.gauge_about(about, u)),
        }
    }

    fn has_support(&self) -> bool {
        match self {
            Region::Section { .. } | Region::Intersection(_) => false,
            Region::Scaled { inner, .. } | Region::Shifted { inner, .. } => inner.has_support(),
            _ => true,
        }
    }
}

/// A convex body with an interior anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    dim: usize,
    region: Region,
    anchor: Vec<f64>,
    out_radius: f64,
    in_radius: f64,
    symmetry: Symmetry,
}

impl Body {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// Smallest known `R` with `K ⊆ anchor + R·B_2`.
    pub fn out_radius(&self) -> f64 {
        self.out_radius
    }

    /// Largest known `r` with `anchor + r·B_2 ⊆ K`; zero for degenerate bodies.
    pub fn in_radius(&self) -> f64 {
        self.in_radius
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Minkowski functional about the anchor.
    pub fn gauge(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.dim);
        self.region.gauge_about(&self.anchor, y)
    }

    /// Minkowski functional about an arbitrary interior point `c`.
    pub fn gauge_about(&self, c: &[f64], y: &[f64]) -> f64 {
        self.region.gauge_about(c, y)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.region.contains(x)
    }

    pub fn has_support(&self) -> bool {
        self.region.has_support()
    }

    /// `h_K(u) = max_{x∈K} ⟨u, x⟩` in absolute coordinates, if available.
    pub fn support(&self, u: &[f64]) -> Option<f64> {
        debug_assert_eq!(u.len(), self.dim);
        self.region.support(u)
    }

    /// `h_{K−x}(u) = h_K(u) − ⟨u, x⟩`.
    pub fn support_about(&self, x: &[f64], u: &[f64]) -> Option<f64> {
        self.region.support(u).map(|h| h - dot(u, x))
    }

    /// Whether `x` lies in the interior, judged by the gauge about the anchor.
    pub fn is_interior(&self, x: &[f64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let rel: Vec<f64> = x.iter().zip(&self.anchor).map(|(a, b)| a - b).collect();
        self.gauge(&rel) < 1.0
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: len });
        }
        Ok(())
    }

    // (out, in) radii about an interior point x instead of the anchor.
    fn radii_about(&self, x: &[f64]) -> (f64, f64) {
        let rel: Vec<f64> = x.iter().zip(&self.anchor).map(|(a, b)| a - b).collect();
        let g = self.gauge(&rel);
        let out = self.out_radius + norm2(&rel);
        let inr = (self.in_radius * (1.0 - g)).max(0.0);
        (out, inr)
    }

    /// The polar `(K − x)°`, anchored at the origin.
    pub fn polar_about(&self, x: &[f64]) -> Result<Body> {
        self.check_dim(x.len())?;
        if !self.has_support() {
            return Err(Error::unsupported("polar needs a support function"));
        }
        if !self.is_interior(x) {
            return Err(Error::domain("polar centre must be an interior point"));
        }
        let (out, inr) = self.radii_about(x);
        let symmetry = Symmetry {
            origin: self.symmetry.origin && x.iter().all(|v| *v == 0.0),
            axis: self.symmetry.axis.filter(|&i| on_axis(x, i)),
        };
        Ok(Body {
            dim: self.dim,
            region: Region::Polar { inner: Box::new(self.region.clone()), about: x.to_vec() },
            anchor: vec![0.0; self.dim],
            out_radius: if inr > 0.0 { 1.0 / inr } else { f64::INFINITY },
            in_radius: 1.0 / out,
            symmetry,
        })
    }
}

fn on_axis(x: &[f64], axis: usize) -> bool {
    x.iter().enumerate().all(|(i, v)| i == axis || *v == 0.0)
}

/// `scale · B_p^n`. Radii are exact: `n^{max(0, 1/2−1/p)}` and `n^{min(0, 1/2−1/p)}` times the scale.
pub fn make_lp_ball(p: Exponent, n: usize, scale: f64) -> Result<Body> {
    let p = Exponent::new(p.as_f64())?;
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(format!("scale must be positive, got {scale}")));
    }
    let e = 0.5 - p.reciprocal();
    let nf = n as f64;
    Ok(Body {
        dim: n,
        region: Region::LpBall { p, radius: scale },
        anchor: vec![0.0; n],
        out_radius: scale * nf.powf(e.max(0.0)),
        in_radius: scale * nf.powf(e.min(0.0)),
        symmetry: Symmetry { origin: true, axis: (p == Exponent::TWO).then_some(0) },
    })
}

/// Euclidean ball `B_2^n(center, radius)`. The anchor is the centre.
pub fn make_euclid_ball(center: &[f64], radius: f64) -> Result<Body> {
    if center.is_empty() {
        return Err(Error::domain("dimension must be positive"));
    }
    if !(radius > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }
    let n = center.len();
    let axis = if center[1..].iter().all(|v| *v == 0.0) { Some(0) } else { None };
    Ok(Body {
        dim: n,
        region: Region::Ball { center: center.to_vec(), radius },
        anchor: center.to_vec(),
        out_radius: radius,
        in_radius: radius,
        symmetry: Symmetry { origin: center.iter().all(|v| *v == 0.0), axis },
    })
}

/// The half ball `{ ‖x‖₂ ≤ 1, x₁ ≥ 0 }`, anchored at `(1/4, 0, …, 0)`.
pub fn make_half_ball(n: usize) -> Result<Body> {
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let mut anchor = vec![0.0; n];
    anchor[0] = HALF_BALL_ANCHOR;
    let c = HALF_BALL_ANCHOR;
    Ok(Body {
        dim: n,
        region: Region::HalfBall,
        anchor,
        // farthest points sit on the rim x₁ = 0
        out_radius: (1.0 + c * c).sqrt(),
        in_radius: c.min(1.0 - c),
        symmetry: Symmetry { origin: false, axis: Some(0) },
    })
}

/// Polar of the unit ball centred at `λe₁`:
/// `(1−λ²)²(x₁ + λ/(1−λ²))² + (1−λ²)(x₂² + … + x_n²) ≤ 1`.
pub fn shifted_ball_polar_ellipsoid(lambda: f64, n: usize) -> Result<Body> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::domain(format!("lambda = {lambda} must lie in [0, 1)")));
    }
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let k = 1.0 - lambda * lambda;
    let mut center = vec![0.0; n];
    center[0] = -lambda / k;
    let mut semi_axes = vec![1.0 / k.sqrt(); n];
    semi_axes[0] = 1.0 / k;
    Ok(Body {
        dim: n,
        region: Region::Ellipsoid { center, semi_axes },
        anchor: vec![0.0; n],
        out_radius: 1.0 / (1.0 - lambda),
        in_radius: 1.0 / (1.0 + lambda),
        symmetry: Symmetry { origin: lambda == 0.0, axis: Some(0) },
    })
}

/// `ln vol` of [`shifted_ball_polar_ellipsoid`]: `−((n+1)/2) ln(1−λ²) + ln vol(B_2^n)`.
pub fn polar_ellipsoid_log_volume(lambda: f64, n: usize) -> Result<LogValue> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::domain(format!("lambda = {lambda} must lie in [0, 1)")));
    }
    let ball = lp_ball_log_volume(Exponent::TWO, n)?;
    Ok(LogValue::from_ln(-((n as f64 + 1.0) / 2.0) * (1.0 - lambda * lambda).ln() + ball.ln()))
}

/// The body `K − x0`. When `x0` is interior the result is anchored at the
/// origin; otherwise the anchor moves with the body.
pub fn translate(body: &Body, x0: &[f64]) -> Result<Body> {
    body.check_dim(x0.len())?;
    let region = Region::Shifted { inner: Box::new(body.region.clone()), shift: x0.to_vec() };
    let symmetry = Symmetry {
        origin: body.symmetry.origin && x0.iter().all(|v| *v == 0.0),
        axis: body.symmetry.axis.filter(|&i| on_axis(x0, i)),
    };
    if body.is_interior(x0) {
        let (out, inr) = body.radii_about(x0);
        Ok(Body { dim: body.dim, region, anchor: vec![0.0; body.dim], out_radius: out, in_radius: inr, symmetry })
    } else {
        let anchor = body.anchor.iter().zip(x0).map(|(a, b)| a - b).collect();
        Ok(Body { dim: body.dim, region, anchor, out_radius: body.out_radius, in_radius: body.in_radius, symmetry })
    }
}

/// `t · K`.
pub fn scale(body: &Body, t: f64) -> Result<Body> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("scale factor must be positive, got {t}")));
    }
    Ok(Body {
        dim: body.dim,
        region: Region::Scaled { inner: Box::new(body.region.clone()), t },
        anchor: body.anchor.iter().map(|v| v * t).collect(),
        out_radius: body.out_radius * t,
        in_radius: body.in_radius * t,
        symmetry: body.symmetry,
    })
}

/// `K₁ ∩ K₂`; the gauge is the larger of the two, the support function is dropped.
pub fn intersect(b1: &Body, b2: &Body) -> Result<Body> {
    if b1.dim != b2.dim {
        return Err(Error::DimensionMismatch { expected: b1.dim, got: b2.dim });
    }
    let anchor = if b2.is_interior(&b1.anchor) {
        b1.anchor.clone()
    } else if b1.is_interior(&b2.anchor) {
        b2.anchor.clone()
    } else {
        return Err(Error::domain("bodies share no anchor point in their interiors"));
    };
    let (o1, i1) = b1.radii_about(&anchor);
    let (o2, i2) = b2.radii_about(&anchor);
    let parts = [&b1.region, &b2.region]
        .into_iter()
        .flat_map(|r| match r {
            Region::Intersection(ps) => ps.clone(),
            other => vec![other.clone()],
        })
        .collect();
    Ok(Body {
        dim: b1.dim,
        region: Region::Intersection(parts),
        anchor,
        out_radius: o1.min(o2),
        in_radius: i1.min(i2),
        symmetry: Symmetry {
            origin: b1.symmetry.origin && b2.symmetry.origin,
            axis: if b1.symmetry.axis == b2.symmetry.axis { b1.symmetry.axis } else { None },
        },
    })
}

/// Parameters of the hull `M_n = co[(K, −a), (L, b)] ⊂ R^{n+1}` with
/// `K = B_2^n / vol(B_2^n)^{1/n}` and `L = B_∞^n / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullBodyParams {
    pub n: usize,
    pub a: f64,
    pub b: f64,
}

impl HullBodyParams {
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("face dimension must be positive"));
        }
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::domain(format!("need a > 0 and b > 0, got a={a}, b={b}")));
        }
        Ok(HullBodyParams { n, a, b })
    }

    /// `a = 1`, `b = 1/(e − 1)`: the pair for which the hull centroid tends to 0.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, 1.0, 1.0 / (E - 1.0))
    }

    /// Moves the origin of the height axis by `delta`, i.e. `a + δ`, `b − δ`.
    pub fn perturbed(&self, delta: f64) -> Result<Self> {
        Self::new(self.n, self.a + delta, self.b - delta)
    }

    pub fn s_min(&self) -> f64 {
        -1.0 / self.a
    }

    pub fn s_max(&self) -> f64 {
        1.0 / self.b
    }

    /// Ambient dimension of the hull.
    pub fn hull_dim(&self) -> usize {
        self.n + 1
    }
}

/// The section `r2·B_2^n ∩ r1·B_1^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionBody {
    pub n: usize,
    pub r2: f64,
    pub r1: f64,
}

impl SectionBody {
    pub fn is_degenerate(&self) -> bool {
        self.r2 == 0.0 || self.r1 == 0.0
    }

    /// `ln vol(r2·B_2^n)`, the envelope from the Euclidean factor.
    pub fn log_volume_l2_factor(&self) -> LogValue {
        let ball = lp_ball_log_volume(Exponent::TWO, self.n).expect("n >= 1");
        LogValue::from_linear(self.r2).expect("r2 >= 0").powf(self.n as f64) * ball
    }

    /// `ln vol(r1·B_1^n)`, the envelope from the cross-polytope factor.
    pub fn log_volume_l1_factor(&self) -> LogValue {
        let cross = lp_ball_log_volume(Exponent::ONE, self.n).expect("n >= 1");
        LogValue::from_linear(self.r1).expect("r1 >= 0").powf(self.n as f64) * cross
    }

    /// `min` of the two factor volumes: an upper bound on the section volume.
    pub fn log_envelope(&self) -> LogValue {
        self.log_volume_l2_factor().min(self.log_volume_l1_factor())
    }

    pub fn body(&self) -> Body {
        let n = self.n;
        let inr = self.r2.min(self.r1 / (n as f64).sqrt());
        Body {
            dim: n,
            region: Region::Section { r2: self.r2, r1: self.r1 },
            anchor: vec![0.0; n],
            out_radius: self.r2.min(self.r1),
            in_radius: if self.is_degenerate() { 0.0 } else { inr },
            symmetry: Symmetry { origin: true, axis: None },
        }
    }
}

// 1 + s·a snapped to zero at the apex, where rounding leaves ±ulp.
fn factor(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        0.0
    } else {
        x
    }
}

/// Section of the polar hull `M_n°` at height `s`:
/// `(1 + s a)·vol(B_2^n)^{1/n}·B_2^n ∩ 2(1 − s b)·B_1^n`.
pub fn polar_section(params: &HullBodyParams, s: f64) -> Result<SectionBody> {
    let lo = params.s_min();
    let hi = params.s_max();
    let slack = 1e-12 * (hi - lo);
    if !(s >= lo - slack && s <= hi + slack) {
        return Err(Error::domain(format!("section height {s} outside [{lo}, {hi}]")));
    }
    let n = params.n;
    let root = (lp_ball_log_volume(Exponent::TWO, n)?.ln() / n as f64).exp();
    let up = factor(1.0 + s * params.a).max(0.0);
    let down = factor(1.0 - s * params.b).max(0.0);
    Ok(SectionBody { n, r2: up * root, r1: 2.0 * down })
}
