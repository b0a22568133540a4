//! Composite Gauss–Legendre rules, including a log-space variant for
//! integrands that are only representable through their logarithm.

use std::f64::consts::PI;

use crate::specfun::log_sum_exp;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_m.
            let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_lo^hi f` by splitting into `panels` equal sub-intervals.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, lo: f64, hi: f64, panels: usize) -> f64 {
        let width = (hi - lo) / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let a = lo + k as f64 * width;
            let half = 0.5 * width;
            let mid = a + half;
            let mut acc = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += w * f(mid + half * x);
            }
            total += acc * half;
        }
        total
    }

    /// `ln ∫_lo^hi exp(log_f)` with the maximum shifted out before summing.
    pub fn log_integrate<F: FnMut(f64) -> f64>(
        &self,
        mut log_f: F,
        lo: f64,
        hi: f64,
        panels: usize,
    ) -> f64 {
        if !(hi > lo) {
            return f64::NEG_INFINITY;
        }
        let width = (hi - lo) / panels as f64;
        let half = 0.5 * width;
        let mut terms = Vec::with_capacity(panels * self.len());
        for k in 0..panels {
            let mid = lo + k as f64 * width + half;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                terms.push(log_f(mid + half * x) + (w * half).ln());
            }
        }
        log_sum_exp(&terms)
    }
}

// (P_m(x), P_m'(x)) by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}
