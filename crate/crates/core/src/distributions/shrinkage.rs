//! Univariate penalized least squares:
//! `argmin_b { (b_ls - b)^2 / 2 + pen(b) }`.

use super::neg::{neg_log_density, NegParams};

const GRID_POINTS: usize = 10_001;

/// Penalty applied to a single coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    /// `gamma * |b|`
    Lasso { gamma: f64 },
    /// `-log NEG(b | lambda, gamma)`, up to a constant.
    Neg(NegParams),
}

impl Penalty {
    pub fn value(&self, b: f64) -> f64 {
        match self {
            Penalty::Lasso { gamma } => gamma * b.abs(),
            Penalty::Neg(p) => -neg_log_density(b, p),
        }
    }
}

/// Shrinkage estimate for a univariate least-squares value under `penalty`.
///
/// The objective can be non-convex under the NEG penalty, so the minimizer is
/// located on a uniform grid over `[-|b_ls|-1, |b_ls|+1]` and then polished by
/// golden-section search between the neighbouring grid points. The cusp at zero
/// is checked explicitly.
pub fn univariate_shrinkage(beta_ls: f64, penalty: &Penalty) -> f64 {
    let objective = |b: f64| 0.5 * (beta_ls - b) * (beta_ls - b) + penalty.value(b);
    let half = beta_ls.abs() + 1.0;
    let step = 2.0 * half / (GRID_POINTS - 1) as f64;

    let mut best_i = 0;
    let mut best_f = f64::INFINITY;
    for i in 0..GRID_POINTS {
        let f = objective(-half + i as f64 * step);
        if f < best_f {
            best_f = f;
            best_i = i;
        }
    }

    let lo = -half + best_i.saturating_sub(1) as f64 * step;
    let hi = -half + (best_i + 1).min(GRID_POINTS - 1) as f64 * step;
    let polished = golden_section(&objective, lo, hi, 1e-13);

    let mut out = -half + best_i as f64 * step;
    let mut out_f = best_f;
    for cand in [polished, 0.0] {
        let f = objective(cand);
        if f <= out_f {
            out = cand;
            out_f = f;
        }
    }
    out
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + c.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
