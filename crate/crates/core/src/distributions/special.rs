//! Parabolic cylinder functions of non-positive order.
//!
//! For order `-nu` with `nu > 0`,
//!
//! ```text
//! D_{-nu}(z) = exp(-z^2/4) / Gamma(nu) * \int_0^inf w^(nu-1) exp(-w^2/2 - z w) dw
//! ```
//!
//! The integral is evaluated in `s = ln w`, where the integrand
//! `exp(nu s - e^{2s}/2 - z e^s)` is smooth and log-concave. Everything is
//! accumulated relative to the log of the mode, so neither the integral nor the
//! `exp(-z^2/4)` prefactor can overflow or underflow on its own.

use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const GL_ORDER: usize = 20;
/// Integration stops once the log-integrand is this far below its mode.
const LOG_DROP: f64 = 46.0;
const MAX_PANELS: usize = 512;

struct GaussLegendre {
    nodes: [f64; GL_ORDER],
    weights: [f64; GL_ORDER],
}

fn gauss_legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
                }
                deriv = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let prev = z;
                z = prev - p1 / deriv;
                if (z - prev).abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * deriv * deriv);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    })
}

/// `ln \int_0^inf w^(nu-1) exp(-w^2/2 - z w) dw` for `nu > 0` and finite `z`.
pub(crate) fn ln_moment_integral(nu: f64, z: f64) -> f64 {
    let log_integrand = |s: f64| {
        let w = s.exp();
        nu * s - 0.5 * w * w - z * w
    };

    // Mode of the integrand in s; the rationalized root is stable for large z.
    let w_star = 2.0 * nu / (z + (z * z + 4.0 * nu).sqrt());
    let s_star = w_star.ln();
    let h_star = log_integrand(s_star);
    let curvature = 2.0 * w_star * w_star + z * w_star;
    let scale = 1.0 / curvature.sqrt();

    let rule = gauss_legendre();
    let panel = |a: f64, b: f64| -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
            acc += w * (log_integrand(mid + half * x) - h_star).exp();
        }
        acc * half
    };

    let mut total = 0.0;

    // Right of the mode the curvature only grows, so fixed-width panels suffice.
    let mut a = s_star;
    for _ in 0..MAX_PANELS {
        let b = a + scale;
        total += panel(a, b);
        a = b;
        if log_integrand(a) < h_star - LOG_DROP {
            break;
        }
    }

    // Left of the mode the integrand flattens into exp(nu s); panels grow
    // geometrically up to a width over which nu * s changes by about 6.
    let max_width = scale.max(6.0 / nu);
    let mut width = scale;
    let mut b = s_star;
    for _ in 0..MAX_PANELS {
        let a = b - width;
        total += panel(a, b);
        b = a;
        if log_integrand(b) < h_star - LOG_DROP {
            break;
        }
        width = (width * 1.5).min(max_width);
    }

    h_star + total.ln()
}

/// Natural log of the parabolic cylinder function `D_order(z)`.
///
/// Only non-positive orders and `z >= 0` are supported.
pub fn ln_parabolic_cylinder_d(order: f64, z: f64) -> Result<f64> {
    if !order.is_finite() || !z.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "parabolic cylinder arguments must be finite (order={order}, z={z})"
        )));
    }
    if order > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "only non-positive orders are supported, got {order}"
        )));
    }
    if z < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "z must be nonnegative, got {z}"
        )));
    }
    if order == 0.0 {
        return Ok(-0.25 * z * z);
    }
    let nu = -order;
    Ok(-0.25 * z * z - ln_gamma(nu) + ln_moment_integral(nu, z))
}

/// Parabolic cylinder function `D_order(z)` for `order <= 0`, `z >= 0`.
pub fn parabolic_cylinder_d(order: f64, z: f64) -> Result<f64> {
    ln_parabolic_cylinder_d(order, z).map(f64::exp)
}
