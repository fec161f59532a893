//! Random-variate generators for the Gibbs conditionals.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{ensure_positive, Result};

/// Draw from the inverse-Gaussian law with mean `mu` and shape `lam`, density
/// `sqrt(lam / 2 pi) x^{-3/2} exp(-lam (x - mu)^2 / (2 mu^2 x))`.
pub fn sample_inverse_gaussian<R: Rng + ?Sized>(mu: f64, lam: f64, rng: &mut R) -> Result<f64> {
    ensure_positive("inverse-Gaussian mean", mu)?;
    ensure_positive("inverse-Gaussian shape", lam)?;
    Ok(inverse_gaussian(mu, lam, rng))
}

/// Transformation-with-rejection sampler (chi-square root selection).
///
/// `mu` may be `+inf`, in which case this samples the Levy limit `lam / chi2_1`.
/// The smaller root is computed in rationalized form,
/// `x1 = 4 lam y / (y + sqrt(y^2 + 4 lam y / mu))^2`, which has no cancellation
/// when `mu * y` dwarfs `lam`.
pub(crate) fn inverse_gaussian<R: Rng + ?Sized>(mu: f64, lam: f64, rng: &mut R) -> f64 {
    let v: f64 = rng.sample(StandardNormal);
    let y = v * v;
    if y == 0.0 {
        return mu;
    }
    let root = y + (y * y + 4.0 * lam * y / mu).sqrt();
    let x = 4.0 * lam * y / (root * root);
    let u: f64 = rng.random();
    if u * (mu + x) <= mu {
        x
    } else {
        mu * mu / x
    }
}

/// Draw from the inverse-gamma law `IG(shape, scale)` with density
/// `scale^shape / Gamma(shape) x^{-(shape+1)} exp(-scale / x)`.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    ensure_positive("inverse-gamma shape", shape)?;
    ensure_positive("inverse-gamma scale", scale)?;
    Ok(1.0 / gamma_draw(shape, scale, rng))
}

/// Draw from `Ga(shape, rate)` (mean `shape / rate`).
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    ensure_positive("gamma shape", shape)?;
    ensure_positive("gamma rate", rate)?;
    Ok(gamma_draw(shape, rate, rng))
}

pub(crate) fn gamma_draw<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("validated gamma parameters")
        .sample(rng)
}
