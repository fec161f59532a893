//! Densities, special functions and random-variate generators.

mod neg;
mod sampling;
mod shrinkage;
mod special;

pub use neg::{neg_log_density, neg_log_density_grad, NegParams};
pub(crate) use sampling::{gamma_draw, inverse_gaussian};
pub use sampling::{sample_gamma, sample_inverse_gamma, sample_inverse_gaussian};
pub use shrinkage::{univariate_shrinkage, Penalty};
pub use special::{ln_parabolic_cylinder_d, parabolic_cylinder_d};
