//! Bayesian generalized fused lasso modeling with normal-exponential-gamma
//! (NEG) priors.
//!
//! The crate is organized bottom-up:
//!
//! * [`distributions`]: parabolic cylinder functions, the NEG density and its
//!   gradient, and the random-variate generators used by every sampler.
//! * [`graph`]: fusion graphs (chain, 2-D grid, complete, custom) and the
//!   latent-scale precision matrix.
//! * [`data`]: centering and standardization of regression data.
//! * [`gibbs`]: Gibbs samplers for the lasso, fused lasso, NEG lasso and NEG
//!   fused lasso, plus chain management.
//! * [`sfa`]: the sparse fused algorithm, which turns a posterior point
//!   estimate into an estimate with exact zeros and exact ties.
//! * [`selection`]: fused degrees of freedom, EBIC, hyperparameter grids and
//!   grid search.
//! * [`evaluation`]: simulation generators and accuracy metrics.

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod data;
pub mod distributions;
pub mod error;
pub mod evaluation;
pub mod gibbs;
pub mod graph;
pub(crate) mod linalg;
pub mod selection;
pub mod sfa;

pub use data::{RegressionData, Scaling, Transform};
pub use distributions::{NegParams, Penalty};
pub use error::{Error, Result};
pub use gibbs::{
    run_chain, ChainSettings, GibbsSampler, GibbsState, Hyperparameters, Model, PointEstimate,
    PosteriorSummary,
};
pub use graph::{build_precision, FusionGraph, GraphKind, LatentScales};
pub use linalg::sample_beta_conditional;
pub use selection::{
    auto_grid_search, count_blocks, difference_sigma2, ebic, fit_pipeline, fused_df, grid_search,
    lambda_grid, lambda_max_search, AutoGridResult, EbicScore, GridRow, GridSearchResult, GridSpec,
    HyperGrid, PipelineConfig, PipelineFit,
};
pub use sfa::{
    objective_g, run_sfa, sfa_sweep, BlockAssignment, PriorSpec, ScalePrior, SparsifiedFit,
};
