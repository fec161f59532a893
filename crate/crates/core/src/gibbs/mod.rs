//! Gibbs samplers for the four model families.
//!
//! Every model is a Gaussian scale mixture, so one sweep is a fixed sequence
//! of draws from standard conditionals: `beta` (multivariate normal), `sigma2`
//! (inverse gamma), reciprocal node and edge scales (inverse Gaussian), and
//! for NEG models the gamma mixing variables `psi`.

mod chain;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::RegressionData;
use crate::distributions::{gamma_draw, inverse_gaussian};
use crate::error::{ensure_positive, Error, Result};
use crate::graph::FusionGraph;
use crate::linalg::SpdSystem;

pub use chain::{run_chain, ChainSettings, PointEstimate, PosteriorSummary};

/// Smallest magnitude used for `|beta_j|` and `|beta_j - beta_k|` in the
/// inverse-Gaussian means.
pub const MAGNITUDE_FLOOR: f64 = 1e-10;

/// Storage switches to banded once the band is at most this fraction of `p`.
const BANDED_FRACTION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Laplace prior on each coefficient.
    Lasso,
    /// Laplace priors on coefficients and on differences along graph edges.
    Fused,
    /// NEG prior on each coefficient (shape `lambda1`, scale `gamma2`).
    NegLasso,
    /// Laplace prior on coefficients, NEG prior (shape `lambda2`, scale
    /// `gamma2`) on differences along graph edges.
    NegFused,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Lasso, Model::Fused, Model::NegLasso, Model::NegFused];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Lasso => "lasso",
            Model::Fused => "fused",
            Model::NegLasso => "neg_lasso",
            Model::NegFused => "neg_fused",
        }
    }

    /// Whether the model penalizes differences along graph edges.
    pub fn uses_edges(self) -> bool {
        matches!(self, Model::Fused | Model::NegFused)
    }

    pub fn uses_lambda2(self) -> bool {
        self.uses_edges()
    }

    pub fn uses_gamma2(self) -> bool {
        matches!(self, Model::NegLasso | Model::NegFused)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown model '{s}' (expected lasso, fused, neg_lasso or neg_fused)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub lambda1: f64,
    pub lambda2: Option<f64>,
    pub gamma2: Option<f64>,
    /// Inverse-gamma prior on `sigma2` is `IG(nu0 / 2, eta0 / 2)`.
    pub nu0: f64,
    pub eta0: f64,
}

impl Hyperparameters {
    pub const DEFAULT_NU0: f64 = 0.01;
    pub const DEFAULT_ETA0: f64 = 0.01;

    fn with(lambda1: f64, lambda2: Option<f64>, gamma2: Option<f64>) -> Self {
        Self {
            lambda1,
            lambda2,
            gamma2,
            nu0: Self::DEFAULT_NU0,
            eta0: Self::DEFAULT_ETA0,
        }
    }

    pub fn lasso(lambda1: f64) -> Self {
        Self::with(lambda1, None, None)
    }

    pub fn fused(lambda1: f64, lambda2: f64) -> Self {
        Self::with(lambda1, Some(lambda2), None)
    }

    pub fn neg_lasso(lambda1: f64, gamma2: f64) -> Self {
        Self::with(lambda1, None, Some(gamma2))
    }

    pub fn neg_fused(lambda1: f64, lambda2: f64, gamma2: f64) -> Self {
        Self::with(lambda1, Some(lambda2), Some(gamma2))
    }

    /// Hyperparameters for `model`, dropping the ones it does not use.
    pub fn for_model(model: Model, lambda1: f64, lambda2: f64, gamma2: f64) -> Self {
        Self::with(
            lambda1,
            model.uses_lambda2().then_some(lambda2),
            model.uses_gamma2().then_some(gamma2),
        )
    }

    pub fn validate(&self, model: Model) -> Result<()> {
        ensure_positive("lambda1", self.lambda1)?;
        if model.uses_lambda2() {
            ensure_positive("lambda2", self.lambda2.unwrap_or(f64::NAN))?;
        }
        if model.uses_gamma2() {
            ensure_positive("gamma2", self.gamma2.unwrap_or(f64::NAN))?;
        }
        for (name, v) in [("nu0", self.nu0), ("eta0", self.eta0)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn lambda2_or_nan(&self) -> f64 {
        self.lambda2.unwrap_or(f64::NAN)
    }

    fn gamma2_or_nan(&self) -> f64 {
        self.gamma2.unwrap_or(f64::NAN)
    }
}

/// Current values of all sampled quantities.
///
/// `psi` holds one mixing variable per node for the NEG lasso, one per edge
/// for the NEG fused lasso, and is empty otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsState {
    pub beta: Vec<f64>,
    pub sigma2: f64,
    pub tau2: Vec<f64>,
    pub ttau2: Vec<f64>,
    pub psi: Vec<f64>,
}

impl GibbsState {
    /// Check positivity and finiteness of every scale.
    pub fn check(&self) -> Result<()> {
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::Domain(format!("sigma2 = {}", self.sigma2)));
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Domain("non-finite coefficient".into()));
        }
        for (name, v) in [
            ("tau2", &self.tau2),
            ("ttau2", &self.ttau2),
            ("psi", &self.psi),
        ] {
            if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(Error::Domain(format!("{name} entry {x} is not positive")));
            }
        }
        Ok(())
    }
}

/// Sampler for one model, data set and graph. Holds the factorization
/// workspace so repeated sweeps do not allocate.
#[derive(Debug, Clone)]
pub struct GibbsSampler<'a> {
    model: Model,
    data: &'a RegressionData,
    edges: Vec<(usize, usize)>,
    hp: Hyperparameters,
    xtx: Option<Vec<f64>>,
    xty: Vec<f64>,
    system: SpdSystem,
    noise: Vec<f64>,
    draw: Vec<f64>,
}

impl<'a> GibbsSampler<'a> {
    /// `graph` is ignored by the non-fused models.
    pub fn new(
        model: Model,
        data: &'a RegressionData,
        graph: &FusionGraph,
        hp: Hyperparameters,
    ) -> Result<Self> {
        hp.validate(model)?;
        let p = data.p();
        if p == 0 {
            return Err(Error::InvalidArgument("no coefficients to sample".into()));
        }
        if model.uses_edges() && graph.p() != p {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} nodes, data have {p} predictors",
                graph.p()
            )));
        }
        let edges = if model.uses_edges() {
            graph.edges().to_vec()
        } else {
            Vec::new()
        };
        let bw = edges.iter().map(|&(j, k)| k - j).max().unwrap_or(0);
        let system = if data.is_identity() && bw * BANDED_FRACTION <= p {
            SpdSystem::banded(p, bw)
        } else {
            SpdSystem::dense(p)
        };
        let xtx = data.xtx().map(|m| m.iter().copied().collect());
        Ok(Self {
            model,
            data,
            edges,
            hp,
            xtx,
            xty: data.xty(),
            system,
            noise: vec![0.0; p],
            draw: vec![0.0; p],
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hp
    }

    /// Edges whose differences are penalized (empty for non-fused models).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn uses_banded_storage(&self) -> bool {
        self.system.is_banded()
    }

    /// Starting point: `beta = 0`, `sigma2 = var(y)`, unit scales, and `psi`
    /// at its prior mean.
    pub fn initial_state(&self) -> GibbsState {
        let p = self.data.p();
        let var = self.data.y_variance();
        let sigma2 = if var.is_finite() && var > 1e-12 {
            var
        } else {
            1.0
        };
        let psi = match self.model {
            Model::NegLasso => vec![self.hp.lambda1 / self.gamma2_sq(); p],
            Model::NegFused => vec![self.hp.lambda2_or_nan() / self.gamma2_sq(); self.edges.len()],
            Model::Lasso | Model::Fused => Vec::new(),
        };
        GibbsState {
            beta: vec![0.0; p],
            sigma2,
            tau2: vec![1.0; p],
            ttau2: vec![1.0; self.edges.len()],
            psi,
        }
    }

    fn gamma2_sq(&self) -> f64 {
        let g = self.hp.gamma2_or_nan();
        g * g
    }

    /// One full sweep in the order `beta`, `sigma2`, node scales, edge
    /// scales, mixing variables.
    pub fn sweep<R: Rng + ?Sized>(&mut self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        self.update_beta(state, rng)?;
        self.update_sigma2(state, rng);
        self.update_node_scales(state, rng);
        self.update_edge_scales(state, rng);
        self.update_psi(state, rng);
        Ok(())
    }

    /// `beta ~ N(A^{-1} X^T y, sigma2 A^{-1})`, `A = X^T X + Sigma_beta^{-1}`.
    pub fn update_beta<R: Rng + ?Sized>(
        &mut self,
        state: &mut GibbsState,
        rng: &mut R,
    ) -> Result<()> {
        let p = self.data.p();
        let sys = &mut self.system;
        sys.clear();
        match &self.xtx {
            Some(m) => {
                for i in 0..p {
                    for j in 0..=i {
                        sys.add(i, j, m[i * p + j]);
                    }
                }
            }
            None => (0..p).for_each(|i| sys.add(i, i, 1.0)),
        }
        for (i, t) in state.tau2.iter().enumerate() {
            sys.add(i, i, 1.0 / t);
        }
        for (&(j, k), t) in self.edges.iter().zip(&state.ttau2) {
            let w = 1.0 / t;
            sys.add(j, j, w);
            sys.add(k, k, w);
            sys.add(k, j, -w);
        }
        sys.factor()?;
        sys.sample_into(
            &self.xty,
            state.sigma2,
            rng,
            &mut self.draw,
            &mut self.noise,
        );
        state.beta.copy_from_slice(&self.draw);
        Ok(())
    }

    /// Shape and scale `(nu1 / 2, eta1 / 2)` of the `sigma2` conditional.
    pub fn sigma2_conditional(&self, state: &GibbsState) -> (f64, f64) {
        let n = self.data.n() as f64;
        let p = self.data.p() as f64;
        let nu1 = n + p + self.edges.len() as f64 + self.hp.nu0;
        let eta1 = self.data.rss(&state.beta) + self.prior_quadratic_form(state) + self.hp.eta0;
        (nu1 / 2.0, eta1 / 2.0)
    }

    /// `beta^T Sigma_beta^{-1} beta` under the current scales.
    pub fn prior_quadratic_form(&self, state: &GibbsState) -> f64 {
        let nodes: f64 = state
            .beta
            .iter()
            .zip(&state.tau2)
            .map(|(b, t)| b * b / t)
            .sum();
        let edges: f64 = self
            .edges
            .iter()
            .zip(&state.ttau2)
            .map(|(&(j, k), t)| {
                let d = state.beta[j] - state.beta[k];
                d * d / t
            })
            .sum();
        nodes + edges
    }

    pub fn update_sigma2<R: Rng + ?Sized>(&self, state: &mut GibbsState, rng: &mut R) {
        let (shape, scale) = self.sigma2_conditional(state);
        state.sigma2 = 1.0 / gamma_draw(shape, scale, rng);
    }

    pub fn update_node_scales<R: Rng + ?Sized>(&self, state: &mut GibbsState, rng: &mut R) {
        let sigma = state.sigma2.sqrt();
        for j in 0..state.beta.len() {
            let rate = match self.model {
                Model::NegLasso => (2.0 * state.psi[j]).sqrt(),
                _ => self.hp.lambda1,
            };
            state.tau2[j] = reciprocal_scale(rate, sigma, state.beta[j], rng);
        }
    }

    pub fn update_edge_scales<R: Rng + ?Sized>(&self, state: &mut GibbsState, rng: &mut R) {
        let sigma = state.sigma2.sqrt();
        for (e, &(j, k)) in self.edges.iter().enumerate() {
            let rate = match self.model {
                Model::NegFused => (2.0 * state.psi[e]).sqrt(),
                _ => self.hp.lambda2_or_nan(),
            };
            state.ttau2[e] = reciprocal_scale(rate, sigma, state.beta[j] - state.beta[k], rng);
        }
    }

    /// `psi ~ Ga(shape + 1, t + gamma2^2)` where `t` is the matching scale.
    pub fn update_psi<R: Rng + ?Sized>(&self, state: &mut GibbsState, rng: &mut R) {
        let (shape, scales) = match self.model {
            Model::NegLasso => (self.hp.lambda1, &state.tau2),
            Model::NegFused => (self.hp.lambda2_or_nan(), &state.ttau2),
            Model::Lasso | Model::Fused => return,
        };
        let g2 = self.gamma2_sq();
        for (psi, t) in state.psi.iter_mut().zip(scales) {
            *psi = gamma_draw(shape + 1.0, t + g2, rng);
        }
    }
}

/// Draw `tau2` with `1/tau2 ~ IGauss(rate sigma / |d|, rate^2)`.
fn reciprocal_scale<R: Rng + ?Sized>(rate: f64, sigma: f64, d: f64, rng: &mut R) -> f64 {
    let mag = d.abs().max(MAGNITUDE_FLOOR);
    let w = inverse_gaussian(rate * sigma / mag, rate * rate, rng);
    // w overflows only for absurd inputs; keep the scale representable
    (1.0 / w).clamp(f64::MIN_POSITIVE, f64::MAX)
}

fn single_sweep<R: Rng + ?Sized>(
    model: Model,
    state: &mut GibbsState,
    data: &RegressionData,
    graph: &FusionGraph,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<()> {
    let mut sampler = GibbsSampler::new(model, data, graph, *hp)?;
    if state.beta.len() != data.p()
        || state.tau2.len() != data.p()
        || state.ttau2.len() != sampler.edges.len()
        || state.psi.len() != sampler.initial_state().psi.len()
    {
        return Err(Error::DimensionMismatch(
            "state does not match the model, data and graph".into(),
        ));
    }
    sampler.sweep(state, rng)
}

/// One sweep of the Bayesian lasso. For repeated sweeps prefer
/// [`GibbsSampler`], which reuses its workspace.
pub fn step_bayesian_lasso<R: Rng + ?Sized>(
    state: &mut GibbsState,
    data: &RegressionData,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<()> {
    single_sweep(
        Model::Lasso,
        state,
        data,
        &FusionGraph::empty(data.p()),
        hp,
        rng,
    )
}

/// One sweep of the Bayesian fused lasso on the chain graph.
pub fn step_bayesian_fused_lasso<R: Rng + ?Sized>(
    state: &mut GibbsState,
    data: &RegressionData,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<()> {
    single_sweep(
        Model::Fused,
        state,
        data,
        &FusionGraph::chain(data.p()),
        hp,
        rng,
    )
}

pub fn step_neg_lasso<R: Rng + ?Sized>(
    state: &mut GibbsState,
    data: &RegressionData,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<()> {
    single_sweep(
        Model::NegLasso,
        state,
        data,
        &FusionGraph::empty(data.p()),
        hp,
        rng,
    )
}

pub fn step_neg_fused<R: Rng + ?Sized>(
    state: &mut GibbsState,
    data: &RegressionData,
    graph: &FusionGraph,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<()> {
    single_sweep(Model::NegFused, state, data, graph, hp, rng)
}
