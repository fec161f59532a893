//! Chain driver and posterior summaries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GibbsSampler, Hyperparameters, Model};
use crate::data::RegressionData;
use crate::error::{Error, Result};
use crate::graph::FusionGraph;

/// Iteration counts. `iters` includes the burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainSettings {
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
    /// Keep retained `beta` draws (needed for medians and quantiles).
    pub keep_draws: bool,
    /// At most this many draws are stored; beyond it they are subsampled
    /// uniformly. Means always use every retained draw.
    pub max_stored: usize,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self {
            iters: 3000,
            burnin: 1000,
            thin: 1,
            keep_draws: true,
            max_stored: 10_000,
        }
    }
}

impl ChainSettings {
    pub fn new(iters: usize, burnin: usize) -> Self {
        Self {
            iters,
            burnin,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iters <= self.burnin {
            return Err(Error::InvalidArgument(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iters, self.burnin
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidArgument(
                "thinning interval must be at least 1".into(),
            ));
        }
        if self.retained() == 0 {
            return Err(Error::InvalidArgument(format!(
                "thinning interval {} leaves no draws after burn-in",
                self.thin
            )));
        }
        if self.keep_draws && self.max_stored == 0 {
            return Err(Error::InvalidArgument("max_stored must be positive".into()));
        }
        Ok(())
    }

    /// Number of retained draws, `(iters - burnin) / thin`.
    pub fn retained(&self) -> usize {
        self.iters.saturating_sub(self.burnin) / self.thin.max(1)
    }
}

/// Which posterior summary of `beta` feeds the sparsifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointEstimate {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub mean: Vec<f64>,
    pub sigma2_mean: f64,
    /// Stored draws, one vector per retained iteration (possibly subsampled).
    pub draws: Vec<Vec<f64>>,
    pub retained: usize,
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
}

impl PosteriorSummary {
    /// Per-coordinate empirical quantile (linear interpolation) of the
    /// stored draws.
    pub fn quantile(&self, q: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!(
                "quantile {q} outside [0, 1]"
            )));
        }
        if self.draws.is_empty() {
            return Err(Error::InvalidArgument(
                "no stored draws; run the chain with keep_draws".into(),
            ));
        }
        let p = self.mean.len();
        let m = self.draws.len();
        let mut col = vec![0.0; m];
        let mut out = Vec::with_capacity(p);
        for j in 0..p {
            for (c, d) in col.iter_mut().zip(&self.draws) {
                *c = d[j];
            }
            col.sort_by(f64::total_cmp);
            let pos = q * (m - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            out.push(if lo == hi {
                col[lo]
            } else {
                col[lo] + frac * (col[hi] - col[lo])
            });
        }
        Ok(out)
    }

    pub fn median(&self) -> Result<Vec<f64>> {
        self.quantile(0.5)
    }

    pub fn point_estimate(&self, kind: PointEstimate) -> Result<Vec<f64>> {
        match kind {
            PointEstimate::Mean => Ok(self.mean.clone()),
            PointEstimate::Median => self.median(),
        }
    }
}

/// Run one chain from the deterministic initial state. The result depends
/// only on the inputs and `seed`.
pub fn run_chain(
    model: Model,
    data: &RegressionData,
    graph: &FusionGraph,
    hp: &Hyperparameters,
    settings: &ChainSettings,
    seed: u64,
) -> Result<PosteriorSummary> {
    settings.validate()?;
    let mut sampler = GibbsSampler::new(model, data, graph, *hp)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = sampler.initial_state();

    let p = data.p();
    let retained = settings.retained();
    let stored = if settings.keep_draws {
        retained.min(settings.max_stored)
    } else {
        0
    };
    let mut sum = vec![0.0; p];
    let mut sigma2_sum = 0.0;
    let mut draws = Vec::with_capacity(stored);
    let mut kept = 0usize;

    for t in 0..settings.iters {
        sampler.sweep(&mut state, &mut rng)?;
        if t < settings.burnin || !(t - settings.burnin + 1).is_multiple_of(settings.thin) {
            continue;
        }
        for (s, b) in sum.iter_mut().zip(&state.beta) {
            *s += b;
        }
        sigma2_sum += state.sigma2;
        // store draw k when it is the first to reach the next evenly spaced slot
        if draws.len() < stored && (draws.len() * retained) / stored <= kept {
            draws.push(state.beta.clone());
        }
        kept += 1;
    }
    if state.beta.iter().any(|b| !b.is_finite()) || !state.sigma2.is_finite() {
        return Err(Error::Domain("chain produced non-finite values".into()));
    }

    let k = kept as f64;
    Ok(PosteriorSummary {
        mean: sum.into_iter().map(|s| s / k).collect(),
        sigma2_mean: sigma2_sum / k,
        draws,
        retained: kept,
        iters: settings.iters,
        burnin: settings.burnin,
        thin: settings.thin,
    })
}
