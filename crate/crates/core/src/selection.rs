//! Model selection: fused degrees of freedom, EBIC, hyperparameter grids and
//! the Gibbs + SFA + EBIC pipeline run over a grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::RegressionData;
use crate::error::{ensure_positive, Error, Result};
use crate::gibbs::{run_chain, ChainSettings, Hyperparameters, Model, PointEstimate};
use crate::graph::FusionGraph;
use crate::sfa::{log_likelihood, run_sfa, PriorSpec, SparsifiedFit};

/// Number of maximal runs of equal nonzero adjacent values.
pub fn fused_df(beta: &[f64]) -> usize {
    runs(beta).filter(|&v| v != 0.0).count()
}

/// Number of maximal runs of equal adjacent values, zero runs included.
pub fn count_blocks(beta: &[f64]) -> usize {
    runs(beta).count()
}

/// First value of each run.
fn runs(beta: &[f64]) -> impl Iterator<Item = f64> + '_ {
    beta.iter()
        .enumerate()
        .filter(|&(j, b)| j == 0 || beta[j - 1] != *b)
        .map(|(_, b)| *b)
}

/// Connected components of the graph restricted to edges joining equal
/// values, as `(value of each component)`.
fn graph_blocks(beta: &[f64], graph: &FusionGraph) -> Vec<f64> {
    let p = beta.len();
    let mut parent: Vec<usize> = (0..p).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for &(j, k) in graph.edges() {
        if beta[j] == beta[k] {
            let (a, b) = (find(&mut parent, j), find(&mut parent, k));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..p)
        .filter(|&j| find(&mut parent, j) == j)
        .map(|j| beta[j])
        .collect()
}

/// Degrees of freedom on a general graph: components of equal nonzero
/// values. Equals [`fused_df`] on the chain.
pub fn fused_df_graph(beta: &[f64], graph: &FusionGraph) -> usize {
    graph_blocks(beta, graph)
        .into_iter()
        .filter(|&v| v != 0.0)
        .count()
}

/// Blocks on a general graph, zero blocks included. Equals
/// [`count_blocks`] on the chain.
pub fn count_blocks_graph(beta: &[f64], graph: &FusionGraph) -> usize {
    graph_blocks(beta, graph).len()
}

/// `gamma = 1 - ln n / (2 ln p)`, floored at 0 (it is negative when
/// `p < sqrt(n)`).
pub fn ebic_gamma(n: usize, p: usize) -> f64 {
    if p < 2 {
        return 0.0;
    }
    (1.0 - (n as f64).ln() / (2.0 * (p as f64).ln())).max(0.0)
}

/// `ln C(n, k)` as a sum of logs; exactly 0 for `k = 0` and `k = n`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n.saturating_sub(k));
    (1..=k)
        .map(|i| (((n - k + i) as f64) / i as f64).ln())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EbicScore {
    pub value: f64,
    pub loglik: f64,
    pub df: usize,
    pub p_g: usize,
    pub ebic_gamma: f64,
    pub n: usize,
}

impl EbicScore {
    pub fn new(loglik: f64, df: usize, p_g: usize, ebic_gamma: f64, n: usize) -> Result<Self> {
        if df > p_g {
            return Err(Error::Internal(format!(
                "df {df} exceeds block count {p_g}"
            )));
        }
        let mut s = Self {
            value: 0.0,
            loglik,
            df,
            p_g,
            ebic_gamma,
            n,
        };
        s.value = s.recompute();
        Ok(s)
    }

    /// `-2 loglik + df ln n + 2 gamma ln C(p_g, df)` from the stored fields.
    pub fn recompute(&self) -> f64 {
        -2.0 * self.loglik
            + self.df as f64 * (self.n as f64).ln()
            + 2.0 * self.ebic_gamma * ln_binomial(self.p_g, self.df)
    }
}

/// EBIC of a sparsified fit. Blocks are counted on `graph`; pass the empty
/// graph for models without fusion.
pub fn ebic(
    fit: &SparsifiedFit,
    data: &RegressionData,
    sigma2_hat: f64,
    graph: &FusionGraph,
) -> Result<EbicScore> {
    ensure_positive("sigma2", sigma2_hat)?;
    let beta = &fit.beta_hat;
    if beta.len() != data.p() || graph.p() != data.p() {
        return Err(Error::DimensionMismatch(format!(
            "fit has {} coefficients, data {} predictors, graph {} nodes",
            beta.len(),
            data.p(),
            graph.p()
        )));
    }
    EbicScore::new(
        log_likelihood(beta, sigma2_hat, data),
        fused_df_graph(beta, graph),
        count_blocks_graph(beta, graph),
        ebic_gamma(data.n(), data.p()),
        data.n(),
    )
}

/// `count` log-spaced values `min * exp((ln max - ln min) i / count)`,
/// `i = 1..=count`. The last value is exactly `max`.
pub fn lambda_grid(lambda_min: f64, lambda_max: f64, count: usize) -> Result<Vec<f64>> {
    ensure_positive("lambda_min", lambda_min)?;
    ensure_positive("lambda_max", lambda_max)?;
    if count == 0 {
        return Err(Error::InvalidArgument(
            "grid needs at least one value".into(),
        ));
    }
    if count > 1 && lambda_min >= lambda_max {
        return Err(Error::InvalidArgument(format!(
            "lambda_min {lambda_min} must be below lambda_max {lambda_max}"
        )));
    }
    let span = lambda_max.ln() - lambda_min.ln();
    let mut out: Vec<f64> = (1..=count)
        .map(|i| lambda_min * (span * i as f64 / count as f64).exp())
        .collect();
    out[count - 1] = lambda_max;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub gamma2: Vec<f64>,
}

impl HyperGrid {
    pub fn new(lambda1: Vec<f64>, lambda2: Vec<f64>, gamma2: Vec<f64>) -> Result<Self> {
        let g = Self {
            lambda1,
            lambda2,
            gamma2,
        };
        g.validate()?;
        Ok(g)
    }

    /// Every axis must be nonempty, positive and strictly increasing.
    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
            ("gamma2", &self.gamma2),
        ] {
            if axis.is_empty() {
                return Err(Error::InvalidArgument(format!("{name} grid is empty")));
            }
            for v in axis {
                ensure_positive(name, *v)?;
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "{name} grid must be strictly increasing"
                )));
            }
        }
        Ok(())
    }

    /// Grid points for `model` in lexicographic order (`lambda1` slowest).
    /// Axes the model does not use contribute a single entry.
    pub fn points(&self, model: Model) -> Vec<Hyperparameters> {
        let l2: &[f64] = if model.uses_lambda2() {
            &self.lambda2
        } else {
            &self.lambda2[..1]
        };
        let g2: &[f64] = if model.uses_gamma2() {
            &self.gamma2
        } else {
            &self.gamma2[..1]
        };
        let mut out = Vec::with_capacity(self.lambda1.len() * l2.len() * g2.len());
        for &a in &self.lambda1 {
            for &b in l2 {
                for &c in g2 {
                    out.push(Hyperparameters::for_model(model, a, b, c));
                }
            }
        }
        out
    }

    /// Middle entries of the `lambda2` and `gamma2` axes.
    pub fn midpoints(&self) -> (f64, f64) {
        (
            self.lambda2[(self.lambda2.len() - 1) / 2],
            self.gamma2[(self.gamma2.len() - 1) / 2],
        )
    }
}

/// Settings shared by every pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub chain: ChainSettings,
    pub point: PointEstimate,
    /// Noise variance plugged into the EBIC likelihood at every grid point.
    /// `None` uses each point's posterior mean of `sigma2`.
    ///
    /// With an identity design the likelihood alone does not identify
    /// `sigma2`; as the penalties weaken its posterior collapses toward 0
    /// and the per-point likelihood grows without bound, so a common
    /// estimate such as [`difference_sigma2`] is needed there.
    pub ebic_sigma2: Option<f64>,
}

/// Robust noise variance of a signal observed on `graph`:
/// `(MAD of |y_a - y_b| over edges / (sqrt(2) * 0.6745))^2`.
///
/// Differences across a jump are outliers that the median ignores. Falls
/// back to the mean of `(y_a - y_b)^2 / 2` when more than half of the
/// differences are exactly zero, and returns `None` when all are.
pub fn difference_sigma2(y: &[f64], graph: &FusionGraph) -> Option<f64> {
    if y.len() != graph.p() || graph.num_edges() == 0 {
        return None;
    }
    let mut d: Vec<f64> = graph
        .edges()
        .iter()
        .map(|&(a, b)| (y[a] - y[b]).abs())
        .collect();
    d.sort_by(f64::total_cmp);
    let m = d.len();
    let median = if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    };
    // Phi^{-1}(3/4)
    const Q3: f64 = 0.674_489_750_196_081_7;
    let robust = (median / (std::f64::consts::SQRT_2 * Q3)).powi(2);
    if robust > 0.0 && robust.is_finite() {
        return Some(robust);
    }
    let mean_square = d.iter().map(|x| x * x).sum::<f64>() / (2.0 * m as f64);
    (mean_square > 0.0 && mean_square.is_finite()).then_some(mean_square)
}

/// Result of Gibbs sampling, sparsification and scoring at one
/// hyperparameter setting.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineFit {
    pub hp: Hyperparameters,
    pub posterior_mean: Vec<f64>,
    pub sigma2_hat: f64,
    pub fit: SparsifiedFit,
    pub score: EbicScore,
}

impl PipelineFit {
    pub fn is_all_zero(&self) -> bool {
        self.fit.beta_hat.iter().all(|&b| b == 0.0)
    }
}

/// The graph whose edges carry a penalty under `model`.
fn effective_graph(model: Model, graph: &FusionGraph) -> FusionGraph {
    if model.uses_edges() {
        graph.clone()
    } else {
        FusionGraph::empty(graph.p())
    }
}

/// Gibbs chain, then SFA on the chosen point estimate with the posterior
/// mean of `sigma2`, then EBIC.
pub fn fit_pipeline(
    data: &RegressionData,
    graph: &FusionGraph,
    model: Model,
    hp: &Hyperparameters,
    config: &PipelineConfig,
    seed: u64,
) -> Result<PipelineFit> {
    let g = effective_graph(model, graph);
    fit_on(data, &g, model, hp, config, seed)
}

fn fit_on(
    data: &RegressionData,
    g: &FusionGraph,
    model: Model,
    hp: &Hyperparameters,
    config: &PipelineConfig,
    seed: u64,
) -> Result<PipelineFit> {
    let mut chain = config.chain;
    chain.keep_draws = config.point == PointEstimate::Median;
    let summary = run_chain(model, data, g, hp, &chain, seed)?;
    let point = summary.point_estimate(config.point)?;
    let prior = PriorSpec::from_model(model, hp)?;
    let mut fit = run_sfa(&point, summary.sigma2_mean, data, &prior, g)?;
    let score = ebic(
        &fit,
        data,
        config.ebic_sigma2.unwrap_or(summary.sigma2_mean),
        g,
    )?;
    fit.ebic = Some(score.value);
    Ok(PipelineFit {
        hp: *hp,
        posterior_mean: summary.mean,
        sigma2_hat: summary.sigma2_mean,
        fit,
        score,
    })
}

pub const LAMBDA_SEARCH_START: f64 = 1e-4;
pub const LAMBDA_SEARCH_LIMIT: f64 = 1e8;
const BISECTION_STEPS: usize = 12;

/// Smallest `lambda1` (on a doubling-then-bisection schedule) at which the
/// pipeline returns the all-zero fit. `base` supplies the other
/// hyperparameters; bisection works on the log scale.
pub fn lambda_max_search(
    data: &RegressionData,
    graph: &FusionGraph,
    model: Model,
    base: &Hyperparameters,
    config: &PipelineConfig,
    seed: u64,
) -> Result<f64> {
    let g = effective_graph(model, graph);
    let zero_at = |l1: f64| -> Result<bool> {
        let hp = Hyperparameters {
            lambda1: l1,
            ..*base
        };
        Ok(fit_on(data, &g, model, &hp, config, seed)?.is_all_zero())
    };
    let mut hi = LAMBDA_SEARCH_START;
    if zero_at(hi)? {
        return Ok(hi);
    }
    let mut lo = hi;
    loop {
        hi *= 2.0;
        if hi > LAMBDA_SEARCH_LIMIT {
            return Err(Error::UnboundedSearch {
                limit: LAMBDA_SEARCH_LIMIT,
            });
        }
        if zero_at(hi)? {
            break;
        }
        lo = hi;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = (lo * hi).sqrt();
        if zero_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One row of the score table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub hp: Hyperparameters,
    pub score: EbicScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best: PipelineFit,
    /// Successful grid points in grid order.
    pub table: Vec<GridRow>,
    /// Grid points whose pipeline failed, with the error.
    pub failures: Vec<(Hyperparameters, Error)>,
}

/// Run the pipeline at every grid point (in parallel, all with the same
/// seed) and keep the lowest EBIC. Ties go to the earliest point in grid
/// order, i.e. the smallest `lambda1`, then `lambda2`, then `gamma2`.
pub fn grid_search(
    data: &RegressionData,
    graph: &FusionGraph,
    model: Model,
    grid: &HyperGrid,
    config: &PipelineConfig,
    seed: u64,
) -> Result<GridSearchResult> {
    grid.validate()?;
    let g = effective_graph(model, graph);
    let points = grid.points(model);
    let results: Vec<Result<PipelineFit>> = points
        .par_iter()
        .map(|hp| fit_on(data, &g, model, hp, config, seed))
        .collect();

    let mut best: Option<PipelineFit> = None;
    let mut table = Vec::with_capacity(points.len());
    let mut failures = Vec::new();
    for (hp, r) in points.into_iter().zip(results) {
        match r {
            Ok(fit) => {
                table.push(GridRow {
                    hp,
                    score: fit.score,
                });
                if best
                    .as_ref()
                    .is_none_or(|b| fit.score.value < b.score.value)
                {
                    best = Some(fit);
                }
            }
            Err(e) => failures.push((hp, e)),
        }
    }
    match best {
        Some(best) => Ok(GridSearchResult {
            best,
            table,
            failures,
        }),
        None => Err(failures
            .into_iter()
            .next()
            .map(|(_, e)| e)
            .unwrap_or_else(|| Error::Internal("empty grid".into()))),
    }
}

/// Grid layout whose `lambda1` axis is anchored at a data-dependent
/// `lambda_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub lambda1_count: usize,
    pub lambda1_min: f64,
    pub lambda2: Vec<f64>,
    pub gamma2: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lambda1_count: 10,
            lambda1_min: LAMBDA_SEARCH_START,
            lambda2: DEFAULT_LAMBDA2.to_vec(),
            gamma2: DEFAULT_GAMMA2.to_vec(),
        }
    }
}

/// Default `lambda2` axis.
pub const DEFAULT_LAMBDA2: [f64; 10] = [0.1, 0.2, 0.4, 0.7, 1.0, 1.5, 2.0, 3.0, 4.5, 7.0];
/// Default `gamma2` axis.
pub const DEFAULT_GAMMA2: [f64; 3] = [0.05, 0.2, 1.0];

/// Outcome of [`auto_grid_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct AutoGridResult {
    pub lambda_max: f64,
    pub grid: HyperGrid,
    pub search: GridSearchResult,
}

/// Find `lambda_max` with `lambda2` and `gamma2` at the grid midpoints, lay
/// out the `lambda1` axis up to it, and grid-search.
pub fn auto_grid_search(
    data: &RegressionData,
    graph: &FusionGraph,
    model: Model,
    spec: &GridSpec,
    config: &PipelineConfig,
    seed: u64,
) -> Result<AutoGridResult> {
    let axes = HyperGrid {
        lambda1: vec![1.0],
        lambda2: spec.lambda2.clone(),
        gamma2: spec.gamma2.clone(),
    };
    axes.validate()?;
    let (l2, g2) = axes.midpoints();
    let base = Hyperparameters::for_model(model, 1.0, l2, g2);
    let lambda_max = lambda_max_search(data, graph, model, &base, config, seed)?;
    let lambda1 = if lambda_max <= spec.lambda1_min {
        vec![lambda_max]
    } else {
        lambda_grid(spec.lambda1_min, lambda_max, spec.lambda1_count)?
    };
    let grid = HyperGrid::new(lambda1, axes.lambda2, axes.gamma2)?;
    let search = grid_search(data, graph, model, &grid, config, seed)?;
    Ok(AutoGridResult {
        lambda_max,
        grid,
        search,
    })
}
