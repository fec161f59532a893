//! Synthetic experiments: data generators, accuracy metrics and the
//! replicated simulation driver.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{standardize_with, RegressionData, Scaling};
use crate::error::{Error, Result};
use crate::gibbs::{ChainSettings, Model};
use crate::graph::FusionGraph;
use crate::linalg::cholesky_dense;
use crate::selection::{auto_grid_search, GridSpec, PipelineConfig};

/// Raw simulated regression data (not centered or scaled).
#[derive(Debug, Clone, PartialEq)]
pub struct SimData {
    pub y: Array1<f64>,
    pub x: Array2<f64>,
}

/// True model of a simulation case.
#[derive(Debug, Clone, PartialEq)]
pub struct SimCase {
    pub id: u8,
    pub n: usize,
    pub p: usize,
    pub beta_star: Vec<f64>,
    pub sigma: f64,
    pub cov: Array2<f64>,
    /// Maximal runs of equal true coefficients.
    pub blocks: Vec<Vec<usize>>,
}

fn repeat(parts: &[(f64, usize)]) -> Vec<f64> {
    parts
        .iter()
        .flat_map(|&(v, k)| std::iter::repeat_n(v, k))
        .collect()
}

fn runs_of(beta: &[f64]) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (j, b) in beta.iter().enumerate() {
        match blocks.last_mut() {
            Some(last) if beta[last[0]] == *b => last.push(j),
            _ => blocks.push(vec![j]),
        }
    }
    blocks
}

/// `(n, beta*, sigma, covariance entry)` of one case.
type CaseParts = (usize, Vec<f64>, f64, Box<dyn Fn(usize, usize) -> f64>);

impl SimCase {
    pub fn new(id: u8) -> Result<Self> {
        let (n, beta_star, sigma, cov): CaseParts = match id {
            1 => (
                50,
                repeat(&[(0.0, 5), (2.0, 5), (0.0, 5), (2.0, 5)]),
                0.75,
                Box::new(|i, j| if i == j { 1.0 } else { 0.5 }),
            ),
            2 => (
                50,
                repeat(&[
                    (0.0, 5),
                    (5.0, 3),
                    (0.0, 15),
                    (3.5, 7),
                    (0.0, 10),
                    (4.5, 5),
                    (0.0, 5),
                ]),
                0.75,
                Box::new(|i, j| if i == j { 1.0 } else { 0.0 }),
            ),
            3 => (
                30,
                repeat(&[(3.0, 5), (-1.5, 5), (1.0, 5), (2.0, 5), (0.0, 30)]),
                5.0,
                Box::new(|i: usize, j: usize| 0.5f64.powi(i.abs_diff(j) as i32)),
            ),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown simulation case {id} (expected 1, 2 or 3)"
                )))
            }
        };
        let p = beta_star.len();
        Ok(Self {
            id,
            n,
            p,
            blocks: runs_of(&beta_star),
            beta_star,
            sigma,
            cov: Array2::from_shape_fn((p, p), |(i, j)| cov(i, j)),
        })
    }

    /// Draw `X` with rows `N(0, cov)` and `y = X beta* + N(0, sigma^2)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SimData> {
        let l = cholesky_dense(&self.cov)?;
        let z = Array2::from_shape_fn((self.n, self.p), |_| rng.sample::<f64, _>(StandardNormal));
        let x = z.dot(&l.t());
        let y = Array1::from_shape_fn(self.n, |i| {
            x.row(i)
                .iter()
                .zip(&self.beta_star)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + self.sigma * rng.sample::<f64, _>(StandardNormal)
        });
        Ok(SimData { y, x })
    }
}

/// One data set from case 1, 2 or 3; a pure function of `seed`.
pub fn gen_case(case_id: u8, seed: u64) -> Result<(SimData, SimCase)> {
    let case = SimCase::new(case_id)?;
    let data = case.draw(&mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok((data, case))
}

pub const FLSA_SIGMA: f64 = 0.5;

/// True signal of the 1-D demo: eight blocks over 100 positions.
pub fn flsa_truth() -> Vec<f64> {
    repeat(&[
        (-1.0, 5),
        (0.0, 20),
        (2.0, 5),
        (0.0, 40),
        (4.0, 10),
        (0.0, 5),
        (2.0, 5),
        (0.0, 10),
    ])
}

/// `(y, beta*)` with `y = beta* + N(0, 0.5^2)`.
pub fn gen_flsa_demo(seed: u64) -> (Vec<f64>, Vec<f64>) {
    gen_flsa_demo_with(seed, FLSA_SIGMA)
}

pub fn gen_flsa_demo_with(seed: u64, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let truth = flsa_truth();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = truth
        .iter()
        .map(|b| b + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    (y, truth)
}

/// Hyperparameter grid for series segmentation.
pub fn flsa_grid_spec() -> GridSpec {
    GridSpec::default()
}

/// Hyperparameter grid for image denoising, kept small because every grid
/// point samples a 1024-dimensional posterior.
pub fn image_grid_spec() -> GridSpec {
    GridSpec {
        lambda1_count: 4,
        lambda1_min: 1e-4,
        lambda2: vec![0.5, 2.0],
        gamma2: vec![0.05, 0.2],
    }
}

/// Chain length for image denoising.
pub fn image_chain_settings() -> ChainSettings {
    ChainSettings::new(1500, 500)
}

pub const IMAGE_SIDE: usize = 32;
pub const IMAGE_NOISE_SD: f64 = 0.35;

/// Background 0 with a 1.0 square (rows and columns 4..=14) and a 0.6
/// rectangle (rows 18..=28, columns 16..=30).
pub fn true_image() -> Array2<f64> {
    Array2::from_shape_fn((IMAGE_SIDE, IMAGE_SIDE), |(r, c)| {
        if (4..=14).contains(&r) && (4..=14).contains(&c) {
            1.0
        } else if (18..=28).contains(&r) && (16..=30).contains(&c) {
            0.6
        } else {
            0.0
        }
    })
}

/// `(truth, noisy)` with noise sd 0.35.
pub fn gen_image_demo(seed: u64) -> (Array2<f64>, Array2<f64>) {
    gen_image_demo_with(seed, IMAGE_NOISE_SD)
}

pub fn gen_image_demo_with(seed: u64, noise_sd: f64) -> (Array2<f64>, Array2<f64>) {
    let truth = true_image();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = truth.mapv(|v| v + noise_sd * rng.sample::<f64, _>(StandardNormal));
    (truth, noisy)
}

/// Accuracy of one estimate. Proportions whose denominator is zero are
/// `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub p_z: Option<f64>,
    pub p_nz: Option<f64>,
    pub p_b: Option<f64>,
    pub mse: f64,
    pub pse: Option<f64>,
}

/// `P_Z`, `P_NZ`, `P_B` and `MSE = (b - b*)^T Sigma (b - b*)`. A coefficient
/// counts as zero only if it is exactly `0.0`.
pub fn metrics(beta_hat: &[f64], sim: &SimCase) -> Result<MetricsReport> {
    let p = sim.p;
    if beta_hat.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{} estimates for {p} coefficients",
            beta_hat.len()
        )));
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let truth = &sim.beta_star;
    let true_zero = truth.iter().filter(|b| **b == 0.0).count();
    let hit_zero = truth
        .iter()
        .zip(beta_hat)
        .filter(|(t, b)| **t == 0.0 && **b == 0.0)
        .count();
    let hit_nonzero = truth
        .iter()
        .zip(beta_hat)
        .filter(|(t, b)| **t != 0.0 && **b != 0.0)
        .count();

    let distinct: usize = sim
        .blocks
        .iter()
        .map(|block| {
            let mut vals: Vec<u64> = block.iter().map(|&j| beta_hat[j].to_bits()).collect();
            vals.sort_unstable();
            vals.dedup();
            vals.len()
        })
        .sum();
    let l = sim.blocks.len();

    let d: Vec<f64> = beta_hat.iter().zip(truth).map(|(b, t)| b - t).collect();
    let mse = (0..p)
        .map(|i| d[i] * (0..p).map(|j| sim.cov[[i, j]] * d[j]).sum::<f64>())
        .sum::<f64>();

    Ok(MetricsReport {
        p_z: ratio(hit_zero, true_zero),
        p_nz: ratio(hit_nonzero, p - true_zero),
        p_b: ratio(p - distinct, p - l),
        mse,
        pse: None,
    })
}

/// `(1/n) ||X b - (X b* + e)||^2` with fresh noise `e ~ N(0, sigma^2 I)`.
pub fn pse<R: Rng + ?Sized>(
    beta_hat: &[f64],
    x: &Array2<f64>,
    beta_star: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<f64> {
    let (n, p) = x.dim();
    if beta_hat.len() != p || beta_star.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "design has {p} columns, got {} estimates and {} true coefficients",
            beta_hat.len(),
            beta_star.len()
        )));
    }
    let mut total = 0.0;
    for row in x.rows() {
        let diff: f64 = row
            .iter()
            .zip(beta_hat.iter().zip(beta_star))
            .map(|(a, (b, t))| a * (b - t))
            .sum();
        let e = if sigma > 0.0 {
            sigma * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        total += (diff - e) * (diff - e);
    }
    Ok(total / n as f64)
}

/// Settings for [`simulate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSettings {
    pub replications: usize,
    pub pipeline: PipelineConfig,
    pub grid: GridSpec,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            replications: 20,
            pipeline: PipelineConfig::default(),
            grid: GridSpec::default(),
        }
    }
}

/// Metrics for one method on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationMetrics {
    pub replication: usize,
    pub method: Model,
    pub report: MetricsReport,
    pub beta_hat: Vec<f64>,
}

/// Seeds for data, chains and prediction noise of replication `r`.
fn replication_seeds(seed: u64, r: usize) -> (u64, u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64 + 1);
    (rng.random(), rng.random(), rng.random())
}

/// Fit `methods` on `settings.replications` data sets of `case_id`.
///
/// Predictors are centered and scaled by a common factor, so exact ties
/// found on the standardized scale are still ties on the raw scale.
pub fn simulate(
    case_id: u8,
    methods: &[Model],
    settings: &SimSettings,
    seed: u64,
) -> Result<Vec<ReplicationMetrics>> {
    let case = SimCase::new(case_id)?;
    if settings.replications == 0 {
        return Err(Error::InvalidArgument(
            "need at least one replication".into(),
        ));
    }
    let graph = FusionGraph::chain(case.p);
    let per_rep: Vec<Result<Vec<ReplicationMetrics>>> = (0..settings.replications)
        .into_par_iter()
        .map(|r| {
            let (data_seed, chain_seed, noise_seed) = replication_seeds(seed, r);
            let raw = case.draw(&mut ChaCha8Rng::seed_from_u64(data_seed))?;
            let (data, transform) = standardize_with(&raw.y, &raw.x, Scaling::Pooled)?;
            methods
                .iter()
                .map(|&method| {
                    let fit = fit_case(&data, &graph, method, settings, chain_seed)?;
                    let beta_hat = transform.coefficients_to_raw(&fit);
                    let mut report = metrics(&beta_hat, &case)?;
                    let mut noise = ChaCha8Rng::seed_from_u64(noise_seed);
                    report.pse = Some(pse(
                        &beta_hat,
                        &raw.x,
                        &case.beta_star,
                        case.sigma,
                        &mut noise,
                    )?);
                    Ok(ReplicationMetrics {
                        replication: r,
                        method,
                        report,
                        beta_hat,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(settings.replications * methods.len());
    for rows in per_rep {
        out.extend(rows?);
    }
    Ok(out)
}

fn fit_case(
    data: &RegressionData,
    graph: &FusionGraph,
    method: Model,
    settings: &SimSettings,
    seed: u64,
) -> Result<Vec<f64>> {
    let r = auto_grid_search(
        data,
        graph,
        method,
        &settings.grid,
        &settings.pipeline,
        seed,
    )?;
    Ok(r.search.best.fit.beta_hat)
}

/// Mean and standard deviation (denominator `k - 1`; `None` for `k < 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: Option<f64>,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let sd = (values.len() > 1).then(|| {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)).sqrt()
        });
        Some(Self { mean, sd })
    }
}

/// One method's row of the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Model,
    pub mse: MeanSd,
    pub pse: Option<MeanSd>,
    pub p_z: Option<f64>,
    pub p_nz: Option<f64>,
    pub p_b: Option<f64>,
}

/// Average the replication metrics per method, in order of first
/// appearance.
pub fn summarize(rows: &[ReplicationMetrics]) -> Vec<SummaryRow> {
    let mut methods: Vec<Model> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let mean_of = |v: Vec<f64>| MeanSd::of(&v).map(|m| m.mean);
    methods
        .into_iter()
        .map(|m| {
            let sel: Vec<&MetricsReport> = rows
                .iter()
                .filter(|r| r.method == m)
                .map(|r| &r.report)
                .collect();
            SummaryRow {
                method: m,
                mse: MeanSd::of(&sel.iter().map(|r| r.mse).collect::<Vec<_>>()).expect("nonempty"),
                pse: MeanSd::of(&sel.iter().filter_map(|r| r.pse).collect::<Vec<_>>()),
                p_z: mean_of(sel.iter().filter_map(|r| r.p_z).collect()),
                p_nz: mean_of(sel.iter().filter_map(|r| r.p_nz).collect()),
                p_b: mean_of(sel.iter().filter_map(|r| r.p_b).collect()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
