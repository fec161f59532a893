//! The sparse fused algorithm.
//!
//! Starting from a posterior point estimate, each block of coefficients is in
//! turn offered three kinds of moves: stay, set to zero, or merge into an
//! adjacent block (taking that block's value). The move with the largest log
//! posterior `g` is committed immediately, and sweeps repeat until nothing
//! changes. The result has exact zeros and bitwise-equal fused values.

use std::f64::consts::PI;

use crate::data::{Design, RegressionData};
use crate::distributions::{neg_log_density, NegParams};
use crate::error::{ensure_positive, Error, Result};
use crate::gibbs::{Hyperparameters, Model};
use crate::graph::FusionGraph;

pub const MAX_SWEEPS: usize = 100;

/// Marginal prior on a standardized quantity `x = b / sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalePrior {
    /// `(rate / 2) exp(-rate |x|)`
    Laplace {
        rate: f64,
    },
    Neg(NegParams),
}

impl ScalePrior {
    pub fn log_density(&self, x: f64) -> f64 {
        match self {
            ScalePrior::Laplace { rate } => (0.5 * rate).ln() - rate * x.abs(),
            ScalePrior::Neg(p) => neg_log_density(x, p),
        }
    }
}

/// Priors on coefficients and, for fused models, on edge differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub node: ScalePrior,
    pub edge: Option<ScalePrior>,
}

impl PriorSpec {
    pub fn from_model(model: Model, hp: &Hyperparameters) -> Result<Self> {
        hp.validate(model)?;
        let l2 = hp.lambda2.unwrap_or(f64::NAN);
        let g2 = hp.gamma2.unwrap_or(f64::NAN);
        let laplace1 = ScalePrior::Laplace { rate: hp.lambda1 };
        Ok(match model {
            Model::Lasso => Self {
                node: laplace1,
                edge: None,
            },
            Model::Fused => Self {
                node: laplace1,
                edge: Some(ScalePrior::Laplace { rate: l2 }),
            },
            Model::NegLasso => Self {
                node: ScalePrior::Neg(NegParams::new(hp.lambda1, g2)?),
                edge: None,
            },
            Model::NegFused => Self {
                node: laplace1,
                edge: Some(ScalePrior::Neg(NegParams::new(l2, g2)?)),
            },
        })
    }
}

/// Block labels: `0` marks zeroed coefficients, equal nonzero labels mark a
/// fused block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAssignment {
    pub labels: Vec<usize>,
}

impl BlockAssignment {
    /// Every coefficient in its own block, labels `1..=p`.
    pub fn singletons(p: usize) -> Self {
        Self {
            labels: (1..=p).collect(),
        }
    }

    /// Check the labels against coefficient values.
    pub fn check(&self, beta: &[f64]) -> Result<()> {
        let p = beta.len();
        if self.labels.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {p} coefficients",
                self.labels.len()
            )));
        }
        let mut value: Vec<Option<u64>> = vec![None; p + 1];
        for (&l, &b) in self.labels.iter().zip(beta) {
            if l > p {
                return Err(Error::Internal(format!("label {l} exceeds {p}")));
            }
            if l == 0 && b != 0.0 {
                return Err(Error::Internal(format!("zero-labelled coefficient is {b}")));
            }
            match value[l] {
                None => value[l] = Some(b.to_bits()),
                Some(bits) if bits != b.to_bits() => {
                    return Err(Error::Internal(format!("block {l} holds unequal values")))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifiedFit {
    pub beta_hat: Vec<f64>,
    pub assignment: BlockAssignment,
    /// Final value of `g`.
    pub objective: f64,
    /// EBIC value, filled in by the selection step.
    pub ebic: Option<f64>,
    /// `g` after the start and after every committed move.
    pub trace: Vec<f64>,
    pub sweeps: usize,
    /// The sweep cap was reached while moves were still being made.
    pub truncated: bool,
}

/// Log posterior `g(beta, sigma2)`: Gaussian log likelihood, the
/// `(sigma2)^{-(p + |E|)/2}` scaling of the prior, and the log prior of each
/// `beta_j / sigma` and each edge difference over `sigma`.
pub fn objective_g(
    beta: &[f64],
    sigma2: f64,
    data: &RegressionData,
    prior: &PriorSpec,
    graph: &FusionGraph,
) -> f64 {
    let sigma = sigma2.sqrt();
    let edges = edges_for(prior, graph);
    let nodes = beta.iter().map(|b| prior.node.log_density(b / sigma));
    let edge_terms = edges.iter().map(|&(j, k)| {
        prior
            .edge
            .expect("edges only with an edge prior")
            .log_density((beta[j] - beta[k]) / sigma)
    });
    assemble(
        log_likelihood(beta, sigma2, data),
        scale_term(beta.len(), edges.len(), sigma2),
        nodes,
        edge_terms,
    )
}

/// Gaussian log likelihood at `(beta, sigma2)`.
pub fn log_likelihood(beta: &[f64], sigma2: f64, data: &RegressionData) -> f64 {
    let n = data.n() as f64;
    -0.5 * n * (2.0 * PI * sigma2).ln() - data.rss(beta) / (2.0 * sigma2)
}

fn scale_term(p: usize, edges: usize, sigma2: f64) -> f64 {
    -0.5 * (p + edges) as f64 * sigma2.ln()
}

fn edges_for<'g>(prior: &PriorSpec, graph: &'g FusionGraph) -> &'g [(usize, usize)] {
    if prior.edge.is_some() {
        graph.edges()
    } else {
        &[]
    }
}

/// The single summation order shared by [`objective_g`] and the cached
/// evaluation of committed points, so both give bitwise-identical values.
fn assemble(
    loglik: f64,
    scale: f64,
    nodes: impl Iterator<Item = f64>,
    edges: impl Iterator<Item = f64>,
) -> f64 {
    let mut prior = 0.0;
    for t in nodes {
        prior += t;
    }
    for t in edges {
        prior += t;
    }
    loglik + scale + prior
}

fn validate(
    beta: &[f64],
    sigma2: f64,
    data: &RegressionData,
    prior: &PriorSpec,
    graph: &FusionGraph,
) -> Result<()> {
    ensure_positive("sigma2", sigma2)?;
    if beta.len() != data.p() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} predictors",
            beta.len(),
            data.p()
        )));
    }
    if prior.edge.is_some() && graph.p() != data.p() {
        return Err(Error::DimensionMismatch(format!(
            "graph has {} nodes, data have {} predictors",
            graph.p(),
            data.p()
        )));
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidArgument(
            "point estimate is not finite".into(),
        ));
    }
    Ok(())
}

/// Workspace holding the cached terms of `g` at the current point, so a
/// candidate move is scored from the coefficients it touches.
struct Evaluator<'a> {
    data: &'a RegressionData,
    prior: &'a PriorSpec,
    graph: &'a FusionGraph,
    edges: &'a [(usize, usize)],
    sigma2: f64,
    sigma: f64,
    scale: f64,
    node_terms: Vec<f64>,
    edge_terms: Vec<f64>,
    /// Edge term at difference 0.
    zero_edge: f64,
    /// `y - X beta`
    residual: Vec<f64>,
    // candidate scratch
    shift: Vec<f64>,
    in_block: Vec<bool>,
    edge_seen: Vec<bool>,
    touched: Vec<usize>,
}

impl<'a> Evaluator<'a> {
    fn new(
        beta: &[f64],
        sigma2: f64,
        data: &'a RegressionData,
        prior: &'a PriorSpec,
        graph: &'a FusionGraph,
    ) -> Self {
        let edges = edges_for(prior, graph);
        let sigma = sigma2.sqrt();
        let mut ev = Self {
            data,
            prior,
            graph,
            edges,
            sigma2,
            sigma,
            scale: scale_term(beta.len(), edges.len(), sigma2),
            node_terms: vec![0.0; beta.len()],
            edge_terms: vec![0.0; edges.len()],
            zero_edge: prior.edge.map_or(0.0, |e| e.log_density(0.0)),
            residual: vec![0.0; data.n()],
            shift: vec![0.0; data.n()],
            in_block: vec![false; beta.len()],
            edge_seen: vec![false; edges.len()],
            touched: Vec::new(),
        };
        ev.refresh(beta);
        ev
    }

    fn refresh(&mut self, beta: &[f64]) {
        for (t, b) in self.node_terms.iter_mut().zip(beta) {
            *t = self.prior.node.log_density(b / self.sigma);
        }
        if let Some(edge) = self.prior.edge {
            for (t, &(j, k)) in self.edge_terms.iter_mut().zip(self.edges) {
                *t = edge.log_density((beta[j] - beta[k]) / self.sigma);
            }
        }
        self.refresh_residual(beta);
    }

    fn refresh_residual(&mut self, beta: &[f64]) {
        let y = self.data.y();
        match self.data.design() {
            Design::Identity => {
                for ((r, y), b) in self.residual.iter_mut().zip(y).zip(beta) {
                    *r = y - b;
                }
            }
            Design::Dense(x) => {
                for ((r, y), row) in self.residual.iter_mut().zip(y).zip(x.rows()) {
                    *r = y - row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
    }

    /// Update the cached terms after the coefficients in `block` changed.
    fn apply(&mut self, beta: &[f64], block: &[usize]) {
        for &j in block {
            self.node_terms[j] = self.prior.node.log_density(beta[j] / self.sigma);
        }
        if let Some(edge) = self.prior.edge {
            for &j in block {
                for &(k, e) in self.graph.neighbors(j) {
                    // an edge whose ends share a value before and after keeps its term
                    if beta[k] == beta[j] && self.edge_terms[e] == self.zero_edge {
                        continue;
                    }
                    let (a, b) = self.edges[e];
                    self.edge_terms[e] = edge.log_density((beta[a] - beta[b]) / self.sigma);
                }
            }
        }
        match self.data.design() {
            Design::Identity => {
                let y = self.data.y();
                for &j in block {
                    self.residual[j] = y[j] - beta[j];
                }
            }
            Design::Dense(_) => self.refresh_residual(beta),
        }
    }

    /// Exact `g` at `beta`, which must match the cached terms.
    fn current(&self, beta: &[f64]) -> f64 {
        assemble(
            log_likelihood(beta, self.sigma2, self.data),
            self.scale,
            self.node_terms.iter().copied(),
            self.edge_terms.iter().copied(),
        )
    }

    /// Change in `g` when every coefficient in `block` is set to `value`.
    fn delta(&mut self, beta: &[f64], block: &[usize], value: f64) -> f64 {
        let node_new = self.prior.node.log_density(value / self.sigma);
        let mut prior = 0.0;
        for &j in block {
            prior += node_new - self.node_terms[j];
            self.in_block[j] = true;
        }
        if let Some(edge) = self.prior.edge {
            for &j in block {
                for &(_, e) in self.graph.neighbors(j) {
                    if !self.edge_seen[e] {
                        self.edge_seen[e] = true;
                        self.touched.push(e);
                        let (a, b) = self.edges[e];
                        // edges inside the block stay at difference 0
                        let (ia, ib) = (self.in_block[a], self.in_block[b]);
                        if ia && ib {
                            continue;
                        }
                        let va = if ia { value } else { beta[a] };
                        let vb = if ib { value } else { beta[b] };
                        prior += edge.log_density((va - vb) / self.sigma) - self.edge_terms[e];
                    }
                }
            }
        }
        for &j in block {
            self.in_block[j] = false;
        }
        for e in self.touched.drain(..) {
            self.edge_seen[e] = false;
        }

        let mut rss = 0.0;
        match self.data.design() {
            Design::Identity => {
                for &j in block {
                    let r = self.residual[j];
                    let s = r - (value - beta[j]);
                    rss += s * s - r * r;
                }
            }
            Design::Dense(x) => {
                self.shift.fill(0.0);
                for &j in block {
                    let d = value - beta[j];
                    if d != 0.0 {
                        for (s, xi) in self.shift.iter_mut().zip(x.column(j)) {
                            *s += d * xi;
                        }
                    }
                }
                for (r, s) in self.residual.iter().zip(&self.shift) {
                    let t = r - s;
                    rss += t * t - r * r;
                }
            }
        }
        prior - rss / (2.0 * self.sigma2)
    }
}

/// Candidate move for one block.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Move {
    Stay,
    Zero,
    /// Merge into the block with this label.
    Fuse(usize),
}

/// One pass over block labels `1..=p` in order. Returns the updated fit and
/// whether any move was committed.
pub fn sfa_sweep(
    fit: &SparsifiedFit,
    data: &RegressionData,
    prior: &PriorSpec,
    graph: &FusionGraph,
    sigma2_hat: f64,
) -> Result<(SparsifiedFit, bool)> {
    validate(&fit.beta_hat, sigma2_hat, data, prior, graph)?;
    fit.assignment.check(&fit.beta_hat)?;
    let mut out = fit.clone();
    let mut ev = Evaluator::new(&out.beta_hat, sigma2_hat, data, prior, graph);
    let mut current = ev.current(&out.beta_hat);
    let changed = sweep_in_place(&mut out, &mut ev, &mut current);
    out.objective = current;
    out.sweeps += 1;
    Ok((out, changed))
}

fn sweep_in_place(fit: &mut SparsifiedFit, ev: &mut Evaluator<'_>, current: &mut f64) -> bool {
    let p = fit.beta_hat.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); p + 1];
    for (j, &l) in fit.assignment.labels.iter().enumerate() {
        members[l].push(j);
    }
    let mut changed = false;
    let mut targets: Vec<(usize, usize)> = Vec::new();

    for label in 1..=p {
        if members[label].is_empty() {
            continue;
        }
        let block = std::mem::take(&mut members[label]);
        let value = fit.beta_hat[block[0]];

        let mut best = (Move::Stay, 0.0);
        let mut consider = |mv: Move, d: f64| {
            if d > best.1 {
                best = (mv, d);
            }
        };
        if value != 0.0 {
            consider(Move::Zero, ev.delta(&fit.beta_hat, &block, 0.0));
        }
        if ev.prior.edge.is_some() {
            // adjacent nonzero blocks, ordered by their nearest node index
            targets.clear();
            for &j in &block {
                for &(k, _) in ev.graph.neighbors(j) {
                    let l = fit.assignment.labels[k];
                    if l != 0 && l != label {
                        match targets.iter_mut().find(|(tl, _)| *tl == l) {
                            Some(t) => t.1 = t.1.min(k),
                            None => targets.push((l, k)),
                        }
                    }
                }
            }
            targets.sort_by_key(|&(_, k)| k);
            for &(l, k) in &targets {
                let v = fit.beta_hat[k];
                consider(Move::Fuse(l), ev.delta(&fit.beta_hat, &block, v));
            }
        }

        let (new_label, new_value) = match best.0 {
            Move::Stay => {
                members[label] = block;
                continue;
            }
            Move::Zero => (0, 0.0),
            Move::Fuse(l) => (l, fit.beta_hat[members[l][0]]),
        };
        // the scored change is only a guide; commit on the exact objective
        for &j in &block {
            fit.beta_hat[j] = new_value;
        }
        ev.apply(&fit.beta_hat, &block);
        let g = ev.current(&fit.beta_hat);
        if g <= *current {
            for &j in &block {
                fit.beta_hat[j] = value;
            }
            ev.apply(&fit.beta_hat, &block);
            members[label] = block;
            continue;
        }
        for &j in &block {
            fit.assignment.labels[j] = new_label;
        }
        members[new_label].extend_from_slice(&block);
        *current = g;
        fit.trace.push(g);
        changed = true;
    }
    changed
}

/// Iterate [`sfa_sweep`] from singleton blocks until a sweep commits no move
/// or [`MAX_SWEEPS`] sweeps have run.
pub fn run_sfa(
    beta_hat: &[f64],
    sigma2_hat: f64,
    data: &RegressionData,
    prior: &PriorSpec,
    graph: &FusionGraph,
) -> Result<SparsifiedFit> {
    validate(beta_hat, sigma2_hat, data, prior, graph)?;
    let p = beta_hat.len();
    let mut fit = SparsifiedFit {
        beta_hat: beta_hat.to_vec(),
        assignment: BlockAssignment::singletons(p),
        objective: f64::NAN,
        ebic: None,
        trace: Vec::new(),
        sweeps: 0,
        truncated: false,
    };
    let mut ev = Evaluator::new(beta_hat, sigma2_hat, data, prior, graph);
    let mut current = ev.current(beta_hat);
    fit.trace.push(current);
    loop {
        let changed = sweep_in_place(&mut fit, &mut ev, &mut current);
        fit.sweeps += 1;
        if !changed {
            break;
        }
        if fit.sweeps == MAX_SWEEPS {
            fit.truncated = true;
            break;
        }
    }
    fit.objective = current;
    Ok(fit)
}
