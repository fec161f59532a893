//! Fusion graphs and the latent-scale precision matrix.
//!
//! Coefficient `j` is node `j`; an edge `(j, k)` with `j < k` puts a fusion
//! penalty on `beta_j - beta_k`. Edges are always stored in lexicographic
//! order, and every per-edge vector in the crate (latent scales, mixing
//! variables) is aligned to that order.

use std::collections::BTreeSet;
use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// No fusion edges (plain lasso-type priors).
    Empty,
    Chain,
    /// Row-major `rows x cols` lattice with 4-neighbour edges.
    Grid {
        rows: usize,
        cols: usize,
    },
    /// All pairs.
    Complete,
    Custom,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Empty => write!(f, "empty"),
            GraphKind::Chain => write!(f, "chain"),
            GraphKind::Grid { rows, cols } => write!(f, "grid:{rows}x{cols}"),
            GraphKind::Complete => write!(f, "complete"),
            GraphKind::Custom => write!(f, "custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionGraph {
    p: usize,
    kind: GraphKind,
    edges: Vec<(usize, usize)>,
    /// Per node: (neighbour, edge index), sorted by neighbour.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl FusionGraph {
    fn from_sorted(p: usize, kind: GraphKind, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); p];
        for (e, &(j, k)) in edges.iter().enumerate() {
            adjacency[j].push((k, e));
            adjacency[k].push((j, e));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Self {
            p,
            kind,
            edges,
            adjacency,
        }
    }

    pub fn empty(p: usize) -> Self {
        Self::from_sorted(p, GraphKind::Empty, Vec::new())
    }

    pub fn chain(p: usize) -> Self {
        let edges = (1..p).map(|k| (k - 1, k)).collect();
        Self::from_sorted(p, GraphKind::Chain, edges)
    }

    /// Lattice over a row-major `rows x cols` image: node `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let p = rows * cols;
        let mut edges =
            Vec::with_capacity(rows * cols.saturating_sub(1) + rows.saturating_sub(1) * cols);
        for j in 0..p {
            let (r, c) = (j / cols, j % cols);
            if c + 1 < cols {
                edges.push((j, j + 1));
            }
            if r + 1 < rows {
                edges.push((j, j + cols));
            }
        }
        edges.sort_unstable();
        Self::from_sorted(p, GraphKind::Grid { rows, cols }, edges)
    }

    pub fn complete(p: usize) -> Self {
        let edges = (0..p)
            .flat_map(|j| (j + 1..p).map(move |k| (j, k)))
            .collect();
        Self::from_sorted(p, GraphKind::Complete, edges)
    }

    /// Arbitrary edge list; pairs are normalized to `(min, max)` and sorted.
    pub fn custom(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self loop at node {a}")));
            }
            if a >= p || b >= p {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {p} nodes"
                )));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Self::from_sorted(
            p,
            GraphKind::Custom,
            set.into_iter().collect(),
        ))
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, j: usize) -> &[(usize, usize)] {
        &self.adjacency[j]
    }

    /// `max |j - k|` over edges; 0 for an edgeless graph.
    pub fn bandwidth(&self) -> usize {
        self.edges.iter().map(|&(j, k)| k - j).max().unwrap_or(0)
    }
}

/// Node scales `tau2` (one per coefficient) and edge scales `ttau2` (one per
/// edge, in the graph's canonical edge order).
#[derive(Debug, Clone, PartialEq)]
pub struct LatentScales {
    pub tau2: Vec<f64>,
    pub ttau2: Vec<f64>,
}

impl LatentScales {
    pub fn ones(g: &FusionGraph) -> Self {
        Self {
            tau2: vec![1.0; g.p()],
            ttau2: vec![1.0; g.num_edges()],
        }
    }

    pub fn validate(&self, g: &FusionGraph) -> Result<()> {
        if self.tau2.len() != g.p() || self.ttau2.len() != g.num_edges() {
            return Err(Error::DimensionMismatch(format!(
                "scales have {} node and {} edge entries, graph has {} nodes and {} edges",
                self.tau2.len(),
                self.ttau2.len(),
                g.p(),
                g.num_edges()
            )));
        }
        if let Some(v) = self
            .tau2
            .iter()
            .chain(self.ttau2.iter())
            .find(|v| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "latent scales must be finite and positive, found {v}"
            )));
        }
        Ok(())
    }
}

/// Dense `Sigma_beta^{-1}`: diagonal `1/tau2_i + sum_{e ~ i} 1/ttau2_e`,
/// off-diagonal `-1/ttau2_e` for each edge.
pub fn build_precision(g: &FusionGraph, s: &LatentScales) -> Result<Array2<f64>> {
    s.validate(g)?;
    let p = g.p();
    let mut m = Array2::zeros((p, p));
    for (i, t) in s.tau2.iter().enumerate() {
        m[[i, i]] = 1.0 / t;
    }
    for (&(j, k), t) in g.edges().iter().zip(&s.ttau2) {
        let w = 1.0 / t;
        m[[j, j]] += w;
        m[[k, k]] += w;
        m[[j, k]] -= w;
        m[[k, j]] -= w;
    }
    Ok(m)
}
