//! Regression data and preprocessing.
//!
//! Regression problems are centered and standardized before fitting; the
//! [`Transform`] maps fitted coefficients back to the raw scale. Signal
//! approximation problems (identity design) are used as-is, since centering
//! would move the zero level the sparsity prior acts on.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How predictor columns are scaled after centering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// Each column scaled to `sum_i x_ij^2 = n`.
    #[default]
    PerColumn,
    /// All columns share one factor so that the average of `sum_i x_ij^2` is
    /// `n`. Exact ties between coefficients survive the back-transform.
    Pooled,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Dense(Array2<f64>),
    /// `X = I_n`.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    y: Array1<f64>,
    design: Design,
    p: usize,
}

/// Affine map between standardized and raw coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub y_mean: f64,
    pub x_means: Vec<f64>,
    pub x_scales: Vec<f64>,
}

impl Transform {
    /// Raw-scale slopes `beta_j / s_j`.
    pub fn coefficients_to_raw(&self, beta: &[f64]) -> Vec<f64> {
        beta.iter()
            .zip(&self.x_scales)
            .map(|(b, s)| b / s)
            .collect()
    }

    /// Raw-scale intercept matching [`Self::coefficients_to_raw`].
    pub fn intercept(&self, beta: &[f64]) -> f64 {
        self.y_mean
            - beta
                .iter()
                .zip(self.x_means.iter().zip(&self.x_scales))
                .map(|(b, (m, s))| b * m / s)
                .sum::<f64>()
    }

    /// Prediction for one raw predictor row.
    pub fn predict_raw(&self, beta: &[f64], x_raw: ArrayView1<f64>) -> f64 {
        self.y_mean
            + beta
                .iter()
                .zip(x_raw.iter())
                .zip(self.x_means.iter().zip(&self.x_scales))
                .map(|((b, x), (m, s))| b * (x - m) / s)
                .sum::<f64>()
    }
}

/// Center `y` and the columns of `X`, scale columns to `sum_i x_ij^2 = n`.
pub fn standardize(
    y_raw: &Array1<f64>,
    x_raw: &Array2<f64>,
) -> Result<(RegressionData, Transform)> {
    standardize_with(y_raw, x_raw, Scaling::PerColumn)
}

pub fn standardize_with(
    y_raw: &Array1<f64>,
    x_raw: &Array2<f64>,
    scaling: Scaling,
) -> Result<(RegressionData, Transform)> {
    let (n, p) = x_raw.dim();
    if y_raw.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "y has {} entries, X has {n} rows",
            y_raw.len()
        )));
    }
    if n < 2 || p == 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 observations and 1 predictor, got n={n}, p={p}"
        )));
    }
    if y_raw.iter().chain(x_raw.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "data contain non-finite values".into(),
        ));
    }

    let y_mean = y_raw.mean().expect("n >= 2");
    let y = y_raw.mapv(|v| v - y_mean);

    let x_means: Vec<f64> = x_raw.mean_axis(Axis(0)).expect("n >= 2").to_vec();
    let mut x = x_raw.clone();
    for (mut col, m) in x.columns_mut().into_iter().zip(&x_means) {
        col.mapv_inplace(|v| v - m);
    }
    let sq: Vec<f64> = x.columns().into_iter().map(|c| c.dot(&c)).collect();
    for (j, (s, m)) in sq.iter().zip(&x_means).enumerate() {
        // relative to the column's magnitude, so offsets do not mask constancy
        if *s <= 1e-24 * n as f64 * (1.0 + m * m) {
            return Err(Error::ZeroVarianceColumn { column: j });
        }
    }
    let x_scales: Vec<f64> = match scaling {
        Scaling::PerColumn => sq.iter().map(|s| (s / n as f64).sqrt()).collect(),
        Scaling::Pooled => {
            let pooled = (sq.iter().sum::<f64>() / (n * p) as f64).sqrt();
            vec![pooled; p]
        }
    };
    for (mut col, s) in x.columns_mut().into_iter().zip(&x_scales) {
        col.mapv_inplace(|v| v / s);
    }

    Ok((
        RegressionData {
            y,
            design: Design::Dense(x),
            p,
        },
        Transform {
            y_mean,
            x_means,
            x_scales,
        },
    ))
}

impl RegressionData {
    /// Data used as-is with a dense design.
    pub fn new(y: Array1<f64>, x: Array2<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "y has {} entries, X has {} rows",
                y.len(),
                x.nrows()
            )));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "data contain non-finite values".into(),
            ));
        }
        let p = x.ncols();
        Ok(Self {
            y,
            design: Design::Dense(x),
            p,
        })
    }

    /// Signal approximation: `y = beta + noise`.
    pub fn identity(y: Array1<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidArgument("empty signal".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "signal contains non-finite values".into(),
            ));
        }
        let p = y.len();
        Ok(Self {
            y,
            design: Design::Identity,
            p,
        })
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.design, Design::Identity)
    }

    pub fn xty(&self) -> Vec<f64> {
        match &self.design {
            Design::Dense(x) => x.t().dot(&self.y).to_vec(),
            Design::Identity => self.y.to_vec(),
        }
    }

    /// Dense `X^T X`; `None` for the identity design.
    pub fn xtx(&self) -> Option<Array2<f64>> {
        match &self.design {
            Design::Dense(x) => Some(x.t().dot(x)),
            Design::Identity => None,
        }
    }

    /// Residual sum of squares `||y - X beta||^2`.
    pub fn rss(&self, beta: &[f64]) -> f64 {
        match &self.design {
            Design::Identity => self
                .y
                .iter()
                .zip(beta)
                .map(|(y, b)| (y - b) * (y - b))
                .sum(),
            Design::Dense(x) => x
                .rows()
                .into_iter()
                .zip(self.y.iter())
                .map(|(row, y)| {
                    let fit: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
                    (y - fit) * (y - fit)
                })
                .sum(),
        }
    }

    /// Sample variance of `y` (denominator `n - 1`, or 0 when `n == 1`).
    pub fn y_variance(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let m = self.y.mean().unwrap_or(0.0);
        self.y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
    }
}
