//! Fair representations by optimal transport.
//!
//! Two constructions are provided:
//!
//! * [`project_algorithm1`]: entropic OT from the rows of `X` to the
//!   per-atom conditional means, followed by barycentric projection. Works in
//!   any dimension; independence from the atoms is measured afterwards, not
//!   guaranteed.
//! * [`project_quantile_1d`]: for a single feature, maps every atom's
//!   conditional law onto the Wasserstein barycenter of all conditional laws
//!   by rank matching. With equal atom sizes the within-atom laws of the
//!   output coincide exactly.

mod barycentric;
mod quantile;
mod sinkhorn;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sigma::AtomPartition;

pub use barycentric::{default_epsilon, project_algorithm1, project_algorithm1_with};
pub use quantile::{project_quantile_1d, QuantileDiagnostics, QUANTILE_GRID_CAP};
pub(crate) use quantile::w2_sorted;
pub use sinkhorn::{sinkhorn, SinkhornConfig, TransportPlan};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("feature matrix needs at least one row and one column")]
    EmptyFeatures,
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{which} marginal has a non-positive entry at {index}")]
    NonPositiveMarginal { which: &'static str, index: usize },
    #[error("{which} marginal sums to {sum}, not 1")]
    MarginalSum { which: &'static str, sum: f64 },
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("atom {0} is empty")]
    EmptyAtom(usize),
    #[error("quantile projection needs exactly one feature, got {0}")]
    NotOneDimensional(usize),
}

/// `N × d` real features aligned with dataset rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, values: Array2<f64>) -> Result<Self, TransportError> {
        let (n, d) = values.dim();
        if n == 0 || d == 0 {
            return Err(TransportError::EmptyFeatures);
        }
        if names.len() != d {
            return Err(TransportError::Shape(format!("{} names for {d} columns", names.len())));
        }
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(TransportError::NonFinite { row, col });
        }
        Ok(FeatureMatrix { names, values })
    }

    /// Columns named `x0`, `x1`, ...
    pub fn from_array(values: Array2<f64>) -> Result<Self, TransportError> {
        let names = (0..values.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(names, values)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "algorithm1")]
    Algorithm1,
    #[serde(rename = "quantile1d")]
    Quantile1d,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Algorithm1 => "algorithm1",
            Method::Quantile1d => "quantile1d",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "algorithm1" => Ok(Method::Algorithm1),
            "quantile1d" => Ok(Method::Quantile1d),
            other => Err(format!("unknown method {other:?} (expected algorithm1 or quantile1d)")),
        }
    }
}

/// Mean and population covariance of the output within one atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSummary {
    pub atom: usize,
    pub size: usize,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairProjection {
    pub y: Array2<f64>,
    pub method: Method,
    pub plan: Option<TransportPlan>,
    /// `‖X − Y‖²_F / N`
    pub reconstruction_error: f64,
    pub per_atom_summary: Vec<AtomSummary>,
    pub quantile: Option<QuantileDiagnostics>,
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_aligned(n: usize, partition: &AtomPartition) -> Result<(), TransportError> {
    if partition.n_rows() != n {
        return Err(TransportError::Shape(format!(
            "{n} feature rows but the partition covers {} rows",
            partition.n_rows()
        )));
    }
    Ok(())
}

/// Per-atom column means, `G × d`.
pub fn conditional_means(x: &FeatureMatrix, partition: &AtomPartition) -> Result<Array2<f64>, TransportError> {
    check_aligned(x.n_rows(), partition)?;
    let groups = partition.groups();
    let d = x.n_cols();
    let mut means = Array2::zeros((groups.len(), d));
    for (g, rows) in groups.iter().enumerate() {
        if rows.is_empty() {
            return Err(TransportError::EmptyAtom(g));
        }
        for j in 0..d {
            let s = compensated_sum(rows.iter().map(|&i| x.values[[i, j]]));
            means[[g, j]] = s / rows.len() as f64;
        }
    }
    Ok(means)
}

/// `‖X − Y‖²_F / N`
pub fn reconstruction_error(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64, TransportError> {
    if x.dim() != y.dim() {
        return Err(TransportError::Shape(format!("X is {:?} but Y is {:?}", x.dim(), y.dim())));
    }
    if x.nrows() == 0 {
        return Err(TransportError::EmptyFeatures);
    }
    let total = compensated_sum(x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)));
    Ok(total / x.nrows() as f64)
}

/// Cost of replacing every row by its atom's mean: `Σ_i ‖X_i − μ_{g(i)}‖² / N`.
pub fn conditional_mean_collapse_cost(x: &FeatureMatrix, partition: &AtomPartition) -> Result<f64, TransportError> {
    let means = conditional_means(x, partition)?;
    let collapsed = Array2::from_shape_fn(x.values.dim(), |(i, j)| means[[partition.atom_of(i), j]]);
    reconstruction_error(x.values.view(), collapsed.view())
}

/// Cost of replacing every row by the pooled mean (an output independent of every atom).
pub fn pooled_mean_collapse_cost(x: &FeatureMatrix) -> f64 {
    let n = x.n_rows() as f64;
    let means: Vec<f64> = x
        .values
        .columns()
        .into_iter()
        .map(|c| compensated_sum(c.iter().copied()) / n)
        .collect();
    compensated_sum(
        x.values
            .indexed_iter()
            .map(|((_, j), v)| (v - means[j]) * (v - means[j])),
    ) / n
}

pub(crate) fn summarize_atoms(y: &Array2<f64>, partition: &AtomPartition) -> Vec<AtomSummary> {
    let d = y.ncols();
    partition
        .groups()
        .into_iter()
        .enumerate()
        .map(|(atom, rows)| {
            let size = rows.len();
            let mean: Vec<f64> = (0..d)
                .map(|j| compensated_sum(rows.iter().map(|&i| y[[i, j]])) / size as f64)
                .collect();
            let covariance = (0..d)
                .map(|a| {
                    (0..d)
                        .map(|b| {
                            compensated_sum(rows.iter().map(|&i| (y[[i, a]] - mean[a]) * (y[[i, b]] - mean[b])))
                                / size as f64
                        })
                        .collect()
                })
                .collect();
            AtomSummary {
                atom,
                size,
                mean,
                covariance,
            }
        })
        .collect()
}
