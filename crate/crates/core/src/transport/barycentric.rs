use ndarray::{Array2, ArrayView2};

use super::sinkhorn::{sinkhorn, SinkhornConfig};
use super::{
    check_aligned, conditional_means, reconstruction_error, summarize_atoms, FairProjection, FeatureMatrix, Method,
    TransportError,
};
use crate::sigma::AtomPartition;

/// `c_ij = ‖X_i − μ_j‖²`
fn cost_matrix(x: ArrayView2<f64>, means: ArrayView2<f64>) -> Array2<f64> {
    Array2::from_shape_fn((x.nrows(), means.nrows()), |(i, g)| {
        x.row(i)
            .iter()
            .zip(means.row(g))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    })
}

/// `0.05 × median(cost)`. Falls back to the mean cost, then to 1, when the
/// median is zero.
pub fn default_epsilon(cost: ArrayView2<f64>) -> f64 {
    let mut v: Vec<f64> = cost.iter().copied().collect();
    if v.is_empty() {
        return 1.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    let scale = if median > 0.0 {
        median
    } else {
        let mean = super::compensated_sum(v.iter().copied()) / n as f64;
        if mean > 0.0 {
            mean
        } else {
            return 1.0;
        }
    };
    0.05 * scale
}

/// Entropic OT from the rows of `X` to the atom means, then barycentric
/// projection normalized by each row's mass.
///
/// `epsilon = None` uses [`default_epsilon`] on the cost matrix.
pub fn project_algorithm1(
    x: &FeatureMatrix,
    partition: &AtomPartition,
    epsilon: Option<f64>,
) -> Result<FairProjection, TransportError> {
    project_algorithm1_inner(x, partition, |cost| SinkhornConfig::new(epsilon.unwrap_or_else(|| default_epsilon(cost))))
}

/// [`project_algorithm1`] with full control over the Sinkhorn settings.
pub fn project_algorithm1_with(
    x: &FeatureMatrix,
    partition: &AtomPartition,
    config: SinkhornConfig,
) -> Result<FairProjection, TransportError> {
    project_algorithm1_inner(x, partition, |_| config)
}

fn project_algorithm1_inner(
    x: &FeatureMatrix,
    partition: &AtomPartition,
    config: impl FnOnce(ArrayView2<f64>) -> SinkhornConfig,
) -> Result<FairProjection, TransportError> {
    check_aligned(x.n_rows(), partition)?;
    let means = conditional_means(x, partition)?;
    let cost = cost_matrix(x.values().view(), means.view());
    let config = config(cost.view());

    let n = x.n_rows();
    let a = vec![1.0 / n as f64; n];
    let b: Vec<f64> = partition.sizes().iter().map(|&s| s as f64 / n as f64).collect();
    let plan = sinkhorn(cost.view(), &a, &b, config)?;

    let d = x.n_cols();
    let mut y = Array2::zeros((n, d));
    for i in 0..n {
        let w = plan.coupling.row(i);
        let mass = super::compensated_sum(w.iter().copied());
        for j in 0..d {
            let s = super::compensated_sum(w.iter().zip(means.column(j)).map(|(p, m)| p * m));
            y[[i, j]] = s / mass;
        }
    }
    let reconstruction_error = reconstruction_error(x.values().view(), y.view())?;
    let per_atom_summary = summarize_atoms(&y, partition);
    Ok(FairProjection {
        y,
        method: Method::Algorithm1,
        plan: Some(plan),
        reconstruction_error,
        per_atom_summary,
        quantile: None,
    })
}
