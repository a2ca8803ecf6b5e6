use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AuditError;
use crate::transport::compensated_sum;

/// Replicates whose statistic is within this relative distance below the
/// observed value still count as "at least as extreme".
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsicResult {
    pub statistic: f64,
    pub p_value: f64,
    pub permutations: u32,
    pub seed: u64,
    /// Gaussian kernel bandwidth `σ` on the rows of `Y`.
    pub bandwidth: f64,
}

fn check_inputs(y: ArrayView2<f64>, labels: &[usize]) -> Result<(), AuditError> {
    if y.nrows() != labels.len() {
        return Err(AuditError::Shape(format!("{} rows but {} labels", y.nrows(), labels.len())));
    }
    if y.nrows() < 4 {
        return Err(AuditError::TooFewRows(y.nrows()));
    }
    if let Some(((row, col), _)) = y.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(AuditError::NonFinite { row, col });
    }
    Ok(())
}

fn squared_distances(y: ArrayView2<f64>) -> Array2<f64> {
    let n = y.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| {
        y.row(i).iter().zip(y.row(j)).map(|(a, b)| (a - b) * (a - b)).sum()
    })
}

fn median_of(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn bandwidth_from(d2: &Array2<f64>) -> f64 {
    let n = d2.nrows();
    let dists: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| d2[[i, j]].sqrt())
        .collect();
    let median = median_of(dists.clone());
    if median > 0.0 {
        return median;
    }
    let nonzero: Vec<f64> = dists.into_iter().filter(|&d| d > 0.0).collect();
    if nonzero.is_empty() {
        0.0
    } else {
        compensated_sum(nonzero.iter().copied()) / nonzero.len() as f64
    }
}

/// Median of the pairwise Euclidean distances between distinct rows
/// (`i < j`). When more than half the distances are zero, the mean of the
/// nonzero distances is used instead; 0 only when all rows coincide.
pub fn median_bandwidth(y: ArrayView2<f64>) -> f64 {
    bandwidth_from(&squared_distances(y))
}

/// Doubly centered Gaussian Gram matrix `H K H` with
/// `K_ij = exp(−‖y_i − y_j‖² / (2σ²))`.
fn centered_gram(d2: &Array2<f64>, sigma: f64) -> Array2<f64> {
    let n = d2.nrows();
    if sigma == 0.0 {
        // All rows coincide: K is constant and centers to zero.
        return Array2::zeros((n, n));
    }
    let k = d2.mapv(|v| (-v / (2.0 * sigma * sigma)).exp());
    let row_means: Vec<f64> = k.rows().into_iter().map(|r| compensated_sum(r.iter().copied()) / n as f64).collect();
    let grand = compensated_sum(row_means.iter().copied()) / n as f64;
    Array2::from_shape_fn((n, n), |(i, j)| k[[i, j]] - row_means[i] - row_means[j] + grand)
}

/// `(1/N²) Σ_{i,j : l_i = l_j} (HKH)_ij`, which equals `(1/N²) tr(HKH · HLH)`
/// for the delta kernel `L`. Summed in row-major order regardless of labels,
/// so relabeling leaves the result bit-identical.
fn statistic_from(kc: &Array2<f64>, labels: &[usize]) -> f64 {
    let n = labels.len();
    let s = compensated_sum(
        (0..n).flat_map(|i| (0..n).filter(move |&j| labels[i] == labels[j]).map(move |j| kc[[i, j]])),
    );
    (s / (n * n) as f64).max(0.0)
}

fn distinct_labels(labels: &[usize]) -> usize {
    let mut l = labels.to_vec();
    l.sort_unstable();
    l.dedup();
    l.len()
}

/// Biased HSIC between the rows of `y` and the atom labels, Gaussian kernel
/// with [`median_bandwidth`] on `y`, delta kernel on labels.
///
/// Returns 0 when fewer than two distinct labels are present.
pub fn hsic_statistic(y: ArrayView2<f64>, labels: &[usize]) -> Result<f64, AuditError> {
    check_inputs(y, labels)?;
    let d2 = squared_distances(y);
    let sigma = bandwidth_from(&d2);
    Ok(hsic_from_parts(&d2, sigma, labels))
}

/// [`hsic_statistic`] with a caller-chosen bandwidth.
pub fn hsic_with_bandwidth(y: ArrayView2<f64>, labels: &[usize], sigma: f64) -> Result<f64, AuditError> {
    check_inputs(y, labels)?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(AuditError::Bandwidth(sigma));
    }
    Ok(hsic_from_parts(&squared_distances(y), sigma, labels))
}

fn hsic_from_parts(d2: &Array2<f64>, sigma: f64, labels: &[usize]) -> f64 {
    if distinct_labels(labels) < 2 {
        return 0.0;
    }
    statistic_from(&centered_gram(d2, sigma), labels)
}

/// Label-permutation test for HSIC.
///
/// Replicate `r` shuffles the labels with `ChaCha8Rng::seed_from_u64(seed)`
/// on stream `r`, so results are identical however the replicates are
/// scheduled. `p = (1 + #{replicates ≥ observed}) / (permutations + 1)`.
pub fn permutation_pvalue(
    y: ArrayView2<f64>,
    labels: &[usize],
    permutations: u32,
    seed: u64,
) -> Result<HsicResult, AuditError> {
    check_inputs(y, labels)?;
    if permutations < 99 {
        return Err(AuditError::TooFewPermutations(permutations));
    }
    let d2 = squared_distances(y);
    let sigma = bandwidth_from(&d2);
    let vacuous = distinct_labels(labels) < 2;
    let kc = centered_gram(&d2, sigma);
    let observed = if vacuous { 0.0 } else { statistic_from(&kc, labels) };

    let exceed = if vacuous || observed == 0.0 {
        permutations as usize
    } else {
        let threshold = observed * (1.0 - TIE_TOLERANCE);
        let replicates: Vec<f64> = (0..permutations)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(u64::from(r));
                let mut shuffled = labels.to_vec();
                shuffled.shuffle(&mut rng);
                statistic_from(&kc, &shuffled)
            })
            .collect();
        replicates.iter().filter(|&&s| s >= threshold).count()
    };
    Ok(HsicResult {
        statistic: observed,
        p_value: (1 + exceed) as f64 / (permutations as f64 + 1.0),
        permutations,
        seed,
        bandwidth: sigma,
    })
}
