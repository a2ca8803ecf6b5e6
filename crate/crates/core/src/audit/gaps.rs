use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::AuditError;
use crate::sigma::AtomPartition;
use crate::transport::{compensated_sum, w2_sorted};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalGapReport {
    /// `max_g ‖mean(Y | g) − mean(Y)‖₂`
    pub max_mean_gap: f64,
    /// Largest 1-d 2-Wasserstein distance, over atoms and columns, between
    /// the conditional and the pooled empirical law.
    pub max_w2_gap_1d: f64,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Distances between each atom's conditional law of `y` and the pooled law.
///
/// The 1-d distances are exact for empirical laws: the quantile functions
/// are step functions, and their squared difference is integrated over the
/// merged breakpoints.
pub fn conditional_gaps(y: ArrayView2<f64>, partition: &AtomPartition) -> Result<ConditionalGapReport, AuditError> {
    let (n, d) = y.dim();
    if partition.n_rows() != n {
        return Err(AuditError::Shape(format!(
            "{n} rows but the partition covers {}",
            partition.n_rows()
        )));
    }
    if n == 0 {
        return Ok(ConditionalGapReport {
            max_mean_gap: 0.0,
            max_w2_gap_1d: 0.0,
        });
    }
    let groups = partition.groups();
    let pooled_mean: Vec<f64> = (0..d)
        .map(|j| compensated_sum(y.column(j).iter().copied()) / n as f64)
        .collect();
    let pooled_sorted: Vec<Vec<f64>> = (0..d).map(|j| sorted(y.column(j).to_vec())).collect();

    let mut max_mean_gap = 0.0f64;
    let mut max_w2_gap_1d = 0.0f64;
    for rows in groups.iter().filter(|r| !r.is_empty()) {
        let mut sq = Vec::with_capacity(d);
        for j in 0..d {
            let values: Vec<f64> = rows.iter().map(|&i| y[[i, j]]).collect();
            let mean = compensated_sum(values.iter().copied()) / rows.len() as f64;
            sq.push((mean - pooled_mean[j]) * (mean - pooled_mean[j]));
            max_w2_gap_1d = max_w2_gap_1d.max(w2_sorted(&sorted(values), &pooled_sorted[j]));
        }
        max_mean_gap = max_mean_gap.max(compensated_sum(sq).sqrt());
    }
    Ok(ConditionalGapReport {
        max_mean_gap,
        max_w2_gap_1d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_atom_has_no_gap() {
        let y = array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.0]];
        let r = conditional_gaps(y.view(), &AtomPartition::from_labels(&[0, 0, 0])).unwrap();
        assert_eq!(r.max_mean_gap, 0.0);
        assert_eq!(r.max_w2_gap_1d, 0.0);
    }

    #[test]
    fn equal_laws_have_zero_w2() {
        let y = array![[0.5], [0.5], [2.5], [2.5]];
        let r = conditional_gaps(y.view(), &AtomPartition::from_labels(&[0, 1, 0, 1])).unwrap();
        assert_eq!(r.max_w2_gap_1d, 0.0);
        assert_eq!(r.max_mean_gap, 0.0);
    }

    #[test]
    fn separated_atoms() {
        // Atom 0 = {0, 1}, atom 1 = {2, 3}; pooled quantiles 0,1,2,3 at quarters.
        // W2² for atom 0: ¼(0−0)² + ¼(0−1)² + ¼(1−2)² + ¼(1−3)² = 6/4.
        let y = array![[0.0], [1.0], [2.0], [3.0]];
        let r = conditional_gaps(y.view(), &AtomPartition::from_labels(&[0, 0, 1, 1])).unwrap();
        assert!((r.max_w2_gap_1d - 1.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.max_mean_gap, 1.0);
    }
}
