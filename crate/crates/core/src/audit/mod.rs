//! Residual dependence between a representation and the bias σ-algebra.

mod gaps;
mod hsic;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sigma::AtomPartition;

pub use gaps::{conditional_gaps, ConditionalGapReport};
pub use hsic::{hsic_statistic, hsic_with_bandwidth, median_bandwidth, permutation_pvalue, HsicResult};

/// Permutation count used when none is given.
pub const DEFAULT_PERMUTATIONS: u32 = 999;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("HSIC needs at least 4 rows, got {0}")]
    TooFewRows(usize),
    #[error("at least 99 permutations are required, got {0}")]
    TooFewPermutations(u32),
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("kernel bandwidth must be finite and non-negative, got {0}")]
    Bandwidth(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub hsic: HsicResult,
    pub gaps: ConditionalGapReport,
    /// Fewer than two atoms: there is nothing to be dependent on.
    pub vacuous: bool,
}

/// HSIC permutation test plus conditional gaps of `y` against the atoms.
pub fn audit(
    y: ArrayView2<f64>,
    partition: &AtomPartition,
    permutations: u32,
    seed: u64,
) -> Result<AuditReport, AuditError> {
    let hsic = permutation_pvalue(y, partition.labels(), permutations, seed)?;
    let gaps = conditional_gaps(y, partition)?;
    Ok(AuditReport {
        hsic,
        gaps,
        vacuous: partition.n_atoms() < 2,
    })
}
