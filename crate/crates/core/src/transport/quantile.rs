use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{check_aligned, reconstruction_error, summarize_atoms, FairProjection, FeatureMatrix, Method, TransportError};
use crate::sigma::AtomPartition;

/// Upper bound on the number of quantile levels in the common grid.
pub const QUANTILE_GRID_CAP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileDiagnostics {
    /// Number of levels `m` in the common quantile grid.
    pub grid_levels: u64,
    /// Whether `lcm(atom sizes)` exceeded [`QUANTILE_GRID_CAP`].
    pub capped: bool,
    /// Largest 2-Wasserstein distance between an atom's output law and the
    /// barycentric grid law. Zero when all atoms have equal size.
    pub max_law_deviation: f64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `lcm` of the sizes, or `None` once it exceeds `cap`.
fn capped_lcm(sizes: &[usize], cap: u64) -> Option<u64> {
    sizes.iter().try_fold(1u64, |acc, &s| {
        let s = s as u64;
        let l = (acc / gcd(acc, s)).checked_mul(s)?;
        (l <= cap).then_some(l)
    })
}

/// 2-Wasserstein distance between two empirical laws on the line, each
/// given as sorted samples with uniform weights. Exact: integrates the
/// squared difference of the two step quantile functions piece by piece.
pub(crate) fn w2_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as u64, b.len() as u64);
    let (mut i, mut j) = (0u64, 0u64);
    let mut prev = 0.0f64;
    let mut pieces = Vec::with_capacity(a.len() + b.len());
    while i < na && j < nb {
        // Next breakpoint is min((i+1)/na, (j+1)/nb), compared exactly.
        let lhs = (i + 1) * nb;
        let rhs = (j + 1) * na;
        let next = if lhs <= rhs {
            (i + 1) as f64 / na as f64
        } else {
            (j + 1) as f64 / nb as f64
        };
        let diff = a[i as usize] - b[j as usize];
        pieces.push((next - prev) * diff * diff);
        prev = next;
        if lhs <= rhs {
            i += 1;
        }
        if rhs <= lhs {
            j += 1;
        }
    }
    super::compensated_sum(pieces).sqrt()
}

/// Exact one-dimensional barycentric debiasing.
///
/// Each atom's values are sorted (ties by row index) and matched by rank to
/// the weighted average of the atoms' quantile functions, evaluated on the
/// grid `t_ℓ = (ℓ − ½)/m`, `m = lcm(atom sizes)` capped at
/// [`QUANTILE_GRID_CAP`]. A row of within-atom rank `r` receives the mean of
/// the barycentric quantiles at the levels inside `(r/n_g, (r+1)/n_g]`.
pub fn project_quantile_1d(x: &FeatureMatrix, partition: &AtomPartition) -> Result<FairProjection, TransportError> {
    if x.n_cols() != 1 {
        return Err(TransportError::NotOneDimensional(x.n_cols()));
    }
    check_aligned(x.n_rows(), partition)?;
    let n = x.n_rows();
    let col = x.values().column(0);

    let mut groups = partition.groups();
    if let Some(g) = groups.iter().position(Vec::is_empty) {
        return Err(TransportError::EmptyAtom(g));
    }
    for rows in &mut groups {
        rows.sort_by(|&p, &q| col[p].total_cmp(&col[q]).then(p.cmp(&q)));
    }
    let sizes: Vec<u64> = groups.iter().map(|g| g.len() as u64).collect();

    let exact = capped_lcm(partition.sizes(), QUANTILE_GRID_CAP);
    let m = exact.unwrap_or(QUANTILE_GRID_CAP);

    // q̄(t_ℓ) = Σ_g (n_g / N) · sorted_g[⌈t_ℓ n_g⌉ − 1]
    let grid: Vec<f64> = (1..=m)
        .map(|l| {
            super::compensated_sum(groups.iter().zip(&sizes).map(|(rows, &ng)| {
                let num = (2 * l - 1) * ng;
                let idx = num.div_ceil(2 * m) - 1;
                (ng as f64 / n as f64) * col[rows[idx as usize]]
            }))
        })
        .collect();

    let mut y = Array2::zeros((n, 1));
    for (rows, &ng) in groups.iter().zip(&sizes) {
        for (r, &row) in rows.iter().enumerate() {
            let r = r as u64;
            // Levels with 2m·r < (2ℓ−1)·n_g ≤ 2m(r+1).
            let levels: Vec<u64> = ((m * r / ng).max(1)..=m)
                .skip_while(|&l| (2 * l - 1) * ng <= 2 * m * r)
                .take_while(|&l| (2 * l - 1) * ng <= 2 * m * (r + 1))
                .collect();
            y[[row, 0]] = if levels.is_empty() {
                let t = (2 * r + 1) as f64 / (2 * ng) as f64;
                let l = ((t * m as f64 + 0.5).round() as u64).clamp(1, m);
                grid[(l - 1) as usize]
            } else {
                super::compensated_sum(levels.iter().map(|&l| grid[(l - 1) as usize])) / levels.len() as f64
            };
        }
    }

    let max_law_deviation = groups
        .iter()
        .map(|rows| {
            let mut law: Vec<f64> = rows.iter().map(|&i| y[[i, 0]]).collect();
            law.sort_by(f64::total_cmp);
            w2_sorted(&law, &grid)
        })
        .fold(0.0, f64::max);

    let reconstruction_error = reconstruction_error(x.values().view(), y.view())?;
    let per_atom_summary = summarize_atoms(&y, partition);
    Ok(FairProjection {
        y,
        method: Method::Quantile1d,
        plan: None,
        reconstruction_error,
        per_atom_summary,
        quantile: Some(QuantileDiagnostics {
            grid_levels: m,
            capped: exact.is_none(),
            max_law_deviation,
        }),
    })
}
