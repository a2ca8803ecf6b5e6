//! Log-domain Sinkhorn iterations for entropic optimal transport.
//!
//! Solves `min_π ⟨π, C⟩ + ε Σ π_ij (ln π_ij − 1)` over couplings with row
//! sums `a` and column sums `b`. The plan is represented through dual
//! potentials `f`, `g` as `π_ij = exp((f_i + g_j − C_ij) / ε)`, and every
//! update is a log-sum-exp, so small `ε` never underflows.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView2};

use super::TransportError;

const MARGINAL_SUM_TOLERANCE: f64 = 1e-12;
const SWEEPS_BEFORE_NEWTON: usize = 200;
/// Newton steps factor an `(m−1)²` Hessian; beyond this many columns the
/// solver stays with plain sweeps.
const NEWTON_MAX_COLUMNS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornConfig {
    pub epsilon: f64,
    /// Target max-norm deviation of the plan's marginals.
    pub tol: f64,
    pub max_iter: usize,
}

impl SinkhornConfig {
    pub fn new(epsilon: f64) -> Self {
        SinkhornConfig {
            epsilon,
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub coupling: Array2<f64>,
    pub row_marginal: Array1<f64>,
    pub col_marginal: Array1<f64>,
    pub epsilon: f64,
    /// Sinkhorn sweeps, including warm-up sweeps at larger `ε`.
    pub iterations: usize,
    /// Max-norm deviation of the coupling's row and column sums from the targets.
    pub marginal_residual: f64,
    pub converged: bool,
    /// Dual objective after each sweep at the target `ε`. Sinkhorn is block
    /// coordinate ascent on this concave function, so the sequence is
    /// non-decreasing and its gap to the entropic optimum never grows.
    pub dual_objective: Vec<f64>,
}

impl TransportPlan {
    /// `⟨π, C⟩`
    pub fn transport_cost(&self, cost: ArrayView2<f64>) -> f64 {
        super::compensated_sum(self.coupling.iter().zip(cost.iter()).map(|(p, c)| p * c))
    }

    /// `⟨π, C⟩ + ε Σ π (ln π − 1)`
    pub fn entropic_objective(&self, cost: ArrayView2<f64>) -> f64 {
        let entropy = super::compensated_sum(
            self.coupling
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| p * (p.ln() - 1.0)),
        );
        self.transport_cost(cost) + self.epsilon * entropy
    }
}

fn check_marginal(which: &'static str, m: &[f64]) -> Result<(), TransportError> {
    if let Some(index) = m.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(TransportError::NonPositiveMarginal { which, index });
    }
    let sum = super::compensated_sum(m.iter().copied());
    if (sum - 1.0).abs() > MARGINAL_SUM_TOLERANCE {
        return Err(TransportError::MarginalSum { which, sum });
    }
    Ok(())
}

/// `ln Σ_k exp(v_k)` with the max factored out.
fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = values.map(|v| (v - max).exp()).sum();
    max + s.ln()
}

struct Potentials<'a> {
    cost: ArrayView2<'a, f64>,
    log_a: Vec<f64>,
    log_b: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl Potentials<'_> {
    fn sweep(&mut self, eps: f64) {
        let (n, m) = self.cost.dim();
        for i in 0..n {
            let row = self.cost.row(i);
            let g = &self.g;
            let lse = log_sum_exp((0..m).map(|j| (g[j] - row[j]) / eps));
            self.f[i] = eps * (self.log_a[i] - lse);
        }
        for j in 0..m {
            let col = self.cost.column(j);
            let f = &self.f;
            let lse = log_sum_exp((0..n).map(|i| (f[i] - col[i]) / eps));
            self.g[j] = eps * (self.log_b[j] - lse);
        }
    }

    /// Row update only: makes every row sum exact.
    fn update_rows(&mut self, eps: f64) {
        let m = self.g.len();
        for i in 0..self.f.len() {
            let row = self.cost.row(i);
            let g = &self.g;
            let lse = log_sum_exp((0..m).map(|j| (g[j] - row[j]) / eps));
            self.f[i] = eps * (self.log_a[i] - lse);
        }
    }

    /// Column-sum deviation; row sums are exact after [`Self::update_rows`].
    fn col_residual(&self, eps: f64, b: &[f64]) -> f64 {
        self.coupling(eps)
            .columns()
            .into_iter()
            .zip(b)
            .map(|(c, b)| (c.sum() - b).abs())
            .fold(0.0, f64::max)
    }

    /// One damped Newton ascent step on the semi-dual `g ↦ D(f(g), g)`,
    /// with `g_0` pinned to remove the shift invariance. Returns `false`
    /// when no step length improves the objective or the residual.
    fn newton_step(&mut self, eps: f64, a: &[f64], b: &[f64]) -> bool {
        let m = self.g.len();
        let p = self.coupling(eps);
        let s: Vec<f64> = p.columns().into_iter().map(|c| c.sum()).collect();
        let k = m - 1;
        // Negated Hessian: Σ_i a_i (diag(q_i) − q_i q_iᵀ) / ε with q_i = π_i / a_i.
        // Each diagonal entry uses 1 − q_u = Σ_{v≠u} q_v to avoid cancellation.
        let mut h = DMatrix::<f64>::zeros(k, k);
        for (i, row) in p.rows().into_iter().enumerate() {
            let total: f64 = row.sum();
            for u in 1..m {
                if row[u] == 0.0 {
                    continue;
                }
                let q = row[u] / a[i];
                h[(u - 1, u - 1)] += row[u] * (total - row[u]) / a[i];
                for v in 1..m {
                    if v != u {
                        h[(u - 1, v - 1)] -= q * row[v];
                    }
                }
            }
        }
        h /= eps;
        let grad = DVector::from_iterator(k, (1..m).map(|j| b[j] - s[j]));
        // At small ε the support of the plan can split into blocks, leaving
        // the Hessian singular; escalate a ridge until it factors.
        let scale = h.trace().max(f64::MIN_POSITIVE);
        let mut ridge = 1e-14 * scale;
        let chol = loop {
            let mut damped = h.clone();
            for u in 0..k {
                damped[(u, u)] += ridge;
            }
            if let Some(chol) = damped.cholesky() {
                break chol;
            }
            ridge *= 100.0;
            if ridge > scale {
                return false;
            }
        };
        let step = chol.solve(&grad);

        let current = self.dual(eps, a, b);
        let residual = grad.amax();
        // Near the optimum the dual gain drops below f64 resolution, so a
        // step that holds the dual within roundoff and lowers the residual
        // is also accepted.
        let slack = 64.0 * f64::EPSILON * current.abs().max(eps);
        let (f0, g0) = (self.f.clone(), self.g.clone());
        let mut t = 1.0;
        while t > 1e-12 {
            for j in 1..m {
                self.g[j] = g0[j] + t * step[j - 1];
            }
            self.update_rows(eps);
            let next = self.dual(eps, a, b);
            if next > current || (next >= current - slack && self.col_residual(eps, b) < residual) {
                return true;
            }
            t *= 0.5;
        }
        self.f = f0;
        self.g = g0;
        false
    }

    fn coupling(&self, eps: f64) -> Array2<f64> {
        Array2::from_shape_fn(self.cost.dim(), |(i, j)| ((self.f[i] + self.g[j] - self.cost[[i, j]]) / eps).exp())
    }

    /// Row-sum deviation; column sums are exact right after a sweep.
    fn row_residual(&self, eps: f64, a: &[f64]) -> f64 {
        let (n, m) = self.cost.dim();
        (0..n)
            .map(|i| {
                let s: f64 = (0..m)
                    .map(|j| ((self.f[i] + self.g[j] - self.cost[[i, j]]) / eps).exp())
                    .sum();
                (s - a[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Valid whenever the last update made either all rows or all columns
    /// exact: then `Σ π = 1` and the exponential term is just `−ε`.
    fn dual(&self, eps: f64, a: &[f64], b: &[f64]) -> f64 {
        -eps + super::compensated_sum(
            self.f
                .iter()
                .zip(a)
                .map(|(f, a)| f * a)
                .chain(self.g.iter().zip(b).map(|(g, b)| g * b)),
        )
    }
}

/// Entropic optimal transport plan between `row_marginal` and `col_marginal`.
///
/// When `ε` is small relative to the cost range, the potentials are first
/// warmed up along a geometric schedule of larger `ε` values; the returned
/// plan is always the solution for the requested `ε`. Hitting `max_iter` is
/// not an error: the plan comes back with `converged = false` and its residual.
pub fn sinkhorn(
    cost: ArrayView2<f64>,
    row_marginal: &[f64],
    col_marginal: &[f64],
    config: SinkhornConfig,
) -> Result<TransportPlan, TransportError> {
    let (n, m) = cost.dim();
    if n != row_marginal.len() || m != col_marginal.len() {
        return Err(TransportError::Shape(format!(
            "cost is {n}×{m} but marginals have lengths {} and {}",
            row_marginal.len(),
            col_marginal.len()
        )));
    }
    if n == 0 || m == 0 {
        return Err(TransportError::Shape("empty cost matrix".into()));
    }
    if let Some(((row, col), _)) = cost.indexed_iter().find(|(_, c)| !c.is_finite()) {
        return Err(TransportError::NonFinite { row, col });
    }
    let eps = config.epsilon;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(TransportError::InvalidEpsilon(eps));
    }
    check_marginal("row", row_marginal)?;
    check_marginal("column", col_marginal)?;

    let mut pot = Potentials {
        cost,
        log_a: row_marginal.iter().map(|v| v.ln()).collect(),
        log_b: col_marginal.iter().map(|v| v.ln()).collect(),
        f: vec![0.0; n],
        g: vec![0.0; m],
    };

    let spread = cost.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - cost.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let mut iterations = 0usize;
    let mut stage_eps = spread;
    if stage_eps > 10.0 * eps {
        // Warm start: ε-scaling by factors of 4 with a loose per-stage tolerance.
        while stage_eps > 4.0 * eps && iterations < config.max_iter {
            let budget = (config.max_iter / 20).max(1);
            for _ in 0..budget {
                pot.sweep(stage_eps);
                iterations += 1;
                if pot.row_residual(stage_eps, row_marginal) <= 1e-3 {
                    break;
                }
            }
            stage_eps /= 4.0;
        }
    }

    let mut dual_objective = Vec::new();
    let mut residual = f64::INFINITY;
    let mut sweeps = 0usize;
    let mut newton = false;
    while iterations < config.max_iter {
        if newton && pot.newton_step(eps, row_marginal, col_marginal) {
            residual = pot.col_residual(eps, col_marginal);
        } else if newton {
            // A stalled Newton step falls back to one ordinary sweep.
            pot.sweep(eps);
            residual = pot.row_residual(eps, row_marginal);
        } else {
            pot.sweep(eps);
            sweeps += 1;
            residual = pot.row_residual(eps, row_marginal);
            if residual > config.tol && sweeps >= SWEEPS_BEFORE_NEWTON && (2..=NEWTON_MAX_COLUMNS).contains(&m) {
                // Sinkhorn's linear rate degrades like exp(−range(C)/ε); finish
                // with second-order steps, which keep the dual monotone.
                newton = true;
            }
        }
        iterations += 1;
        dual_objective.push(pot.dual(eps, row_marginal, col_marginal));
        if residual <= config.tol {
            break;
        }
    }

    let coupling = pot.coupling(eps);
    let rows_dev = coupling
        .rows()
        .into_iter()
        .zip(row_marginal)
        .map(|(r, a)| (r.sum() - a).abs())
        .fold(0.0, f64::max);
    let cols_dev = coupling
        .columns()
        .into_iter()
        .zip(col_marginal)
        .map(|(c, b)| (c.sum() - b).abs())
        .fold(0.0, f64::max);
    let marginal_residual = rows_dev.max(cols_dev);
    Ok(TransportPlan {
        coupling,
        row_marginal: Array1::from(row_marginal.to_vec()),
        col_marginal: Array1::from(col_marginal.to_vec()),
        epsilon: eps,
        iterations,
        marginal_residual,
        converged: residual <= config.tol && marginal_residual <= config.tol,
        dual_objective,
    })
}
