//! Generalized Conjugate Residual solvers, with and without coarse-space
//! correction, plus a dense direct solver used as a reference.

mod deflation;
mod direct;
mod gcr;

pub use deflation::{
    build_coarse_operator, coarse_initial_guess, deflated_gcr_solve, deflated_gcr_solve_monitored,
    project, CoarseOperator, GRAM_PIVOT_RATIO,
};
pub use direct::{direct_solve, direct_solve_with_rhs, DIRECT_SOLVE_MAX_SIZE};
pub use gcr::{gcr_solve, gcr_solve_monitored};

use crate::error::{Error, Result};

/// Stopping configuration shared by both GCR variants.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    tolerances: Vec<f64>,
    max_iter: usize,
    record_history: bool,
}

impl SolverConfig {
    /// `tolerances` are relative residual targets `‖r‖/‖b‖`; they must be
    /// strictly decreasing and lie in `(0, 1)`.
    pub fn new(tolerances: Vec<f64>, max_iter: usize) -> Result<Self> {
        if tolerances.is_empty() {
            return Err(Error::InvalidArgument("at least one tolerance is required".into()));
        }
        if let Some(t) = tolerances.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {t} is not in (0, 1)"
            )));
        }
        if tolerances.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be strictly decreasing: {tolerances:?}"
            )));
        }
        if max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        Ok(Self {
            tolerances,
            max_iter,
            record_history: true,
        })
    }

    pub fn with_history(mut self, record: bool) -> Self {
        self.record_history = record;
        self
    }

    pub fn tolerances(&self) -> &[f64] {
        &self.tolerances
    }

    /// The tightest tolerance, which stops the iteration.
    pub fn stop_tolerance(&self) -> f64 {
        *self.tolerances.last().unwrap()
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    pub fn record_history(&self) -> bool {
        self.record_history
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerances: vec![1e-3, 1e-6],
            max_iter: 2000,
            record_history: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceHit {
    pub tolerance: f64,
    /// First iteration whose recurrence residual met the tolerance.
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations_per_tol: Vec<ToleranceHit>,
    /// Iterations performed.
    pub iterations: usize,
    /// `‖r₀‖/‖b‖` after the (coarse) initial guess.
    pub initial_residual_ratio: f64,
    /// `‖r_k‖/‖b‖` of the recurrence residual for `k = 0..=iterations`;
    /// empty when history recording is off.
    pub residual_history: Vec<f64>,
    /// `‖b − A χ‖/‖b‖` recomputed from the final iterate.
    pub true_residual_ratio: f64,
    pub converged: bool,
    pub matvecs: usize,
}

impl SolveReport {
    pub fn iterations_at(&self, tolerance: f64) -> Option<usize> {
        self.iterations_per_tol
            .iter()
            .find(|h| h.tolerance == tolerance)
            .and_then(|h| h.iterations)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub chi: Vec<f64>,
    pub report: SolveReport,
}

/// Snapshot handed to solver monitors after initialization (`iteration == 0`)
/// and after every iteration.
pub struct IterationView<'a> {
    pub iteration: usize,
    pub chi: &'a [f64],
    pub residual: &'a [f64],
    /// Cached products `(A w)_i` of all search directions built so far.
    pub aw: &'a [Vec<f64>],
}

/// Bookkeeping shared by both solvers: history, tolerance crossings.
struct Tracker {
    b_norm: f64,
    hits: Vec<ToleranceHit>,
    history: Vec<f64>,
    record: bool,
}

impl Tracker {
    fn new(cfg: &SolverConfig, b_norm: f64) -> Self {
        Self {
            b_norm,
            hits: cfg
                .tolerances
                .iter()
                .map(|&tolerance| ToleranceHit {
                    tolerance,
                    iterations: None,
                })
                .collect(),
            history: Vec::new(),
            record: cfg.record_history,
        }
    }

    /// Records `‖r‖` at iteration `k`; returns the relative residual.
    fn observe(&mut self, k: usize, r_norm: f64, count_hits: bool) -> f64 {
        let ratio = r_norm / self.b_norm;
        if self.record {
            self.history.push(ratio);
        }
        if count_hits {
            for h in &mut self.hits {
                if h.iterations.is_none() && ratio <= h.tolerance {
                    h.iterations = Some(k);
                }
            }
        }
        ratio
    }

    fn finish(
        self,
        iterations: usize,
        initial_residual_ratio: f64,
        true_residual_ratio: f64,
        converged: bool,
        matvecs: usize,
    ) -> SolveReport {
        SolveReport {
            iterations_per_tol: self.hits,
            iterations,
            initial_residual_ratio,
            residual_history: self.history,
            true_residual_ratio,
            converged,
            matvecs,
        }
    }
}

fn check_rhs(n: usize, b: &[f64]) -> Result<f64> {
    crate::error::check_len(n, b.len())?;
    let b_norm = crate::linalg::norm2(b);
    if b_norm == 0.0 {
        return Err(Error::InvalidArgument("right-hand side is zero".into()));
    }
    if !b_norm.is_finite() {
        return Err(Error::InvalidArgument("right-hand side is not finite".into()));
    }
    Ok(b_norm)
}

/// Classical Gram-Schmidt step of both algorithms: makes `(w, Aw)` from a
/// fresh `(v, Av)` pair, A-conjugate to all stored directions.
fn orthogonalize(
    v: Vec<f64>,
    av: Vec<f64>,
    directions: &[Vec<f64>],
    a_directions: &[Vec<f64>],
    aw_norms2: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    use crate::linalg::{axpy, dot};
    let mut w = v;
    let mut aw = av.clone();
    for ((wi, awi), &nrm) in directions.iter().zip(a_directions).zip(aw_norms2) {
        let beta = -dot(&av, awi) / nrm;
        axpy(beta, wi, &mut w);
        axpy(beta, awi, &mut aw);
    }
    (w, aw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(vec![1e-3, 1e-6], 10).is_ok());
        assert!(SolverConfig::new(vec![1e-6, 1e-3], 10).is_err());
        assert!(SolverConfig::new(vec![1e-3, 1e-3], 10).is_err());
        assert!(SolverConfig::new(vec![1.0], 10).is_err());
        assert!(SolverConfig::new(vec![0.0], 10).is_err());
        assert!(SolverConfig::new(vec![], 10).is_err());
        assert!(SolverConfig::new(vec![1e-3], 0).is_err());
        assert_eq!(SolverConfig::default().tolerances(), &[1e-3, 1e-6]);
    }
}
