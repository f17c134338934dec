use nalgebra::{DMatrix, DVector};

use crate::assembly::SaddleSystem;
use crate::error::{Error, Result};
use crate::types::SolutionVector;

/// Largest system the dense reference solver accepts.
pub const DIRECT_SOLVE_MAX_SIZE: usize = 5000;

/// Densifies the saddle system and solves it with a fully pivoted LU.
///
/// Intended as a reference for small problems; the cost is cubic in `N + l`.
pub fn direct_solve(system: &SaddleSystem) -> Result<SolutionVector> {
    direct_solve_with_rhs(system, system.rhs())
}

/// [`direct_solve`] for another right-hand side on the same operator.
pub fn direct_solve_with_rhs(system: &SaddleSystem, rhs: &[f64]) -> Result<SolutionVector> {
    let n = system.size();
    crate::error::check_len(n, rhs.len())?;
    if n > DIRECT_SOLVE_MAX_SIZE {
        return Err(Error::InvalidArgument(format!(
            "direct solve is limited to {DIRECT_SOLVE_MAX_SIZE} unknowns, system has {n}"
        )));
    }
    let dense = system.to_dense();
    let a = DMatrix::from_fn(n, n, |i, j| dense[i][j]);
    let b = DVector::from_column_slice(rhs);
    let lu = a.full_piv_lu();
    if !lu.is_invertible() {
        return Err(Error::Singular);
    }
    let x = lu.solve(&b).ok_or(Error::Singular)?;
    // full_piv_lu only flags exact zero pivots; catch numerically singular
    // systems through the solution itself.
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    system.split_solution(x.as_slice())
}
