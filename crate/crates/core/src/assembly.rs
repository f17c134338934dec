//! Assembly of the CSRBF saddle-point system
//!
//! ```text
//! [ Φ   P ] [λ]   [f]
//! [ Pᵀ  0 ] [c] = [0]
//! ```
//!
//! with `Φᵢⱼ = φ(‖ξᵢ − ξⱼ‖)` stored sparsely and `Pᵢⱼ = pⱼ(ξᵢ)` for the
//! monomials `(1, x₁, …, x_d)`. The full block matrix is never formed.

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::grid::build_grid;
use crate::linalg::{DenseMatrix, LinearOperator, SparseMatrix};
use crate::types::{InterpolationProblem, Point, SolutionVector};

/// Sites closer than this are treated as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SaddleSystem {
    phi: SparseMatrix,
    poly: DenseMatrix,
    rhs: Vec<f64>,
}

impl SaddleSystem {
    pub fn phi_block(&self) -> &SparseMatrix {
        &self.phi
    }

    /// `N × l` polynomial block.
    pub fn poly_block(&self) -> &DenseMatrix {
        &self.poly
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn n_sites(&self) -> usize {
        self.phi.rows()
    }

    pub fn poly_len(&self) -> usize {
        self.poly.cols()
    }

    /// Size of the full system, `N + l`.
    pub fn size(&self) -> usize {
        self.n_sites() + self.poly_len()
    }

    /// Right-hand side `(values, 0)` for another channel on the same sites.
    pub fn rhs_for(&self, values: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_sites(), values.len())?;
        let mut b = values.to_vec();
        b.resize(self.size(), 0.0);
        Ok(b)
    }

    /// Returns `A x` for the block operator, checking the input length.
    pub fn apply_saddle(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), x.len())?;
        Ok(self.apply_vec(x))
    }

    pub fn split_solution(&self, chi: &[f64]) -> Result<SolutionVector> {
        SolutionVector::from_flat(chi, self.n_sites(), self.poly_len())
    }

    /// Row-major dense copy of the full `(N + l) × (N + l)` matrix.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n_sites();
        let l = self.poly_len();
        let mut a = vec![vec![0.0; n + l]; n + l];
        for (i, row) in self.phi.to_dense().into_iter().enumerate() {
            a[i][..n].copy_from_slice(&row);
        }
        for i in 0..n {
            for j in 0..l {
                a[i][n + j] = self.poly[(i, j)];
                a[n + j][i] = self.poly[(i, j)];
            }
        }
        a
    }
}

impl LinearOperator for SaddleSystem {
    fn dim(&self) -> usize {
        self.size()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n_sites();
        let (x_lambda, x_c) = x.split_at(n);
        let (y_top, y_bottom) = y.split_at_mut(n);
        self.phi.spmv_into(x_lambda, y_top);
        for (j, &cj) in x_c.iter().enumerate() {
            crate::linalg::axpy(cj, self.poly.col(j), y_top);
        }
        for (j, yj) in y_bottom.iter_mut().enumerate() {
            *yj = crate::linalg::dot(self.poly.col(j), x_lambda);
        }
    }
}

/// Monomial values `(1, x₁, …, x_d)` at `p`.
pub fn monomials(p: &Point) -> Vec<f64> {
    std::iter::once(1.0).chain(p.coords().iter().copied()).collect()
}

/// Assembles the saddle system for `problem`.
///
/// Rows of Φ are built in parallel from a grid neighbor scan; each row is
/// sorted by column so the result is independent of scheduling.
pub fn assemble(problem: &InterpolationProblem) -> Result<SaddleSystem> {
    let sites = problem.sites();
    let basis = problem.basis();
    let radius = basis.support_radius();
    let n = sites.len();
    let l = problem.poly_len();
    let grid = build_grid(sites, radius)?;

    let rows: Vec<Vec<(usize, f64)>> = sites
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = Vec::new();
            let mut duplicate = None;
            grid.for_each_within(sites, p, radius, |j, d| {
                if j != i && d < DUPLICATE_TOLERANCE {
                    duplicate.get_or_insert((i.min(j), i.max(j), d));
                }
                row.push((j, basis.eval(d)));
            });
            match duplicate {
                Some((first, second, distance)) => Err(Error::DuplicateSites {
                    first,
                    second,
                    distance,
                }),
                None => Ok(row),
            }
        })
        .collect::<Result<_>>()?;
    let phi = SparseMatrix::from_rows(n, rows)?;

    let poly = DenseMatrix::from_fn(n, l, |i, j| if j == 0 { 1.0 } else { sites[i].coord(j - 1) });

    let mut rhs = problem.values().to_vec();
    rhs.resize(n + l, 0.0);
    Ok(SaddleSystem { phi, poly, rhs })
}
