use super::LinearOperator;
use crate::error::{check_len, Error, Result};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from its columns, which must all have length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            check_len(rows, c.len())?;
            data.extend_from_slice(c);
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        check_len(rows * cols, values.len())?;
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = values[i * cols + j];
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Column `i` shared and column `j > i` mutable.
    pub fn col_pair_mut(&mut self, i: usize, j: usize) -> (&[f64], &mut [f64]) {
        assert!(i < j && j < self.cols);
        let rows = self.rows;
        let (head, tail) = self.data.split_at_mut(j * rows);
        (&head[i * rows..(i + 1) * rows], &mut tail[..rows])
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.cols).map(move |j| self.col(j))
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            super::axpy(xj, self.col(j), &mut y);
        }
        Ok(y)
    }

    /// `Aᵀ x`
    pub fn matvec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, x.len())?;
        Ok(self.columns().map(|c| super::dot(c, x)).collect())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            super::axpy(xj, self.col(j), y);
        }
    }
}

/// LU factorization with partial (row) pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
    min_pivot_ratio: f64,
    weakest_pivot: usize,
}

impl LuFactors {
    /// Factorizes a square matrix.
    ///
    /// Fails with [`Error::RankDeficient`] when the smallest pivot magnitude
    /// relative to the largest falls below `pivot_ratio_tol`.
    pub fn new(a: &DenseMatrix, pivot_ratio_tol: f64) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::InvalidArgument(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                perm.swap(k, p);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let pivot = lu[(k, k)];
            if pmax == 0.0 {
                continue;
            }
            for i in k + 1..n {
                lu[(i, k)] /= pivot;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj != 0.0 {
                    for i in k + 1..n {
                        let lik = lu[(i, k)];
                        lu[(i, j)] -= lik * ukj;
                    }
                }
            }
        }
        let diag: Vec<f64> = (0..n).map(|k| lu[(k, k)].abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let (weakest_pivot, min) = diag
            .iter()
            .cloned()
            .enumerate()
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        let min_pivot_ratio = if n == 0 {
            1.0
        } else if max > 0.0 {
            min / max
        } else {
            0.0
        };
        if min_pivot_ratio < pivot_ratio_tol || !min_pivot_ratio.is_finite() {
            return Err(Error::RankDeficient {
                columns: n,
                pivot: weakest_pivot,
                ratio: min_pivot_ratio,
            });
        }
        Ok(Self {
            lu,
            perm,
            min_pivot_ratio,
            weakest_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn min_pivot_ratio(&self) -> f64 {
        self.min_pivot_ratio
    }

    pub fn weakest_pivot(&self) -> usize {
        self.weakest_pivot
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len(n, b.len())?;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            for i in j + 1..n {
                x[i] -= self.lu[(i, j)] * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.lu[(j, j)];
            let xj = x[j];
            for i in 0..j {
                x[i] -= self.lu[(i, j)] * xj;
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_indefinite_system() {
        // symmetric indefinite saddle-like matrix needing pivoting
        let a = DenseMatrix::from_row_major(
            3,
            3,
            &[0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 2.0, 3.0, 1.0],
        )
        .unwrap();
        let lu = LuFactors::new(&a, 1e-12).unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let b = a.matvec(&x_true).unwrap();
        let x = lu.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn lu_detects_rank_deficiency() {
        let a = DenseMatrix::from_row_major(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        match LuFactors::new(&a, 1e-12) {
            Err(Error::RankDeficient { columns, .. }) => assert_eq!(columns, 2),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn empty_matrix_factorizes() {
        let lu = LuFactors::new(&DenseMatrix::zeros(0, 0), 1e-12).unwrap();
        assert!(lu.solve(&[]).unwrap().is_empty());
    }

    #[test]
    fn transpose_products() {
        let a = DenseMatrix::from_row_major(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(a.matvec(&[1.0, 0.0, -1.0]).unwrap(), vec![-2.0, -2.0]);
        assert_eq!(a.matvec_transpose(&[1.0, 1.0]).unwrap(), vec![5.0, 7.0, 9.0]);
        assert_eq!(a.transpose().transpose(), a);
    }
}
