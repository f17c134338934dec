//! Coarse bases sampled at the data sites.
//!
//! Column `j` uses axis `a = j mod d` and frequency index `q = 1 + ⌊j/d⌋`,
//! evaluated on `t = site[a] ∈ [0, 1]` or the centered `u = 2t − 1`. Columns
//! act on the RBF weights only: the trailing `l` polynomial rows are zero.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, DenseMatrix};
use crate::types::Point;

/// Argument compression keeping the tangent family away from its poles.
pub const TANGENT_COMPRESSION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoarseBasisKind {
    Cosine,
    Sine,
    Tangent,
    Sinc,
    Exponential,
    Gaussian,
    Chebyshev,
}

impl CoarseBasisKind {
    pub const ALL: [CoarseBasisKind; 7] = [
        CoarseBasisKind::Cosine,
        CoarseBasisKind::Sine,
        CoarseBasisKind::Tangent,
        CoarseBasisKind::Sinc,
        CoarseBasisKind::Exponential,
        CoarseBasisKind::Gaussian,
        CoarseBasisKind::Chebyshev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoarseBasisKind::Cosine => "cosine",
            CoarseBasisKind::Sine => "sine",
            CoarseBasisKind::Tangent => "tangent",
            CoarseBasisKind::Sinc => "sinc",
            CoarseBasisKind::Exponential => "exponential",
            CoarseBasisKind::Gaussian => "gaussian",
            CoarseBasisKind::Chebyshev => "chebyshev",
        }
    }

    /// Generator value at coordinate `t ∈ [0, 1]` for frequency index `q ≥ 1`.
    pub fn generator(self, q: usize, t: f64) -> f64 {
        let qf = q as f64;
        let u = 2.0 * t - 1.0;
        match self {
            CoarseBasisKind::Cosine => (PI * qf * t).cos(),
            CoarseBasisKind::Sine => (PI * qf * t).sin(),
            CoarseBasisKind::Tangent => (PI * qf * (t - 0.5) * TANGENT_COMPRESSION).tan(),
            CoarseBasisKind::Sinc => sinc(qf * u),
            CoarseBasisKind::Exponential => (-qf * t).exp(),
            CoarseBasisKind::Gaussian => (-(qf * u).powi(2)).exp(),
            CoarseBasisKind::Chebyshev => chebyshev(q, u),
        }
    }
}

impl fmt::Display for CoarseBasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoarseBasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CoarseBasisKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown coarse basis '{s}'")))
    }
}

/// Normalized sinc, `sin(πz)/(πz)` with `sinc(0) = 1`.
pub fn sinc(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        let x = PI * z;
        x.sin() / x
    }
}

/// Chebyshev polynomial of the first kind by the three-term recurrence.
pub fn chebyshev(q: usize, u: f64) -> f64 {
    match q {
        0 => 1.0,
        _ => {
            let (mut prev, mut cur) = (1.0, u);
            for _ in 1..q {
                let next = 2.0 * u * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoarseSpace {
    kind: CoarseBasisKind,
    q: DenseMatrix,
}

impl CoarseSpace {
    pub fn kind(&self) -> CoarseBasisKind {
        self.kind
    }

    /// `(N + l) × m` column matrix.
    pub fn matrix(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn size(&self) -> usize {
        self.q.cols()
    }

    /// Replaces the columns by an orthonormal basis of their span using
    /// modified Gram-Schmidt with one reorthogonalization pass.
    pub fn orthonormalized(mut self) -> Result<Self> {
        let m = self.q.cols();
        for j in 0..m {
            let original = norm2(self.q.col(j));
            for _pass in 0..2 {
                for i in 0..j {
                    let (left, right) = self.q.col_pair_mut(i, j);
                    let h = dot(left, right);
                    axpy(-h, left, right);
                }
            }
            let col = self.q.col_mut(j);
            let nrm = norm2(col);
            if nrm.is_nan() || nrm <= 1e-12 * original {
                return Err(Error::RankDeficient {
                    columns: m,
                    pivot: j,
                    ratio: if original > 0.0 { nrm / original } else { 0.0 },
                });
            }
            col.iter_mut().for_each(|v| *v /= nrm);
        }
        Ok(self)
    }
}

/// Samples `m` coarse functions of family `kind` at `sites` and pads each
/// column with `poly_len` zero rows before normalizing it.
///
/// A column that samples to all zeros is left as zeros; the coarse operator
/// reports it as rank deficient.
pub fn build_coarse(
    kind: CoarseBasisKind,
    m: usize,
    sites: &[Point],
    poly_len: usize,
) -> Result<CoarseSpace> {
    let n = sites.len();
    if m > n {
        return Err(Error::InvalidArgument(format!(
            "coarse size {m} exceeds the number of sites {n}"
        )));
    }
    let d = sites.first().map_or(2, Point::dim);
    let mut q = DenseMatrix::zeros(n + poly_len, m);
    for j in 0..m {
        let axis = j % d;
        let freq = 1 + j / d;
        let col = q.col_mut(j);
        for (v, p) in col.iter_mut().zip(sites) {
            *v = kind.generator(freq, p.coord(axis));
        }
        let nrm = norm2(col);
        if nrm > 0.0 {
            col.iter_mut().for_each(|v| *v /= nrm);
        }
    }
    Ok(CoarseSpace { kind, q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in CoarseBasisKind::ALL {
            assert_eq!(k.name().parse::<CoarseBasisKind>().unwrap(), k);
        }
        assert_eq!("Sinc".parse::<CoarseBasisKind>().unwrap(), CoarseBasisKind::Sinc);
        assert!("wavelet".parse::<CoarseBasisKind>().is_err());
    }

    #[test]
    fn chebyshev_values() {
        assert_eq!(chebyshev(2, 0.5), -0.5);
        assert_eq!(chebyshev(0, 0.3), 1.0);
        assert_eq!(chebyshev(1, 0.3), 0.3);
        for q in 0..=16 {
            for i in 0..=200 {
                let u = -1.0 + i as f64 / 100.0;
                let closed = (q as f64 * u.clamp(-1.0, 1.0).acos()).cos();
                assert!((chebyshev(q, u) - closed).abs() < 1e-10, "q={q} u={u}");
            }
        }
    }

    #[test]
    fn sinc_near_zero() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(1e-6) - 1.0).abs() <= 1e-8);
        assert!(sinc(1.0).abs() < 1e-15);
    }

    #[test]
    fn raw_cosine_entry() {
        assert_eq!(CoarseBasisKind::Cosine.generator(1, 0.0), 1.0);
        let sites = [Point::new2(0.0, 0.5)];
        let c = build_coarse(CoarseBasisKind::Cosine, 1, &sites, 3).unwrap();
        // a single nonzero entry normalizes to itself
        assert_eq!(c.matrix().col(0), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn size_limits() {
        let sites = [Point::new2(0.1, 0.5), Point::new2(0.6, 0.2)];
        assert!(build_coarse(CoarseBasisKind::Sine, 3, &sites, 3).is_err());
        let empty = build_coarse(CoarseBasisKind::Sine, 0, &sites, 3).unwrap();
        assert_eq!(empty.size(), 0);
        assert_eq!(empty.matrix().rows(), 5);
    }

    #[test]
    fn orthonormalization() {
        let sites: Vec<Point> = (0..40)
            .map(|i| Point::new2((i as f64 + 0.5) / 40.0, ((i * 7 % 40) as f64 + 0.5) / 40.0))
            .collect();
        let c = build_coarse(CoarseBasisKind::Gaussian, 8, &sites, 3)
            .unwrap()
            .orthonormalized()
            .unwrap();
        let q = c.matrix();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(q.col(i), q.col(j)) - want).abs() < 1e-12);
            }
        }
    }
}
