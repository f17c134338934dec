//! Domain types shared by assembly, the solvers and the image pipeline.

use crate::error::{Error, Result};

/// A data site in normalized coordinates, `d` in {2, 3}.
///
/// Unused trailing coordinates are stored as zero so that distances can be
/// computed over all three slots regardless of the dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; 3],
    dim: u8,
}

impl Point {
    pub fn new2(x: f64, y: f64) -> Self {
        Self {
            coords: [x, y, 0.0],
            dim: 2,
        }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Self {
            coords: [x, y, z],
            dim: 3,
        }
    }

    /// Builds a point from a 2- or 3-element slice whose entries lie in `[0, 1]`.
    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        let p = match *coords {
            [x, y] => Self::new2(x, y),
            [x, y, z] => Self::new3(x, y, z),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "points must have 2 or 3 coordinates, got {}",
                    coords.len()
                )))
            }
        };
        p.check_normalized()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, axis: usize) -> f64 {
        self.coords[axis]
    }

    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        let dx = self.coords[0] - other.coords[0];
        let dy = self.coords[1] - other.coords[1];
        let dz = self.coords[2] - other.coords[2];
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    fn check_normalized(&self) -> Result<()> {
        if self.coords().iter().all(|c| (0.0..=1.0).contains(c)) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "point {:?} lies outside the unit cube",
                self.coords()
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Wendland's C² function `(1 - t)⁴₊ (4t + 1)`, positive definite for d ≤ 3.
    WendlandC2,
}

/// A compactly supported radial basis function scaled to a support radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBasis {
    kind: BasisKind,
    support_radius: f64,
}

impl RadialBasis {
    pub fn new(kind: BasisKind, support_radius: f64) -> Result<Self> {
        if !(support_radius.is_finite() && support_radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "support radius must be positive and finite, got {support_radius}"
            )));
        }
        Ok(Self {
            kind,
            support_radius,
        })
    }

    pub fn wendland_c2(support_radius: f64) -> Result<Self> {
        Self::new(BasisKind::WendlandC2, support_radius)
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Evaluates φ at distance `r`, rejecting negative or non-finite input.
    pub fn phi_eval(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "distance must be non-negative, got {r}"
            )));
        }
        Ok(self.eval(r))
    }

    /// Unchecked evaluation for hot loops; `r` is assumed non-negative.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let t = r / self.support_radius;
        match self.kind {
            BasisKind::WendlandC2 => {
                if t >= 1.0 {
                    0.0
                } else {
                    let s = 1.0 - t;
                    let s2 = s * s;
                    s2 * s2 * (4.0 * t + 1.0)
                }
            }
        }
    }
}

/// Scattered data to interpolate with a CSRBF plus a degree-one polynomial.
#[derive(Debug, Clone)]
pub struct InterpolationProblem {
    sites: Vec<Point>,
    values: Vec<f64>,
    basis: RadialBasis,
}

impl InterpolationProblem {
    /// Validates lengths, dimensions and coordinate ranges.
    ///
    /// Unisolvency (`N >= d + 1`, distinct sites) is not required here: small
    /// problems are useful for inspecting assembly, and duplicates are reported
    /// by [`crate::assembly::assemble`] with the offending pair.
    pub fn new(sites: Vec<Point>, values: Vec<f64>, basis: RadialBasis) -> Result<Self> {
        let Some(first) = sites.first() else {
            return Err(Error::InvalidArgument("problem has no data sites".into()));
        };
        let dim = first.dim();
        if let Some(p) = sites.iter().find(|p| p.dim() != dim) {
            return Err(Error::InvalidArgument(format!(
                "mixed dimensions: {} and {}",
                dim,
                p.dim()
            )));
        }
        for p in &sites {
            p.check_normalized()?;
        }
        if values.len() != sites.len() {
            return Err(Error::DimensionMismatch {
                expected: sites.len(),
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value {v}")));
        }
        Ok(Self {
            sites,
            values,
            basis,
        })
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn basis(&self) -> &RadialBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.sites[0].dim()
    }

    /// Number of polynomial unknowns, `d + 1`.
    pub fn poly_len(&self) -> usize {
        self.dim() + 1
    }

    /// Whether there are enough sites to determine the degree-one polynomial.
    pub fn is_unisolvent_size(&self) -> bool {
        self.len() > self.dim()
    }
}

/// Solution of the saddle system: RBF weights followed by polynomial coefficients
/// in the monomial order `(1, x₁, …, x_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionVector {
    pub lambda: Vec<f64>,
    pub c: Vec<f64>,
}

impl SolutionVector {
    /// Splits a flat `[λ; c]` vector of length `n_sites + poly_len`.
    pub fn from_flat(chi: &[f64], n_sites: usize, poly_len: usize) -> Result<Self> {
        crate::error::check_len(n_sites + poly_len, chi.len())?;
        Ok(Self {
            lambda: chi[..n_sites].to_vec(),
            c: chi[n_sites..].to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.lambda.len() + self.c.len());
        v.extend_from_slice(&self.lambda);
        v.extend_from_slice(&self.c);
        v
    }

    pub fn len(&self) -> usize {
        self.lambda.len() + self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
