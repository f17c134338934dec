//! Scattered-data interpolation with compactly supported radial basis
//! functions, solved by GCR with a pluggable coarse-space correction.
//!
//! The pieces, bottom up:
//!
//! * [`types`]: points, the Wendland C² basis, problems and solutions.
//! * [`linalg`]: CSR and dense matrices, the [`linalg::LinearOperator`] trait.
//! * [`grid`] and [`assembly`]: neighbor search and the saddle-point system.
//! * [`solvers`]: plain GCR, coarse-corrected GCR and a dense reference solver.
//! * [`coarse`]: the seven coarse basis families.
//! * [`imaging`]: raster I/O and per-channel image reconstruction.
//! * [`bench`]: the reconstruction and sweep drivers behind the `csrbf` binary.

pub mod assembly;
pub mod bench;
pub mod coarse;
pub mod error;
pub mod grid;
pub mod imaging;
pub mod linalg;
pub mod solvers;
pub mod types;

pub use error::{Error, Result};
pub use types::{BasisKind, InterpolationProblem, Point, RadialBasis, SolutionVector};
