//! Raster I/O and the reconstruction pipeline built on the solvers.

mod pipeline;
mod raster;

pub use pipeline::{
    evaluate_at, evaluate_interpolant, extract_problem, format_psnr, pixel_center, psnr,
    reconstruct, synthetic_pattern, CenterSelection, Reconstruction, ReconstructionOptions,
    SolverChoice,
};
pub use raster::{load_image, quantize, save_image, RasterImage};
