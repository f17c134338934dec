//! Image reconstruction: pixels to interpolation problems, solve per channel,
//! evaluate the interpolant back onto the pixel grid.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::RasterImage;
use crate::assembly::assemble;
use crate::coarse::{build_coarse, CoarseBasisKind};
use crate::error::{Error, Result};
use crate::grid::build_grid;
use crate::solvers::{
    build_coarse_operator, deflated_gcr_solve_monitored, direct_solve_with_rhs, gcr_solve, SolveReport,
    SolverConfig,
};
use crate::types::{InterpolationProblem, Point, RadialBasis, SolutionVector};

/// How pixels are chosen as RBF centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenterSelection {
    /// Every `k`-th pixel along both axes, starting at the top-left pixel.
    Stride(usize),
    /// Exactly `⌊fraction · pixels⌋` distinct pixels drawn with a seeded ChaCha8 RNG.
    Random { fraction: f64, seed: u64 },
    All,
}

impl CenterSelection {
    /// Selected pixel positions `(col, row)` in row-major order.
    pub fn select(&self, width: usize, height: usize) -> Result<Vec<(usize, usize)>> {
        match *self {
            CenterSelection::All => Ok((0..height)
                .flat_map(|r| (0..width).map(move |c| (c, r)))
                .collect()),
            CenterSelection::Stride(k) => {
                if k == 0 {
                    return Err(Error::InvalidArgument("stride must be positive".into()));
                }
                Ok((0..height)
                    .step_by(k)
                    .flat_map(|r| (0..width).step_by(k).map(move |c| (c, r)))
                    .collect())
            }
            CenterSelection::Random { fraction, seed } => {
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "random fraction must lie in (0, 1], got {fraction}"
                    )));
                }
                let total = width * height;
                let count = (fraction * total as f64).floor() as usize;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut picked = rand::seq::index::sample(&mut rng, total, count).into_vec();
                picked.sort_unstable();
                Ok(picked.into_iter().map(|i| (i % width, i / width)).collect())
            }
        }
    }
}

impl fmt::Display for CenterSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CenterSelection::Stride(k) => write!(f, "stride:{k}"),
            CenterSelection::Random { fraction, seed } => write!(f, "random:{fraction}:{seed}"),
            CenterSelection::All => f.write_str("all"),
        }
    }
}

impl FromStr for CenterSelection {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form: `all`, `stride:K`,
    /// `random:FRACTION:SEED`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("invalid center selection '{s}'"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["all"] => Ok(CenterSelection::All),
            ["stride", k] => Ok(CenterSelection::Stride(k.parse().map_err(|_| bad())?)),
            ["random", f, seed] => Ok(CenterSelection::Random {
                fraction: f.parse().map_err(|_| bad())?,
                seed: seed.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Normalized pixel-center coordinates `((col + ½)/width, (row + ½)/height)`.
pub fn pixel_center(col: usize, row: usize, width: usize, height: usize) -> Point {
    Point::new2(
        (col as f64 + 0.5) / width as f64,
        (row as f64 + 0.5) / height as f64,
    )
}

/// Builds the interpolation problem for one channel of `img`.
pub fn extract_problem(
    img: &RasterImage,
    channel: usize,
    selection: CenterSelection,
    basis: RadialBasis,
) -> Result<InterpolationProblem> {
    if channel >= img.channels() {
        return Err(Error::InvalidArgument(format!(
            "channel {channel} out of range for a {}-channel image",
            img.channels()
        )));
    }
    let (w, h) = (img.width(), img.height());
    let pixels = selection.select(w, h)?;
    if pixels.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "selection {selection} yields {} centers; at least 3 are needed",
            pixels.len()
        )));
    }
    let sites = pixels.iter().map(|&(c, r)| pixel_center(c, r, w, h)).collect();
    let values = pixels
        .iter()
        .map(|&(c, r)| img.pixel(c, r, channel))
        .collect();
    InterpolationProblem::new(sites, values, basis)
}

/// Evaluates `s(x) = p(x) + Σ λᵢ φ(‖x − ξᵢ‖)` at arbitrary points, unclamped.
pub fn evaluate_at(
    problem: &InterpolationProblem,
    chi: &SolutionVector,
    points: &[Point],
) -> Result<Vec<f64>> {
    crate::error::check_len(problem.len(), chi.lambda.len())?;
    crate::error::check_len(problem.poly_len(), chi.c.len())?;
    let sites = problem.sites();
    let basis = problem.basis();
    let radius = basis.support_radius();
    let grid = build_grid(sites, radius)?;
    Ok(points
        .par_iter()
        .map(|x| {
            let mut s = chi.c[0];
            for (a, ca) in chi.c[1..].iter().enumerate() {
                s += ca * x.coord(a);
            }
            grid.for_each_within(sites, x, radius, |j, d| {
                s += chi.lambda[j] * basis.eval(d);
            });
            s
        })
        .collect())
}

/// Evaluates the interpolant at every pixel center of a `width × height`
/// grid, clamped to `[0, 1]`.
pub fn evaluate_interpolant(
    problem: &InterpolationProblem,
    chi: &SolutionVector,
    width: usize,
    height: usize,
) -> Result<Vec<f64>> {
    let points: Vec<Point> = (0..height)
        .flat_map(|r| (0..width).map(move |c| pixel_center(c, r, width, height)))
        .collect();
    let mut plane = evaluate_at(problem, chi, &points)?;
    plane.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Ok(plane)
}

/// Peak signal-to-noise ratio in dB for `[0, 1]` intensities; `+∞` when the
/// images are identical.
pub fn psnr(reference: &RasterImage, test: &RasterImage) -> Result<f64> {
    if (reference.width(), reference.height(), reference.channels())
        != (test.width(), test.height(), test.channels())
    {
        return Err(Error::InvalidArgument(format!(
            "image shapes differ: {}x{}x{} vs {}x{}x{}",
            reference.width(),
            reference.height(),
            reference.channels(),
            test.width(),
            test.height(),
            test.channels()
        )));
    }
    let n = reference.samples().len() as f64;
    let mse = reference
        .samples()
        .iter()
        .zip(test.samples())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    })
}

/// Formats a PSNR value, using `inf` for exact reconstructions.
pub fn format_psnr(db: f64) -> String {
    if db.is_infinite() {
        "inf".to_string()
    } else {
        format!("{db:.4}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverChoice {
    /// Dense reference solve; small images only.
    Direct,
    /// Plain GCR when `size == 0`, coarse-corrected GCR otherwise.
    Gcr {
        kind: CoarseBasisKind,
        size: usize,
        orthonormalize: bool,
    },
}

#[derive(Debug, Clone)]
pub struct ReconstructionOptions {
    pub selection: CenterSelection,
    pub radius: f64,
    pub solver: SolverChoice,
    pub config: SolverConfig,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Unquantized, clamped reconstruction.
    pub image: RasterImage,
    /// One report per channel; `None` for the direct solver.
    pub reports: Vec<Option<SolveReport>>,
    pub n_sites: usize,
}

/// Solves one system per channel on a shared set of centers and evaluates
/// the result over the full pixel grid.
pub fn reconstruct(img: &RasterImage, opts: &ReconstructionOptions) -> Result<Reconstruction> {
    let basis = RadialBasis::wendland_c2(opts.radius)?;
    let base = extract_problem(img, 0, opts.selection, basis)?;
    let system = assemble(&base)?;
    let pixels = opts.selection.select(img.width(), img.height())?;
    let channel_values: Vec<Vec<f64>> = (0..img.channels())
        .map(|c| pixels.iter().map(|&(x, y)| img.pixel(x, y, c)).collect())
        .collect();

    let solved: Vec<(Vec<f64>, Option<SolveReport>)> = match opts.solver {
        SolverChoice::Direct => channel_values
            .par_iter()
            .map(|values| {
                let b = system.rhs_for(values)?;
                Ok((direct_solve_with_rhs(&system, &b)?.to_flat(), None))
            })
            .collect::<Result<_>>()?,
        SolverChoice::Gcr { size: 0, .. } => channel_values
            .par_iter()
            .map(|values| {
                let b = system.rhs_for(values)?;
                let out = gcr_solve(&system, &b, &vec![0.0; b.len()], &opts.config)?;
                Ok((out.chi, Some(out.report)))
            })
            .collect::<Result<_>>()?,
        SolverChoice::Gcr {
            kind,
            size,
            orthonormalize,
        } => {
            let mut space = build_coarse(kind, size, base.sites(), system.poly_len())?;
            if orthonormalize {
                space = space.orthonormalized()?;
            }
            let coarse = build_coarse_operator(&system, space.matrix())?;
            channel_values
                .par_iter()
                .map(|values| {
                    let b = system.rhs_for(values)?;
                    let out = deflated_gcr_solve_monitored(&coarse, &b, &opts.config, &mut |_| {})?;
                    Ok((out.chi, Some(out.report)))
                })
                .collect::<Result<_>>()?
        }
    };

    let (w, h) = (img.width(), img.height());
    let mut planes = Vec::with_capacity(solved.len());
    let mut reports = Vec::with_capacity(solved.len());
    for (chi, report) in solved {
        let sol = system.split_solution(&chi)?;
        planes.push(evaluate_interpolant(&base, &sol, w, h)?);
        reports.push(report);
    }
    Ok(Reconstruction {
        image: RasterImage::from_planes(w, h, &planes)?,
        reports,
        n_sites: base.len(),
    })
}

/// Smooth deterministic test image with gradients, rings and an edge, for
/// demos and benchmarks when no photograph is at hand.
pub fn synthetic_pattern(width: usize, height: usize, channels: usize) -> Result<RasterImage> {
    let planes: Vec<Vec<f64>> = (0..channels)
        .map(|c| {
            let phase = c as f64 * 0.7;
            (0..height)
                .flat_map(|r| (0..width).map(move |col| (col, r)))
                .map(|(col, r)| {
                    let x = (col as f64 + 0.5) / width as f64;
                    let y = (r as f64 + 0.5) / height as f64;
                    let dx = x - 0.55;
                    let dy = y - 0.45;
                    let rings = (18.0 * (dx * dx + dy * dy).sqrt() + phase).cos();
                    let waves = (7.0 * x + 3.0 * y + phase).sin() * (5.0 * y).cos();
                    let edge = if x + 0.6 * y > 0.9 { 0.25 } else { 0.0 };
                    let v = 0.35 + 0.2 * x + 0.15 * rings + 0.12 * waves + edge - 0.1 * y;
                    (v * 255.0).round().clamp(0.0, 255.0) / 255.0
                })
                .collect()
        })
        .collect();
    RasterImage::from_planes(width, height, &planes)
}
