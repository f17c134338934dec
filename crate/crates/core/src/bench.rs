//! Drivers for single reconstructions and the coarse-basis sweep.
//!
//! A sweep solves every (family, coarse size) cell of the configured grid for
//! each image channel and writes one CSV row per cell and channel. The
//! `m = 0` cell is plain GCR; it is solved once and its row repeated under
//! every family. Rows are deterministic for a fixed configuration; wall-clock
//! timings go to a separate file.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::assembly::{assemble, SaddleSystem};
use crate::coarse::{build_coarse, CoarseBasisKind};
use crate::error::Error;
use crate::imaging::{
    evaluate_interpolant, extract_problem, format_psnr, load_image, psnr, save_image,
    synthetic_pattern, CenterSelection, RasterImage,
};
use crate::solvers::{
    build_coarse_operator, deflated_gcr_solve_monitored, direct_solve_with_rhs, gcr_solve,
    SolveReport, SolverConfig,
};
use crate::types::{InterpolationProblem, RadialBasis};

/// Version tag written in the first CSV column.
pub const CSV_SCHEMA: &str = "v1";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const RECONSTRUCT_CSV: &str = "reconstruct.csv";
pub const TIMINGS_CSV: &str = "timings.csv";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(Error),
    #[error("all {0} cells failed")]
    AllCellsFailed(usize),
}

impl BenchError {
    /// Process exit code: 1 config, 2 I/O, 3 every cell failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 1,
            BenchError::Io(_) => 2,
            BenchError::AllCellsFailed(_) => 3,
        }
    }
}

impl From<Error> for BenchError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format { .. } => BenchError::Io(e),
            other => BenchError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(Error::Io(e))
    }
}

impl From<csv::Error> for BenchError {
    fn from(e: csv::Error) -> Self {
        BenchError::Io(Error::Io(std::io::Error::other(e)))
    }
}

type BenchResult<T> = std::result::Result<T, BenchError>;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Image path, or `synthetic:WxH[xC]` for the built-in test pattern.
    pub input: String,
    pub out_dir: PathBuf,
    pub radius: f64,
    pub centers: CenterSelection,
    pub bases: Vec<CoarseBasisKind>,
    pub coarse_sizes: Vec<usize>,
    pub tolerances: Vec<f64>,
    pub max_iter: usize,
    pub orthonormalize: bool,
    /// Reconstruct with the dense direct solver instead of GCR.
    pub direct: bool,
    /// Worker threads for sweep cells; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: String::new(),
            out_dir: PathBuf::from("out"),
            radius: 0.05,
            centers: CenterSelection::Stride(4),
            bases: CoarseBasisKind::ALL.to_vec(),
            coarse_sizes: vec![0, 2, 4, 8, 16],
            tolerances: vec![1e-3, 1e-6],
            max_iter: 2000,
            orthonormalize: false,
            direct: false,
            threads: None,
        }
    }
}

fn parse_list<T: FromStr>(value: &str, what: &str) -> BenchResult<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| BenchError::Config(format!("invalid {what} '{s}'")))
        })
        .collect()
}

fn parse_one<T: FromStr>(value: &str, what: &str) -> BenchResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| BenchError::Config(format!("invalid {what} '{value}'")))
}

fn parse_bool(value: &str) -> BenchResult<bool> {
    match value.trim() {
        "" | "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(BenchError::Config(format!("invalid boolean '{other}'"))),
    }
}

impl RunConfig {
    /// Sets one option by its command-line flag name (without leading dashes).
    pub fn set(&mut self, key: &str, value: &str) -> BenchResult<()> {
        match key.trim() {
            "input" => self.input = value.trim().to_string(),
            "out-dir" => self.out_dir = PathBuf::from(value.trim()),
            "radius" => self.radius = parse_one(value, "radius")?,
            "stride" => self.centers = CenterSelection::Stride(parse_one(value, "stride")?),
            "random-frac" => {
                let seed = match self.centers {
                    CenterSelection::Random { seed, .. } => seed,
                    _ => 0,
                };
                self.centers = CenterSelection::Random {
                    fraction: parse_one(value, "random fraction")?,
                    seed,
                };
            }
            "seed" => {
                let seed = parse_one(value, "seed")?;
                if let CenterSelection::Random { fraction, .. } = self.centers {
                    self.centers = CenterSelection::Random { fraction, seed };
                } else {
                    self.centers = CenterSelection::Random {
                        fraction: 1.0,
                        seed,
                    };
                }
            }
            "all-centers" => {
                if parse_bool(value)? {
                    self.centers = CenterSelection::All;
                }
            }
            "centers" => {
                self.centers = value
                    .parse()
                    .map_err(|e: Error| BenchError::Config(e.to_string()))?
            }
            "basis" => self.bases = parse_list(value, "basis")?,
            "coarse-sizes" => self.coarse_sizes = parse_list(value, "coarse size")?,
            "tols" => self.tolerances = parse_list(value, "tolerance")?,
            "max-iter" => self.max_iter = parse_one(value, "max-iter")?,
            "orthonormalize-coarse" => self.orthonormalize = parse_bool(value)?,
            "direct" => self.direct = parse_bool(value)?,
            "threads" => self.threads = Some(parse_one(value, "thread count")?),
            other => return Err(BenchError::Config(format!("unknown option '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are ignored.
    pub fn apply_file_contents(&mut self, contents: &str) -> BenchResult<()> {
        for (lineno, line) in contents.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                BenchError::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> BenchResult<()> {
        let contents = fs::read_to_string(path)?;
        self.apply_file_contents(&contents)
    }

    pub fn solver_config(&self) -> BenchResult<SolverConfig> {
        Ok(SolverConfig::new(self.tolerances.clone(), self.max_iter)?.with_history(false))
    }

    pub fn validate(&self) -> BenchResult<()> {
        if self.input.is_empty() {
            return Err(BenchError::Config("no input image given".into()));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(BenchError::Config(format!("radius must be positive, got {}", self.radius)));
        }
        if self.bases.is_empty() || self.coarse_sizes.is_empty() {
            return Err(BenchError::Config("basis and coarse-size lists must be non-empty".into()));
        }
        if self.threads == Some(0) {
            return Err(BenchError::Config("thread count must be positive".into()));
        }
        self.solver_config()?;
        Ok(())
    }
}

/// Loads `cfg.input`, including the `synthetic:WxH[xC]` pseudo-path.
pub fn load_input(input: &str) -> BenchResult<RasterImage> {
    if let Some(size) = input.strip_prefix("synthetic:") {
        let dims: Vec<usize> = size
            .split('x')
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| BenchError::Config(format!("invalid synthetic size '{size}'")))?;
        let (w, h, c) = match dims.as_slice() {
            [w, h] => (*w, *h, 1),
            [w, h, c] => (*w, *h, *c),
            _ => return Err(BenchError::Config(format!("invalid synthetic size '{size}'"))),
        };
        return Ok(synthetic_pattern(w, h, c)?);
    }
    Ok(load_image(input)?)
}

fn output_extension(input: &str, channels: usize) -> &'static str {
    let ext = Path::new(input)
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => "png",
        _ if channels == 1 => "pgm",
        _ => "ppm",
    }
}

/// One CSV row: a (family, coarse size) cell for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRow {
    pub family: Option<CoarseBasisKind>,
    pub coarse_size: usize,
    pub channel: usize,
    pub report: Option<SolveReport>,
    pub psnr_db: Option<f64>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

impl CellRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn status(&self) -> String {
        match (&self.error, &self.report) {
            (Some(e), _) => format!("failed: {e}"),
            (None, Some(r)) if !r.converged => "not_converged".to_string(),
            _ => "ok".to_string(),
        }
    }
}

/// Rows plus the metadata recorded alongside them.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub rows: Vec<CellRow>,
    pub n_sites: usize,
    pub csv: Vec<u8>,
    pub timings_csv: Vec<u8>,
    pub images: Vec<PathBuf>,
}

impl RunReport {
    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(CellRow::failed)
    }
}

fn fmt_f64(v: f64) -> String {
    // shortest round-trip representation; stable across platforms
    format!("{v}")
}

fn render_csv(cfg: &RunConfig, n_sites: usize, rows: &[CellRow]) -> BenchResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "schema",
        "family",
        "coarse_size",
        "channel",
        "n_sites",
        "centers",
        "radius",
        "orthonormalized",
        "initial_residual_ratio",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(cfg.tolerances.iter().map(|t| format!("iters_{t:e}")));
    header.extend(
        ["iterations", "converged", "true_residual_ratio", "psnr_db", "status"]
            .iter()
            .map(|s| s.to_string()),
    );
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            CSV_SCHEMA.to_string(),
            row.family.map_or("plain".to_string(), |k| k.to_string()),
            row.coarse_size.to_string(),
            row.channel.to_string(),
            n_sites.to_string(),
            cfg.centers.to_string(),
            fmt_f64(cfg.radius),
            cfg.orthonormalize.to_string(),
        ];
        match &row.report {
            Some(r) => {
                rec.push(fmt_f64(r.initial_residual_ratio));
                rec.extend(
                    r.iterations_per_tol
                        .iter()
                        .map(|h| h.iterations.map_or(String::new(), |k| k.to_string())),
                );
                rec.push(r.iterations.to_string());
                rec.push(r.converged.to_string());
                rec.push(fmt_f64(r.true_residual_ratio));
            }
            None => {
                rec.push(String::new());
                rec.extend(cfg.tolerances.iter().map(|_| String::new()));
                rec.push(String::new());
                rec.push((!row.failed()).to_string());
                rec.push(String::new());
            }
        }
        rec.push(row.psnr_db.map_or(String::new(), format_psnr));
        rec.push(row.status());
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| BenchError::from(e.into_error()))
}

fn render_timings(rows: &[CellRow]) -> BenchResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["family", "coarse_size", "channel", "wall_time_s"])?;
    for row in rows {
        w.write_record([
            row.family.map_or("plain".to_string(), |k| k.to_string()),
            row.coarse_size.to_string(),
            row.channel.to_string(),
            format!("{:.6}", row.wall_time_s),
        ])?;
    }
    w.into_inner().map_err(|e| BenchError::from(e.into_error()))
}

/// What a cell solves with.
#[derive(Debug, Clone, Copy, PartialEq)]
enum CellSolver {
    Direct,
    Plain,
    Coarse(CoarseBasisKind, usize),
}

struct CellOutcome {
    reports: Vec<Option<SolveReport>>,
    image: Option<RasterImage>,
    error: Option<String>,
    seconds: f64,
}

struct Setup {
    img: RasterImage,
    problem: InterpolationProblem,
    system: SaddleSystem,
    rhs: Vec<Vec<f64>>,
}

fn setup(cfg: &RunConfig) -> BenchResult<Setup> {
    cfg.validate()?;
    let img = load_input(&cfg.input)?;
    let basis = RadialBasis::wendland_c2(cfg.radius)?;
    let problem = extract_problem(&img, 0, cfg.centers, basis)?;
    let system = assemble(&problem)?;
    let pixels = cfg.centers.select(img.width(), img.height())?;
    let rhs = (0..img.channels())
        .map(|c| {
            let values: Vec<f64> = pixels.iter().map(|&(x, y)| img.pixel(x, y, c)).collect();
            system.rhs_for(&values)
        })
        .collect::<crate::Result<_>>()?;
    Ok(Setup {
        img,
        problem,
        system,
        rhs,
    })
}

fn solve_cell(setup: &Setup, solver: CellSolver, cfg: &RunConfig, solver_cfg: &SolverConfig) -> CellOutcome {
    let start = Instant::now();
    let result = (|| -> crate::Result<(Vec<Option<SolveReport>>, RasterImage)> {
        let system = &setup.system;
        let mut chis = Vec::with_capacity(setup.rhs.len());
        let mut reports = Vec::with_capacity(setup.rhs.len());
        match solver {
            CellSolver::Direct => {
                for b in &setup.rhs {
                    chis.push(direct_solve_with_rhs(system, b)?.to_flat());
                    reports.push(None);
                }
            }
            CellSolver::Plain => {
                for b in &setup.rhs {
                    let out = gcr_solve(system, b, &vec![0.0; b.len()], solver_cfg)?;
                    chis.push(out.chi);
                    reports.push(Some(out.report));
                }
            }
            CellSolver::Coarse(kind, m) => {
                let mut space = build_coarse(kind, m, setup.problem.sites(), system.poly_len())?;
                if cfg.orthonormalize {
                    space = space.orthonormalized()?;
                }
                let coarse = build_coarse_operator(system, space.matrix())?;
                for b in &setup.rhs {
                    let out = deflated_gcr_solve_monitored(&coarse, b, solver_cfg, &mut |_| {})?;
                    chis.push(out.chi);
                    reports.push(Some(out.report));
                }
            }
        }
        let (w, h) = (setup.img.width(), setup.img.height());
        let planes = chis
            .iter()
            .map(|chi| {
                let sol = system.split_solution(chi)?;
                evaluate_interpolant(&setup.problem, &sol, w, h)
            })
            .collect::<crate::Result<Vec<_>>>()?;
        Ok((reports, RasterImage::from_planes(w, h, &planes)?))
    })();
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok((reports, image)) => CellOutcome {
            reports,
            image: Some(image),
            error: None,
            seconds,
        },
        Err(e) => CellOutcome {
            reports: vec![None; setup.rhs.len()],
            image: None,
            error: Some(e.to_string()),
            seconds,
        },
    }
}

fn rows_for(
    family: Option<CoarseBasisKind>,
    m: usize,
    outcome: &CellOutcome,
    reference: &RasterImage,
) -> Vec<CellRow> {
    let psnr_db = outcome
        .image
        .as_ref()
        .and_then(|img| psnr(reference, &img.quantized()).ok());
    outcome
        .reports
        .iter()
        .enumerate()
        .map(|(channel, report)| CellRow {
            family,
            coarse_size: m,
            channel,
            report: report.clone(),
            psnr_db,
            error: outcome.error.clone(),
            wall_time_s: outcome.seconds,
        })
        .collect()
}

fn run_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> BenchResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn image_name(solver: CellSolver, ext: &str) -> String {
    match solver {
        CellSolver::Direct => format!("recon_direct.{ext}"),
        CellSolver::Plain => format!("recon_plain_m0.{ext}"),
        CellSolver::Coarse(kind, m) => format!("recon_{kind}_m{m}.{ext}"),
    }
}

/// Runs the family × coarse-size grid and writes `sweep.csv`, `timings.csv`
/// and one reconstructed image per solved cell into `cfg.out_dir`.
pub fn run_sweep(cfg: &RunConfig) -> BenchResult<RunReport> {
    let setup = setup(cfg)?;
    let solver_cfg = cfg.solver_config()?;

    let mut cells = Vec::new();
    if cfg.coarse_sizes.contains(&0) {
        cells.push(CellSolver::Plain);
    }
    for &kind in &cfg.bases {
        for &m in &cfg.coarse_sizes {
            if m > 0 && !cells.contains(&CellSolver::Coarse(kind, m)) {
                cells.push(CellSolver::Coarse(kind, m));
            }
        }
    }
    let outcomes: Vec<CellOutcome> = run_pool(cfg.threads, || {
        cells
            .par_iter()
            .map(|&c| solve_cell(&setup, c, cfg, &solver_cfg))
            .collect()
    })?;

    let find = |cell: CellSolver| &outcomes[cells.iter().position(|&c| c == cell).unwrap()];
    let mut rows = Vec::new();
    for &kind in &cfg.bases {
        for &m in &cfg.coarse_sizes {
            let cell = if m == 0 {
                CellSolver::Plain
            } else {
                CellSolver::Coarse(kind, m)
            };
            rows.extend(rows_for(Some(kind), m, find(cell), &setup.img));
        }
    }

    fs::create_dir_all(&cfg.out_dir)?;
    let ext = output_extension(&cfg.input, setup.img.channels());
    let mut images = Vec::new();
    for (cell, outcome) in cells.iter().zip(&outcomes) {
        if let Some(img) = &outcome.image {
            let path = cfg.out_dir.join(image_name(*cell, ext));
            save_image(&path, img)?;
            images.push(path);
        }
    }
    finish(cfg, SWEEP_CSV, setup.problem.len(), rows, images)
}

fn finish(
    cfg: &RunConfig,
    csv_name: &str,
    n_sites: usize,
    rows: Vec<CellRow>,
    images: Vec<PathBuf>,
) -> BenchResult<RunReport> {
    let csv = render_csv(cfg, n_sites, &rows)?;
    let timings_csv = render_timings(&rows)?;
    fs::write(cfg.out_dir.join(csv_name), &csv)?;
    fs::write(cfg.out_dir.join(TIMINGS_CSV), &timings_csv)?;
    let report = RunReport {
        rows,
        n_sites,
        csv,
        timings_csv,
        images,
    };
    if report.all_failed() {
        return Err(BenchError::AllCellsFailed(report.rows.len()));
    }
    Ok(report)
}

/// Reconstructs the input with a single solver setting and writes the image
/// plus `reconstruct.csv`. Needs exactly one coarse size, and exactly one
/// basis family when that size is nonzero.
pub fn run_reconstruct(cfg: &RunConfig) -> BenchResult<RunReport> {
    let solver = if cfg.direct {
        CellSolver::Direct
    } else {
        match (cfg.bases.as_slice(), cfg.coarse_sizes.as_slice()) {
            (_, [0]) => CellSolver::Plain,
            ([kind], [m]) => CellSolver::Coarse(*kind, *m),
            _ => {
                return Err(BenchError::Config(
                    "reconstruct needs a single coarse size and a single basis family".into(),
                ))
            }
        }
    };
    let setup = setup(cfg)?;
    let solver_cfg = cfg.solver_config()?;
    let outcome = solve_cell(&setup, solver, cfg, &solver_cfg);
    let family = match solver {
        CellSolver::Coarse(kind, _) => Some(kind),
        _ => None,
    };
    let m = match solver {
        CellSolver::Coarse(_, m) => m,
        _ => 0,
    };
    let rows = rows_for(family, m, &outcome, &setup.img);

    fs::create_dir_all(&cfg.out_dir)?;
    let mut images = Vec::new();
    if let Some(img) = &outcome.image {
        let ext = output_extension(&cfg.input, setup.img.channels());
        let path = cfg.out_dir.join(format!("reconstruction.{ext}"));
        save_image(&path, img)?;
        images.push(path);
    }
    finish(cfg, RECONSTRUCT_CSV, setup.problem.len(), rows, images)
}

/// One-line human summary of a reconstruction run.
pub fn summary_line(report: &RunReport) -> String {
    let Some(first) = report.rows.first() else {
        return "no rows".to_string();
    };
    let psnr = first.psnr_db.map_or("n/a".to_string(), format_psnr);
    let iters: Vec<String> = report
        .rows
        .iter()
        .map(|r| match &r.report {
            Some(rep) => rep.iterations.to_string(),
            None => "-".to_string(),
        })
        .collect();
    format!(
        "sites={} psnr_db={} iterations=[{}] time_s={:.3} status={}",
        report.n_sites,
        psnr,
        iters.join(","),
        first.wall_time_s,
        first.status()
    )
}
