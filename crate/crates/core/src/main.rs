use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use csrbf::bench::{run_reconstruct, run_sweep, summary_line, BenchError, RunConfig};
use csrbf::coarse::CoarseBasisKind;

#[derive(Parser)]
#[command(name = "csrbf", version, about = "CSRBF image reconstruction with coarse-corrected GCR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct one image with a single solver setting.
    Reconstruct(Opts),
    /// Run the coarse-basis × coarse-size sweep and write sweep.csv.
    Sweep(Opts),
}

#[derive(Args)]
struct Opts {
    /// key=value config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input image (PGM/PPM/PNG) or synthetic:WxH[xC].
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Support radius in normalized coordinates.
    #[arg(long)]
    radius: Option<f64>,
    /// Use every k-th pixel as a center.
    #[arg(long, conflicts_with_all = ["random_frac", "all_centers"])]
    stride: Option<usize>,
    /// Use a random fraction of the pixels as centers.
    #[arg(long, requires = "seed", conflicts_with = "all_centers")]
    random_frac: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use every pixel as a center.
    #[arg(long)]
    all_centers: bool,
    /// Coarse basis families, comma separated.
    #[arg(long, value_delimiter = ',')]
    basis: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    coarse_sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    tols: Option<Vec<f64>>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Orthonormalize the coarse columns (QR) before solving.
    #[arg(long)]
    orthonormalize_coarse: bool,
    /// Solve with the dense direct solver (reconstruct, small images only).
    #[arg(long)]
    direct: bool,
    /// Worker threads for sweep cells.
    #[arg(long)]
    threads: Option<usize>,
}

impl Opts {
    fn into_config(self, mut cfg: RunConfig) -> Result<RunConfig, BenchError> {
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = self.input {
            cfg.input = v;
        }
        if let Some(v) = self.out_dir {
            cfg.out_dir = v;
        }
        if let Some(v) = self.radius {
            cfg.radius = v;
        }
        if let Some(v) = self.stride {
            cfg.set("stride", &v.to_string())?;
        }
        if let Some(v) = self.random_frac {
            cfg.set("random-frac", &v.to_string())?;
        }
        if let Some(v) = self.seed {
            cfg.set("seed", &v.to_string())?;
        }
        if self.all_centers {
            cfg.set("all-centers", "true")?;
        }
        if let Some(v) = self.basis {
            cfg.bases = v
                .iter()
                .map(|s| s.parse::<CoarseBasisKind>())
                .collect::<Result<_, _>>()
                .map_err(|e| BenchError::Config(e.to_string()))?;
        }
        if let Some(v) = self.coarse_sizes {
            cfg.coarse_sizes = v;
        }
        if let Some(v) = self.tols {
            cfg.tolerances = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if self.orthonormalize_coarse {
            cfg.orthonormalize = true;
        }
        if self.direct {
            cfg.direct = true;
        }
        if let Some(v) = self.threads {
            cfg.threads = Some(v);
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Sweep(opts) => {
            let cfg = opts.into_config(RunConfig::default())?;
            let report = run_sweep(&cfg)?;
            let failed = report.rows.iter().filter(|r| r.failed()).count();
            println!(
                "wrote {} rows ({} failed) to {}",
                report.rows.len(),
                failed,
                cfg.out_dir.join(csrbf::bench::SWEEP_CSV).display()
            );
        }
        Command::Reconstruct(opts) => {
            let defaults = RunConfig {
                coarse_sizes: vec![0],
                bases: vec![CoarseBasisKind::Chebyshev],
                ..RunConfig::default()
            };
            let cfg = opts.into_config(defaults)?;
            let report = run_reconstruct(&cfg)?;
            println!("{}", summary_line(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
