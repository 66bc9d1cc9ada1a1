//! `cubesec`: volumes of central cube sections, extremal frames, optimality
//! checks, bounds, optimization runs and the reproduction battery.
//!
//! Exit codes: 0 success, 1 check or acceptance failure, 2 I/O or parse
//! error, 3 domain error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cubesec", version, about = "Central sections of the cube [-1,1]^n via tight frames")]
struct Cli {
    /// Output format for stdout
    #[arg(long, value_enum, global = true, default_value_t = Format::Table)]
    format: Format,

    /// RNG seed; every command is reproducible given the seed
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Log progress to stderr (repeat for more)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Volume, vertex and facet counts of Q(S) for a frame file
    Volume {
        frame: PathBuf,
    },
    /// Dump the section polytope (vertices, facets, measures, centroids) as JSON
    Report {
        frame: PathBuf,
        /// Write the dump here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the first-order optimality conditions on a tight frame
    Verify {
        frame: PathBuf,
        /// Tolerance for the centroid, balance and cyclic residuals
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Vaaler, Ball and affine-cube bounds for (n, k), optionally placing a frame among them
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        frame: Option<PathBuf>,
    },
    /// Write the tight frame whose section is an affine cube
    ConstructExtremal {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Parts separated by '/', indices by ',' (0-based), e.g. "0,1,2/3,4"
        #[arg(long)]
        partition: Option<String>,
        /// n comma-separated signs, each 1 or -1
        #[arg(long, allow_hyphen_values = true)]
        signs: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multi-start ascent of the section volume over tight frames
    Optimize(OptimizeArgs),
    /// Run the reproduction battery; exit 0 iff every selected criterion passes
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Number of frame vectors (cube dimension)
    #[arg(long)]
    pub n: usize,
    /// Section dimension
    #[arg(long)]
    pub k: usize,
    /// Independent starts
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Proposals per restart
    #[arg(long, default_value_t = 2000)]
    pub iterations: usize,
    /// Initial perturbation size
    #[arg(long, default_value_t = 0.3)]
    pub initial_step: f64,
    /// Step multiplier after a run of rejections
    #[arg(long, default_value_t = 0.7)]
    pub decay: f64,
    /// Skip the warm start from the affine-cube frame
    #[arg(long)]
    pub no_warm_start: bool,
    /// Full result (best frame, traces, conditions) as JSON
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted steps as CSV: restart,iteration,volume
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Comma-separated criterion ids or numbers (default: all)
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Cap on n in every grid
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Tight-frame tolerance used throughout the battery
    #[arg(long, default_value_t = 1e-10)]
    pub eps_tight: f64,
    /// Optimizer restarts per cell
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Random frames per cell in the bound-ordering sweep
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Machine-readable report of every criterion
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Err(e) = commands::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    let ctx = commands::Context {
        format: cli.format,
        seed: cli.seed,
    };
    let result = match cli.command {
        Command::Volume { frame } => commands::volume(&ctx, &frame),
        Command::Report { frame, out } => commands::report(&ctx, &frame, out.as_deref()),
        Command::Verify { frame, tol } => commands::verify(&ctx, &frame, tol),
        Command::Bounds { n, k, frame } => commands::bounds(&ctx, n, k, frame.as_deref()),
        Command::ConstructExtremal {
            n,
            k,
            partition,
            signs,
            out,
        } => commands::construct_extremal(&ctx, n, k, partition.as_deref(), signs.as_deref(), out.as_deref()),
        Command::Optimize(args) => commands::optimize(&ctx, &args),
        Command::Reproduce(args) => commands::reproduce(&ctx, &args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
