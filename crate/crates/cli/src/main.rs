//! `cvqkd`: simulation, inference, window design and key-rate sweeps.
//!
//! Exit codes: 0 success, 2 invalid config or input, 3 multiplier search
//! did not converge, 1 anything else.

mod cmd;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::LevelFilter;

use config::RunConfig;
use error::CliError;
use io::OutDir;

const DEFAULT_OUT: &str = "cvqkd-out";

#[derive(Parser)]
#[command(name = "cvqkd", version, about = "Multicarrier CVQKD spectral inference experiments")]
struct Cli {
    /// TOML run configuration; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for trial-parallel loops.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Repeat for more log output on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw inputs, run the channel and write measured subcarriers.
    Simulate {
        /// Check the config for the windowed estimator (even m).
        #[arg(long)]
        dgqi: bool,
    },
    /// Infer the input spectrum from a measurement file.
    Infer {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        input: PathBuf,
    },
    /// Design or sweep a flat-top estimator window.
    Window {
        #[command(subcommand)]
        action: WindowAction,
    },
    /// Statistical key-rate curves.
    Skr {
        #[command(subcommand)]
        mode: SkrMode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Gqi,
    Dgqi,
}

#[derive(Subcommand)]
enum WindowAction {
    Design,
    Sweep {
        /// Window text file from `window design`; defaults to
        /// `window_coeffs`, or `β ≡ 1` when that is absent.
        #[arg(long)]
        window: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SkrMode {
    /// Rate for Z = 1..Z_max from fixed data.
    VsZ {
        #[arg(long, requires = "eve")]
        bob: Option<PathBuf>,
        #[arg(long, requires = "bob")]
        eve: Option<PathBuf>,
    },
    /// Monte-Carlo rate for every m in `m_list`.
    VsM,
    /// Rate from growing prefixes of the m sub-channels.
    Cumulative,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.out.is_some() {
        cfg.out_dir = cli.out.clone();
    }
    if cfg.out_dir.is_none() {
        cfg.out_dir = Some(PathBuf::from(DEFAULT_OUT));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(format!("--threads: {e}")))?;
    }
    let cfg = resolve(&cli)?;
    let out = OutDir::create(cfg.out_dir.as_deref().expect("resolved"))?;
    match cli.command {
        Command::Simulate { dgqi } => cmd::simulate::run(&cfg, &out, dgqi),
        Command::Infer { method, input } => match method {
            Method::Gqi => cmd::infer::gqi(&cfg, &out, &input),
            Method::Dgqi => cmd::infer::dgqi(&cfg, &out, &input),
        },
        Command::Window { action } => match action {
            WindowAction::Design => cmd::window::design(&cfg, &out),
            WindowAction::Sweep { window } => cmd::window::sweep(&cfg, &out, window.as_deref()),
        },
        Command::Skr { mode } => match mode {
            SkrMode::VsZ { bob, eve } => cmd::skr::vs_z(&cfg, &out, bob.as_deref(), eve.as_deref()),
            SkrMode::VsM => cmd::skr::vs_m(&cfg, &out),
            SkrMode::Cumulative => cmd::skr::cumulative(&cfg, &out),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
