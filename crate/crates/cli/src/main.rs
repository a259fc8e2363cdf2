use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jcsim::{load_config, run_evolve, run_schmidt, run_spectrum, run_validate, CliError, Options};

const AFTER_HELP: &str = "\
Units: kappa = 1; frequencies are detunings from the cavity.

Config defaults: system.delta_a = 0, pulse.t0 = 0, pulse.photons = 2,
grid = 100 points over omega0 +/- 25 gamma0, run.t_end = 60,
run.output_dt = 0.1, rtol = 1e-8, atol = 1e-10, analysis.gamma_reg = gamma0,
analysis.n_modes = 5. pulse.omega0 may be \"E1+\" or \"E1-\"; grid.span may
be \"coverage\" (both resonances plus 5 kappa, and omega0 +/- 25 gamma0).

Exit codes: 0 ok, 1 failed validation or unwritable output,
2 configuration error, 3 numerical error.
JCSIM_THREADS caps the number of worker threads; RUST_LOG sets log level.";

#[derive(Parser)]
#[command(name = "jcsim", version, about = "Two-photon scattering on a waveguide-coupled Jaynes-Cummings system", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory, created if missing.
    #[arg(long, default_value = "jcsim-out")]
    out: PathBuf,
    /// Only print errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the equations of motion and write population time series.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Store the full state at these times (overrides run.snapshot_times).
        #[arg(long, value_delimiter = ',')]
        snapshot_times: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// One-photon spectra of the scattered pair, with an optional carrier scan.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Schmidt decomposition and entanglement entropy of the scattered pair.
    Schmidt {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance suite; with --config, also check the closed forms
    /// against the integrator for that system.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run only these criteria (1-9).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u8>>,
        #[command(flatten)]
        common: Common,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("JCSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("JCSIM_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("JCSIM_THREADS: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Evolve {
            config,
            snapshot_times,
            common,
        } => {
            let cfg = load_config(&config)?;
            let opts = Options {
                out: common.out,
                snapshot_times,
                quiet: common.quiet,
            };
            run_evolve(&cfg, &opts).map(drop)
        }
        Command::Spectrum { config, common } => {
            let cfg = load_config(&config)?;
            run_spectrum(&cfg, &options(common)).map(drop)
        }
        Command::Schmidt { config, common } => {
            let cfg = load_config(&config)?;
            run_schmidt(&cfg, &options(common)).map(drop)
        }
        Command::Validate {
            config,
            criteria,
            common,
        } => {
            let cfg = config.as_deref().map(load_config).transpose()?;
            run_validate(cfg.as_ref(), criteria.as_deref(), &options(common)).map(drop)
        }
    }
}

fn options(common: Common) -> Options {
    Options {
        out: common.out,
        snapshot_times: None,
        quiet: common.quiet,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = match &cli.command {
        Command::Evolve { common, .. }
        | Command::Spectrum { common, .. }
        | Command::Schmidt { common, .. }
        | Command::Validate { common, .. } => common.quiet,
    };
    env_logger::Builder::from_env(
        env_logger::Env::default().default_filter_or(if quiet { "error" } else { "warn" }),
    )
    .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
