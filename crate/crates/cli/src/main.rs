//! `opspec`: experiment driver.
//!
//! Every subcommand loads one config file (defaults when omitted), applies
//! `--set key.path=value` overrides, writes its artifacts to the output
//! directory and stamps them with the hash of the effective config.

mod commands;
mod overrides;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use opspec::io::ExperimentConfig;
use opspec::Error;

#[derive(Debug, Parser)]
#[command(name = "opspec", version, about = "Spectral calibration of 1D closure operators")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (TOML); built-in defaults when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides $OPSPEC_OUTPUT_DIR and the config.
    #[arg(long, short, global = true)]
    output_dir: Option<PathBuf>,

    /// Override a config entry, e.g. `--set constants.fractional_order=2`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Override the top-level seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for ensembles, chains and probes (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fractional-ADE scenario: initial condition, true spectrum, observations, exact profiles.
    GenFrade,
    /// Sample a permeability realization into a binary snapshot.
    GenPerm,
    /// Darcy flow and 2D transport; writes concentration snapshots.
    #[command(name = "solve-2d")]
    Solve2d(commands::Solve2dArgs),
    /// Depth-averaged (upscaled) concentration series.
    Upscale,
    /// Propagate an initial condition under a stored spectrum.
    Evolve(commands::EvolveArgs),
    /// Sensitivity reduction and MAP estimate.
    CalibrateMap(commands::CalibrateArgs),
    /// MAP estimate followed by Langevin sampling of the active modes.
    CalibrateMcmc(commands::CalibrateArgs),
    /// Normalized per-mode sensitivities at the initial guess.
    Sensitivity(commands::DataArgs),
    /// Single-mode probes of the 2D model and assumption verdicts.
    Interrogate,
    /// Compare analytic derivatives with finite differences at a random point.
    CheckDerivatives(commands::CheckArgs),
    /// Summarize artifacts, check config hashes, export plot tables.
    Report(commands::ReportArgs),
}

fn load_config(common: &Common) -> opspec::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) if !p.exists() => {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("config file {} not found", p.display()),
            )))
        }
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if !common.sets.is_empty() {
        cfg = overrides::apply(&cfg, &common.sets)?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> opspec::Result<()> {
    if cli.common.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.common.threads)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    if let Command::Report(args) = &cli.command {
        return commands::report(&cli.common, args);
    }
    let cfg = load_config(&cli.common)?;
    let ctx = commands::Context::new(cfg, cli.common.output_dir.as_deref())?;
    match &cli.command {
        Command::GenFrade => commands::gen_frade(&ctx),
        Command::GenPerm => commands::gen_perm(&ctx),
        Command::Solve2d(a) => commands::solve_2d(&ctx, a),
        Command::Upscale => commands::upscale(&ctx),
        Command::Evolve(a) => commands::evolve(&ctx, a),
        Command::CalibrateMap(a) => commands::calibrate_map(&ctx, a),
        Command::CalibrateMcmc(a) => commands::calibrate_mcmc(&ctx, a),
        Command::Sensitivity(a) => commands::sensitivity(&ctx, a),
        Command::Interrogate => commands::interrogate(&ctx),
        Command::CheckDerivatives(a) => commands::check_derivatives(&ctx, a),
        Command::Report(_) => unreachable!(),
    }
}

/// One line on stderr: `error kind=<kind> exit=<code> message=<text>`.
fn error_line(kind: &str, code: u8, message: &str) {
    let message = message.replace('\n', " ");
    eprintln!("error kind={kind} exit={code} message={message}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            error_line("usage", 2, &e.kind().to_string());
            return ExitCode::from(2);
        }
    };
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code() as u8;
            error_line(e.kind(), code, &e.to_string());
            ExitCode::from(code)
        }
    }
}
