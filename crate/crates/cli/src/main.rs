//! Configuration-driven runner for class checks, solvers and experiments.

mod commands;
mod output;

use clap::Parser;
use commands::{CliError, CommandRegistry, Context};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "moscolab", version, about = "Crack-domain class checks, solvers and stability experiments")]
struct Args {
    /// JSON run configuration; its `command` field selects what to run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed overriding the configuration's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel experiment steps.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "warn")]
    log_level: log::LevelFilter,
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::new().filter_level(args.log_level).init();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    let code = match run(&args) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("moscolab: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code)
}

fn run(args: &Args) -> Result<bool, CliError> {
    let ctx = Context::load(&args.config, &args.out, args.seed)?;
    let registry = CommandRegistry::default();
    let cmd = registry.get(&ctx.command).ok_or_else(|| {
        CliError::Invalid(format!("unknown command '{}'; expected one of {}", ctx.command, registry.names().join(", ")))
    })?;
    log::info!("running {} with seed {}", ctx.command, ctx.seed);
    let passed = cmd.run(&ctx)?;
    log::info!("outputs written to {}", ctx.out.display());
    Ok(passed)
}
