use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use marcin_lab::experiments::{exit, exit_code, resolve, run, Command, ConfigFile, Format, Overrides, RunStatus};

/// Experiments on dyadic maximal operators and bilinear multipliers.
///
/// Each run writes its tables into --out together with manifest.json.
/// Exit codes: 0 success, 2 invalid arguments, 3 numerical-quality failure,
/// 4 I/O failure. MARCIN_LAB_THREADS caps the worker threads.
#[derive(Parser, Debug)]
#[command(name = "marcin-lab", version)]
struct Cli {
    /// Output directory [default: results]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// [default: csv]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file of parameters; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("marcin-lab: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("MARCIN_LAB_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    return fail(exit::INVALID_ARGUMENTS, e);
                }
            }
            _ => return fail(exit::INVALID_ARGUMENTS, format!("MARCIN_LAB_THREADS must be a positive integer, got {v:?}")),
        }
    }
    let file = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(f) => f,
        Err(e) => return fail(exit_code(&e), e),
    };
    let flags = Overrides { command: cli.command, seed: cli.seed, out: cli.out, format: cli.format };
    let config = match resolve(file, flags) {
        Ok(c) => c,
        Err(e) => return fail(exit_code(&e), e),
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => return fail(exit_code(&e), e),
    };
    for f in &report.manifest.files {
        println!("{}", config.out.join(&f.name).display());
    }
    if report.manifest.status != RunStatus::Ok {
        let msg = report.manifest.message.as_deref().unwrap_or("run failed");
        return fail(report.exit_code(), msg);
    }
    ExitCode::SUCCESS
}
