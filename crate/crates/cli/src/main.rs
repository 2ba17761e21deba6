//! `glv <mode> --config <file> [--out <dir>] [--seed <int>]`
//!
//! Exit status: 0 on success, 1 on a numerical failure (outputs written so
//! far are kept next to a `FAILED` marker), 2 on an invalid configuration.

mod config;
mod io;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::Mode;

#[derive(Parser, Debug)]
#[command(name = "glv", version, about = "Ginzburg-Landau vortex states, stability and bifurcation diagrams")]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    mode: Mode,
    /// JSON run configuration; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(v) = std::env::var("GLV_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = glv_core::exec::init_threads(n) {
                    eprintln!("warning: GLV_THREADS ignored: {e}");
                }
            }
            _ => {
                eprintln!("error: GLV_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let mut cfg = match run::load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid config: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match run::run(cli.mode, &cfg) {
        Ok(outcome) => ExitCode::from(outcome.status as u8),
        Err(e) => {
            if let Some(msg) = run::config_error(&e) {
                eprintln!("error: invalid config: {msg}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}
