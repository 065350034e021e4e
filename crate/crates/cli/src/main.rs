//! `enhdiff`: single runs, diffusivity sweeps and the oracle suite.

mod config;
mod outcome;
mod run;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::LoadedConfig;
use outcome::{CliError, EXIT_CONFIG, EXIT_FAILURE, EXIT_OK};

#[derive(Parser, Debug)]
#[command(
    name = "enhdiff",
    version,
    about = "Enhanced dissipation experiments for passive scalars"
)]
struct Cli {
    /// Directory for artifacts (overrides `output.directory`).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Base seed (overrides the config's `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 picks automatically. Falls back to ENHDIFF_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and write snapshots, the energy ledger and a summary.
    Run { config: PathBuf },
    /// Measure mixing times across diffusivities and fit the exponent.
    Sweep { config: PathBuf },
    /// Run the built-in oracle suite.
    Validate {
        /// Print the check names without running them.
        #[arg(long)]
        list: bool,
        #[arg(long, hide = true)]
        inject_noise_typo: bool,
    },
}

fn thread_count(flag: Option<usize>) -> Result<usize, String> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var("ENHDIFF_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| format!("ENHDIFF_THREADS = {v:?} is not a thread count")),
        _ => Ok(0),
    }
}

fn load(path: &std::path::Path, seed: Option<u64>) -> Result<LoadedConfig, CliError> {
    let mut cfg = LoadedConfig::load(path)?;
    if let Some(s) = seed {
        cfg.config.seed = s;
    }
    Ok(cfg)
}

fn report(result: Result<serde_json::Value, CliError>, dir: &std::path::Path) -> ExitCode {
    match result {
        Ok(summary) => {
            println!(
                "{}: {}",
                summary["status"].as_str().unwrap_or("ok"),
                dir.join("summary.json").display()
            );
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("enhdiff: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match thread_count(cli.threads) {
        Ok(n) => n,
        Err(m) => {
            eprintln!("enhdiff: {m}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("enhdiff: cannot start {threads} threads: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }

    match cli.command {
        Command::Run { config } => {
            let cfg = match load(&config, cli.seed) {
                Ok(c) => c,
                Err(e) => return report(Err(e), &PathBuf::new()),
            };
            let dir = cli.output_dir.unwrap_or_else(|| cfg.output_dir());
            report(run::cmd_run(&cfg, &dir), &dir)
        }
        Command::Sweep { config } => {
            let cfg = match load(&config, cli.seed) {
                Ok(c) => c,
                Err(e) => return report(Err(e), &PathBuf::new()),
            };
            let dir = cli.output_dir.unwrap_or_else(|| cfg.output_dir());
            report(sweep::cmd_sweep(&cfg, &dir), &dir)
        }
        Command::Validate {
            list,
            inject_noise_typo,
        } => {
            if list {
                for c in validate::CHECKS {
                    println!("{c}");
                }
                return ExitCode::from(EXIT_OK);
            }
            let hooks = validate::Hooks {
                noise_typo: inject_noise_typo,
            };
            let mut failed = Vec::new();
            for c in validate::CHECKS {
                let r = validate::run_check(c, hooks).expect("known check");
                println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
                if !r.pass {
                    failed.push(r.name);
                }
            }
            if failed.is_empty() {
                ExitCode::from(EXIT_OK)
            } else {
                eprintln!("enhdiff: failing checks: {}", failed.join(", "));
                ExitCode::from(EXIT_FAILURE)
            }
        }
    }
}
