use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pmme_cli::{exit, output, output_dir, registry, run_scenario, validate_config, RunError, OUT_DIR_ENV};

/// Post-Markovian master equation scenario runner.
#[derive(Parser)]
#[command(name = "pmme", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace.csv, report.json and optionally fig.svg.
    Run {
        config: PathBuf,
        /// Output directory; overrides PMME_OUT_DIR and the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write fig.svg.
        #[arg(long)]
        plot: bool,
        /// Accepted for compatibility; every run is deterministic.
        #[arg(long)]
        seedless: bool,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// List built-in kernels and models.
    List,
}

fn load(path: &PathBuf) -> Result<pmme_cli::Scenario, i32> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        exit::CONFIG
    })?;
    validate_config(&text).map_err(|e| {
        eprintln!("error: {e}");
        exit::CONFIG
    })
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::List => {
            print!("{}", registry::list_builtins());
            exit::OK
        }
        Command::Validate { config } => match load(&config) {
            Ok(s) => {
                println!("{}: ok", s.config.name);
                exit::OK
            }
            Err(code) => code,
        },
        Command::Run { config, out, plot, seedless: _ } => {
            let scenario = match load(&config) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let result = match run_scenario(&scenario) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return match e {
                        RunError::Solver(_) => exit::SOLVER,
                        RunError::Invariant(_) => exit::INVARIANT,
                    };
                }
            };
            let env = std::env::var(OUT_DIR_ENV).ok();
            let dir = output_dir(out.as_deref(), env.as_deref(), &scenario.config);
            match output::write_outputs(&result, &dir, plot || scenario.config.outputs.plot) {
                Ok(files) => {
                    for f in files {
                        println!("wrote {}", f.display());
                    }
                    for w in &result.report.warnings {
                        eprintln!("warning: {w}");
                    }
                    exit::OK
                }
                Err(e) => {
                    eprintln!("error: cannot write outputs to {}: {e}", dir.display());
                    exit::CONFIG
                }
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()) as u8)
}
