//! Config-driven scenario runner for PMME experiments.
//!
//! A scenario names a model, a memory kernel, a time grid and the witnesses
//! to evaluate. Running it writes `trace.csv`, `report.json` and optionally
//! `fig.svg`.

pub mod config;
pub mod output;
pub mod registry;
pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};

pub use config::{validate_config, ConfigError, Scenario, ScenarioConfig};
pub use report::RunReport;
pub use scenario::{run_scenario, RunError, RunOutput};

/// Environment variable that overrides the output directory of the config.
pub const OUT_DIR_ENV: &str = "PMME_OUT_DIR";

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const INVARIANT: i32 = 4;
}

/// Output directory: `--out`, then `PMME_OUT_DIR`, then the config's
/// `outputs.directory`, then `out/<scenario name>`.
pub fn output_dir(cli: Option<&Path>, env: Option<&str>, cfg: &ScenarioConfig) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(e) = env.filter(|e| !e.is_empty()) {
        return PathBuf::from(e);
    }
    match &cfg.outputs.directory {
        Some(d) => PathBuf::from(d),
        None => Path::new("out").join(&cfg.name),
    }
}
