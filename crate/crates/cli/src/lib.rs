//! Scenario loading, run drivers, and file output for the `entangle` binary.

use std::path::{Path, PathBuf};

pub mod config;
pub mod output;
pub mod run;
pub mod schedule;

pub use config::{load_scenario, Horizon, ScenarioConfig};
pub use run::{resolve_out_dir, run_optimize, run_simulate, OptimizeOutcome, RunFiles, SimulateOutcome};
pub use schedule::load_schedule;

/// Environment variable naming the output directory. `--out-dir` wins.
pub const OUT_DIR_ENV: &str = "ENTANGLE_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Solver(#[from] entangle_core::Error),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl RunError {
    pub(crate) fn output(path: &Path, err: impl std::fmt::Display) -> Self {
        RunError::Output {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }
}

/// Command-line values that replace scenario entries.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub n_steps: Option<usize>,
    pub tf: Option<f64>,
    pub gamma: Option<f64>,
}

impl ScenarioConfig {
    /// Applies `o` and re-validates. A `tf` override replaces any search range.
    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        let mut touched = Vec::new();
        if let Some(n) = o.n_steps {
            self.n_steps = n;
            touched.push("n_steps");
        }
        if let Some(tf) = o.tf {
            self.horizon = Horizon::Fixed(tf);
            touched.extend(["tf", "tf_search", "tf_search.tolerance"]);
        }
        if let Some(g) = o.gamma {
            self.gamma = g;
            touched.push("gamma");
        }
        self.defaults_applied.retain(|k| !touched.contains(&k.as_str()));
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(ConfigError::Invalid {
                field: "gamma".into(),
                reason: format!("must be non-negative, got {}", self.gamma),
            });
        }
        self.validate()
    }
}
