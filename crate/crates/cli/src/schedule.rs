//! Control schedule files.
//!
//! ```toml
//! t0 = 0.0
//! tf = 1.0
//! n_steps = 4
//! values = [[-1, -1, 1, 1], [-1, -1, -1, -1], [1, 1, 1, 1]]
//! ```

use std::path::Path;

use entangle_core::ControlSchedule;
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    #[serde(default)]
    t0: f64,
    tf: f64,
    n_steps: usize,
    /// `values[k][j]`: channel `k`, cell `j`.
    values: Vec<Vec<f64>>,
}

pub fn schedule_from_toml_str(text: &str, origin: &str) -> Result<ControlSchedule, ConfigError> {
    let raw: RawSchedule = toml::from_str(text).map_err(|e| ConfigError::Parse {
        origin: origin.to_string(),
        message: e.to_string(),
    })?;
    ControlSchedule::new(raw.t0, raw.tf, raw.n_steps, raw.values).map_err(|e| ConfigError::Invalid {
        field: "values".into(),
        reason: e.to_string(),
    })
}

pub fn schedule_to_toml_string(sched: &ControlSchedule) -> String {
    let raw = RawSchedule {
        t0: sched.t0(),
        tf: sched.tf(),
        n_steps: sched.n_steps(),
        values: sched.values().to_vec(),
    };
    toml::to_string(&raw).expect("schedule serializes")
}

pub fn load_schedule(path: &Path) -> Result<ControlSchedule, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    schedule_from_toml_str(&text, &path.display().to_string())
}
