//! Time-series CSV and JSON summary writers. Every number is written as
//! `{:.11e}` (12 significant digits) so reruns compare byte for byte.

use std::io::Write;
use std::path::Path;

use entangle_core::pmp::SwitchEvent;
use entangle_core::ComplexMatrix;
use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::config::{Horizon, ScenarioConfig};
use crate::RunError;

pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

/// A float serialized as a bare JSON number in fixed scientific form;
/// non-finite values become `null`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format_number(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// One row per node.
#[derive(Debug, Clone)]
pub struct TimeSeriesRow {
    pub t: f64,
    /// Empty for a zero-length horizon, where no cell exists.
    pub controls: Vec<f64>,
    pub concurrence_eq3: f64,
    pub wootters_concurrence: f64,
    pub purity_reduced: f64,
    pub switching: Option<Vec<f64>>,
}

pub fn write_timeseries(path: &Path, n_channels: usize, rows: &[TimeSeriesRow]) -> Result<(), RunError> {
    let with_phi = rows.first().is_some_and(|r| r.switching.is_some());
    let mut w = csv::Writer::from_path(path).map_err(|e| RunError::output(path, e))?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=n_channels).map(|k| format!("u_{k}")));
    header.extend(["concurrence_eq3", "wootters_concurrence", "purity_reduced"].map(String::from));
    if with_phi {
        header.extend((1..=n_channels).map(|k| format!("phi_{k}")));
    }
    w.write_record(&header).map_err(|e| RunError::output(path, e))?;
    for row in rows {
        let mut record = vec![format_number(row.t)];
        if row.controls.is_empty() {
            record.extend(std::iter::repeat_n(String::new(), n_channels));
        } else {
            record.extend(row.controls.iter().map(|&u| format_number(u)));
        }
        record.extend([row.concurrence_eq3, row.wootters_concurrence, row.purity_reduced].map(format_number));
        if let Some(phi) = &row.switching {
            record.extend(phi.iter().map(|&p| format_number(p)));
        }
        w.write_record(&record).map_err(|e| RunError::output(path, e))?;
    }
    w.flush().map_err(|e| RunError::output(path, e))
}

#[derive(Debug, serde::Serialize)]
pub struct SwitchOut {
    pub channel: usize,
    pub time: Num,
}

impl From<&SwitchEvent> for SwitchOut {
    fn from(e: &SwitchEvent) -> Self {
        Self {
            channel: e.channel,
            time: Num(e.time),
        }
    }
}

#[derive(Debug, serde::Serialize)]
pub struct SearchPoint {
    pub tf: Num,
    pub objective: Num,
}

#[derive(Debug, serde::Serialize)]
pub struct Summary {
    pub command: &'static str,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub objective: Num,
    pub tf: Num,
    pub concurrence_final: Num,
    pub switch_times: Vec<SwitchOut>,
    pub sweeps_used: usize,
    pub transversality_residual: Num,
    pub converged: Option<bool>,
    pub termination: Option<&'static str>,
    pub floor_active: bool,
    pub objective_history: Vec<Num>,
    pub search_history: Vec<SearchPoint>,
    pub config_echo: ConfigEcho,
}

impl Summary {
    /// Placeholder for a run that failed before producing results.
    pub fn failed(command: &'static str, error: String, cfg: &ScenarioConfig) -> Self {
        Self {
            command,
            status: "error",
            error: Some(error),
            objective: Num(f64::NAN),
            tf: Num(f64::NAN),
            concurrence_final: Num(f64::NAN),
            switch_times: Vec::new(),
            sweeps_used: 0,
            transversality_residual: Num(f64::NAN),
            converged: None,
            termination: None,
            floor_active: false,
            objective_history: Vec::new(),
            search_history: Vec::new(),
            config_echo: ConfigEcho::new(cfg),
        }
    }
}

type EchoMatrix = Vec<Vec<[Num; 2]>>;

fn echo_matrix(m: &ComplexMatrix) -> EchoMatrix {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [Num(m[(i, j)].re), Num(m[(i, j)].im)]).collect())
        .collect()
}

#[derive(Debug, serde::Serialize)]
pub struct EchoSearch {
    pub t_min: Num,
    pub t_max: Num,
    pub tolerance: Num,
}

#[derive(Debug, serde::Serialize)]
pub struct EchoSolver {
    pub max_sweeps: usize,
    pub flip_fraction: Num,
    pub convergence_tol: Num,
    pub denominator_floor: Num,
}

/// The effective scenario, including every default that was filled in.
#[derive(Debug, serde::Serialize)]
pub struct ConfigEcho {
    pub preset: Option<String>,
    pub u_max: Num,
    pub gamma: Num,
    pub n_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tf: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tf_search: Option<EchoSearch>,
    pub epsilon: Num,
    pub h0: EchoMatrix,
    pub controls: Vec<EchoMatrix>,
    pub rho_sep: EchoMatrix,
    pub delta_rho: EchoMatrix,
    pub solver: EchoSolver,
    pub defaults_applied: Vec<String>,
}

impl ConfigEcho {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        let (tf, tf_search) = match cfg.horizon {
            Horizon::Fixed(tf) => (Some(Num(tf)), None),
            Horizon::Search(s) => (
                None,
                Some(EchoSearch {
                    t_min: Num(s.t_min),
                    t_max: Num(s.t_max),
                    tolerance: Num(s.tolerance),
                }),
            ),
        };
        Self {
            preset: cfg.preset.clone(),
            u_max: Num(cfg.u_max),
            gamma: Num(cfg.gamma),
            n_steps: cfg.n_steps,
            tf,
            tf_search,
            epsilon: Num(cfg.epsilon),
            h0: echo_matrix(&cfg.h0),
            controls: cfg.controls.iter().map(echo_matrix).collect(),
            rho_sep: echo_matrix(&cfg.rho_sep),
            delta_rho: echo_matrix(&cfg.delta_rho),
            solver: EchoSolver {
                max_sweeps: cfg.solver.max_sweeps,
                flip_fraction: Num(cfg.solver.flip_fraction),
                convergence_tol: Num(cfg.solver.convergence_tol),
                denominator_floor: Num(cfg.solver.denominator_floor),
            },
            defaults_applied: cfg.defaults_applied.clone(),
        }
    }
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| RunError::output(path, e))?;
    text.push('\n');
    let mut file = std::fs::File::create(path).map_err(|e| RunError::output(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| RunError::output(path, e))
}
