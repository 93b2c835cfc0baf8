//! Scenario files: TOML documents describing the Hamiltonians, the initial
//! state, the horizon, and solver settings.
//!
//! ```toml
//! preset = "paper-sec4"
//! gamma = 0.1
//!
//! [tf_search]
//! t_min = 0.2
//! t_max = 2.0
//! ```
//!
//! Without a preset, `[hamiltonian]` and `[initial_state]` must give explicit
//! 4x4 matrices as nested arrays of `[re, im]` pairs.

use std::path::{Path, PathBuf};

use entangle_core::linalg::{c, ComplexMatrix};
use entangle_core::presets::{self, DEFAULT_EPSILON, DEFAULT_U_MAX};
use entangle_core::state::perturbed_separable;
use entangle_core::{DensityMatrix, HamiltonianSet, SolverConfig, TfSearch};
use serde::{Deserialize, Serialize};

use crate::ConfigError;

pub const REFERENCE_PRESET: &str = "paper-sec4";
pub const DEFAULT_GAMMA: f64 = 0.1;
pub const DEFAULT_N_STEPS: usize = 1000;
pub const DEFAULT_SEARCH: TfSearch = TfSearch {
    t_min: 0.2,
    t_max: 2.0,
    tolerance: 1e-3,
};
pub const DEFAULT_TIMESERIES: &str = "timeseries.csv";
pub const DEFAULT_SUMMARY: &str = "summary.json";
/// The Wootters column limits scenarios to two qubits.
const DIM: usize = 4;

/// `(name, description)` of every built-in preset.
pub const PRESETS: &[(&str, &str)] = &[(
    REFERENCE_PRESET,
    "H0 = zz; H1 = xy + zz, H2 = xz + zx, H3 = yz + zy; rho0 = (1 - eps)|00><00| + eps|Phi+><Phi+|; \
     eps = 0.01, gamma = 0.1, u_max = 1, n_steps = 1000, tf searched in [0.2, 2.0]",
)];

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tf_search: Option<RawSearch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hamiltonian: Option<RawHamiltonian>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_state: Option<RawInitialState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<RawSolver>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    t_min: f64,
    t_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    h0: RawMatrix,
    controls: Vec<RawMatrix>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitialState {
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_sep: Option<RawMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_rho: Option<RawMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(skip_serializing_if = "Option::is_none")]
    max_sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flip_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    denominator_floor: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timeseries: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Fixed(f64),
    Search(TfSearch),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub max_sweeps: usize,
    pub flip_fraction: f64,
    pub convergence_tol: f64,
    pub denominator_floor: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            max_sweeps: d.max_sweeps,
            flip_fraction: d.flip_fraction,
            convergence_tol: d.convergence_tol,
            denominator_floor: d.denominator_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
    pub timeseries: String,
    pub summary: String,
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub preset: Option<String>,
    pub h0: ComplexMatrix,
    pub controls: Vec<ComplexMatrix>,
    pub rho_sep: ComplexMatrix,
    pub delta_rho: ComplexMatrix,
    pub epsilon: f64,
    pub u_max: f64,
    pub gamma: f64,
    pub n_steps: usize,
    pub horizon: Horizon,
    pub solver: SolverSettings,
    pub output: OutputSettings,
    /// Keys that were absent from the file and took their default.
    pub defaults_applied: Vec<String>,
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn matrix_from_raw(field: &str, raw: &RawMatrix) -> Result<ComplexMatrix, ConfigError> {
    if raw.len() != DIM || raw.iter().any(|row| row.len() != DIM) {
        return Err(invalid(
            field,
            format!("must be a {DIM}x{DIM} matrix of [re, im] pairs"),
        ));
    }
    let data = raw.iter().flatten().map(|&[re, im]| c(re, im)).collect();
    ComplexMatrix::new(DIM, DIM, data).map_err(|e| invalid(field, e.to_string()))
}

fn matrix_to_raw(m: &ComplexMatrix) -> RawMatrix {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn require_hermitian(field: &str, m: &ComplexMatrix) -> Result<(), ConfigError> {
    let dev = m.hermiticity_error();
    if dev > entangle_core::linalg::ALGEBRA_TOL {
        return Err(invalid(field, format!("must be Hermitian (deviation {dev:.3e})")));
    }
    Ok(())
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

impl ScenarioConfig {
    /// Parses and validates a scenario document. `origin` labels errors.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| ConfigError::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawScenario) -> Result<Self, ConfigError> {
        let mut defaults = Vec::new();
        let mut default = |key: &str| defaults.push(key.to_string());

        let preset = match raw.preset.as_deref() {
            None => None,
            Some(REFERENCE_PRESET) => Some(REFERENCE_PRESET.to_string()),
            Some(other) => {
                let known: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
                return Err(invalid(
                    "preset",
                    format!("unknown preset {other:?}; known: {}", known.join(", ")),
                ));
            }
        };

        let (h0, controls) = match (&raw.hamiltonian, &preset) {
            (Some(h), _) => {
                let h0 = matrix_from_raw("hamiltonian.h0", &h.h0)?;
                require_hermitian("hamiltonian.h0", &h0)?;
                if h.controls.is_empty() {
                    return Err(invalid(
                        "hamiltonian.controls",
                        "must list at least one control Hamiltonian",
                    ));
                }
                let mut controls = Vec::with_capacity(h.controls.len());
                for (k, raw_k) in h.controls.iter().enumerate() {
                    let field = format!("hamiltonian.controls[{k}]");
                    let m = matrix_from_raw(&field, raw_k)?;
                    require_hermitian(&field, &m)?;
                    controls.push(m);
                }
                (h0, controls)
            }
            (None, Some(_)) => {
                default("hamiltonian");
                presets::reference_matrices()
            }
            (None, None) => return Err(invalid("hamiltonian", "required when no preset is given")),
        };

        let init = raw.initial_state.unwrap_or_default();
        let rho_sep = match (&init.rho_sep, &preset) {
            (Some(m), _) => matrix_from_raw("initial_state.rho_sep", m)?,
            (None, Some(_)) => {
                default("initial_state.rho_sep");
                presets::reference_separable().into_matrix()
            }
            (None, None) => return Err(invalid("initial_state.rho_sep", "required when no preset is given")),
        };
        let delta_rho = match (&init.delta_rho, &preset) {
            (Some(m), _) => matrix_from_raw("initial_state.delta_rho", m)?,
            (None, Some(_)) => {
                default("initial_state.delta_rho");
                presets::reference_perturbation().into_matrix()
            }
            (None, None) => return Err(invalid("initial_state.delta_rho", "required when no preset is given")),
        };
        let epsilon = init.epsilon.unwrap_or_else(|| {
            default("initial_state.epsilon");
            DEFAULT_EPSILON
        });

        let u_max = positive(
            "u_max",
            raw.u_max.unwrap_or_else(|| {
                default("u_max");
                DEFAULT_U_MAX
            }),
        )?;
        let gamma = raw.gamma.unwrap_or_else(|| {
            default("gamma");
            DEFAULT_GAMMA
        });
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(invalid("gamma", format!("must be non-negative, got {gamma}")));
        }
        let n_steps = raw.n_steps.unwrap_or_else(|| {
            default("n_steps");
            DEFAULT_N_STEPS
        });
        if n_steps == 0 {
            return Err(invalid("n_steps", "must be positive"));
        }

        let horizon = match (raw.tf, raw.tf_search, &preset) {
            (Some(_), Some(_), _) => {
                return Err(invalid("tf", "exactly one of tf or tf_search may be given, found both"));
            }
            (Some(tf), None, _) => Horizon::Fixed(positive("tf", tf)?),
            (None, Some(s), _) => {
                let search = TfSearch {
                    t_min: s.t_min,
                    t_max: s.t_max,
                    tolerance: s.tolerance.unwrap_or_else(|| {
                        default("tf_search.tolerance");
                        DEFAULT_SEARCH.tolerance
                    }),
                };
                search.validate().map_err(|e| invalid("tf_search", e.to_string()))?;
                Horizon::Search(search)
            }
            (None, None, Some(_)) => {
                default("tf_search");
                Horizon::Search(DEFAULT_SEARCH)
            }
            (None, None, None) => return Err(invalid("tf", "exactly one of tf or tf_search is required")),
        };

        let base = SolverSettings::default();
        let s = raw.solver.unwrap_or_default();
        let mut pick = |key: &str, v: Option<f64>, fallback: f64| {
            v.unwrap_or_else(|| {
                default(&format!("solver.{key}"));
                fallback
            })
        };
        let flip_fraction = pick("flip_fraction", s.flip_fraction, base.flip_fraction);
        let convergence_tol = pick("convergence_tol", s.convergence_tol, base.convergence_tol);
        let denominator_floor = pick("denominator_floor", s.denominator_floor, base.denominator_floor);
        let max_sweeps = s.max_sweeps.unwrap_or_else(|| {
            default("solver.max_sweeps");
            base.max_sweeps
        });

        let out = raw.output.unwrap_or_default();
        let output = OutputSettings {
            dir: out.dir,
            timeseries: out.timeseries.unwrap_or_else(|| DEFAULT_TIMESERIES.to_string()),
            summary: out.summary.unwrap_or_else(|| DEFAULT_SUMMARY.to_string()),
        };

        let cfg = ScenarioConfig {
            preset,
            h0,
            controls,
            rho_sep,
            delta_rho,
            epsilon,
            u_max,
            gamma,
            n_steps,
            horizon,
            solver: SolverSettings {
                max_sweeps,
                flip_fraction,
                convergence_tol,
                denominator_floor,
            },
            output,
            defaults_applied: defaults,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the cross-field invariants. Called by the loader and after
    /// command-line overrides.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.hamiltonians()?;
        self.initial_state()?;
        self.solver_config()
            .validate()
            .map_err(|e| invalid("solver", e.to_string()))?;
        if let Horizon::Fixed(tf) = self.horizon {
            positive("tf", tf)?;
        }
        if self.n_steps == 0 {
            return Err(invalid("n_steps", "must be positive"));
        }
        Ok(())
    }

    pub fn hamiltonians(&self) -> Result<HamiltonianSet, ConfigError> {
        HamiltonianSet::with_uniform_bound(self.h0.clone(), self.controls.clone(), self.u_max)
            .map_err(|e| invalid("hamiltonian", e.to_string()))
    }

    /// `(1 − ε)·ρ_sep + ε·δρ`.
    pub fn initial_state(&self) -> Result<DensityMatrix, ConfigError> {
        let sep = DensityMatrix::new(self.rho_sep.clone(), 2, 2)
            .map_err(|e| invalid("initial_state.rho_sep", format!("must be a density matrix: {e}")))?;
        let delta = DensityMatrix::new(self.delta_rho.clone(), 2, 2)
            .map_err(|e| invalid("initial_state.delta_rho", format!("must be a density matrix: {e}")))?;
        perturbed_separable(&sep, &delta, self.epsilon).map_err(|e| invalid("initial_state.epsilon", e.to_string()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            gamma: self.gamma,
            max_sweeps: self.solver.max_sweeps,
            flip_fraction: self.solver.flip_fraction,
            convergence_tol: self.solver.convergence_tol,
            denominator_floor: self.solver.denominator_floor,
            tf_search: match self.horizon {
                Horizon::Search(s) => Some(s),
                Horizon::Fixed(_) => None,
            },
        }
    }

    /// Fully explicit TOML that reloads to an equal config (apart from
    /// `defaults_applied`, which is empty after a reload).
    pub fn to_toml_string(&self) -> String {
        let (tf, tf_search) = match self.horizon {
            Horizon::Fixed(tf) => (Some(tf), None),
            Horizon::Search(s) => (
                None,
                Some(RawSearch {
                    t_min: s.t_min,
                    t_max: s.t_max,
                    tolerance: Some(s.tolerance),
                }),
            ),
        };
        let raw = RawScenario {
            preset: self.preset.clone(),
            u_max: Some(self.u_max),
            gamma: Some(self.gamma),
            n_steps: Some(self.n_steps),
            tf,
            tf_search,
            hamiltonian: Some(RawHamiltonian {
                h0: matrix_to_raw(&self.h0),
                controls: self.controls.iter().map(matrix_to_raw).collect(),
            }),
            initial_state: Some(RawInitialState {
                rho_sep: Some(matrix_to_raw(&self.rho_sep)),
                delta_rho: Some(matrix_to_raw(&self.delta_rho)),
                epsilon: Some(self.epsilon),
            }),
            solver: Some(RawSolver {
                max_sweeps: Some(self.solver.max_sweeps),
                flip_fraction: Some(self.solver.flip_fraction),
                convergence_tol: Some(self.solver.convergence_tol),
                denominator_floor: Some(self.solver.denominator_floor),
            }),
            output: Some(RawOutput {
                dir: self.output.dir.clone(),
                timeseries: Some(self.output.timeseries.clone()),
                summary: Some(self.output.summary.clone()),
            }),
        };
        toml::to_string(&raw).expect("scenario serializes")
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioConfig::from_toml_str(&text, &path.display().to_string())
}
