use std::path::{Path, PathBuf};

use entangle_core::entanglement::{concurrence_from_reduced, wootters_concurrence};
use entangle_core::pmp::{
    default_initial_schedule, forward_backward_sweep, optimize_final_time, switch_events, switching_function,
};
use entangle_core::{
    dynamics, ControlSchedule, CostateTrajectory, DensityMatrix, HamiltonianSet, OptimalSolution, Trajectory,
};

use crate::config::{Horizon, ScenarioConfig};
use crate::output::{write_summary, write_timeseries, Num, SearchPoint, Summary, TimeSeriesRow};
use crate::RunError;

/// Paths written by a run.
#[derive(Debug, Clone)]
pub struct RunFiles {
    pub timeseries: PathBuf,
    pub summary: PathBuf,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub files: RunFiles,
    pub solution: OptimalSolution,
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub files: RunFiles,
    pub trajectory: Trajectory,
}

/// `--out-dir` (or its environment variable, resolved by the caller), then
/// the scenario's `output.dir`, then the working directory.
pub fn resolve_out_dir(flag_or_env: Option<PathBuf>, cfg: &ScenarioConfig) -> PathBuf {
    flag_or_env
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn prepare(out_dir: &Path, cfg: &ScenarioConfig) -> Result<RunFiles, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|e| RunError::output(out_dir, e))?;
    Ok(RunFiles {
        timeseries: out_dir.join(&cfg.output.timeseries),
        summary: out_dir.join(&cfg.output.summary),
    })
}

fn rows_for(
    trajectory: &Trajectory,
    schedule: &ControlSchedule,
    costates: Option<(&CostateTrajectory, &HamiltonianSet)>,
) -> Result<Vec<TimeSeriesRow>, RunError> {
    let n = schedule.n_steps();
    trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .enumerate()
        .map(|(j, (&t, rho))| {
            let controls = if n == 0 {
                Vec::new()
            } else {
                schedule.cell(j.min(n - 1))
            };
            let rho_a = rho.reduced_a();
            let switching = match costates {
                Some((pi, hs)) => Some(
                    hs.controls()
                        .iter()
                        .map(|h_k| switching_function(&pi.costates[j], rho, h_k))
                        .collect::<entangle_core::Result<Vec<f64>>>()?,
                ),
                None => None,
            };
            Ok(TimeSeriesRow {
                t,
                controls,
                concurrence_eq3: concurrence_from_reduced(&rho_a)?,
                wootters_concurrence: wootters_concurrence(rho)?,
                purity_reduced: rho_a.inner(&rho_a).re,
                switching,
            })
        })
        .collect()
}

/// Replays `schedule` from the scenario's initial state.
pub fn run_simulate(
    cfg: &ScenarioConfig,
    schedule: &ControlSchedule,
    out_dir: &Path,
) -> Result<SimulateOutcome, RunError> {
    let hs = cfg.hamiltonians()?;
    let rho0 = cfg.initial_state()?;
    if schedule.n_channels() != hs.n_controls() {
        return Err(RunError::Invalid(format!(
            "schedule has {} channels but the scenario defines {} controls",
            schedule.n_channels(),
            hs.n_controls()
        )));
    }
    schedule.check_bounds(hs.u_max())?;
    let files = prepare(out_dir, cfg)?;
    let trajectory = dynamics::propagate_forward(&rho0, &hs, schedule)?;
    let rows = rows_for(&trajectory, schedule, None)?;
    write_timeseries(&files.timeseries, hs.n_controls(), &rows)?;

    let final_state: &DensityMatrix = trajectory.final_state();
    let concurrence = concurrence_from_reduced(&final_state.reduced_a())?;
    let objective = -concurrence + cfg.gamma * (schedule.tf() - schedule.t0());
    let summary = Summary {
        command: "simulate",
        status: "ok",
        error: None,
        objective: Num(objective),
        tf: Num(schedule.tf()),
        concurrence_final: Num(concurrence),
        switch_times: switch_events(schedule).iter().map(Into::into).collect(),
        sweeps_used: 0,
        transversality_residual: Num(f64::NAN),
        converged: None,
        termination: None,
        floor_active: false,
        objective_history: Vec::new(),
        search_history: Vec::new(),
        config_echo: crate::output::ConfigEcho::new(cfg),
    };
    write_summary(&files.summary, &summary)?;
    Ok(SimulateOutcome { files, trajectory })
}

fn solve(cfg: &ScenarioConfig) -> Result<OptimalSolution, RunError> {
    let hs = cfg.hamiltonians()?;
    let rho0 = cfg.initial_state()?;
    let solver = cfg.solver_config();
    let solution = match cfg.horizon {
        Horizon::Fixed(tf) => {
            let init = default_initial_schedule(&hs, tf, cfg.n_steps)?;
            forward_backward_sweep(&rho0, &hs, tf, &solver, &init)?
        }
        Horizon::Search(_) => optimize_final_time(&rho0, &hs, &solver, cfg.n_steps)?,
    };
    Ok(solution)
}

/// Solves the scenario and writes the optimal trajectory with its
/// switching functions. A solver failure still leaves a summary marked
/// `"status": "error"`.
pub fn run_optimize(cfg: &ScenarioConfig, out_dir: &Path) -> Result<OptimizeOutcome, RunError> {
    let files = prepare(out_dir, cfg)?;
    let solution = match solve(cfg) {
        Ok(s) => s,
        Err(e) => {
            write_summary(&files.summary, &Summary::failed("optimize", e.to_string(), cfg))?;
            return Err(e);
        }
    };
    let hs = cfg.hamiltonians()?;
    let rows = rows_for(
        &solution.trajectory,
        &solution.schedule,
        Some((&solution.costates, &hs)),
    )?;
    write_timeseries(&files.timeseries, hs.n_controls(), &rows)?;

    let summary = Summary {
        command: "optimize",
        status: "ok",
        error: None,
        objective: Num(solution.objective),
        tf: Num(solution.tf),
        concurrence_final: Num(solution.concurrence_final),
        switch_times: solution.switch_times.iter().map(Into::into).collect(),
        sweeps_used: solution.sweeps_used,
        transversality_residual: Num(solution.transversality_residual),
        converged: Some(solution.converged),
        termination: Some(solution.termination.as_str()),
        floor_active: solution.floor_active,
        objective_history: solution.objective_history.iter().map(|&j| Num(j)).collect(),
        search_history: solution
            .search_history
            .iter()
            .map(|&(tf, j)| SearchPoint {
                tf: Num(tf),
                objective: Num(j),
            })
            .collect(),
        config_echo: crate::output::ConfigEcho::new(cfg),
    };
    write_summary(&files.summary, &summary)?;
    Ok(OptimizeOutcome { files, solution })
}
