//! Minimum-principle machinery for `min J = −C(ρ(t_f)) + Γ·t_f` under
//! `ρ̇ = -i[H₀ + Σ u_k H_k, ρ]`, `|u_k| ≤ u_max`.
//!
//! The costate is carried on the full space. Its terminal value is the
//! reduced gradient `π = √2·ρ_A / √(1 − Tr ρ_A²)` lifted to `π ⊗ I_B`, and it
//! evolves backward as `Π̇ = -i[H, Π]`. Partial-trace duality,
//! `Tr(π† Tr_B X) = Tr((π ⊗ I)† X)`, makes the full-space switching function
//! `Φ_k = −i·Tr(Π† [H_k, ρ])` coincide with the reduced form wherever the
//! lift applies, without needing a closed form for `∂ρ̇_A/∂ρ_A` when A and B
//! are correlated.
//!
//! Controls follow the bang-bang law `u_k = +u_max` where `Φ_k < 0` and
//! `−u_max` where `Φ_k > 0`. [`forward_backward_sweep`] iterates the law with
//! a damped, objective-guarded flip budget; [`optimize_final_time`] wraps it
//! in a search over the free final time.

use rayon::prelude::*;

use crate::dynamics::{
    backward_with, forward_with, CellPropagators, ControlSchedule, CostateTrajectory, HamiltonianSet, PropagatorCache,
    Trajectory,
};
use crate::entanglement::concurrence_unchecked;
use crate::error::{Error, Result};
use crate::linalg::{c, commutator, kron, partial_trace_b, ComplexMatrix, I};
use crate::state::DensityMatrix;

/// `|Φ| ≤ TIE_TOL` keeps the previous control value.
pub const TIE_TOL: f64 = 1e-12;
/// Largest tolerated imaginary part of a switching function.
pub const IMAG_TOL: f64 = 1e-8;
/// Number of uniformly spaced final times scanned before the golden-section
/// refinement.
pub const TF_GRID_POINTS: usize = 10;

/// Bracket and tolerance for the free-final-time search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfSearch {
    pub t_min: f64,
    pub t_max: f64,
    pub tolerance: f64,
}

impl TfSearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "final-time search needs 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidArgument("search tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Weight `Γ` of the final-time penalty.
    pub gamma: f64,
    pub max_sweeps: usize,
    /// Share of the wanted sign flips applied per sweep, largest `|Φ|` first.
    pub flip_fraction: f64,
    /// Stop once an accepted sweep improves the objective by less than this.
    pub convergence_tol: f64,
    /// Lower bound on `1 − Tr ρ_A²` in the terminal costate.
    pub denominator_floor: f64,
    pub tf_search: Option<TfSearch>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            max_sweeps: 200,
            flip_fraction: 0.2,
            convergence_tol: 1e-10,
            denominator_floor: 1e-9,
            tf_search: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be positive".into()));
        }
        if !(self.flip_fraction > 0.0 && self.flip_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "flip_fraction must lie in (0, 1], got {}",
                self.flip_fraction
            )));
        }
        if !(self.convergence_tol >= 0.0 && self.convergence_tol.is_finite()) {
            return Err(Error::InvalidArgument("convergence_tol must be non-negative".into()));
        }
        if !(self.denominator_floor > 0.0 && self.denominator_floor.is_finite()) {
            return Err(Error::InvalidArgument("denominator_floor must be positive".into()));
        }
        if let Some(search) = &self.tf_search {
            search.validate()?;
        }
        Ok(())
    }
}

/// `J = −C(Tr_B ρ_f) + Γ·t_f`.
pub fn objective(rho_final: &DensityMatrix, tf: f64, gamma: f64) -> Result<f64> {
    if !(tf >= 0.0 && tf.is_finite()) {
        return Err(Error::InvalidArgument(format!("final time {tf} must be non-negative")));
    }
    Ok(objective_unchecked(rho_final, tf, gamma))
}

fn objective_unchecked(rho_final: &DensityMatrix, tf: f64, gamma: f64) -> f64 {
    -concurrence_unchecked(&rho_final.reduced_a()) + gamma * tf
}

/// Terminal costate `π(t_f)` and its full-space lift.
#[derive(Debug, Clone)]
pub struct TerminalCostate {
    /// `π ⊗ I_B`.
    pub lifted: ComplexMatrix,
    /// `π = (√2 / D)·ρ_A`, `D = √max(1 − Tr ρ_A², floor)`.
    pub reduced: ComplexMatrix,
    /// The floor replaced `1 − Tr ρ_A²`.
    pub floor_active: bool,
}

pub fn terminal_costate(rho_a_tf: &ComplexMatrix, dim_b: usize, floor: f64) -> TerminalCostate {
    let gap = 1.0 - rho_a_tf.inner(rho_a_tf).re;
    let floor_active = gap < floor;
    let denominator = gap.max(floor).sqrt();
    let reduced = rho_a_tf.scale_real(std::f64::consts::SQRT_2 / denominator);
    let lifted = kron(&reduced, &ComplexMatrix::identity(dim_b));
    TerminalCostate {
        lifted,
        reduced,
        floor_active,
    }
}

/// `Φ_k = −i·Tr(Π† [H_k, ρ])`, checked to be real.
pub fn switching_function(pi_full: &ComplexMatrix, rho: &DensityMatrix, h_k: &ComplexMatrix) -> Result<f64> {
    let (value, imag) = switching_value(pi_full, rho.matrix(), h_k)?;
    if imag.abs() > IMAG_TOL {
        return Err(Error::ComplexSwitching(imag));
    }
    Ok(value)
}

/// Real part and imaginary residue of `−i·Tr(Π† [H_k, ρ])`.
fn switching_value(pi_full: &ComplexMatrix, rho: &ComplexMatrix, h_k: &ComplexMatrix) -> Result<(f64, f64)> {
    let comm = commutator(h_k, rho)?;
    if pi_full.rows() != comm.rows() || pi_full.cols() != comm.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} costate against {}x{} state",
            pi_full.rows(),
            pi_full.cols(),
            comm.rows(),
            comm.cols()
        )));
    }
    let z = -I * pi_full.inner(&comm);
    Ok((z.re, z.im))
}

/// Minimizing control for one channel given its switching function.
pub fn bang_bang_update(phi: f64, u_prev: f64, u_max: f64) -> f64 {
    if phi < -TIE_TOL {
        u_max
    } else if phi > TIE_TOL {
        -u_max
    } else {
        u_prev
    }
}

/// Why the sweep stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Every cell already satisfies the bang-bang law.
    NoFlips,
    /// An accepted sweep changed the objective by less than the tolerance.
    ObjectiveTolerance,
    /// No single wanted flip lowers the objective: a local minimum at the
    /// resolution of the grid.
    Stalled,
    MaxSweeps,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        !matches!(self, Termination::MaxSweeps)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Termination::NoFlips => "no-flips",
            Termination::ObjectiveTolerance => "objective-tolerance",
            Termination::Stalled => "stalled",
            Termination::MaxSweeps => "max-sweeps",
        }
    }
}

/// A control sign change on `channel` (1-based) at node time `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchEvent {
    pub channel: usize,
    pub time: f64,
}

#[derive(Debug, Clone)]
pub struct OptimalSolution {
    pub schedule: ControlSchedule,
    pub trajectory: Trajectory,
    pub costates: CostateTrajectory,
    /// `switching[k][j]`: `Φ_k` at the midpoint of cell `j`.
    pub switching: Vec<Vec<f64>>,
    pub objective: f64,
    pub concurrence_final: f64,
    pub tf: f64,
    pub switch_times: Vec<SwitchEvent>,
    pub sweeps_used: usize,
    pub transversality_residual: f64,
    pub converged: bool,
    pub termination: Termination,
    /// The denominator floor was active in at least one terminal costate
    /// evaluated during the run.
    pub floor_active: bool,
    /// Objective of the starting schedule followed by each accepted sweep.
    pub objective_history: Vec<f64>,
    /// Largest imaginary residue seen in any switching function.
    pub max_switching_imag: f64,
    /// Hamiltonian of the last cell.
    pub final_hamiltonian: ComplexMatrix,
    pub denominator_floor: f64,
    /// `(t_f, J*(t_f))` for each final time evaluated by the outer search;
    /// empty for a fixed horizon.
    pub search_history: Vec<(f64, f64)>,
}

impl OptimalSolution {
    pub fn initial_objective(&self) -> f64 {
        self.objective_history[0]
    }

    /// Every cell sits exactly on a bound.
    pub fn is_bang_bang(&self, u_max: &[f64]) -> bool {
        self.schedule
            .values()
            .iter()
            .zip(u_max)
            .all(|(row, &b)| row.iter().all(|&v| v == b || v == -b))
    }
}

/// Forward pass with cached propagators.
struct Forward {
    props: CellPropagators,
    trajectory: Trajectory,
    objective: f64,
    concurrence: f64,
}

fn run_forward(
    rho0: &DensityMatrix,
    hs: &HamiltonianSet,
    sched: &ControlSchedule,
    cache: &mut PropagatorCache,
    gamma: f64,
) -> Result<Forward> {
    let props = CellPropagators::build_with_cache(hs, sched, cache)?;
    let trajectory = forward_with(rho0, &props, sched.node_times());
    let concurrence = concurrence_unchecked(&trajectory.final_state().reduced_a());
    let objective = -concurrence + gamma * (sched.tf() - sched.t0());
    if !objective.is_finite() {
        return Err(Error::Breakdown(format!("objective evaluated to {objective}")));
    }
    Ok(Forward {
        props,
        trajectory,
        objective,
        concurrence,
    })
}

/// Backward pass and per-cell switching functions.
struct Backward {
    costates: CostateTrajectory,
    switching: Vec<Vec<f64>>,
    max_imag: f64,
    floor_active: bool,
}

#[allow(clippy::needless_range_loop)]
fn run_backward(fwd: &Forward, hs: &HamiltonianSet, times: Vec<f64>, floor: f64) -> Result<Backward> {
    let final_state = fwd.trajectory.final_state();
    let terminal = terminal_costate(&final_state.reduced_a(), final_state.dim_b(), floor);
    let costates = backward_with(&terminal.lifted, &fwd.props, times);

    let n = fwd.props.len();
    let mut switching = vec![vec![0.0; n]; hs.n_controls()];
    let mut max_imag: f64 = 0.0;
    for j in 0..n {
        let step = fwd.props.cell(j);
        let rho_mid = fwd.trajectory.states[j].matrix().conjugate_by(&step.half);
        let pi_mid = costates.costates[j + 1].conjugate_by_adjoint(&step.half);
        for (k, h_k) in hs.controls().iter().enumerate() {
            let (value, imag) = switching_value(&pi_mid, &rho_mid, h_k)?;
            if imag.abs() > IMAG_TOL {
                return Err(Error::ComplexSwitching(imag));
            }
            if !value.is_finite() {
                return Err(Error::Breakdown(format!(
                    "switching function {} at cell {j} is {value}",
                    k + 1
                )));
            }
            max_imag = max_imag.max(imag.abs());
            switching[k][j] = value;
        }
    }
    Ok(Backward {
        costates,
        switching,
        max_imag,
        floor_active: terminal.floor_active,
    })
}

/// Every change of value between consecutive cells, ordered by time then channel.
pub fn switch_events(sched: &ControlSchedule) -> Vec<SwitchEvent> {
    let times = sched.node_times();
    let mut events = Vec::new();
    for (k, row) in sched.values().iter().enumerate() {
        for j in 1..row.len() {
            if row[j] != row[j - 1] {
                events.push(SwitchEvent {
                    channel: k + 1,
                    time: times[j],
                });
            }
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.channel.cmp(&b.channel)));
    events
}

/// First single flip, in the given order, that does not raise the objective.
///
/// Candidates are screened through `ρ_f' = S_j U_j' ρ_j U_j'† S_j†`, with
/// `S_j = U_{n-1} ⋯ U_{j+1}`, so each costs two matrix products. A candidate
/// that passes is confirmed with a full forward pass.
fn single_flip_fallback(
    rho0: &DensityMatrix,
    hs: &HamiltonianSet,
    schedule: &ControlSchedule,
    candidates: &[(f64, usize, usize, f64)],
    cache: &mut PropagatorCache,
    gamma: f64,
    fwd: &Forward,
) -> Result<Option<(ControlSchedule, Forward)>> {
    let n = fwd.props.len();
    let mut suffix = vec![ComplexMatrix::identity(hs.dim()); n];
    for j in (0..n.saturating_sub(1)).rev() {
        suffix[j] = suffix[j + 1].mul_unchecked(&fwd.props.cell(j + 1).full);
    }
    let penalty = gamma * (schedule.tf() - schedule.t0());
    for &(_, k, j, target) in candidates {
        let mut u = schedule.cell(j);
        u[k] = target;
        let m = suffix[j].mul_unchecked(&cache.step(hs, &u)?.full);
        let rho_f = fwd.trajectory.states[j].matrix().conjugate_by(&m);
        let rho_a = partial_trace_b(&rho_f, rho0.dim_a(), rho0.dim_b())?;
        if -concurrence_unchecked(&rho_a) + penalty > fwd.objective {
            continue;
        }
        let mut trial = schedule.clone();
        trial.set(k, j, target);
        let trial_fwd = run_forward(rho0, hs, &trial, cache, gamma)?;
        if trial_fwd.objective <= fwd.objective {
            return Ok(Some((trial, trial_fwd)));
        }
    }
    Ok(None)
}

/// Iterates forward propagation, terminal costate, backward propagation, and
/// the bang-bang law until the schedule is stationary.
///
/// Each sweep collects the cells whose control disagrees with the sign of
/// `Φ`, sorts them by `|Φ|` (largest first), and applies the leading
/// `flip_fraction` share. The trial is kept only if the objective does not
/// increase; otherwise the share is halved and retried for the same sweep.
pub fn forward_backward_sweep(
    rho0: &DensityMatrix,
    hs: &HamiltonianSet,
    tf: f64,
    cfg: &SolverConfig,
    initial_schedule: &ControlSchedule,
) -> Result<OptimalSolution> {
    cfg.validate()?;
    if rho0.dim() != hs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional state with {}-dimensional Hamiltonians",
            rho0.dim(),
            hs.dim()
        )));
    }
    if initial_schedule.n_steps() == 0 {
        return Err(Error::InvalidArgument("the sweep needs at least one cell".into()));
    }
    let horizon = initial_schedule.tf() - initial_schedule.t0();
    if (horizon - tf).abs() > 1e-12 * tf.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "initial schedule spans {horizon}, expected {tf}"
        )));
    }
    initial_schedule.check_bounds(hs.u_max())?;

    let gamma = cfg.gamma;
    let floor = cfg.denominator_floor;
    let times = initial_schedule.node_times();
    let mut cache = PropagatorCache::default();

    let mut schedule = initial_schedule.clone();
    let mut fwd = run_forward(rho0, hs, &schedule, &mut cache, gamma)?;
    let mut history = vec![fwd.objective];
    let mut floor_active = false;
    let mut max_imag: f64 = 0.0;
    let mut sweeps = 0;
    let mut termination = Termination::MaxSweeps;

    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let bwd = run_backward(&fwd, hs, times.clone(), floor)?;
        floor_active |= bwd.floor_active;
        max_imag = max_imag.max(bwd.max_imag);

        // (|Φ|, channel, cell, target)
        let mut wanted: Vec<(f64, usize, usize, f64)> = Vec::new();
        for (k, row) in schedule.values().iter().enumerate() {
            for (j, &u) in row.iter().enumerate() {
                let phi = bwd.switching[k][j];
                let target = bang_bang_update(phi, u, hs.u_max()[k]);
                if target != u {
                    wanted.push((phi.abs(), k, j, target));
                }
            }
        }
        if wanted.is_empty() {
            termination = Termination::NoFlips;
            break;
        }
        wanted.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));

        let mut fraction = cfg.flip_fraction;
        let accepted = loop {
            let count = ((fraction * wanted.len() as f64).ceil() as usize).clamp(1, wanted.len());
            let mut trial = schedule.clone();
            for &(_, k, j, target) in &wanted[..count] {
                trial.set(k, j, target);
            }
            let trial_fwd = run_forward(rho0, hs, &trial, &mut cache, gamma)?;
            if trial_fwd.objective <= fwd.objective {
                break Some((trial, trial_fwd));
            }
            if count == 1 {
                break single_flip_fallback(rho0, hs, &schedule, &wanted[1..], &mut cache, gamma, &fwd)?;
            }
            fraction /= 2.0;
        };

        let Some((trial, trial_fwd)) = accepted else {
            termination = Termination::Stalled;
            break;
        };
        let change = fwd.objective - trial_fwd.objective;
        schedule = trial;
        fwd = trial_fwd;
        history.push(fwd.objective);
        log::debug!("sweep {sweeps}: J = {:.12e}", fwd.objective);
        if change.abs() < cfg.convergence_tol {
            termination = Termination::ObjectiveTolerance;
            break;
        }
    }

    let bwd = run_backward(&fwd, hs, times, floor)?;
    floor_active |= bwd.floor_active;
    max_imag = max_imag.max(bwd.max_imag);
    let final_hamiltonian = fwd.props.cell(fwd.props.len() - 1).hamiltonian.clone();

    let mut solution = OptimalSolution {
        switch_times: switch_events(&schedule),
        schedule,
        trajectory: fwd.trajectory,
        costates: bwd.costates,
        switching: bwd.switching,
        objective: fwd.objective,
        concurrence_final: fwd.concurrence,
        tf,
        sweeps_used: sweeps,
        transversality_residual: f64::NAN,
        converged: termination.is_converged(),
        termination,
        floor_active,
        objective_history: history,
        max_switching_imag: max_imag,
        final_hamiltonian,
        denominator_floor: floor,
        search_history: Vec::new(),
    };
    solution.transversality_residual = transversality_residual(&solution, gamma);
    Ok(solution)
}

/// `|H(t_f) − (Tr(G·ρ̇_A) − Γ)|` with `H(t_f) = Tr(Π(t_f)† ρ̇(t_f))`,
/// `G = √2·ρ_A / (2·√(1 − Tr ρ_A²))`, and both rates taken under the last
/// cell's Hamiltonian. Diagnostic only.
pub fn transversality_residual(sol: &OptimalSolution, gamma: f64) -> f64 {
    let rho = sol.trajectory.final_state();
    let Some(pi) = sol.costates.costates.last() else {
        return f64::NAN;
    };
    let Ok(comm) = commutator(&sol.final_hamiltonian, rho.matrix()) else {
        return f64::NAN;
    };
    let rho_dot = comm.scale(-I);
    let pontryagin = pi.inner(&rho_dot).re;

    let rho_a = rho.reduced_a();
    let Ok(rho_a_dot) = partial_trace_b(&rho_dot, rho.dim_a(), rho.dim_b()) else {
        return f64::NAN;
    };
    let gap = (1.0 - rho_a.inner(&rho_a).re).max(sol.denominator_floor);
    let g = rho_a.scale(c(std::f64::consts::SQRT_2 / (2.0 * gap.sqrt()), 0.0));
    let boundary = (&g * &rho_a_dot).trace().re - gamma;
    (pontryagin - boundary).abs()
}

/// Objective and cell-midpoint switching functions of a fixed schedule.
#[derive(Debug, Clone)]
pub struct ScheduleEvaluation {
    pub objective: f64,
    pub concurrence_final: f64,
    /// `switching[k][j]`.
    pub switching: Vec<Vec<f64>>,
    pub floor_active: bool,
}

/// One forward and one backward pass on `sched` without updating it.
pub fn evaluate_schedule(
    rho0: &DensityMatrix,
    hs: &HamiltonianSet,
    sched: &ControlSchedule,
    cfg: &SolverConfig,
) -> Result<ScheduleEvaluation> {
    cfg.validate()?;
    if rho0.dim() != hs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional state with {}-dimensional Hamiltonians",
            rho0.dim(),
            hs.dim()
        )));
    }
    if sched.n_steps() == 0 {
        return Err(Error::InvalidArgument("the schedule needs at least one cell".into()));
    }
    sched.check_bounds(hs.u_max())?;
    let mut cache = PropagatorCache::default();
    let fwd = run_forward(rho0, hs, sched, &mut cache, cfg.gamma)?;
    let bwd = run_backward(&fwd, hs, sched.node_times(), cfg.denominator_floor)?;
    Ok(ScheduleEvaluation {
        objective: fwd.objective,
        concurrence_final: fwd.concurrence,
        switching: bwd.switching,
        floor_active: bwd.floor_active,
    })
}

/// All channels at their lower bound.
pub fn default_initial_schedule(hs: &HamiltonianSet, tf: f64, n_steps: usize) -> Result<ControlSchedule> {
    let lower: Vec<f64> = hs.u_max().iter().map(|u| -u).collect();
    ControlSchedule::constant(0.0, tf, n_steps, &lower)
}

fn better(a: &OptimalSolution, b: &OptimalSolution) -> bool {
    a.objective < b.objective || (a.objective == b.objective && a.tf < b.tf)
}

fn keep_better(best: &mut OptimalSolution, candidate: &OptimalSolution) {
    if better(candidate, best) {
        *best = candidate.clone();
    }
}

/// Minimizes `J*(t_f)` over the configured bracket.
///
/// `J*` is scanned on a uniform grid of [`TF_GRID_POINTS`] final times
/// (evaluated in parallel), then refined by golden-section search between
/// the neighbours of the best grid point. Every inner solve starts from
/// [`default_initial_schedule`]. Returns the best solution seen.
pub fn optimize_final_time(
    rho0: &DensityMatrix,
    hs: &HamiltonianSet,
    cfg: &SolverConfig,
    n_steps: usize,
) -> Result<OptimalSolution> {
    cfg.validate()?;
    let search = cfg
        .tf_search
        .ok_or_else(|| Error::InvalidArgument("final-time search range is not configured".into()))?;
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be positive".into()));
    }
    let solve = |tf: f64| -> Result<OptimalSolution> {
        let init = default_initial_schedule(hs, tf, n_steps)?;
        forward_backward_sweep(rho0, hs, tf, cfg, &init)
    };

    let span = search.t_max - search.t_min;
    let grid: Vec<f64> = (0..TF_GRID_POINTS)
        .map(|i| {
            if i + 1 == TF_GRID_POINTS {
                search.t_max
            } else {
                search.t_min + span * i as f64 / (TF_GRID_POINTS - 1) as f64
            }
        })
        .collect();
    let scanned: Vec<OptimalSolution> = grid.par_iter().map(|&tf| solve(tf)).collect::<Result<_>>()?;

    let mut history: Vec<(f64, f64)> = scanned.iter().map(|s| (s.tf, s.objective)).collect();
    let best_idx = (0..scanned.len())
        .reduce(|a, b| if better(&scanned[b], &scanned[a]) { b } else { a })
        .expect("grid is non-empty");
    let mut a = grid[best_idx.saturating_sub(1)];
    let mut b = grid[(best_idx + 1).min(grid.len() - 1)];
    let mut best = scanned.into_iter().nth(best_idx).expect("index in range");

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut s1 = solve(x1)?;
    let mut s2 = solve(x2)?;
    for s in [&s1, &s2] {
        history.push((s.tf, s.objective));
        keep_better(&mut best, s);
    }
    while b - a > search.tolerance {
        let fresh = if s1.objective <= s2.objective {
            b = x2;
            x2 = x1;
            s2 = s1;
            x1 = b - inv_phi * (b - a);
            s1 = solve(x1)?;
            &s1
        } else {
            a = x1;
            x1 = x2;
            s1 = s2;
            x2 = a + inv_phi * (b - a);
            s2 = solve(x2)?;
            &s2
        };
        history.push((fresh.tf, fresh.objective));
        keep_better(&mut best, fresh);
    }
    best.search_history = history;
    Ok(best)
}

/// Running minimum of the objectives in a search history.
pub fn best_so_far(history: &[(f64, f64)]) -> Vec<f64> {
    history
        .iter()
        .scan(f64::INFINITY, |best, &(_, j)| {
            *best = best.min(j);
            Some(*best)
        })
        .collect()
}
