//! Hamiltonian assembly and exact propagation under piecewise-constant
//! controls.
//!
//! Controls live on cells `[t_j, t_{j+1})`; states and costates live on the
//! `n_steps + 1` nodes. Each cell is advanced with the exact propagator
//! `exp(-i H_j dt)`, so there is no integration error beyond the eigensolver.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{propagator, ComplexMatrix, ALGEBRA_TOL};
use crate::state::{repair_matrix, DensityMatrix, REPAIR_WARN_DRIFT};

/// Controls may exceed their bound by this much before being rejected.
pub const BOUND_TOL: f64 = 1e-12;
/// Steps between unconditional roundoff repairs.
pub const REPAIR_INTERVAL: usize = 100;
/// Drift (trace error plus Hermiticity error) that forces an early repair.
pub const REPAIR_DRIFT: f64 = 1e-10;

/// Drift Hamiltonian `H₀`, control Hamiltonians `H_k`, and per-channel bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSet {
    h0: ComplexMatrix,
    controls: Vec<ComplexMatrix>,
    u_max: Vec<f64>,
}

impl HamiltonianSet {
    pub fn new(h0: ComplexMatrix, controls: Vec<ComplexMatrix>, u_max: Vec<f64>) -> Result<Self> {
        if !h0.is_square() {
            return Err(Error::DimensionMismatch("drift Hamiltonian is not square".into()));
        }
        h0.require_hermitian(ALGEBRA_TOL)?;
        for (k, h) in controls.iter().enumerate() {
            if h.rows() != h0.rows() || h.cols() != h0.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "control Hamiltonian {} is {}x{}, drift is {}x{}",
                    k + 1,
                    h.rows(),
                    h.cols(),
                    h0.rows(),
                    h0.cols()
                )));
            }
            h.require_hermitian(ALGEBRA_TOL)?;
        }
        if u_max.len() != controls.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} bounds for {} control channels",
                u_max.len(),
                controls.len()
            )));
        }
        if let Some(bad) = u_max.iter().find(|&&u| !(u.is_finite() && u > 0.0)) {
            return Err(Error::InvalidArgument(format!("control bound {bad} must be positive")));
        }
        Ok(Self { h0, controls, u_max })
    }

    /// Same bound on every channel.
    pub fn with_uniform_bound(h0: ComplexMatrix, controls: Vec<ComplexMatrix>, u_max: f64) -> Result<Self> {
        let bounds = vec![u_max; controls.len()];
        Self::new(h0, controls, bounds)
    }

    pub fn h0(&self) -> &ComplexMatrix {
        &self.h0
    }

    pub fn controls(&self) -> &[ComplexMatrix] {
        &self.controls
    }

    pub fn u_max(&self) -> &[f64] {
        &self.u_max
    }

    pub fn dim(&self) -> usize {
        self.h0.rows()
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }
}

/// Piecewise-constant control on a uniform grid over `[t0, tf]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    t0: f64,
    tf: f64,
    n_steps: usize,
    /// `values[k][j]`: channel `k`, cell `j`.
    values: Vec<Vec<f64>>,
}

impl ControlSchedule {
    /// A zero-length horizon (`tf == t0`) is expressed with `n_steps == 0`.
    pub fn new(t0: f64, tf: f64, n_steps: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        if !(t0.is_finite() && tf.is_finite()) {
            return Err(Error::InvalidArgument("schedule times must be finite".into()));
        }
        if n_steps == 0 {
            if tf != t0 {
                return Err(Error::InvalidArgument(
                    "a schedule with no cells must have tf == t0".into(),
                ));
            }
        } else if tf <= t0 {
            return Err(Error::InvalidArgument(format!(
                "schedule needs tf > t0, got t0 = {t0}, tf = {tf}"
            )));
        }
        for (k, row) in values.iter().enumerate() {
            if row.len() != n_steps {
                return Err(Error::DimensionMismatch(format!(
                    "channel {} has {} values for {n_steps} cells",
                    k + 1,
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "channel {} has a non-finite value",
                    k + 1
                )));
            }
        }
        Ok(Self {
            t0,
            tf,
            n_steps,
            values,
        })
    }

    /// Every cell holds `u`.
    pub fn constant(t0: f64, tf: f64, n_steps: usize, u: &[f64]) -> Result<Self> {
        Self::new(t0, tf, n_steps, u.iter().map(|&v| vec![v; n_steps]).collect())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_channels(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        if self.n_steps == 0 {
            0.0
        } else {
            (self.tf - self.t0) / self.n_steps as f64
        }
    }

    /// Node times `t0 + j·dt`, `j = 0..=n_steps`.
    pub fn node_times(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..=self.n_steps)
            .map(|j| {
                if j == self.n_steps {
                    self.tf
                } else {
                    self.t0 + j as f64 * dt
                }
            })
            .collect()
    }

    /// Control vector of cell `j`.
    pub fn cell(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    pub(crate) fn set(&mut self, channel: usize, cell: usize, value: f64) {
        self.values[channel][cell] = value;
    }

    pub fn check_bounds(&self, u_max: &[f64]) -> Result<()> {
        if u_max.len() != self.values.len() {
            return Err(Error::DimensionMismatch(format!(
                "schedule has {} channels, Hamiltonian set has {}",
                self.values.len(),
                u_max.len()
            )));
        }
        for (k, (row, &bound)) in self.values.iter().zip(u_max).enumerate() {
            if let Some((j, &v)) = row.iter().enumerate().find(|(_, v)| v.abs() > bound + BOUND_TOL) {
                return Err(Error::ControlBound {
                    channel: k + 1,
                    cell: j,
                    value: v,
                    u_max: bound,
                });
            }
        }
        Ok(())
    }
}

/// States on the time nodes of a schedule.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("a trajectory has at least one node")
    }
}

/// Full-space costates on the time nodes of a schedule.
#[derive(Debug, Clone)]
pub struct CostateTrajectory {
    pub times: Vec<f64>,
    pub costates: Vec<ComplexMatrix>,
}

/// `H₀ + Σ_k u_k H_k`.
pub fn assemble_hamiltonian(hs: &HamiltonianSet, u: &[f64]) -> Result<ComplexMatrix> {
    if u.len() != hs.n_controls() {
        return Err(Error::DimensionMismatch(format!(
            "{} control values for {} channels",
            u.len(),
            hs.n_controls()
        )));
    }
    Ok(u.iter()
        .zip(&hs.controls)
        .fold(hs.h0.clone(), |acc, (&uk, hk)| &acc + &hk.scale_real(uk)))
}

/// One exact step `U ρ U†`, `U = exp(-i h dt)`, followed by a repair.
pub fn step_state(rho: &DensityMatrix, h: &ComplexMatrix, dt: f64) -> Result<DensityMatrix> {
    if h.rows() != rho.dim() || h.cols() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} Hamiltonian for a {}-dimensional state",
            h.rows(),
            h.cols(),
            rho.dim()
        )));
    }
    let u = propagator(h, dt)?;
    let mut next = DensityMatrix::from_parts(rho.matrix().conjugate_by(&u), rho.dim_a(), rho.dim_b());
    next.repair();
    Ok(next)
}

/// Exact propagators for every cell of a schedule, shared between cells
/// with identical control vectors.
#[derive(Debug, Clone)]
pub(crate) struct CellPropagators {
    steps: Vec<CellStep>,
    cell_index: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct CellStep {
    pub hamiltonian: ComplexMatrix,
    pub full: ComplexMatrix,
    pub half: ComplexMatrix,
}

impl CellPropagators {
    pub fn build(hs: &HamiltonianSet, sched: &ControlSchedule) -> Result<Self> {
        Self::build_with_cache(hs, sched, &mut PropagatorCache::default())
    }

    pub fn build_with_cache(hs: &HamiltonianSet, sched: &ControlSchedule, cache: &mut PropagatorCache) -> Result<Self> {
        if sched.n_channels() != hs.n_controls() {
            return Err(Error::DimensionMismatch(format!(
                "schedule has {} channels, Hamiltonian set has {}",
                sched.n_channels(),
                hs.n_controls()
            )));
        }
        let dt = sched.dt();
        if cache.dt.to_bits() != dt.to_bits() {
            cache.entries.clear();
            cache.dt = dt;
        }

        let mut keys: Vec<Vec<u64>> = Vec::new();
        let mut local: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut cell_index = Vec::with_capacity(sched.n_steps());
        for j in 0..sched.n_steps() {
            let key: Vec<u64> = sched.values.iter().map(|row| row[j].to_bits()).collect();
            let idx = *local.entry(key.clone()).or_insert_with(|| {
                keys.push(key);
                keys.len() - 1
            });
            cell_index.push(idx);
        }

        let missing: Vec<&Vec<u64>> = keys.iter().filter(|k| !cache.entries.contains_key(*k)).collect();
        let fresh: Vec<(Vec<u64>, CellStep)> = missing
            .par_iter()
            .map(|key| {
                let u: Vec<f64> = key.iter().map(|&b| f64::from_bits(b)).collect();
                let hamiltonian = assemble_hamiltonian(hs, &u)?;
                let full = propagator(&hamiltonian, dt)?;
                let half = propagator(&hamiltonian, dt / 2.0)?;
                Ok((
                    (*key).clone(),
                    CellStep {
                        hamiltonian,
                        full,
                        half,
                    },
                ))
            })
            .collect::<Result<_>>()?;
        cache.entries.extend(fresh);

        let steps = keys.iter().map(|k| cache.entries[k].clone()).collect();
        Ok(Self { steps, cell_index })
    }

    pub fn cell(&self, j: usize) -> &CellStep {
        &self.steps[self.cell_index[j]]
    }

    pub fn len(&self) -> usize {
        self.cell_index.len()
    }
}

/// Memo of cell propagators keyed by the exact control vector, valid for a
/// single step size. Bang-bang schedules only ever visit `2^m` distinct
/// control vectors, so this collapses most eigendecompositions.
#[derive(Debug, Default)]
pub(crate) struct PropagatorCache {
    dt: f64,
    entries: HashMap<Vec<u64>, CellStep>,
}

impl PropagatorCache {
    /// Cell step for control vector `u` at the cached step size.
    pub fn step(&mut self, hs: &HamiltonianSet, u: &[f64]) -> Result<&CellStep> {
        let key: Vec<u64> = u.iter().map(|v| v.to_bits()).collect();
        if !self.entries.contains_key(&key) {
            let hamiltonian = assemble_hamiltonian(hs, u)?;
            let full = propagator(&hamiltonian, self.dt)?;
            let half = propagator(&hamiltonian, self.dt / 2.0)?;
            self.entries.insert(
                key.clone(),
                CellStep {
                    hamiltonian,
                    full,
                    half,
                },
            );
        }
        Ok(&self.entries[&key])
    }
}

fn drift(m: &ComplexMatrix, expected_trace: f64) -> f64 {
    (m.trace().re - expected_trace).abs() + m.hermiticity_error()
}

pub(crate) fn forward_with(rho0: &DensityMatrix, props: &CellPropagators, times: Vec<f64>) -> Trajectory {
    let (da, db) = (rho0.dim_a(), rho0.dim_b());
    let mut states = Vec::with_capacity(props.len() + 1);
    states.push(rho0.clone());
    let mut current = rho0.matrix().clone();
    for j in 0..props.len() {
        current = current.conjugate_by(&props.cell(j).full);
        if (j + 1).is_multiple_of(REPAIR_INTERVAL) || drift(&current, 1.0) > REPAIR_DRIFT {
            let fixed = repair_matrix(&current);
            let change = fixed.max_abs_diff(&current);
            if change > REPAIR_WARN_DRIFT {
                log::warn!("state repair at cell {j} corrected a drift of {change:.3e}");
            }
            current = fixed;
        }
        states.push(DensityMatrix::from_parts(current.clone(), da, db));
    }
    Trajectory { times, states }
}

pub(crate) fn backward_with(pi_tf: &ComplexMatrix, props: &CellPropagators, times: Vec<f64>) -> CostateTrajectory {
    let n = props.len();
    let mut costates = vec![pi_tf.clone(); n + 1];
    let mut current = pi_tf.clone();
    for j in (0..n).rev() {
        current = current.conjugate_by_adjoint(&props.cell(j).full);
        if (n - j).is_multiple_of(REPAIR_INTERVAL) {
            current = current.hermitian_part();
        }
        costates[j] = current.clone();
    }
    CostateTrajectory { times, costates }
}

/// Forward trajectory of `ρ̇ = -i[H(t), ρ]` on the schedule's nodes.
pub fn propagate_forward(rho0: &DensityMatrix, hs: &HamiltonianSet, sched: &ControlSchedule) -> Result<Trajectory> {
    if rho0.dim() != hs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional state with {}-dimensional Hamiltonians",
            rho0.dim(),
            hs.dim()
        )));
    }
    sched.check_bounds(hs.u_max())?;
    let props = CellPropagators::build(hs, sched)?;
    Ok(forward_with(rho0, &props, sched.node_times()))
}

/// Backward costate sweep `Π_j = U_j† Π_{j+1} U_j` from `Π(t_f) = pi_tf`.
pub fn propagate_costate_backward(
    pi_tf: &ComplexMatrix,
    hs: &HamiltonianSet,
    sched: &ControlSchedule,
) -> Result<CostateTrajectory> {
    if pi_tf.rows() != hs.dim() || pi_tf.cols() != hs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} terminal costate with {}-dimensional Hamiltonians",
            pi_tf.rows(),
            pi_tf.cols(),
            hs.dim()
        )));
    }
    pi_tf.require_hermitian(1e-9)?;
    sched.check_bounds(hs.u_max())?;
    let props = CellPropagators::build(hs, sched)?;
    Ok(backward_with(pi_tf, &props, sched.node_times()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, pauli};
    use crate::presets::reference_hamiltonians;
    use crate::state::{density_from_pure, PureState};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn zero_set() -> HamiltonianSet {
        HamiltonianSet::with_uniform_bound(ComplexMatrix::zeros(4, 4), vec![ComplexMatrix::zeros(4, 4)], 1.0).unwrap()
    }

    #[test]
    fn assemble_examples() {
        let hs = reference_hamiltonians(1.0);
        let zz = kron(&pauli::z(), &pauli::z());
        assert!(assemble_hamiltonian(&hs, &[0.0, 0.0, 0.0]).unwrap().approx_eq(&zz, 0.0));

        let h1 = &kron(&pauli::x(), &pauli::y()) + &zz;
        let expected = &zz + &h1;
        assert!(assemble_hamiltonian(&hs, &[1.0, 0.0, 0.0])
            .unwrap()
            .approx_eq(&expected, ALGEBRA_TOL));

        let h2 = &kron(&pauli::x(), &pauli::z()) + &kron(&pauli::z(), &pauli::x());
        let expected = &zz - &h2;
        assert!(assemble_hamiltonian(&hs, &[0.0, -1.0, 0.0])
            .unwrap()
            .approx_eq(&expected, ALGEBRA_TOL));

        assert!(assemble_hamiltonian(&hs, &[1.0]).is_err());
    }

    #[test]
    fn hamiltonian_set_validation() {
        let skew = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(HamiltonianSet::with_uniform_bound(skew.clone(), vec![], 1.0).is_err());
        assert!(HamiltonianSet::with_uniform_bound(pauli::z(), vec![skew], 1.0).is_err());
        assert!(HamiltonianSet::with_uniform_bound(pauli::z(), vec![pauli::x()], 0.0).is_err());
        assert!(HamiltonianSet::new(pauli::z(), vec![pauli::x()], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(ControlSchedule::new(0.0, 1.0, 2, vec![vec![0.0]]).is_err());
        assert!(ControlSchedule::new(1.0, 1.0, 2, vec![vec![0.0, 0.0]]).is_err());
        assert!(ControlSchedule::new(0.0, 1.0, 0, vec![vec![]]).is_err());
        let empty = ControlSchedule::new(0.5, 0.5, 0, vec![vec![]]).unwrap();
        assert_eq!(empty.node_times(), vec![0.5]);
        let s = ControlSchedule::constant(0.0, 1.0, 4, &[1.5]).unwrap();
        assert!(matches!(s.check_bounds(&[1.0]), Err(Error::ControlBound { .. })));
        assert!(s.check_bounds(&[1.5]).is_ok());
        assert_eq!(s.node_times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn step_leaves_eigenstate_unchanged() {
        let rho = density_from_pure(&PureState::basis(2, 2, 0).unwrap());
        let zz = kron(&pauli::z(), &pauli::z());
        for dt in [0.1, 1.0, 3.7] {
            let next = step_state(&rho, &zz, dt).unwrap();
            assert!(next.matrix().approx_eq(rho.matrix(), 1e-12));
        }
    }

    #[test]
    fn step_rotates_bloch_vector() {
        // exp(-i σz t) turns qubit A's Bloch vector by 2t about z:
        // ⟨σx⟩ = cos 2t, ⟨σy⟩ = sin 2t.
        let s = FRAC_1_SQRT_2;
        let plus0 = PureState::new(vec![c(s, 0.0), c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0)], 2, 2).unwrap();
        let rho = density_from_pure(&plus0);
        let h = kron(&pauli::z(), &pauli::identity());
        let next = step_state(&rho, &h, PI / 4.0).unwrap();
        let ra = next.reduced_a();
        let bloch_x = (&ra * &pauli::x()).trace().re;
        let bloch_y = (&ra * &pauli::y()).trace().re;
        assert!(bloch_x.abs() < 1e-12);
        assert!((bloch_y - 1.0).abs() < 1e-12);

        // dt = π/2 is a half turn.
        let next = step_state(&rho, &h, PI / 2.0).unwrap();
        let ra = next.reduced_a();
        assert!(((&ra * &pauli::x()).trace().re + 1.0).abs() < 1e-12);
        assert!((next.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_generator_is_stationary() {
        let rho = density_from_pure(&PureState::basis(2, 2, 3).unwrap());
        let sched = ControlSchedule::constant(0.0, 1.0, 10, &[0.7]).unwrap();
        let traj = propagate_forward(&rho, &zero_set(), &sched).unwrap();
        assert_eq!(traj.states.len(), 11);
        assert!(traj.states.iter().all(|s| s.matrix().approx_eq(rho.matrix(), 1e-15)));

        let pi = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let co = propagate_costate_backward(&pi, &zero_set(), &sched).unwrap();
        assert!(co.costates.iter().all(|p| p.approx_eq(&pi, 1e-15)));
    }

    #[test]
    fn single_cell_matches_step_state() {
        let hs = reference_hamiltonians(1.0);
        let rho = density_from_pure(&PureState::basis(2, 2, 0).unwrap());
        let sched = ControlSchedule::constant(0.0, 0.3, 1, &[1.0, -1.0, 1.0]).unwrap();
        let traj = propagate_forward(&rho, &hs, &sched).unwrap();
        let h = assemble_hamiltonian(&hs, &[1.0, -1.0, 1.0]).unwrap();
        let direct = step_state(&rho, &h, 0.3).unwrap();
        assert!(traj.final_state().matrix().approx_eq(direct.matrix(), 1e-13));
    }

    #[test]
    fn forward_rejects_out_of_bound_schedule() {
        let hs = reference_hamiltonians(1.0);
        let rho = density_from_pure(&PureState::basis(2, 2, 0).unwrap());
        let sched = ControlSchedule::constant(0.0, 1.0, 5, &[1.2, 0.0, 0.0]).unwrap();
        assert!(matches!(
            propagate_forward(&rho, &hs, &sched),
            Err(Error::ControlBound { channel: 1, .. })
        ));
    }
}
