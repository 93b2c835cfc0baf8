//! Fixtures shared by the criterion benchmarks.

use entangle_core::pmp::default_initial_schedule;
use entangle_core::presets::{reference_hamiltonians, reference_initial_state, DEFAULT_EPSILON, DEFAULT_U_MAX};
use entangle_core::{ControlSchedule, DensityMatrix, HamiltonianSet};

/// Reference scenario with all controls at their lower bound over `[0, tf]`.
pub fn reference_fixture(tf: f64, n_steps: usize) -> (DensityMatrix, HamiltonianSet, ControlSchedule) {
    let hs = reference_hamiltonians(DEFAULT_U_MAX);
    let rho0 = reference_initial_state(DEFAULT_EPSILON).expect("reference state is valid");
    let sched = default_initial_schedule(&hs, tf, n_steps).expect("reference schedule is valid");
    (rho0, hs, sched)
}
