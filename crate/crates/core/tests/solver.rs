mod common;

use common::{objective_oracle, taylor_final};
use entangle_core::linalg::{kron, pauli, ComplexMatrix};
use entangle_core::pmp::{
    best_so_far, default_initial_schedule, evaluate_schedule, forward_backward_sweep, optimize_final_time,
    terminal_costate, Termination,
};
use entangle_core::presets::{reference_hamiltonians, reference_initial_state};
use entangle_core::state::{bell_state, density_from_pure, perturbed_separable, BellKind, PureState};
use entangle_core::{ControlSchedule, DensityMatrix, HamiltonianSet, SolverConfig, TfSearch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference_solve(tf: f64, n_steps: usize, gamma: f64) -> entangle_core::OptimalSolution {
    let hs = reference_hamiltonians(1.0);
    let rho0 = reference_initial_state(0.01).unwrap();
    let cfg = SolverConfig {
        gamma,
        ..SolverConfig::default()
    };
    let init = default_initial_schedule(&hs, tf, n_steps).unwrap();
    forward_backward_sweep(&rho0, &hs, tf, &cfg, &init).unwrap()
}

/// Diagonal Hamiltonians and a diagonal state: nothing moves.
fn static_scenario() -> (DensityMatrix, HamiltonianSet) {
    let z = pauli::z();
    let id = pauli::identity();
    let hs = HamiltonianSet::with_uniform_bound(kron(&z, &z), vec![kron(&z, &id), kron(&id, &z)], 1.0).unwrap();
    let a = density_from_pure(&PureState::basis(2, 2, 0).unwrap());
    let b = density_from_pure(&PureState::basis(2, 2, 3).unwrap());
    (perturbed_separable(&a, &b, 0.5).unwrap(), hs)
}

#[test]
fn static_scenario_stops_after_one_sweep() {
    let (rho0, hs) = static_scenario();
    let cfg = SolverConfig::default();
    let init = default_initial_schedule(&hs, 0.5, 50).unwrap();
    let sol = forward_backward_sweep(&rho0, &hs, 0.5, &cfg, &init).unwrap();
    assert_eq!(sol.sweeps_used, 1);
    assert_eq!(sol.termination, Termination::NoFlips);
    assert!(sol.converged);
    assert!(sol.switching.iter().flatten().all(|&phi| phi.abs() < 1e-14));
    assert_eq!(sol.schedule, init);
    assert!(sol.switch_times.is_empty());
    assert!((sol.transversality_residual - cfg.gamma).abs() < 1e-12);
    assert!(!sol.floor_active);
}

#[test]
fn switching_function_predicts_finite_differences() {
    let hs = reference_hamiltonians(1.0);
    let rho0 = reference_initial_state(0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 80;
    let tf = 0.6;
    let values: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect())
        .collect();
    let sched = ControlSchedule::new(0.0, tf, n, values).unwrap();
    let cfg = SolverConfig::default();
    let eval = evaluate_schedule(&rho0, &hs, &sched, &cfg).unwrap();

    let base = taylor_final(rho0.matrix(), &hs, &sched);
    assert!((objective_oracle(&base, tf, cfg.gamma) - eval.objective).abs() < 1e-10);

    let h = 1e-5;
    let mut checked = 0;
    while checked < 20 {
        let k = rng.gen_range(0..3);
        let j = rng.gen_range(0..n);
        let phi = eval.switching[k][j];
        if phi.abs() <= 1e-6 {
            continue;
        }
        let bumped = |delta: f64| {
            let mut v = sched.values().to_vec();
            v[k][j] += delta;
            let s = ControlSchedule::new(0.0, tf, n, v).unwrap();
            objective_oracle(&taylor_final(rho0.matrix(), &hs, &s), tf, cfg.gamma)
        };
        let fd = (bumped(h) - bumped(-h)) / (2.0 * h);
        assert_eq!(fd.signum(), phi.signum(), "cell {j} channel {k}: fd {fd}, phi {phi}");
        let predicted = phi * sched.dt();
        assert!(
            (fd - predicted).abs() < 1e-2 * predicted.abs() + 1e-9,
            "fd {fd} vs {predicted}"
        );
        checked += 1;
    }
}

#[test]
fn accepted_objectives_never_increase() {
    let sol = reference_solve(0.6, 300, 0.1);
    assert!(sol.objective_history.len() > 1);
    assert!(sol.objective_history.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*sol.objective_history.last().unwrap(), sol.objective);
    assert!(sol.objective < sol.initial_objective());
    assert!(sol.is_bang_bang(&[1.0; 3]));
    assert!(sol.converged);
}

#[test]
fn converged_controls_follow_switching_sign() {
    let sol = reference_solve(0.6, 300, 0.1);
    let hs = reference_hamiltonians(1.0);
    let rho0 = reference_initial_state(0.01).unwrap();
    let mut agree = 0;
    let mut blocked = 0;
    let mut total = 0;
    for (k, (row, phis)) in sol.schedule.values().iter().zip(&sol.switching).enumerate() {
        for (j, (&u, &phi)) in row.iter().zip(phis).enumerate() {
            if phi.abs() <= 1e-12 {
                continue;
            }
            if u == -phi.signum() {
                agree += 1;
                total += 1;
                continue;
            }
            // a flip the solver withheld must not lower the objective
            let mut v = sol.schedule.values().to_vec();
            v[k][j] = -u;
            let flipped = ControlSchedule::new(0.0, 0.6, 300, v).unwrap();
            let j_flipped = objective_oracle(&taylor_final(rho0.matrix(), &hs, &flipped), 0.6, 0.1);
            if j_flipped > sol.objective {
                blocked += 1;
            } else {
                total += 1;
            }
        }
    }
    assert!(
        agree as f64 >= 0.99 * total as f64,
        "{agree} of {total} ({blocked} blocked)"
    );
}

#[test]
fn terminal_costate_matches_final_state() {
    let sol = reference_solve(0.5, 200, 0.1);
    let rho_f = sol.trajectory.final_state();
    let expected = terminal_costate(&rho_f.reduced_a(), 2, 1e-9).lifted;
    let last = sol.costates.costates.last().unwrap();
    assert!(last.approx_eq(&expected, 1e-12));
    let pairing = last.inner(rho_f.matrix());
    let first = sol.costates.costates[0].inner(sol.trajectory.states[0].matrix());
    assert!((pairing - first).norm() < 1e-9);
}

#[test]
fn final_concurrence_is_consistent() {
    let sol = reference_solve(0.6, 300, 0.1);
    let rho_f = sol.trajectory.final_state().matrix();
    assert!((objective_oracle(rho_f, 0.6, 0.1) - sol.objective).abs() < 1e-12);
    assert!((sol.concurrence_final + sol.objective - 0.06).abs() < 1e-12);
    let events_sorted = sol.switch_times.windows(2).all(|w| w[0].time <= w[1].time);
    assert!(events_sorted);
}

#[test]
fn heavy_time_penalty_picks_shortest_horizon() {
    let hs = reference_hamiltonians(1.0);
    let rho0 = reference_initial_state(0.01).unwrap();
    let cfg = SolverConfig {
        gamma: 1e3,
        tf_search: Some(TfSearch {
            t_min: 0.2,
            t_max: 2.0,
            tolerance: 1e-3,
        }),
        ..SolverConfig::default()
    };
    let sol = optimize_final_time(&rho0, &hs, &cfg, 50).unwrap();
    assert!((sol.tf - 0.2).abs() <= 1e-3);
}

#[test]
fn free_search_history_is_sound() {
    let hs = reference_hamiltonians(1.0);
    let rho0 = reference_initial_state(0.01).unwrap();
    let cfg = SolverConfig {
        gamma: 0.0,
        tf_search: Some(TfSearch {
            t_min: 0.2,
            t_max: 1.0,
            tolerance: 1e-2,
        }),
        ..SolverConfig::default()
    };
    let sol = optimize_final_time(&rho0, &hs, &cfg, 100).unwrap();
    let best = best_so_far(&sol.search_history);
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*best.last().unwrap(), sol.objective);
    assert!(sol.tf >= 0.2 && sol.tf <= 1.0);
}

#[test]
fn bell_start_already_optimal_for_static_drift() {
    let z = pauli::z();
    let id = pauli::identity();
    let hs = HamiltonianSet::with_uniform_bound(kron(&z, &z), vec![kron(&z, &id)], 1.0).unwrap();
    let rho0 = density_from_pure(&bell_state(BellKind::PhiPlus));
    let init = default_initial_schedule(&hs, 0.3, 30).unwrap();
    let sol = forward_backward_sweep(&rho0, &hs, 0.3, &SolverConfig::default(), &init).unwrap();
    assert!((sol.concurrence_final - 1.0).abs() < 1e-12);
    assert!(sol.switching.iter().flatten().all(|phi| phi.is_finite()));
}

#[test]
fn rejects_mismatched_horizon() {
    let hs = reference_hamiltonians(1.0);
    let rho0 = reference_initial_state(0.01).unwrap();
    let init = default_initial_schedule(&hs, 0.5, 10).unwrap();
    assert!(forward_backward_sweep(&rho0, &hs, 0.6, &SolverConfig::default(), &init).is_err());
    let bad = ControlSchedule::constant(0.0, 0.5, 10, &[2.0, 0.0, 0.0]).unwrap();
    assert!(forward_backward_sweep(&rho0, &hs, 0.5, &SolverConfig::default(), &bad).is_err());
}

#[test]
fn separable_start_engages_floor() {
    let rho0 = reference_initial_state(0.0).unwrap();
    let (_, hs) = static_scenario();
    let init = default_initial_schedule(&hs, 0.5, 40).unwrap();
    let sol = forward_backward_sweep(&rho0, &hs, 0.5, &SolverConfig::default(), &init).unwrap();
    assert!(sol.floor_active);
    assert!(sol.objective.is_finite() && sol.transversality_residual.is_finite());
    assert!(sol.switching.iter().flatten().all(|phi| phi.is_finite()));
    assert!(sol.costates.costates.iter().all(ComplexMatrix::is_finite));

    let hs = reference_hamiltonians(1.0);
    let init = default_initial_schedule(&hs, 0.5, 100).unwrap();
    let sol = forward_backward_sweep(&rho0, &hs, 0.5, &SolverConfig::default(), &init).unwrap();
    assert!(sol.objective.is_finite() && sol.concurrence_final.is_finite());
    assert!(sol.transversality_residual.is_finite());
}
