//! Reference implementations that share no code path with the library's
//! eigendecomposition-based propagation.

#![allow(dead_code)]

use entangle_core::linalg::{c, ComplexMatrix};
use entangle_core::{ControlSchedule, HamiltonianSet};
use num_complex::Complex64;

pub fn hamiltonian_at(hs: &HamiltonianSet, u: &[f64]) -> ComplexMatrix {
    let mut h = hs.h0().clone();
    for (hk, &uk) in hs.controls().iter().zip(u) {
        h = &h + &hk.scale_real(uk);
    }
    h
}

/// `exp(−i·h·dt)` by scaling and squaring a truncated Taylor series.
pub fn expm_taylor(h: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let n = h.rows();
    let a = h.scale(c(0.0, -dt));
    let norm: f64 = a.as_slice().iter().map(|z| z.norm()).sum();
    let squarings = norm.log2().ceil().max(0.0) as u32 + 4;
    let a = a.scale_real(1.0 / 2f64.powi(squarings as i32));
    let mut term = ComplexMatrix::identity(n);
    let mut sum = ComplexMatrix::identity(n);
    for k in 1..=24 {
        term = (&term * &a).scale_real(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn liouville(h: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    (&(h * rho) - &(rho * h)).scale(c(0.0, -1.0))
}

/// Classical RK4 on `ρ̇ = −i[H(t), ρ]` with `substeps` steps per cell.
pub fn rk4_final(rho0: &ComplexMatrix, hs: &HamiltonianSet, sched: &ControlSchedule, substeps: usize) -> ComplexMatrix {
    let h_step = sched.dt() / substeps as f64;
    let mut rho = rho0.clone();
    for j in 0..sched.n_steps() {
        let h = hamiltonian_at(hs, &sched.cell(j));
        for _ in 0..substeps {
            let k1 = liouville(&h, &rho);
            let k2 = liouville(&h, &(&rho + &k1.scale_real(h_step / 2.0)));
            let k3 = liouville(&h, &(&rho + &k2.scale_real(h_step / 2.0)));
            let k4 = liouville(&h, &(&rho + &k3.scale_real(h_step)));
            let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
            rho = &rho + &incr.scale_real(h_step / 6.0);
        }
    }
    rho
}

/// Final state from a product of Taylor-series propagators.
pub fn taylor_final(rho0: &ComplexMatrix, hs: &HamiltonianSet, sched: &ControlSchedule) -> ComplexMatrix {
    let mut rho = rho0.clone();
    for j in 0..sched.n_steps() {
        let u = expm_taylor(&hamiltonian_at(hs, &sched.cell(j)), sched.dt());
        rho = &(&u * &rho) * &u.adjoint();
    }
    rho
}

/// `−√(2(1 − Tr ρ_A²)) + γ·t_f` with the partial trace written out for two qubits.
pub fn objective_oracle(rho: &ComplexMatrix, tf: f64, gamma: f64) -> f64 {
    let mut rho_a = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in rho_a.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().enumerate() {
            *entry = rho[(2 * i, 2 * k)] + rho[(2 * i + 1, 2 * k + 1)];
        }
    }
    let purity: f64 = rho_a.iter().flatten().map(|z| z.norm_sqr()).sum();
    -(2.0 * (1.0 - purity)).max(0.0).sqrt() + gamma * tf
}

pub fn max_entry_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
