//! The reference two-qubit scenario: drift `σz⊗σz`, three symmetric
//! two-body control Hamiltonians, and a start near `|00⟩`.

use crate::dynamics::HamiltonianSet;
use crate::error::Result;
use crate::linalg::{kron, pauli, ComplexMatrix};
use crate::state::{bell_state, density_from_pure, perturbed_separable, BellKind, DensityMatrix, PureState};

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_U_MAX: f64 = 1.0;

/// `a ⊗ b + b ⊗ a`.
fn symmetric_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &kron(a, b) + &kron(b, a)
}

/// `[H₀, H₁, H₂, H₃]`.
pub fn reference_matrices() -> (ComplexMatrix, Vec<ComplexMatrix>) {
    let (x, y, z) = (pauli::x(), pauli::y(), pauli::z());
    let zz = kron(&z, &z);
    let h1 = &kron(&x, &y) + &zz;
    let h2 = symmetric_pair(&x, &z);
    let h3 = symmetric_pair(&y, &z);
    (zz, vec![h1, h2, h3])
}

pub fn reference_hamiltonians(u_max: f64) -> HamiltonianSet {
    let (h0, controls) = reference_matrices();
    HamiltonianSet::with_uniform_bound(h0, controls, u_max).expect("reference Hamiltonians are Hermitian")
}

/// `|00⟩⟨00|`.
pub fn reference_separable() -> DensityMatrix {
    density_from_pure(&PureState::basis(2, 2, 0).expect("index 0 exists"))
}

/// `|Φ⁺⟩⟨Φ⁺|`.
pub fn reference_perturbation() -> DensityMatrix {
    density_from_pure(&bell_state(BellKind::PhiPlus))
}

/// `(1 − ε)|00⟩⟨00| + ε|Φ⁺⟩⟨Φ⁺|`.
pub fn reference_initial_state(epsilon: f64) -> Result<DensityMatrix> {
    perturbed_separable(&reference_separable(), &reference_perturbation(), epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn reference_controls_are_hermitian_and_traceless() {
        let (h0, controls) = reference_matrices();
        for h in std::iter::once(&h0).chain(&controls) {
            assert!(h.is_hermitian(0.0));
            assert!(h.trace().norm() < 1e-15);
        }
        // σx⊗σz + σz⊗σx has entries on |00⟩↔|01⟩ and |00⟩↔|10⟩
        assert_eq!(controls[1][(0, 1)], c(1.0, 0.0));
        assert_eq!(controls[1][(0, 2)], c(1.0, 0.0));
    }
}
