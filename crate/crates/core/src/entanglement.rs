//! Concurrence and Schmidt decomposition.
//!
//! [`concurrence_from_reduced`] is the quantity the controller optimizes,
//! `√(2·(1 − Tr ρ_A²))`. For a pure global state it is the concurrence; for
//! a mixed global state it measures how mixed the reduced state is, which is
//! why [`wootters_concurrence`] is computed alongside as a diagnostic.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, kron, pauli, singular_values, ComplexMatrix};
use crate::state::{density_from_pure, validate_density, DensityMatrix, PureState};

/// Eigenvalues below this count as zero when determining Schmidt rank.
pub const SCHMIDT_RANK_TOL: f64 = 1e-10;

/// `√(2·max(0, 1 − Tr ρ_A²))` for a valid reduced density matrix.
pub fn concurrence_from_reduced(rho_a: &ComplexMatrix) -> Result<f64> {
    if !rho_a.is_square() {
        return Err(Error::DimensionMismatch("reduced state must be square".into()));
    }
    validate_density(rho_a)?;
    Ok(concurrence_unchecked(rho_a))
}

pub(crate) fn concurrence_unchecked(rho_a: &ComplexMatrix) -> f64 {
    let purity = rho_a.inner(rho_a).re;
    (2.0 * (1.0 - purity).max(0.0)).sqrt()
}

/// `2·|α₀₀α₁₁ − α₀₁α₁₀|` for a two-qubit pure state.
pub fn concurrence_pure(psi: &PureState) -> Result<f64> {
    require_two_qubits(psi.dim_a(), psi.dim_b())?;
    let det = psi.amplitude(0, 0) * psi.amplitude(1, 1) - psi.amplitude(0, 1) * psi.amplitude(1, 0);
    Ok(2.0 * det.norm())
}

fn require_two_qubits(dim_a: usize, dim_b: usize) -> Result<()> {
    if (dim_a, dim_b) != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit measure applied to a {dim_a}x{dim_b} system"
        )));
    }
    Ok(())
}

/// Mixed-state concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`, with `λᵢ` the
/// descending square roots of the spectrum of `ρ·ρ̃`, `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
///
/// With `ρ = W·W†` (columns of `W` are `√p_i |ψ_i⟩` from the spectral
/// decomposition), the `λᵢ` are the singular values of `Wᵀ (σy⊗σy) W`. Taking
/// singular values directly avoids the square root of near-zero eigenvalues,
/// which would otherwise inflate roundoff to ~1e-8 on pure inputs.
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho.dim_a(), rho.dim_b())?;
    wootters_unchecked(rho.matrix())
}

/// Spectral weights at or below this are treated as roundoff.
const WOOTTERS_WEIGHT_FLOOR: f64 = 64.0 * f64::EPSILON;

pub(crate) fn wootters_unchecked(rho: &ComplexMatrix) -> Result<f64> {
    let eig = herm_eig(&rho.hermitian_part())?;
    let n = rho.rows();
    let mut w = ComplexMatrix::zeros(n, n);
    for (k, &p) in eig.values.iter().enumerate() {
        if p <= WOOTTERS_WEIGHT_FLOOR {
            continue;
        }
        let s = p.sqrt();
        for i in 0..n {
            w[(i, k)] = eig.vectors[(i, k)] * s;
        }
    }
    let yy = kron(&pauli::y(), &pauli::y());
    let tau = &(&w.transpose() * &yy) * &w;
    let lambdas = singular_values(&tau);
    Ok((lambdas[0] - lambdas[1..].iter().sum::<f64>()).max(0.0))
}

/// `|ψ⟩ = Σ_k √λ_k |u_k⟩ ⊗ |v_k⟩`.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// `√λ_k`, descending, one per retained term.
    pub coefficients: Vec<f64>,
    /// Columns `|u_k⟩`.
    pub basis_a: ComplexMatrix,
    /// Columns `|v_k⟩`; carries any relative phase.
    pub basis_b: ComplexMatrix,
    pub rank: usize,
}

impl SchmidtDecomposition {
    pub fn lambdas(&self) -> Vec<f64> {
        self.coefficients.iter().map(|s| s * s).collect()
    }

    /// Amplitudes `Σ_k √λ_k |u_k⟩ ⊗ |v_k⟩`.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let (da, db) = (self.basis_a.rows(), self.basis_b.rows());
        let mut out = vec![Complex64::new(0.0, 0.0); da * db];
        for (k, &s) in self.coefficients.iter().enumerate() {
            for i in 0..da {
                for j in 0..db {
                    out[i * db + j] += self.basis_a[(i, k)] * self.basis_b[(j, k)] * s;
                }
            }
        }
        out
    }
}

/// Schmidt form from the spectrum of `ρ_A = Tr_B |ψ⟩⟨ψ|`.
pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtDecomposition> {
    let (da, db) = (psi.dim_a(), psi.dim_b());
    let rho_a = density_from_pure(psi).reduced_a();
    let eig = herm_eig(&rho_a)?;
    let kept: Vec<usize> = (0..da).filter(|&k| eig.values[k] > SCHMIDT_RANK_TOL).collect();
    let rank = kept.len();
    if rank == 0 {
        return Err(Error::InvalidState("reduced state has no support".into()));
    }

    let mut basis_a = ComplexMatrix::zeros(da, rank);
    let mut basis_b = ComplexMatrix::zeros(db, rank);
    let mut coefficients = Vec::with_capacity(rank);
    for (col, &k) in kept.iter().enumerate() {
        let s = eig.values[k].sqrt();
        coefficients.push(s);
        for i in 0..da {
            basis_a[(i, col)] = eig.vectors[(i, k)];
        }
        // v_k[j] = Σ_i conj(u_k[i]) α_ij / √λ_k
        for j in 0..db {
            let v: Complex64 = (0..da).map(|i| eig.vectors[(i, k)].conj() * psi.amplitude(i, j)).sum();
            basis_b[(j, col)] = v / s;
        }
    }
    debug_assert!(basis_a.is_finite() && basis_b.is_finite());
    Ok(SchmidtDecomposition {
        coefficients,
        basis_a,
        basis_b,
        rank,
    })
}
