//! Pure states and density matrices of a bipartite system.
//!
//! Basis ordering is `|00⟩, |01⟩, |10⟩, |11⟩` (subsystem A is the slow index).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, herm_eig, partial_trace_b, ComplexMatrix, ALGEBRA_TOL, EIGEN_TOL};

/// Allowed negative eigenvalue of a density matrix before it is rejected.
pub const PSD_TOL: f64 = 1e-9;
/// Accumulated drift above which a repair is logged.
pub const REPAIR_WARN_DRIFT: f64 = 1e-8;

/// Normalized state vector `Σ α_ij |i⟩_A |j⟩_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    dim_a: usize,
    dim_b: usize,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>, dim_a: usize, dim_b: usize) -> Result<Self> {
        check_dims(amplitudes.len(), dim_a, dim_b)?;
        let norm: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if (norm - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::InvalidState(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            amplitudes,
            dim_a,
            dim_b,
        })
    }

    /// Scales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>, dim_a: usize, dim_b: usize) -> Result<Self> {
        check_dims(amplitudes.len(), dim_a, dim_b)?;
        let norm = amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
            dim_a,
            dim_b,
        })
    }

    /// Computational basis state `|index⟩` of the joint space.
    pub fn basis(dim_a: usize, dim_b: usize, index: usize) -> Result<Self> {
        let d = dim_a * dim_b;
        if index >= d {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {d}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); d];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes, dim_a, dim_b)
    }

    /// `|a⟩ ⊗ |b⟩`; both factors are normalized first.
    pub fn product(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        let amplitudes = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        Self::normalized(amplitudes, a.len(), b.len())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// `α_ij`.
    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes[i * self.dim_b + j]
    }
}

fn check_dims(len: usize, dim_a: usize, dim_b: usize) -> Result<()> {
    if dim_a == 0 || dim_b == 0 || len != dim_a * dim_b {
        return Err(Error::DimensionMismatch(format!(
            "{len} amplitudes for a {dim_a}x{dim_b} system"
        )));
    }
    Ok(())
}

/// The four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];
}

pub fn bell_state(kind: BellKind) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match kind {
        BellKind::PhiPlus => [s, 0.0, 0.0, s],
        BellKind::PhiMinus => [s, 0.0, 0.0, -s],
        BellKind::PsiPlus => [0.0, s, s, 0.0],
        BellKind::PsiMinus => [0.0, s, -s, 0.0],
    };
    PureState {
        amplitudes: amps.iter().map(|&x| c(x, 0.0)).collect(),
        dim_a: 2,
        dim_b: 2,
    }
}

/// Hermitian, unit-trace, positive-semidefinite state of the joint system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positivity.
    pub fn new(matrix: ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        let d = dim_a * dim_b;
        if dim_a == 0 || dim_b == 0 || matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for a {dim_a}x{dim_b} system",
                matrix.rows(),
                matrix.cols()
            )));
        }
        validate_density(&matrix)?;
        Ok(Self { matrix, dim_a, dim_b })
    }

    /// Skips validation. Callers guarantee the result of a unitary
    /// conjugation (or similar) of an already valid state.
    pub(crate) fn from_parts(matrix: ComplexMatrix, dim_a: usize, dim_b: usize) -> Self {
        Self { matrix, dim_a, dim_b }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// `ρ_A = Tr_B ρ`.
    pub fn reduced_a(&self) -> ComplexMatrix {
        partial_trace_b(&self.matrix, self.dim_a, self.dim_b)
            .expect("density matrix dimensions are consistent by construction")
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.matrix.inner(&self.matrix).re
    }

    /// Hermitizes and renormalizes the trace in place, returning the size of
    /// the correction (max entry change).
    pub fn repair(&mut self) -> f64 {
        let fixed = repair_matrix(&self.matrix);
        let drift = fixed.max_abs_diff(&self.matrix);
        if drift > REPAIR_WARN_DRIFT {
            log::warn!("density matrix repair corrected a drift of {drift:.3e}");
        }
        self.matrix = fixed;
        drift
    }
}

pub(crate) fn repair_matrix(m: &ComplexMatrix) -> ComplexMatrix {
    let h = m.hermitian_part();
    let tr = h.trace().re;
    h.scale_real(1.0 / tr)
}

/// Checks the density-matrix invariants on a square matrix.
pub fn validate_density(m: &ComplexMatrix) -> Result<()> {
    m.require_hermitian(EIGEN_TOL)
        .map_err(|e| Error::InvalidState(format!("not Hermitian: {e}")))?;
    let tr = m.trace();
    if (tr.re - 1.0).abs() > EIGEN_TOL || tr.im.abs() > EIGEN_TOL {
        return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
    }
    let smallest = herm_eig(m)?.values.last().copied().unwrap_or(0.0);
    if smallest < -PSD_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {smallest:.3e}")));
    }
    Ok(())
}

/// `|ψ⟩⟨ψ|`.
pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    let m = ComplexMatrix::outer(&psi.amplitudes, &psi.amplitudes);
    DensityMatrix::from_parts(m, psi.dim_a, psi.dim_b)
}

/// `(1 − ε)·ρ_sep + ε·δρ`.
pub fn perturbed_separable(rho_sep: &DensityMatrix, delta_rho: &DensityMatrix, epsilon: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "mixing weight {epsilon} outside [0, 1]"
        )));
    }
    if (rho_sep.dim_a, rho_sep.dim_b) != (delta_rho.dim_a, delta_rho.dim_b) {
        return Err(Error::DimensionMismatch(format!(
            "mixing a {}x{} state with a {}x{} state",
            rho_sep.dim_a, rho_sep.dim_b, delta_rho.dim_a, delta_rho.dim_b
        )));
    }
    let m = &rho_sep.matrix.scale_real(1.0 - epsilon) + &delta_rho.matrix.scale_real(epsilon);
    Ok(DensityMatrix::from_parts(m, rho_sep.dim_a, rho_sep.dim_b))
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_amplitudes() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = bell_state(BellKind::PhiPlus);
        assert_eq!(phi.amplitudes(), &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let psi = bell_state(BellKind::PsiMinus);
        assert_eq!(psi.amplitudes(), &[c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]);
        for kind in BellKind::ALL {
            let norm: f64 = bell_state(kind).amplitudes().iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < ALGEBRA_TOL);
        }
    }

    #[test]
    fn density_from_basis_and_bell() {
        let rho = density_from_pure(&PureState::basis(2, 2, 0).unwrap());
        assert!(rho.matrix().approx_eq(
            &ComplexMatrix::from_real(4, 4, &[1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.]).unwrap(),
            0.0
        ));

        let rho = density_from_pure(&bell_state(BellKind::PhiPlus));
        let mut expected = ComplexMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected[(i, j)] = c(0.5, 0.0);
        }
        assert!(rho.matrix().approx_eq(&expected, ALGEBRA_TOL));
        assert!(DensityMatrix::new(rho.matrix().clone(), 2, 2).is_ok());
        assert!((rho.purity() - 1.0).abs() < ALGEBRA_TOL);
    }

    #[test]
    fn perturbed_separable_reference() {
        let sep = density_from_pure(&PureState::basis(2, 2, 0).unwrap());
        let bell = density_from_pure(&bell_state(BellKind::PhiPlus));

        assert_eq!(perturbed_separable(&sep, &bell, 0.0).unwrap().matrix(), sep.matrix());
        assert_eq!(perturbed_separable(&sep, &bell, 1.0).unwrap().matrix(), bell.matrix());

        let rho = perturbed_separable(&sep, &bell, 0.01).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = c(0.995, 0.0);
        expected[(0, 3)] = c(0.005, 0.0);
        expected[(3, 0)] = c(0.005, 0.0);
        expected[(3, 3)] = c(0.005, 0.0);
        assert!(rho.matrix().approx_eq(&expected, ALGEBRA_TOL));
        // 0.995² + 2·0.005² + 0.005² = 0.990025 + 0.00005 + 0.000025
        assert!((rho.purity() - 0.9901).abs() < ALGEBRA_TOL);

        assert!(perturbed_separable(&sep, &bell, 1.5).is_err());
        assert!(perturbed_separable(&sep, &bell, -0.1).is_err());
        let qubit = DensityMatrix::new(ComplexMatrix::identity(2).scale_real(0.5), 2, 1).unwrap();
        assert!(perturbed_separable(&sep, &qubit, 0.5).is_err());
    }

    #[test]
    fn maximally_mixed_qubit_purity() {
        let rho = DensityMatrix::new(ComplexMatrix::identity(2).scale_real(0.5), 2, 1).unwrap();
        assert!((purity(&rho) - 0.5).abs() < ALGEBRA_TOL);
    }

    #[test]
    fn validation_rejects_unphysical_matrices() {
        let not_unit = ComplexMatrix::identity(4);
        assert!(DensityMatrix::new(not_unit, 2, 2).is_err());
        let negative = ComplexMatrix::diagonal(&[c(1.5, 0.0), c(-0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(DensityMatrix::new(negative, 2, 2).is_err());
        let mut skew = ComplexMatrix::identity(4).scale_real(0.25);
        skew[(0, 1)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(skew, 2, 2).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::identity(3).scale_real(1.0 / 3.0), 2, 2).is_err());
    }

    #[test]
    fn repair_restores_trace_and_hermiticity() {
        let mut rho = density_from_pure(&bell_state(BellKind::PsiPlus));
        let mut m = rho.matrix().scale_real(1.0 + 1e-11);
        m[(1, 2)] += c(0.0, 1e-12);
        rho = DensityMatrix::from_parts(m, 2, 2);
        let drift = rho.repair();
        assert!(drift > 0.0 && drift < 1e-10);
        assert!(rho.matrix().is_hermitian(0.0));
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_state_is_normalized() {
        let psi = PureState::product(&[c(1.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((psi.amplitude(0, 1) - c(s, 0.0)).norm() < ALGEBRA_TOL);
        assert!((psi.amplitude(1, 1) - c(s, 0.0)).norm() < ALGEBRA_TOL);
        assert!(PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)], 2, 1).is_err());
        assert!(PureState::basis(2, 2, 4).is_err());
    }
}
