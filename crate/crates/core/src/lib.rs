//! Time-optimal bang-bang control of two-qubit entanglement.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Kronecker products, partial traces,
//!   Hermitian eigendecomposition, unitary propagators.
//! - [`state`]: pure states, density matrices, Bell states, the perturbed
//!   separable initial state.
//! - [`entanglement`]: concurrence (reduced-purity form, pure-state
//!   determinant form, mixed-state Wootters form) and Schmidt decomposition.
//! - [`dynamics`]: Hamiltonian assembly and exact piecewise-constant
//!   propagation of states and costates.
//! - [`pmp`]: switching functions, the bang-bang law, the forward-backward
//!   sweep, and the free-final-time search.
//! - [`presets`]: the reference two-qubit scenario.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod pmp;
pub mod presets;
pub mod state;

pub use dynamics::{ControlSchedule, CostateTrajectory, HamiltonianSet, Trajectory};
pub use entanglement::SchmidtDecomposition;
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use pmp::{OptimalSolution, SolverConfig, TfSearch};
pub use state::{BellKind, DensityMatrix, PureState};
