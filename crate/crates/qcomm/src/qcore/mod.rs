//! Dense linear algebra for small quantum systems.

pub mod linalg;
pub mod measure;
pub mod random;
pub mod state;

pub use linalg::{trace_norm, CMatrix, CVector, C64, TOL};
pub use measure::{measure, MeasurementFamily, Outcome};
pub use state::{
    hadamard_all, swap_test_prob, tensor_product, trace_distance, DensityMatrix, QuantumObject,
    StateVector, Tensor, UnitaryOp,
};

/// Partial trace keeping the qubits flagged in `keep`. An all-false mask
/// yields the 1x1 matrix `[Tr rho]`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[bool]) -> crate::Result<DensityMatrix> {
    rho.partial_trace(keep)
}
