//! Random states, unitaries, channels and measurements for audits.

use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::*;
use super::measure::MeasurementFamily;
use super::state::{DensityMatrix, StateVector, UnitaryOp};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_pure_state<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> StateVector {
    let v = CVector::from_fn(1 << qubits, |_, _| complex_gaussian(rng));
    StateVector::normalized(v).expect("gaussian vector is nonzero")
}

/// Full-rank density matrix `G G^dag / Tr` from a complex Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1 << qubits;
    let g = ginibre(dim, dim, rng);
    DensityMatrix::from_unnormalized(&g * g.adjoint())
}

/// Real symmetric density matrix from a real Ginibre matrix.
pub fn random_real_density<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1 << qubits;
    let g = CMatrix::from_fn(dim, dim, |_, _| real(gaussian(rng)));
    DensityMatrix::from_unnormalized(&g * g.adjoint())
}

/// Haar unitary via QR with the phase correction on `R`'s diagonal.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryOp {
    let qr = ginibre(dim, dim, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                ONE
            }
        } else {
            ZERO
        }
    });
    UnitaryOp::new(q * phases).expect("QR factor is unitary")
}

/// Kraus operators of a random channel from `din` to `dout` dimensions with
/// `rank` operators, cut from a random isometry.
pub fn random_kraus<R: Rng + ?Sized>(
    din: usize,
    dout: usize,
    rank: usize,
    rng: &mut R,
) -> Vec<CMatrix> {
    assert!(dout * rank >= din, "isometry needs dout * rank >= din");
    let u = random_unitary(dout * rank, rng);
    let iso = u.matrix().columns(0, din).into_owned();
    (0..rank)
        .map(|r| iso.rows(r * dout, dout).into_owned())
        .collect()
}

/// Random two-outcome measurement (general, not projective).
pub fn random_two_outcome<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> MeasurementFamily {
    MeasurementFamily::new(random_kraus(dim, dim, 2, rng)).expect("isometry blocks are complete")
}

/// Random measurement with `outcomes` outcomes on a `dim`-dimensional space.
pub fn random_measurement<R: Rng + ?Sized>(
    dim: usize,
    outcomes: usize,
    rng: &mut R,
) -> MeasurementFamily {
    MeasurementFamily::new(random_kraus(dim, dim, outcomes, rng))
        .expect("isometry blocks are complete")
}

/// Hermitian matrix with eigenvalues uniform in `[-1, 1]` and a Haar eigenbasis.
pub fn random_hermitian_contraction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let u = random_unitary(dim, rng);
    let ev: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let m = u.matrix() * diag(&ev) * u.matrix().adjoint();
    (&m + m.adjoint()).scale(0.5)
}

/// Real symmetric matrix with eigenvalues uniform in `[-1, 1]`.
pub fn random_real_contraction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| real(gaussian(rng)));
    let q = g.qr().q();
    let ev: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let m = &q * diag(&ev) * q.adjoint();
    (&m + m.adjoint()).scale(0.5)
}
