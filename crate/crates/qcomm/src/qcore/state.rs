use super::linalg::*;
use crate::error::{invalid, Error, Result};

/// Pure state on `qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: CVector,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::from_vector(CVector::from_vec(amps))
    }

    pub fn from_vector(amps: CVector) -> Result<Self> {
        let qubits = qubits_of(amps.len())?;
        let norm = amps.norm_squared();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { qubits, amps })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if norm <= 1e-300 {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        Self::from_vector(amps / real(norm))
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amps = CVector::zeros(1 << qubits);
        amps[index] = ONE;
        Self { qubits, amps }
    }

    /// `(|00> + |11>)/sqrt(2)`.
    pub fn epr() -> Self {
        Self::max_entangled(1)
    }

    /// `2^{-d/2} sum_b |b>|b>` on `2d` qubits.
    pub fn max_entangled(d: usize) -> Self {
        let side = 1usize << d;
        let mut amps = CVector::zeros(side * side);
        let a = real((side as f64).sqrt().recip());
        for b in 0..side {
            amps[b * side + b] = a;
        }
        Self { qubits: 2 * d, amps }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            qubits: self.qubits,
            m: &self.amps * self.amps.adjoint(),
        }
    }

    pub fn apply(&self, u: &UnitaryOp) -> Result<StateVector> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        Ok(Self {
            qubits: self.qubits,
            amps: u.matrix() * &self.amps,
        })
    }

    pub fn permute_qubits(&self, perm: &[usize]) -> Result<StateVector> {
        Ok(Self {
            qubits: self.qubits,
            amps: permute_vector(&self.amps, perm)?,
        })
    }
}

/// Validated density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(invalid("density matrix must be square"));
        }
        let qubits = qubits_of(m.nrows())?;
        let deviation = hermitian_deviation(&m);
        if deviation > TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > TOL || trace.im.abs() > TOL {
            return Err(Error::BadTrace { trace: trace.re });
        }
        let min_eigenvalue = hermitian_eigenvalues(&m)[0];
        if min_eigenvalue < -TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { qubits, m })
    }

    /// Builds `m / Tr(m)` after symmetrizing; used for post-measurement and
    /// post-channel states whose positivity is guaranteed by construction.
    pub(crate) fn from_unnormalized(m: CMatrix) -> Self {
        let qubits = m.nrows().trailing_zeros() as usize;
        let h = (&m + m.adjoint()).scale(0.5);
        let t = h.trace().re;
        Self {
            qubits,
            m: h.unscale(t),
        }
    }

    pub fn pure(state: &StateVector) -> Self {
        state.to_density()
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        let dim = 1usize << qubits;
        Self {
            qubits,
            m: ket_bra(dim, index, index),
        }
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        Self {
            qubits,
            m: identity(dim).unscale(dim as f64),
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// `Tr(op * rho)`.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.nrows(),
            });
        }
        Ok((op * &self.m).trace())
    }

    pub fn conjugate(&self, u: &UnitaryOp) -> Result<DensityMatrix> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        Ok(Self {
            qubits: self.qubits,
            m: u.matrix() * &self.m * u.matrix().adjoint(),
        })
    }

    /// Applies a channel given by Kraus operators; the output dimension is the
    /// Kraus row count.
    pub fn apply_kraus(&self, kraus: &[CMatrix]) -> Result<DensityMatrix> {
        let first = kraus.first().ok_or_else(|| invalid("empty Kraus list"))?;
        let out_dim = first.nrows();
        qubits_of(out_dim)?;
        let mut acc = CMatrix::zeros(out_dim, out_dim);
        for k in kraus {
            if k.ncols() != self.dim() || k.nrows() != out_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: k.ncols(),
                });
            }
            acc += k * &self.m * k.adjoint();
        }
        Ok(Self::from_unnormalized(acc))
    }

    pub fn partial_trace(&self, keep: &[bool]) -> Result<DensityMatrix> {
        let m = partial_trace_matrix(&self.m, keep)?;
        Ok(Self {
            qubits: keep.iter().filter(|&&k| k).count(),
            m,
        })
    }

    /// New qubit `k` is old qubit `perm[k]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<DensityMatrix> {
        Ok(Self {
            qubits: self.qubits,
            m: permute_matrix(&self.m, perm)?,
        })
    }

    /// Re-runs the validation of [`DensityMatrix::new`].
    pub fn check(&self) -> Result<()> {
        Self::new(self.m.clone()).map(|_| ())
    }
}

/// Validated unitary operator.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOp {
    m: CMatrix,
}

impl UnitaryOp {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(invalid("unitary must be square"));
        }
        let deviation = max_abs_entry(&(m.adjoint() * &m - identity(m.nrows())));
        if deviation > TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { m })
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn adjoint(&self) -> UnitaryOp {
        Self {
            m: self.m.adjoint(),
        }
    }

    /// `self * other`.
    pub fn compose(&self, other: &UnitaryOp) -> Result<UnitaryOp> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            m: &self.m * &other.m,
        })
    }
}

pub fn hadamard_all(q: usize) -> Result<UnitaryOp> {
    if q == 0 {
        return Err(invalid("hadamard_all needs at least one qubit"));
    }
    Ok(UnitaryOp {
        m: hadamard_matrix(q),
    })
}

/// Kronecker product within one kind of object.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            qubits: self.qubits + other.qubits,
            amps: self.amps.kronecker(&other.amps),
        }
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            qubits: self.qubits + other.qubits,
            m: kron(&self.m, &other.m),
        }
    }
}

impl Tensor for UnitaryOp {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            m: kron(&self.m, &other.m),
        }
    }
}

/// Any of the three tensorable kinds, for callers that only know the kind at
/// run time.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumObject {
    State(StateVector),
    Density(DensityMatrix),
    Unitary(UnitaryOp),
}

impl QuantumObject {
    fn kind(&self) -> &'static str {
        match self {
            Self::State(_) => "state vector",
            Self::Density(_) => "density matrix",
            Self::Unitary(_) => "unitary",
        }
    }
}

pub fn tensor_product(a: &QuantumObject, b: &QuantumObject) -> Result<QuantumObject> {
    use QuantumObject::*;
    match (a, b) {
        (State(x), State(y)) => Ok(State(x.tensor(y))),
        (Density(x), Density(y)) => Ok(Density(x.tensor(y))),
        (Unitary(x), Unitary(y)) => Ok(Unitary(x.tensor(y))),
        _ => Err(Error::MixedKinds {
            left: a.kind(),
            right: b.kind(),
        }),
    }
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(0.5 * trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// Acceptance probability of a swap test, `1/2 + |<phi|psi>|^2 / 2`.
pub fn swap_test_prob(phi: &StateVector, psi: &StateVector) -> Result<f64> {
    let overlap = phi.inner(psi)?.norm_sqr();
    Ok(0.5 + 0.5 * overlap)
}
