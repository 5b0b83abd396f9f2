use rand::Rng;

use super::Protocol;
use crate::error::{invalid, Error, Result};
use crate::qcore::linalg::{hermitian_deviation, hermitian_eigenvalues, kron, CMatrix, TOL};
use crate::qcore::random::{random_density, random_hermitian_contraction};
use crate::qcore::{DensityMatrix, MeasurementFamily};

/// Simultaneous-message protocol: Alice sends `rho(x)`, Bob sends `sigma(y)`,
/// and the referee's expected output is `Tr(E (rho(x) ⊗ sigma(y)))`.
#[derive(Clone, Debug)]
pub struct SmpQuantumProtocol {
    n: usize,
    c: usize,
    prep_a: Vec<DensityMatrix>,
    prep_b: Vec<DensityMatrix>,
    effect: CMatrix,
}

/// Checks that `e` is Hermitian with spectrum in `[-1, 1]`.
pub(crate) fn check_effect(e: &CMatrix) -> Result<()> {
    let deviation = hermitian_deviation(e);
    if deviation > TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let ev = hermitian_eigenvalues(e);
    for &v in [ev[0], ev[ev.len() - 1]].iter() {
        if v.abs() > 1.0 + TOL {
            return Err(Error::EffectOutOfRange { eigenvalue: v });
        }
    }
    Ok(())
}

impl SmpQuantumProtocol {
    pub fn new(
        n: usize,
        prep_a: Vec<DensityMatrix>,
        prep_b: Vec<DensityMatrix>,
        effect: CMatrix,
    ) -> Result<Self> {
        if prep_a.len() != 1 << n || prep_b.len() != 1 << n {
            return Err(invalid("need one message state per input"));
        }
        let c = prep_a[0].qubits();
        if prep_a.iter().chain(&prep_b).any(|r| r.qubits() != c) {
            return Err(invalid("message states must all have c qubits"));
        }
        let dim = 1usize << (2 * c);
        if effect.nrows() != dim || effect.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: effect.nrows(),
            });
        }
        check_effect(&effect)?;
        Ok(Self {
            n,
            c,
            prep_a,
            prep_b,
            effect,
        })
    }

    /// Referee effect `M_0^dag M_0 - M_1^dag M_1` from a two-outcome family.
    pub fn from_family(
        n: usize,
        prep_a: Vec<DensityMatrix>,
        prep_b: Vec<DensityMatrix>,
        referee: &MeasurementFamily,
    ) -> Result<Self> {
        Self::new(n, prep_a, prep_b, referee.signed_effect()?)
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn prep_a(&self) -> &[DensityMatrix] {
        &self.prep_a
    }

    pub fn prep_b(&self) -> &[DensityMatrix] {
        &self.prep_b
    }

    pub fn effect(&self) -> &CMatrix {
        &self.effect
    }
}

pub fn eval_smp(p: &SmpQuantumProtocol, x: usize, y: usize) -> Result<f64> {
    if x >= p.prep_a.len() || y >= p.prep_b.len() {
        return Err(invalid("input out of range"));
    }
    let joint = kron(p.prep_a[x].matrix(), p.prep_b[y].matrix());
    Ok((&p.effect * joint).trace().re)
}

impl Protocol for SmpQuantumProtocol {
    fn n(&self) -> usize {
        self.n
    }

    fn expected_output(&self, x: usize, y: usize) -> Result<f64> {
        eval_smp(self, x, y)
    }
}

pub fn random_smp<R: Rng + ?Sized>(n: usize, c: usize, rng: &mut R) -> SmpQuantumProtocol {
    let prep_a = (0..1 << n).map(|_| random_density(c, rng)).collect();
    let prep_b = (0..1 << n).map(|_| random_density(c, rng)).collect();
    let effect = random_hermitian_contraction(1 << (2 * c), rng);
    SmpQuantumProtocol::new(n, prep_a, prep_b, effect).expect("generated protocol is valid")
}
