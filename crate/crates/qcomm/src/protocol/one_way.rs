use rand::Rng;

use super::smp::check_effect;
use super::Protocol;
use crate::error::{invalid, Error, Result};
use crate::qcore::linalg::{identity, kron, CMatrix};
use crate::qcore::measure::DEGENERATE_PROB;
use crate::qcore::random::{random_density, random_hermitian_contraction, random_measurement};
use crate::qcore::{DensityMatrix, MeasurementFamily};

/// One-way protocol with a shared `2d`-qubit state: Alice measures her half
/// with a `2^c`-outcome family depending on `x` and sends the outcome `z`;
/// Bob's expected output is `Tr(F(y, z) sigma_B)` on his collapsed half.
#[derive(Clone, Debug)]
pub struct OneWayEntangledProtocol {
    n: usize,
    d: usize,
    c: usize,
    shared: DensityMatrix,
    alice: Vec<MeasurementFamily>,
    bob: Vec<Vec<CMatrix>>,
}

impl OneWayEntangledProtocol {
    pub fn new(
        n: usize,
        d: usize,
        shared: DensityMatrix,
        alice: Vec<MeasurementFamily>,
        bob: Vec<Vec<CMatrix>>,
    ) -> Result<Self> {
        if shared.qubits() != 2 * d {
            return Err(Error::DimensionMismatch {
                expected: 2 * d,
                found: shared.qubits(),
            });
        }
        if alice.len() != 1 << n || bob.len() != 1 << n {
            return Err(invalid("need one family and one effect list per input"));
        }
        let outcomes = alice[0].len();
        if !outcomes.is_power_of_two() {
            return Err(invalid("Alice's outcome count must be a power of two"));
        }
        let side = 1usize << d;
        if alice.iter().any(|f| f.len() != outcomes || f.dim() != side) {
            return Err(invalid("Alice's families must share outcome count and act on d qubits"));
        }
        for effects in &bob {
            if effects.len() != outcomes {
                return Err(invalid("Bob needs one effect per message"));
            }
            for f in effects {
                if f.nrows() != side {
                    return Err(Error::DimensionMismatch {
                        expected: side,
                        found: f.nrows(),
                    });
                }
                check_effect(f)?;
            }
        }
        Ok(Self {
            n,
            d,
            c: outcomes.trailing_zeros() as usize,
            shared,
            alice,
            bob,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Message length in bits.
    pub fn c(&self) -> usize {
        self.c
    }

    pub fn shared(&self) -> &DensityMatrix {
        &self.shared
    }

    pub fn alice(&self, x: usize) -> &MeasurementFamily {
        &self.alice[x]
    }

    pub fn bob_effect(&self, y: usize, z: usize) -> &CMatrix {
        &self.bob[y][z]
    }

    /// `I ⊗ F(y, z)` on the joint register.
    pub fn joint_effect(&self, y: usize, z: usize) -> CMatrix {
        kron(&identity(1 << self.d), &self.bob[y][z])
    }

    /// Probability of message `z` and the normalized joint state after
    /// Alice's measurement (absent when the probability is negligible).
    pub fn post_measurement(&self, x: usize, z: usize) -> (f64, Option<DensityMatrix>) {
        let k = kron(self.alice[x].operator(z), &identity(1 << self.d));
        let unnorm = &k * self.shared.matrix() * k.adjoint();
        let p = unnorm.trace().re.max(0.0);
        let state = (p > DEGENERATE_PROB).then(|| DensityMatrix::from_unnormalized(unnorm));
        (p, state)
    }
}

impl Protocol for OneWayEntangledProtocol {
    fn n(&self) -> usize {
        self.n
    }

    fn expected_output(&self, x: usize, y: usize) -> Result<f64> {
        if x >= 1 << self.n || y >= 1 << self.n {
            return Err(invalid("input out of range"));
        }
        let mut acc = 0.0;
        for z in 0..1 << self.c {
            if let (p, Some(sigma)) = self.post_measurement(x, z) {
                acc += p * sigma.expectation(&self.joint_effect(y, z))?.re;
            }
        }
        Ok(acc)
    }
}

pub fn random_one_way<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    c: usize,
    rng: &mut R,
) -> OneWayEntangledProtocol {
    let side = 1usize << d;
    let shared = random_density(2 * d, rng);
    let alice = (0..1 << n)
        .map(|_| random_measurement(side, 1 << c, rng))
        .collect();
    let bob = (0..1 << n)
        .map(|_| (0..1 << c).map(|_| random_hermitian_contraction(side, rng)).collect())
        .collect();
    OneWayEntangledProtocol::new(n, d, shared, alice, bob).expect("generated protocol is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{ket_bra, pauli_z};
    use crate::qcore::StateVector;

    #[test]
    fn epr_z_measurement_correlates() {
        // Alice measures Z on an EPR pair and forwards the outcome; Bob's
        // effect (-1)^z Z then always reads +1.
        let z_basis = MeasurementFamily::new(vec![ket_bra(2, 0, 0), ket_bra(2, 1, 1)]).unwrap();
        let p = OneWayEntangledProtocol::new(
            0,
            1,
            StateVector::epr().to_density(),
            vec![z_basis],
            vec![vec![pauli_z(), -pauli_z()]],
        )
        .unwrap();
        assert!((p.expected_output(0, 0).unwrap() - 1.0).abs() < 1e-14);
        let (prob, state) = p.post_measurement(0, 1);
        assert!((prob - 0.5).abs() < 1e-14);
        assert_eq!(state.unwrap(), DensityMatrix::basis(2, 3));
    }

    #[test]
    fn random_outputs_bounded() {
        let mut rng = crate::seed::rng(51);
        let p = random_one_way(2, 1, 1, &mut rng);
        for x in 0..4 {
            for y in 0..4 {
                assert!(p.expected_output(x, y).unwrap().abs() <= 1.0 + 1e-12);
            }
        }
    }
}
