//! Removing shared entanglement from a simultaneous quantum protocol.
//!
//! Alice prepares the whole shared state `ρ` on registers `(A, A')` and
//! applies her channel to `A`. Bob prepares the maximally entangled state on
//! `(B', B)` and applies his channel to `B`. The referee projects `(A', B')`
//! onto the equal-index subspace, applies `H^{⊗2d}` there and measures; on
//! the all-zero outcome the remaining registers hold exactly the original
//! referee state, otherwise he outputs a fair coin.
//!
//! With a normalized Bob state the success probability is `2^{-d} · 2^{-2d}`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::protocol::Protocol;
use crate::qcore::linalg::{expand_operator, hadamard_matrix, identity, kron, pauli_x, pauli_z, real, CMatrix};
use crate::qcore::random::{random_hermitian_contraction, random_kraus, random_real_density};
use crate::qcore::{trace_distance, DensityMatrix, StateVector};
use crate::seed;

/// Simultaneous protocol with a `2d`-qubit shared state: Alice applies the
/// channel `U_x` (Kraus list, `d -> ca` qubits) to her half, Bob `V_y` to his,
/// and the referee's expected output is `Tr(E · (U_x ⊗ V_y)(ρ))`.
#[derive(Clone, Debug)]
pub struct EntangledSmpProtocol {
    n: usize,
    d: usize,
    shared: DensityMatrix,
    alice: Vec<Vec<CMatrix>>,
    bob: Vec<Vec<CMatrix>>,
    effect: CMatrix,
}

fn check_channel(kraus: &[CMatrix], din: usize) -> Result<usize> {
    let first = kraus.first().ok_or_else(|| invalid("empty Kraus list"))?;
    let dout = first.nrows();
    if !dout.is_power_of_two() || kraus.iter().any(|k| k.ncols() != din || k.nrows() != dout) {
        return Err(invalid("Kraus operators have inconsistent shapes"));
    }
    let sum = kraus.iter().fold(CMatrix::zeros(din, din), |acc, k| acc + k.adjoint() * k);
    let residual = crate::qcore::linalg::max_abs_entry(&(sum - identity(din)));
    if residual > 1e-9 {
        return Err(Error::Incomplete { residual });
    }
    Ok(dout.trailing_zeros() as usize)
}

impl EntangledSmpProtocol {
    pub fn new(
        n: usize,
        shared: DensityMatrix,
        alice: Vec<Vec<CMatrix>>,
        bob: Vec<Vec<CMatrix>>,
        effect: CMatrix,
    ) -> Result<Self> {
        if !shared.qubits().is_multiple_of(2) || shared.qubits() == 0 {
            return Err(invalid("shared state needs a positive even qubit count"));
        }
        let d = shared.qubits() / 2;
        if d > 2 {
            return Err(invalid(format!("d = {d} exceeds 2")));
        }
        if alice.len() != 1 << n || bob.len() != 1 << n {
            return Err(invalid("need one channel per input"));
        }
        let ca = check_channel(&alice[0], 1 << d)?;
        let cb = check_channel(&bob[0], 1 << d)?;
        if ca > 3 || cb > 3 {
            return Err(Error::BudgetExceeded("channel outputs above 3 qubits".into()));
        }
        for ch in &alice {
            if check_channel(ch, 1 << d)? != ca {
                return Err(invalid("Alice's channels differ in output size"));
            }
        }
        for ch in &bob {
            if check_channel(ch, 1 << d)? != cb {
                return Err(invalid("Bob's channels differ in output size"));
            }
        }
        if effect.nrows() != 1 << (ca + cb) {
            return Err(Error::DimensionMismatch { expected: 1 << (ca + cb), found: effect.nrows() });
        }
        crate::protocol::check_effect(&effect)?;
        Ok(Self { n, d, shared, alice, bob, effect })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn out_qubits(&self) -> (usize, usize) {
        (
            self.alice[0][0].nrows().trailing_zeros() as usize,
            self.bob[0][0].nrows().trailing_zeros() as usize,
        )
    }

    pub fn effect(&self) -> &CMatrix {
        &self.effect
    }

    fn check_inputs(&self, x: usize, y: usize) -> Result<()> {
        if x >= 1 << self.n || y >= 1 << self.n {
            return Err(invalid("input out of range"));
        }
        Ok(())
    }

    /// `(U_x ⊗ V_y)(ρ)`.
    pub fn referee_state(&self, x: usize, y: usize) -> Result<DensityMatrix> {
        self.check_inputs(x, y)?;
        let kraus: Vec<CMatrix> = self.alice[x]
            .iter()
            .flat_map(|a| self.bob[y].iter().map(move |b| kron(a, b)))
            .collect();
        self.shared.apply_kraus(&kraus)
    }
}

impl Protocol for EntangledSmpProtocol {
    fn n(&self) -> usize {
        self.n
    }

    fn expected_output(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.referee_state(x, y)?.expectation(&self.effect)?.re)
    }
}

/// Exact analysis of the stripped protocol on one input pair.
#[derive(Clone, Debug, Serialize)]
pub struct StrippedQsmp {
    /// Probability that the equal-index projection succeeds.
    pub equal_probability: f64,
    /// Probability of the full success flag.
    pub flag_probability: f64,
    /// Referee state on success, with the middle registers traced out.
    #[serde(skip)]
    pub conditional_state: Option<DensityMatrix>,
    /// Trace distance between the conditional and the original referee state.
    pub trace_distance: f64,
    pub original_output: f64,
    /// `flag · Tr(E σ_cond)`; a failed flag contributes zero in expectation.
    pub stripped_output: f64,
    /// Probability of each classical record `(equal, middle outcome)`,
    /// indexed `equal * 4^d + outcome`.
    pub records: Vec<f64>,
}

/// The referee's state before any measurement, in register order
/// `(A_out, A', B', B_out)`.
fn charlie_state(p: &EntangledSmpProtocol, x: usize, y: usize) -> Result<DensityMatrix> {
    let side = 1usize << p.d;
    let id = identity(side);
    let alice_kraus: Vec<CMatrix> = p.alice[x].iter().map(|k| kron(k, &id)).collect();
    let alice_state = p.shared.apply_kraus(&alice_kraus)?;
    let bob_kraus: Vec<CMatrix> = p.bob[y].iter().map(|k| kron(&id, k)).collect();
    let bob_state = StateVector::max_entangled(p.d).to_density().apply_kraus(&bob_kraus)?;
    DensityMatrix::new(kron(alice_state.matrix(), bob_state.matrix()))
}

/// Projector onto `span{|b⟩|b⟩}` on `2d` qubits.
fn equal_projector(d: usize) -> CMatrix {
    let side = 1usize << d;
    let mut pm = CMatrix::zeros(side * side, side * side);
    for b in 0..side {
        pm[(b * side + b, b * side + b)] = real(1.0);
    }
    pm
}

pub fn strip_entanglement_qsmp(p: &EntangledSmpProtocol, x: usize, y: usize) -> Result<StrippedQsmp> {
    p.check_inputs(x, y)?;
    let d = p.d;
    let (ca, cb) = p.out_qubits();
    let total = ca + 2 * d + cb;
    let middle: Vec<usize> = (ca..ca + 2 * d).collect();
    let sigma = charlie_state(p, x, y)?;

    let peq = expand_operator(&equal_projector(d), &middle, total)?;
    let h = expand_operator(&hadamard_matrix(2 * d), &middle, total)?;
    let outcomes = 1usize << (2 * d);
    let mut records = vec![0.0; 2 * outcomes];
    let mut equal_probability = 0.0;
    let mut conditional = None;
    for equal in [true, false] {
        let proj = if equal { peq.clone() } else { identity(1 << total) - &peq };
        let after = &h * &proj;
        let branch = &after * sigma.matrix() * after.adjoint();
        if equal {
            equal_probability = branch.trace().re;
        }
        for k in 0..outcomes {
            let mut mk = CMatrix::zeros(outcomes, outcomes);
            mk[(k, k)] = real(1.0);
            let mk = expand_operator(&mk, &middle, total)?;
            let leaf = &mk * &branch * &mk;
            let prob = leaf.trace().re.max(0.0);
            records[(equal as usize) * outcomes + k] = prob;
            if equal && k == 0 && prob > crate::qcore::measure::DEGENERATE_PROB {
                let keep: Vec<bool> = (0..total).map(|q| q < ca || q >= ca + 2 * d).collect();
                let reduced = crate::qcore::linalg::partial_trace_matrix(&leaf, &keep)?;
                conditional = Some(DensityMatrix::from_unnormalized(reduced));
            }
        }
    }
    let flag_probability = records[outcomes];
    let original = p.referee_state(x, y)?;
    let original_output = original.expectation(&p.effect)?.re;
    let (trace_distance, cond_output) = match &conditional {
        Some(c) => (trace_distance(c, &original)?, c.expectation(&p.effect)?.re),
        None => (f64::NAN, 0.0),
    };
    Ok(StrippedQsmp {
        equal_probability,
        flag_probability,
        conditional_state: conditional,
        trace_distance,
        original_output,
        stripped_output: flag_probability * cond_output,
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QsmpShots {
    pub shots: u64,
    pub flags: u64,
    /// Sum of the `±1` outputs.
    pub output_sum: i64,
}

impl QsmpShots {
    pub fn flag_rate(&self) -> f64 {
        self.flags as f64 / self.shots as f64
    }

    pub fn mean_output(&self) -> f64 {
        self.output_sum as f64 / self.shots as f64
    }
}

/// Shot simulation: each shot samples the referee's classical record, the
/// flag is `equal && outcome == 0`, and the output is a `±1` draw with the
/// conditional mean on success or a fair coin otherwise. Shot `s` uses the
/// stream `(seed, s)`.
pub fn simulate_qsmp(stripped: &StrippedQsmp, p: &EntangledSmpProtocol, shots: u64, seed: u64) -> Result<QsmpShots> {
    let cond_mean = match &stripped.conditional_state {
        Some(c) => c.expectation(p.effect())?.re,
        None => 0.0,
    };
    let outcomes = stripped.records.len() / 2;
    let total: f64 = stripped.records.iter().sum();
    let (flags, output_sum) = (0..shots)
        .into_par_iter()
        .map(|s| {
            let mut rng = seed::rng_at(seed, &[s]);
            let u: f64 = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut record = stripped.records.len() - 1;
            for (k, &pr) in stripped.records.iter().enumerate() {
                acc += pr;
                if u < acc {
                    record = k;
                    break;
                }
            }
            let flag = record == outcomes;
            let mean = if flag { cond_mean } else { 0.0 };
            let out = if rng.random::<f64>() < (1.0 + mean) / 2.0 { 1i64 } else { -1 };
            (flag as u64, out)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(QsmpShots { shots, flags, output_sum })
}

/// Shared EPR pair, Alice applies `Z^x`, Bob `Z^y`, referee effect
/// `(1/3) X ⊗ X`: expected output `(1/3)(-1)^{x⊕y}`.
pub fn epr_parity_protocol() -> EntangledSmpProtocol {
    let z = pauli_z();
    let id = identity(2);
    let chans = vec![vec![id], vec![z]];
    let effect = kron(&pauli_x(), &pauli_x()) * real(1.0 / 3.0);
    EntangledSmpProtocol::new(1, StateVector::epr().to_density(), chans.clone(), chans, effect)
        .expect("valid test protocol")
}

/// Random real shared state, random channels to `c` qubits per side and a
/// random effect.
pub fn random_entangled_smp<R: Rng + ?Sized>(n: usize, d: usize, c: usize, rng: &mut R) -> EntangledSmpProtocol {
    let side = 1usize << d;
    let out = 1usize << c;
    let rank = side.div_ceil(out).max(2);
    let chans = |rng: &mut R| -> Vec<Vec<CMatrix>> {
        (0..1 << n).map(|_| random_kraus(side, out, rank, rng)).collect()
    };
    let alice = chans(rng);
    let bob = chans(rng);
    let effect = random_hermitian_contraction(out * out, rng);
    EntangledSmpProtocol::new(n, random_real_density(2 * d, rng), alice, bob, effect)
        .expect("random protocol is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epr_protocol_values() {
        let p = epr_parity_protocol();
        for x in 0..2 {
            for y in 0..2 {
                let want = if x == y { 1.0 / 3.0 } else { -1.0 / 3.0 };
                assert!((p.expected_output(x, y).unwrap() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_flag_and_state() {
        let mut rng = crate::seed::rng(41);
        for d in [1, 2] {
            for _ in 0..4 {
                let p = random_entangled_smp(1, d, 1, &mut rng);
                for (x, y) in [(0, 0), (1, 0), (1, 1)] {
                    let s = strip_entanglement_qsmp(&p, x, y).unwrap();
                    let side = (1u64 << d) as f64;
                    assert!((s.equal_probability - 1.0 / side).abs() < 1e-10);
                    assert!((s.flag_probability - side.powi(-3)).abs() < 1e-10);
                    assert!(s.trace_distance <= 1e-9);
                    assert!((s.records.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                    assert!((s.stripped_output - s.flag_probability * s.original_output).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn shots_track_exact_values() {
        let p = epr_parity_protocol();
        let s = strip_entanglement_qsmp(&p, 0, 1).unwrap();
        let shots = 100_000;
        let sim = simulate_qsmp(&s, &p, shots, 7).unwrap();
        let pf = s.flag_probability;
        let sd = (pf * (1.0 - pf) / shots as f64).sqrt();
        assert!((sim.flag_rate() - pf).abs() <= 4.0 * sd);
        let mean_sd = (1.0 / shots as f64).sqrt();
        assert!((sim.mean_output() - s.stripped_output).abs() <= 4.0 * mean_sd);
        assert_eq!(sim, simulate_qsmp(&s, &p, shots, 7).unwrap());
    }
}
