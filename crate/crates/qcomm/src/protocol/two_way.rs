use rand::Rng;
use rayon::prelude::*;

use super::Protocol;
use crate::error::{invalid, Error, Result};
use crate::qcore::linalg::{identity, kron, operator_norm, permute_matrix, CMatrix, C64};
use crate::qcore::random::{random_density, random_two_outcome};
use crate::qcore::{DensityMatrix, MeasurementFamily, UnitaryOp};
use crate::seed;

/// Largest transcript length enumerated exactly.
pub const MAX_TRANSCRIPT_BITS: usize = 16;

/// Two-party protocol sharing a `2d`-qubit state, with `m` private memory
/// qubits per player initialised to `|0>`.
///
/// Round `t` consists of one two-outcome measurement by Alice followed by one
/// by Bob. The transcript is a `u64` whose bit `p` is the `p`-th message
/// (`2t` for Alice in round `t`, `2t + 1` for Bob); a set bit is outcome 1,
/// i.e. the value `-1`. Alice's family in round `t` is indexed by her input
/// and the `2t`-bit prefix, Bob's by his input and the `2t + 1`-bit prefix.
/// The output is `-1` on transcripts in the accept set and `+1` elsewhere.
#[derive(Clone, Debug)]
pub struct TwoWayEntangledProtocol {
    n: usize,
    d: usize,
    m: usize,
    rounds: usize,
    shared: DensityMatrix,
    alice: Vec<Vec<Vec<MeasurementFamily>>>,
    bob: Vec<Vec<Vec<MeasurementFamily>>>,
    accept: Vec<u64>,
    accept_flags: Vec<bool>,
}

impl TwoWayEntangledProtocol {
    pub fn new(
        n: usize,
        d: usize,
        m: usize,
        shared: DensityMatrix,
        alice: Vec<Vec<Vec<MeasurementFamily>>>,
        bob: Vec<Vec<Vec<MeasurementFamily>>>,
        accept: Vec<u64>,
    ) -> Result<Self> {
        let rounds = alice.len();
        if rounds == 0 || bob.len() != rounds {
            return Err(invalid("both players need the same positive round count"));
        }
        if 2 * rounds > MAX_TRANSCRIPT_BITS {
            return Err(Error::BudgetExceeded(format!(
                "{} transcript bits exceed {MAX_TRANSCRIPT_BITS}",
                2 * rounds
            )));
        }
        if shared.qubits() != 2 * d {
            return Err(Error::DimensionMismatch {
                expected: 2 * d,
                found: shared.qubits(),
            });
        }
        let local = 1usize << (d + m);
        let check = |fams: &Vec<Vec<Vec<MeasurementFamily>>>, prefix_bits: &dyn Fn(usize) -> usize| {
            for (t, per_input) in fams.iter().enumerate() {
                if per_input.len() != 1 << n {
                    return Err(invalid(format!("round {t}: need one entry per input")));
                }
                for per_prefix in per_input {
                    if per_prefix.len() != 1 << prefix_bits(t) {
                        return Err(invalid(format!("round {t}: wrong prefix count")));
                    }
                    if per_prefix.iter().any(|f| f.len() != 2 || f.dim() != local) {
                        return Err(invalid(format!(
                            "round {t}: families must be two-outcome on {} qubits",
                            d + m
                        )));
                    }
                }
            }
            Ok(())
        };
        check(&alice, &|t| 2 * t)?;
        check(&bob, &|t| 2 * t + 1)?;
        let total = 1usize << (2 * rounds);
        let mut accept = accept;
        accept.sort_unstable();
        accept.dedup();
        if accept.iter().any(|&z| z as usize >= total) {
            return Err(invalid("accept set entry longer than the transcript"));
        }
        let mut accept_flags = vec![false; total];
        for &z in &accept {
            accept_flags[z as usize] = true;
        }
        Ok(Self {
            n,
            d,
            m,
            rounds,
            shared,
            alice,
            bob,
            accept,
            accept_flags,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Communication in bits, two per round.
    pub fn c(&self) -> usize {
        2 * self.rounds
    }

    pub fn shared(&self) -> &DensityMatrix {
        &self.shared
    }

    pub fn alice(&self) -> &[Vec<Vec<MeasurementFamily>>] {
        &self.alice
    }

    pub fn bob(&self) -> &[Vec<Vec<MeasurementFamily>>] {
        &self.bob
    }

    pub fn accept_set(&self) -> &[u64] {
        &self.accept
    }

    pub fn sign(&self, z: u64) -> f64 {
        if self.accept_flags[z as usize] {
            -1.0
        } else {
            1.0
        }
    }

    fn alice_op(&self, t: usize, x: usize, z: u64) -> &CMatrix {
        let prefix = (z & ((1 << (2 * t)) - 1)) as usize;
        self.alice[t][x][prefix].operator((z >> (2 * t) & 1) as usize)
    }

    fn bob_op(&self, t: usize, y: usize, z: u64) -> &CMatrix {
        let prefix = (z & ((1 << (2 * t + 1)) - 1)) as usize;
        self.bob[t][y][prefix].operator((z >> (2 * t + 1) & 1) as usize)
    }

    /// `shared ⊗ |0^m><0^m| ⊗ |0^m><0^m|` in qubit order
    /// `(A shared, A memory, B shared, B memory)`.
    pub fn initial_state(&self) -> CMatrix {
        let (d, m) = (self.d, self.m);
        let mem = DensityMatrix::basis(2 * m, 0);
        let joint = kron(self.shared.matrix(), mem.matrix());
        // Source order: A_d, B_d, memA, memB.
        let perm: Vec<usize> = (0..d)
            .chain(2 * d..2 * d + m)
            .chain(d..2 * d)
            .chain(2 * d + m..2 * d + 2 * m)
            .collect();
        permute_matrix(&joint, &perm).expect("valid qubit permutation")
    }

    /// Same protocol on a different shared state of the same size.
    pub fn with_shared(&self, shared: DensityMatrix) -> Result<Self> {
        if shared.qubits() != self.shared.qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.shared.qubits(),
                found: shared.qubits(),
            });
        }
        Ok(Self {
            shared,
            ..self.clone()
        })
    }

    /// Conjugates the shared state by `ua ⊗ vb` and undoes it inside every
    /// first-round family, which leaves all transcript statistics unchanged.
    pub fn locally_transformed(&self, ua: &UnitaryOp, vb: &UnitaryOp) -> Result<Self> {
        let side = 1usize << self.d;
        if ua.dim() != side || vb.dim() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                found: ua.dim(),
            });
        }
        let mem = identity(1 << self.m);
        let shared = DensityMatrix::new({
            let u = kron(ua.matrix(), vb.matrix());
            &u * self.shared.matrix() * u.adjoint()
        })?;
        let undo_a = kron(&ua.adjoint().matrix().clone(), &mem);
        let undo_b = kron(&vb.adjoint().matrix().clone(), &mem);
        let mut out = self.with_shared(shared)?;
        for fams in out.alice[0].iter_mut() {
            for f in fams.iter_mut() {
                *f = f.precompose(&undo_a)?;
            }
        }
        for fams in out.bob[0].iter_mut() {
            for f in fams.iter_mut() {
                *f = f.precompose(&undo_b)?;
            }
        }
        Ok(out)
    }

    fn check_inputs(&self, x: usize, y: usize) -> Result<()> {
        if x >= 1 << self.n || y >= 1 << self.n {
            return Err(invalid("input out of range"));
        }
        Ok(())
    }
}

/// Per-transcript operators `E_z(x)`, `F_z(y)` and output signs.
#[derive(Clone, Debug)]
pub struct CompiledTwoWay {
    pub e: Vec<CMatrix>,
    pub f: Vec<CMatrix>,
    pub signs: Vec<f64>,
}

impl CompiledTwoWay {
    /// `|| sum_z E_z ⊗ F_z - I ||_op`.
    pub fn completeness_residual(&self) -> f64 {
        let dim = self.e[0].nrows() * self.f[0].nrows();
        let mut acc = -identity(dim);
        for (e, f) in self.e.iter().zip(&self.f) {
            acc += kron(e, f);
        }
        operator_norm(&acc)
    }

    /// Smallest eigenvalue over all `E_z` and `F_z`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.e
            .iter()
            .chain(&self.f)
            .map(|m| crate::qcore::linalg::hermitian_eigenvalues(m)[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `Tr((E_z ⊗ F_z) rho)` for each transcript.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.e
            .iter()
            .zip(&self.f)
            .map(|(e, f)| (kron(e, f) * rho).trace().re)
            .collect()
    }

    pub fn expected_output(&self, rho: &CMatrix) -> f64 {
        self.probabilities(rho)
            .iter()
            .zip(&self.signs)
            .map(|(p, s)| p * s)
            .sum()
    }
}

pub fn compile_two_way(p: &TwoWayEntangledProtocol, x: usize, y: usize) -> Result<CompiledTwoWay> {
    p.check_inputs(x, y)?;
    let total = 1u64 << (2 * p.rounds);
    let local = 1usize << (p.d + p.m);
    let mut e = Vec::with_capacity(total as usize);
    let mut f = Vec::with_capacity(total as usize);
    let mut signs = Vec::with_capacity(total as usize);
    for z in 0..total {
        let mut ma = identity(local);
        let mut mb = identity(local);
        for t in 0..p.rounds {
            ma = p.alice_op(t, x, z) * ma;
            mb = p.bob_op(t, y, z) * mb;
        }
        e.push(ma.adjoint() * ma);
        f.push(mb.adjoint() * mb);
        signs.push(p.sign(z));
    }
    Ok(CompiledTwoWay { e, f, signs })
}

/// Exact transcript distribution.
pub fn transcript_distribution(p: &TwoWayEntangledProtocol, x: usize, y: usize) -> Result<Vec<f64>> {
    Ok(compile_two_way(p, x, y)?.probabilities(&p.initial_state()))
}

pub fn eval_two_way(p: &TwoWayEntangledProtocol, x: usize, y: usize) -> Result<f64> {
    Ok(compile_two_way(p, x, y)?.expected_output(&p.initial_state()))
}

impl Protocol for TwoWayEntangledProtocol {
    fn n(&self) -> usize {
        self.n
    }

    fn expected_output(&self, x: usize, y: usize) -> Result<f64> {
        eval_two_way(self, x, y)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptHistogram {
    pub shots: u64,
    pub counts: Vec<u64>,
}

impl TranscriptHistogram {
    pub fn frequency(&self, z: u64) -> f64 {
        self.counts[z as usize] as f64 / self.shots as f64
    }

    /// Empirical mean of the `±1` output.
    pub fn mean_output(&self, p: &TwoWayEntangledProtocol) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(z, &c)| c as f64 * p.sign(z as u64))
            .sum::<f64>()
            / self.shots as f64
    }
}

/// Conditional probability of outcome 0 at every node of the transcript tree,
/// obtained by collapsing the joint state round by round. `tree[l][prefix]`
/// is the node after `l` messages.
fn collapse_tree(p: &TwoWayEntangledProtocol, x: usize, y: usize) -> Vec<Vec<f64>> {
    let bits = 2 * p.rounds;
    let local = identity(1 << (p.d + p.m));
    let mut tree: Vec<Vec<f64>> = (0..bits).map(|l| vec![0.5; 1 << l]).collect();
    let mut frontier: Vec<(u64, CMatrix)> = vec![(0, p.initial_state())];
    for level in 0..bits {
        let t = level / 2;
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (prefix, rho) in frontier {
            let ops: Vec<CMatrix> = (0..2u64)
                .map(|b| {
                    let z = prefix | b << level;
                    if level % 2 == 0 {
                        kron(p.alice_op(t, x, z), &local)
                    } else {
                        kron(&local, p.bob_op(t, y, z))
                    }
                })
                .collect();
            let branches: Vec<CMatrix> = ops.iter().map(|k| k * &rho * k.adjoint()).collect();
            let w0 = branches[0].trace().re.max(0.0);
            let w1 = branches[1].trace().re.max(0.0);
            if w0 + w1 > 0.0 {
                tree[level][prefix as usize] = w0 / (w0 + w1);
            }
            let norm = C64::new(rho.trace().re.max(f64::MIN_POSITIVE), 0.0);
            for (b, branch) in branches.into_iter().enumerate() {
                // Keep the conditional state normalized to avoid underflow deep in the tree.
                let w = branch.trace().re;
                let state = if w > 0.0 { branch.unscale(w) } else { branch / norm };
                next.push((prefix | (b as u64) << level, state));
            }
        }
        frontier = next;
    }
    tree
}

/// Samples `shots` transcripts by sequential measurement collapse. Shot `s`
/// draws from its own stream derived from `(seed, s)`.
pub fn monte_carlo_transcript(
    p: &TwoWayEntangledProtocol,
    x: usize,
    y: usize,
    seed: u64,
    shots: u64,
) -> Result<TranscriptHistogram> {
    p.check_inputs(x, y)?;
    if shots == 0 {
        return Err(invalid("shots must be positive"));
    }
    let tree = collapse_tree(p, x, y);
    let bits = 2 * p.rounds;
    let total = 1usize << bits;
    const CHUNK: u64 = 4096;
    let chunks = shots.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut counts = vec![0u64; total];
            for s in ci * CHUNK..((ci + 1) * CHUNK).min(shots) {
                let mut rng = seed::rng_at(seed, &[s]);
                let mut z = 0u64;
                for (level, node) in tree.iter().enumerate() {
                    if rng.random::<f64>() >= node[z as usize] {
                        z |= 1 << level;
                    }
                }
                counts[z as usize] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; total],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(TranscriptHistogram { shots, counts })
}

/// Random protocol with Haar-random two-outcome families, a random shared
/// state and a uniformly random accept set.
pub fn random_two_way<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    m: usize,
    rounds: usize,
    rng: &mut R,
) -> TwoWayEntangledProtocol {
    let local = 1usize << (d + m);
    let shared = random_density(2 * d, rng);
    let fams = |prefix_bits: usize, rng: &mut R| -> Vec<Vec<MeasurementFamily>> {
        (0..1 << n)
            .map(|_| {
                (0..1 << prefix_bits)
                    .map(|_| random_two_outcome(local, rng))
                    .collect()
            })
            .collect()
    };
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    for t in 0..rounds {
        alice.push(fams(2 * t, rng));
        bob.push(fams(2 * t + 1, rng));
    }
    let accept = (0..1u64 << (2 * rounds))
        .filter(|_| rng.random::<bool>())
        .collect();
    TwoWayEntangledProtocol::new(n, d, m, shared, alice, bob, accept)
        .expect("generated protocol is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{ket_bra, max_abs_entry};

    fn trivial_family(dim: usize) -> MeasurementFamily {
        MeasurementFamily::new(vec![identity(dim), CMatrix::zeros(dim, dim)]).unwrap()
    }

    /// One round, `n = 0`, with the given families for Alice and Bob.
    fn one_round(a: MeasurementFamily, b: MeasurementFamily, accept: Vec<u64>) -> TwoWayEntangledProtocol {
        TwoWayEntangledProtocol::new(
            0,
            1,
            0,
            StateVector::epr().to_density(),
            vec![vec![vec![a]]],
            vec![vec![vec![b.clone(), b]]],
            accept,
        )
        .unwrap()
    }

    use crate::qcore::StateVector;

    #[test]
    fn trivial_round_compiles_to_identity() {
        let p = one_round(trivial_family(2), trivial_family(2), vec![]);
        let c = compile_two_way(&p, 0, 0).unwrap();
        let prod = kron(&c.e[0], &c.f[0]);
        assert!(max_abs_entry(&(prod - identity(4))) < 1e-15);
        for z in 1..4 {
            assert!(max_abs_entry(&c.e[z]) < 1e-15 || max_abs_entry(&c.f[z]) < 1e-15);
        }
        assert!(c.completeness_residual() < 1e-15);
    }

    #[test]
    fn projective_alice_gives_two_transcripts() {
        let proj = MeasurementFamily::new(vec![ket_bra(2, 0, 0), ket_bra(2, 1, 1)]).unwrap();
        let p = one_round(proj, trivial_family(2), vec![]);
        let c = compile_two_way(&p, 0, 0).unwrap();
        let nonzero: Vec<usize> = (0..4)
            .filter(|&z| max_abs_entry(&kron(&c.e[z], &c.f[z])) > 1e-15)
            .collect();
        assert_eq!(nonzero, vec![0, 1]);
        assert!(c.completeness_residual() < 1e-15);
        let probs = c.probabilities(&p.initial_state());
        assert!((probs[0] - 0.5).abs() < 1e-15 && (probs[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn accept_set_extremes() {
        let mut rng = crate::seed::rng(41);
        let base = random_two_way(1, 1, 1, 2, &mut rng);
        let all = TwoWayEntangledProtocol::new(
            1, 1, 1,
            base.shared.clone(),
            base.alice.clone(),
            base.bob.clone(),
            (0..16).collect(),
        )
        .unwrap();
        let none = TwoWayEntangledProtocol { accept: vec![], accept_flags: vec![false; 16], ..all.clone() };
        for x in 0..2 {
            for y in 0..2 {
                assert!((eval_two_way(&all, x, y).unwrap() + 1.0).abs() < 1e-12);
                assert!((eval_two_way(&none, x, y).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_protocols_are_complete_and_positive() {
        let mut rng = crate::seed::rng(42);
        for _ in 0..10 {
            let p = random_two_way(2, 1, 1, 2, &mut rng);
            for x in 0..4 {
                for y in 0..4 {
                    let c = compile_two_way(&p, x, y).unwrap();
                    assert!(c.completeness_residual() <= 1e-9);
                    assert!(c.min_eigenvalue() >= -1e-10);
                    let probs = c.probabilities(&p.initial_state());
                    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn collapse_tree_matches_compiled_distribution() {
        let mut rng = crate::seed::rng(43);
        let p = random_two_way(1, 1, 1, 2, &mut rng);
        let exact = transcript_distribution(&p, 1, 0).unwrap();
        let tree = collapse_tree(&p, 1, 0);
        for z in 0..16u64 {
            let mut prob = 1.0;
            for (level, node) in tree.iter().enumerate() {
                let p0 = node[(z & ((1 << level) - 1)) as usize];
                prob *= if z >> level & 1 == 0 { p0 } else { 1.0 - p0 };
            }
            assert!((prob - exact[z as usize]).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_protocol_single_transcript() {
        // Shared |00>, Alice and Bob measure Z: outcome 0 always.
        let proj = MeasurementFamily::new(vec![ket_bra(2, 0, 0), ket_bra(2, 1, 1)]).unwrap();
        let p = TwoWayEntangledProtocol::new(
            0, 1, 0,
            DensityMatrix::basis(2, 0),
            vec![vec![vec![proj.clone()]]],
            vec![vec![vec![proj.clone(), proj]]],
            vec![],
        )
        .unwrap();
        let h = monte_carlo_transcript(&p, 0, 0, 5, 1000).unwrap();
        assert_eq!(h.counts[0], 1000);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let mut rng = crate::seed::rng(44);
        let p = random_two_way(1, 1, 1, 2, &mut rng);
        let a = monte_carlo_transcript(&p, 0, 1, 9, 5000).unwrap();
        let b = monte_carlo_transcript(&p, 0, 1, 9, 5000).unwrap();
        let c = monte_carlo_transcript(&p, 0, 1, 10, 5000).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn local_unitaries_preserve_transcripts() {
        let mut rng = crate::seed::rng(45);
        for _ in 0..5 {
            let p = random_two_way(1, 1, 1, 2, &mut rng);
            let ua = crate::qcore::random::random_unitary(2, &mut rng);
            let vb = crate::qcore::random::random_unitary(2, &mut rng);
            let q = p.locally_transformed(&ua, &vb).unwrap();
            for x in 0..2 {
                for y in 0..2 {
                    let a = transcript_distribution(&p, x, y).unwrap();
                    let b = transcript_distribution(&q, x, y).unwrap();
                    for (u, v) in a.iter().zip(&b) {
                        assert!((u - v).abs() <= 1e-9);
                    }
                }
            }
        }
    }
}
