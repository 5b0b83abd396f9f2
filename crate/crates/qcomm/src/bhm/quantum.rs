//! The EPR-based one-way protocol for one BHM copy, simulated on the full
//! `n^2`-dimensional state vector.
//!
//! Alice and Bob share `(1/√n) Σ_i |i⟩|i⟩`. Alice applies the phase
//! `(-1)^{x_i}`, Bob measures the edge projectors `|i⟩⟨i| + |j⟩⟨j|` of his
//! matching completed to a perfect matching, then both apply `H^{⊗log n}`
//! and measure. The outcomes satisfy `(i⊕j)·(a⊕b) = x_i ⊕ x_j`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BhmInstance, Matching};
use crate::error::{invalid, Result};
use crate::qcore::linalg::{CVector, C64};
use crate::qcore::{hadamard_all, StateVector};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub edge_in_matching: bool,
    /// Measured edge of the completed matching, `i < j`.
    pub i: usize,
    pub j: usize,
    /// Alice's and Bob's Hadamard-basis outcomes.
    pub a: usize,
    pub b: usize,
    /// Index of the measured edge in Bob's original matching.
    pub edge_index: Option<usize>,
}

impl RoundOutcome {
    /// `(i⊕j)·(a⊕b)` over GF(2), which equals `x_i ⊕ x_j`.
    pub fn recovered_parity(&self) -> u64 {
        ((self.i ^ self.j) & (self.a ^ self.b)).count_ones() as u64 & 1
    }
}

/// Bob's perfect matching: the original edges, then free vertices paired in
/// increasing order.
pub fn complete_matching(m: &Matching) -> Vec<(usize, usize)> {
    let mut edges = m.edges().to_vec();
    let support = m.support();
    let free: Vec<usize> = (0..m.n()).filter(|&v| support >> v & 1 == 0).collect();
    edges.extend(free.chunks(2).map(|p| (p[0], p[1])));
    edges
}

fn qubits_for(n: usize) -> Result<usize> {
    if n < 2 || !n.is_power_of_two() {
        return Err(invalid(format!("n = {n} must be a power of two")));
    }
    Ok(n.trailing_zeros() as usize)
}

/// State after Alice's phase.
fn phased_state(x: u64, n: usize) -> Result<StateVector> {
    let q = qubits_for(n)?;
    let amp = 1.0 / (n as f64).sqrt();
    let mut v = CVector::zeros(n * n);
    for i in 0..n {
        let s = if x >> i & 1 == 1 { -amp } else { amp };
        v[i * n + i] = C64::new(s, 0.0);
    }
    let st = StateVector::from_vector(v)?;
    debug_assert_eq!(st.qubits(), 2 * q);
    Ok(st)
}

fn project_edge(v: &CVector, n: usize, (i, j): (usize, usize)) -> CVector {
    CVector::from_fn(n * n, |idx, _| {
        let bob = idx % n;
        if bob == i || bob == j {
            v[idx]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Probability of each edge of the completed matching, from the projectors.
pub fn edge_probabilities(x: u64, m: &Matching) -> Result<Vec<((usize, usize), f64)>> {
    let st = phased_state(x, m.n())?;
    Ok(complete_matching(m)
        .into_iter()
        .map(|e| (e, project_edge(st.amplitudes(), m.n(), e).norm_squared()))
        .collect())
}

fn sample_index<R: Rng + ?Sized>(probs: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, p) in probs.enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

/// Exact outcome distribution of one round: `(outcome, probability)` for
/// every outcome of nonzero probability.
pub fn round_distribution(x: u64, m: &Matching) -> Result<Vec<(RoundOutcome, f64)>> {
    let n = m.n();
    let q = qubits_for(n)?;
    let h = hadamard_all(2 * q)?;
    let st = phased_state(x, n)?;
    let mut out = Vec::new();
    for (e_idx, e) in complete_matching(m).into_iter().enumerate() {
        let proj = project_edge(st.amplitudes(), n, e);
        let pe = proj.norm_squared();
        if pe <= crate::qcore::measure::DEGENERATE_PROB {
            continue;
        }
        let post = StateVector::normalized(proj)?.apply(&h)?;
        for (idx, amp) in post.amplitudes().iter().enumerate() {
            let p = pe * amp.norm_sqr();
            if p > crate::qcore::measure::DEGENERATE_PROB {
                let orig = (e_idx < m.m()).then_some(e_idx);
                out.push((
                    RoundOutcome {
                        edge_in_matching: orig.is_some(),
                        i: e.0,
                        j: e.1,
                        a: idx / n,
                        b: idx % n,
                        edge_index: orig,
                    },
                    p,
                ));
            }
        }
    }
    Ok(out)
}

/// One sampled round.
pub fn quantum_round(x: u64, m: &Matching, seed: u64) -> Result<RoundOutcome> {
    let n = m.n();
    let q = qubits_for(n)?;
    let mut rng = seed::rng(seed);
    let st = phased_state(x, n)?;
    let edges = complete_matching(m);
    let projected: Vec<CVector> = edges.iter().map(|&e| project_edge(st.amplitudes(), n, e)).collect();
    let e_idx = sample_index(projected.iter().map(|v| v.norm_squared()), &mut rng);
    let post = StateVector::normalized(projected[e_idx].clone())?.apply(&hadamard_all(2 * q)?)?;
    let idx = sample_index(post.amplitudes().iter().map(|a| a.norm_sqr()), &mut rng);
    let (i, j) = edges[e_idx];
    let orig = (e_idx < m.m()).then_some(e_idx);
    Ok(RoundOutcome {
        edge_in_matching: orig.is_some(),
        i,
        j,
        a: idx / n,
        b: idx % n,
        edge_index: orig,
    })
}

/// `⌈log₂(10k) / (2α)⌉` rounds per copy.
pub fn default_reps(k: usize, alpha: f64) -> usize {
    ((10.0 * k as f64).log2() / (2.0 * alpha)).ceil().max(1.0) as usize
}

/// Referee output for `k` copies: each copy uses its first round that hit an
/// edge of the original matching; a copy without one answers with a fair
/// coin. Returns the product of copy answers and which copies were decided.
pub fn referee_decide<R: Rng + ?Sized>(
    rounds: &[Vec<RoundOutcome>],
    instances: &[BhmInstance],
    rng: &mut R,
) -> Result<(i8, Vec<bool>)> {
    if rounds.len() != instances.len() {
        return Err(invalid("need one round list per copy"));
    }
    if rounds.iter().any(|r| r.is_empty()) {
        return Err(invalid("need at least one round per copy"));
    }
    let mut out = 1i8;
    let mut decided = Vec::with_capacity(rounds.len());
    for (rs, inst) in rounds.iter().zip(instances) {
        let answer = match rs.iter().find_map(|r| r.edge_index.map(|e| (e, r.recovered_parity()))) {
            Some((e, parity)) => {
                decided.push(true);
                if inst.y >> e & 1 == parity {
                    1
                } else {
                    -1
                }
            }
            None => {
                decided.push(false);
                if rng.random::<bool>() {
                    1
                } else {
                    -1
                }
            }
        };
        out *= answer;
    }
    Ok((out, decided))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolRun {
    pub output: i8,
    pub decided: Vec<bool>,
    /// `Some(output == label product)` on promise inputs.
    pub correct: Option<bool>,
}

/// Full protocol on a `k`-tuple: `reps` rounds per copy, seeded by
/// `(seed, copy, rep)`; undecided coins use `(seed, k)`.
pub fn run_protocol(instances: &[BhmInstance], reps: usize, seed: u64) -> Result<ProtocolRun> {
    if reps == 0 {
        return Err(invalid("reps must be at least 1"));
    }
    let rounds = instances
        .iter()
        .enumerate()
        .map(|(c, inst)| {
            (0..reps)
                .map(|r| quantum_round(inst.x, &inst.matching, seed::derive(seed, &[c as u64, r as u64])))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coins = seed::rng_at(seed, &[instances.len() as u64]);
    let (output, decided) = referee_decide(&rounds, instances, &mut coins)?;
    let truth: Option<i8> = instances.iter().map(|t| t.label.sign()).product();
    Ok(ProtocolRun { output, decided, correct: truth.map(|t| t == output) })
}
