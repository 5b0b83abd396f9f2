//! Boolean Hidden Matching.
//!
//! Vertices are `0..n`. Alice's input `x ∈ {-1,1}^n` is a bitmask whose bit
//! `v` is set when `x_v = -1`; Bob's `y ∈ {-1,1}^m` is a bitmask over edge
//! indices in the same way. Products of `±1` values become XORs of bits.
//! A `k`-copy input packs copy `i` into bits `[i*n, (i+1)*n)`.

mod combinatorics;
mod delta;
mod distribution;
mod moments;
mod quantum;

pub use combinatorics::{
    correlation_identity_audit, match_probability, match_probability_by_enumeration,
    match_probability_monte_carlo, matches, CorrelationAudit,
};
pub use delta::{brute_force_one_way, delta_az, weighted_delta, OneWayOptimum};
pub use distribution::{sample, DistKind, HardDistributionSpec};
pub use moments::{
    copy_moment, minimal_disagreement, moment, tuple_size, verify_moment_agreement, LevelSets, MomentReport,
    MomentWitness,
};
pub use quantum::{
    complete_matching, default_reps, edge_probabilities, quantum_round, referee_decide,
    round_distribution, run_protocol, ProtocolRun, RoundOutcome,
};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::label::Label;

/// Budget for exhaustive enumeration: `n <= 6`, `m <= 2`, `k <= 2`.
pub const ENUM_MAX_N: usize = 6;
pub const ENUM_MAX_M: usize = 2;
pub const ENUM_MAX_K: usize = 2;

/// Default edge fraction `alpha`, with `m = floor(alpha n)`.
pub const DEFAULT_ALPHA: f64 = 0.25;

/// `m` disjoint edges `(i, j)` with `i < j`, sorted. Edge `k` of the list is
/// output coordinate `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if !n.is_multiple_of(2) || n > 64 {
            return Err(invalid(format!("n = {n} must be even and at most 64")));
        }
        let mut used = 0u64;
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        for &(i, j) in &edges {
            if i == j || j >= n {
                return Err(invalid(format!("bad edge ({i}, {j})")));
            }
            if used >> i & 1 == 1 || used >> j & 1 == 1 {
                return Err(invalid("edges must be vertex-disjoint"));
            }
            used |= 1 << i | 1 << j;
        }
        edges.sort_unstable();
        Ok(Self { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `(Mx)_k = x_{i_k} x_{j_k}`.
    pub fn apply(&self, x: u64) -> u64 {
        self.edges
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &(i, j))| acc | ((x >> i ^ x >> j) & 1) << k)
    }

    /// Bitmask of covered vertices.
    pub fn support(&self) -> u64 {
        self.edges.iter().fold(0, |acc, &(i, j)| acc | 1 << i | 1 << j)
    }

    /// Uniformly random `m`-edge matching.
    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        check_sizes(n, m)?;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        Self::new(n, (0..m).map(|k| (perm[2 * k], perm[2 * k + 1])).collect())
    }

    /// Every `m`-edge matching on `n` vertices, in lexicographic order.
    pub fn all(n: usize, m: usize) -> Result<Vec<Self>> {
        check_sizes(n, m)?;
        fn rec(n: usize, m: usize, start: usize, used: u64, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Matching>) {
            if cur.len() == m {
                out.push(Matching { n, edges: cur.clone() });
                return;
            }
            for i in start..n {
                if used >> i & 1 == 1 {
                    continue;
                }
                for j in i + 1..n {
                    if used >> j & 1 == 0 {
                        cur.push((i, j));
                        rec(n, m, i + 1, used | 1 << i | 1 << j, cur, out);
                        cur.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        rec(n, m, 0, 0, &mut Vec::new(), &mut out);
        Ok(out)
    }
}

pub(crate) fn check_sizes(n: usize, m: usize) -> Result<()> {
    if !n.is_multiple_of(2) || n == 0 || n > 64 {
        return Err(invalid(format!("n = {n} must be even, positive and at most 64")));
    }
    if m == 0 || 2 * m > n {
        return Err(invalid(format!("need 1 <= m and 2m <= n, got m = {m}, n = {n}")));
    }
    Ok(())
}

pub(crate) fn check_enum_budget(n: usize, m: usize, k: usize) -> Result<()> {
    if n > ENUM_MAX_N || m > ENUM_MAX_M || k == 0 || k > ENUM_MAX_K {
        return Err(crate::Error::BudgetExceeded(format!(
            "(n, m, k) = ({n}, {m}, {k}) exceeds ({ENUM_MAX_N}, {ENUM_MAX_M}, {ENUM_MAX_K})"
        )));
    }
    check_sizes(n, m)
}

/// `m = floor(alpha n)`, validated.
pub fn edges_for(n: usize, alpha: f64) -> Result<usize> {
    let m = (alpha * n as f64).floor() as usize;
    check_sizes(n, m)?;
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BhmInstance {
    pub x: u64,
    pub matching: Matching,
    pub y: u64,
    pub label: Label,
}

impl BhmInstance {
    pub fn new(x: u64, matching: Matching, y: u64) -> Self {
        let label = classify(x, &matching, y);
        Self { x, matching, y, label }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Self =
            serde_json::from_str(s).map_err(|e| crate::Error::Serialization(e.to_string()))?;
        if classify(inst.x, &inst.matching, inst.y) != inst.label {
            return Err(invalid("stored label disagrees with the instance"));
        }
        Ok(inst)
    }
}

/// `+1` if `y = Mx`, `-1` if `y = -Mx`, `*` otherwise.
pub fn classify(x: u64, matching: &Matching, y: u64) -> Label {
    let mx = matching.apply(x);
    let all = (1u64 << matching.m()) - 1;
    if y == mx {
        Label::Plus
    } else if y == mx ^ all {
        Label::Minus
    } else {
        Label::Star
    }
}

pub fn apply_matching(matching: &Matching, x: u64) -> u64 {
    matching.apply(x)
}
