//! Exact moments `E[Π_i χ_{Sx_i}(x^(i)) χ_{Sy_i}(y^(i))]` of the hard
//! distributions, with the matching marginalized inside the expectation.
//!
//! Given the set `K` of `Y` copies the copies are independent, so a moment is
//! the average over `K` of a product of single-copy moments. Each single-copy
//! moment is an exact sum over every `x` and every matching.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{check_enum_budget, DistKind, HardDistributionSpec, Matching};
use crate::error::{invalid, Result};

fn parity(v: u64) -> bool {
    v.count_ones() % 2 == 1
}

/// Single copy moment under `N` (`flipped = false`) or `Y` (`flipped = true`).
pub fn copy_moment(n: usize, m: usize, sx: u64, sy: u64, flipped: bool) -> Result<BigRational> {
    check_enum_budget(n, m, 1)?;
    let all = Matching::all(n, m)?;
    Ok(copy_moment_with(&all, n, m, sx, sy, flipped))
}

fn copy_moment_with(all: &[Matching], n: usize, m: usize, sx: u64, sy: u64, flipped: bool) -> BigRational {
    let flip = if flipped { (1u64 << m) - 1 } else { 0 };
    let sum: i64 = all
        .iter()
        .map(|mm| {
            (0..1u64 << n)
                .map(|x| if parity(sx & x) ^ parity(sy & (mm.apply(x) ^ flip)) { -1 } else { 1 })
                .sum::<i64>()
        })
        .sum();
    BigRational::new(BigInt::from(sum), BigInt::from(all.len() as u64) << n)
}

/// Per-copy moment tables indexed by `sx * 2^m + sy`, for `N` and `Y`.
struct CopyTables {
    m: usize,
    n_table: Vec<BigRational>,
    y_table: Vec<BigRational>,
}

impl CopyTables {
    fn build(n: usize, m: usize) -> Result<Self> {
        let all = Matching::all(n, m)?;
        let cells: Vec<(u64, u64)> = (0..1u64 << n)
            .flat_map(|sx| (0..1u64 << m).map(move |sy| (sx, sy)))
            .collect();
        let table = |flipped| {
            cells
                .par_iter()
                .map(|&(sx, sy)| copy_moment_with(&all, n, m, sx, sy, flipped))
                .collect()
        };
        Ok(Self { m, n_table: table(false), y_table: table(true) })
    }

    fn get(&self, sx: u64, sy: u64, flipped: bool) -> &BigRational {
        let idx = (sx << self.m | sy) as usize;
        if flipped {
            &self.y_table[idx]
        } else {
            &self.n_table[idx]
        }
    }

    fn moment(&self, spec: &HardDistributionSpec, sx: &[u64], sy: &[u64]) -> BigRational {
        let sets = spec.y_sets();
        let total = sets.iter().fold(BigRational::zero(), |acc, &ks| {
            let prod = (0..spec.k).fold(BigRational::one(), |p, i| p * self.get(sx[i], sy[i], ks >> i & 1 == 1));
            acc + prod
        });
        total / BigRational::from_integer(BigInt::from(sets.len()))
    }
}

fn check_tuple(spec: &HardDistributionSpec, sx: &[u64], sy: &[u64]) -> Result<()> {
    if sx.len() != spec.k || sy.len() != spec.k {
        return Err(invalid("need one subset per copy"));
    }
    if sx.iter().any(|&s| s >> spec.n != 0) || sy.iter().any(|&s| s >> spec.m != 0) {
        return Err(invalid("subset out of range"));
    }
    Ok(())
}

/// Exact moment of `spec` at the per-copy subsets `sx`, `sy`.
pub fn moment(spec: &HardDistributionSpec, sx: &[u64], sy: &[u64]) -> Result<BigRational> {
    check_enum_budget(spec.n, spec.m, spec.k)?;
    check_tuple(spec, sx, sy)?;
    let all = Matching::all(spec.n, spec.m)?;
    let sets = spec.y_sets();
    let total = sets.iter().fold(BigRational::zero(), |acc, &ks| {
        let prod = (0..spec.k).fold(BigRational::one(), |p, i| {
            p * copy_moment_with(&all, spec.n, spec.m, sx[i], sy[i], ks >> i & 1 == 1)
        });
        acc + prod
    });
    Ok(total / BigRational::from_integer(BigInt::from(sets.len())))
}

/// Total size `Σ_i |Sx_i| + |Sy_i|`.
pub fn tuple_size(sx: &[u64], sy: &[u64]) -> usize {
    sx.iter().chain(sy).map(|s| s.count_ones() as usize).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentWitness {
    pub sx: Vec<u64>,
    pub sy: Vec<u64>,
    pub size: usize,
    #[serde(with = "crate::exact::ratio")]
    pub plus: BigRational,
    #[serde(with = "crate::exact::ratio")]
    pub minus: BigRational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub max_size: usize,
    pub agree: bool,
    pub checked: usize,
    /// Smallest-size disagreeing tuple, if any.
    pub counterexample: Option<MomentWitness>,
}

/// All per-copy subset tuples of total size at most `max_size`, ordered by
/// size and then lexicographically.
fn tuples(n: usize, m: usize, k: usize, max_size: usize) -> Vec<(Vec<u64>, Vec<u64>)> {
    let mut out = vec![(Vec::new(), Vec::new())];
    for _ in 0..k {
        let mut next = Vec::new();
        for (sx, sy) in &out {
            let used = tuple_size(sx, sy);
            for a in 0..1u64 << n {
                for b in 0..1u64 << m {
                    if used + (a.count_ones() + b.count_ones()) as usize <= max_size {
                        let mut sx = sx.clone();
                        let mut sy = sy.clone();
                        sx.push(a);
                        sy.push(b);
                        next.push((sx, sy));
                    }
                }
            }
        }
        out = next;
    }
    out.sort_by_key(|(sx, sy)| (tuple_size(sx, sy), sx.clone(), sy.clone()));
    out
}

/// Compares `mu(+1, k)` and `mu(-1, k)` on every moment of total size at most
/// `max_size`.
pub fn verify_moment_agreement(n: usize, m: usize, k: usize, max_size: usize) -> Result<MomentReport> {
    check_enum_budget(n, m, k)?;
    let plus = HardDistributionSpec::new(DistKind::MuPlus, n, m, k)?;
    let minus = HardDistributionSpec::new(DistKind::MuMinus, n, m, k)?;
    let tables = CopyTables::build(n, m)?;
    let all = tuples(n, m, k, max_size);
    let first_bad = all.par_iter().position_first(|(sx, sy)| {
        tables.moment(&plus, sx, sy) != tables.moment(&minus, sx, sy)
    });
    let counterexample = first_bad.map(|i| {
        let (sx, sy) = &all[i];
        MomentWitness {
            size: tuple_size(sx, sy),
            plus: tables.moment(&plus, sx, sy),
            minus: tables.moment(&minus, sx, sy),
            sx: sx.clone(),
            sy: sy.clone(),
        }
    });
    Ok(MomentReport {
        n,
        m,
        k,
        max_size,
        agree: counterexample.is_none(),
        checked: first_bad.map_or(all.len(), |i| i + 1),
        counterexample,
    })
}

/// The smallest-size moment on which `mu(+1, k)` and `mu(-1, k)` differ.
pub fn minimal_disagreement(n: usize, m: usize, k: usize) -> Result<Option<MomentWitness>> {
    Ok(verify_moment_agreement(n, m, k, k * (n + m))?.counterexample)
}

/// Membership in the graded families of vertex sets `S ⊆ [nk]` and edge sets
/// `T ⊆ [mk]`, blocks packed per copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LevelSets {
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

impl LevelSets {
    pub fn new(n: usize, m: usize, k: usize) -> Result<Self> {
        if n * k > 64 || m * k > 64 || k == 0 {
            return Err(invalid("blocks must fit in 64 bits"));
        }
        Ok(Self { n, m, k })
    }

    fn blocks(v: u64, width: usize, k: usize) -> impl Iterator<Item = u32> {
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        (0..k).map(move |i| (v >> (i * width) & mask).count_ones())
    }

    /// Every block has `|S_i| / 2` odd.
    pub fn in_s(&self, s: u64) -> bool {
        Self::blocks(s, self.n, self.k).all(|c| c % 4 == 2)
    }

    /// Every block has `|T_i|` odd.
    pub fn in_t(&self, t: u64) -> bool {
        Self::blocks(t, self.m, self.k).all(|c| c % 2 == 1)
    }

    pub fn in_s_level(&self, s: u64, ell: usize) -> bool {
        self.in_s(s) && s.count_ones() as usize == 2 * ell
    }

    pub fn in_t_level(&self, t: u64, ell: usize) -> bool {
        self.in_t(t) && t.count_ones() as usize == ell
    }
}
