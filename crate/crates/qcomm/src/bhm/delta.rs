//! The distinguishing quantity `Δ_A = E_M ‖μ₊(·|A, M) − μ₋(·|A, M)‖₁` for a
//! set `A` of Alice inputs, and an exhaustive search over deterministic
//! one-way protocols at toy scale.
//!
//! `μ_b(y | A, M)` is the law of Bob's `y` under `mu(b, k)` when `x` is
//! uniform on `A` and the matchings are fixed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_enum_budget, DistKind, HardDistributionSpec, Matching};
use crate::error::{invalid, Result};

/// Every `k`-tuple of matchings, as index vectors into `all`.
fn matching_tuples(count: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..count).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn apply_tuple(all: &[Matching], tuple: &[usize], x: u64, n: usize, m: usize) -> u64 {
    let mask = (1u64 << n) - 1;
    tuple
        .iter()
        .enumerate()
        .fold(0, |acc, (c, &t)| acc | all[t].apply(x >> (c * n) & mask) << (c * m))
}

/// Flip mask over `mk` edge bits for a set `K` of `Y` copies.
fn flip_mask(ks: u64, k: usize, m: usize) -> u64 {
    (0..k)
        .filter(|&c| ks >> c & 1 == 1)
        .fold(0, |acc, c| acc | ((1u64 << m) - 1) << (c * m))
}

/// `Σ_y |c₊(y) − c₋(y)|` for one matching tuple, with counts over `x ∈ A`
/// and the `K` sets of each parity.
fn l1_count(all: &[Matching], tuple: &[usize], set: &[u64], n: usize, m: usize, k: usize, flips: &[(u64, bool)]) -> i64 {
    let mut diff = vec![0i64; 1 << (m * k)];
    for &x in set {
        let y0 = apply_tuple(all, tuple, x, n, m);
        for &(f, odd) in flips {
            diff[(y0 ^ f) as usize] += if odd { -1 } else { 1 };
        }
    }
    diff.iter().map(|d| d.abs()).sum()
}

fn flips_for(n: usize, m: usize, k: usize) -> Result<Vec<(u64, bool)>> {
    let plus = HardDistributionSpec::new(DistKind::MuPlus, n, m, k)?;
    let minus = HardDistributionSpec::new(DistKind::MuMinus, n, m, k)?;
    Ok(plus
        .y_sets()
        .into_iter()
        .map(|s| (flip_mask(s, k, m), false))
        .chain(minus.y_sets().into_iter().map(|s| (flip_mask(s, k, m), true)))
        .collect())
}

/// Exact `Δ_A` for a message set `A ⊆ {0,1}^{nk}` (copy `i` in bits
/// `[i*n, (i+1)*n)`).
pub fn delta_az(message_set: &[u64], n: usize, m: usize, k: usize) -> Result<BigRational> {
    check_enum_budget(n, m, k)?;
    if message_set.is_empty() {
        return Err(invalid("message set is empty"));
    }
    if message_set.iter().any(|&x| x >> (n * k) != 0) {
        return Err(invalid("message outside {0,1}^(nk)"));
    }
    let all = Matching::all(n, m)?;
    let flips = flips_for(n, m, k)?;
    let tuples = matching_tuples(all.len(), k);
    let total: i64 = tuples
        .par_iter()
        .map(|t| l1_count(&all, t, message_set, n, m, k, &flips))
        .sum();
    let den = BigInt::from(message_set.len() as u64)
        * BigInt::from(1u64 << (k - 1))
        * BigInt::from(tuples.len() as u64);
    Ok(BigRational::new(BigInt::from(total), den))
}

/// `Σ_z P(A_z) Δ_{A_z}` for a partition of all `2^{nk}` inputs; empty parts
/// are skipped.
pub fn weighted_delta(parts: &[Vec<u64>], n: usize, m: usize, k: usize) -> Result<BigRational> {
    let covered: usize = parts.iter().map(Vec::len).sum();
    if covered != 1 << (n * k) {
        return Err(invalid("parts must cover every input exactly once"));
    }
    let mut acc = BigRational::zero();
    for p in parts.iter().filter(|p| !p.is_empty()) {
        let w = BigRational::new(BigInt::from(p.len() as u64), BigInt::from(1u64) << (n * k));
        acc += w * delta_az(p, n, m, k)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneWayOptimum {
    pub n: usize,
    pub m: usize,
    pub c: usize,
    #[serde(with = "crate::exact::ratio")]
    pub advantage: BigRational,
    /// Alice's message for each input `x`.
    pub messages: Vec<u32>,
}

/// Best distinguishing advantage `½(E₊[out] − E₋[out])` between
/// `mu(+1, 1)` and `mu(-1, 1)` over deterministic protocols where Alice sends
/// `c` bits and Bob answers optimally. Exhaustive for `c ∈ {0, 1}` at
/// `n <= 4`; `c >= n` is the identity protocol.
pub fn brute_force_one_way(n: usize, m: usize, c: usize) -> Result<OneWayOptimum> {
    super::check_sizes(n, m)?;
    let inputs = 1usize << n;
    let all = Matching::all(n, m)?;
    let flip = (1u64 << m) - 1;
    let ys: Vec<Vec<u64>> = all.iter().map(|mm| (0..inputs as u64).map(|x| mm.apply(x)).collect()).collect();
    let den = BigInt::from(2 * all.len() as u64) << n;

    // Σ_{z,M,y} |c₊ − c₋| for a message assignment.
    let score = |msg: &dyn Fn(usize) -> u32, parts: usize| -> i64 {
        let mut total = 0i64;
        let mut diff = vec![0i64; parts << m];
        for yrow in &ys {
            diff.iter_mut().for_each(|d| *d = 0);
            for (x, &y) in yrow.iter().enumerate() {
                let z = msg(x) as usize;
                diff[z << m | y as usize] += 1;
                diff[z << m | (y ^ flip) as usize] -= 1;
            }
            total += diff.iter().map(|d| d.abs()).sum::<i64>();
        }
        total
    };

    let (best, messages) = if c >= n {
        let v = score(&|x| x as u32, inputs);
        (v, (0..inputs as u32).collect())
    } else if c == 0 {
        (score(&|_| 0, 1), vec![0; inputs])
    } else if c == 1 && n <= 4 {
        // Alice's message on input 0 is fixed to 0 by symmetry.
        let (v, g) = (0u64..1 << (inputs - 1))
            .into_par_iter()
            .map(|g| (score(&|x| (g << 1 >> x & 1) as u32, 2), g << 1))
            .reduce(|| (i64::MIN, u64::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        (v, (0..inputs).map(|x| (g >> x & 1) as u32).collect())
    } else {
        return Err(crate::Error::BudgetExceeded(format!(
            "exhaustive search supports c in {{0, 1}} with n <= 4 or c >= n, got n = {n}, c = {c}"
        )));
    };
    Ok(OneWayOptimum { n, m, c, advantage: BigRational::new(BigInt::from(best), den), messages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn delta_examples() {
        let everything: Vec<u64> = (0..16).collect();
        assert_eq!(delta_az(&everything, 4, 1, 1).unwrap(), r(0, 1));
        for x in [0u64, 5, 15] {
            assert_eq!(delta_az(&[x], 4, 1, 1).unwrap(), r(2, 1));
        }
        let half: Vec<u64> = (0..16).filter(|x| x & 1 == 0).collect();
        assert_eq!(delta_az(&half, 4, 1, 1).unwrap(), r(0, 1));
        assert!(delta_az(&[], 4, 1, 1).is_err());
        assert_eq!(delta_az(&[3], 4, 1, 2).unwrap(), r(2, 1));
    }

    /// Δ lies in [0, 2] and the weighted sum never decreases under refinement.
    #[test]
    fn refinement_monotone() {
        let n = 4;
        let mut rng = crate::seed::rng(17);
        use rand::Rng;
        for _ in 0..40 {
            let g: Vec<u32> = (0..16).map(|_| rng.random_range(0..2)).collect();
            let coarse: Vec<Vec<u64>> = (0..2).map(|z| (0..16).filter(|&x| g[x as usize] == z).collect()).collect();
            let split: Vec<u32> = (0..16).map(|_| rng.random_range(0..2)).collect();
            let fine: Vec<Vec<u64>> = (0..4)
                .map(|z| (0..16).filter(|&x| 2 * g[x as usize] + split[x as usize] == z).collect())
                .collect();
            let trivial = vec![(0..16).collect::<Vec<u64>>()];
            let d0 = weighted_delta(&trivial, n, 1, 1).unwrap();
            let d1 = weighted_delta(&coarse, n, 1, 1).unwrap();
            let d2 = weighted_delta(&fine, n, 1, 1).unwrap();
            assert!(d0 <= d1 && d1 <= d2);
            assert!(d2 <= r(2, 1));
        }
    }

    #[test]
    fn oracle_extremes() {
        assert_eq!(brute_force_one_way(4, 1, 4).unwrap().advantage, BigRational::one());
        assert_eq!(brute_force_one_way(4, 1, 0).unwrap().advantage, r(0, 1));
        assert_eq!(brute_force_one_way(2, 1, 1).unwrap().advantage, BigRational::one());
        assert!(brute_force_one_way(4, 1, 2).is_err());
    }

    #[test]
    fn oracle_matches_half_weighted_delta() {
        let opt = brute_force_one_way(4, 1, 1).unwrap();
        let parts: Vec<Vec<u64>> = (0..2)
            .map(|z| (0..16).filter(|&x| opt.messages[x as usize] == z).collect())
            .collect();
        let wd = weighted_delta(&parts, 4, 1, 1).unwrap();
        assert_eq!(opt.advantage, wd / BigInt::from(2));
        assert!(opt.advantage > r(0, 1) && opt.advantage < BigRational::one());
    }
}
