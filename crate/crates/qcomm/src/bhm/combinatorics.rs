//! Matching combinatorics: induced perfect matchings, the correlation
//! identity `E_x[1[Mx=w] χ_S(x)]`, and the exact probability that a random
//! matching matches a fixed vertex set.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{check_sizes, Matching};
use crate::error::{invalid, Result};

/// Edge indices `M(S)` when every vertex of `S` is covered by an edge of
/// `M` with both endpoints in `S`. Copy `i` uses vertex bits
/// `[i*n, (i+1)*n)` of `s` and edge bits `[i*m, (i+1)*m)` of the result.
pub fn matches(ms: &[Matching], s: u64) -> Option<u64> {
    let mut t = 0u64;
    let mut offset_v = 0;
    let mut offset_e = 0;
    for m in ms {
        let block = if m.n() == 64 { s >> offset_v } else { s >> offset_v & ((1u64 << m.n()) - 1) };
        let mut covered = 0u64;
        for (k, &(i, j)) in m.edges().iter().enumerate() {
            let (a, b) = (block >> i & 1, block >> j & 1);
            if a == 1 && b == 1 {
                covered |= 1 << i | 1 << j;
                t |= 1 << (offset_e + k);
            }
        }
        if covered != block {
            return None;
        }
        offset_v += m.n();
        offset_e += m.m();
    }
    if offset_v < 64 && s >> offset_v != 0 {
        return None;
    }
    Some(t)
}

fn pow2_inv(e: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << e)
}

fn chi_sign(s: u64, x: u64) -> i64 {
    if (s & x).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationAudit {
    #[serde(with = "crate::exact::ratio")]
    pub lhs: BigRational,
    #[serde(with = "crate::exact::ratio")]
    pub rhs: BigRational,
    pub holds: bool,
}

/// Single copy: `lhs = E_x[1[Mx = w] χ_S(x)]` by exhaustive sum, `rhs` the
/// closed form (`0` unless `M` matches `S`, else `2^{-m} χ_{M(S)}(w)`).
pub fn correlation_identity_audit(m: &Matching, s: u64, w: u64) -> Result<CorrelationAudit> {
    let n = m.n();
    if n > 8 {
        return Err(crate::Error::BudgetExceeded(format!("n = {n} > 8")));
    }
    if s >> n != 0 || w >> m.m() != 0 {
        return Err(invalid("subset or target out of range"));
    }
    let sum: i64 = (0..1u64 << n)
        .filter(|&x| m.apply(x) == w)
        .map(|x| chi_sign(s, x))
        .sum();
    let lhs = BigRational::new(BigInt::from(sum), BigInt::one() << n);
    let rhs = match matches(std::slice::from_ref(m), s) {
        None => BigRational::zero(),
        Some(t) => pow2_inv(m.m()) * BigInt::from(chi_sign(t, w)),
    };
    Ok(CorrelationAudit { holds: lhs == rhs, lhs, rhs })
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Probability that a uniform `m`-edge matching on `n` vertices matches a
/// fixed set of `2ℓ_i` vertices, independently in each copy.
pub fn match_probability(n: usize, m: usize, blocks: &[usize]) -> Result<BigRational> {
    check_sizes(n, m)?;
    let mut p = BigRational::one();
    for &l in blocks {
        if 2 * l > n {
            return Err(invalid(format!("block size 2*{l} exceeds n = {n}")));
        }
        p *= BigRational::new(binomial(m, l), binomial(n, 2 * l));
    }
    Ok(p)
}

/// Frequency of matchings that match the first `2ℓ_i` vertices, counted
/// over the full enumeration of each copy.
pub fn match_probability_by_enumeration(n: usize, m: usize, blocks: &[usize]) -> Result<BigRational> {
    let all = Matching::all(n, m)?;
    let mut p = BigRational::one();
    for &l in blocks {
        if 2 * l > n {
            return Err(invalid(format!("block size 2*{l} exceeds n = {n}")));
        }
        let s = (1u64 << (2 * l)) - 1;
        let hits = all
            .iter()
            .filter(|mm| matches(std::slice::from_ref(*mm), s).is_some())
            .count();
        p *= BigRational::new(BigInt::from(hits), BigInt::from(all.len()));
    }
    Ok(p)
}

/// Monte-Carlo estimate of [`match_probability`]; returns `(estimate, std_error)`.
pub fn match_probability_monte_carlo(
    n: usize,
    m: usize,
    blocks: &[usize],
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_sizes(n, m)?;
    if blocks.iter().any(|&l| 2 * l > n) {
        return Err(invalid("block size exceeds n"));
    }
    let mut rng = crate::seed::rng(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut ok = true;
        for &l in blocks {
            let mm = Matching::random(n, m, &mut rng)?;
            ok &= matches(std::slice::from_ref(&mm), (1u64 << (2 * l)) - 1).is_some();
        }
        hits += ok as usize;
    }
    let p = hits as f64 / samples as f64;
    Ok((p, (p * (1.0 - p) / samples as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn matches_examples() {
        let m = Matching::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(matches(std::slice::from_ref(&m), 0), Some(0));
        assert_eq!(matches(std::slice::from_ref(&m), 0b0011), Some(0b01));
        assert_eq!(matches(std::slice::from_ref(&m), 0b0101), None);
        let m1 = Matching::new(4, vec![(0, 1)]).unwrap();
        assert_eq!(matches(std::slice::from_ref(&m1), 0b0011), Some(1));
    }

    #[test]
    fn matched_sets_transfer_parity() {
        let ms = vec![
            Matching::new(6, vec![(0, 3), (1, 5)]).unwrap(),
            Matching::new(6, vec![(2, 4), (0, 1)]).unwrap(),
        ];
        for s in 0..1u64 << 12 {
            if let Some(t) = matches(&ms, s) {
                assert_eq!(t.count_ones() * 2, s.count_ones());
                for i in 0..2 {
                    let sb = (s >> (6 * i) & 63).count_ones();
                    let tb = (t >> (2 * i) & 3).count_ones();
                    assert_eq!((sb / 2) % 2 == 1, tb % 2 == 1);
                }
            }
        }
    }

    #[test]
    fn correlation_examples() {
        let m = Matching::new(4, vec![(0, 2)]).unwrap();
        for w in 0..2 {
            assert_eq!(correlation_identity_audit(&m, 0, w).unwrap().lhs, r(1, 2));
        }
        assert_eq!(correlation_identity_audit(&m, 0b0101, 0).unwrap().lhs, r(1, 2));
        assert_eq!(correlation_identity_audit(&m, 0b0011, 0).unwrap().lhs, r(0, 1));
    }

    #[test]
    fn correlation_identity_exhaustive() {
        for n in [2, 4, 6] {
            for m in 1..=n / 2 {
                for mm in Matching::all(n, m).unwrap() {
                    for s in 0..1u64 << n {
                        for w in 0..1u64 << m {
                            assert!(correlation_identity_audit(&mm, s, w).unwrap().holds);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn match_probability_examples() {
        assert_eq!(match_probability(4, 1, &[1]).unwrap(), r(1, 6));
        assert_eq!(match_probability(4, 1, &[0]).unwrap(), r(1, 1));
        assert_eq!(match_probability(6, 2, &[1]).unwrap(), r(2, 15));
        assert_eq!(match_probability(6, 2, &[1, 2]).unwrap(), r(2, 15) * r(1, 15));
    }

    #[test]
    fn match_probability_equals_enumeration() {
        for n in [2, 4, 6] {
            for m in 1..=n / 2 {
                for l in 0..=n / 2 {
                    assert_eq!(
                        match_probability(n, m, &[l]).unwrap(),
                        match_probability_by_enumeration(n, m, &[l]).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn match_probability_sampling() {
        let (p, se) = match_probability_monte_carlo(6, 2, &[1], 20_000, 5).unwrap();
        assert!((p - 2.0 / 15.0).abs() <= 4.0 * se);
    }
}
