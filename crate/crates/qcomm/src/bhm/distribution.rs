//! Hard input distributions: `N` (`y = Mx`), `Y` (`y = -Mx`) and the
//! parity mixtures `mu(b, k)` over `k` copies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_sizes, BhmInstance, Matching};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistKind {
    N,
    Y,
    /// Even number of `Y` copies.
    MuPlus,
    /// Odd number of `Y` copies.
    MuMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardDistributionSpec {
    pub kind: DistKind,
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

impl HardDistributionSpec {
    pub fn new(kind: DistKind, n: usize, m: usize, k: usize) -> Result<Self> {
        check_sizes(n, m)?;
        if k == 0 || n * k > 64 {
            return Err(invalid(format!("need 1 <= k and n*k <= 64, got k = {k}")));
        }
        Ok(Self { kind, n, m, k })
    }

    /// Subsets `K ⊆ [k]` (bitmasks of `Y` copies) the distribution mixes
    /// uniformly over.
    pub fn y_sets(&self) -> Vec<u64> {
        let all = (1u64 << self.k) - 1;
        match self.kind {
            DistKind::N => vec![0],
            DistKind::Y => vec![all],
            DistKind::MuPlus => (0..=all).filter(|s| s.count_ones() % 2 == 0).collect(),
            DistKind::MuMinus => (0..=all).filter(|s| s.count_ones() % 2 == 1).collect(),
        }
    }

    fn draw_y_set<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let all = (1u64 << self.k) - 1;
        match self.kind {
            DistKind::N => 0,
            DistKind::Y => all,
            DistKind::MuPlus | DistKind::MuMinus => {
                let free = rng.random::<u64>() & (all >> 1);
                let want = (self.kind == DistKind::MuMinus) as u32;
                if free.count_ones() % 2 == want {
                    free
                } else {
                    free | 1 << (self.k - 1)
                }
            }
        }
    }
}

/// One `k`-tuple of instances.
pub fn sample(spec: &HardDistributionSpec, seed: u64) -> Result<Vec<BhmInstance>> {
    let mut rng = crate::seed::rng(seed);
    let ys = spec.draw_y_set(&mut rng);
    let mask = (1u64 << spec.n) - 1;
    let flip = (1u64 << spec.m) - 1;
    (0..spec.k)
        .map(|i| {
            let x = rng.random::<u64>() & mask;
            let mm = Matching::random(spec.n, spec.m, &mut rng)?;
            let mx = mm.apply(x);
            let y = if ys >> i & 1 == 1 { mx ^ flip } else { mx };
            Ok(BhmInstance::new(x, mm, y))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Label;
    use std::collections::HashMap;

    fn label_product(tuple: &[BhmInstance]) -> i8 {
        tuple.iter().map(|t| t.label.sign().unwrap()).product()
    }

    #[test]
    fn labels_follow_kind() {
        for (kind, want) in [(DistKind::N, Label::Plus), (DistKind::Y, Label::Minus)] {
            let spec = HardDistributionSpec::new(kind, 6, 2, 2).unwrap();
            for seed in 0..200 {
                assert!(sample(&spec, seed).unwrap().iter().all(|t| t.label == want));
            }
        }
        for (kind, want) in [(DistKind::MuPlus, 1), (DistKind::MuMinus, -1)] {
            let spec = HardDistributionSpec::new(kind, 4, 1, 3).unwrap();
            for seed in 0..200 {
                assert_eq!(label_product(&sample(&spec, seed).unwrap()), want);
            }
        }
    }

    #[test]
    fn y_sets_have_right_parity() {
        let spec = HardDistributionSpec::new(DistKind::MuMinus, 4, 1, 3).unwrap();
        assert_eq!(spec.y_sets(), vec![1, 2, 4, 7]);
        let spec = HardDistributionSpec::new(DistKind::MuPlus, 4, 1, 3).unwrap();
        assert_eq!(spec.y_sets(), vec![0, 3, 5, 6]);
    }

    #[test]
    fn matching_marginal_uniform() {
        let spec = HardDistributionSpec::new(DistKind::N, 4, 1, 1).unwrap();
        let all = Matching::all(4, 1).unwrap();
        let trials = 100_000u64;
        let mut counts: HashMap<Matching, u64> = HashMap::new();
        for seed in 0..trials {
            *counts.entry(sample(&spec, seed).unwrap().remove(0).matching).or_default() += 1;
        }
        assert_eq!(counts.len(), all.len());
        let p = 1.0 / all.len() as f64;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        for mm in &all {
            assert!((counts[mm] as f64 - trials as f64 * p).abs() <= 4.0 * sd);
        }
    }
}
