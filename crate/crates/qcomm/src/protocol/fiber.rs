use rayon::prelude::*;

use super::Protocol;
use crate::error::{invalid, Result};
use crate::hyperfourier::BooleanFunctionTable;

pub const MAX_FIBER_VARS: usize = 12;

/// `H(z) = E_x[C(x, x ⊙ z)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct XorFiberTable {
    n: usize,
    values: Vec<f64>,
}

impl XorFiberTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_table(&self) -> BooleanFunctionTable {
        BooleanFunctionTable::new(self.n, self.values.clone()).expect("fiber values are finite")
    }
}

pub fn xor_fiber<P: Protocol + ?Sized>(p: &P) -> Result<XorFiberTable> {
    let n = p.n();
    if n > MAX_FIBER_VARS {
        return Err(invalid(format!("n = {n} exceeds {MAX_FIBER_VARS}")));
    }
    let size = 1usize << n;
    // Full output table, rows indexed by x.
    let outputs: Vec<Vec<f64>> = (0..size)
        .into_par_iter()
        .map(|x| (0..size).map(|y| p.expected_output(x, y)).collect())
        .collect::<Result<_>>()?;
    let values = (0..size)
        .map(|z| (0..size).map(|x| outputs[x][x ^ z]).sum::<f64>() / size as f64)
        .collect();
    Ok(XorFiberTable { n, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperfourier::coord;
    use crate::protocol::{random_smp, FnProtocol};

    #[test]
    fn fiber_examples() {
        let one = xor_fiber(&FnProtocol::new(3, |_, _| 1.0)).unwrap();
        assert!(one.values().iter().all(|&v| v == 1.0));

        let prod = xor_fiber(&FnProtocol::new(3, |x, y| coord(x, 0) * coord(y, 0))).unwrap();
        for z in 0..8 {
            assert_eq!(prod.values()[z], coord(z, 0));
        }

        let eq = xor_fiber(&FnProtocol::new(2, |x, y| if x == y { 1.0 } else { -1.0 })).unwrap();
        assert_eq!(eq.values(), &[1.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn fiber_invariant_under_joint_flip_and_swap() {
        let mut rng = crate::seed::rng(61);
        let p = random_smp(3, 1, &mut rng);
        let h = xor_fiber(&p).unwrap();
        let mask = 0b111;
        let flipped = FnProtocol::new(3, |x, y| p.expected_output(x ^ mask, y ^ mask).unwrap());
        let swapped = FnProtocol::new(3, |x, y| p.expected_output(y, x).unwrap());
        for other in [xor_fiber(&flipped).unwrap(), xor_fiber(&swapped).unwrap()] {
            for (a, b) in h.values().iter().zip(other.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(h.values().iter().all(|v| v.abs() <= 1.0 + 1e-10));
    }
}
