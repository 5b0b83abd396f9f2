//! Removing shared entanglement from a one-way protocol.
//!
//! Alice measures as before and sends `z`. She also knows the collapsed joint
//! state `σ(x, z)`, so she samples a uniform entry `(i, j)` of it and sends
//! the indices together with the entry quantized to `5d` fractional bits.
//! Bob outputs a `±1` coin with mean `Re(F'[i,j] · conj σ̃[i,j])`, where
//! `F' = I ⊗ F(y, z)`. In expectation this is `2^{-4d} Tr(F' σ)`.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::protocol::{OneWayEntangledProtocol, Protocol};
use crate::qcore::linalg::{identity, ket_bra, pauli_x, pauli_z, real, CMatrix, C64};
use crate::qcore::{DensityMatrix, MeasurementFamily, StateVector};

/// Rounds `v` to the nearest multiple of `2^{-bits}` with ties toward zero,
/// keeping the magnitude at most `1 − 2^{-bits}` so it fits a sign bit and
/// `bits` fraction bits.
pub fn quantize(v: f64, bits: u32) -> f64 {
    let scale = (1u64 << bits) as f64;
    let t = v.abs() * scale;
    let floor = t.floor();
    let k = if t - floor > 0.5 { floor + 1.0 } else { floor };
    let k = k.min(scale - 1.0);
    v.signum() * k / scale
}

/// `E_{i,j}[F'[i,j] · conj σ[i,j]]` over all `(i, j)`; equals
/// `2^{-4d} Tr(F' σ)` for Hermitian `σ`.
pub fn entry_average(f: &CMatrix, sigma: &CMatrix) -> C64 {
    let n = f.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += f[(i, j)] * sigma[(i, j)].conj();
        }
    }
    acc / real((n * n) as f64)
}

/// Message size of the stripped protocol in bits: `c` for `z`, `4d` for
/// `(i, j)` and `5d + 1` per transmitted real number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CostAccount {
    pub original: usize,
    pub indices: usize,
    pub value: usize,
    pub total: usize,
    /// `original + 10d`.
    pub budget: usize,
    pub within_budget: bool,
}

pub fn cost_account(c: usize, d: usize, complex_entries: bool) -> CostAccount {
    let per_real = 5 * d + 1;
    let value = if complex_entries { 2 * per_real } else { per_real };
    let total = c + 4 * d + value;
    CostAccount {
        original: c,
        indices: 4 * d,
        value,
        total,
        budget: c + 10 * d,
        within_budget: total <= c + 10 * d,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StrippedOneWay {
    pub original_output: f64,
    /// Exact expected output with unquantized entries.
    pub ideal_output: f64,
    /// Exact expected output with quantized entries.
    pub stripped_output: f64,
    /// `|stripped − ideal|`, at most `2^{-5d}`.
    pub quantization_error: f64,
    pub quantization_bound: f64,
    pub complex_entries: bool,
    pub cost: CostAccount,
}

fn quantize_entry(v: C64, bits: u32, complex: bool) -> C64 {
    if complex {
        C64::new(quantize(v.re, bits), quantize(v.im, bits))
    } else {
        C64::new(quantize(v.re, bits), 0.0)
    }
}

/// Exact expected outputs of the stripped protocol on `(x, y)`.
pub fn strip_entanglement_oneway(p: &OneWayEntangledProtocol, x: usize, y: usize) -> Result<StrippedOneWay> {
    let d = p.d();
    if d == 0 || d > 2 {
        return Err(invalid(format!("d = {d} outside 1..=2")));
    }
    let bits = 5 * d as u32;
    let complex_entries = p.shared().matrix().iter().any(|v| v.im.abs() > 1e-12)
        || (0..1 << p.c()).any(|z| {
            p.alice(x).operator(z).iter().any(|v| v.im.abs() > 1e-12)
        });
    let original_output = p.expected_output(x, y)?;
    let mut ideal = 0.0;
    let mut stripped = 0.0;
    for z in 0..1 << p.c() {
        if let (pz, Some(sigma)) = p.post_measurement(x, z) {
            let f = p.joint_effect(y, z);
            let s = sigma.matrix();
            ideal += pz * entry_average(&f, s).re;
            let q = s.map(|v| quantize_entry(v, bits, complex_entries));
            stripped += pz * entry_average(&f, &q).re;
        }
    }
    Ok(StrippedOneWay {
        original_output,
        ideal_output: ideal,
        stripped_output: stripped,
        quantization_error: (stripped - ideal).abs(),
        quantization_bound: 2f64.powi(-(5 * d as i32)),
        complex_entries,
        cost: cost_account(p.c(), d, complex_entries),
    })
}

/// One run of the stripped protocol: Alice samples `z` and `(i, j)`, Bob
/// flips his coin. Returns Bob's `±1` output.
pub fn sample_stripped_oneway<R: Rng + ?Sized>(
    p: &OneWayEntangledProtocol,
    x: usize,
    y: usize,
    rng: &mut R,
) -> Result<i8> {
    let d = p.d();
    let bits = 5 * d as u32;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = None;
    for z in 0..1 << p.c() {
        let (pz, sigma) = p.post_measurement(x, z);
        acc += pz;
        if let Some(s) = sigma {
            chosen = Some((z, s));
            if u < acc {
                break;
            }
        }
    }
    let (z, sigma): (usize, DensityMatrix) = chosen.ok_or_else(|| invalid("no message has positive probability"))?;
    let dim = sigma.dim();
    let i = rng.random_range(0..dim);
    let j = rng.random_range(0..dim);
    let complex = sigma.matrix().iter().any(|v| v.im.abs() > 1e-12);
    let entry = quantize_entry(sigma.matrix()[(i, j)], bits, complex);
    let mean = (p.joint_effect(y, z)[(i, j)] * entry.conj()).re.clamp(-1.0, 1.0);
    Ok(if rng.random::<f64>() < (1.0 + mean) / 2.0 { 1 } else { -1 })
}

/// Shared EPR pair; Alice applies `X^x` and measures in the computational
/// basis, sending the bit `z`; Bob's effect is `(1/3)(-1)^{z⊕y} Z`. The
/// expected output is `(1/3)(-1)^{x⊕y}`.
pub fn epr_measurement_protocol() -> OneWayEntangledProtocol {
    let fams: Vec<MeasurementFamily> = (0..2)
        .map(|x| {
            let flip = if x == 1 { pauli_x() } else { identity(2) };
            MeasurementFamily::new(vec![ket_bra(2, 0, 0) * &flip, ket_bra(2, 1, 1) * &flip])
                .expect("projective family")
        })
        .collect();
    let bob: Vec<Vec<CMatrix>> = (0..2)
        .map(|y| {
            (0..2)
                .map(|z| pauli_z() * real(if (y ^ z) == 0 { 1.0 / 3.0 } else { -1.0 / 3.0 }))
                .collect()
        })
        .collect();
    OneWayEntangledProtocol::new(1, 1, StateVector::epr().to_density(), fams, bob)
        .expect("valid test protocol")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::random_one_way;
    use crate::qcore::random::{random_density, random_hermitian_contraction};

    #[test]
    fn quantize_rounds_ties_toward_zero() {
        assert_eq!(quantize(0.5 / 32.0, 5), 0.0);
        assert_eq!(quantize(-0.5 / 32.0, 5), 0.0);
        assert_eq!(quantize(1.5 / 32.0, 5), 1.0 / 32.0);
        assert_eq!(quantize(0.6 / 32.0, 5), 1.0 / 32.0);
        assert_eq!(quantize(1.0, 5), 31.0 / 32.0);
        assert_eq!(quantize(-1.0, 5), -31.0 / 32.0);
        for k in 0..1000 {
            let v = -1.0 + 2.0 * k as f64 / 999.0;
            assert!((quantize(v, 5) - v).abs() <= 1.0 / 32.0);
        }
    }

    #[test]
    fn expectation_identity() {
        let mut rng = crate::seed::rng(51);
        for _ in 0..100 {
            let f = random_hermitian_contraction(4, &mut rng);
            let s = random_density(2, &mut rng);
            let lhs = entry_average(&f, s.matrix());
            let rhs = (&f * s.matrix()).trace() / real(16.0);
            assert!((lhs - rhs).norm() < 1e-12);
            assert!(lhs.im.abs() < 1e-12);
        }
    }

    #[test]
    fn test_family_advantage() {
        let p = epr_measurement_protocol();
        let floor = (1.0 / 6.0) / 16.0;
        for x in 0..2 {
            for y in 0..2 {
                let sign = if x == y { 1.0 } else { -1.0 };
                assert!((p.expected_output(x, y).unwrap() - sign / 3.0).abs() < 1e-12);
                let s = strip_entanglement_oneway(&p, x, y).unwrap();
                assert!((s.ideal_output - sign / 48.0).abs() < 1e-12);
                assert!(sign * s.stripped_output >= floor);
                assert!(s.quantization_error <= s.quantization_bound);
                assert!(s.cost.within_budget);
                assert_eq!(s.cost.total, 1 + 4 + 6);
            }
        }
    }

    #[test]
    fn random_protocols_respect_quantization_bound() {
        let mut rng = crate::seed::rng(52);
        for d in [1, 2] {
            for _ in 0..5 {
                let p = random_one_way(1, d, 1, &mut rng);
                for x in 0..2 {
                    for y in 0..2 {
                        let s = strip_entanglement_oneway(&p, x, y).unwrap();
                        let side = (1u64 << (4 * d)) as f64;
                        assert!((s.ideal_output - s.original_output / side).abs() < 1e-12);
                        assert!(s.quantization_error <= s.quantization_bound);
                    }
                }
            }
        }
    }

    #[test]
    fn sampled_runs_match_exact_mean() {
        let p = epr_measurement_protocol();
        let s = strip_entanglement_oneway(&p, 1, 1).unwrap();
        let shots = 200_000;
        let mut rng = crate::seed::rng(53);
        let sum: i64 = (0..shots).map(|_| sample_stripped_oneway(&p, 1, 1, &mut rng).unwrap() as i64).sum();
        let mean = sum as f64 / shots as f64;
        assert!((mean - s.stripped_output).abs() <= 4.0 / (shots as f64).sqrt());
    }

    #[test]
    fn cost_accounting() {
        assert_eq!(cost_account(3, 1, false).total, 3 + 4 + 6);
        assert!(cost_account(3, 2, false).within_budget);
        assert!(!cost_account(3, 1, true).within_budget);
    }
}
