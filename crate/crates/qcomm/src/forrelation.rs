//! Forrelation instances and the swap-test protocol for their XOR.
//!
//! Vectors in `{-1,1}^n` are stored as `i8` slices of `±1`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
pub use crate::label::Label;
use crate::hyperfourier::fwht;
use crate::qcore::linalg::{real, CVector};
use crate::qcore::{swap_test_prob, StateVector};
use crate::seed;

/// Rejection cap for [`plant_instance`].
pub const MAX_REJECTIONS: u64 = 1_000_000;
/// Default planting-feasibility constant `C` in `eps >= 8 C / sqrt(n)`.
pub const DEFAULT_FEASIBILITY: f64 = 0.5;

/// Which bilinear form defines the promise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForrConvention {
    /// `forr(x ⊙ y)` with the Hadamard of side `n/2` acting on the first half.
    HalfXor,
    /// `(1/n) <y, H_n x>`, the overlap a swap test between `|x>` and `H|y>` sees.
    FullPair,
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(invalid(format!("length {n} is not a power of two >= 2")));
    }
    Ok(())
}

/// Orthonormal Hadamard transform of a `±1` vector.
fn hadamard(v: &[i8]) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().map(|&b| b as f64).collect();
    fwht(&mut out);
    let s = (v.len() as f64).sqrt().recip();
    out.iter_mut().for_each(|a| *a *= s);
    out
}

fn dot(a: &[i8], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, y)| x as f64 * y).sum()
}

/// `(1/n) <z2, H z1>` with `z = (z1, z2)` split in halves of length `n/2`.
pub fn forr_value(z: &[i8]) -> Result<f64> {
    check_len(z.len())?;
    let (z1, z2) = z.split_at(z.len() / 2);
    Ok(dot(z2, &hadamard(z1)) / z.len() as f64)
}

/// `(1/n) <y, H_n x>` for two length-`n` vectors.
pub fn forr_pair(x: &[i8], y: &[i8]) -> Result<f64> {
    check_len(x.len())?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(dot(y, &hadamard(x)) / x.len() as f64)
}

pub fn pointwise(x: &[i8], y: &[i8]) -> Vec<i8> {
    x.iter().zip(y).map(|(a, b)| a * b).collect()
}

/// The promise value of `(x, y)` under `conv`.
pub fn promise_value(x: &[i8], y: &[i8], conv: ForrConvention) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    match conv {
        ForrConvention::HalfXor => forr_value(&pointwise(x, y)),
        ForrConvention::FullPair => forr_pair(x, y),
    }
}

/// `-1` at or above `eps/4`, `+1` at or below `eps/8`, `*` in between.
pub fn classify_value(v: f64, epsilon: f64) -> Label {
    if v >= epsilon / 4.0 {
        Label::Minus
    } else if v <= epsilon / 8.0 {
        Label::Plus
    } else {
        Label::Star
    }
}

pub fn classify(x: &[i8], y: &[i8], epsilon: f64, conv: ForrConvention) -> Result<Label> {
    Ok(classify_value(promise_value(x, y, conv)?, epsilon))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForrInstance {
    pub n: usize,
    pub epsilon: f64,
    #[serde(with = "bitstring")]
    pub x: Vec<i8>,
    #[serde(with = "bitstring")]
    pub y: Vec<i8>,
    pub label: Label,
    pub convention: ForrConvention,
    pub seed: Option<u64>,
}

impl ForrInstance {
    pub fn value(&self) -> f64 {
        promise_value(&self.x, &self.y, self.convention).expect("instance dimensions are valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        if inst.x.len() != inst.n || inst.y.len() != inst.n {
            return Err(invalid("vector lengths do not match n"));
        }
        Ok(inst)
    }
}

/// `±1` vectors as `0`/`1` strings, `0` meaning `+1`.
mod bitstring {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[i8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.iter().map(|&b| if b > 0 { '0' } else { '1' }).collect::<String>())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<i8>, D::Error> {
        String::deserialize(d)?
            .chars()
            .map(|c| match c {
                '0' => Ok(1),
                '1' => Ok(-1),
                other => Err(D::Error::custom(format!("unexpected character {other:?}"))),
            })
            .collect()
    }
}

fn uniform_signs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// One raw draw of the planting procedure; `None` is a rejection.
fn plant_attempt<R: Rng + ?Sized>(
    n: usize,
    epsilon: f64,
    label: Label,
    conv: ForrConvention,
    rng: &mut R,
) -> Option<(Vec<i8>, Vec<i8>)> {
    let x = uniform_signs(n, rng);
    match label {
        Label::Plus => {
            let y = uniform_signs(n, rng);
            let v = promise_value(&x, &y, conv).ok()?;
            (v.abs() <= epsilon / 8.0).then_some((x, y))
        }
        Label::Minus => {
            let target = epsilon / 4.0;
            // Steer the free vector toward the sign pattern of the Hadamard
            // image of the fixed one, one coordinate at a time.
            let (fixed, mut free) = match conv {
                ForrConvention::HalfXor => (uniform_signs(n / 2, rng), uniform_signs(n / 2, rng)),
                ForrConvention::FullPair => (x.clone(), uniform_signs(n, rng)),
            };
            let image = hadamard(&fixed);
            let value = |free: &[i8]| dot(free, &image) / n as f64;
            let mut order: Vec<usize> = (0..free.len()).collect();
            order.shuffle(rng);
            for i in order {
                if value(&free) >= target {
                    break;
                }
                free[i] = if image[i] >= 0.0 { 1 } else { -1 };
            }
            if value(&free) < target {
                return None;
            }
            match conv {
                ForrConvention::HalfXor => {
                    let s: Vec<i8> = fixed.into_iter().chain(free).collect();
                    let y = pointwise(&x, &s);
                    Some((x, y))
                }
                ForrConvention::FullPair => Some((x, free)),
            }
        }
        Label::Star => None,
    }
}

/// Samples an instance with the requested promise label.
pub fn plant_instance(
    n: usize,
    epsilon: f64,
    label: Label,
    conv: ForrConvention,
    seed: u64,
    feasibility: f64,
) -> Result<ForrInstance> {
    check_len(n)?;
    if label == Label::Star {
        return Err(invalid("only promise labels can be planted"));
    }
    if epsilon < 8.0 * feasibility / (n as f64).sqrt() {
        return Err(invalid(format!(
            "epsilon {epsilon} below the planting floor 8C/sqrt(n) = {}",
            8.0 * feasibility / (n as f64).sqrt()
        )));
    }
    let mut rng = seed::rng(seed);
    for _ in 0..MAX_REJECTIONS {
        if let Some((x, y)) = plant_attempt(n, epsilon, label, conv, &mut rng) {
            debug_assert_eq!(classify(&x, &y, epsilon, conv).ok(), Some(label));
            return Ok(ForrInstance {
                n,
                epsilon,
                x,
                y,
                label,
                convention: conv,
                seed: Some(seed),
            });
        }
    }
    Err(Error::PlantingInfeasible {
        attempts: MAX_REJECTIONS,
    })
}

/// Fraction of single planting draws that are accepted.
pub fn plant_acceptance_rate(
    n: usize,
    epsilon: f64,
    label: Label,
    conv: ForrConvention,
    seed: u64,
    draws: u64,
) -> Result<f64> {
    check_len(n)?;
    let mut rng = seed::rng(seed);
    let hits = (0..draws)
        .filter(|_| plant_attempt(n, epsilon, label, conv, &mut rng).is_some())
        .count();
    Ok(hits as f64 / draws as f64)
}

/// `k` instances sharing `n` and `epsilon`; the XOR label is the product of
/// the copy labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForrXorInstance {
    pub k: usize,
    pub n: usize,
    pub epsilon: f64,
    pub copies: Vec<ForrInstance>,
}

impl ForrXorInstance {
    /// `1 / (60 k^2 ln n)`.
    pub fn standard_epsilon(k: usize, n: usize) -> f64 {
        1.0 / (60.0 * (k * k) as f64 * (n as f64).ln())
    }

    pub fn new(copies: Vec<ForrInstance>) -> Result<Self> {
        let first = copies.first().ok_or_else(|| invalid("need at least one copy"))?;
        let (n, epsilon) = (first.n, first.epsilon);
        if copies.iter().any(|c| c.n != n || c.epsilon != epsilon) {
            return Err(invalid("copies must share n and epsilon"));
        }
        Ok(Self {
            k: copies.len(),
            n,
            epsilon,
            copies,
        })
    }

    /// Product of copy labels, if every copy satisfies the promise.
    pub fn xor_label(&self) -> Option<i8> {
        self.copies
            .iter()
            .map(|c| c.label.sign())
            .try_fold(1i8, |acc, s| s.map(|s| acc * s))
    }
}

/// Midpoint between the acceptance probabilities at biases `eps/4` and `eps/8`.
pub fn swap_threshold(epsilon: f64) -> f64 {
    0.5 + 5.0 * epsilon * epsilon / 256.0
}

/// Repetitions per copy so that Hoeffding plus a union bound over `k` copies
/// certifies success at least `2/3`.
pub fn default_reps(k: usize, epsilon: f64) -> u64 {
    let delta = 3.0 * epsilon * epsilon / 256.0;
    ((3.0 * k as f64).ln().max(f64::MIN_POSITIVE) / (2.0 * delta * delta)).ceil() as u64
}

/// Swap-test acceptance probability between `|x>` and `H_n |y>`.
pub fn swap_acceptance(x: &[i8], y: &[i8]) -> Result<f64> {
    check_len(x.len())?;
    let n = x.len();
    let s = (n as f64).sqrt().recip();
    let phi = StateVector::from_vector(CVector::from_iterator(n, x.iter().map(|&b| real(b as f64 * s))))?;
    let hy = hadamard(y);
    let psi = StateVector::from_vector(CVector::from_iterator(n, hy.iter().map(|&a| real(a * s))))?;
    swap_test_prob(&phi, &psi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwapTestOutcome {
    pub accepts: Vec<u64>,
    pub decisions: Vec<i8>,
    pub output: i8,
}

/// Runs `reps` swap tests per copy, decides each copy by thresholding the
/// acceptance frequency and outputs the product of the decisions.
pub fn swap_test_protocol(inst: &ForrXorInstance, reps: u64, seed: u64) -> Result<SwapTestOutcome> {
    if reps == 0 {
        return Err(invalid("reps must be positive"));
    }
    let threshold = swap_threshold(inst.epsilon);
    let mut accepts = Vec::with_capacity(inst.k);
    let mut decisions = Vec::with_capacity(inst.k);
    for (i, copy) in inst.copies.iter().enumerate() {
        let p = swap_acceptance(&copy.x, &copy.y)?;
        let mut rng = seed::rng_at(seed, &[i as u64]);
        let hits = Binomial::new(reps, p.min(1.0))
            .map_err(|e| invalid(e.to_string()))?
            .sample(&mut rng);
        accepts.push(hits);
        decisions.push(if hits as f64 / reps as f64 > threshold { -1 } else { 1 });
    }
    let output = decisions.iter().product();
    Ok(SwapTestOutcome {
        accepts,
        decisions,
        output,
    })
}
