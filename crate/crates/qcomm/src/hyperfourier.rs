//! Fourier analysis on the Boolean cube `{-1,1}^n`.
//!
//! A point is a bitmask `x` with bit `i` holding variable `i + 1`; a set bit
//! means the coordinate is `-1`. Subsets `S` are bitmasks in the same layout,
//! so `chi_S(x) = (-1)^{|S & x|}`.

use std::f64::consts::{E, LN_2};
use std::ops::{Add, Sub};

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::qcore::linalg::{trace_norm, CMatrix};
use crate::qcore::DensityMatrix;

pub const MAX_VARS: usize = 24;
pub const MAX_MATRIX_VARS: usize = 12;
pub const MAX_MATRIX_QUBITS: usize = 4;

/// Slack allowed on the right-hand side of every level audit.
pub const AUDIT_SLACK: f64 = 1e-9;

#[inline]
pub fn chi(s: usize, x: usize) -> f64 {
    if (s & x).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `+1` or `-1`, the value of variable `i` (0-based) at point `x`.
#[inline]
pub fn coord(x: usize, i: usize) -> f64 {
    if x >> i & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unnormalized Walsh-Hadamard butterfly, `n * 2^n` additions.
pub fn fwht<T: Copy + Add<Output = T> + Sub<Output = T>>(v: &mut [T]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BooleanFunctionTable {
    n: usize,
    values: Vec<f64>,
}

impl BooleanFunctionTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_VARS {
            return Err(invalid(format!("n = {n} exceeds {MAX_VARS}")));
        }
        if values.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("function values must be finite"));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new(n, (0..1usize << n).map(f).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_bounded(&self) -> bool {
        self.values.iter().all(|v| v.abs() <= 1.0)
    }

    /// `E_x |f(x)|`.
    pub fn l1_mean(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.values.len() as f64
    }

    /// `g(x) = f(y)` with `y_{perm[i]} = x_i`.
    pub fn permute_variables(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(invalid("permutation length must equal n"));
        }
        Self::from_fn(self.n, |x| {
            let y = (0..self.n).fold(0, |acc, i| acc | ((x >> i & 1) << perm[i]));
            self.values[y]
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    n: usize,
    coeffs: Vec<f64>,
}

impl FourierSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficient(&self, s: usize) -> f64 {
        self.coeffs[s]
    }

    /// Sum of squared coefficients.
    pub fn total_weight(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    fn level(&self, ell: usize) -> Result<impl Iterator<Item = f64> + '_> {
        if ell > self.n {
            return Err(invalid(format!("level {ell} exceeds n = {}", self.n)));
        }
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .filter(move |(s, _)| s.count_ones() as usize == ell)
            .map(|(_, &c)| c))
    }

    /// `sum_{|S| = ell} f^(S)^2`.
    pub fn level_weight(&self, ell: usize) -> Result<f64> {
        Ok(self.level(ell)?.map(|c| c * c).sum())
    }
}

pub fn fourier(f: &BooleanFunctionTable) -> FourierSpectrum {
    let mut coeffs = f.values.clone();
    fwht(&mut coeffs);
    let scale = (f.values.len() as f64).recip();
    coeffs.iter_mut().for_each(|c| *c *= scale);
    FourierSpectrum { n: f.n, coeffs }
}

pub fn inverse_fourier(spec: &FourierSpectrum) -> BooleanFunctionTable {
    let mut values = spec.coeffs.clone();
    fwht(&mut values);
    BooleanFunctionTable { n: spec.n, values }
}

/// `L_{1,ell}(f) = sum_{|S| = ell} |f^(S)|`.
pub fn level_mass(spec: &FourierSpectrum, ell: usize) -> Result<f64> {
    Ok(spec.level(ell)?.map(f64::abs).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelAudit {
    pub ell: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Scalar level-`ell` inequality for a bounded function with `alpha = E|f|`:
/// `sum_{|S|=ell} f^(S)^2 <= 4 alpha^2 (2e ln(e / alpha^{1/ell}))^ell`.
pub fn level_k_audit(f: &BooleanFunctionTable, ell: usize) -> Result<LevelAudit> {
    if !f.is_bounded() {
        return Err(invalid("level audit needs values in [-1, 1]"));
    }
    if ell == 0 || ell > f.n {
        return Err(invalid(format!("level must lie in 1..={}", f.n)));
    }
    let lhs = fourier(f).level_weight(ell)?;
    let alpha = f.l1_mean();
    let rhs = if alpha == 0.0 {
        0.0
    } else {
        let l = ell as f64;
        4.0 * alpha * alpha * (2.0 * E * (1.0 - alpha.ln() / l)).powi(ell as i32)
    };
    Ok(LevelAudit {
        ell,
        lhs,
        rhs,
        holds: lhs <= rhs + AUDIT_SLACK,
    })
}

/// Density-matrix valued function on `{-1,1}^n`, all values on `c` qubits.
#[derive(Clone, Debug)]
pub struct MatrixValuedFunction {
    n: usize,
    c: usize,
    values: Vec<DensityMatrix>,
}

impl MatrixValuedFunction {
    pub fn new(n: usize, values: Vec<DensityMatrix>) -> Result<Self> {
        if n > MAX_MATRIX_VARS {
            return Err(invalid(format!("n = {n} exceeds {MAX_MATRIX_VARS}")));
        }
        if values.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: values.len(),
            });
        }
        let c = values[0].qubits();
        if c > MAX_MATRIX_QUBITS || values.iter().any(|v| v.qubits() != c) {
            return Err(invalid("values must share a qubit count of at most 4"));
        }
        Ok(Self { n, c, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn values(&self) -> &[DensityMatrix] {
        &self.values
    }
}

/// Matrix Fourier coefficients `rho^(S) = E_x[rho(x) chi_S(x)]`.
#[derive(Clone, Debug)]
pub struct MatrixSpectrum {
    n: usize,
    coeffs: Vec<CMatrix>,
}

impl MatrixSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn coefficient(&self, s: usize) -> &CMatrix {
        &self.coeffs[s]
    }

    /// `Tr|rho^(S)|` for every `S`.
    pub fn trace_norms(&self) -> Vec<f64> {
        self.coeffs.iter().map(trace_norm).collect()
    }
}

fn entrywise_transform(n: usize, mats: &[&CMatrix], scale: f64) -> Vec<CMatrix> {
    let dim = mats[0].nrows();
    let mut out: Vec<CMatrix> = mats.iter().map(|m| (*m).clone()).collect();
    let mut column = vec![crate::qcore::C64::new(0.0, 0.0); 1 << n];
    for r in 0..dim {
        for c in 0..dim {
            for (x, m) in mats.iter().enumerate() {
                column[x] = m[(r, c)];
            }
            fwht(&mut column);
            for (s, m) in out.iter_mut().enumerate() {
                m[(r, c)] = column[s] * scale;
            }
        }
    }
    out
}

pub fn matrix_fourier(f: &MatrixValuedFunction) -> MatrixSpectrum {
    let mats: Vec<&CMatrix> = f.values.iter().map(DensityMatrix::matrix).collect();
    MatrixSpectrum {
        n: f.n,
        coeffs: entrywise_transform(f.n, &mats, ((1usize << f.n) as f64).recip()),
    }
}

/// Reconstructs the function values from a matrix spectrum.
pub fn inverse_matrix_fourier(spec: &MatrixSpectrum) -> Vec<CMatrix> {
    let mats: Vec<&CMatrix> = spec.coeffs.iter().collect();
    entrywise_transform(spec.n, &mats, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixLevelAudit {
    pub ell: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Dimension parameter used on the right-hand side.
    pub effective_c: usize,
    pub padded: bool,
}

/// Matrix level-`ell` inequality:
/// `sum_{|S|=ell} (Tr|rho^(S)|)^2 <= ((2e ln 2) c'' / ell)^ell`, where `c''`
/// is `c` when `ell <= 2 ln2 c` and `c + ceil(ell / (2 ln 2))` otherwise.
pub fn matrix_level_k_audit(f: &MatrixValuedFunction, ell: usize) -> Result<MatrixLevelAudit> {
    if ell == 0 || ell > f.n {
        return Err(invalid(format!("level must lie in 1..={}", f.n)));
    }
    let norms = matrix_fourier(f).trace_norms();
    let lhs: f64 = norms
        .iter()
        .enumerate()
        .filter(|(s, _)| s.count_ones() as usize == ell)
        .map(|(_, t)| t * t)
        .sum();
    let l = ell as f64;
    let padded = l > 2.0 * LN_2 * f.c as f64;
    let effective_c = if padded {
        f.c + (l / (2.0 * LN_2)).ceil() as usize
    } else {
        f.c
    };
    let rhs = (2.0 * E * LN_2 * effective_c as f64 / l).powi(ell as i32);
    Ok(MatrixLevelAudit {
        ell,
        lhs,
        rhs,
        holds: lhs <= rhs + AUDIT_SLACK,
        effective_c,
        padded,
    })
}

/// Random bounded table. A random fraction of points is zeroed so that `E|f|`
/// spans several orders of magnitude across draws.
pub fn random_bounded<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BooleanFunctionTable {
    let density: f64 = 10f64.powf(-rng.random_range(0.0..2.5));
    let values = (0..1usize << n)
        .map(|_| {
            if rng.random::<f64>() < density {
                rng.random_range(-1.0..=1.0)
            } else {
                0.0
            }
        })
        .collect();
    BooleanFunctionTable { n, values }
}

pub fn random_matrix_function<R: Rng + ?Sized>(
    n: usize,
    c: usize,
    rng: &mut R,
) -> MatrixValuedFunction {
    let values = (0..1usize << n)
        .map(|_| crate::qcore::random::random_density(c, rng))
        .collect();
    MatrixValuedFunction { n, c, values }
}
