//! Dense complex matrix helpers shared by every module.
//!
//! Qubit `k` of a `q`-qubit register is bit `q - 1 - k` of the basis index, so
//! qubit 0 is the most significant.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Algebraic tolerance used by every invariant check.
pub const TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn diag(entries: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        entries.len(),
        entries.iter().map(|&x| real(x)),
    ))
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_z() -> CMatrix {
    diag(&[1.0, -1.0])
}

/// `|i><j|` of side `dim`.
pub fn ket_bra(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = ONE;
    m
}

/// Number of qubits of a power-of-two dimension.
pub fn qubits_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(invalid(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_entry(&(m - m.adjoint()))
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Schatten 1-norm, the sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if hermitian_deviation(m) <= 1e-13 {
        return hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum();
    }
    m.clone().svd(false, false).singular_values.sum()
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if hermitian_deviation(m) <= 1e-13 {
        return hermitian_eigenvalues(m)
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max);
    }
    m.clone().svd(false, false).singular_values.max()
}

#[inline]
pub fn bit(index: usize, qubit: usize, qubits: usize) -> usize {
    (index >> (qubits - 1 - qubit)) & 1
}

/// Index of the sub-register formed by `qs` (in the listed order).
#[inline]
pub fn sub_index(index: usize, qs: &[usize], qubits: usize) -> usize {
    qs.iter()
        .fold(0, |acc, &q| (acc << 1) | bit(index, q, qubits))
}

/// Basis relabeling for a qubit permutation: new qubit `k` is old qubit `perm[k]`.
fn permutation_map(perm: &[usize]) -> Result<Vec<usize>> {
    let q = perm.len();
    let mut seen = vec![false; q];
    for &p in perm {
        if p >= q || seen[p] {
            return Err(invalid(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok((0..1usize << q).map(|old| sub_index(old, perm, q)).collect())
}

pub fn permute_matrix(m: &CMatrix, perm: &[usize]) -> Result<CMatrix> {
    let q = qubits_of(m.nrows())?;
    if perm.len() != q || m.ncols() != m.nrows() {
        return Err(invalid("permutation length does not match matrix"));
    }
    let map = permutation_map(perm)?;
    let dim = m.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    for c in 0..dim {
        for r in 0..dim {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    Ok(out)
}

pub fn permute_vector(v: &CVector, perm: &[usize]) -> Result<CVector> {
    let q = qubits_of(v.len())?;
    if perm.len() != q {
        return Err(invalid("permutation length does not match vector"));
    }
    let map = permutation_map(perm)?;
    let mut out = CVector::zeros(v.len());
    for (old, &new) in map.iter().enumerate() {
        out[new] = v[old];
    }
    Ok(out)
}

/// Embeds `op`, acting on `targets` (in order), into a `total`-qubit operator
/// that is the identity elsewhere.
pub fn expand_operator(op: &CMatrix, targets: &[usize], total: usize) -> Result<CMatrix> {
    let t = targets.len();
    if op.nrows() != 1 << t || op.ncols() != 1 << t {
        return Err(invalid("operator side does not match target count"));
    }
    if targets.iter().any(|&q| q >= total) {
        return Err(invalid("target qubit out of range"));
    }
    let mut rest_mask = (1usize << total) - 1;
    for &q in targets {
        rest_mask &= !(1 << (total - 1 - q));
    }
    let dim = 1usize << total;
    let sub: Vec<usize> = (0..dim).map(|i| sub_index(i, targets, total)).collect();
    let mut out = CMatrix::zeros(dim, dim);
    for c in 0..dim {
        for r in 0..dim {
            if r & rest_mask == c & rest_mask {
                out[(r, c)] = op[(sub[r], sub[c])];
            }
        }
    }
    Ok(out)
}

/// Partial trace keeping the qubits flagged in `keep`, in their original order.
pub fn partial_trace_matrix(m: &CMatrix, keep: &[bool]) -> Result<CMatrix> {
    let q = qubits_of(m.nrows())?;
    if keep.len() != q {
        return Err(invalid(format!(
            "keep mask has length {}, expected {q}",
            keep.len()
        )));
    }
    let kept: Vec<usize> = (0..q).filter(|&i| keep[i]).collect();
    let traced: Vec<usize> = (0..q).filter(|&i| !keep[i]).collect();
    let kd = 1usize << kept.len();
    let td = 1usize << traced.len();
    let full = |k: usize, t: usize| -> usize {
        let mut idx = 0;
        for (j, &qk) in kept.iter().enumerate() {
            idx |= ((k >> (kept.len() - 1 - j)) & 1) << (q - 1 - qk);
        }
        for (j, &qt) in traced.iter().enumerate() {
            idx |= ((t >> (traced.len() - 1 - j)) & 1) << (q - 1 - qt);
        }
        idx
    };
    let table: Vec<Vec<usize>> = (0..kd)
        .map(|k| (0..td).map(|t| full(k, t)).collect())
        .collect();
    let mut out = CMatrix::zeros(kd, kd);
    for r in 0..kd {
        for c in 0..kd {
            out[(r, c)] = (0..td).map(|t| m[(table[r][t], table[c][t])]).sum();
        }
    }
    Ok(out)
}

/// Normalized `q`-fold Hadamard as a raw matrix.
pub fn hadamard_matrix(q: usize) -> CMatrix {
    let dim = 1usize << q;
    let s = (dim as f64).sqrt().recip();
    CMatrix::from_fn(dim, dim, |r, c| {
        if (r & c).count_ones() % 2 == 0 {
            real(s)
        } else {
            real(-s)
        }
    })
}

/// Completes the orthonormal vectors `targets` into a unitary sending
/// `targets[k]` to basis vector `k`. Remaining rows are filled by Gram-Schmidt
/// over the standard basis in index order.
pub fn unitary_from_rows(dim: usize, targets: &[CVector]) -> Result<CMatrix> {
    let mut rows: Vec<CVector> = Vec::with_capacity(dim);
    for v in targets {
        if v.len() != dim {
            return Err(invalid("vector dimension mismatch"));
        }
        rows.push(v.clone());
    }
    for e in 0..dim {
        if rows.len() == dim {
            break;
        }
        let mut v = CVector::zeros(dim);
        v[e] = ONE;
        for r in &rows {
            let overlap = r.dotc(&v);
            v -= r * overlap;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            rows.push(v / real(norm));
        }
    }
    if rows.len() != dim {
        return Err(invalid("could not complete basis"));
    }
    // Row k of the unitary is <targets[k]|, so U targets[k] = e_k.
    Ok(CMatrix::from_fn(dim, dim, |r, c| rows[r][c].conj()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permute_swaps_qubits() {
        // |01> becomes |10> under a swap.
        let m = ket_bra(4, 1, 1);
        let p = permute_matrix(&m, &[1, 0]).unwrap();
        assert_eq!(p[(2, 2)], ONE);
        assert_eq!(p[(1, 1)], ZERO);
    }

    #[test]
    fn expand_matches_kron() {
        let z = pauli_z();
        let x = pauli_x();
        let a = expand_operator(&z, &[0], 2).unwrap();
        assert!(max_abs_entry(&(a - kron(&z, &identity(2)))) < 1e-15);
        let b = expand_operator(&kron(&z, &x), &[2, 0], 3).unwrap();
        let expect = permute_matrix(&kron(&kron(&z, &identity(2)), &x), &[2, 1, 0]).unwrap();
        assert!(max_abs_entry(&(b - expect)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = diag(&[0.25, 0.75]);
        let b = diag(&[0.5, 0.5]);
        let t = partial_trace_matrix(&kron(&a, &b), &[true, false]).unwrap();
        assert!(max_abs_entry(&(t - a)) < 1e-15);
    }

    #[test]
    fn completion_is_unitary() {
        let s = 0.5f64.sqrt();
        let v = CVector::from_vec(vec![real(s), ZERO, real(s), ZERO]);
        let u = unitary_from_rows(4, std::slice::from_ref(&v)).unwrap();
        assert!(max_abs_entry(&(&u * u.adjoint() - identity(4))) < 1e-12);
        let image = &u * v;
        assert!((image[0] - ONE).norm() < 1e-12);
    }

    #[test]
    fn norms_of_diagonal() {
        assert!((trace_norm(&diag(&[1.0, -1.0])) - 2.0).abs() < 1e-12);
        assert!((trace_norm(&identity(4)) - 4.0).abs() < 1e-12);
        assert!((operator_norm(&diag(&[0.5, -3.0])) - 3.0).abs() < 1e-12);
    }
}
