//! Writing a `2d`-qubit shared state as a signed combination of pair states
//! `½(|i⟩+ω|j⟩)(⟨i|+ω̄⟨j|)`, each locally equivalent to `|0⟩|0⟩` or to an EPR
//! pair on the first two levels of each side.
//!
//! The real path (`ω = 1`) uses `α_{ij} = Re ρ_{ij}` off the diagonal and
//! `α_{ii} = ρ_{ii} − Σ_{j≠i} Re ρ_{ij}`. Imaginary parts, when present, are
//! carried by extra `ω = ι` components with coefficient `−Im ρ_{ij}`; their
//! diagonal contributions cancel in pairs.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::protocol::serial::MatrixDoc;
use crate::qcore::linalg::{kron, max_abs_entry, real, unitary_from_rows, CMatrix, CVector, C64, I, ONE, TOL};
use crate::qcore::{DensityMatrix, UnitaryOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentKind {
    Zero,
    Epr,
}

/// Relative phase `ω` of the pair state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Real,
    Imaginary,
}

impl Phase {
    fn omega(self) -> C64 {
        match self {
            Phase::Real => ONE,
            Phase::Imaginary => I,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PairClass {
    pub kind: ComponentKind,
    pub witness_a: UnitaryOp,
    pub witness_b: UnitaryOp,
}

fn basis(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

/// Unitary sending `v` to `|0⟩`.
fn to_zero(v: CVector) -> Result<UnitaryOp> {
    let dim = v.len();
    UnitaryOp::new(unitary_from_rows(dim, &[v])?)
}

/// `½(|i⟩+ω|j⟩)(⟨i|+ω̄⟨j|)`, or `|i⟩⟨i|` when `i = j`.
pub fn pair_state(i: usize, j: usize, d: usize, phase: Phase) -> CMatrix {
    let dim = 1usize << (2 * d);
    if i == j {
        let v = basis(dim, i);
        return &v * v.adjoint();
    }
    let v = (basis(dim, i) + basis(dim, j) * phase.omega()) * real(0.5f64.sqrt());
    &v * v.adjoint()
}

/// `|0⟩⟨0|` on `2d` qubits, or the EPR pair on levels `0, 1` of each side.
pub fn canonical_state(kind: ComponentKind, d: usize) -> CMatrix {
    let side = 1usize << d;
    match kind {
        ComponentKind::Zero => pair_state(0, 0, d, Phase::Real),
        ComponentKind::Epr => pair_state(0, side + 1, d, Phase::Real),
    }
}

fn check_pair(i: usize, j: usize, d: usize) -> Result<()> {
    if d == 0 || d > 2 {
        return Err(invalid(format!("d = {d} outside 1..=2")));
    }
    if i >= 1 << (2 * d) || j >= 1 << (2 * d) {
        return Err(invalid("pair index out of range"));
    }
    Ok(())
}

/// Kind and witnesses for `i = (a, b)`, `j = (p, q)` with the real phase.
pub fn classify_pair(i: usize, j: usize, d: usize) -> Result<PairClass> {
    classify_pair_with_phase(i, j, d, Phase::Real)
}

pub fn classify_pair_with_phase(i: usize, j: usize, d: usize, phase: Phase) -> Result<PairClass> {
    check_pair(i, j, d)?;
    let side = 1usize << d;
    let (a, b) = (i / side, i % side);
    let (p, q) = (j / side, j % side);
    let w = phase.omega();
    let h = real(0.5f64.sqrt());
    let zero = |wa: CVector, wb: CVector| -> Result<PairClass> {
        Ok(PairClass {
            kind: ComponentKind::Zero,
            witness_a: to_zero(wa)?,
            witness_b: to_zero(wb)?,
        })
    };
    if i == j {
        zero(basis(side, a), basis(side, b))
    } else if a == p {
        zero(basis(side, a), (basis(side, b) + basis(side, q) * w) * h)
    } else if b == q {
        zero((basis(side, a) + basis(side, p) * w) * h, basis(side, b))
    } else {
        let ua = unitary_from_rows(side, &[basis(side, a), basis(side, p)])?;
        let vb = unitary_from_rows(side, &[basis(side, b), basis(side, q) * w])?;
        Ok(PairClass {
            kind: ComponentKind::Epr,
            witness_a: UnitaryOp::new(ua)?,
            witness_b: UnitaryOp::new(vb)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SimpleComponent {
    pub coefficient: f64,
    pub kind: ComponentKind,
    pub phase: Phase,
    pub witness_a: UnitaryOp,
    pub witness_b: UnitaryOp,
    pub source_pair: (usize, usize),
}

impl SimpleComponent {
    pub fn state(&self, d: usize) -> CMatrix {
        pair_state(self.source_pair.0, self.source_pair.1, d, self.phase)
    }

    /// `max |(U⊗V)† canonical (U⊗V) − ρ^{(i,j)}|`.
    pub fn witness_residual(&self, d: usize) -> f64 {
        let u = kron(self.witness_a.matrix(), self.witness_b.matrix());
        let back = u.adjoint() * canonical_state(self.kind, d) * &u;
        max_abs_entry(&(back - self.state(d)))
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub d: usize,
    pub components: Vec<SimpleComponent>,
    /// Whether imaginary-phase components were needed.
    pub complex_extension: bool,
}

impl Decomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let dim = 1usize << (2 * self.d);
        self.components.iter().fold(CMatrix::zeros(dim, dim), |acc, c| {
            acc + c.state(self.d) * real(c.coefficient)
        })
    }

    /// Coefficient bound asserted for this decomposition: `2^d`, or
    /// `2^{d+1}` when the complex extension is in use.
    pub fn coefficient_bound(&self) -> f64 {
        (1u64 << (self.d + self.complex_extension as usize)) as f64
    }

    pub fn to_doc(&self) -> DecompositionDoc {
        DecompositionDoc {
            d: self.d,
            complex_extension: self.complex_extension,
            components: self
                .components
                .iter()
                .map(|c| ComponentDoc {
                    coefficient: c.coefficient,
                    kind: c.kind,
                    phase: c.phase,
                    source_pair: c.source_pair,
                    witness_a: MatrixDoc::encode(c.witness_a.matrix()),
                    witness_b: MatrixDoc::encode(c.witness_b.matrix()),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentDoc {
    pub coefficient: f64,
    pub kind: ComponentKind,
    pub phase: Phase,
    pub source_pair: (usize, usize),
    pub witness_a: MatrixDoc,
    pub witness_b: MatrixDoc,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionDoc {
    pub d: usize,
    pub complex_extension: bool,
    pub components: Vec<ComponentDoc>,
}

/// One component per ordered pair `(i, j)`, `2^{4d}` in all, plus
/// imaginary-phase components for off-diagonal entries with `|Im ρ_{ij}| > TOL`.
pub fn decompose(rho: &DensityMatrix) -> Result<Decomposition> {
    if !rho.qubits().is_multiple_of(2) {
        return Err(invalid("shared state needs an even qubit count"));
    }
    let d = rho.qubits() / 2;
    if d == 0 || d > 2 {
        return Err(invalid(format!("d = {d} outside 1..=2")));
    }
    let dim = rho.dim();
    let r = rho.matrix();
    let mut components = Vec::with_capacity(dim * dim);
    let mut complex_extension = false;
    for i in 0..dim {
        for j in 0..dim {
            let coefficient = if i == j {
                r[(i, i)].re - (0..dim).filter(|&k| k != i).map(|k| r[(i, k)].re).sum::<f64>()
            } else {
                r[(i, j)].re
            };
            let class = classify_pair(i, j, d)?;
            components.push(SimpleComponent {
                coefficient,
                kind: class.kind,
                phase: Phase::Real,
                witness_a: class.witness_a,
                witness_b: class.witness_b,
                source_pair: (i, j),
            });
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            if i != j && r[(i, j)].im.abs() > TOL {
                complex_extension = true;
                let class = classify_pair_with_phase(i, j, d, Phase::Imaginary)?;
                components.push(SimpleComponent {
                    coefficient: -r[(i, j)].im,
                    kind: class.kind,
                    phase: Phase::Imaginary,
                    witness_a: class.witness_a,
                    witness_b: class.witness_b,
                    source_pair: (i, j),
                });
            }
        }
    }
    Ok(Decomposition { d, components, complex_extension })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub reconstruction_residual: f64,
    pub max_coefficient: f64,
    pub coefficient_bound: f64,
    pub max_witness_residual: f64,
    pub complex_extension: bool,
    pub valid: bool,
}

pub fn verify_decomposition(rho: &DensityMatrix, dec: &Decomposition) -> DecompositionReport {
    let reconstruction_residual = if rho.dim() == 1 << (2 * dec.d) {
        max_abs_entry(&(dec.reconstruct() - rho.matrix()))
    } else {
        f64::INFINITY
    };
    let max_coefficient = dec.components.iter().map(|c| c.coefficient.abs()).fold(0.0, f64::max);
    let max_witness_residual = dec
        .components
        .iter()
        .map(|c| c.witness_residual(dec.d))
        .fold(0.0, f64::max);
    let coefficient_bound = dec.coefficient_bound();
    DecompositionReport {
        valid: reconstruction_residual <= TOL
            && max_witness_residual <= TOL
            && max_coefficient <= coefficient_bound + TOL,
        reconstruction_residual,
        max_coefficient,
        coefficient_bound,
        max_witness_residual,
        complex_extension: dec.complex_extension,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{random_two_way, transcript_distribution};
    use crate::qcore::random::{random_density, random_real_density};
    use crate::qcore::StateVector;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_pair(2, 2, 1).unwrap().kind, ComponentKind::Zero);
        assert_eq!(classify_pair(0, 1, 1).unwrap().kind, ComponentKind::Zero);
        assert_eq!(classify_pair(0, 2, 1).unwrap().kind, ComponentKind::Zero);
        assert_eq!(classify_pair(0, 3, 1).unwrap().kind, ComponentKind::Epr);
        assert_eq!(classify_pair(1, 2, 1).unwrap().kind, ComponentKind::Epr);
        assert!(classify_pair(0, 4, 1).is_err());
    }

    #[test]
    fn epr_example() {
        let rho = StateVector::epr().to_density();
        let dec = decompose(&rho).unwrap();
        for c in &dec.components {
            let expect = match c.source_pair {
                (0, 3) | (3, 0) => 0.5,
                _ => 0.0,
            };
            assert!((c.coefficient - expect).abs() < 1e-15, "{:?}", c.source_pair);
            if expect != 0.0 {
                assert_eq!(c.kind, ComponentKind::Epr);
            }
        }
        assert!(verify_decomposition(&rho, &dec).valid);
    }

    #[test]
    fn zero_state_example() {
        let rho = DensityMatrix::basis(2, 0);
        let dec = decompose(&rho).unwrap();
        let nonzero: Vec<_> = dec.components.iter().filter(|c| c.coefficient != 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].source_pair, (0, 0));
        assert_eq!(nonzero[0].coefficient, 1.0);
        assert_eq!(nonzero[0].kind, ComponentKind::Zero);
    }

    #[test]
    fn random_real_states() {
        let mut rng = crate::seed::rng(31);
        for (d, count) in [(1, 100), (2, 25)] {
            for _ in 0..count {
                let rho = random_real_density(2 * d, &mut rng);
                let dec = decompose(&rho).unwrap();
                assert_eq!(dec.components.len(), 1 << (4 * d));
                assert!(!dec.complex_extension);
                let rep = verify_decomposition(&rho, &dec);
                assert!(rep.valid, "{rep:?}");
                assert_eq!(rep.coefficient_bound, (1 << d) as f64);
            }
        }
    }

    #[test]
    fn complex_states_use_extension() {
        let mut rng = crate::seed::rng(32);
        for d in [1, 2] {
            for _ in 0..20 {
                let rho = random_density(2 * d, &mut rng);
                let dec = decompose(&rho).unwrap();
                assert!(dec.complex_extension);
                let rep = verify_decomposition(&rho, &dec);
                assert!(rep.valid, "{rep:?}");
                assert!(rep.max_coefficient <= (1 << d) as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn tampering_is_flagged() {
        let mut rng = crate::seed::rng(33);
        let rho = random_real_density(2, &mut rng);
        let mut dec = decompose(&rho).unwrap();
        dec.components[5].coefficient += 0.01;
        let rep = verify_decomposition(&rho, &dec);
        assert!(!rep.valid);
        assert!(rep.reconstruction_residual > 1e-3);
    }

    #[test]
    fn evaluation_is_linear_in_the_shared_state() {
        let mut rng = crate::seed::rng(34);
        for _ in 0..5 {
            let p = random_two_way(1, 1, 1, 2, &mut rng);
            let rho = random_real_density(2, &mut rng);
            let dec = decompose(&rho).unwrap();
            let q = p.with_shared(rho).unwrap();
            for x in 0..2 {
                for y in 0..2 {
                    let direct = transcript_distribution(&q, x, y).unwrap();
                    let mut mixed = vec![0.0; direct.len()];
                    for c in &dec.components {
                        let pc = p.with_shared(DensityMatrix::new(c.state(1)).unwrap()).unwrap();
                        for (acc, v) in mixed.iter_mut().zip(transcript_distribution(&pc, x, y).unwrap()) {
                            *acc += c.coefficient * v;
                        }
                    }
                    for (a, b) in direct.iter().zip(&mixed) {
                        assert!((a - b).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn witnesses_preserve_transcripts() {
        let mut rng = crate::seed::rng(35);
        let p = random_two_way(1, 1, 1, 2, &mut rng);
        for (i, j) in [(0, 0), (0, 1), (1, 3), (0, 3), (2, 1)] {
            let class = classify_pair(i, j, 1).unwrap();
            let pi = p.with_shared(DensityMatrix::new(pair_state(i, j, 1, Phase::Real)).unwrap()).unwrap();
            let moved = pi.locally_transformed(&class.witness_a, &class.witness_b).unwrap();
            assert!(max_abs_entry(&(moved.shared().matrix() - canonical_state(class.kind, 1))) < 1e-10);
            for x in 0..2 {
                for y in 0..2 {
                    let a = transcript_distribution(&pi, x, y).unwrap();
                    let b = transcript_distribution(&moved, x, y).unwrap();
                    assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-9));
                }
            }
        }
    }

    #[test]
    fn report_serializes() {
        let rho = StateVector::epr().to_density();
        let doc = decompose(&rho).unwrap().to_doc();
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"kind\":\"epr\""));
    }
}
