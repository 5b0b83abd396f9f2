use super::linalg::*;
use super::state::DensityMatrix;
use crate::error::{invalid, Error, Result};

/// Probabilities at or below this carry no post-measurement state.
pub const DEGENERATE_PROB: f64 = 1e-12;

/// Generalized measurement `{M_i}` with `sum_i M_i^dag M_i = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementFamily {
    labels: Vec<String>,
    ops: Vec<CMatrix>,
}

impl MeasurementFamily {
    /// Outcomes are labelled by their position.
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let labels = (0..ops.len()).map(|i| i.to_string()).collect();
        Self::with_labels(labels, ops)
    }

    pub fn with_labels(labels: Vec<String>, ops: Vec<CMatrix>) -> Result<Self> {
        if ops.is_empty() || labels.len() != ops.len() {
            return Err(invalid("need one label per operator and at least one operator"));
        }
        let dim = ops[0].ncols();
        if ops.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(invalid("measurement operators must share one square side"));
        }
        let residual = completeness_residual(&ops);
        if residual > TOL {
            return Err(Error::Incomplete { residual });
        }
        Ok(Self { labels, ops })
    }

    /// Measurement in the computational basis of `qubits` qubits.
    pub fn computational(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        Self {
            labels: (0..dim).map(|i| i.to_string()).collect(),
            ops: (0..dim).map(|i| ket_bra(dim, i, i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn operator(&self, i: usize) -> &CMatrix {
        &self.ops[i]
    }

    /// Effect `M_i^dag M_i`.
    pub fn effect(&self, i: usize) -> CMatrix {
        self.ops[i].adjoint() * &self.ops[i]
    }

    /// For a two-outcome family, `M_0^dag M_0 - M_1^dag M_1` (outcome 0 is +1).
    pub fn signed_effect(&self) -> Result<CMatrix> {
        if self.len() != 2 {
            return Err(invalid("signed effect needs a two-outcome family"));
        }
        Ok(self.effect(0) - self.effect(1))
    }

    /// Applies `op` on every operator, `M_i -> M_i * op`.
    pub fn precompose(&self, op: &CMatrix) -> Result<Self> {
        Self::with_labels(
            self.labels.clone(),
            self.ops.iter().map(|m| m * op).collect(),
        )
    }
}

/// `|| sum_i M_i^dag M_i - I ||`, max-entry norm.
pub fn completeness_residual(ops: &[CMatrix]) -> f64 {
    let dim = ops[0].ncols();
    let mut acc = -identity(dim);
    for m in ops {
        acc += m.adjoint() * m;
    }
    max_abs_entry(&acc)
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub index: usize,
    pub label: String,
    pub probability: f64,
    pub post_state: Option<DensityMatrix>,
}

pub fn measure(rho: &DensityMatrix, fam: &MeasurementFamily) -> Result<Vec<Outcome>> {
    if fam.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: fam.dim(),
        });
    }
    Ok(fam
        .ops
        .iter()
        .enumerate()
        .map(|(index, m)| {
            let unnorm = m * rho.matrix() * m.adjoint();
            let probability = unnorm.trace().re.max(0.0);
            let post_state = (probability > DEGENERATE_PROB)
                .then(|| DensityMatrix::from_unnormalized(unnorm));
            Outcome {
                index,
                label: fam.labels[index].clone(),
                probability,
                post_state,
            }
        })
        .collect())
}
