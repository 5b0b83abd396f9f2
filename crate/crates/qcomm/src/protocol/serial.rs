//! JSON form of protocols. Matrices are stored as their dimensions plus a
//! base64 string of row-major entries, each entry the little-endian `f64`
//! real part followed by the imaginary part. Accept sets are lists of
//! transcript bitmasks.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{SmpQuantumProtocol, TwoWayEntangledProtocol};
use crate::error::{invalid, Error, Result};
use crate::qcore::linalg::{CMatrix, C64};
use crate::qcore::{DensityMatrix, MeasurementFamily};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: String,
}

impl MatrixDoc {
    pub fn encode(m: &CMatrix) -> Self {
        let mut bytes = Vec::with_capacity(16 * m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                bytes.extend_from_slice(&m[(r, c)].re.to_le_bytes());
                bytes.extend_from_slice(&m[(r, c)].im.to_le_bytes());
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: STANDARD.encode(bytes),
        }
    }

    pub fn decode(&self) -> Result<CMatrix> {
        let bytes = STANDARD
            .decode(&self.data)
            .map_err(|e| Error::Serialization(e.to_string()))?;
        if bytes.len() != 16 * self.rows * self.cols {
            return Err(Error::Serialization(format!(
                "expected {} bytes for a {}x{} matrix, found {}",
                16 * self.rows * self.cols,
                self.rows,
                self.cols,
                bytes.len()
            )));
        }
        let f = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
        Ok(CMatrix::from_fn(self.rows, self.cols, |r, c| {
            let k = 2 * (r * self.cols + c);
            C64::new(f(k), f(k + 1))
        }))
    }
}

type FamilyDoc = Vec<MatrixDoc>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoWayDoc {
    pub schema: u32,
    pub kind: String,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub rounds: usize,
    pub shared: MatrixDoc,
    /// `[round][input][prefix]` measurement operators.
    pub alice: Vec<Vec<Vec<FamilyDoc>>>,
    pub bob: Vec<Vec<Vec<FamilyDoc>>>,
    pub accept: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmpDoc {
    pub schema: u32,
    pub kind: String,
    pub n: usize,
    pub c: usize,
    pub prep_a: Vec<MatrixDoc>,
    pub prep_b: Vec<MatrixDoc>,
    pub effect: MatrixDoc,
}

fn encode_families(f: &[Vec<Vec<MeasurementFamily>>]) -> Vec<Vec<Vec<FamilyDoc>>> {
    f.iter()
        .map(|per_input| {
            per_input
                .iter()
                .map(|per_prefix| {
                    per_prefix
                        .iter()
                        .map(|fam| fam.operators().iter().map(MatrixDoc::encode).collect())
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn decode_families(f: &[Vec<Vec<FamilyDoc>>]) -> Result<Vec<Vec<Vec<MeasurementFamily>>>> {
    f.iter()
        .map(|per_input| {
            per_input
                .iter()
                .map(|per_prefix| {
                    per_prefix
                        .iter()
                        .map(|ops| {
                            let ops = ops.iter().map(MatrixDoc::decode).collect::<Result<_>>()?;
                            MeasurementFamily::new(ops)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn check_header(schema: u32, kind: &str, expected: &str) -> Result<()> {
    if schema != SCHEMA_VERSION {
        return Err(Error::Serialization(format!("unsupported schema {schema}")));
    }
    if kind != expected {
        return Err(invalid(format!("expected a {expected} document, found {kind}")));
    }
    Ok(())
}

impl TwoWayEntangledProtocol {
    pub fn to_doc(&self) -> TwoWayDoc {
        TwoWayDoc {
            schema: SCHEMA_VERSION,
            kind: "two-way".into(),
            n: self.alice()[0].len().trailing_zeros() as usize,
            d: self.d(),
            m: self.m(),
            rounds: self.rounds(),
            shared: MatrixDoc::encode(self.shared().matrix()),
            alice: encode_families(self.alice()),
            bob: encode_families(self.bob()),
            accept: self.accept_set().to_vec(),
        }
    }

    pub fn from_doc(doc: &TwoWayDoc) -> Result<Self> {
        check_header(doc.schema, &doc.kind, "two-way")?;
        let p = Self::new(
            doc.n,
            doc.d,
            doc.m,
            DensityMatrix::new(doc.shared.decode()?)?,
            decode_families(&doc.alice)?,
            decode_families(&doc.bob)?,
            doc.accept.clone(),
        )?;
        if p.rounds() != doc.rounds {
            return Err(invalid("round count does not match the families"));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TwoWayDoc =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

impl SmpQuantumProtocol {
    pub fn to_doc(&self) -> SmpDoc {
        SmpDoc {
            schema: SCHEMA_VERSION,
            kind: "smp".into(),
            n: self.prep_a().len().trailing_zeros() as usize,
            c: self.c(),
            prep_a: self.prep_a().iter().map(|r| MatrixDoc::encode(r.matrix())).collect(),
            prep_b: self.prep_b().iter().map(|r| MatrixDoc::encode(r.matrix())).collect(),
            effect: MatrixDoc::encode(self.effect()),
        }
    }

    pub fn from_doc(doc: &SmpDoc) -> Result<Self> {
        check_header(doc.schema, &doc.kind, "smp")?;
        let states = |v: &[MatrixDoc]| -> Result<Vec<DensityMatrix>> {
            v.iter().map(|m| DensityMatrix::new(m.decode()?)).collect()
        };
        let p = Self::new(doc.n, states(&doc.prep_a)?, states(&doc.prep_b)?, doc.effect.decode()?)?;
        if p.c() != doc.c {
            return Err(invalid("message size does not match the states"));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SmpDoc = serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{eval_two_way, random_smp, random_two_way};

    #[test]
    fn matrix_encoding_layout() {
        let m = CMatrix::from_row_slice(1, 2, &[C64::new(1.0, 0.0), C64::new(0.0, -2.0)]);
        let doc = MatrixDoc::encode(&m);
        let bytes = STANDARD.decode(&doc.data).unwrap();
        assert_eq!(&bytes[0..8], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[8..16], &0.0f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &(-2.0f64).to_le_bytes());
        assert_eq!(doc.decode().unwrap(), m);
    }

    #[test]
    fn roundtrips_are_exact() {
        let mut rng = crate::seed::rng(81);
        let p = random_two_way(1, 1, 1, 2, &mut rng);
        let q = TwoWayEntangledProtocol::from_json(&p.to_json()).unwrap();
        assert_eq!(q.to_json(), p.to_json());
        assert_eq!(eval_two_way(&p, 1, 0).unwrap(), eval_two_way(&q, 1, 0).unwrap());

        let s = random_smp(2, 1, &mut rng);
        let t = SmpQuantumProtocol::from_json(&s.to_json()).unwrap();
        assert_eq!(t.to_json(), s.to_json());
    }

    #[test]
    fn wrong_kind_rejected() {
        let mut rng = crate::seed::rng(82);
        let s = random_smp(1, 1, &mut rng).to_json();
        assert!(TwoWayEntangledProtocol::from_json(&s).is_err());
    }
}
