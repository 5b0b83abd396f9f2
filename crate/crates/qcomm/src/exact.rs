//! Exact rationals in JSON: `{"num": "...", "den": "..."}` with decimal strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioDoc {
    pub num: String,
    pub den: String,
}

impl RatioDoc {
    pub fn encode(r: &BigRational) -> Self {
        Self {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }

    pub fn decode(&self) -> Result<BigRational> {
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|e| Error::Serialization(format!("bad integer {s:?}: {e}")))
        };
        let den = parse(&self.den)?;
        if den == BigInt::from(0) {
            return Err(Error::Serialization("zero denominator".into()));
        }
        Ok(BigRational::new(parse(&self.num)?, den))
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `#[serde(with = "crate::exact::ratio")]`
pub mod ratio {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        RatioDoc::encode(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        RatioDoc::deserialize(d)?
            .decode()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let r = BigRational::new(BigInt::from(-6), BigInt::from(16));
        let doc = RatioDoc::encode(&r);
        assert_eq!(doc, RatioDoc { num: "-3".into(), den: "8".into() });
        assert_eq!(doc.decode().unwrap(), r);
        assert!(RatioDoc { num: "1".into(), den: "0".into() }.decode().is_err());
    }
}
