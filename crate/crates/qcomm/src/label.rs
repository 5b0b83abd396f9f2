use std::fmt;

use serde::{Deserialize, Serialize};

/// Promise label of an instance: `+1`, `-1`, or outside the promise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
    #[serde(rename = "*")]
    Star,
}

impl Label {
    pub fn sign(self) -> Option<i8> {
        match self {
            Self::Plus => Some(1),
            Self::Minus => Some(-1),
            Self::Star => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus => "+1",
            Self::Minus => "-1",
            Self::Star => "*",
        })
    }
}
