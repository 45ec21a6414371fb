//! `0`/`1` string encoding of bitstrings.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid bit character {0:?} at position {1}")]
pub struct BitParseError(pub char, pub usize);

pub fn to_string(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse(s: &str) -> Result<Vec<bool>, BitParseError> {
    s.chars()
        .enumerate()
        .map(|(i, c)| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(BitParseError(other, i)),
        })
        .collect()
}

/// `#[serde(with = ...)]` adapter.
pub mod serde_bits {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let x = vec![true, false, false, true];
        assert_eq!(to_string(&x), "1001");
        assert_eq!(parse("1001").unwrap(), x);
        assert_eq!(parse("").unwrap(), Vec::<bool>::new());
        assert_eq!(parse("10x"), Err(BitParseError('x', 2)));
    }
}
