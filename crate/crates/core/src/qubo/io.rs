//! Line-oriented text format, 0-based.
//!
//! ```text
//! 3            # variable count
//! 0 0 -2       # QUBO term: i j c with i <= j
//! 0 1 2
//! offset 1.5
//! ```
//!
//! PUBO files use `k i1 ... ik c` per term instead. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use super::{PuboInstance, QuboError, QuboInstance};

#[derive(Debug, Error)]
pub enum QuboFormatError {
    #[error("missing variable count")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] QuboError),
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn field<T: FromStr>(line: usize, token: &str) -> Result<T, QuboFormatError> {
    token.parse().map_err(|_| QuboFormatError::Malformed {
        line,
        message: format!("cannot parse {token:?}"),
    })
}

/// Variable count, offset and `(line, tokens)` per term.
type Sections<'a> = (usize, f64, Vec<(usize, Vec<&'a str>)>);

/// Splits off the header and `offset` lines, returning remaining term lines.
fn split_sections(text: &str) -> Result<Sections<'_>, QuboFormatError> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or(QuboFormatError::MissingHeader)?;
    let n = field::<usize>(line, header)?;
    let mut offset = 0.0;
    let mut body = Vec::new();
    for (line, l) in lines {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens[0] == "offset" {
            if tokens.len() != 2 {
                return Err(QuboFormatError::Malformed {
                    line,
                    message: "expected `offset c`".into(),
                });
            }
            offset += field::<f64>(line, tokens[1])?;
        } else {
            body.push((line, tokens));
        }
    }
    Ok((n, offset, body))
}

impl QuboInstance {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n());
        for ((i, j), c) in self.terms() {
            let _ = writeln!(out, "{i} {j} {c}");
        }
        if self.offset() != 0.0 {
            let _ = writeln!(out, "offset {}", self.offset());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, QuboFormatError> {
        let (n, offset, body) = split_sections(text)?;
        let mut terms = Vec::with_capacity(body.len());
        for (line, tokens) in body {
            if tokens.len() != 3 {
                return Err(QuboFormatError::Malformed {
                    line,
                    message: "expected `i j c`".into(),
                });
            }
            terms.push((
                field(line, tokens[0])?,
                field(line, tokens[1])?,
                field(line, tokens[2])?,
            ));
        }
        Ok(Self::from_terms(n, terms, offset)?)
    }
}

impl PuboInstance {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n());
        for (t, c) in self.terms() {
            let _ = write!(out, "{}", t.len());
            for i in t {
                let _ = write!(out, " {i}");
            }
            let _ = writeln!(out, " {c}");
        }
        if self.offset() != 0.0 {
            let _ = writeln!(out, "offset {}", self.offset());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, QuboFormatError> {
        let (n, offset, body) = split_sections(text)?;
        let mut terms = Vec::with_capacity(body.len());
        for (line, tokens) in body {
            let k: usize = field(line, tokens[0])?;
            if tokens.len() != k + 2 {
                return Err(QuboFormatError::Malformed {
                    line,
                    message: format!("expected {k} indices and a coefficient"),
                });
            }
            let idx = tokens[1..=k]
                .iter()
                .map(|t| field::<usize>(line, t))
                .collect::<Result<Vec<_>, _>>()?;
            terms.push((idx, field(line, tokens[k + 1])?));
        }
        Ok(Self::from_terms(n, terms, offset)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_layout() {
        let q = QuboInstance::from_text("3 # vars\n0 0 -2\n\n0 1 2\noffset 1.5\n").unwrap();
        assert_eq!(q.n(), 3);
        assert_eq!(q.terms(), vec![((0, 0), -2.0), ((0, 1), 2.0)]);
        assert_eq!(q.offset(), 1.5);
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(QuboInstance::from_text(""), Err(QuboFormatError::MissingHeader)));
        assert!(matches!(
            QuboInstance::from_text("2\n0 1\n"),
            Err(QuboFormatError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            QuboInstance::from_text("2\n0 5 1\n"),
            Err(QuboFormatError::Invalid(QuboError::IndexOutOfRange { .. }))
        ));
        assert!(matches!(
            PuboInstance::from_text("3\n3 0 1 1.0\n"),
            Err(QuboFormatError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn pubo_text() {
        let p = PuboInstance::from_text("4\n3 0 1 2 2.5\n1 3 -1\noffset -0.5\n").unwrap();
        assert_eq!(p.terms(), &[(vec![0, 1, 2], 2.5), (vec![3], -1.0)]);
        assert_eq!(PuboInstance::from_text(&p.to_text()).unwrap(), p);
    }

    proptest! {
        #[test]
        fn qubo_text_round_trip(
            terms in proptest::collection::vec((0usize..12, 0usize..12, -1e3f64..1e3), 0..40),
            offset in -10.0f64..10.0,
        ) {
            let q = QuboInstance::from_terms(12, terms, offset).unwrap();
            prop_assert_eq!(QuboInstance::from_text(&q.to_text()).unwrap(), q);
        }
    }
}
