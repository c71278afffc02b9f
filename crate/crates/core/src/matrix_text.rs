//! Plain-text dump format for named matrices and scalars.
//!
//! ```text
//! # comment
//! matrix A 2 2
//! 1e0 2e0
//! 3e0 4e0
//! scalar ts 1e0
//! ```
//!
//! Values are written with `{:e}`, which round-trips `f64` exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Clone, Debug, PartialEq)]
pub enum Entry {
    Matrix(Mat),
    Scalar(f64),
}

/// Ordered list of named entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MatrixDoc {
    pub entries: Vec<(String, Entry)>,
}

impl MatrixDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_matrix(&mut self, name: &str, m: &Mat) {
        self.entries.push((name.to_string(), Entry::Matrix(m.clone())));
    }

    pub fn push_scalar(&mut self, name: &str, v: f64) {
        self.entries.push((name.to_string(), Entry::Scalar(v)));
    }

    pub fn matrix(&self, name: &str) -> Result<&Mat> {
        match self.get(name) {
            Some(Entry::Matrix(m)) => Ok(m),
            _ => Err(Error::Parse { line: 0, msg: format!("missing matrix {name}") }),
        }
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        match self.get(name) {
            Some(Entry::Scalar(v)) => Ok(*v),
            _ => Err(Error::Parse { line: 0, msg: format!("missing scalar {name}") }),
        }
    }

    fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (name, e) in &self.entries {
            match e {
                Entry::Scalar(v) => {
                    let _ = writeln!(s, "scalar {name} {v:e}");
                }
                Entry::Matrix(m) => {
                    let _ = writeln!(s, "matrix {name} {} {}", m.nrows(), m.ncols());
                    for r in 0..m.nrows() {
                        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:e}", m[(r, c)])).collect();
                        let _ = writeln!(s, "{}", row.join(" "));
                    }
                }
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = MatrixDoc::new();
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let num = |line: usize, tok: &str| -> Result<f64> {
            tok.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad number {tok:?}") })
        };
        let dim = |line: usize, tok: Option<&str>| -> Result<usize> {
            tok.and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse { line, msg: "bad dimension".into() })
        };
        while let Some((line, l)) = lines.next() {
            let mut toks = l.split_whitespace();
            let kind = toks.next().unwrap_or_default();
            let name = toks
                .next()
                .ok_or_else(|| Error::Parse { line, msg: "missing name".into() })?
                .to_string();
            match kind {
                "scalar" => {
                    let v = num(line, toks.next().unwrap_or_default())?;
                    doc.entries.push((name, Entry::Scalar(v)));
                }
                "matrix" => {
                    let r = dim(line, toks.next())?;
                    let c = dim(line, toks.next())?;
                    let mut data = Vec::with_capacity(r * c);
                    for _ in 0..r {
                        let (rl, row) = lines.next().ok_or_else(|| Error::Parse {
                            line,
                            msg: format!("matrix {name}: expected {r} rows"),
                        })?;
                        let vals = row.split_whitespace().map(|t| num(rl, t)).collect::<Result<Vec<_>>>()?;
                        if vals.len() != c {
                            return Err(Error::Parse {
                                line: rl,
                                msg: format!("matrix {name}: expected {c} columns, got {}", vals.len()),
                            });
                        }
                        data.extend(vals);
                    }
                    doc.entries.push((name, Entry::Matrix(Mat::from_row_slice(r, c, &data))));
                }
                other => {
                    return Err(Error::Parse { line, msg: format!("unknown entry kind {other:?}") });
                }
            }
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut doc = MatrixDoc::new();
        let m = Mat::from_row_slice(2, 3, &[0.1, -1.0 / 3.0, 1e-300, 5e300, 0.0, std::f64::consts::PI]);
        doc.push_matrix("A", &m);
        doc.push_scalar("ts", 0.7);
        let back = MatrixDoc::parse(&doc.to_text()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn reports_line_of_bad_value() {
        let err = MatrixDoc::parse("matrix A 1 2\n1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn short_row_rejected() {
        assert!(MatrixDoc::parse("# c\nmatrix A 1 2\n1\n").is_err());
    }
}
