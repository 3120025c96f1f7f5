//! Serialization helpers. Every real goes out with 17 significant digits so
//! outputs round-trip exactly and are byte-stable across runs.

use std::fmt::Write as _;

use qwalk::dynamics::OUTPUT_CLAMP;
use qwalk::format::sig17;
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        RawValue::from_string(sig17(self.0))
            .map_err(S::Error::custom)?
            .serialize(s)
    }
}

pub fn real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Real(*x).serialize(s)
}

pub fn real_list<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|&v| Real(v)))
}

pub fn reals(x: &[f64]) -> Vec<Real> {
    x.iter().map(|&v| Real(v)).collect()
}

/// A probability for output: roundoff negatives become zero.
pub fn prob(x: f64) -> f64 {
    if (-OUTPUT_CLAMP..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

/// Comma-separated CSV builder with a mandatory header.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            match c {
                Cell::Int(v) => write!(self.buf, "{v}").unwrap(),
                Cell::Real(v) => self.buf.push_str(&sig17(*v)),
            }
        }
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

pub enum Cell {
    Int(usize),
    Real(f64),
}

/// `{"meta": ..., "data": ...}` followed by a newline.
pub fn json_document<M: Serialize, D: Serialize>(meta: &M, data: &D) -> serde_json::Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Document<'a, M, D> {
        meta: &'a M,
        data: &'a D,
    }
    let mut out = serde_json::to_vec(&Document { meta, data })?;
    out.push(b'\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_seventeen_digits() {
        let json = serde_json::to_string(&vec![Real(0.1), Real(-2.0), Real(f64::NAN)]).unwrap();
        assert_eq!(json, "[1.0000000000000001e-1,-2.0000000000000000e0,null]");
        let back: Vec<Option<f64>> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![Some(0.1), Some(-2.0), None]);
    }

    #[test]
    fn csv_rows() {
        let mut csv = Csv::new(&["N", "x"]);
        csv.row(&[Cell::Int(3), Cell::Real(0.5)]);
        assert_eq!(
            String::from_utf8(csv.into_bytes()).unwrap(),
            "N,x\n3,5.0000000000000000e-1\n"
        );
    }

    #[test]
    fn clamps_roundoff_only() {
        assert_eq!(prob(-1e-13), 0.0);
        assert_eq!(prob(-1e-9), -1e-9);
        assert_eq!(prob(0.25), 0.25);
    }
}
