//! JSON file formats.
//!
//! Matrix: `{"d": N, "rows": [[[re, im], ...], ...]}`.
//! State:  `{"d": N, "amps": [[re, im], ...]}`.
//!
//! Numbers are written in scientific notation with 17 significant digits, so
//! a write/read cycle reproduces every `f64` exactly.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// An `f64` that serializes with 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

/// `[re, im]` pair on the wire.
pub type WireComplex = [Real; 2];

pub fn wire(z: C64) -> WireComplex {
    [Real(z.re), Real(z.im)]
}

pub fn wire_vec(v: &[C64]) -> Vec<WireComplex> {
    v.iter().copied().map(wire).collect()
}

pub fn wire_matrix(m: &ComplexMatrix) -> Vec<Vec<WireComplex>> {
    (0..m.rows()).map(|i| wire_vec(m.row(i))).collect()
}

#[derive(Serialize)]
struct MatrixOut {
    d: usize,
    rows: Vec<Vec<WireComplex>>,
}

#[derive(Deserialize)]
struct MatrixIn {
    d: usize,
    rows: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
pub struct StateOut {
    pub d: usize,
    pub amps: Vec<WireComplex>,
}

impl StateOut {
    pub fn new(amps: &[C64]) -> Self {
        Self { d: amps.len(), amps: wire_vec(amps) }
    }
}

#[derive(Deserialize)]
struct StateIn {
    d: usize,
    amps: Vec<[f64; 2]>,
}

pub fn matrix_json(m: &ComplexMatrix) -> String {
    let out = MatrixOut { d: m.rows(), rows: wire_matrix(m) };
    serde_json::to_string_pretty(&out).expect("matrix serialization cannot fail") + "\n"
}

pub fn state_json(amps: &[C64]) -> String {
    serde_json::to_string_pretty(&StateOut::new(amps)).expect("state serialization cannot fail") + "\n"
}

/// Parses the matrix schema. Structural problems (ragged rows, bad JSON) are
/// `Parse` errors; a row count that disagrees with `d` is `DimensionMismatch`.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let parsed: MatrixIn = serde_json::from_str(text)?;
    let rows: Vec<Vec<C64>> =
        parsed.rows.into_iter().map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect()).collect();
    if let Some(bad) = rows.iter().position(|r| r.len() != rows[0].len()) {
        return Err(Error::Parse(format!("row {bad} has {} entries, row 0 has {}", rows[bad].len(), rows[0].len())));
    }
    if rows.len() != parsed.d {
        return Err(Error::DimensionMismatch { expected: parsed.d, found: rows.len() });
    }
    if let Some(r) = rows.first() {
        if r.len() != parsed.d {
            return Err(Error::DimensionMismatch { expected: parsed.d, found: r.len() });
        }
    }
    ComplexMatrix::from_rows(rows).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_state(text: &str) -> Result<Vec<C64>> {
    let parsed: StateIn = serde_json::from_str(text)?;
    if parsed.amps.len() != parsed.d {
        return Err(Error::DimensionMismatch { expected: parsed.d, found: parsed.amps.len() });
    }
    Ok(parsed.amps.into_iter().map(|[re, im]| C64::new(re, im)).collect())
}
