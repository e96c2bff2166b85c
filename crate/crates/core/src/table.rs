//! Column tables produced by scans, written as CSV or JSON.
//!
//! CSV output has one header row, LF line endings and shortest round-trip
//! decimal numbers; complex columns are split into `<name>_re` and
//! `<name>_im`. CSV carries no metadata. JSON output is
//! `{"metadata": {...}, "columns": [{"name": ..., "values": [...]}, ...]}`
//! with the same flattened columns.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::error::EmitError;

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Real(v) => v.len(),
            ColumnData::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub n_states: Option<usize>,
    /// Largest tail mass seen over the rows.
    pub tail_mass: Option<f64>,
    pub tool_version: String,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        Metadata {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            n_states: None,
            tail_mass: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub metadata: Metadata,
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl ScanResult {
    pub fn new(command: &str) -> Self {
        ScanResult { metadata: Metadata::new(command), columns: Vec::new() }
    }

    pub fn push_real(&mut self, name: &str, values: Vec<f64>) -> &mut Self {
        self.columns.push(Column { name: name.to_string(), data: ColumnData::Real(values) });
        self
    }

    pub fn push_complex(&mut self, name: &str, values: Vec<Complex64>) -> &mut Self {
        self.columns.push(Column { name: name.to_string(), data: ColumnData::Complex(values) });
        self
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Values of a real column.
    pub fn real(&self, name: &str) -> Option<&[f64]> {
        match &self.column(name)?.data {
            ColumnData::Real(v) => Some(v),
            ColumnData::Complex(_) => None,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.data.len())
    }

    /// Errors when the columns differ in length.
    pub fn check_shape(&self) -> Result<(), EmitError> {
        let expected = self.n_rows();
        for c in &self.columns {
            if c.data.len() != expected {
                return Err(EmitError::RaggedColumns { name: c.name.clone(), len: c.data.len(), expected });
            }
        }
        Ok(())
    }

    /// Real-valued view with complex columns split into `_re`/`_im` parts.
    pub fn flattened(&self) -> Vec<(String, Vec<f64>)> {
        let mut out = Vec::with_capacity(self.columns.len());
        for c in &self.columns {
            match &c.data {
                ColumnData::Real(v) => out.push((c.name.clone(), v.clone())),
                ColumnData::Complex(v) => {
                    out.push((format!("{}_re", c.name), v.iter().map(|z| z.re).collect()));
                    out.push((format!("{}_im", c.name), v.iter().map(|z| z.im).collect()));
                }
            }
        }
        out
    }

    pub fn emit<W: Write>(&self, format: Format, out: W) -> Result<(), EmitError> {
        match format {
            Format::Csv => self.emit_csv(out),
            Format::Json => self.emit_json(out),
        }
    }

    fn emit_csv<W: Write>(&self, out: W) -> Result<(), EmitError> {
        self.check_shape()?;
        let flat = self.flattened();
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(flat.iter().map(|(name, _)| name.as_str()))?;
        let mut buf = ryu::Buffer::new();
        let mut row = Vec::with_capacity(flat.len());
        for i in 0..self.n_rows() {
            row.clear();
            for (_, values) in &flat {
                row.push(format_f64(&mut buf, values[i]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn emit_json<W: Write>(&self, mut out: W) -> Result<(), EmitError> {
        self.check_shape()?;
        #[derive(Serialize)]
        struct JsonColumn<'a> {
            name: &'a str,
            values: &'a [f64],
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            metadata: &'a Metadata,
            columns: Vec<JsonColumn<'a>>,
        }
        let flat = self.flattened();
        let doc = Doc {
            metadata: &self.metadata,
            columns: flat.iter().map(|(name, values)| JsonColumn { name, values }).collect(),
        };
        serde_json::to_writer_pretty(&mut out, &doc)?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

fn format_f64(buf: &mut ryu::Buffer, x: f64) -> String {
    if x.is_finite() {
        buf.format_finite(x).to_string()
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Writes `result` to `out` in the requested format.
pub fn emit<W: Write>(result: &ScanResult, format: Format, out: W) -> Result<(), EmitError> {
    result.emit(format, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> ScanResult {
        let mut s = ScanResult::new("test");
        s.metadata.param("delta", 2.5).param("label", "x");
        s.metadata.n_states = Some(40);
        s.metadata.tail_mass = Some(1.25e-9);
        s.push_real("t", vec![0.0, 0.1, 1e-300]);
        s.push_complex("c", vec![Complex64::new(1.0, -0.5), Complex64::new(0.1, 0.2), Complex64::new(-3.0, 1e20)]);
        s
    }

    #[test]
    fn empty_grid_is_header_only() {
        let mut s = ScanResult::new("empty");
        s.push_real("t", vec![]).push_complex("c", vec![]);
        let mut out = Vec::new();
        s.emit(Format::Csv, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "t,c_re,c_im\n");
    }

    #[test]
    fn csv_layout() {
        let mut out = Vec::new();
        sample().emit(Format::Csv, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,c_re,c_im");
        assert_eq!(lines[1], "0.0,1.0,-0.5");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn json_carries_metadata() {
        let mut out = Vec::new();
        sample().emit(Format::Json, &mut out).unwrap();
        let v: Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["metadata"]["n_states"], 40);
        assert_eq!(v["metadata"]["tail_mass"], 1.25e-9);
        assert_eq!(v["metadata"]["parameters"]["delta"], 2.5);
        assert_eq!(v["columns"][1]["name"], "c_re");
        assert_eq!(v["columns"][2]["values"][2], 1e20);
    }

    #[test]
    fn ragged_columns_rejected() {
        let mut s = ScanResult::new("bad");
        s.push_real("a", vec![1.0]).push_real("b", vec![]);
        assert!(matches!(s.emit(Format::Csv, Vec::new()), Err(EmitError::RaggedColumns { .. })));
    }

    proptest! {
        #[test]
        fn csv_roundtrip_is_exact(values in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..40)) {
            let mut s = ScanResult::new("rt");
            s.push_real("x", values.clone());
            let mut out = Vec::new();
            s.emit(Format::Csv, &mut out).unwrap();
            let mut rdr = csv::Reader::from_reader(out.as_slice());
            let back: Vec<f64> = rdr.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
            prop_assert_eq!(back.len(), values.len());
            for (a, b) in back.iter().zip(&values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
