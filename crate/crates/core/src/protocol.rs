//! Piecewise-constant velocity/acceleration schedules and their TOML form.
//!
//! ```toml
//! system = "sho"      # or "box"
//! x1 = 0.0            # initial potential centre
//!
//! [[segments]]
//! t_start = 0.0
//! v = 0.0
//! a = 0.0
//!
//! [[segments]]
//! t_start = 1.0
//! v = 1.0
//! a = 0.0
//! ```
//!
//! Segment `j` holds the velocity and acceleration of the potential from its
//! `t_start` until the next segment begins; the last segment runs forever.
//! Integers are accepted wherever a real is expected. Unknown keys are
//! rejected.

use std::fmt;

use serde::Serialize;
use toml::{Table, Value};

use crate::error::ProtocolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Box,
    Sho,
}

impl System {
    pub fn as_str(self) -> &'static str {
        match self {
            System::Box => "box",
            System::Sho => "sho",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuenchSegment {
    pub t_start: f64,
    pub v: f64,
    pub a: f64,
}

impl QuenchSegment {
    pub fn new(t_start: f64, v: f64, a: f64) -> Self {
        QuenchSegment { t_start, v, a }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchProtocol {
    pub system: System,
    pub x1: f64,
    pub segments: Vec<QuenchSegment>,
}

impl QuenchProtocol {
    pub fn new(system: System, x1: f64, segments: Vec<QuenchSegment>) -> Self {
        QuenchProtocol { system, x1, segments }
    }

    /// Checks finiteness, at least two segments and strictly increasing start
    /// times, reporting the first violation.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !self.x1.is_finite() {
            return Err(ProtocolError::NonFiniteField { index: 0, field: "x1" });
        }
        for (index, s) in self.segments.iter().enumerate() {
            for (field, value) in [("t_start", s.t_start), ("v", s.v), ("a", s.a)] {
                if !value.is_finite() {
                    return Err(ProtocolError::NonFiniteField { index, field });
                }
            }
            if index > 0 {
                let previous = self.segments[index - 1].t_start;
                if !(s.t_start > previous) {
                    return Err(ProtocolError::NonMonotonicTimes { index, t_start: s.t_start, previous });
                }
            }
        }
        if self.segments.len() < 2 {
            return Err(ProtocolError::TooFewSegments { count: self.segments.len() });
        }
        Ok(())
    }

    /// Potential centre at the start of every segment. Consecutive entries
    /// differ by `v Δt + a Δt²/2` of the segment in between, so the centre
    /// moves continuously through each quench.
    pub fn center_positions(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len());
        let mut x = self.x1;
        for (i, seg) in self.segments.iter().enumerate() {
            out.push(x);
            if let Some(next) = self.segments.get(i + 1) {
                let dt = next.t_start - seg.t_start;
                x += seg.v * dt + 0.5 * seg.a * dt * dt;
            }
        }
        out
    }

    /// Rejects any accelerated segment; the box only supports velocity quenches.
    pub fn require_unaccelerated(&self) -> Result<(), ProtocolError> {
        match self.segments.iter().position(|s| s.a != 0.0) {
            Some(index) => Err(ProtocolError::AcceleratedBox { index, a: self.segments[index].a }),
            None => Ok(()),
        }
    }

    pub fn require_system(&self, expected: System) -> Result<(), ProtocolError> {
        if self.system != expected {
            return Err(ProtocolError::WrongSystem { expected: expected.as_str(), found: self.system.as_str() });
        }
        Ok(())
    }

    /// Rescales a trap protocol given in units with ω ≠ 1 to ω = 1:
    /// `t → ωt`, `x → x√ω`, `v → v/√ω`, `a → a/ω^{3/2}`.
    pub fn to_oscillator_units(&self, omega: f64) -> QuenchProtocol {
        let s = omega.sqrt();
        QuenchProtocol {
            system: self.system,
            x1: self.x1 * s,
            segments: self
                .segments
                .iter()
                .map(|g| QuenchSegment::new(g.t_start * omega, g.v / s, g.a / (omega * s)))
                .collect(),
        }
    }
}

/// Free-function form of [`QuenchProtocol::validate`].
pub fn validate(p: &QuenchProtocol) -> Result<(), ProtocolError> {
    p.validate()
}

/// Free-function form of [`QuenchProtocol::center_positions`].
pub fn center_positions(p: &QuenchProtocol) -> Vec<f64> {
    p.center_positions()
}

/// Parses the TOML protocol format. Structural problems are reported; the
/// protocol invariants are left to [`QuenchProtocol::validate`].
pub fn parse_protocol(text: &str) -> Result<QuenchProtocol, ProtocolError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((1, 1));
        ProtocolError::Syntax { line, column, message: e.message().to_string() }
    })?;

    for key in table.keys() {
        if !matches!(key.as_str(), "system" | "x1" | "segments") {
            return Err(schema(key, "unknown key"));
        }
    }

    let system = match table.get("system") {
        Some(Value::String(s)) if s == "box" => System::Box,
        Some(Value::String(s)) if s == "sho" => System::Sho,
        Some(_) => return Err(schema("system", "expected \"box\" or \"sho\"")),
        None => return Err(schema("system", "missing")),
    };
    let x1 = match table.get("x1") {
        Some(v) => real(v).ok_or_else(|| schema("x1", "expected a number"))?,
        None => return Err(schema("x1", "missing")),
    };
    let raw_segments = match table.get("segments") {
        Some(Value::Array(items)) => items,
        Some(_) => return Err(schema("segments", "expected an array of tables")),
        None => return Err(schema("segments", "missing")),
    };

    let mut segments = Vec::with_capacity(raw_segments.len());
    for (i, item) in raw_segments.iter().enumerate() {
        let Value::Table(seg) = item else {
            return Err(schema(&format!("segments[{i}]"), "expected a table"));
        };
        for key in seg.keys() {
            if !matches!(key.as_str(), "t_start" | "v" | "a") {
                return Err(schema(key, &format!("unknown key in segments[{i}]")));
            }
        }
        let field = |name: &str| -> Result<f64, ProtocolError> {
            let v = seg.get(name).ok_or_else(|| schema(&format!("segments[{i}].{name}"), "missing"))?;
            real(v).ok_or_else(|| schema(&format!("segments[{i}].{name}"), "expected a number"))
        };
        segments.push(QuenchSegment::new(field("t_start")?, field("v")?, field("a")?));
    }
    Ok(QuenchProtocol { system, x1, segments })
}

/// Writes the TOML protocol format; [`parse_protocol`] reads it back exactly.
pub fn serialize_protocol(p: &QuenchProtocol) -> String {
    toml::to_string(p).expect("protocol fields are always representable in TOML")
}

fn real(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn schema(key: &str, message: &str) -> ProtocolError {
    ProtocolError::Schema { key: key.to_string(), message: message.to_string() }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}
