//! Sudden-quench dynamics of a particle in a moving infinite square well or a
//! moving, accelerating harmonic trap.
//!
//! Units are ħ = m = 1 throughout. The well has width L = 1 and the trap has
//! ω = 1; [`sho::ShoKinematics::from_quench`] and
//! [`protocol::QuenchProtocol::to_oscillator_units`] convert other trap
//! frequencies.

// `!(x <= y)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
mod error;
pub mod protocol;
pub mod sho;
pub mod specfun;
pub mod square_well;
pub mod table;

pub use num_complex::Complex64;

pub use error::{ClassicalError, ConvergenceWarning, EmitError, Error, ProtocolError, QuenchError, SpecfunError};
pub use protocol::{QuenchProtocol, QuenchSegment, System};
pub use specfun::QuadratureRule;
pub use table::{Column, Format, Metadata, ScanResult};

/// Complex coefficient vector over a truncated basis.
pub type CoeffVector = ndarray::Array1<Complex64>;
/// Truncated quench matrix; entry `[k, l]` maps old level `l` to new level `k`.
pub type QuenchMatrix = ndarray::Array2<Complex64>;

/// Tail mass `1 - Σ|c|²` of a truncated coefficient vector.
pub fn tail_mass(coeffs: &CoeffVector) -> f64 {
    1.0 - coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// Basis size and leakage policy for chained computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub n_states: usize,
    /// Largest tolerated tail mass.
    pub max_tail: f64,
    /// Report leaky results instead of failing.
    pub allow_leaky: bool,
}

impl Truncation {
    pub const DEFAULT_MAX_TAIL: f64 = 1e-3;

    pub fn new(n_states: usize) -> Self {
        Truncation { n_states, max_tail: Self::DEFAULT_MAX_TAIL, allow_leaky: false }
    }

    pub fn allow_leaky(mut self, allow: bool) -> Self {
        self.allow_leaky = allow;
        self
    }

    pub fn with_max_tail(mut self, max_tail: f64) -> Self {
        self.max_tail = max_tail;
        self
    }

    /// Returns the tail mass of `coeffs`, or an error when it is too large.
    pub fn check(&self, coeffs: &CoeffVector) -> Result<f64, QuenchError> {
        let tail = tail_mass(coeffs);
        if !self.allow_leaky && !(tail <= self.max_tail) {
            return Err(QuenchError::LeakyTruncation { tail, threshold: self.max_tail });
        }
        Ok(tail)
    }
}
