//! Harmonic trap (ω = 1) whose centre is suddenly set moving with velocity `v`
//! and acceleration `a`.
//!
//! The moving basis anchored at centre `X`, time `T`, velocity `v` and
//! acceleration `a` is
//!
//! ```text
//! ψ_n(x, t) = φ_n(ξ + a) exp(i[(v + a s) ξ + g_n(s)]),
//! s = t - T,  ξ = x - X - v s - a s²/2,
//! g_n(s) = a² s³/6 + a v s²/2 + v² s/2 - ε_n s,  ε_n = n + 1/2 - a²/2,
//! ```
//!
//! where `φ_n` are the static oscillator eigenfunctions. A sudden change
//! `(v₁, a₁) → (v₂, a₂)` at the anchor time is the matrix
//! `Q_kl = ∫ φ_k(ξ + a₂) φ_l(ξ + a₁) e^{-iκξ} dξ` with `κ = v₂ - v₁`,
//! `λ = a₂ - a₁`, `ρ = a₂ + a₁`.

mod amplitude;
mod state;

pub use amplitude::{
    gamma_dodonov, gamma_quench, ludwig_probability, one_change_coeffs, sho_q_closed, sho_q_matrix, sho_q_quadrature,
    sho_q_quadrature_matrix, sho_q_quadrature_with_order, sho_q_series, sho_q_series_shifted, sho_q_via_series,
};
pub use state::{
    apply_quench, comoving_rebase, evolve_sho_protocol, evolve_sho_protocol_from, rebase, sho_expectations,
    two_change_chain, ShoCoeffState, ShoFrame, ShoMoments,
};

/// Dimensionless quench parameters: `κ = Δv`, `λ = Δa`, `ρ = a₁ + a₂` and
/// the duration `τ` of the segment that follows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShoKinematics {
    pub kappa: f64,
    pub lambda: f64,
    pub rho: f64,
    pub tau: f64,
}

impl ShoKinematics {
    pub fn new(kappa: f64, lambda: f64, rho: f64, tau: f64) -> Self {
        ShoKinematics { kappa, lambda, rho, tau }
    }

    pub fn identity() -> Self {
        ShoKinematics::new(0.0, 0.0, 0.0, 0.0)
    }

    /// Parameters of the change `(v₁, a₁) → (v₂, a₂)` in a trap of angular
    /// frequency `omega` (with ħ = m = 1): `κ = Δv/√ω`, `λ = Δa/ω^{3/2}`,
    /// `ρ = (a₁ + a₂)/ω^{3/2}`. `τ` is left at zero.
    pub fn from_quench(v1: f64, v2: f64, a1: f64, a2: f64, omega: f64) -> Self {
        let s = omega.sqrt();
        let s3 = omega * s;
        ShoKinematics::new((v2 - v1) / s, (a2 - a1) / s3, (a1 + a2) / s3, 0.0)
    }

    /// Switching on `(v, a)` from rest, held for `tau`.
    pub fn switch_on(v: f64, a: f64, tau: f64) -> Self {
        ShoKinematics::new(v, a, a, tau)
    }

    pub fn with_tau(self, tau: f64) -> Self {
        ShoKinematics { tau, ..self }
    }

    /// `κ² + λ²`
    pub fn eta2(&self) -> f64 {
        self.kappa * self.kappa + self.lambda * self.lambda
    }

    pub fn is_finite(&self) -> bool {
        self.kappa.is_finite() && self.lambda.is_finite() && self.rho.is_finite() && self.tau.is_finite()
    }
}
