use num_complex::Complex64;

use super::amplitude::sho_q_matrix;
use super::ShoKinematics;
use crate::error::QuenchError;
use crate::protocol::{QuenchProtocol, System};
use crate::{tail_mass, CoeffVector, Truncation};

/// Anchor of a moving oscillator basis: centre `x` at time `t`, velocity `v`,
/// acceleration `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShoFrame {
    pub x: f64,
    pub t: f64,
    pub v: f64,
    pub a: f64,
}

impl ShoFrame {
    pub fn new(x: f64, t: f64, v: f64, a: f64) -> Self {
        ShoFrame { x, t, v, a }
    }

    pub fn at_rest(x: f64, t: f64) -> Self {
        ShoFrame::new(x, t, 0.0, 0.0)
    }

    /// Centre position `s` after the anchor time.
    pub fn center_after(&self, s: f64) -> f64 {
        self.x + self.v * s + 0.5 * self.a * s * s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShoCoeffState {
    pub coeffs: CoeffVector,
    pub frame: ShoFrame,
}

impl ShoCoeffState {
    /// Level `n` of the basis anchored at `frame`.
    pub fn eigenstate(n_states: usize, n: usize, frame: ShoFrame) -> Self {
        assert!(n < n_states, "level {n} outside a basis of {n_states} states");
        let mut coeffs = CoeffVector::zeros(n_states);
        coeffs[n] = Complex64::new(1.0, 0.0);
        ShoCoeffState { coeffs, frame }
    }

    pub fn tail_mass(&self) -> f64 {
        tail_mass(&self.coeffs)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Phase `g_n(s)` accumulated by level `n` of a comoving basis.
fn comoving_phase(n: usize, s: f64, v: f64, a: f64) -> f64 {
    let eps = n as f64 + 0.5 - 0.5 * a * a;
    a * a * s * s * s / 6.0 + 0.5 * a * v * s * s + 0.5 * v * v * s - eps * s
}

/// Re-anchors the comoving basis at `to_t`. Level `n` only picks up the phase
/// `g_n(Δ)`; the new frame has centre `x(to_t)` and velocity `v + aΔ`.
pub fn comoving_rebase(state: &ShoCoeffState, to_t: f64) -> ShoCoeffState {
    let f = state.frame;
    let s = to_t - f.t;
    assert!(s >= 0.0, "cannot rebase backwards in time");
    if s == 0.0 {
        return state.clone();
    }
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c * Complex64::from_polar(1.0, comoving_phase(n, s, f.v, f.a)))
        .collect();
    ShoCoeffState { coeffs, frame: ShoFrame::new(f.center_after(s), to_t, f.v + f.a * s, f.a) }
}

/// Re-expresses the state at `to_t` in the basis anchored at
/// `(x(to_t), to_t, v, a)`, keeping the old velocity label:
///
/// ```text
/// c̄_k = e^{iΦ} Σ_l e^{-i(l+1/2)Δ} Q_kl(κ = -aΔ, λ = 0, ρ = 0) c_l,
/// Φ = avΔ²/2 + a²Δ³/6 - a²Δ/2 + v²Δ/2.
/// ```
///
/// The result describes the state at the instant `to_t` only; follow it with
/// [`apply_quench`] at the same time. For `a = 0` it reduces to per-level
/// phases. [`comoving_rebase`] is the population-preserving alternative.
pub fn rebase(state: &ShoCoeffState, to_t: f64, truncation: &Truncation) -> Result<ShoCoeffState, QuenchError> {
    let f = state.frame;
    let d = to_t - f.t;
    if !(d >= 0.0) {
        return Err(QuenchError::InvalidArgument(format!("rebase target {to_t} precedes the frame time {}", f.t)));
    }
    if d == 0.0 {
        return Ok(state.clone());
    }
    let n = state.coeffs.len();
    let phi = 0.5 * f.a * f.v * d * d + f.a * f.a * d * d * d / 6.0 - 0.5 * f.a * f.a * d + 0.5 * f.v * f.v * d;
    let evolved: CoeffVector =
        state.coeffs.iter().enumerate().map(|(l, c)| c * Complex64::from_polar(1.0, -(l as f64 + 0.5) * d)).collect();
    let mixed =
        if f.a == 0.0 { evolved } else { sho_q_matrix(n, &ShoKinematics::new(-f.a * d, 0.0, 0.0, 0.0)).dot(&evolved) };
    let coeffs = mixed * Complex64::from_polar(1.0, phi);
    truncation.check(&coeffs)?;
    Ok(ShoCoeffState { coeffs, frame: ShoFrame::new(f.center_after(d), to_t, f.v, f.a) })
}

/// Sudden change of the trap motion to `(new_v, new_a)` at `at_t`. A state
/// anchored earlier is first carried forward with [`comoving_rebase`].
pub fn apply_quench(
    state: &ShoCoeffState,
    new_v: f64,
    new_a: f64,
    at_t: f64,
    truncation: &Truncation,
) -> Result<ShoCoeffState, QuenchError> {
    if !(at_t >= state.frame.t) {
        return Err(QuenchError::InvalidArgument(format!(
            "quench time {at_t} precedes the frame time {}",
            state.frame.t
        )));
    }
    let here = comoving_rebase(state, at_t);
    let f = here.frame;
    let kin = ShoKinematics::from_quench(f.v, new_v, f.a, new_a, 1.0);
    let coeffs = if kin.kappa == 0.0 && kin.lambda == 0.0 {
        here.coeffs
    } else {
        sho_q_matrix(here.coeffs.len(), &kin).dot(&here.coeffs)
    };
    truncation.check(&coeffs)?;
    Ok(ShoCoeffState { coeffs, frame: ShoFrame::new(f.x, at_t, new_v, new_a) })
}

/// Ground state of the resting trap, switched to `(v₂, a₂) = (κ, λ)` for
/// `τ = kin.tau` and stopped. The steps and every intermediate phase are kept
/// in the closed chain form
///
/// ```text
/// c_j = Σ_{k,l} Q_jk(v₂→0, a₂→0) Q_kl(κ = -a₂τ) e^{iθ_l} Q_l0(0→v₂, 0→a₂),
/// θ_l = a₂²τ³/6 - a₂²τ/2 + a₂v₂τ²/2 - (l + 1/2)τ + v₂²τ/2.
/// ```
///
/// `kin.rho` is not used; it equals `λ` for a start from rest.
pub fn two_change_chain(kin: &ShoKinematics, truncation: &Truncation) -> Result<CoeffVector, QuenchError> {
    let (v, a, tau) = (kin.kappa, kin.lambda, kin.tau);
    if !(tau >= 0.0) {
        return Err(QuenchError::InvalidArgument(format!("duration must be non-negative, got {tau}")));
    }
    let n = truncation.n_states;
    if v == 0.0 && a == 0.0 {
        let mut e0 = CoeffVector::zeros(n);
        e0[0] = Complex64::new(1.0, 0.0);
        return Ok(e0);
    }
    let on = sho_q_matrix(n, &ShoKinematics::switch_on(v, a, 0.0));
    let mut c: CoeffVector = on.column(0).to_owned();
    let common = a * a * tau.powi(3) / 6.0 - 0.5 * a * a * tau + 0.5 * a * v * tau * tau + 0.5 * v * v * tau;
    for (l, z) in c.iter_mut().enumerate() {
        *z *= Complex64::from_polar(1.0, common - (l as f64 + 0.5) * tau);
    }
    if a != 0.0 {
        c = sho_q_matrix(n, &ShoKinematics::new(-a * tau, 0.0, 0.0, 0.0)).dot(&c);
    }
    let off = sho_q_matrix(n, &ShoKinematics::from_quench(v, 0.0, a, 0.0, 1.0));
    let c = off.dot(&c);
    truncation.check(&c)?;
    Ok(c)
}

/// Runs a trap protocol (in units with ω = 1), starting in the ground state of
/// the first segment's comoving basis. Returns the state right after the last
/// change.
pub fn evolve_sho_protocol(p: &QuenchProtocol, truncation: &Truncation) -> Result<ShoCoeffState, QuenchError> {
    evolve_sho_protocol_from(p, 0, truncation)
}

/// [`evolve_sho_protocol`] starting in level `n0` instead of the ground state.
pub fn evolve_sho_protocol_from(
    p: &QuenchProtocol,
    n0: usize,
    truncation: &Truncation,
) -> Result<ShoCoeffState, QuenchError> {
    p.validate()?;
    p.require_system(System::Sho)?;
    if n0 >= truncation.n_states {
        return Err(QuenchError::InvalidArgument(format!(
            "initial level {n0} needs more than {} states",
            truncation.n_states
        )));
    }
    let first = p.segments[0];
    let frame = ShoFrame::new(p.x1, first.t_start, first.v, first.a);
    let mut state = ShoCoeffState::eigenstate(truncation.n_states, n0, frame);
    for seg in &p.segments[1..] {
        state = apply_quench(&state, seg.v, seg.a, seg.t_start, truncation)?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShoMoments {
    pub x_mean: f64,
    pub x_var: f64,
    /// `Σ |c_l|² (2l + 1)`: the energy in units of `ω/2`, meaningful when the
    /// frame is at rest.
    pub energy: f64,
}

impl ShoMoments {
    pub fn x_std(&self) -> f64 {
        self.x_var.max(0.0).sqrt()
    }
}

/// Position mean and variance at time `t` (not before the frame time) of a
/// normalized state evolving in its comoving basis, plus the level energy.
///
/// The mean includes the displaced equilibrium `-a` of the accelerated trap:
/// `⟨x⟩ = x_c(t) - a + √2 Re Σ_l √l c*_{l-1} c_l e^{-is}`.
pub fn sho_expectations(state: &ShoCoeffState, t: f64) -> ShoMoments {
    let f = state.frame;
    let s = t - f.t;
    assert!(s >= 0.0, "expectations are evaluated at or after the frame time");
    let c = &state.coeffs;
    let mut first = Complex64::new(0.0, 0.0);
    let mut second = Complex64::new(0.0, 0.0);
    let mut diag = 0.0;
    for l in 0..c.len() {
        let lf = l as f64;
        diag += c[l].norm_sqr() * (2.0 * lf + 1.0);
        if l >= 1 {
            first += c[l - 1].conj() * c[l] * lf.sqrt();
        }
        if l >= 2 {
            second += c[l - 2].conj() * c[l] * (lf * (lf - 1.0)).sqrt();
        }
    }
    let rel = std::f64::consts::SQRT_2 * (first * Complex64::from_polar(1.0, -s)).re;
    let rel2 = 0.5 * diag + (second * Complex64::from_polar(1.0, -2.0 * s)).re;
    ShoMoments { x_mean: f.center_after(s) - f.a + rel, x_var: rel2 - rel * rel, energy: diag }
}
