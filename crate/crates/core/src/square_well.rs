//! Infinite square well of width L = 1 that is suddenly set into uniform
//! motion, reversed and stopped.
//!
//! Eigenfunctions are `ψ_k(y) = √2 sin(kπ(y + 1/2))` on `y ∈ [-1/2, 1/2]`,
//! `k ≥ 1`, with energies `E_k = π²k²/2`. A velocity change `Δv` is described
//! by `δ = Δv/2`. Coefficient vectors are indexed from zero, so entry `i`
//! belongs to level `k = i + 1`.
//!
//! Global phases picked up from the displacement of the well are not tracked;
//! they never enter a probability.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::QuenchError;
use crate::protocol::{QuenchProtocol, System};
use crate::table::ScanResult;
use crate::{tail_mass, CoeffVector, QuenchMatrix, Truncation};

/// Revival time `τ₀ = 4/π`.
pub const TAU0: f64 = 4.0 / PI;

/// `E_k = π²k²/2`
pub fn level_energy(k: usize) -> f64 {
    0.5 * PI * PI * (k * k) as f64
}

/// Truncation and quench strength of a single box quench matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBasisSpec {
    pub n_states: usize,
    pub delta: f64,
}

impl BoxBasisSpec {
    pub fn new(n_states: usize, delta: f64) -> Self {
        assert!(n_states >= 1, "n_states must be positive");
        BoxBasisSpec { n_states, delta }
    }
}

fn i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Quench amplitude `Q_kl(δ) = ∫ ψ_k(y) ψ_l(y) e^{-2iδy} dy` from the closed
/// form. Points on or next to a zero of the closed form's denominator are
/// routed to [`box_q_element_quadrature`].
pub fn box_q_element(k: usize, l: usize, delta: f64) -> Complex64 {
    assert!(k >= 1 && l >= 1, "box levels start at 1");
    let d = delta;
    if d.abs() < 1e-6 {
        return box_q_element_quadrature(k, l, d);
    }
    let (kf, lf) = (k as f64, l as f64);
    let pi2 = PI * PI;
    if k == l {
        let gap = pi2 * kf * kf - d * d;
        if gap.abs() < 1e-6 * pi2 * kf * kf {
            return box_q_element_quadrature(k, l, d);
        }
        return Complex64::new(pi2 * kf * kf * d.sin() / (d * gap), 0.0);
    }
    let sum = PI * (kf + lf);
    let diff = PI * (kf - lf);
    let denom = (4.0 * d * d - sum * sum) * (4.0 * d * d - diff * diff);
    let scale = kf * kf + lf * lf;
    if denom.abs() < 1e-6 * pi2 * pi2 * scale * scale {
        return box_q_element_quadrature(k, l, d);
    }
    let num = 16.0 * pi2 * d * kf * lf * (0.5 * sum - d).sin();
    i_pow(k + l) * (num / denom)
}

/// `∫₀¹ e^{iωu} du`
fn unit_phase_integral(omega: f64) -> Complex64 {
    let h = 0.5 * omega;
    let sinc = if h.abs() < 1e-4 {
        let h2 = h * h;
        1.0 - h2 / 6.0 * (1.0 - h2 / 20.0)
    } else {
        h.sin() / h
    };
    Complex64::from_polar(sinc, h)
}

/// The same overlap integral evaluated directly: the integrand
/// `2 sin(kπu) sin(lπu) e^{-2iδu}` is a sum of four exponentials, each
/// integrated exactly over the well. Regular for every `δ`.
pub fn box_q_element_quadrature(k: usize, l: usize, delta: f64) -> Complex64 {
    assert!(k >= 1 && l >= 1, "box levels start at 1");
    let diff = PI * (k as f64 - l as f64);
    let sum = PI * (k + l) as f64;
    let w = 2.0 * delta;
    let s = unit_phase_integral(diff - w) + unit_phase_integral(-diff - w)
        - unit_phase_integral(sum - w)
        - unit_phase_integral(-sum - w);
    Complex64::from_polar(0.5, delta) * s
}

/// `N×N` quench matrix with entries `Q_kl(δ)`, `k, l = 1..=N`.
pub fn box_q_matrix(spec: BoxBasisSpec) -> QuenchMatrix {
    build_matrix(spec.n_states, |k, l| box_q_element(k, l, spec.delta))
}

/// The same matrix built from [`box_q_element_quadrature`] only.
pub fn box_q_matrix_quadrature(spec: BoxBasisSpec) -> QuenchMatrix {
    build_matrix(spec.n_states, |k, l| box_q_element_quadrature(k, l, spec.delta))
}

fn build_matrix<F>(n: usize, f: F) -> QuenchMatrix
where
    F: Fn(usize, usize) -> Complex64 + Sync,
{
    let data: Vec<Complex64> =
        (0..n).into_par_iter().flat_map_iter(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| f(i + 1, j + 1)).collect();
    Array2::from_shape_vec((n, n), data).expect("shape matches")
}

fn column(n: usize, l: usize, delta: f64) -> CoeffVector {
    (1..=n).map(|k| box_q_element(k, l, delta)).collect()
}

/// Coefficients over the moving-well basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCoeffState {
    pub coeffs: CoeffVector,
    pub t_anchor: f64,
    pub v_frame: f64,
}

impl BoxCoeffState {
    /// Ground state of a well moving with `v_frame`.
    pub fn ground(n_states: usize, t_anchor: f64, v_frame: f64) -> Self {
        let mut coeffs = CoeffVector::zeros(n_states);
        coeffs[0] = Complex64::new(1.0, 0.0);
        BoxCoeffState { coeffs, t_anchor, v_frame }
    }

    pub fn tail_mass(&self) -> f64 {
        tail_mass(&self.coeffs)
    }
}

/// Free evolution over `dt` in a well moving with `v_frame`: level `l` picks up
/// `e^{-iE_l dt} e^{+i v² dt/2}`.
pub fn free_phase_evolve(state: &BoxCoeffState, dt: f64) -> BoxCoeffState {
    assert!(dt >= 0.0, "free evolution needs dt >= 0");
    let frame = 0.5 * state.v_frame * state.v_frame * dt;
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * Complex64::from_polar(1.0, frame - level_energy(i + 1) * dt))
        .collect();
    BoxCoeffState { coeffs, t_anchor: state.t_anchor + dt, v_frame: state.v_frame }
}

/// Sudden change of the well velocity to `new_v`.
pub fn apply_box_quench(state: &BoxCoeffState, new_v: f64) -> BoxCoeffState {
    let n = state.coeffs.len();
    let delta = 0.5 * (new_v - state.v_frame);
    let coeffs =
        if delta == 0.0 { state.coeffs.clone() } else { box_q_matrix(BoxBasisSpec::new(n, delta)).dot(&state.coeffs) };
    BoxCoeffState { coeffs, t_anchor: state.t_anchor, v_frame: new_v }
}

/// Number of velocity changes in the canned chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeCount {
    /// rest → v for `t` → rest
    Two,
    /// rest → v for `t` → −v for `t` → rest
    Three,
}

impl TryFrom<u32> for ChangeCount {
    type Error = QuenchError;
    fn try_from(n: u32) -> Result<Self, QuenchError> {
        match n {
            2 => Ok(ChangeCount::Two),
            3 => Ok(ChangeCount::Three),
            _ => Err(QuenchError::InvalidArgument(format!("number of changes must be 2 or 3, got {n}"))),
        }
    }
}

/// Precomputed matrices for evaluating a chain at many durations.
#[derive(Debug, Clone)]
pub struct BoxChain {
    changes: ChangeCount,
    delta: f64,
    /// `Q(δ) e₁`
    first: CoeffVector,
    /// `Q(-δ)` for two changes, `Q(-2δ)` for three
    middle: QuenchMatrix,
    /// `Q(δ)` for three changes
    last: Option<QuenchMatrix>,
}

impl BoxChain {
    pub fn new(changes: ChangeCount, delta: f64, n_states: usize) -> Self {
        let first = column(n_states, 1, delta);
        match changes {
            ChangeCount::Two => BoxChain {
                changes,
                delta,
                first,
                middle: box_q_matrix(BoxBasisSpec::new(n_states, -delta)),
                last: None,
            },
            ChangeCount::Three => BoxChain {
                changes,
                delta,
                first,
                middle: box_q_matrix(BoxBasisSpec::new(n_states, -2.0 * delta)),
                last: Some(box_q_matrix(BoxBasisSpec::new(n_states, delta))),
            },
        }
    }

    pub fn n_states(&self) -> usize {
        self.first.len()
    }

    /// Coefficients after the last change; `t` is the duration of each leg.
    pub fn amplitudes(&self, t: f64) -> CoeffVector {
        assert!(t >= 0.0, "leg duration must be non-negative");
        if self.delta == 0.0 {
            let mut e1 = CoeffVector::zeros(self.n_states());
            e1[0] = Complex64::new(1.0, 0.0);
            return e1;
        }
        let v = 2.0 * self.delta;
        let legs = |c: &CoeffVector| -> CoeffVector {
            c.iter().enumerate().map(|(i, z)| z * Complex64::from_polar(1.0, -level_energy(i + 1) * t)).collect()
        };
        match self.changes {
            ChangeCount::Two => {
                let mid = legs(&self.first) * Complex64::from_polar(1.0, 0.5 * v * v * t);
                self.middle.dot(&mid)
            }
            ChangeCount::Three => {
                let c = self.middle.dot(&legs(&self.first));
                let last = self.last.as_ref().expect("three-change chain has a last matrix");
                last.dot(&legs(&c)) * Complex64::from_polar(1.0, v * v * t)
            }
        }
    }
}

/// Ground state of the resting well, moved with `v = 2δ` for `t2`, then
/// stopped.
pub fn two_change_amplitudes(delta: f64, t2: f64, n_states: usize) -> CoeffVector {
    BoxChain::new(ChangeCount::Two, delta, n_states).amplitudes(t2)
}

/// Ground state of the resting well, moved with `v = 2δ` for `t`, reversed to
/// `-v` for another `t` (so it returns to its start) and stopped.
pub fn three_change_amplitudes(delta: f64, t: f64, n_states: usize) -> CoeffVector {
    BoxChain::new(ChangeCount::Three, delta, n_states).amplitudes(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyExpectation {
    /// `⟨H⟩` over the retained levels.
    pub energy: f64,
    pub tail_mass: f64,
}

/// `⟨H⟩/E₁ = Σ |c_k|² k²`.
pub fn box_energy_expectation(coeffs: &CoeffVector) -> EnergyExpectation {
    let energy = coeffs.iter().enumerate().map(|(i, c)| c.norm_sqr() * ((i + 1) * (i + 1)) as f64).sum();
    EnergyExpectation { energy, tail_mass: tail_mass(coeffs) }
}

/// Classical energy of the ensemble after the chain, in units of `E₁`:
/// `(mean over starting directions, energy of the faster direction)`.
pub fn box_classical_energies(delta: f64, changes: ChangeCount) -> (f64, f64) {
    let x = delta * delta / (PI * PI);
    match changes {
        ChangeCount::Two => (1.0 + 8.0 * x, 1.0 + 16.0 * x),
        ChangeCount::Three => (1.0 + 24.0 * x, 1.0 + 64.0 * x),
    }
}

/// Transition probabilities `P_{1→k}`, `k ≤ k_max`, and `⟨H⟩/E₁` along a grid
/// of leg durations.
///
/// Columns: `t`, `t_over_tau0`, `P_1 ..= P_{k_max}`, `energy`, `tail_mass`.
pub fn revival_scan(
    delta: f64,
    t_grid: &[f64],
    changes: ChangeCount,
    k_max: usize,
    truncation: &Truncation,
) -> Result<ScanResult, QuenchError> {
    let n = truncation.n_states;
    if k_max == 0 || k_max > n {
        return Err(QuenchError::InvalidArgument(format!("k_max must lie in 1..={n}, got {k_max}")));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t >= 0.0)) {
        return Err(QuenchError::InvalidArgument(format!("grid times must be >= 0, got {t}")));
    }
    let chain = BoxChain::new(changes, delta, n);
    let rows: Vec<CoeffVector> = t_grid.par_iter().map(|&t| chain.amplitudes(t)).collect();
    let mut worst = 0.0f64;
    for c in &rows {
        worst = worst.max(truncation.check(c)?);
    }

    let mut out = ScanResult::new("revival_scan");
    out.metadata.param("delta", delta);
    out.metadata.param("n_changes", if changes == ChangeCount::Two { 2 } else { 3 });
    out.metadata.n_states = Some(n);
    out.metadata.tail_mass = Some(worst);
    out.push_real("t", t_grid.to_vec());
    out.push_real("t_over_tau0", t_grid.iter().map(|t| t / TAU0).collect());
    for k in 0..k_max {
        out.push_real(&format!("P_{}", k + 1), rows.iter().map(|c| c[k].norm_sqr()).collect());
    }
    let energies: Vec<EnergyExpectation> = rows.iter().map(box_energy_expectation).collect();
    out.push_real("energy", energies.iter().map(|e| e.energy).collect());
    out.push_real("tail_mass", energies.iter().map(|e| e.tail_mass).collect());
    Ok(out)
}

/// Runs a velocity-only protocol for the box, starting in the ground state of
/// the first segment's frame. Returns the state right after the last change.
pub fn evolve_box_protocol(p: &QuenchProtocol, truncation: &Truncation) -> Result<BoxCoeffState, QuenchError> {
    p.validate()?;
    p.require_system(System::Box)?;
    p.require_unaccelerated()?;
    let first = p.segments[0];
    let mut state = BoxCoeffState::ground(truncation.n_states, first.t_start, first.v);
    for pair in p.segments.windows(2) {
        state = free_phase_evolve(&state, pair[1].t_start - pair[0].t_start);
        state = apply_box_quench(&state, pair[1].v);
    }
    truncation.check(&state.coeffs)?;
    Ok(state)
}
