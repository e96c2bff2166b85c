//! Classical particle in the trap for the switch-on/stop protocol: at rest
//! trap, then `(v, a) = (κ, λ)` for `τ`, then at rest again.
//!
//! Energies are in units of `ω/2` and positions in oscillator lengths, so a
//! particle with energy `ε` starting at `y` has speed `√(ε - y²)`.
//!
//! Averages over the starting point use the uniform measure on
//! `[-√ε, √ε]`, not the time-weighted (arcsine) density of a particle
//! oscillating with energy `ε`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::ClassicalError;
use crate::sho::ShoKinematics;

/// Sign of the `±2√(ε - y²)` term of the energy ratio. `Plus` is the particle
/// that starts moving towards negative `x` (initial velocity `-√(ε - y²)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalInit {
    pub epsilon: f64,
    pub y: f64,
    pub branch: Branch,
}

impl ClassicalInit {
    pub fn new(epsilon: f64, y: f64, branch: Branch) -> Result<Self, ClassicalError> {
        check_energy(epsilon)?;
        if !(y * y <= epsilon) {
            return Err(ClassicalError::OutsideTurningPoints { y, epsilon });
        }
        Ok(ClassicalInit { epsilon, y, branch })
    }

    /// Initial velocity of this starting condition.
    pub fn velocity(&self) -> f64 {
        -self.branch.sign() * (self.epsilon - self.y * self.y).max(0.0).sqrt()
    }
}

fn check_energy(epsilon: f64) -> Result<(), ClassicalError> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(ClassicalError::BadEnergy(epsilon))
    }
}

/// Final-to-initial energy ratio `E₃/E₁` from the closed form
///
/// ```text
/// ε E₃/E₁ = ε + 2(κ² + λ(y+λ)) + 2κλτ + λ²τ²
///           - 2(κ² + λ(y+λ) + κλτ) cos τ - 2(yκ + λ(y+λ)τ) sin τ
///           ± 2√(ε - y²) (κ - (κ + λτ) cos τ + λ sin τ).
/// ```
pub fn classical_energy_ratio(init: &ClassicalInit, kin: &ShoKinematics) -> f64 {
    let ClassicalInit { epsilon: eps, y, branch } = *init;
    let (k, l, t) = (kin.kappa, kin.lambda, kin.tau);
    let (c, s) = (t.cos(), t.sin());
    let shift = k * k + l * (y + l);
    let root = (eps - y * y).max(0.0).sqrt();
    let num = eps + 2.0 * shift + 2.0 * k * l * t + l * l * t * t
        - 2.0 * (shift + k * l * t) * c
        - 2.0 * (y * k + l * (y + l) * t) * s
        + branch.sign() * 2.0 * root * (k - (k + l * t) * c + l * s);
    num / eps
}

/// The same ratio from the explicit trajectory: relative to the moving
/// centre the particle oscillates about `-λ` with
/// `x_r(s) = -λ + (y + λ) cos s + (v₁ - κ) sin s`; at the stop its lab
/// velocity is `κ + λτ + x_r'(τ)`.
pub fn trajectory_energy_ratio(init: &ClassicalInit, kin: &ShoKinematics) -> f64 {
    let (k, l, t) = (kin.kappa, kin.lambda, kin.tau);
    let amp_c = init.y + l;
    let amp_s = init.velocity() - k;
    let xr = -l + amp_c * t.cos() + amp_s * t.sin();
    let vr = -amp_c * t.sin() + amp_s * t.cos();
    let v_lab = k + l * t + vr;
    (v_lab * v_lab + xr * xr) / init.epsilon
}

/// Closed-form average of [`classical_energy_ratio`] over `y` uniform on
/// `[-√ε, √ε]` for one branch.
pub fn position_averaged_ratio(epsilon: f64, branch: Branch, kin: &ShoKinematics) -> Result<f64, ClassicalError> {
    check_energy(epsilon)?;
    let (k, l, t) = (kin.kappa, kin.lambda, kin.tau);
    let sp = branch.sign() * PI * epsilon.sqrt();
    let num = 2.0 * epsilon + sp * k + 4.0 * k * k + 4.0 * k * l * t + 2.0 * l * l * (2.0 + t * t)
        - (4.0 * l * l + (sp + 4.0 * k) * (k + l * t)) * t.cos()
        + l * (sp - 4.0 * l * t) * t.sin();
    Ok(num / (2.0 * epsilon))
}

/// Average over both branches, independent of the starting point:
/// `[ε + 2κ² + 2κλτ + λ²(2 + τ²) - 2(κ² + λ² + κλτ) cos τ - 2λ²τ sin τ]/ε`.
pub fn sign_averaged_ratio(epsilon: f64, kin: &ShoKinematics) -> Result<f64, ClassicalError> {
    check_energy(epsilon)?;
    Ok(1.0 + sign_averaged_gain(kin) / epsilon)
}

/// `ε (E₃/E₁ - 1)` of the branch average.
fn sign_averaged_gain(kin: &ShoKinematics) -> f64 {
    let (k, l, t) = (kin.kappa, kin.lambda, kin.tau);
    2.0 * k * k + 2.0 * k * l * t + l * l * (2.0 + t * t)
        - 2.0 * (k * k + l * l + k * l * t) * t.cos()
        - 2.0 * l * l * t * t.sin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: u64,
}

const CHUNK: u64 = 1 << 16;

#[derive(Clone, Copy)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Welford) -> Welford {
        if self.n == 0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * self.n as f64 * o.n as f64 / n as f64,
        }
    }
}

/// Monte Carlo mean of `E₃/E₁` with `y` uniform on `[-√ε, √ε]` and the branch
/// drawn with equal probability.
///
/// Samples are drawn in fixed chunks of 65536, chunk `i` from ChaCha8 seeded
/// with `seed` on stream `i`, and the chunk statistics are merged in order, so
/// the result depends only on `seed` and `n_samples`.
pub fn monte_carlo_verify(
    epsilon: f64,
    kin: &ShoKinematics,
    n_samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, ClassicalError> {
    check_energy(epsilon)?;
    assert!(n_samples >= 1, "need at least one sample");
    let root = epsilon.sqrt();
    let n_chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<Welford> = (0..n_chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let count = CHUNK.min(n_samples - i * CHUNK);
            let mut w = Welford { n: 0, mean: 0.0, m2: 0.0 };
            for _ in 0..count {
                let y = root * (2.0 * rng.gen::<f64>() - 1.0);
                let branch = if rng.gen::<bool>() { Branch::Plus } else { Branch::Minus };
                let init = ClassicalInit { epsilon, y, branch };
                w.push(classical_energy_ratio(&init, kin));
            }
            w
        })
        .collect();
    let total = parts.into_iter().fold(Welford { n: 0, mean: 0.0, m2: 0.0 }, Welford::merge);
    let var = if total.n > 1 { total.m2 / (total.n - 1) as f64 } else { 0.0 };
    Ok(MonteCarloEstimate { mean: total.mean, std_err: (var / total.n as f64).sqrt(), n_samples: total.n })
}
