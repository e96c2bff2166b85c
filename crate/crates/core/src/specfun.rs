//! Hermite and Laguerre polynomials, oscillator eigenfunctions, factorial
//! ratios and Gauss–Hermite quadrature.
//!
//! Everything here is pure and deterministic. Quadrature rules are memoized
//! by order through [`gauss_hermite_cached`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use statrs::function::gamma::ln_gamma;

use crate::error::SpecfunError;

/// `π^{-1/4}`
const PI_M4: f64 = 0.751_125_544_464_942_5;

/// Physicists' Hermite polynomial `H_n(x)` from the three-term recurrence
/// `H_{n+1} = 2x H_n - 2n H_{n-1}`.
///
/// Overflows to `±inf` once `|H_n(x)|` exceeds `f64::MAX` (roughly `n ≳ 150`
/// for `|x|` of order the turning point). Use [`ho_eigenfunction`] for the
/// normalized oscillator states instead.
pub fn hermite_phys(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

// rescale threshold for the normalized recurrence
const BIG: f64 = 1e150;

/// Oscillator eigenfunctions `ψ_0(x) ..= ψ_n_max(x)` of `H = p²/2 + x²/2`.
///
/// Runs the normalized recurrence
/// `ψ_{k+1} = sqrt(2/(k+1)) x ψ_k - sqrt(k/(k+1)) ψ_{k-1}` with the Gaussian
/// factor held back as a running log-scale, so neither `n!` nor `e^{-x²/2}`
/// is ever formed on its own. Values that are genuinely below the smallest
/// subnormal come out as zero.
pub fn ho_eigenfunctions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let gauss = -0.5 * x * x;
    // ψ_k = cur * exp(log_scale)
    let mut log_scale = gauss;
    let mut prev = 0.0;
    let mut cur = PI_M4;
    out.push(cur * log_scale.exp());
    for k in 0..n_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
        out.push(scaled(cur, log_scale));
    }
    out
}

fn scaled(value: f64, log_scale: f64) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    let lg = value.abs().ln() + log_scale;
    value.signum() * lg.exp()
}

/// Normalized oscillator eigenfunction `ψ_n(x) = π^{-1/4} (2ⁿ n!)^{-1/2} H_n(x) e^{-x²/2}`.
///
/// Finite and accurate for `n` well beyond 200.
pub fn ho_eigenfunction(n: usize, x: f64) -> f64 {
    let gauss = -0.5 * x * x;
    let mut log_scale = gauss;
    let mut prev = 0.0;
    let mut cur = PI_M4;
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
    }
    scaled(cur, log_scale)
}

/// Associated Laguerre polynomial `L_n^{(α)}(x)`; `laguerre(n, 0, x)` is the
/// ordinary `L_n(x)`.
pub fn laguerre(n: usize, alpha: u32, x: f64) -> f64 {
    let a = alpha as f64;
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `sqrt(small! / large!)`.
///
/// Exact-product evaluation up to `large = 170`; log-gamma difference beyond.
pub fn sqrt_factorial_ratio(small: usize, large: usize) -> Result<f64, SpecfunError> {
    if small > large {
        return Err(SpecfunError::FactorialOrder { small, large });
    }
    Ok(sqrt_factorial_ratio_unchecked(small, large))
}

pub(crate) fn sqrt_factorial_ratio_unchecked(small: usize, large: usize) -> f64 {
    debug_assert!(small <= large);
    if large <= 170 {
        let prod: f64 = ((small + 1)..=large).map(|i| i as f64).product();
        1.0 / prod.sqrt()
    } else {
        (0.5 * (ln_gamma(small as f64 + 1.0) - ln_gamma(large as f64 + 1.0))).exp()
    }
}

/// `ln sqrt(small!/large!)`, usable for arbitrary indices.
pub(crate) fn ln_sqrt_factorial_ratio(small: usize, large: usize) -> f64 {
    if large <= 170 {
        sqrt_factorial_ratio_unchecked(small, large).ln()
    } else {
        0.5 * (ln_gamma(small as f64 + 1.0) - ln_gamma(large as f64 + 1.0))
    }
}

/// Gauss–Hermite rule for `∫ f(x) e^{-x²} dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    /// Abscissae, strictly increasing.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights against `e^{-x²}`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `w_i e^{x_i²}`: weights for integrating `∫ g(x) dx` directly when `g`
    /// already carries its own Gaussian decay (e.g. products of `ψ_n`).
    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ w_i f(x_i)`
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss–Hermite nodes and weights of the given order.
///
/// Zeros of the oscillator eigenfunction `ψ_n` are bracketed by a grid scan
/// and refined by safeguarded Newton steps; scaled weights follow from `1 / (n ψ_{n-1}(x)²)`.
/// Outer weights underflow to zero for orders above roughly 350, while the
/// scaled weights stay representable.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule, SpecfunError> {
    if order == 0 {
        return Err(SpecfunError::ZeroOrder);
    }
    let n = order;
    let nf = n as f64;
    // positive zeros of ψ_n, bracketed on a grid finer than the smallest
    // zero spacing π/sqrt(2n+1), then polished by safeguarded Newton
    let edge = (2.0 * nf + 1.0).sqrt() + 2.0;
    let h = 0.1 * PI / (2.0 * nf + 1.0).sqrt();
    let steps = (edge / h).ceil() as usize;
    let start = if n % 2 == 1 { 0.5 * h } else { 0.0 };
    let mut positive = Vec::with_capacity(n / 2);
    let mut lo = start;
    let mut f_lo = orthonormal_hermite_pair(n, lo).0;
    for k in 1..=steps {
        let hi = start + k as f64 * h;
        let f_hi = orthonormal_hermite_pair(n, hi).0;
        if f_lo.signum() != f_hi.signum() {
            positive.push(polish_root(n, lo, hi));
        }
        lo = hi;
        f_lo = f_hi;
    }
    debug_assert_eq!(positive.len(), n / 2);

    let mut nodes = Vec::with_capacity(n);
    nodes.extend(positive.iter().rev().map(|z| -z));
    if n % 2 == 1 {
        nodes.push(0.0);
    }
    nodes.extend(positive.iter().copied());
    // ln of the scaled weight 1 / (n ψ_{n-1}(z)²)
    let lnw: Vec<f64> = nodes
        .iter()
        .map(|&z| {
            let (_, q, log_scale) = orthonormal_hermite_pair(n, z);
            -(nf.ln() + 2.0 * (q.abs().ln() + log_scale))
        })
        .collect();
    let weights = lnw.iter().zip(&nodes).map(|(l, x)| (l - x * x).exp()).collect();
    let scaled_weights = lnw.iter().map(|l| l.exp()).collect();
    Ok(QuadratureRule { nodes, weights, scaled_weights })
}

fn polish_root(n: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = orthonormal_hermite_pair(n, lo).0;
    let mut z = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (p, q, _) = orthonormal_hermite_pair(n, z);
        if p == 0.0 {
            return z;
        }
        if p.signum() == f_lo.signum() {
            lo = z;
            f_lo = p;
        } else {
            hi = z;
        }
        let newton = z - p / ((2.0 * n as f64).sqrt() * q);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - z).abs() <= 1e-15 * z.abs().max(1.0) {
            return next;
        }
        z = next;
    }
    z
}

/// `(ψ_n(z), ψ_{n-1}(z), ln_scale)`: the oscillator eigenfunctions (the
/// orthonormal Hermite polynomials times `e^{-z²/2}`) equal the first two
/// entries times `e^{ln_scale}`.
fn orthonormal_hermite_pair(n: usize, z: f64) -> (f64, f64, f64) {
    let mut log_scale = -0.5 * z * z;
    let mut p1 = PI_M4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > BIG {
            p1 /= BIG;
            p2 /= BIG;
            log_scale += BIG.ln();
        }
    }
    (p1, p2, log_scale)
}

type RuleCache = Mutex<HashMap<usize, Arc<QuadratureRule>>>;

/// Memoized [`gauss_hermite`].
pub fn gauss_hermite_cached(order: usize) -> Result<Arc<QuadratureRule>, SpecfunError> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&order) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_hermite(order)?);
    cache.lock().expect("rule cache poisoned").entry(order).or_insert_with(|| Arc::clone(&rule));
    Ok(rule)
}

/// `Γ(k + 1/2) = ∫ x^{2k} e^{-x²} dx`
pub fn gaussian_even_moment(k: usize) -> f64 {
    let mut m = PI.sqrt();
    for i in 0..k {
        m *= i as f64 + 0.5;
    }
    m
}
