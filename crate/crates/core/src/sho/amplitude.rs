use std::f64::consts::{LN_2, SQRT_2};

use ndarray::Array2;
use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use twofloat::TwoFloat;

use super::ShoKinematics;
use crate::error::{ConvergenceWarning, QuenchError};
use crate::specfun::{gauss_hermite_cached, ho_eigenfunctions, laguerre, ln_sqrt_factorial_ratio};
use crate::{CoeffVector, QuenchMatrix};

/// `e^{-(κ²+λ²)/4 + iκρ/2}`, common to every amplitude.
fn prefactor(kin: &ShoKinematics) -> Complex64 {
    Complex64::from_polar((-0.25 * kin.eta2()).exp(), 0.5 * kin.kappa * kin.rho)
}

/// Quench amplitude `Q_kj` in closed form:
///
/// ```text
/// Q_jj = P L_j(η²/2)
/// Q_kj = P sqrt(m!/M!) (b/√2)^d L_m^{(d)}(η²/2),   d = |k - j|
/// ```
///
/// with `P = e^{-(η² - 2iκρ)/4}`, `η² = κ² + λ²`, `m = min(k, j)`,
/// `M = max(k, j)`, and `b = λ - iκ` for `k > j`, `b = -λ - iκ` for `k < j`.
/// The modulus is assembled in log space, so large indices neither overflow
/// nor cancel.
///
/// `|Q_kj| = |Q_jk|` always; the entries themselves coincide when `λ = 0`.
/// In general `Q_jk(κ, λ, ρ) = Q_kj(κ, -λ, ρ)`.
pub fn sho_q_closed(k: usize, j: usize, kin: &ShoKinematics) -> Complex64 {
    let eta2 = kin.eta2();
    let x = 0.5 * eta2;
    if k == j {
        return prefactor(kin) * laguerre(j, 0, x);
    }
    let (m, big) = (k.min(j), k.max(j));
    let d = big - m;
    // + 0.0 folds a negative zero so the k < j branch matches k > j at λ = 0
    let lam = if k > j { kin.lambda } else { -kin.lambda } + 0.0;
    let b = Complex64::new(lam, -kin.kappa);
    let r = b.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let df = d as f64;
    let log_mag = ln_sqrt_factorial_ratio(m, big) + df * (r.ln() - 0.5 * LN_2) - 0.25 * eta2;
    let phase = df * b.arg() + 0.5 * kin.kappa * kin.rho;
    Complex64::from_polar(log_mag.exp(), phase) * laguerre(m, d as u32, x)
}

/// `N×N` matrix of [`sho_q_closed`], levels `0..N`.
pub fn sho_q_matrix(n_states: usize, kin: &ShoKinematics) -> QuenchMatrix {
    let data: Vec<Complex64> = (0..n_states)
        .into_par_iter()
        .flat_map_iter(|k| (0..n_states).map(move |j| (k, j)))
        .map(|(k, j)| sho_q_closed(k, j, kin))
        .collect();
    Array2::from_shape_vec((n_states, n_states), data).expect("shape matches")
}

type Dd = Complex<TwoFloat>;

fn dd(z: Complex64) -> Dd {
    Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

// twofloat's division is only accurate to f64, so exact integer ratios get
// one residual correction step instead
fn dd_ratio(num: f64, den: f64) -> TwoFloat {
    let q = num / den;
    let residual = TwoFloat::from(num) - TwoFloat::new_mul(q, den);
    TwoFloat::from(q) + TwoFloat::from(f64::from(residual) / den)
}

fn to_f64(z: Dd) -> Complex64 {
    Complex64::new(f64::from(z.re), f64::from(z.im))
}

/// `Q_mn(α, β) = ∫ φ_m(x + α) φ_n(x) e^{βx} dx` from its finite series
///
/// ```text
/// e^{(β² - α²)/4 - αβ/2} Σ_j (α+β)^j (β-α)^k R_mj R_nk / (2^{(j+k)/2} j! k!),
/// k = n - m + j,  R_mj = sqrt(m!/(m-j)!).
/// ```
///
/// The terms alternate in sign and can exceed the sum by many orders of
/// magnitude, so the sum and its term ratios are carried in double-double
/// arithmetic.
pub fn sho_q_series(m: usize, n: usize, alpha: f64, beta: Complex64) -> Complex64 {
    let pre = ((beta * beta - alpha * alpha) * 0.25 - beta * (0.5 * alpha)).exp();
    let a = dd(Complex64::new(alpha, 0.0));
    let b = dd(beta);
    let plus = b + a;
    let minus = b - a;
    // for n >= m the leading term carries (β-α)^{n-m}; otherwise (α+β)^{m-n}
    let (small, d, lead) = if n >= m { (m, n - m, minus) } else { (n, m - n, plus) };

    // T_0 = lead^d / d! * sqrt((small+d)!/small!) / 2^{d/2}
    let mut t = Dd::new(TwoFloat::from(1.0), TwoFloat::from(0.0));
    for i in 1..=d {
        let f = ((small + i) as f64).sqrt() / (i as f64 * SQRT_2);
        t = t * lead * TwoFloat::from(f);
    }
    let half_prod = plus * minus * TwoFloat::from(0.5);
    let mut sum = t;
    for j in 1..=small {
        let ratio = dd_ratio((small - j + 1) as f64, (j * (d + j)) as f64);
        t = t * half_prod * ratio;
        sum += t;
    }
    pre * to_f64(sum)
}

/// `Q̃_mn(α₁, α₂, β) = e^{-βα₂} Q_mn(α₁ - α₂, β)`, the overlap
/// `∫ φ_m(x + α₁) φ_n(x + α₂) e^{βx} dx`.
pub fn sho_q_series_shifted(m: usize, n: usize, alpha1: f64, alpha2: f64, beta: Complex64) -> Complex64 {
    (-beta * alpha2).exp() * sho_q_series(m, n, alpha1 - alpha2, beta)
}

/// The quench amplitude through the series:
/// `Q_kj = e^{iκ(ρ - λ)/2} Q_kj(α = λ, β = -iκ)`.
pub fn sho_q_via_series(k: usize, j: usize, kin: &ShoKinematics) -> Complex64 {
    let phase = Complex64::from_polar(1.0, 0.5 * kin.kappa * (kin.rho - kin.lambda));
    phase * sho_q_series(k, j, kin.lambda, Complex64::new(0.0, -kin.kappa))
}

/// Gauss–Hermite evaluation of
/// `e^{iκρ/2} ∫ φ_k(u + λ/2) φ_j(u - λ/2) e^{-iκu} du` at a fixed order.
pub fn sho_q_quadrature_with_order(k: usize, j: usize, kin: &ShoKinematics, order: usize) -> Complex64 {
    let rule = gauss_hermite_cached(order).expect("order is positive");
    let top = k.max(j);
    let half = 0.5 * kin.lambda;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&u, &w) in rule.nodes().iter().zip(rule.scaled_weights()) {
        let left = ho_eigenfunctions(top, u + half);
        let right = ho_eigenfunctions(top, u - half);
        acc += Complex64::from_polar(w * left[k] * right[j], -kin.kappa * u);
    }
    acc * Complex64::from_polar(1.0, 0.5 * kin.kappa * kin.rho)
}

/// Gauss–Hermite evaluation of `Q_kj` at order `k + j + 80`, checked against
/// order `k + j + 120`. Returns the higher-order value, or a warning carrying
/// it when the two differ by more than `1e-10`.
pub fn sho_q_quadrature(k: usize, j: usize, kin: &ShoKinematics) -> Result<Complex64, ConvergenceWarning> {
    let base = k + j + 80;
    let lo = sho_q_quadrature_with_order(k, j, kin, base);
    let hi = sho_q_quadrature_with_order(k, j, kin, base + 40);
    let difference = (hi - lo).norm();
    if difference > 1e-10 {
        return Err(ConvergenceWarning { value: hi, difference });
    }
    Ok(hi)
}

/// Whole `N×N` matrix by Gauss–Hermite quadrature of the given order.
pub fn sho_q_quadrature_matrix(n_states: usize, kin: &ShoKinematics, order: usize) -> QuenchMatrix {
    let rule = gauss_hermite_cached(order).expect("order is positive");
    let top = n_states.saturating_sub(1);
    let half = 0.5 * kin.lambda;
    let rows: Vec<(Vec<f64>, Vec<f64>, Complex64)> = rule
        .nodes()
        .par_iter()
        .zip(rule.scaled_weights().par_iter())
        .map(|(&u, &w)| {
            (
                ho_eigenfunctions(top, u + half),
                ho_eigenfunctions(top, u - half),
                Complex64::from_polar(w, -kin.kappa * u),
            )
        })
        .collect();
    let global = Complex64::from_polar(1.0, 0.5 * kin.kappa * kin.rho);
    let mut out = Array2::zeros((n_states, n_states));
    for (left, right, p) in &rows {
        for k in 0..n_states {
            let pk = p * left[k];
            for j in 0..n_states {
                out[[k, j]] += pk * right[j];
            }
        }
    }
    out.mapv_inplace(|z| z * global);
    out
}

/// Coefficients `c_l = Q_{l,n0}` after one sudden change from level `n0` of
/// the resting trap, from the dedicated closed forms for `n0 ∈ {0, 1, 2}`.
/// With `b = λ - iκ` and `P` the common prefactor:
///
/// ```text
/// n0 = 0:  c_l = P (b/√2)^l / √l!
/// n0 = 1:  c_l = P (b/√2)^{l-1} (2l - η²) / (2 √l!)
/// n0 = 2:  c_l = P (b/√2)^{l-2} (η⁴ + 4l² - 4l(η² + 1)) / (4√2 √l!)
/// ```
///
/// Negative powers are expanded by hand for the lowest `l`.
pub fn one_change_coeffs(n0: usize, kin: &ShoKinematics, n_states: usize) -> Result<CoeffVector, QuenchError> {
    if n0 > 2 {
        return Err(QuenchError::InvalidArgument(format!("closed-form coefficients exist for n0 <= 2, got {n0}")));
    }
    let pre = prefactor(kin);
    let eta2 = kin.eta2();
    let b = Complex64::new(kin.lambda, -kin.kappa);
    let step = b / SQRT_2;
    // u_l = (b/√2)^{l - n0} / √l!  for l >= n0
    let mut out = CoeffVector::zeros(n_states);
    let mut u = Complex64::new(1.0, 0.0);
    for i in 1..=n0 {
        u /= (i as f64).sqrt();
    }
    for l in 0..n_states {
        let lf = l as f64;
        if l > n0 {
            u = u * step / lf.sqrt();
        }
        out[l] = match (n0, l) {
            (0, _) => pre * u,
            (1, 0) => -pre * Complex64::new(kin.lambda, kin.kappa) / SQRT_2,
            (1, _) => pre * u * (0.5 * (2.0 * lf - eta2)),
            (2, 0) => -pre * Complex64::new(kin.kappa, -kin.lambda).powu(2) / (2.0 * SQRT_2),
            (2, 1) => pre * Complex64::new(0.0, 0.25) * Complex64::new(kin.kappa, -kin.lambda) * (eta2 - 4.0),
            (_, _) => {
                let poly = eta2 * eta2 + 4.0 * lf * lf - 4.0 * lf * (eta2 + 1.0);
                pre * u * (poly / (4.0 * SQRT_2))
            }
        };
    }
    Ok(out)
}

/// Transition probability for a uniformly accelerated trap,
/// `P_{i→f} = (m!/M!) γ^{|f-i|} e^{-γ} [L_m^{(|f-i|)}(γ)]²`, `m = min(i, f)`.
pub fn ludwig_probability(i: usize, f: usize, gamma: f64) -> f64 {
    assert!(gamma >= 0.0, "gamma must be non-negative");
    let (m, big) = (i.min(f), i.max(f));
    let d = big - m;
    let lag = laguerre(m, d as u32, gamma);
    if d == 0 {
        return (-gamma).exp() * lag * lag;
    }
    if gamma == 0.0 {
        return 0.0;
    }
    let log = 2.0 * ln_sqrt_factorial_ratio(m, big) + d as f64 * gamma.ln() - gamma;
    log.exp() * lag * lag
}

/// `γ = a²t²/2`, the excitation parameter of a trap accelerated by `a` for `t`.
pub fn gamma_quench(a: f64, t: f64) -> f64 {
    0.5 * a * a * t * t
}

/// `γ = 2a² sin²(t/2)`, the periodic alternative.
pub fn gamma_dodonov(a: f64, t: f64) -> f64 {
    let s = (0.5 * t).sin();
    2.0 * a * a * s * s
}
