//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are not reachable as stated; they are
//! still evaluated at their stated tolerance and reported as FAIL, but only an
//! unexpected failure makes the binary exit non-zero.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use quench_core::classical::{
    classical_energy_ratio, monte_carlo_verify, position_averaged_ratio, sign_averaged_ratio, Branch, ClassicalInit,
};
use quench_core::sho::{
    gamma_dodonov, gamma_quench, ludwig_probability, one_change_coeffs, sho_expectations, sho_q_closed,
    sho_q_quadrature, sho_q_via_series, two_change_chain, ShoCoeffState, ShoFrame, ShoKinematics,
};
use quench_core::square_well::{
    box_classical_energies, box_energy_expectation, three_change_amplitudes, two_change_amplitudes, BoxChain,
    ChangeCount, TAU0,
};
use quench_core::Truncation;

const KNOWN_FAILURES: &[u32] = &[6, 9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn c1_box_revival() -> Outcome {
    let mut worst: f64 = 1.0;
    let mut slowest: f64 = 0.0;
    let mut parts = Vec::new();
    for &d in &[2.0, 8.0, 20.0] {
        let start = Instant::now();
        let p = two_change_amplitudes(d, TAU0, 200)[0].norm_sqr();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        worst = worst.min(p);
        parts.push(format!("delta={d}: {p:.9}"));
    }
    outcome(
        worst >= 0.999 && slowest < 10.0,
        format!(
            "box two-change P(1->1) at t=tau0, N=200 [{}] >= 0.999; slowest {slowest:.2} s < 10 s",
            parts.join(", ")
        ),
    )
}

fn c2_half_point() -> Outcome {
    let p = two_change_amplitudes(20.0, TAU0 / 4.0, 200)[0].norm_sqr();
    outcome(
        (0.45..=0.55).contains(&p),
        format!("box two-change P(1->1) at t=tau0/4, delta=20, N=200: {p:.6} in [0.45, 0.55]"),
    )
}

fn c3_box_energy() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let n_grid = 400;
    for &d in &[5.0, 20.0] {
        let chain = BoxChain::new(ChangeCount::Two, d, 200);
        let energies: Vec<f64> = (0..n_grid)
            .map(|i| box_energy_expectation(&chain.amplitudes(TAU0 * i as f64 / n_grid as f64)).energy)
            .collect();
        let mean = energies.iter().sum::<f64>() / n_grid as f64;
        let max = energies.iter().cloned().fold(f64::MIN, f64::max);
        let (e_mean, e_fast) = box_classical_energies(d, ChangeCount::Two);
        let rel = (mean / e_mean - 1.0).abs();
        pass &= rel <= 0.05 && max <= 1.05 * e_fast;
        parts.push(format!(
            "delta={d}: mean <H>/E1 {mean:.4} vs {e_mean:.4} (rel {rel:.2e} <= 0.05), max {max:.4} <= {:.4}",
            1.05 * e_fast
        ));
    }
    outcome(pass, format!("box time-averaged energy over [0, tau0), N=200; {}", parts.join("; ")))
}

fn c4_three_change() -> Outcome {
    let mut worst: f64 = 1.0;
    for &d in &[2.0, 8.0, 20.0] {
        worst = worst.min(three_change_amplitudes(d, TAU0, 200)[0].norm_sqr());
    }
    let plateau = three_change_amplitudes(20.0, TAU0 / 4.0, 200)[0].norm_sqr();
    outcome(
        worst >= 0.999 && (plateau - 0.25).abs() <= 0.05,
        format!(
            "box three-change, leg duration t as the time axis, N=200: min P(1->1) at t=tau0 over delta {{2,8,20}} {worst:.9} >= 0.999; \
             P(1->1) at t=tau0/4, delta=20: {plateau:.4} within 0.05 of 0.25"
        ),
    )
}

fn c5_three_paths() -> Outcome {
    let start = Instant::now();
    let vals = [-3.0, -1.0, 0.0, 0.5, 2.0];
    let (mut series_err, mut quad_err): (f64, f64) = (0.0, 0.0);
    let mut warnings = 0;
    for &kappa in &vals {
        for &lambda in &vals {
            for &rho in &[0.0, 1.0] {
                let kin = ShoKinematics::new(kappa, lambda, rho, 0.0);
                for k in 0..=20 {
                    for j in 0..=20 {
                        let closed = sho_q_closed(k, j, &kin);
                        series_err = series_err.max((closed - sho_q_via_series(k, j, &kin)).norm());
                        let quad = sho_q_quadrature(k, j, &kin).unwrap_or_else(|w| {
                            warnings += 1;
                            w.value
                        });
                        quad_err = quad_err.max((closed - quad).norm());
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        series_err <= 1e-10 && quad_err <= 1e-10 && secs < 30.0,
        format!(
            "SHO Q_kj closed vs series {series_err:.2e}, closed vs quadrature {quad_err:.2e} (<= 1e-10) over k,j <= 20, \
             kappa,lambda in {{-3,-1,0,0.5,2}}, rho in {{0,1}}; {warnings} convergence warnings; {secs:.1} s < 30 s"
        ),
    )
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

fn p0_to_l(l: usize, eta: f64) -> f64 {
    let kin = ShoKinematics::switch_on(eta, 0.0, 0.0);
    one_change_coeffs(0, &kin, l + 1).expect("n0 = 0")[l].norm_sqr()
}

// golden-section maximum of P(0->l) in η on [lo, hi]
fn eta_of_peak(l: usize, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if p0_to_l(l, a) < p0_to_l(l, b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    0.5 * (lo + hi)
}

fn c6_poisson() -> Outcome {
    let mut poisson_err: f64 = 0.0;
    for &(kappa, lambda) in &[(1.3, 0.4), (0.0, 2.5), (3.0, -1.0), (-0.7, 0.0), (2.0, 2.0)] {
        let kin = ShoKinematics::switch_on(kappa, lambda, 0.0);
        let x = 0.5 * kin.eta2();
        let c = one_change_coeffs(0, &kin, 31).expect("n0 = 0");
        for l in 0..=30 {
            let law = (-x + l as f64 * x.ln() - ln_factorial(l)).exp();
            poisson_err = poisson_err.max((c[l].norm_sqr() - law).abs());
        }
    }

    let mut zero_err: f64 = 0.0;
    for l in 1..=12 {
        let eta = (2.0 * l as f64).sqrt();
        for &theta in &[0.0, 0.6, PI / 2.0, 2.5] {
            let kin = ShoKinematics::switch_on(eta * f64::cos(theta), eta * f64::sin(theta), 0.0);
            let p = one_change_coeffs(1, &kin, l + 1).expect("n0 = 1")[l].norm_sqr();
            zero_err = zero_err.max(p);
        }
    }

    // peak of P(0->l) as a function of η, against the claimed √(2(l-1))
    let mut peak_err: f64 = 0.0;
    let mut measured = Vec::new();
    for l in 1..=6 {
        let eta = eta_of_peak(l, 0.0, 10.0);
        peak_err = peak_err.max((eta - (2.0 * (l - 1) as f64).sqrt()).abs());
        measured.push(format!("l={l}: eta^2={:.6}", eta * eta));
    }
    // most probable level at η = √(2(l-1)) against the claimed l
    let mut mode_hits = 0;
    for l in 2..=6 {
        let eta = (2.0 * (l - 1) as f64).sqrt();
        let probs: Vec<f64> = (0..=20).map(|n| p0_to_l(n, eta)).collect();
        let top = probs.iter().cloned().fold(0.0, f64::max);
        if (probs[l] - top).abs() <= 1e-12 * top {
            mode_hits += 1;
        }
    }

    let pass = poisson_err <= 1e-12 && zero_err <= 1e-12 && peak_err <= 1e-6 && mode_hits == 5;
    outcome(
        pass,
        format!(
            "one-change |c_l|^2 vs Poisson law, l <= 30: {poisson_err:.2e} (<= 1e-12); P(1->l) at eta^2=2l: {zero_err:.2e} (<= 1e-12); \
             argmax_eta P(0->l) vs sqrt(2(l-1)): off by up to {peak_err:.3} (<= 1e-6), measured [{}]; \
             level l most probable at eta^2=2(l-1) for {mode_hits}/5 of l=2..6",
            measured.join(", ")
        ),
    )
}

fn c7_coherence() -> Outcome {
    let grid = linspace(0.0, 2.0 * PI, 97);
    let (x1, t1) = (0.3, 0.0);
    let mut width_err: f64 = 0.0;
    let mut width_spread: f64 = 0.0;
    let mut mean_err: f64 = 0.0;
    let mut literal_off: f64 = 0.0;
    for n0 in 0..=2usize {
        let expected = ((2 * n0 + 1) as f64 / 2.0).sqrt();
        for &(kappa, lambda) in &[(0.8, 0.5), (-1.2, 0.0), (0.0, 1.5), (2.0, -0.7)] {
            let kin = ShoKinematics::switch_on(kappa, lambda, 0.0);
            let coeffs = one_change_coeffs(n0, &kin, 120).expect("n0 <= 2");
            let state = ShoCoeffState { coeffs, frame: ShoFrame::new(x1, t1, kappa, lambda) };
            let (mut lo, mut hi) = (f64::MAX, f64::MIN);
            for &t in &grid {
                let m = sho_expectations(&state, t);
                let s = t - t1;
                let w = m.x_var.sqrt();
                lo = lo.min(w);
                hi = hi.max(w);
                width_err = width_err.max((w - expected).abs());
                let centre = x1 + kappa * s + 0.5 * lambda * s * s;
                let oscillation = lambda * s.cos() - kappa * s.sin();
                mean_err = mean_err.max((m.x_mean - (centre - lambda + oscillation)).abs());
                literal_off = literal_off.max((m.x_mean - (centre + oscillation)).abs());
            }
            width_spread = width_spread.max(hi - lo);
        }
    }
    outcome(
        width_spread <= 1e-10 && width_err <= 1e-10 && mean_err <= 1e-10,
        format!(
            "one-change states n0=0,1,2 over one period: width variation {width_spread:.2e}, |dx - sqrt((2n0+1)/2)| {width_err:.2e}, \
             <x> vs centre(t) - a + lambda cos s - kappa sin s {mean_err:.2e} (all <= 1e-10); \
             without the -a equilibrium offset the form is off by {literal_off:.3}"
        ),
    )
}

fn c8_ludwig() -> Outcome {
    let mut norm_gap: f64 = 0.0;
    for &i in &[0usize, 1, 3, 5, 10] {
        for gamma in [0.01f64, 0.5, 1.0, 4.0, 10.0] {
            let top = i + (12.0 * gamma).ceil() as usize + 40;
            let s: f64 = (0..=top).map(|f| ludwig_probability(i, f, gamma)).sum();
            norm_gap = norm_gap.max(1.0 - s);
        }
    }
    let (a, t) = (1.0, 1e-3);
    let ours = gamma_quench(a, t);
    let rel = (ours - gamma_dodonov(a, t)).abs() / ours;

    let grid = linspace(0.0, 4.0 * PI, 201);
    let decay: Vec<f64> = grid.iter().map(|&t| ludwig_probability(0, 0, gamma_quench(1.0, t))).collect();
    let periodic: Vec<f64> = grid.iter().map(|&t| ludwig_probability(0, 0, gamma_dodonov(1.0, t))).collect();
    let monotone = decay.windows(2).all(|w| w[1] < w[0]);
    let period_err = (0..101).map(|i| (periodic[i] - periodic[i + 100]).abs()).fold(0.0, f64::max);
    let returns = (periodic[100] - 1.0).abs();
    outcome(
        norm_gap <= 1e-10 && rel <= 1e-6 && monotone && period_err <= 1e-12 && returns <= 1e-12,
        format!(
            "Ludwig sum over f <= i+12g+40: deficit {norm_gap:.2e} (<= 1e-10); gamma relative difference at wt=1e-3 {rel:.2e} (<= 1e-6); \
             P(0->0) on [0, 4pi]: strictly decreasing {monotone} with a^2t^2/2, 2pi-periodic to {period_err:.1e} and back to 1 to {returns:.1e} with 2a^2 sin^2(t/2)"
        ),
    )
}

fn c9_energy_correspondence() -> Outcome {
    let taus = linspace(0.0, 4.0 * PI, 50);
    let sizes = [30usize, 40, 50, 60];
    let mut pass = true;
    let mut parts = Vec::new();
    for &(kappa, lambda) in &[(1.0, 0.0), (0.0, 1.0)] {
        let mut devs = Vec::new();
        let mut worst_tail: f64 = 0.0;
        for &n in &sizes {
            let tr = Truncation::new(n).allow_leaky(true);
            let mut dev: f64 = 0.0;
            for &tau in &taus {
                let kin = ShoKinematics::switch_on(kappa, lambda, tau);
                let c = two_change_chain(&kin, &tr).expect("leaky truncation allowed");
                let energy: f64 = c.iter().enumerate().map(|(l, z)| z.norm_sqr() * (2 * l + 1) as f64).sum();
                let classical = sign_averaged_ratio(1.0, &kin).expect("positive energy");
                dev = dev.max((energy - classical).abs());
                worst_tail = worst_tail.max(quench_core::tail_mass(&c));
            }
            devs.push(dev);
        }
        // deviations already at the roundoff floor count as non-increasing
        let monotone = devs.windows(2).all(|w| w[1] < w[0] || w[1].max(w[0]) <= 1e-12);
        let ok = monotone && devs[3] <= 1e-3;
        pass &= ok;
        let listed: Vec<String> = devs.iter().map(|d| format!("{d:.2e}")).collect();
        parts.push(format!(
            "kappa={kappa}, lambda={lambda}: max|<H>/E0 - classical| for N=30..60 [{}], decreasing {monotone}, N=60 <= 1e-3 {}, max tail mass {worst_tail:.2}",
            listed.join(", "),
            devs[3] <= 1e-3
        ));
    }
    outcome(
        pass,
        format!("SHO two-change energy vs sign-averaged classical ratio on 50 tau in [0, 4pi]; {}", parts.join("; ")),
    )
}

// ∫ over y uniform on [-√ε, √ε] via y = √ε sin θ and composite Simpson in θ
fn y_average(epsilon: f64, branch: Branch, kin: &ShoKinematics) -> f64 {
    let n = 4000;
    let h = PI / n as f64;
    let root = epsilon.sqrt();
    let f = |theta: f64| {
        let y = (root * theta.sin()).clamp(-root, root);
        let init = ClassicalInit::new(epsilon, y, branch).expect("inside the turning points");
        classical_energy_ratio(&init, kin) * theta.cos()
    };
    let mut s = f(-PI / 2.0) + f(PI / 2.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(-PI / 2.0 + i as f64 * h);
    }
    0.5 * s * h / 3.0
}

fn c10_classical() -> Outcome {
    let cases = [
        (1.0, ShoKinematics::switch_on(1.0, 0.0, PI / 2.0)),
        (3.0, ShoKinematics::switch_on(0.5, 0.8, 2.0)),
        (0.4, ShoKinematics::switch_on(-1.1, 0.3, 7.5)),
    ];
    let mut worst_sigma: f64 = 0.0;
    let mut quad_err: f64 = 0.0;
    for (i, (eps, kin)) in cases.iter().enumerate() {
        let closed = sign_averaged_ratio(*eps, kin).expect("positive energy");
        let mc = monte_carlo_verify(*eps, kin, 1_000_000, 20 + i as u64).expect("positive energy");
        worst_sigma = worst_sigma.max((mc.mean - closed).abs() / mc.std_err);
        for branch in [Branch::Plus, Branch::Minus] {
            let avg = position_averaged_ratio(*eps, branch, kin).expect("positive energy");
            quad_err = quad_err.max((avg - y_average(*eps, branch, kin)).abs());
        }
    }
    outcome(
        worst_sigma <= 3.0 && quad_err <= 1e-8,
        format!(
            "sign-averaged ratio vs Monte Carlo (1e6 samples): worst {worst_sigma:.2} standard errors (<= 3); \
             position-averaged ratio vs y-quadrature: {quad_err:.2e} (<= 1e-8)"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, c1_box_revival),
        (2, c2_half_point),
        (3, c3_box_energy),
        (4, c4_three_change),
        (5, c5_three_paths),
        (6, c6_poisson),
        (7, c7_coherence),
        (8, c8_ludwig),
        (9, c9_energy_correspondence),
        (10, c10_classical),
    ];
    let mut unexpected = Vec::new();
    let mut failed = 0;
    for (id, run) in criteria {
        let o = run();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = match (o.pass, known) {
            (false, true) => " (known)",
            (true, true) => " (listed as known failure)",
            _ => "",
        };
        println!("{tag} criterion {id}{note}: {}", o.detail);
        if !o.pass {
            failed += 1;
            if !known {
                unexpected.push(id);
            }
        }
    }
    println!("{} passed, {failed} failed, {} unexpected", 10 - failed, unexpected.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
