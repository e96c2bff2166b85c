//! Command-line front end: argument parsing, the scan behind every
//! subcommand, and table emission.
//!
//! Exit codes: 0 ok, 2 usage, 3 parse or validation, 4 truncation, 5 I/O.

// `!(x <= y)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use quench_core::classical::{monte_carlo_verify, position_averaged_ratio, sign_averaged_ratio, Branch};
use quench_core::protocol::{parse_protocol, QuenchProtocol, QuenchSegment};
use quench_core::sho::{
    apply_quench, evolve_sho_protocol_from, gamma_dodonov, gamma_quench, ludwig_probability, sho_expectations,
    ShoCoeffState, ShoFrame, ShoKinematics,
};
use quench_core::square_well::{box_classical_energies, revival_scan, ChangeCount, TAU0};
use quench_core::{ClassicalError, EmitError, Format, ProtocolError, QuenchError, ScanResult, System, Truncation};

#[derive(Debug, Parser)]
#[command(name = "quench", version, about = "Sudden-quench scans for the moving square well and harmonic trap")]
pub struct Cli {
    /// Basis size
    #[arg(long, global = true, default_value_t = 200)]
    pub n_states: usize,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    /// Write the table here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Keep going when the truncation tail mass exceeds the tolerance
    #[arg(long, global = true)]
    pub allow_leaky: bool,

    /// Largest acceptable tail mass
    #[arg(long, global = true, default_value_t = Truncation::DEFAULT_MAX_TAIL)]
    pub tolerance: f64,

    /// Monte Carlo seed
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Format {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// P(1 -> k) and energy of the box after two or three velocity changes
    BoxRevive(BoxReviveArgs),
    /// Box energy over one revival period against the classical ensemble
    BoxEnergy(BoxEnergyArgs),
    /// Run a trap protocol, optionally scanning the penultimate segment's duration
    ShoQuench(ShoQuenchArgs),
    /// Transition probabilities of a uniformly accelerated trap under both gamma conventions
    ShoLudwig(ShoLudwigArgs),
    /// Position mean and width after a single change from an eigenstate
    ShoCoherent(ShoCoherentArgs),
    /// Classical energy ratios, optionally checked by Monte Carlo
    ClassicalCompare(ClassicalCompareArgs),
    /// Parse and validate a protocol file and list its segments
    ValidateProtocol(ValidateProtocolArgs),
}

#[derive(Debug, Args)]
pub struct BoxReviveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    /// Grid start, in units of tau0
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    /// Grid end, in units of tau0
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 201)]
    pub n_points: usize,
    /// Number of velocity changes (2 or 3)
    #[arg(long, default_value_t = 2)]
    pub changes: u32,
    /// Highest level k reported as P_k
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
}

#[derive(Debug, Args)]
pub struct BoxEnergyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 400)]
    pub n_points: usize,
    #[arg(long, default_value_t = 2)]
    pub changes: u32,
}

#[derive(Debug, Args)]
pub struct ShoQuenchArgs {
    /// Protocol file (TOML)
    pub protocol: PathBuf,
    /// Trap angular frequency the protocol is written in
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 0)]
    pub initial_level: usize,
    /// Highest level l reported as P_l
    #[arg(long, default_value_t = 10)]
    pub l_max: usize,
    /// Scan the penultimate segment's duration from here (protocol time units)
    #[arg(long, requires = "tau_max")]
    pub tau_min: Option<f64>,
    #[arg(long, requires = "tau_min")]
    pub tau_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub n_points: usize,
}

#[derive(Debug, Args)]
pub struct ShoLudwigArgs {
    #[arg(long, default_value_t = 0)]
    pub initial: usize,
    #[arg(long, default_value_t = 5)]
    pub f_max: usize,
    /// Acceleration, in units with omega = 1
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 4.0 * PI)]
    pub t_max: f64,
    #[arg(long, default_value_t = 201)]
    pub n_points: usize,
}

#[derive(Debug, Args)]
pub struct ShoCoherentArgs {
    #[arg(long, default_value_t = 0)]
    pub initial_level: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub kappa: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub x1: f64,
    #[arg(long, default_value_t = 2.0 * PI)]
    pub t_max: f64,
    #[arg(long, default_value_t = 101)]
    pub n_points: usize,
}

#[derive(Debug, Args)]
pub struct ClassicalCompareArgs {
    /// Initial energy in units of omega/2
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub kappa: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 4.0 * PI)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 50)]
    pub n_points: usize,
    /// Monte Carlo samples per tau (0 disables the check)
    #[arg(long, default_value_t = 0)]
    pub samples: u64,
}

#[derive(Debug, Args)]
pub struct ValidateProtocolArgs {
    pub protocol: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Protocol { path: String, source: ProtocolError },
    #[error(transparent)]
    Quench(#[from] QuenchError),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Emit { path: String, source: EmitError },
    #[error("tail mass {tail:.3e} exceeds the tolerance {tolerance:.1e}")]
    LeakyOutput { tail: f64, tolerance: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Protocol { .. } | CliError::Classical(_) => 3,
            CliError::Quench(QuenchError::LeakyTruncation { .. }) | CliError::LeakyOutput { .. } => 4,
            CliError::Quench(_) => 3,
            CliError::Io { .. } | CliError::Emit { .. } => 5,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(usage("grid bounds must be finite"));
    }
    if n < 2 {
        return Err(usage(format!("need at least 2 grid points, got {n}")));
    }
    if !(hi > lo) || lo < 0.0 {
        return Err(usage(format!("need 0 <= min < max, got [{lo}, {hi}]")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn change_count(changes: u32) -> Result<ChangeCount, CliError> {
    ChangeCount::try_from(changes).map_err(|_| usage(format!("--changes must be 2 or 3, got {changes}")))
}

impl Cli {
    pub fn truncation(&self) -> Result<Truncation, CliError> {
        if self.n_states == 0 {
            return Err(usage("--n-states must be positive"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(usage("--tolerance must be non-negative"));
        }
        Ok(Truncation::new(self.n_states).with_max_tail(self.tolerance).allow_leaky(self.allow_leaky))
    }
}

pub fn read_protocol(path: &Path) -> Result<QuenchProtocol, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: shown.clone(), source })?;
    let p = parse_protocol(&text).map_err(|source| CliError::Protocol { path: shown.clone(), source })?;
    p.validate().map_err(|source| CliError::Protocol { path: shown, source })?;
    Ok(p)
}

pub fn cmd_box_revive(args: &BoxReviveArgs, tr: &Truncation) -> Result<ScanResult, CliError> {
    let changes = change_count(args.changes)?;
    if args.k_max == 0 || args.k_max > tr.n_states {
        return Err(usage(format!("--k-max must lie in 1..={}", tr.n_states)));
    }
    let t: Vec<f64> = grid(args.t_min, args.t_max, args.n_points)?.iter().map(|x| x * TAU0).collect();
    let mut r = revival_scan(args.delta, &t, changes, args.k_max, tr)?;
    r.metadata.command = "box-revive".to_string();
    r.metadata
        .param("t_min_over_tau0", args.t_min)
        .param("t_max_over_tau0", args.t_max)
        .param("n_points", args.n_points as u64)
        .param("k_max", args.k_max as u64);
    Ok(r)
}

pub fn cmd_box_energy(args: &BoxEnergyArgs, tr: &Truncation) -> Result<ScanResult, CliError> {
    let changes = change_count(args.changes)?;
    if args.n_points < 2 {
        return Err(usage(format!("need at least 2 grid points, got {}", args.n_points)));
    }
    // one revival period, right end excluded so the mean is a time average
    let t: Vec<f64> = (0..args.n_points).map(|i| TAU0 * i as f64 / args.n_points as f64).collect();
    let scan = revival_scan(args.delta, &t, changes, 1, tr)?;
    let energy = scan.real("energy").expect("scan has an energy column").to_vec();
    let mean = energy.iter().sum::<f64>() / energy.len() as f64;
    let (e_mean, e_fast) = box_classical_energies(args.delta, changes);

    let mut r = ScanResult::new("box-energy");
    r.metadata = scan.metadata.clone();
    r.metadata.command = "box-energy".to_string();
    r.metadata.param("time_average", mean).param("classical_mean", e_mean).param("classical_fast", e_fast);
    r.push_real("t", t.clone());
    r.push_real("t_over_tau0", t.iter().map(|x| x / TAU0).collect());
    r.push_real("energy", energy);
    r.push_real("classical_mean", vec![e_mean; t.len()]);
    r.push_real("classical_fast", vec![e_fast; t.len()]);
    Ok(r)
}

/// The protocol with its penultimate segment lasting `tau`; later segments
/// are shifted rigidly. A zero duration removes that segment.
pub fn with_penultimate_duration(p: &QuenchProtocol, tau: f64) -> QuenchProtocol {
    let n = p.segments.len();
    let mut out = p.clone();
    if n < 2 {
        return out;
    }
    let start = p.segments[n - 2].t_start;
    let shift = start + tau - p.segments[n - 1].t_start;
    out.segments[n - 1].t_start += shift;
    if tau == 0.0 {
        out.segments.remove(n - 2);
    }
    out
}

/// `(v, a)` of a rest → (v, a) → rest protocol, whose energy has the
/// classical ensemble counterpart.
pub fn switch_on_off(p: &QuenchProtocol) -> Option<(f64, f64)> {
    let at_rest = |s: &QuenchSegment| s.v == 0.0 && s.a == 0.0;
    match p.segments.as_slice() {
        [first, mid, last] if at_rest(first) && at_rest(last) => Some((mid.v, mid.a)),
        _ => None,
    }
}

fn sho_final_state(p: &QuenchProtocol, n0: usize, tr: &Truncation) -> Result<ShoCoeffState, CliError> {
    if p.segments.len() >= 2 {
        return Ok(evolve_sho_protocol_from(p, n0, tr)?);
    }
    let s = p.segments[0];
    Ok(ShoCoeffState::eigenstate(tr.n_states, n0, ShoFrame::new(p.x1, s.t_start, s.v, s.a)))
}

pub fn cmd_sho_quench(args: &ShoQuenchArgs, tr: &Truncation) -> Result<ScanResult, CliError> {
    if !(args.omega > 0.0 && args.omega.is_finite()) {
        return Err(usage("--omega must be positive"));
    }
    if args.initial_level >= tr.n_states || args.l_max >= tr.n_states {
        return Err(usage(format!("--initial-level and --l-max must be below --n-states = {}", tr.n_states)));
    }
    let path = args.protocol.display().to_string();
    let raw = read_protocol(&args.protocol)?;
    raw.require_system(System::Sho).map_err(|source| CliError::Protocol { path: path.clone(), source })?;
    let n = raw.segments.len();
    let taus = match (args.tau_min, args.tau_max) {
        (Some(lo), Some(hi)) => grid(lo, hi, args.n_points)?,
        _ => vec![raw.segments[n - 1].t_start - raw.segments[n - 2].t_start],
    };

    let n0 = args.initial_level;
    let epsilon = (2 * n0 + 1) as f64;
    let mut probs = vec![Vec::with_capacity(taus.len()); args.l_max + 1];
    let (mut energy, mut classical, mut tails) = (Vec::new(), Vec::new(), Vec::new());
    for &tau in &taus {
        let p = with_penultimate_duration(&raw, tau).to_oscillator_units(args.omega);
        let state = sho_final_state(&p, n0, tr)?;
        for (l, column) in probs.iter_mut().enumerate() {
            column.push(state.coeffs[l].norm_sqr());
        }
        let e: f64 = state.coeffs.iter().enumerate().map(|(l, c)| c.norm_sqr() * (2 * l + 1) as f64).sum();
        energy.push(e / epsilon);
        tails.push(state.tail_mass());
        classical.push(match switch_on_off(&raw) {
            Some((v, a)) => {
                let kin = ShoKinematics::from_quench(0.0, v, 0.0, a, args.omega).with_tau(args.omega * tau);
                sign_averaged_ratio(epsilon, &kin)?
            }
            None => f64::NAN,
        });
    }

    let mut r = ScanResult::new("sho-quench");
    r.metadata
        .param("protocol", path)
        .param("omega", args.omega)
        .param("initial_level", n0 as u64)
        .param("l_max", args.l_max as u64);
    r.metadata.n_states = Some(tr.n_states);
    r.metadata.tail_mass = Some(tails.iter().cloned().fold(0.0, f64::max));
    r.push_real("tau", taus.clone());
    r.push_real("omega_tau", taus.iter().map(|t| t * args.omega).collect());
    for (l, column) in probs.into_iter().enumerate() {
        r.push_real(&format!("P_{l}"), column);
    }
    r.push_real("energy", energy);
    r.push_real("classical", classical);
    r.push_real("tail_mass", tails);
    Ok(r)
}

pub fn cmd_sho_ludwig(args: &ShoLudwigArgs) -> Result<ScanResult, CliError> {
    if args.f_max < args.initial {
        return Err(usage(format!("--f-max {} is below --initial {}", args.f_max, args.initial)));
    }
    if !args.a.is_finite() {
        return Err(usage("--a must be finite"));
    }
    let t = grid(args.t_min, args.t_max, args.n_points)?;
    let ours: Vec<f64> = t.iter().map(|&t| gamma_quench(args.a, t)).collect();
    let theirs: Vec<f64> = t.iter().map(|&t| gamma_dodonov(args.a, t)).collect();

    let mut r = ScanResult::new("sho-ludwig");
    r.metadata.param("initial", args.initial as u64).param("f_max", args.f_max as u64).param("a", args.a);
    r.push_real("t", t.clone());
    r.push_real("gamma", ours.clone());
    r.push_real("gamma_dodonov", theirs.clone());
    for f in 0..=args.f_max {
        r.push_real(&format!("P_{f}"), ours.iter().map(|&g| ludwig_probability(args.initial, f, g)).collect());
    }
    for f in 0..=args.f_max {
        r.push_real(
            &format!("P_dodonov_{f}"),
            theirs.iter().map(|&g| ludwig_probability(args.initial, f, g)).collect(),
        );
    }
    Ok(r)
}

pub fn cmd_sho_coherent(args: &ShoCoherentArgs, tr: &Truncation) -> Result<ScanResult, CliError> {
    if args.initial_level >= tr.n_states {
        return Err(usage(format!("--initial-level must be below --n-states = {}", tr.n_states)));
    }
    for (name, x) in [("kappa", args.kappa), ("lambda", args.lambda), ("x1", args.x1)] {
        if !x.is_finite() {
            return Err(usage(format!("--{name} must be finite")));
        }
    }
    let t = grid(0.0, args.t_max, args.n_points)?;
    let start = ShoCoeffState::eigenstate(tr.n_states, args.initial_level, ShoFrame::at_rest(args.x1, 0.0));
    let state = apply_quench(&start, args.kappa, args.lambda, 0.0, tr)?;
    let (mut mean, mut width, mut predicted) = (Vec::new(), Vec::new(), Vec::new());
    for &s in &t {
        let m = sho_expectations(&state, s);
        mean.push(m.x_mean);
        width.push(m.x_std());
        let centre = state.frame.center_after(s) - args.lambda;
        predicted.push(centre + args.lambda * s.cos() - args.kappa * s.sin());
    }
    let expected_width = ((2 * args.initial_level + 1) as f64 / 2.0).sqrt();

    let mut r = ScanResult::new("sho-coherent");
    r.metadata
        .param("initial_level", args.initial_level as u64)
        .param("kappa", args.kappa)
        .param("lambda", args.lambda)
        .param("x1", args.x1);
    r.metadata.n_states = Some(tr.n_states);
    r.metadata.tail_mass = Some(state.tail_mass());
    r.push_real("t", t.clone());
    r.push_real("x_mean", mean);
    r.push_real("x_mean_predicted", predicted);
    r.push_real("x_std", width);
    r.push_real("x_std_predicted", vec![expected_width; t.len()]);
    Ok(r)
}

pub fn cmd_classical_compare(args: &ClassicalCompareArgs, seed: u64) -> Result<ScanResult, CliError> {
    let tau = grid(args.tau_min, args.tau_max, args.n_points)?;
    let (mut avg, mut plus, mut minus, mut mc, mut err) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, &t) in tau.iter().enumerate() {
        let kin = ShoKinematics::switch_on(args.kappa, args.lambda, t);
        avg.push(sign_averaged_ratio(args.epsilon, &kin)?);
        plus.push(position_averaged_ratio(args.epsilon, Branch::Plus, &kin)?);
        minus.push(position_averaged_ratio(args.epsilon, Branch::Minus, &kin)?);
        if args.samples > 0 {
            let est = monte_carlo_verify(args.epsilon, &kin, args.samples, seed.wrapping_add(i as u64))?;
            mc.push(est.mean);
            err.push(est.std_err);
        }
    }

    let mut r = ScanResult::new("classical-compare");
    r.metadata
        .param("epsilon", args.epsilon)
        .param("kappa", args.kappa)
        .param("lambda", args.lambda)
        .param("samples", args.samples)
        .param("seed", seed);
    r.push_real("tau", tau);
    r.push_real("sign_averaged", avg);
    r.push_real("plus", plus);
    r.push_real("minus", minus);
    if args.samples > 0 {
        r.push_real("monte_carlo", mc);
        r.push_real("monte_carlo_std_err", err);
    }
    Ok(r)
}

pub fn cmd_validate_protocol(args: &ValidateProtocolArgs) -> Result<ScanResult, CliError> {
    let p = read_protocol(&args.protocol)?;
    let mut r = ScanResult::new("validate-protocol");
    r.metadata
        .param("protocol", args.protocol.display().to_string())
        .param("system", p.system.as_str())
        .param("x1", p.x1);
    r.push_real("t_start", p.segments.iter().map(|s| s.t_start).collect());
    r.push_real("v", p.segments.iter().map(|s| s.v).collect());
    r.push_real("a", p.segments.iter().map(|s| s.a).collect());
    r.push_real("x_center", p.center_positions());
    Ok(r)
}

/// Runs the selected subcommand and returns its table.
pub fn execute(cli: &Cli) -> Result<ScanResult, CliError> {
    let tr = cli.truncation()?;
    match &cli.command {
        Command::BoxRevive(a) => cmd_box_revive(a, &tr),
        Command::BoxEnergy(a) => cmd_box_energy(a, &tr),
        Command::ShoQuench(a) => cmd_sho_quench(a, &tr),
        Command::ShoLudwig(a) => cmd_sho_ludwig(a),
        Command::ShoCoherent(a) => cmd_sho_coherent(a, &tr),
        Command::ClassicalCompare(a) => cmd_classical_compare(a, cli.seed),
        Command::ValidateProtocol(a) => cmd_validate_protocol(a),
    }
}

/// Writes `result` to `--output` or to `stdout`.
pub fn write_result(cli: &Cli, result: &ScanResult, stdout: &mut dyn Write) -> Result<(), CliError> {
    let format = Format::from(cli.format);
    match &cli.output {
        Some(path) => {
            let shown = path.display().to_string();
            let file = File::create(path).map_err(|source| CliError::Io { path: shown.clone(), source })?;
            let mut w = BufWriter::new(file);
            result.emit(format, &mut w).map_err(|source| CliError::Emit { path: shown.clone(), source })?;
            w.flush().map_err(|source| CliError::Io { path: shown, source })
        }
        None => result.emit(format, stdout).map_err(|source| CliError::Emit { path: "<stdout>".to_string(), source }),
    }
}

/// Full run: compute, report the tail mass on `stderr`, write the table, and
/// fail with a truncation error when the tail mass is above the tolerance.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let result = execute(cli)?;
    if let Some(tail) = result.metadata.tail_mass {
        let n = result.metadata.n_states.unwrap_or(cli.n_states);
        let _ = writeln!(stderr, "tail mass {tail:.3e} (n_states = {n})");
    }
    write_result(cli, &result, stdout)?;
    match result.metadata.tail_mass {
        Some(tail) if !(tail <= cli.tolerance) => Err(CliError::LeakyOutput { tail, tolerance: cli.tolerance }),
        _ => Ok(()),
    }
}
