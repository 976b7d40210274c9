//! Configuration, orchestration and persistence of runs and campaigns.
//!
//! A run directory holds `manifest.json`, `series.csv` and `snapshots/`;
//! campaign directories hold one manifest per sub-run.

mod config;
mod report;

pub use config::{
    emit_config, load_config, parse_config, ConfigError, DiagnosticsConfig, GridConfig, InitialConfig, Mode,
    OperatorsConfig, PhysicsConfig, RunConfig, WindowConfig,
};
pub use report::{report, Report, ReportRow};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::dynamics::{initial, Invariants, Model, Params, SurfaceState, Termination};
use crate::error::{Error, Result};
use crate::experiments::{
    analytic_state, dispersion_mode, gain_dichotomy, operator_bounds, operator_oracles, spectral_slope, GainSetup,
};
use crate::linear::{data, LinearSolution, WindowSpec};
use crate::spectral::{max_abs, SpectralGrid};

/// Environment variable overriding the output root.
pub const OUTPUT_ROOT_VAR: &str = "CAPWAVE_OUTPUT_ROOT";
const DEFAULT_OUTPUT_ROOT: &str = "capwave-output";

/// Reference size for rough-tail draws, so resolutions share one data set.
const ROUGH_TAIL_NREF: usize = 16384;

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// A measured value compared against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `None` when the measurement was not finite.
    pub measured: Option<f64>,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::new(name.into(), measured, Relation::AtMost, tolerance)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::new(name.into(), measured, Relation::AtLeast, tolerance)
    }

    fn new(name: String, measured: f64, relation: Relation, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => measured <= tolerance,
            Relation::AtLeast => measured >= tolerance,
        };
        Self {
            name,
            measured: finite(measured),
            relation,
            tolerance,
            pass,
        }
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationRecord {
    pub reason: Termination,
    /// Offending diagnostic value of an abort.
    pub value: Option<f64>,
    /// Steps (or samples) completed.
    pub step: usize,
    pub t: f64,
}

impl TerminationRecord {
    fn completed(step: usize, t: f64) -> Self {
        Self {
            reason: Termination::Completed,
            value: None,
            step,
            t,
        }
    }

    fn from_error(err: &Error, step: usize, t: f64) -> Self {
        let (reason, value) = Termination::classify(err);
        Self {
            reason,
            value: finite(value),
            step,
            t,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// `run`, `dispersion`, `operators-test` or `gain`.
    pub kind: String,
    pub version: String,
    pub config: serde_json::Value,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
    pub termination: TerminationRecord,
    pub invariants: Option<Invariants>,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub results: serde_json::Value,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.termination.reason == Termination::Completed && self.checks.iter().all(|c| c.pass)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(self).expect("manifest serializes") + "\n")?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))
    }
}

struct Clock {
    started_unix: f64,
    start: Instant,
}

impl Clock {
    fn start() -> Self {
        Self {
            started_unix: unix_now(),
            start: Instant::now(),
        }
    }

    fn manifest(
        self,
        kind: &str,
        config: serde_json::Value,
        termination: TerminationRecord,
        invariants: Option<Invariants>,
        checks: Vec<Check>,
        results: serde_json::Value,
    ) -> RunManifest {
        RunManifest {
            kind: kind.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            started_unix: self.started_unix,
            finished_unix: unix_now(),
            wall_seconds: self.start.elapsed().as_secs_f64(),
            termination,
            invariants,
            checks,
            results,
        }
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Shortest round-trip formatting, so identical values give identical text.
fn fmt(v: f64) -> String {
    format!("{v:e}")
}

struct Series {
    writer: csv::Writer<fs::File>,
}

impl Series {
    fn create(path: &Path, header: &[String]) -> Result<Self> {
        let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
        writer.write_record(header).map_err(csv_err)?;
        Ok(Self { writer })
    }

    fn row(&mut self, values: &[f64]) -> Result<()> {
        self.writer.write_record(values.iter().map(|&v| fmt(v))).map_err(csv_err)
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_snapshot(dir: &Path, index: usize, t: f64, names: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# t = {}", fmt(t));
    let _ = writeln!(out, "# {}", names.join(" "));
    for j in 0..columns[0].len() {
        let row: Vec<String> = columns.iter().map(|c| fmt(c[j])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    fs::write(dir.join(format!("snapshot_{index:06}.txt")), out)?;
    Ok(())
}

fn take_snapshot(cfg: &RunConfig, step: usize, last: bool) -> bool {
    step == 0 || last || (cfg.snapshot_every > 0 && step.is_multiple_of(cfg.snapshot_every))
}

/// Run a configuration under the output root.
pub fn run(cfg: &RunConfig) -> Result<RunManifest> {
    run_in(cfg, &output_root().join(&cfg.output_dir))
}

/// Run a configuration into `dir`, replacing any previous outputs there.
pub fn run_in(cfg: &RunConfig, dir: &Path) -> Result<RunManifest> {
    cfg.validate().map_err(|e| Error::Domain(e.to_string()))?;
    let snapshots = dir.join("snapshots");
    if snapshots.exists() {
        fs::remove_dir_all(&snapshots)?;
    }
    fs::create_dir_all(&snapshots)?;
    let clock = Clock::start();
    let echo = serde_json::to_value(cfg).expect("configuration serializes");
    let (termination, invariants, checks, results) = match cfg.mode {
        Mode::Nonlinear => run_nonlinear(cfg, dir)?,
        Mode::LinearCapillary | Mode::LinearGravity => run_linear(cfg, dir)?,
        Mode::OperatorsTest => {
            let (checks, results) = operator_checks(cfg.seed, &cfg.operators)?;
            (TerminationRecord::completed(0, 0.0), None, checks, results)
        }
    };
    let manifest = clock.manifest("run", echo, termination, invariants, checks, results);
    manifest.write(dir)?;
    Ok(manifest)
}

type Outcome = (TerminationRecord, Option<Invariants>, Vec<Check>, serde_json::Value);

fn params(cfg: &RunConfig) -> Params {
    Params {
        inv_we: cfg.physics.inv_we,
        gravity: cfg.physics.g,
    }
}

pub fn initial_state(cfg: &RunConfig, grid: &SpectralGrid) -> Result<SurfaceState> {
    let p = params(cfg);
    let n = grid.n_points();
    match cfg.initial {
        InitialConfig::Flat { gamma } => Ok(SurfaceState::flat(grid, gamma, p)),
        InitialConfig::SingleMode { mode, amplitude, gamma_amplitude, gamma_mean } => {
            initial::single_mode(grid, mode, amplitude, gamma_amplitude, gamma_mean, p)
        }
        InitialConfig::GaussianPacket { width, carrier, amplitude } => {
            let theta = data::gaussian_packet(grid, width, carrier).iter().map(|v| amplitude * v).collect();
            SurfaceState::from_angle(grid, theta, vec![0.0; n], p)
        }
        InitialConfig::RoughTail { exponent, amplitude, gamma_amplitude, .. } => {
            initial::algebraic_spectrum(grid, exponent + 0.5, amplitude, gamma_amplitude, cfg.seed, p)
        }
        InitialConfig::Analytic { eps } => analytic_state(grid, eps, p),
    }
}

fn nonlinear_header(cfg: &RunConfig) -> Vec<String> {
    let d = &cfg.diagnostics;
    let mut h: Vec<String> = [
        "t",
        "sigma",
        "sigma_minus_one",
        "closure",
        "chord_arc",
        "kappa_max",
        "theta_drift",
        "gamma_drift",
        "sigma_drift",
        "gamma_t_iterations",
    ]
    .map(String::from)
    .to_vec();
    for field in ["kappa", "u"] {
        h.extend(d.sobolev_orders.iter().map(|s| format!("h{s}_{field}")));
    }
    if d.energies {
        h.push(format!("e0_{}", d.energy_order));
    }
    if d.remainders {
        h.extend(["slope_kappa", "slope_r_kappa", "slope_p_alpha", "slope_r_p"].map(String::from));
    }
    if d.residuals {
        h.extend(["residual_kappa", "residual_u", "residual_second_order"].map(String::from));
    }
    h
}

fn run_nonlinear(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let grid = SpectralGrid::new(cfg.grid.n, cfg.grid.period)?;
    let model = Model::new(grid.clone(), cfg.stepper)?;
    let d = &cfg.diagnostics;
    let mut series = Series::create(&dir.join("series.csv"), &nonlinear_header(cfg))?;
    let snapshots = dir.join("snapshots");
    let s0 = initial_state(cfg, &grid)?;
    if let Err(e) = model.validate_state(&s0) {
        series.finish()?;
        return Ok((TerminationRecord::from_error(&e, 0, 0.0), None, Vec::new(), serde_json::Value::Null));
    }
    let band = (cfg.grid.n / 32, cfg.grid.n / 6);
    let mut history: Vec<SurfaceState> = vec![s0.clone()];
    let mut state = s0.clone();
    let mut snap = 0;
    let mut step = 0;
    let termination = loop {
        let last = step == cfg.steps;
        if step % cfg.record_every == 0 || last || take_snapshot(cfg, step, last) {
            let recorded = (|| -> Result<()> {
                let inv = model.validate_state(&state)?;
                let f = model.derived_fields(&state)?;
                if step % cfg.record_every == 0 || last {
                    let drift = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                    let mut row = vec![
                        state.t,
                        state.sigma,
                        (state.sigma - 1.0).abs(),
                        inv.closure,
                        inv.chord_arc,
                        inv.kappa_max,
                        drift(&state.theta, &s0.theta),
                        drift(&state.gamma, &s0.gamma),
                        (state.sigma - s0.sigma).abs(),
                        f.gamma_t_iterations as f64,
                    ];
                    for field in [&f.kappa, &f.u] {
                        for &s in &d.sobolev_orders {
                            row.push(grid.sobolev_norm(field, s)?);
                        }
                    }
                    if d.energies {
                        row.push(model.energy_e0k(&state, &f, d.energy_order)?.value);
                    }
                    if d.remainders {
                        let p_alpha: Vec<f64> = grid.derivative(&f.p, 1)?.iter().map(|v| v / state.sigma).collect();
                        for x in [&f.kappa, &f.r_kappa, &p_alpha, &f.r_p] {
                            row.push(spectral_slope(&grid, x, band.0, band.1));
                        }
                    }
                    if d.residuals {
                        if history.len() == 3 {
                            let r = model.residual_kappa_u(&history)?;
                            row.extend([grid.l2_norm(&r.kappa), grid.l2_norm(&r.u), grid.l2_norm(&r.second_order)]);
                        } else {
                            row.extend([f64::NAN; 3]);
                        }
                    }
                    series.row(&row)?;
                }
                if take_snapshot(cfg, step, last) {
                    let cols: [&[f64]; 9] = [
                        grid.nodes(),
                        &state.theta,
                        &state.gamma,
                        &f.kappa,
                        &f.u,
                        &f.p,
                        &f.r_kappa,
                        &f.r_u,
                        &f.r_p,
                    ];
                    write_snapshot(
                        &snapshots,
                        snap,
                        state.t,
                        &["alpha", "theta", "gamma", "kappa", "u", "p", "r_kappa", "r_u", "r_p"],
                        &cols,
                    )?;
                    snap += 1;
                }
                Ok(())
            })();
            if let Err(e) = recorded {
            if matches!(e, Error::Io(_)) {
                return Err(e);
            }
                break TerminationRecord::from_error(&e, step, state.t);
            }
        }
        if last {
            break TerminationRecord::completed(step, state.t);
        }
        match model.step(&state) {
            Ok(next) => {
                state = next;
                step += 1;
                if d.residuals {
                    if history.len() == 3 {
                        history.remove(0);
                    }
                    history.push(state.clone());
                }
            }
            Err(failure) => {
                break TerminationRecord {
                    reason: failure.reason,
                    value: finite(failure.value),
                    step,
                    t: state.t,
                };
            }
        }
    };
    series.finish()?;
    let invariants = model.validate_state(&state).ok();
    Ok((termination, invariants, Vec::new(), serde_json::Value::Null))
}

/// Initial (κ₀, κ₁) of a linear run.
pub fn linear_data(cfg: &RunConfig, grid: &SpectralGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = grid.n_points();
    let zero = vec![0.0; n];
    let k0 = match cfg.initial {
        InitialConfig::Flat { .. } => zero.clone(),
        InitialConfig::SingleMode { mode, amplitude, .. } => {
            let k = 2.0 * std::f64::consts::PI * mode as f64 / grid.period();
            grid.nodes().iter().map(|x| amplitude * (k * x).cos()).collect()
        }
        InitialConfig::GaussianPacket { width, carrier, amplitude } => {
            data::gaussian_packet(grid, width, carrier).iter().map(|v| amplitude * v).collect()
        }
        InitialConfig::RoughTail { exponent, amplitude, width, .. } => {
            data::rough_tail(grid, exponent, amplitude, width, 0.0, cfg.seed, ROUGH_TAIL_NREF.max(n))?
        }
        InitialConfig::Analytic { .. } => {
            return Err(Error::Domain("analytic data is only available in nonlinear mode".into()))
        }
    };
    Ok((k0, zero))
}

fn run_linear(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let grid = SpectralGrid::new(cfg.grid.n, cfg.grid.period)?;
    let (k0, k1) = linear_data(cfg, &grid)?;
    let mut sol = LinearSolution::from_fields(grid.clone(), &k0, &k1, cfg.physics.inv_we, cfg.physics.g)?;
    if let Some(w) = cfg.window {
        sol = sol.with_window(WindowSpec::new(w.radius, w.taper, cfg.grid.period)?)?;
    }
    let d = &cfg.diagnostics;
    let windowed = cfg.window.is_some();
    let capillary = cfg.mode == Mode::LinearCapillary;
    let vector_energy = |t: f64| {
        if capillary {
            sol.energy_gamma2(t)
        } else {
            sol.energy_gamma_g(t)
        }
    };
    let mut header: Vec<String> = ["t", "kappa_max"].map(String::from).to_vec();
    if d.energies {
        header.extend(["energy_linear", "energy_linear_drift"].map(String::from));
        if windowed {
            let name = if capillary { "gamma2" } else { "gamma_g" };
            header.extend([format!("energy_{name}"), format!("energy_{name}_drift")]);
        }
    }
    if windowed {
        header.push("boundary_mass".into());
    }
    header.extend(d.sobolev_orders.iter().map(|s| format!("h{s}_kappa")));
    header.extend(d.gain_k.iter().map(|k| format!("gain_{k}")));
    let mut series = Series::create(&dir.join("series.csv"), &header)?;
    let snapshots = dir.join("snapshots");

    let e_lin0 = sol.energy_linear(0.0);
    let e_vec0 = if d.energies && windowed {
        match vector_energy(0.0) {
            Ok(e) => e,
            Err(e) => {
                series.finish()?;
                return Ok((TerminationRecord::from_error(&e, 0, 0.0), None, Vec::new(), serde_json::Value::Null));
            }
        }
    } else {
        0.0
    };
    let rel = |e: f64, e0: f64| if e0 > 0.0 { (e - e0).abs() / e0 } else { (e - e0).abs() };
    let (mut lin_drift, mut vec_drift, mut mass) = (0.0f64, 0.0f64, 0.0f64);
    let mut snap = 0;
    let mut termination = TerminationRecord::completed(cfg.steps, cfg.steps as f64 * cfg.stepper.dt);
    for i in 0..=cfg.steps {
        let last = i == cfg.steps;
        let t = i as f64 * cfg.stepper.dt;
        let record = i % cfg.record_every == 0 || last;
        let snapshot = take_snapshot(cfg, i, last);
        if !(record || snapshot || windowed) {
            continue;
        }
        let sampled = (|| -> Result<()> {
            let m = if windowed { sol.check_window(t)? } else { 0.0 };
            mass = mass.max(m);
            if !(record || snapshot) {
                return Ok(());
            }
            let (kappa, kappa_t) = sol.propagate(t);
            if record {
                let mut row = vec![t, max_abs(&kappa)];
                if d.energies {
                    let e = sol.energy_linear(t);
                    lin_drift = lin_drift.max(rel(e, e_lin0));
                    row.extend([e, rel(e, e_lin0)]);
                    if windowed {
                        let e = vector_energy(t)?;
                        vec_drift = vec_drift.max(rel(e, e_vec0));
                        row.extend([e, rel(e, e_vec0)]);
                    }
                }
                if windowed {
                    row.push(m);
                }
                for &s in &d.sobolev_orders {
                    row.push(grid.sobolev_norm(&kappa, s)?);
                }
                for &k in &d.gain_k {
                    row.push(sol.weighted_gain_norm(t, k)?);
                }
                series.row(&row)?;
            }
            if snapshot {
                write_snapshot(&snapshots, snap, t, &["alpha", "kappa", "kappa_t"], &[grid.nodes(), &kappa, &kappa_t])?;
                snap += 1;
            }
            Ok(())
        })();
        if let Err(e) = sampled {
            if matches!(e, Error::Io(_)) {
                return Err(e);
            }
            termination = TerminationRecord::from_error(&e, i, t);
            break;
        }
    }
    series.finish()?;
    let mut checks = Vec::new();
    if d.energies {
        checks.push(Check::at_most("energy-linear-drift", lin_drift, 1e-12));
        if windowed {
            let name = if capillary { "energy-gamma2-drift" } else { "energy-gamma-g-drift" };
            checks.push(Check::at_most(name, vec_drift, 1e-6));
        }
    }
    let results = serde_json::json!({ "max_boundary_mass": finite(mass) });
    Ok((termination, None, checks, results))
}

fn operator_checks(seed: u64, cfg: &OperatorsConfig) -> Result<(Vec<Check>, serde_json::Value)> {
    let oracles = operator_oracles(seed, cfg.n_br, cfg.n_comm, cfg.perturbation)?;
    let bounds = operator_bounds(1..=cfg.bound_seeds, &cfg.bound_ns)?;
    let growth = |r: &[f64]| r[r.len() - 1] / r[0];
    let checks = vec![
        Check::at_most("birkhoff-rott-vs-pv", oracles.birkhoff_rott_vs_pv, 1e-6),
        Check::at_most("commutator-forms", oracles.commutator_forms, 1e-9),
        Check::at_most("identity-h-cos-dcos", oracles.identity_cos, 1e-10),
        Check::at_most("identity-h-sin-dcos", oracles.identity_sin, 1e-10),
        Check::at_most("commutator-growth", growth(&bounds.commutator), 1.1),
        Check::at_most("divided-difference-excess", bounds.divided_difference_excess, 1e-12),
        Check::at_most("smoothing-growth", growth(&bounds.smoothing), 1.1),
    ];
    let results = serde_json::json!({ "oracles": oracles, "bounds": bounds });
    Ok((checks, results))
}

/// Oracle and bound checks for one seed, written to `dir`.
pub fn operators_campaign(seed: u64, cfg: &OperatorsConfig, dir: &Path) -> Result<RunManifest> {
    let clock = Clock::start();
    let (checks, results) = operator_checks(seed, cfg)?;
    let echo = serde_json::json!({ "seed": seed, "operators": cfg });
    let m = clock.manifest("operators-test", echo, TerminationRecord::completed(0, 0.0), None, checks, results);
    m.write(dir)?;
    Ok(m)
}

/// Settings of the dispersion campaign.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DispersionSetup {
    pub n: usize,
    pub amplitude: f64,
    pub periods: f64,
    pub steps_per_period: usize,
    pub tolerance: f64,
}

impl Default for DispersionSetup {
    fn default() -> Self {
        Self {
            n: 256,
            amplitude: 1e-5,
            periods: 2.0,
            steps_per_period: 64,
            tolerance: 1e-3,
        }
    }
}

/// One manifest per mode `1..=kmax`, in `dir/k<mode>`.
pub fn dispersion_campaign(kmax: u32, setup: DispersionSetup, dir: &Path) -> Result<Vec<RunManifest>> {
    let params = Params::default();
    (1..=kmax)
        .map(|mode| {
            let clock = Clock::start();
            let echo = serde_json::json!({ "mode": mode, "setup": setup, "params": params });
            let sub = dir.join(format!("k{mode}"));
            let m = match dispersion_mode(mode, setup.n, setup.amplitude, params, setup.periods, setup.steps_per_period) {
                Ok(r) => {
                    let check = Check::at_most(format!("dispersion-k{mode}"), r.rel_err, setup.tolerance);
                    let results = serde_json::json!({ "dispersion": r });
                    clock.manifest("dispersion", echo, TerminationRecord::completed(0, 0.0), None, vec![check], results)
                }
                Err(e) => clock.manifest(
                    "dispersion",
                    echo,
                    TerminationRecord::from_error(&e, 0, 0.0),
                    None,
                    Vec::new(),
                    serde_json::json!({ "error": e.to_string() }),
                ),
            };
            m.write(&sub)?;
            Ok(m)
        })
        .collect()
}

/// Capillary and gravity refinement studies of the order-`k` gain norm.
pub fn gain_campaign(k: u32, ns: &[usize], dir: &Path) -> Result<RunManifest> {
    let clock = Clock::start();
    let setup = GainSetup::default();
    let capillary = gain_dichotomy(k, Params { inv_we: 2.0, gravity: 0.0 }, ns, &setup)?;
    let gravity = gain_dichotomy(k, Params { inv_we: 0.0, gravity: 1.0 }, ns, &setup)?;
    let min = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
    let max = |v: Vec<f64>| v.into_iter().fold(0.0f64, f64::max);
    let checks = vec![
        Check::at_least("capillary-unweighted-growth", min(capillary.growth()), 1.2),
        Check::at_most("capillary-weighted-change", max(capillary.weighted_change()), 1e-2),
        Check::at_least("gravity-unweighted-growth", min(gravity.growth()), 1.2),
        Check::at_least("gravity-weighted-change", min(gravity.weighted_change()), 1e-2),
    ];
    let echo = serde_json::json!({ "k": k, "ns": ns, "setup": setup });
    let results = serde_json::json!({ "capillary": capillary, "gravity": gravity });
    let m = clock.manifest("gain", echo, TerminationRecord::completed(0, 0.0), None, checks, results);
    m.write(dir)?;
    Ok(m)
}
