//! Run configuration: a TOML document with one table per concern. Every key
//! has a default except `mode` and `grid.n`; unknown keys are rejected.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::StepperConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Nonlinear,
    LinearCapillary,
    LinearGravity,
    OperatorsTest,
}

impl Mode {
    pub fn is_linear(self) -> bool {
        matches!(self, Self::LinearCapillary | Self::LinearGravity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    /// Run directory, relative to the output root.
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Steps of the nonlinear solver, or time samples of the linear modes.
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// A time-series row every this many steps.
    #[serde(default = "one")]
    pub record_every: usize,
    /// A field snapshot every this many steps; 0 keeps only the first and last.
    #[serde(default)]
    pub snapshot_every: usize,
    pub grid: GridConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub stepper: StepperConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowConfig>,
    #[serde(default)]
    pub operators: OperatorsConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default = "two_pi")]
    pub period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub inv_we: f64,
    pub g: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { inv_we: 2.0, g: 0.0 }
    }
}

/// Named initial-data generators, selected by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConfig {
    /// θ = 0 with uniform sheet strength.
    Flat {
        #[serde(default)]
        gamma: f64,
    },
    /// `θ = amplitude cos(kα)`, `γ = gamma_mean + gamma_amplitude sin(kα)`;
    /// the linear modes use the θ profile as κ₀.
    SingleMode {
        mode: u32,
        amplitude: f64,
        #[serde(default)]
        gamma_amplitude: f64,
        #[serde(default)]
        gamma_mean: f64,
    },
    /// `amplitude · exp(-α²/2w²) cos(carrier α)` as θ (nonlinear) or κ₀.
    GaussianPacket {
        #[serde(default = "one_f")]
        width: f64,
        #[serde(default)]
        carrier: f64,
        #[serde(default = "one_f")]
        amplitude: f64,
    },
    /// Seeded data with modal amplitudes `|k|^{-exponent-1/2}`. The linear
    /// modes localize it with a Gaussian of the given width.
    RoughTail {
        exponent: f64,
        amplitude: f64,
        #[serde(default)]
        gamma_amplitude: f64,
        #[serde(default = "default_tail_width")]
        width: f64,
    },
    /// `θ = ε(cos α + ½ sin 2α)`, `γ = ε(sin α + 0.3 cos 3α)`.
    Analytic { eps: f64 },
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self::Flat { gamma: 0.0 }
    }
}

impl InitialConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Flat { .. } => "flat",
            Self::SingleMode { .. } => "single-mode",
            Self::GaussianPacket { .. } => "gaussian-packet",
            Self::RoughTail { .. } => "rough-tail",
            Self::Analytic { .. } => "analytic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Energies: `E⁰_k` (nonlinear) or the linear and vector-field energies.
    pub energies: bool,
    /// Order `k` of `E⁰_k`.
    pub energy_order: usize,
    /// Mid-band spectral slopes of κ, r^κ, p_α, r^p.
    pub remainders: bool,
    /// Residuals of the curvature system from the last three steps.
    pub residuals: bool,
    /// Orders of the Sobolev norms of κ (and u in nonlinear runs).
    pub sobolev_orders: Vec<f64>,
    /// Orders of the weighted gain norms (linear modes, needs a window).
    pub gain_k: Vec<u32>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            energies: true,
            energy_order: 2,
            remainders: false,
            residuals: false,
            sobolev_orders: vec![0.0, 1.0],
            gain_k: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub radius: f64,
    pub taper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorsConfig {
    pub n_br: usize,
    pub n_comm: usize,
    pub perturbation: f64,
    /// Bound checks run over seeds `1..=bound_seeds`.
    pub bound_seeds: u64,
    pub bound_ns: Vec<usize>,
}

impl Default for OperatorsConfig {
    fn default() -> Self {
        Self {
            n_br: 512,
            n_comm: 256,
            perturbation: 0.2,
            bound_seeds: 100,
            bound_ns: vec![128, 256, 512],
        }
    }
}

fn default_output_dir() -> String {
    "run".into()
}

fn default_steps() -> usize {
    100
}

fn one() -> usize {
    1
}

fn one_f() -> f64 {
    1.0
}

fn two_pi() -> f64 {
    2.0 * PI
}

fn default_tail_width() -> f64 {
    3.0
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be non-negative, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if g.n < 8 || !g.n.is_multiple_of(2) {
            return Err(invalid("grid.n", format!("must be even and at least 8, got {}", g.n)));
        }
        positive("grid.period", g.period)?;
        non_negative("physics.inv_we", self.physics.inv_we)?;
        non_negative("physics.g", self.physics.g)?;
        if self.steps == 0 {
            return Err(invalid("steps", "must be positive"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be positive"));
        }
        let s = &self.stepper;
        positive("stepper.dt", s.dt)?;
        if !(s.cutoff_fraction > 0.0 && s.cutoff_fraction <= 1.0) {
            return Err(invalid("stepper.cutoff_fraction", "must lie in (0, 1]"));
        }
        positive("stepper.floor", s.floor)?;
        positive("stepper.gamma_t_tol", s.gamma_t_tol)?;
        if s.gamma_t_max_iter == 0 {
            return Err(invalid("stepper.gamma_t_max_iter", "must be positive"));
        }
        if !(s.q_min > 0.0 && s.q_min <= 1.0) {
            return Err(invalid("stepper.q_min", "must lie in (0, 1]"));
        }
        if self.diagnostics.sobolev_orders.iter().any(|s| !s.is_finite()) {
            return Err(invalid("diagnostics.sobolev_orders", "orders must be finite"));
        }
        if self.diagnostics.gain_k.contains(&0) {
            return Err(invalid("diagnostics.gain_k", "orders must be at least 1"));
        }
        if let Some(w) = self.window {
            positive("window.radius", w.radius)?;
            positive("window.taper", w.taper)?;
            if w.radius + w.taper >= g.period / 2.0 {
                return Err(invalid("window", "radius + taper must be below half the period"));
            }
        }
        self.validate_initial()?;
        match self.mode {
            Mode::Nonlinear => {
                if !self.diagnostics.gain_k.is_empty() {
                    return Err(invalid("diagnostics.gain_k", "only available in linear modes"));
                }
            }
            Mode::LinearCapillary => {
                if self.physics.inv_we <= 0.0 {
                    return Err(invalid("physics.inv_we", "linear-capillary needs surface tension"));
                }
            }
            Mode::LinearGravity => {
                if self.physics.inv_we != 0.0 || self.physics.g <= 0.0 {
                    return Err(invalid("physics", "linear-gravity needs inv_we = 0 and g > 0"));
                }
            }
            Mode::OperatorsTest => {
                let o = &self.operators;
                if o.bound_seeds == 0 {
                    return Err(invalid("operators.bound_seeds", "must be positive"));
                }
                if o.bound_ns.len() < 2 {
                    return Err(invalid("operators.bound_ns", "needs at least two resolutions"));
                }
                if !(o.perturbation >= 0.0 && o.perturbation < 1.0) {
                    return Err(invalid("operators.perturbation", "must lie in [0, 1)"));
                }
            }
        }
        if self.mode.is_linear() && !self.diagnostics.gain_k.is_empty() && self.window.is_none() {
            return Err(invalid("window", "gain norms need a window"));
        }
        Ok(())
    }

    fn validate_initial(&self) -> Result<(), ConfigError> {
        match self.initial {
            InitialConfig::Flat { gamma } => {
                if !gamma.is_finite() {
                    return Err(invalid("initial.gamma", "must be finite"));
                }
            }
            InitialConfig::SingleMode { mode, amplitude, gamma_amplitude, gamma_mean } => {
                if mode == 0 || mode as usize >= self.grid.n / 2 {
                    return Err(invalid("initial.mode", format!("must lie in 1..{}", self.grid.n / 2)));
                }
                if ![amplitude, gamma_amplitude, gamma_mean].iter().all(|v| v.is_finite()) {
                    return Err(invalid("initial", "amplitudes must be finite"));
                }
            }
            InitialConfig::GaussianPacket { width, carrier, amplitude } => {
                positive("initial.width", width)?;
                if !(carrier.is_finite() && amplitude.is_finite()) {
                    return Err(invalid("initial", "carrier and amplitude must be finite"));
                }
            }
            InitialConfig::RoughTail { exponent, amplitude, gamma_amplitude, width } => {
                positive("initial.exponent", exponent)?;
                positive("initial.width", width)?;
                if !(amplitude.is_finite() && gamma_amplitude.is_finite()) {
                    return Err(invalid("initial", "amplitudes must be finite"));
                }
            }
            InitialConfig::Analytic { eps } => {
                if self.mode != Mode::Nonlinear {
                    return Err(invalid("initial.kind", "analytic data is only available in nonlinear mode"));
                }
                non_negative("initial.eps", eps)?;
            }
        }
        Ok(())
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Fully-defaulted TOML form of a configuration.
pub fn emit_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configuration serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "mode = \"nonlinear\"\n[grid]\nn = 64\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.stepper.cutoff_fraction, 2.0 / 3.0);
        assert_eq!(cfg.stepper.floor, 1e-13);
        assert_eq!(cfg.stepper.q_min, 0.5);
        assert_eq!(cfg.grid.period, 2.0 * PI);
        assert_eq!(cfg.initial, InitialConfig::Flat { gamma: 0.0 });
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(&format!("{MINIMAL}[stepper]\ndtt = 0.1\n")).unwrap_err();
        assert!(err.to_string().contains("dtt"), "{err}");
        let err = parse_config(&format!("colour = 1\n{MINIMAL}")).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let err = parse_config(&format!("{MINIMAL}[initial]\nkind = \"flat\"\ngama = 1.0\n")).unwrap_err();
        assert!(err.to_string().contains("gama"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_config("mode = \"nonlinear\"\n[grid]\nn = = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn non_positive_dt_rejected() {
        for dt in ["0.0", "-1e-3"] {
            let err = parse_config(&format!("{MINIMAL}[stepper]\ndt = {dt}\n")).unwrap_err();
            assert!(matches!(err, ConfigError::Invalid { field: "stepper.dt", .. }), "{err}");
        }
    }

    #[test]
    fn mode_consistency() {
        let cap = "mode = \"linear-gravity\"\n[grid]\nn = 64\n";
        assert!(parse_config(cap).is_err());
        let ok = format!("{cap}[physics]\ninv_we = 0.0\ng = 1.0\n");
        assert!(parse_config(&ok).is_ok());
        let gain = format!("{ok}[diagnostics]\ngain_k = [1]\n");
        assert!(matches!(parse_config(&gain), Err(ConfigError::Invalid { field: "window", .. })));
    }

    #[test]
    fn emit_round_trip() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
        cfg.initial = InitialConfig::RoughTail {
            exponent: 4.5,
            amplitude: 0.3,
            gamma_amplitude: 0.1,
            width: 2.0,
        };
        cfg.mode = Mode::LinearCapillary;
        cfg.window = Some(WindowConfig { radius: 2.0, taper: 1.0 / 3.0 });
        cfg.diagnostics.gain_k = vec![1, 2];
        cfg.stepper.dt = 0.1 + 0.2;
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
    }
}
