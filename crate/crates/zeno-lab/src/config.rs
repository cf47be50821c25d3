//! Experiment configuration: a flat, human-editable TOML schema with strict
//! validation, plus the parameter bundles behind the `figure` presets.
//!
//! Schema (all frequencies/rates angular, times in 1/Δ when Δ = 1):
//!
//! ```toml
//! # model — required
//! delta  = 1.0
//! omega0 = 1.0
//! g      = 0.5
//! gamma  = 0.1
//! variant = "rabi"            # "rabi" | "jc" (default "rabi")
//!
//! # initial state — required: preset name or [re α, im α, re β, im β]
//! state = "e"                 # "e", "g", "3-4", "4-3", "0.8-0.6", "3-4-phase-pi8"
//!
//! # protocol — tau and n required
//! tau = 1.0
//! n = 16
//! measurement = "selective"   # | "nonselective" | "nonselective-factorized" | "none"
//! pre_evolution_time = 0.0
//!
//! # integrator / truncation (defaults shown)
//! steps_per_interval = 10
//! step_hint = 0.05            # optional absolute cap on the step
//! convergence_tol = 1e-6
//! n_max = 12
//! adaptive_truncation = true
//!
//! # sweep grid (sweep-tau only; defaults shown, scaled by 1/delta)
//! tau_min = 0.05
//! tau_max = 6.0
//! tau_points = 60
//! tau_scale = "log"           # "log" | "linear"
//! n_list = [1, 2, 4, 8, 16]
//!
//! # rate-equation comparison
//! rate_clock = "reset"        # "reset" | "continuous"
//!
//! # output
//! out_dir = "out"
//! format = "csv"              # "csv" | "json"
//! ```
//!
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::analytic::RateClock;
use crate::dynamics::{
    IntegratorConfig, MeasurementKind, RunConfig, TruncationConfig, ZenoProtocol,
};
use crate::error::{Error, Result};
use crate::model::{ModelParams, QubitState, Variant};
use crate::numeric::{linspace, logspace};

/// Initial qubit state: a named preset or explicit complex amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    /// (Re α, Im α, Re β, Im β).
    Amplitudes([f64; 4]),
}

impl StateSpec {
    pub fn resolve(&self) -> Result<QubitState> {
        use num_complex::Complex64;
        use std::f64::consts::PI;
        match self {
            StateSpec::Named(name) => match name.as_str() {
                "e" => Ok(QubitState::excited()),
                "g" => Ok(QubitState::ground()),
                "3-4" => QubitState::from_re(0.6, 0.8),
                "4-3" => QubitState::from_re(0.8, 0.6),
                "0.8-0.6" => QubitState::from_re(0.8, 0.6),
                "3-4-phase-pi8" => QubitState::new(
                    Complex64::new(0.6, 0.0),
                    Complex64::from_polar(0.8, PI / 8.0),
                ),
                other => Err(Error::Config(format!(
                    "unknown state preset {other:?}; known presets: \
                     \"e\", \"g\", \"3-4\", \"4-3\", \"0.8-0.6\", \"3-4-phase-pi8\", \
                     or give [re_alpha, im_alpha, re_beta, im_beta]"
                ))),
            },
            StateSpec::Amplitudes([ar, ai, br, bi]) => {
                let alpha = num_complex::Complex64::new(*ar, *ai);
                let beta = num_complex::Complex64::new(*br, *bi);
                let norm = alpha.norm_sqr() + beta.norm_sqr();
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "state amplitudes not normalized: |alpha|^2 + |beta|^2 = {norm}"
                    )));
                }
                // Renormalize rounding-level residue so downstream invariants hold.
                let scale = norm.sqrt();
                QubitState::new(alpha / scale, beta / scale)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementName {
    Selective,
    Nonselective,
    NonselectiveFactorized,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauScale {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

fn default_variant() -> Variant {
    Variant::Rabi
}
fn default_measurement() -> MeasurementName {
    MeasurementName::Selective
}
fn default_steps_per_interval() -> usize {
    10
}
fn default_convergence_tol() -> f64 {
    1e-6
}
fn default_n_max() -> usize {
    12
}
fn default_true() -> bool {
    true
}
fn default_tau_points() -> usize {
    60
}
fn default_tau_scale() -> TauScale {
    TauScale::Log
}
fn default_n_list() -> Vec<usize> {
    vec![1, 2, 4, 8, 16]
}
fn default_out_dir() -> String {
    "out".into()
}
fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

/// One experiment, fully specified. Parsed from flat TOML with unknown keys
/// rejected; re-serializes to an equivalent canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub delta: f64,
    pub omega0: f64,
    pub g: f64,
    pub gamma: f64,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    pub state: StateSpec,
    pub tau: f64,
    pub n: usize,
    #[serde(default = "default_measurement")]
    pub measurement: MeasurementName,
    #[serde(default)]
    pub pre_evolution_time: f64,
    #[serde(default = "default_steps_per_interval")]
    pub steps_per_interval: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_hint: Option<f64>,
    #[serde(default = "default_convergence_tol")]
    pub convergence_tol: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_true")]
    pub adaptive_truncation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[serde(default = "default_tau_points")]
    pub tau_points: usize,
    #[serde(default = "default_tau_scale")]
    pub tau_scale: TauScale,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub rate_clock: RateClock,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    /// Parse and validate a TOML document.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model_params()?;
        self.state.resolve()?;
        self.protocol()?;
        self.run_config()?.integrator.validate()?;
        if self.tau_points < 2 {
            return Err(Error::Config("tau_points must be >= 2".into()));
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(Error::Config("n_list entries must be >= 1".into()));
        }
        if let (Some(lo), Some(hi)) = (self.tau_min, self.tau_max) {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::Config("need 0 < tau_min < tau_max".into()));
            }
        }
        Ok(())
    }

    /// Canonical serialized form: all defaults materialized, keys in schema
    /// order. Parsing this text reproduces the config exactly.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.delta, self.omega0, self.g, self.gamma, self.variant)
    }

    pub fn qubit_state(&self) -> Result<QubitState> {
        self.state.resolve()
    }

    pub fn measurement_kind(&self) -> Result<MeasurementKind> {
        Ok(match self.measurement {
            MeasurementName::Selective => MeasurementKind::Selective(self.qubit_state()?),
            MeasurementName::Nonselective => MeasurementKind::Nonselective,
            MeasurementName::NonselectiveFactorized => MeasurementKind::NonselectiveFactorized,
            MeasurementName::None => MeasurementKind::None,
        })
    }

    pub fn protocol(&self) -> Result<ZenoProtocol> {
        ZenoProtocol::new(self.tau, self.n, self.measurement_kind()?)?
            .with_pre_evolution(self.pre_evolution_time)
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let integrator = IntegratorConfig {
            steps_per_interval: self.steps_per_interval,
            step_hint: self.step_hint.unwrap_or(f64::INFINITY),
            convergence_tol: self.convergence_tol,
            ..IntegratorConfig::default()
        };
        integrator.validate()?;
        Ok(RunConfig {
            integrator,
            truncation: TruncationConfig {
                n_max: self.n_max,
                adaptive: self.adaptive_truncation,
                ..TruncationConfig::default()
            },
        })
    }

    /// The τ grid for sweep commands; bounds default to [0.05, 6]/Δ.
    pub fn tau_grid(&self) -> Vec<f64> {
        let lo = self.tau_min.unwrap_or(0.05 / self.delta);
        let hi = self.tau_max.unwrap_or(6.0 / self.delta);
        match self.tau_scale {
            TauScale::Log => logspace(lo, hi, self.tau_points),
            TauScale::Linear => linspace(lo, hi, self.tau_points),
        }
    }
}

/// Named figure presets: the parameter bundles used by the `figure`
/// subcommand, re-derived from model parameters only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl std::str::FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(FigureId::Fig1),
            "fig2" => Ok(FigureId::Fig2),
            "fig3" => Ok(FigureId::Fig3),
            "fig4" => Ok(FigureId::Fig4),
            "fig5" => Ok(FigureId::Fig5),
            "fig6" => Ok(FigureId::Fig6),
            other => Err(Error::Config(format!(
                "unknown figure {other:?}; expected fig1..fig6"
            ))),
        }
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
        };
        f.write_str(s)
    }
}

/// Parameter bundles for the figure presets (Δ = ω₀ = 1 throughout).
pub mod presets {
    use super::*;

    pub fn base_params(variant: Variant, g: f64, gamma: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, g, gamma, variant).expect("preset parameters are valid")
    }

    /// Exactness check of the rotating-wave survival: ψ = |e⟩, curves over
    /// (g, Γ)/Δ ∈ {0.06, 0.6} × {0.03, 0.3}, t ∈ [0, 30]/Δ.
    pub fn fig1_pairs() -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        for &g in &[0.06, 0.6] {
            for &gamma in &[0.03, 0.3] {
                v.push((g, gamma));
            }
        }
        v
    }
    pub const FIG1_T_MAX: f64 = 30.0;
    pub const FIG1_SAMPLE_TAU: f64 = 0.05;

    /// Superposition product-law comparison: ψ = 0.8|e⟩ + 0.6|g⟩, Δτ = 0.1,
    /// g ∈ {0.06, 0.6} with Γ ∈ {0.03, 0.3} (width not fixed by the source
    /// figure; this grid matches the weak/strong discussion).
    pub fn fig2_pairs() -> Vec<(f64, f64)> {
        fig1_pairs()
    }
    pub const FIG2_TAU: f64 = 0.1;
    pub const FIG2_N: usize = 250;
    pub fn fig2_state() -> QubitState {
        QubitState::from_re(0.8, 0.6).expect("normalized")
    }

    /// Non-selective monitoring from the ground state: Γ = 0.03Δ, relaxation
    /// to 8π/Δ then measurements every π/(2Δ). Coupling strengths are an
    /// artifact choice (weak/moderate).
    pub const FIG3_GAMMA: f64 = 0.03;
    pub const FIG3_G_WEAK: f64 = 0.05;
    pub const FIG3_G_MODERATE: f64 = 0.3;
    pub fn fig3_schedule() -> crate::analytic::MonitoringSchedule {
        crate::analytic::MonitoringSchedule {
            relax_time: 8.0 * std::f64::consts::PI,
            tau: 0.5 * std::f64::consts::PI,
            n_meas: 40,
        }
    }

    /// Scaled per-interval rates vs the continuous limit:
    /// ψ = (3/5)|e⟩ + (4/5)|g⟩, Γ/Δ ∈ {0.1, 0.3} × g/Δ ∈ {0.1, 0.8},
    /// τ ∈ {1, 0.5, 0.1}/Δ, t up to 20/Δ.
    pub fn fig4_pairs() -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        for &gamma in &[0.1, 0.3] {
            for &g in &[0.1, 0.8] {
                v.push((g, gamma));
            }
        }
        v
    }
    pub fn fig4_taus() -> [f64; 3] {
        [1.0, 0.5, 0.1]
    }
    pub const FIG4_T_MAX: f64 = 20.0;
    pub fn fig4_state() -> QubitState {
        QubitState::from_re(0.6, 0.8).expect("normalized")
    }

    /// Continuous-limit w(t) vs the bath-reset constant for four initial
    /// states at g = 0.5Δ, Γ = 0.1Δ.
    pub fn fig5_states() -> Vec<(&'static str, QubitState)> {
        use num_complex::Complex64;
        use std::f64::consts::PI;
        vec![
            ("3-4", QubitState::from_re(0.6, 0.8).unwrap()),
            (
                "3-4-phase-pi8",
                QubitState::new(
                    Complex64::new(0.6, 0.0),
                    Complex64::from_polar(0.8, PI / 8.0),
                )
                .unwrap(),
            ),
            ("4-3", QubitState::from_re(0.8, 0.6).unwrap()),
            ("e", QubitState::excited()),
        ]
    }
    pub const FIG5_G: f64 = 0.5;
    pub const FIG5_GAMMA: f64 = 0.1;
    pub const FIG5_TAU_COARSE: f64 = 1.0;
    pub const FIG5_TAU_FINE: f64 = 0.01;
    pub const FIG5_T_MAX: f64 = 20.0;

    /// Total-average-rate sweeps: ψ = |e⟩, Γ/Δ ∈ {0.1, 0.3} ×
    /// g/Δ ∈ {0.2, 0.5, 0.9}, N ∈ {1, 2, 4, 8, 16}, 60 log-spaced τ in
    /// [0.05, 6]/Δ.
    pub fn fig6_panels() -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        for &gamma in &[0.1, 0.3] {
            for &g in &[0.2, 0.5, 0.9] {
                v.push((g, gamma));
            }
        }
        v
    }
    pub fn fig6_n_list() -> Vec<usize> {
        vec![1, 2, 4, 8, 16]
    }
}
