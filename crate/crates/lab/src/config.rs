//! Flat TOML experiment configuration with `key=value` overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tlsim_core::ModelParams;

use crate::LabError;

/// Environment variable overriding `output_dir`.
pub const OUT_DIR_ENV: &str = "TLSIM_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Bands,
    StrongDynamics,
    EnsembleScaling,
    Decoherence,
    Amplification,
    Cat,
    WignerMap,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Spectrum,
        Experiment::Bands,
        Experiment::StrongDynamics,
        Experiment::EnsembleScaling,
        Experiment::Decoherence,
        Experiment::Amplification,
        Experiment::Cat,
        Experiment::WignerMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Bands => "bands",
            Experiment::StrongDynamics => "strong-dynamics",
            Experiment::EnsembleScaling => "ensemble-scaling",
            Experiment::Decoherence => "decoherence",
            Experiment::Amplification => "amplification",
            Experiment::Cat => "cat",
            Experiment::WignerMap => "wigner-map",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial state for `strong-dynamics`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// `|initial_n⟩|↑⟩`.
    BareUp,
    /// `|initial_n⟩|↓⟩`.
    BareDown,
    /// `|v_{n,+1}⟩`.
    DressedPlus,
    /// `|v_{n,−1}⟩`.
    DressedMinus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,

    pub omega: f64,
    pub g: f64,
    pub delta: f64,
    pub n_atoms: usize,
    pub j_coupling: f64,
    pub omega0: f64,
    pub delta_x: Vec<f64>,
    pub delta_z: Vec<f64>,

    /// Fock cutoff.
    pub n_max: usize,
    /// Band cutoff for the amplitude equations and band tables.
    pub band_n_max: usize,
    pub tolerance: f64,
    pub dimension_cap: usize,

    pub t_start: f64,
    pub t_final: f64,
    pub t_steps: usize,

    pub g_over_omega_min: f64,
    pub g_over_omega_max: f64,
    pub g_over_omega_steps: usize,

    pub initial: InitialState,
    pub initial_n: usize,
    /// Largest `n` written to the dynamics table.
    pub output_n_max: usize,
    /// Compare against brute-force propagation where available.
    pub oracle: bool,

    pub sizes: Vec<usize>,
    pub beta_sq: f64,
    pub random_spec: bool,
    /// `J·T` for the decoherence averaging window.
    pub jt: f64,

    pub alpha: f64,
    pub phi: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,

    pub output_dir: PathBuf,
    pub seed: u64,
    pub workers: usize,
    pub plots: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Bands,
            omega: 1.0,
            g: 0.5,
            delta: 0.1,
            n_atoms: 1,
            j_coupling: 1.0,
            omega0: 0.0,
            delta_x: Vec::new(),
            delta_z: Vec::new(),
            n_max: 40,
            band_n_max: 10,
            tolerance: 1e-8,
            dimension_cap: tlsim_core::DEFAULT_DIMENSION_CAP,
            t_start: 0.0,
            t_final: 20.0,
            t_steps: 201,
            g_over_omega_min: 0.0,
            g_over_omega_max: 1.0,
            g_over_omega_steps: 101,
            initial: InitialState::BareUp,
            initial_n: 0,
            output_n_max: 5,
            oracle: false,
            sizes: vec![1, 2, 4, 8],
            beta_sq: 0.75,
            random_spec: false,
            jt: 1.0,
            alpha: 1.5,
            phi: std::f64::consts::FRAC_PI_4,
            x_min: -10.0,
            x_max: 10.0,
            p_min: -10.0,
            p_max: 10.0,
            nx: 128,
            np: 128,
            output_dir: PathBuf::from("out"),
            seed: 0,
            workers: 1,
            plots: false,
        }
    }
}

impl ExperimentConfig {
    /// Reads `path`, applies `overrides` (`key=value`, TOML syntax for the
    /// value, bare words taken as strings) and the output-directory
    /// environment override, then validates.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, LabError> {
        let mut table: toml::Table = text.parse().map_err(|e| LabError::Config(format!("config parse error: {e}")))?;
        for item in overrides {
            let (key, value) = parse_override(item)?;
            table.insert(key, value);
        }
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                table.insert("output_dir".into(), toml::Value::String(dir));
            }
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            omega: self.omega,
            g: self.g,
            delta: self.delta,
            n_atoms: self.n_atoms,
            j_coupling: self.j_coupling,
            omega0: self.omega0,
            delta_x: self.delta_x.clone(),
            delta_z: self.delta_z.clone(),
        }
    }

    /// Evenly spaced sample times from `t_start` to `t_final`.
    pub fn sample_times(&self) -> Vec<f64> {
        linspace(self.t_start, self.t_final, self.t_steps)
    }

    fn check(&self) -> Result<(), LabError> {
        self.model_params().validate().map_err(|e| LabError::Config(e.to_string()))?;
        let bad = |msg: &str| Err(LabError::Config(msg.to_string()));
        if self.n_max < 1 {
            return bad("n_max must be >= 1");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be > 0");
        }
        if self.t_steps < 1 || self.t_final < self.t_start || self.t_start < 0.0 {
            return bad("need t_steps >= 1 and 0 <= t_start <= t_final");
        }
        if self.g_over_omega_steps < 1 || self.g_over_omega_max < self.g_over_omega_min || self.g_over_omega_min < 0.0 {
            return bad("need g_over_omega_steps >= 1 and 0 <= g_over_omega_min <= g_over_omega_max");
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sizes must be a non-empty list of positive integers");
        }
        if !(0.0..=1.0).contains(&self.beta_sq) {
            return bad("beta_sq must lie in [0, 1]");
        }
        if !(self.jt > 0.0) {
            return bad("jt must be > 0");
        }
        if self.workers < 1 {
            return bad("workers must be >= 1");
        }
        if !(self.x_max > self.x_min && self.p_max > self.p_min) {
            return bad("phase-space ranges must be increasing");
        }
        Ok(())
    }
}

fn parse_override(item: &str) -> Result<(String, toml::Value), LabError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| LabError::Config(format!("override `{item}` is not key=value")))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = match toml::Value::from_str(raw) {
        Ok(v) => v,
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((key, value))
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { b } else { a + h * i as f64 }).collect()
}
