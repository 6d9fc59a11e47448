//! Scenario configs. Every key carries its unit in the name; unknown keys
//! are rejected at every level.

use std::collections::BTreeMap;
use std::path::Path;

use relaxkin::bloch_redfield::{Beta, SpectralDensity};
use relaxkin::radical_pair::Variant;
use relaxkin::stochastic::NoiseKind;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    ThreeState,
    RadicalPair,
    Radii,
    Oracle,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Time-series columns to keep, by name. All of them when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub parameters: Value,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A previous `summary.json`; only its `inputs` block is used.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct SummaryEnvelope {
    inputs: ScenarioConfig,
    outputs: Value,
    #[serde(default)]
    flags: Value,
    validity: Value,
    wall_time_s: Value,
}

pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::parse(e.to_string()))?;
    let is_summary = value.get("inputs").is_some() && value.get("scenario").is_none();
    if is_summary {
        let env: SummaryEnvelope = serde_json::from_value(value).map_err(|e| CliError::parse(e.to_string()))?;
        Ok(env.inputs)
    } else {
        serde_json::from_value(value).map_err(|e| CliError::parse(e.to_string()))
    }
}

pub fn parameters<T: serde::de::DeserializeOwned>(v: &Value) -> Result<T, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::parse(format!("parameters: {e}")))
}

/// Inverse temperature: seconds, or `"infinite"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaInput {
    Finite(f64),
    Named(String),
}

impl BetaInput {
    pub fn resolve(&self) -> Result<Beta, CliError> {
        match self {
            Self::Finite(b) => Beta::new(*b).map_err(CliError::from),
            Self::Named(s) if s == "infinite" => Ok(Beta::Infinite),
            Self::Named(s) => Err(CliError::parse(format!("beta_s must be a number or \"infinite\", got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectrumInput {
    Lorentzian { amplitude_rad2_per_s2: f64, tau_c_s: f64 },
    WhiteNoise { level_per_s: f64 },
    Tabulated { omega_rad_per_s: Vec<f64>, values_per_s: Vec<f64> },
}

impl SpectrumInput {
    pub fn build(&self) -> Result<SpectralDensity, CliError> {
        let d = match self {
            Self::Lorentzian { amplitude_rad2_per_s2, tau_c_s } => {
                SpectralDensity::lorentzian(*amplitude_rad2_per_s2, *tau_c_s)
            }
            Self::WhiteNoise { level_per_s } => SpectralDensity::white_noise(*level_per_s),
            Self::Tabulated { omega_rad_per_s, values_per_s } => {
                SpectralDensity::tabulated(omega_rad_per_s.clone(), values_per_s.clone())
            }
        };
        d.map_err(CliError::from)
    }

    /// Correlation time implied by the spectrum, if it has one.
    pub fn tau_c(&self) -> Option<f64> {
        match self {
            Self::Lorentzian { tau_c_s, .. } => Some(*tau_c_s),
            Self::WhiteNoise { .. } => Some(0.0),
            Self::Tabulated { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThreeStateInitial {
    #[serde(rename = "0")]
    Zero,
    #[default]
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    /// `(|0⟩ + |1⟩)/√2`.
    #[serde(rename = "0+1")]
    ZeroPlusOne,
}

fn default_n_times() -> usize {
    101
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeStateParams {
    #[serde(default)]
    pub omega0_rad_per_s: f64,
    pub omega_s_rad_per_s: f64,
    pub beta_s: BetaInput,
    pub spectrum: SpectrumInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splitting_spectrum: Option<SpectrumInput>,
    #[serde(default)]
    pub isotropic: bool,
    #[serde(default)]
    pub initial_state: ThreeStateInitial,
    pub t_end_s: f64,
    #[serde(default = "default_n_times")]
    pub n_times: usize,
    /// Needed for the validity ratio when the spectrum is tabulated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_c_s: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairInitial {
    #[default]
    Singlet,
    TripletZero,
    /// `(|S⟩ + |T0⟩)/√2`.
    SingletTripletZero,
    /// Equal mixture of the three triplets.
    TripletMixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct RadicalPairParams {
    pub variant: Variant,
    #[serde(default)]
    pub kappa_S_per_s: f64,
    #[serde(default)]
    pub kappa_T_per_s: f64,
    /// Generalized and dephasing-only variants only.
    #[serde(default)]
    pub kappa_ST_per_s: f64,
    #[serde(default)]
    pub omega_mean_rad_per_s: f64,
    #[serde(default)]
    pub delta_omega_rad_per_s: f64,
    #[serde(default)]
    pub exchange_rad_per_s: f64,
    pub tau_c_s: f64,
    #[serde(default)]
    pub initial_state: PairInitial,
    /// Defaults to five times the slowest nonzero rate element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end_s: Option<f64>,
    #[serde(default = "default_n_times")]
    pub n_times: usize,
    /// ξ is reported when all three are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub D_cm2_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub Q_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_l_cm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct RadiiParams {
    pub d_cm: f64,
    pub D_cm2_per_s: f64,
    pub alpha_per_cm: f64,
    pub J0_per_s: f64,
    pub tau_c_s: f64,
    /// Amplitude of short-range motion.
    pub lambda_cm: f64,
    /// Reactive-zone width; with both contact rates enables the reaction radii.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa0_S_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa0_T_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub Q_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub Z_cm3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime_tolerance: Option<f64>,
}

fn default_n_samples() -> usize {
    64
}
fn default_n_batches() -> usize {
    100
}
fn default_n_traj() -> usize {
    10_000
}
fn default_n_bootstrap() -> usize {
    relaxkin::stochastic::DEFAULT_BOOTSTRAP
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleParams {
    pub noise_kind: NoiseKind,
    pub variance_rad2_per_s2: f64,
    pub tau_c_s: f64,
    #[serde(default)]
    pub omega0_rad_per_s: f64,
    pub omega_s_rad_per_s: f64,
    /// Defaults to `τ_c/20`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_s: Option<f64>,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    /// Defaults to `100τ_c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_total_s: Option<f64>,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default = "default_n_batches")]
    pub n_batches: usize,
    #[serde(default = "default_n_bootstrap")]
    pub n_bootstrap: usize,
    #[serde(default = "default_true")]
    pub closed_loop: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    /// Radical-pair parameters shared by every grid point.
    pub base: serde_json::Map<String, Value>,
    /// Up to three keys of `base`, each with its list of values.
    pub grid: BTreeMap<String, Vec<Value>>,
}
