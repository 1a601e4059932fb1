//! Scenario configuration: one JSON file holding the family plus per-command
//! parameters. Flag overrides (`--R`, `--N`, `--grid`, `--out`, `--seed`)
//! are applied after parsing, so a scenario file doubles as a reproducible
//! fixture.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use davenport_core::eval::GridSpec;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Family config in the library's JSON wire form.
    pub family: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub eval: Option<EvalConfig>,
    #[serde(default)]
    pub jumps: Option<JumpsConfig>,
    #[serde(default)]
    pub exponent: Option<ExponentConfig>,
    #[serde(default)]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default)]
    pub sobolev: Option<SobolevConfig>,
}

fn default_out_dir() -> String {
    "out".to_string()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalConfig {
    pub n_trunc: f64,
    pub grid: GridSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JumpsConfig {
    pub q_radius: f64,
    pub l_max: u64,
    /// θₐ shell override; default is the outer shell `[√R, R)`.
    #[serde(default)]
    pub theta_shell: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentConfig {
    pub points: Vec<Vec<f64>>,
    pub r0: f64,
    pub r: f64,
    #[serde(default)]
    pub with_empirical: bool,
    /// Jump-map shell for the upper bound.
    #[serde(default = "default_ub_r0")]
    pub ub_r0: f64,
    #[serde(default = "default_ub_r")]
    pub ub_r: f64,
    #[serde(default = "default_l_max")]
    pub l_max: u64,
    /// Dyadic scales for the empirical oracle (radii, decreasing).
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    #[serde(default)]
    pub detrend_linear: bool,
}

fn default_ub_r0() -> f64 {
    32.0
}
fn default_ub_r() -> f64 {
    4096.0
}
fn default_l_max() -> u64 {
    2000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub grid: GridSpec,
    pub r0: f64,
    pub r: f64,
    #[serde(default = "default_ub_r")]
    pub ub_r: f64,
    #[serde(default = "default_l_max")]
    pub l_max: u64,
    #[serde(default)]
    pub h_bin_width: Option<f64>,
    #[serde(default)]
    pub box_scales: Option<Vec<usize>>,
    /// "formula" (default) or "oscillation".
    #[serde(default)]
    pub method: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SobolevConfig {
    pub gamma: f64,
    pub d: usize,
    /// Compute a truncated `H^s_δ` norm of the family's Fourier map.
    #[serde(default)]
    pub norm: Option<NormConfig>,
    /// Verify the coefficient bound up to `|m| ≤ m_cap`.
    #[serde(default)]
    pub bound_check_m_cap: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormConfig {
    pub s: f64,
    #[serde(default)]
    pub delta: f64,
    pub m_radius: f64,
    #[serde(default = "default_l_max")]
    pub trunc: u64,
}
