use std::path::Path;

use serde::{Deserialize, Serialize};

use noma_pairing::fnoma::{db_to_linear, PairingConfig};
use noma_pairing::montecarlo::Event;

use crate::CliError;

/// Quantity evaluated along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    FnomaSumWorse,
    FnomaGapBelow,
    FnomaUserMGains,
    FnomaUserNGains,
    CrnomaOutage,
    CrnomaErgodic,
}

impl MetricName {
    pub fn event(self) -> Event {
        match self {
            MetricName::FnomaSumWorse => Event::FNomaSumWorse,
            MetricName::FnomaGapBelow => Event::FNomaGapBelow,
            MetricName::FnomaUserMGains => Event::UserMGains,
            MetricName::FnomaUserNGains => Event::UserNGains,
            MetricName::CrnomaOutage => Event::CrOutage,
            MetricName::CrnomaErgodic => Event::CrErgodicRate,
        }
    }
}

/// The swept variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    #[default]
    RhoDb,
    #[serde(rename = "m")]
    Weak,
    #[serde(rename = "n")]
    Strong,
    #[serde(rename = "R_gap")]
    RGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn default_true() -> bool {
    true
}
fn default_users() -> usize {
    5
}
fn default_one() -> usize {
    1
}
fn default_two() -> usize {
    2
}
fn default_an2() -> f64 {
    0.2
}
fn default_rho_db() -> f64 {
    20.0
}
fn default_stop_db() -> f64 {
    40.0
}
fn default_step_db() -> f64 {
    5.0
}
fn default_i() -> f64 {
    5.0
}
fn default_rate() -> f64 {
    1.0
}
fn default_trials() -> u64 {
    1_000_000
}
fn default_seed() -> u64 {
    1
}

/// One curve: a flat JSON object.
///
/// The `version`, `timestamp` and `rng` keys are written into run metadata and
/// ignored on input, so a metadata sidecar can be fed back as a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub name: String,
    pub metric: MetricName,
    #[serde(default)]
    pub sweep: SweepVar,
    #[serde(default)]
    pub rho_start_db: f64,
    #[serde(default = "default_stop_db")]
    pub rho_stop_db: f64,
    #[serde(default = "default_step_db")]
    pub rho_step_db: f64,
    /// Grid for `m`, `n` and `R_gap` sweeps.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(rename = "M", default = "default_users")]
    pub users: usize,
    #[serde(default = "default_one")]
    pub m: usize,
    #[serde(default = "default_two")]
    pub n: usize,
    #[serde(default = "default_an2")]
    pub an2: f64,
    /// Fixed SNR for sweeps over other variables.
    #[serde(default = "default_rho_db")]
    pub rho_db: f64,
    #[serde(rename = "I", default = "default_i")]
    pub sinr_target: f64,
    #[serde(default = "default_rate")]
    pub rate_bpcu: f64,
    #[serde(rename = "R_gap", default)]
    pub rate_gap: f64,
    /// Monte Carlo trials per point; 0 disables simulation.
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub analytic: bool,
    #[serde(default = "default_true")]
    pub highsnr: bool,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
}

impl SweepSpec {
    pub fn new(metric: MetricName) -> Self {
        serde_json::from_value(serde_json::json!({ "metric": metric }))
            .expect("defaults are complete")
    }

    /// Grid of sweep values, in order.
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        match self.sweep {
            SweepVar::RhoDb => {
                let (start, stop, step) = (self.rho_start_db, self.rho_stop_db, self.rho_step_db);
                if !(start.is_finite() && stop.is_finite()) || start > stop {
                    return Err(CliError::Spec(format!(
                        "dB range needs start <= stop, got {start}..{stop}"
                    )));
                }
                if !(step > 0.0) {
                    return Err(CliError::Spec(format!("dB step must be > 0, got {step}")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..count).map(|i| start + i as f64 * step).collect())
            }
            _ if self.values.is_empty() => Err(CliError::Spec(format!(
                "sweep over {:?} needs a non-empty `values` list",
                self.sweep
            ))),
            SweepVar::Weak | SweepVar::Strong => {
                for v in &self.values {
                    if *v < 1.0 || v.fract() != 0.0 {
                        return Err(CliError::Spec(format!("user index {v} is not a positive integer")));
                    }
                }
                Ok(self.values.clone())
            }
            SweepVar::RGap => Ok(self.values.clone()),
        }
    }

    /// Scenario at sweep value `x`.
    pub fn config_at(&self, x: f64) -> PairingConfig {
        let mut cfg = PairingConfig {
            users: self.users,
            weak: self.m,
            strong: self.n,
            rho: db_to_linear(self.rho_db),
            a_n_sq: self.an2,
            rate_gap: self.rate_gap,
            rate_target: self.rate_bpcu,
            sinr_target: self.sinr_target,
        };
        match self.sweep {
            SweepVar::RhoDb => cfg.rho = db_to_linear(x),
            SweepVar::Weak => cfg.weak = x as usize,
            SweepVar::Strong => cfg.strong = x as usize,
            SweepVar::RGap => cfg.rate_gap = x,
        }
        cfg
    }
}

/// Names of the shipped presets.
pub const PRESETS: [&str; 8] = [
    "fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5", "fig6a", "fig6b",
];

fn preset_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1a" => include_str!("../presets/fig1a.json"),
        "fig1b" => include_str!("../presets/fig1b.json"),
        "fig2" => include_str!("../presets/fig2.json"),
        "fig3" => include_str!("../presets/fig3.json"),
        "fig4" => include_str!("../presets/fig4.json"),
        "fig5" => include_str!("../presets/fig5.json"),
        "fig6a" => include_str!("../presets/fig6a.json"),
        "fig6b" => include_str!("../presets/fig6b.json"),
        _ => return None,
    })
}

/// Parses a config document: one curve object or an array of them.
pub fn parse_specs(text: &str) -> Result<Vec<SweepSpec>, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Spec(format!("invalid JSON: {e}")))?;
    // Parse each object separately so field errors are reported precisely.
    let specs = match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                serde_json::from_value(v).map_err(|e| CliError::Spec(format!("curve {i}: {e}")))
            })
            .collect::<Result<Vec<SweepSpec>, _>>()?,
        other => vec![serde_json::from_value(other).map_err(|e| CliError::Spec(e.to_string()))?],
    };
    if specs.is_empty() {
        return Err(CliError::Spec("config contains no curves".into()));
    }
    Ok(specs)
}

pub fn preset(name: &str) -> Result<Vec<SweepSpec>, CliError> {
    let src = preset_source(name).ok_or_else(|| {
        CliError::Spec(format!("unknown preset `{name}` (available: {})", PRESETS.join(", ")))
    })?;
    parse_specs(src)
}

pub fn load_config(path: &Path) -> Result<Vec<SweepSpec>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_specs(&text)
}
