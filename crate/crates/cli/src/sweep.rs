use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use noma_pairing::channel::RNG_DESCRIPTION;
use noma_pairing::crnoma::{ergodic_gain_adjacent, outage_exact, OutageQuery};
use noma_pairing::fnoma::{
    p_gap_below_asymptotic, p_sum_worse_exact, p_sum_worse_highsnr, p_user_m_gains,
    p_user_n_gains, Mode, PairingConfig,
};
use noma_pairing::montecarlo::{estimate_parallel, EventSpec};

use crate::spec::{MetricName, SweepSpec};
use crate::CliError;

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub sweep_var: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_highsnr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_stderr: Option<f64>,
}

/// Which value columns a curve carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Columns {
    pub analytic: bool,
    pub highsnr: bool,
    pub mc: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub columns: Columns,
    pub rows: Vec<Row>,
}

fn columns_for(spec: &SweepSpec, configs: &[PairingConfig]) -> Columns {
    let analytic = spec.analytic
        && match spec.metric {
            MetricName::FnomaGapBelow => false,
            MetricName::CrnomaErgodic => configs.iter().all(|c| c.strong == c.weak + 1),
            _ => true,
        };
    let highsnr = spec.highsnr
        && matches!(
            spec.metric,
            MetricName::FnomaSumWorse
                | MetricName::FnomaGapBelow
                | MetricName::FnomaUserMGains
                | MetricName::FnomaUserNGains
        );
    Columns {
        analytic,
        highsnr,
        mc: spec.trials > 0,
    }
}

fn exact_value(metric: MetricName, cfg: &PairingConfig) -> noma_pairing::Result<f64> {
    match metric {
        MetricName::FnomaSumWorse => p_sum_worse_exact(cfg),
        MetricName::FnomaUserMGains => {
            cfg.validate()?;
            p_user_m_gains(cfg.users, cfg.weak, cfg.a_n_sq, cfg.rho, Mode::Exact)
        }
        MetricName::FnomaUserNGains => {
            cfg.validate()?;
            p_user_n_gains(cfg.users, cfg.strong, cfg.a_n_sq, cfg.rho, Mode::Exact)
        }
        MetricName::CrnomaOutage => outage_exact(&OutageQuery::from(cfg)),
        MetricName::CrnomaErgodic => {
            ergodic_gain_adjacent(cfg.users, cfg.weak, cfg.rho, cfg.sinr_target)
        }
        MetricName::FnomaGapBelow => unreachable!("no exact finite-SNR form"),
    }
}

fn highsnr_value(metric: MetricName, cfg: &PairingConfig) -> noma_pairing::Result<f64> {
    cfg.validate()?;
    match metric {
        MetricName::FnomaSumWorse => p_sum_worse_highsnr(cfg).map(|a| a.0),
        MetricName::FnomaGapBelow => {
            p_gap_below_asymptotic(cfg.users, cfg.weak, cfg.strong, cfg.rate_gap)
        }
        MetricName::FnomaUserMGains => {
            p_user_m_gains(cfg.users, cfg.weak, cfg.a_n_sq, cfg.rho, Mode::HighSnr)
        }
        MetricName::FnomaUserNGains => {
            p_user_n_gains(cfg.users, cfg.strong, cfg.a_n_sq, cfg.rho, Mode::HighSnr)
        }
        _ => unreachable!("no high-SNR form"),
    }
}

/// Evaluates every grid point of `spec`, in grid order.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult, CliError> {
    let grid = spec.grid()?;
    let configs: Vec<PairingConfig> = grid.iter().map(|&x| spec.config_at(x)).collect();
    let columns = columns_for(spec, &configs);
    let mut rows = Vec::with_capacity(grid.len());
    for (&x, cfg) in grid.iter().zip(&configs) {
        let point = |e: noma_pairing::Error| CliError::Point {
            curve: spec.name.clone(),
            sweep_var: x,
            source: e,
        };
        cfg.validate().map_err(point)?;
        let analytic = if columns.analytic {
            Some(exact_value(spec.metric, cfg).map_err(point)?)
        } else {
            None
        };
        let analytic_highsnr = if columns.highsnr {
            Some(highsnr_value(spec.metric, cfg).map_err(point)?)
        } else {
            None
        };
        let (mc, mc_stderr) = if columns.mc {
            let est = estimate_parallel(
                &EventSpec {
                    event: spec.metric.event(),
                    config: *cfg,
                },
                spec.trials,
                spec.seed,
                workers,
            )
            .map_err(point)?;
            (Some(est.value), Some(est.std_error))
        } else {
            (None, None)
        };
        rows.push(Row {
            sweep_var: x,
            analytic,
            analytic_highsnr,
            mc,
            mc_stderr,
        });
    }
    Ok(SweepResult {
        spec: spec.clone(),
        columns,
        rows,
    })
}

fn sci(v: f64) -> String {
    format!("{v:.9e}")
}

impl SweepResult {
    /// CSV with LF line endings and 10 significant digits.
    pub fn to_csv(&self) -> String {
        let c = self.columns;
        let mut out = String::from("sweep_var");
        if c.analytic {
            out.push_str(",analytic");
        }
        if c.highsnr {
            out.push_str(",analytic_highsnr");
        }
        if c.mc {
            out.push_str(",mc,mc_stderr");
        }
        out.push('\n');
        for r in &self.rows {
            write!(out, "{}", r.sweep_var).unwrap();
            for v in [r.analytic, r.analytic_highsnr, r.mc, r.mc_stderr].into_iter().flatten() {
                write!(out, ",{}", sci(v)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// The spec plus provenance; parses back as a config.
    pub fn metadata(&self) -> SweepSpec {
        let mut m = self.spec.clone();
        m.version = Some(env!("CARGO_PKG_VERSION").to_string());
        m.timestamp = Some(timestamp());
        m.rng = Some(RNG_DESCRIPTION.to_string());
        m
    }

    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "metadata": self.metadata(),
            "rows": self.rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("rows are finite numbers");
        s.push('\n');
        s
    }
}

// Honors SOURCE_DATE_EPOCH so that metadata can be made reproducible too.
fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}
