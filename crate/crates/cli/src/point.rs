//! Single-point queries. Each returns a JSON document echoing the scenario and
//! every intermediate constant.

use serde_json::{json, Value};

use noma_pairing::crnoma::{
    ergodic_gain_adjacent, outage_exact, outage_region_oracle, outage_terms, power_coefficient,
    sinr_weak_user, OutageQuery,
};
use noma_pairing::fnoma::{
    db_to_linear, high_snr_constant, p_gap_below_asymptotic, p_sum_worse_exact,
    p_sum_worse_highsnr, p_user_m_gains, p_user_n_gains, Mode, PairingConfig, PairingConstants,
};
use noma_pairing::montecarlo::{estimate_parallel, Event, EventSpec};

use crate::CliError;

/// Scenario and simulation settings shared by the point queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointArgs {
    pub config: PairingConfig,
    pub rho_db: f64,
    pub trials: Option<u64>,
    pub seed: u64,
    pub workers: usize,
}

impl PointArgs {
    pub fn new(config: PairingConfig, rho_db: f64) -> Self {
        Self {
            config: PairingConfig {
                rho: db_to_linear(rho_db),
                ..config
            },
            rho_db,
            trials: None,
            seed: 1,
            workers: 1,
        }
    }

    fn header(&self, metric: &str) -> Result<serde_json::Map<String, Value>, CliError> {
        let constants = PairingConstants::new(&self.config)?;
        let mut doc = serde_json::Map::new();
        doc.insert("metric".into(), json!(metric));
        doc.insert("rho_db".into(), json!(self.rho_db));
        doc.insert("config".into(), serde_json::to_value(self.config).expect("plain data"));
        doc.insert("constants".into(), serde_json::to_value(constants).expect("plain data"));
        Ok(doc)
    }

    fn simulate(
        &self,
        event: Event,
        default_trials: Option<u64>,
        doc: &mut serde_json::Map<String, Value>,
    ) -> Result<Option<f64>, CliError> {
        let Some(trials) = self.trials.or(default_trials) else {
            return Ok(None);
        };
        let est = estimate_parallel(
            &EventSpec {
                event,
                config: self.config,
            },
            trials,
            self.seed,
            self.workers,
        )?;
        doc.insert("mc".into(), serde_json::to_value(est).expect("plain data"));
        Ok(Some(est.value))
    }
}

pub fn fnoma_sum_prob(a: &PointArgs) -> Result<Value, CliError> {
    let mut doc = a.header("fnoma_sum_worse")?;
    let exact = p_sum_worse_exact(&a.config)?;
    doc.insert("value".into(), json!(exact));
    doc.insert("highsnr".into(), json!(p_sum_worse_highsnr(&a.config)?.0));
    doc.insert("varpi".into(), json!(high_snr_constant(&a.config)?));
    a.simulate(Event::FNomaSumWorse, None, &mut doc)?;
    Ok(Value::Object(doc))
}

/// Asymptotic floor, or a simulation at the given SNR.
pub fn fnoma_gap(a: &PointArgs, asymptotic: bool) -> Result<Value, CliError> {
    let mut doc = a.header("fnoma_gap_below")?;
    let c = &a.config;
    let floor = p_gap_below_asymptotic(c.users, c.weak, c.strong, c.rate_gap)?;
    doc.insert("asymptotic".into(), json!(floor));
    if asymptotic {
        doc.insert("value".into(), json!(floor));
        a.simulate(Event::FNomaGapBelow, None, &mut doc)?;
    } else {
        let v = a.simulate(Event::FNomaGapBelow, Some(1_000_000), &mut doc)?;
        doc.insert("value".into(), json!(v));
    }
    Ok(Value::Object(doc))
}

pub fn fnoma_individual(a: &PointArgs, mode: Mode) -> Result<Value, CliError> {
    let mut doc = a.header("fnoma_individual")?;
    let c = &a.config;
    doc.insert("mode".into(), serde_json::to_value(mode).expect("plain data"));
    doc.insert(
        "p_user_m_gains".into(),
        json!(p_user_m_gains(c.users, c.weak, c.a_n_sq, c.rho, mode)?),
    );
    doc.insert(
        "p_user_n_gains".into(),
        json!(p_user_n_gains(c.users, c.strong, c.a_n_sq, c.rho, mode)?),
    );
    if a.trials.is_some() {
        let mut m = serde_json::Map::new();
        a.simulate(Event::UserMGains, None, &mut m)?;
        doc.insert("mc_user_m_gains".into(), m.remove("mc").expect("trials set"));
        a.simulate(Event::UserNGains, None, &mut m)?;
        doc.insert("mc_user_n_gains".into(), m.remove("mc").expect("trials set"));
    }
    Ok(Value::Object(doc))
}

pub fn crnoma_power(g_m: f64, rho_db: f64, sinr_target: f64) -> Result<Value, CliError> {
    let rho = db_to_linear(rho_db);
    let r = power_coefficient(g_m, rho, sinr_target)?;
    Ok(json!({
        "metric": "crnoma_power",
        "g_m": g_m,
        "rho_db": rho_db,
        "rho": rho,
        "I": sinr_target,
        "b": sinr_target / rho,
        "value": r.a_n_sq,
        "a_n_sq": r.a_n_sq,
        "served": r.served,
        "sinr_weak_user": sinr_weak_user(g_m, r.a_n_sq, rho),
    }))
}

pub fn crnoma_outage(a: &PointArgs) -> Result<Value, CliError> {
    let mut doc = a.header("crnoma_outage")?;
    let q = OutageQuery::from(&a.config);
    doc.insert("closed_form_regime".into(), json!(q.closed_form_regime()));
    if q.closed_form_regime() {
        doc.insert("terms".into(), serde_json::to_value(outage_terms(&q)?).expect("plain data"));
    }
    doc.insert("value".into(), json!(outage_exact(&q)?));
    doc.insert("region_oracle".into(), json!(outage_region_oracle(&q)?));
    a.simulate(Event::CrOutage, None, &mut doc)?;
    Ok(Value::Object(doc))
}

/// Closed form for adjacent users; otherwise simulation only.
pub fn crnoma_ergodic(a: &PointArgs) -> Result<Value, CliError> {
    let mut doc = a.header("crnoma_ergodic")?;
    let c = &a.config;
    if c.strong == c.weak + 1 {
        let v = ergodic_gain_adjacent(c.users, c.weak, c.rho, c.sinr_target)?;
        doc.insert("value".into(), json!(v));
        a.simulate(Event::CrErgodicRate, None, &mut doc)?;
    } else {
        let v = a.simulate(Event::CrErgodicRate, Some(1_000_000), &mut doc)?;
        doc.insert("value".into(), json!(v));
    }
    Ok(Value::Object(doc))
}
