//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a flat `Float64Array` of fixed-width records so the page
//! can plot it without any glue beyond slicing.

use wasm_bindgen::prelude::*;

use noma_pairing::channel::ratio_pdf;
use noma_pairing::crnoma::{outage_exact, OutageQuery};
use noma_pairing::fnoma::{db_to_linear, p_sum_worse_exact, p_sum_worse_highsnr, PairingConfig};
use noma_pairing::montecarlo::{estimate, Event, EventSpec};

fn db_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0) || start > stop {
        return Err(format!("bad SNR range {start}..{stop} step {step}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 400 {
        return Err(format!("{count} grid points is too many"));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Records `[rho_db, exact, high_snr]`.
pub fn sum_worse_records(
    users: usize,
    weak: usize,
    strong: usize,
    an2: f64,
    start_db: f64,
    stop_db: f64,
    step_db: f64,
) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for db in db_grid(start_db, stop_db, step_db)? {
        let cfg = PairingConfig::new(users, weak, strong, db_to_linear(db), an2);
        let exact = p_sum_worse_exact(&cfg).map_err(|e| e.to_string())?;
        let approx = p_sum_worse_highsnr(&cfg).map_err(|e| e.to_string())?.0;
        out.extend([db, exact, approx]);
    }
    Ok(out)
}

/// Records `[rho_db, exact, mc, mc_stderr]`; the simulation columns are NaN when `trials` is 0.
#[allow(clippy::too_many_arguments)]
pub fn outage_records(
    users: usize,
    weak: usize,
    strong: usize,
    sinr_target: f64,
    rate_bpcu: f64,
    start_db: f64,
    stop_db: f64,
    step_db: f64,
    trials: u32,
    seed: u32,
) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for db in db_grid(start_db, stop_db, step_db)? {
        let config = PairingConfig {
            sinr_target,
            rate_target: rate_bpcu,
            ..PairingConfig::new(users, weak, strong, db_to_linear(db), 0.2)
        };
        let exact = outage_exact(&OutageQuery::from(&config)).map_err(|e| e.to_string())?;
        let (mc, se) = if trials > 0 {
            let est = estimate(
                &EventSpec {
                    event: Event::CrOutage,
                    config,
                },
                trials as u64,
                seed as u64,
            )
            .map_err(|e| e.to_string())?;
            (est.value, est.std_error)
        } else {
            (f64::NAN, f64::NAN)
        };
        out.extend([db, exact, mc, se]);
    }
    Ok(out)
}

/// Records `[z, pdf]` of `|h_m|^2 / |h_n|^2` on `points` evenly spaced values in `[0, 1]`.
pub fn ratio_records(users: usize, weak: usize, strong: usize, points: usize) -> Result<Vec<f64>, String> {
    if !(2..=2000).contains(&points) {
        return Err(format!("points must lie in 2..=2000, got {points}"));
    }
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let z = i as f64 / (points - 1) as f64;
        out.extend([z, ratio_pdf(users, weak, strong, z).map_err(|e| e.to_string())?]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = sumWorseCurve)]
pub fn sum_worse_curve(
    users: usize,
    weak: usize,
    strong: usize,
    an2: f64,
    start_db: f64,
    stop_db: f64,
    step_db: f64,
) -> Result<Vec<f64>, JsError> {
    sum_worse_records(users, weak, strong, an2, start_db, stop_db, step_db)
        .map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = outageCurve)]
pub fn outage_curve(
    users: usize,
    weak: usize,
    strong: usize,
    sinr_target: f64,
    rate_bpcu: f64,
    start_db: f64,
    stop_db: f64,
    step_db: f64,
    trials: u32,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    outage_records(
        users, weak, strong, sinr_target, rate_bpcu, start_db, stop_db, step_db, trials, seed,
    )
    .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = ratioDensity)]
pub fn ratio_density(users: usize, weak: usize, strong: usize, points: usize) -> Result<Vec<f64>, JsError> {
    ratio_records(users, weak, strong, points).map_err(|e| JsError::new(&e))
}
