//! Cognitive-radio inspired NOMA (CR-NOMA).
//!
//! The strong user is admitted only with the power that keeps the weak user's
//! SINR at the target `I`. Its outage probability has diversity order `m`: the
//! weak user's channel decides whether the strong user is served at all.

use serde::{Deserialize, Serialize};

use crate::channel::{check_pair, ordered_marginal_cdf, unit_cdf, OrderPairDensity};
use crate::error::{config_err, Error, Result};
use crate::fnoma::{guard_probability, PairingConfig, PROBABILITY_REL_TOL};
use crate::montecarlo::{self, Event, EventSpec, ProbabilityEstimate};
use crate::numerics::{alternating_binomial_terms, exp_integral_e1_scaled, pow_difference, Integrator};

/// Outcome of the QoS-constrained power policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPolicyResult {
    /// Strong user's power share, in `[0, 1/(1+I))`.
    pub a_n_sq: f64,
    /// Whether the strong user receives any power.
    pub served: bool,
}

/// Largest strong-user power share that keeps the weak user's SINR at `I`.
pub fn power_coefficient(g_m: f64, rho: f64, sinr_target: f64) -> Result<PowerPolicyResult> {
    if !(g_m > 0.0 && rho > 0.0 && sinr_target > 0.0) {
        return config_err(format!(
            "power policy needs positive inputs (g_m = {g_m}, rho = {rho}, I = {sinr_target})"
        ));
    }
    Ok(power_coefficient_unchecked(g_m, rho, sinr_target))
}

pub(crate) fn power_coefficient_unchecked(g_m: f64, rho: f64, sinr_target: f64) -> PowerPolicyResult {
    let a_n_sq = ((g_m - sinr_target / rho) / (g_m * (1.0 + sinr_target))).max(0.0);
    PowerPolicyResult {
        a_n_sq,
        served: a_n_sq > 0.0,
    }
}

/// SINR of the weak user when the strong user holds power share `a_n_sq`.
pub fn sinr_weak_user(g_m: f64, a_n_sq: f64, rho: f64) -> f64 {
    g_m * (1.0 - a_n_sq) / (g_m * a_n_sq + 1.0 / rho)
}

/// Sum-rate gain of CR-NOMA over serving the weak user alone, `log2((1 + rho a g_n)/(1 + rho a g_m))`.
pub fn sum_gain(g_m: f64, g_n: f64, rho: f64, sinr_target: f64) -> Result<f64> {
    if g_m > g_n {
        return Err(Error::Ordering {
            weak: g_m,
            strong: g_n,
        });
    }
    let a = power_coefficient(g_m, rho, sinr_target)?.a_n_sq;
    Ok(((rho * a * g_n).ln_1p() - (rho * a * g_m).ln_1p()) / std::f64::consts::LN_2)
}

/// Parameters of a CR-NOMA outage evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageQuery {
    pub users: usize,
    pub weak: usize,
    pub strong: usize,
    pub rho: f64,
    pub sinr_target: f64,
    pub rate_target: f64,
}

impl From<&PairingConfig> for OutageQuery {
    fn from(c: &PairingConfig) -> Self {
        Self {
            users: c.users,
            weak: c.weak,
            strong: c.strong,
            rho: c.rho,
            sinr_target: c.sinr_target,
            rate_target: c.rate_target,
        }
    }
}

impl OutageQuery {
    pub fn validate(&self) -> Result<()> {
        check_pair(self.users, self.weak, self.strong)?;
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return config_err(format!("rho must be positive and finite, got {}", self.rho));
        }
        if !(self.sinr_target > 0.0) {
            return config_err(format!("SINR target must be > 0, got {}", self.sinr_target));
        }
        if !(self.rate_target > 0.0) {
            return config_err(format!("target rate must be > 0, got {}", self.rate_target));
        }
        Ok(())
    }

    /// `I / rho`
    pub fn b(&self) -> f64 {
        self.sinr_target / self.rho
    }

    /// `1 + I`
    pub fn a(&self) -> f64 {
        1.0 + self.sinr_target
    }

    /// `(2^R - 1) / rho`
    pub fn eps1(&self) -> f64 {
        (self.rate_target * std::f64::consts::LN_2).exp_m1() / self.rho
    }

    /// `b <= a eps1`: the regime covered by the closed-form decomposition.
    pub fn closed_form_regime(&self) -> bool {
        self.b() <= self.a() * self.eps1()
    }
}

/// The four pieces of the exact outage probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageTerms {
    /// `P(|h_m|^2 < b)`: the strong user gets no power.
    pub unserved: f64,
    /// `|h_n|^2` in `[b, a eps1]`.
    pub low: f64,
    /// `|h_n|^2` in `[a eps1, b + a eps1]`.
    pub middle: f64,
    /// `|h_n|^2 > b + a eps1`.
    pub tail: f64,
}

impl OutageTerms {
    pub fn total(&self) -> f64 {
        self.unserved + self.low + self.middle + self.tail
    }
}

/// Exact outage decomposition for `b <= a eps1`.
pub fn outage_terms(q: &OutageQuery) -> Result<OutageTerms> {
    q.validate()?;
    if !q.closed_form_regime() {
        return config_err(format!(
            "closed form needs b <= a eps1 (b = {:e}, a eps1 = {:e})",
            q.b(),
            q.a() * q.eps1()
        ));
    }
    let (m, n, big_m) = (q.weak, q.strong, q.users);
    let (b, a_eps) = (q.b(), q.a() * q.eps1());
    let norm = OrderPairDensity::new(big_m, m, n)?.normalization;
    let k = n - 1 - m;
    let terms: Vec<(f64, i32, u32)> = alternating_binomial_terms(k)
        .into_iter()
        .map(|t| {
            let i = t.indices[0];
            (t.signed() / (m + i) as f64, (k - i) as i32, (m + i) as u32)
        })
        .collect();
    let decay = (big_m - n + 1) as f64;
    let gb = unit_cdf(b);
    let exp_neg_b = (-b).exp();

    // g(y) (1 - G(y))^{M-n} sum_i ... (G(upper)^{m+i} - G(b)^{m+i}) / (m+i)
    let kernel = |y: f64, upper: f64| {
        let gy = unit_cdf(y);
        let gu = unit_cdf(upper);
        let diff = exp_neg_b * unit_cdf(upper - b);
        let s: f64 = terms
            .iter()
            .map(|&(coef, py, p)| coef * gy.powi(py) * pow_difference(gu, gb, diff, p))
            .sum();
        norm * (-decay * y).exp() * s
    };

    let unserved =
        ordered_marginal_cdf(big_m, m, b).map_err(|e| e.in_term("unserved probability"))?;
    // The total is at least `unserved`, so this floor only matters for terms
    // far below the result.
    let integrator = Integrator::new(1e-3 * PROBABILITY_REL_TOL * unserved, PROBABILITY_REL_TOL);
    let low = if a_eps > b {
        integrator
            .integrate(|y| kernel(y, y), b, a_eps)
            .map_err(|e| e.in_term("outage integral over [b, a eps1]"))?
            .value
    } else {
        0.0
    };
    let middle = integrator
        .integrate(|y| kernel(y, y), a_eps, b + a_eps)
        .map_err(|e| e.in_term("outage integral over [a eps1, b + a eps1]"))?
        .value;
    let tail = integrator
        .integrate(
            |y| {
                // b / (1 - a eps1 / y), the largest weak gain still in outage
                let upper = b + b * a_eps / (y - a_eps);
                kernel(y, upper)
            },
            b + a_eps,
            f64::INFINITY,
        )
        .map_err(|e| e.in_term("outage integral over [b + a eps1, inf)"))?
        .value;
    Ok(OutageTerms {
        unserved,
        low,
        middle,
        tail,
    })
}

/// Exact outage probability of the strong user.
///
/// Uses the closed-form decomposition when `b <= a eps1` and otherwise
/// integrates the outage region directly.
pub fn outage_exact(q: &OutageQuery) -> Result<f64> {
    q.validate()?;
    if !q.closed_form_regime() {
        return outage_region_oracle(q);
    }
    guard_probability("CR-NOMA outage", outage_terms(q)?.total())
}

/// Outage probability by iterated quadrature of the joint density over
/// `{x <= y : a_n^2(x) rho y < 2^R - 1}`, including the unserved strip `x < b`.
pub fn outage_region_oracle(q: &OutageQuery) -> Result<f64> {
    q.validate()?;
    let density = OrderPairDensity::new(q.users, q.weak, q.strong)?;
    let (b, a_eps) = (q.b(), q.a() * q.eps1());
    let inner = Integrator::relative(1e-12);
    let outer = Integrator::relative(1e-10);

    let column = |x: f64, y_max: f64| -> Result<f64> {
        let f = |y: f64| density.pdf(x, y);
        if y_max <= x {
            return Ok(0.0);
        }
        if y_max.is_infinite() {
            return Ok(inner.integrate(f, x, f64::INFINITY)?.value);
        }
        if y_max - x > 40.0 {
            let whole = inner.integrate(f, x, f64::INFINITY)?.value;
            let beyond = inner.integrate(f, y_max, f64::INFINITY)?.value;
            return Ok(whole - beyond);
        }
        Ok(inner.integrate(f, x, y_max)?.value)
    };

    let run = |lo: f64, hi: f64, upper: &dyn Fn(f64) -> f64| -> Result<f64> {
        let failure = std::cell::RefCell::new(None);
        let r = outer.integrate(
            |x| match column(x, upper(x)) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(r?.value)
    };

    let unserved = run(0.0, b, &|_| f64::INFINITY).map_err(|e| e.in_term("unserved strip"))?;
    let served = run(b, b + a_eps, &|x| a_eps * x / (x - b))
        .map_err(|e| e.in_term("served outage region"))?;
    guard_probability("CR-NOMA outage (region)", unserved + served)
}

/// Average strong-user rate for adjacent users `n = m + 1`, by a single
/// quadrature over the weak user's gain with the inner expectation in closed
/// form through the exponential integral.
pub fn ergodic_gain_adjacent(users: usize, weak: usize, rho: f64, sinr_target: f64) -> Result<f64> {
    let strong = weak + 1;
    check_pair(users, weak, strong)?;
    if !(rho > 0.0 && sinr_target > 0.0) {
        return config_err(format!(
            "rho and I must be positive (rho = {rho}, I = {sinr_target})"
        ));
    }
    let norm = OrderPairDensity::new(users, weak, strong)?.normalization;
    let decay = (users - strong + 1) as f64;
    let b = sinr_target / rho;
    let a = 1.0 + sinr_target;
    let failure = std::cell::RefCell::new(None);
    let integrand = |x: f64| {
        if x <= b {
            return 0.0;
        }
        // decay / c with c = (x - b) rho / (x a)
        let shift = decay * x * a / ((x - b) * rho);
        let log_term = ((x - b) * rho / a).ln_1p() / std::f64::consts::LN_2;
        let ei_term = match exp_integral_e1_scaled(decay * x + shift) {
            Ok(v) => v / std::f64::consts::LN_2,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                return f64::NAN;
            }
        };
        norm / decay
            * (-x).exp()
            * unit_cdf(x).powi(weak as i32 - 1)
            * (-decay * x).exp()
            * (log_term + ei_term)
    };
    let r = Integrator::new(1e-12, 1e-10).integrate(integrand, b, f64::INFINITY);
    if let Some(e) = failure.into_inner() {
        return Err(e.in_term("ergodic integrand"));
    }
    Ok(r.map_err(|e| e.in_term("ergodic integral"))?.value)
}

/// Monte Carlo mean of the strong user's CR-NOMA rate for any `m < n`.
pub fn ergodic_gain_mc(
    users: usize,
    weak: usize,
    strong: usize,
    rho: f64,
    sinr_target: f64,
    trials: u64,
    seed: u64,
) -> Result<ProbabilityEstimate> {
    let config = PairingConfig {
        users,
        weak,
        strong,
        rho,
        sinr_target,
        ..PairingConfig::default()
    };
    montecarlo::estimate(
        &EventSpec {
            event: Event::CrErgodicRate,
            config,
        },
        trials,
        seed,
    )
}

/// Negated least-squares slope of `log10 P` against `log10 rho`.
pub fn diversity_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return config_err(format!("need at least 3 points, got {}", points.len()));
    }
    for (index, &(rho, p)) in points.iter().enumerate() {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::FitPoint {
                index,
                reason: format!("probability {p} is not positive"),
            });
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::FitPoint {
                index,
                reason: format!("rho {rho} is not positive"),
            });
        }
    }
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return config_err(format!("rho must span at least 10 dB (got {lo}..{hi})"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(-sxy / sxx)
}

/// [`diversity_slope`] restricted to the top decade of SNR in `points`.
pub fn diversity_slope_top_decade(points: &[(f64, f64)]) -> Result<f64> {
    let hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let window: Vec<_> = points
        .iter()
        .copied()
        .filter(|p| p.0 >= hi / 10.0 * (1.0 - 1e-12))
        .collect();
    diversity_slope(&window)
}
