//! NOMA with a fixed power split (F-NOMA) against orthogonal access.
//!
//! Probabilities are reported for the event that F-NOMA is *worse* than
//! orthogonal MA (lower sum rate); the complementary "better" probability is
//! one minus that value.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::channel::{
    check_index, check_pair, marginal_normalization, ordered_marginal_cdf, ordered_marginal_sf,
    unit_cdf, OrderPairDensity,
};
use crate::error::{config_err, Error, Result};
use crate::numerics::{
    alternating_binomial_terms, binomial, double_alternating_terms, pow_difference, Integrator,
};

/// Round-off band tolerated around `[0, 1]` before an exact probability is rejected.
pub const PROBABILITY_GUARD: f64 = 1e-9;

/// Relative tolerance used for the probability integrals.
pub(crate) const PROBABILITY_REL_TOL: f64 = 1e-11;

/// Full description of a pairing scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingConfig {
    /// Number of users `M`.
    pub users: usize,
    /// Weak user index `m` (1-based, ascending gain order).
    pub weak: usize,
    /// Strong user index `n`.
    pub strong: usize,
    /// Transmit SNR, linear.
    pub rho: f64,
    /// Power share of the strong user; the weak user gets `1 - a_n_sq`.
    pub a_n_sq: f64,
    /// Target sum-rate gain (BPCU).
    pub rate_gap: f64,
    /// Target rate for outage (BPCU).
    pub rate_target: f64,
    /// SINR target of the weak user under CR-NOMA, linear.
    pub sinr_target: f64,
}

impl Default for PairingConfig {
    fn default() -> Self {
        Self {
            users: 5,
            weak: 1,
            strong: 2,
            rho: 100.0,
            a_n_sq: 0.2,
            rate_gap: 0.0,
            rate_target: 1.0,
            sinr_target: 5.0,
        }
    }
}

impl PairingConfig {
    pub fn new(users: usize, weak: usize, strong: usize, rho: f64, a_n_sq: f64) -> Self {
        Self {
            users,
            weak,
            strong,
            rho,
            a_n_sq,
            ..Self::default()
        }
    }

    pub fn with_rho_db(mut self, rho_db: f64) -> Self {
        self.rho = db_to_linear(rho_db);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_pair(self.users, self.weak, self.strong)?;
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return config_err(format!("rho must be positive and finite, got {}", self.rho));
        }
        if !(self.a_n_sq > 0.0 && self.a_n_sq <= 0.5) {
            return config_err(format!("a_n_sq must lie in (0, 1/2], got {}", self.a_n_sq));
        }
        if !(self.rate_gap >= 0.0) {
            return config_err(format!("rate gap must be >= 0, got {}", self.rate_gap));
        }
        if !(self.rate_target > 0.0) {
            return config_err(format!("target rate must be > 0, got {}", self.rate_target));
        }
        if !(self.sinr_target > 0.0) {
            return config_err(format!("SINR target must be > 0, got {}", self.sinr_target));
        }
        Ok(())
    }
}

/// `10^(db / 10)`
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Constants shared by the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingConstants {
    /// `M! / ((m-1)! (n-1-m)! (M-n)!)`
    pub varpi1: f64,
    /// `(1 - 2 a_n^2) / a_n^4`
    pub varpi2: f64,
    /// `M! / ((n-1)! (M-n)!)`
    pub varpi3: f64,
    /// `sqrt(1 + varpi2) - 1`
    pub varpi4: f64,
    /// `M! / ((m-1)! (M-m)!)`
    pub varpi5: f64,
    /// `(2^R - 1) / rho`
    pub eps1: f64,
    /// `I / rho`
    pub b: f64,
    /// `1 + I`
    pub a: f64,
}

impl PairingConstants {
    pub fn new(cfg: &PairingConfig) -> Result<Self> {
        cfg.validate()?;
        let (m, n, big_m) = (cfg.weak, cfg.strong, cfg.users);
        let varpi2 = (1.0 - 2.0 * cfg.a_n_sq) / (cfg.a_n_sq * cfg.a_n_sq);
        Ok(Self {
            varpi1: OrderPairDensity::new(big_m, m, n)?.normalization,
            varpi2,
            varpi3: marginal_normalization(big_m, n),
            varpi4: (1.0 + varpi2).sqrt() - 1.0,
            varpi5: marginal_normalization(big_m, m),
            eps1: (cfg.rate_target * std::f64::consts::LN_2).exp_m1() / cfg.rho,
            b: cfg.sinr_target / cfg.rho,
            a: 1.0 + cfg.sinr_target,
        })
    }
}

/// Multiple-access scheme a [`RatePair`] was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    Noma,
    Oma,
}

/// Achievable rates (BPCU) of the paired users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePair {
    pub rate_weak: f64,
    pub rate_strong: f64,
    pub scheme: Scheme,
}

impl RatePair {
    pub fn sum(&self) -> f64 {
        self.rate_weak + self.rate_strong
    }
}

pub(crate) fn noma_rates_unchecked(g_m: f64, g_n: f64, a_n_sq: f64, rho: f64) -> (f64, f64) {
    let a_m_sq = 1.0 - a_n_sq;
    let weak = (g_m * a_m_sq / (g_m * a_n_sq + 1.0 / rho)).ln_1p() / std::f64::consts::LN_2;
    let strong = (rho * a_n_sq * g_n).ln_1p() / std::f64::consts::LN_2;
    (weak, strong)
}

/// NOMA rates with SIC at the strong user. Accepts `0 <= a_n_sq < 1` so the
/// same routine serves the CR-NOMA power policy.
pub fn noma_rate_pair(g_m: f64, g_n: f64, a_n_sq: f64, rho: f64) -> Result<RatePair> {
    if !(g_m > 0.0 && g_n > 0.0 && rho > 0.0) {
        return config_err(format!(
            "gains and rho must be positive (g_m = {g_m}, g_n = {g_n}, rho = {rho})"
        ));
    }
    if !(0.0..1.0).contains(&a_n_sq) {
        return config_err(format!("a_n_sq must lie in [0, 1), got {a_n_sq}"));
    }
    if g_m > g_n {
        return Err(Error::Ordering {
            weak: g_m,
            strong: g_n,
        });
    }
    let (rate_weak, rate_strong) = noma_rates_unchecked(g_m, g_n, a_n_sq, rho);
    Ok(RatePair {
        rate_weak,
        rate_strong,
        scheme: Scheme::Noma,
    })
}

/// Half-resource orthogonal rate `(1/2) log2(1 + rho g)`.
pub fn oma_rate(g: f64, rho: f64) -> f64 {
    0.5 * (rho * g).ln_1p() / std::f64::consts::LN_2
}

pub fn oma_rate_pair(g_m: f64, g_n: f64, rho: f64) -> RatePair {
    RatePair {
        rate_weak: oma_rate(g_m, rho),
        rate_strong: oma_rate(g_n, rho),
        scheme: Scheme::Oma,
    }
}

pub(crate) fn guard_probability(what: &'static str, raw: f64) -> Result<f64> {
    if !(-PROBABILITY_GUARD..=1.0 + PROBABILITY_GUARD).contains(&raw) {
        return Err(Error::OutOfRange { what, value: raw });
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// `Q1`: probability that F-NOMA wins on the region `varpi4 < rho|h_n|^2 < varpi2`.
pub fn sum_better_q1(cfg: &PairingConfig) -> Result<f64> {
    let c = PairingConstants::new(cfg)?;
    if c.varpi2 <= 0.0 {
        return Ok(0.0);
    }
    let (m, n, big_m) = (cfg.weak, cfg.strong, cfg.users);
    let rho = cfg.rho;
    let k = n - 1 - m;
    let terms: Vec<(f64, i32, u32)> = alternating_binomial_terms(k)
        .into_iter()
        .map(|t| {
            let i = t.indices[0];
            (t.signed() / (m + i) as f64, (k - i) as i32, (m + i) as u32)
        })
        .collect();
    let varpi2 = c.varpi2;
    let tail = (big_m - n) as f64;
    // y is the rho-scaled gain of the strong user.
    let integrand = |y: f64| {
        let u = ((varpi2 - y) / (1.0 + y)).max(0.0);
        let fy = unit_cdf(y / rho);
        let fu = unit_cdf(u / rho);
        let diff = (-u / rho).exp() * unit_cdf((y - u) / rho);
        let inner: f64 = terms
            .iter()
            .map(|&(coef, py, p)| coef * fy.powi(py) * pow_difference(fy, fu, diff, p))
            .sum();
        (-(1.0 + tail) * y / rho).exp() / rho * inner
    };
    let r = Integrator::relative(PROBABILITY_REL_TOL)
        .integrate(integrand, c.varpi4, varpi2)
        .map_err(|e| e.in_term("Q1 integral"))?;
    Ok(c.varpi1 * r.value)
}

/// `Q2 = P(rho |h_n|^2 > varpi2)` by its closed binomial sum.
pub fn sum_better_q2_closed(cfg: &PairingConfig) -> Result<f64> {
    let c = PairingConstants::new(cfg)?;
    let (n, big_m) = (cfg.strong, cfg.users);
    let s: f64 = alternating_binomial_terms(n - 1)
        .iter()
        .map(|t| {
            let w = (big_m - n + t.indices[0] + 1) as f64;
            t.signed() / w * (-w * c.varpi2 / cfg.rho).exp()
        })
        .sum();
    Ok(c.varpi3 * s)
}

/// Exact probability that F-NOMA yields a lower sum rate than orthogonal MA.
///
/// Evaluated as `P(rho|h_n|^2 < varpi2) - Q1`, which equals `1 - Q1 - Q2` but
/// keeps relative accuracy when the result is far below machine epsilon.
pub fn p_sum_worse_exact(cfg: &PairingConfig) -> Result<f64> {
    let c = PairingConstants::new(cfg)?;
    if c.varpi2 <= 0.0 {
        return Ok(0.0);
    }
    let below = ordered_marginal_cdf(cfg.users, cfg.strong, c.varpi2 / cfg.rho)?;
    let q1 = sum_better_q1(cfg)?;
    guard_probability("P(sum worse)", below - q1)
}

/// High-SNR approximation tagged as asymptotic; not clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptotic(pub f64);

type HighSnrKey = (usize, usize, usize, u64);

fn high_snr_cache() -> &'static RwLock<HashMap<HighSnrKey, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<HighSnrKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn compute_high_snr_constant(weak: usize, strong: usize, a_n_sq: f64) -> Result<f64> {
    let varpi2 = (1.0 - 2.0 * a_n_sq) / (a_n_sq * a_n_sq);
    if varpi2 <= 0.0 {
        return Ok(0.0);
    }
    let varpi4 = (1.0 + varpi2).sqrt() - 1.0;
    let k = strong - 1 - weak;
    let terms: Vec<(f64, i32, i32)> = alternating_binomial_terms(k)
        .into_iter()
        .map(|t| {
            let i = t.indices[0];
            (t.signed() / (weak + i) as f64, (k - i) as i32, (weak + i) as i32)
        })
        .collect();
    let integrand = |y: f64| {
        let u = (varpi2 - y) / (1.0 + y);
        terms
            .iter()
            .map(|&(coef, py, p)| coef * y.powi(py) * (y.powi(p) - u.powi(p)))
            .sum::<f64>()
    };
    Integrator::new(1e-14, 1e-13)
        .integrate(integrand, varpi4, varpi2)
        .map(|r| r.value)
        .map_err(|e| e.in_term("high-SNR constant"))
}

/// The SNR-independent integral constant of the high-SNR expansion, cached
/// per `(M, m, n, a_n^2)`.
pub fn high_snr_constant(cfg: &PairingConfig) -> Result<f64> {
    cfg.validate()?;
    let key = (cfg.users, cfg.weak, cfg.strong, cfg.a_n_sq.to_bits());
    if let Some(&v) = high_snr_cache().read().expect("cache poisoned").get(&key) {
        return Ok(v);
    }
    let v = compute_high_snr_constant(cfg.weak, cfg.strong, cfg.a_n_sq)?;
    high_snr_cache()
        .write()
        .expect("cache poisoned")
        .insert(key, v);
    Ok(v)
}

/// `(1/rho^n) (varpi3 varpi2^n / n - varpi1 varpi)`
pub fn p_sum_worse_highsnr(cfg: &PairingConfig) -> Result<Asymptotic> {
    let c = PairingConstants::new(cfg)?;
    let n = cfg.strong as i32;
    let varpi = high_snr_constant(cfg)?;
    let lead = c.varpi3 * c.varpi2.powi(n) / n as f64 - c.varpi1 * varpi;
    Ok(Asymptotic(lead / cfg.rho.powi(n)))
}

/// High-SNR limit of `P(R_m + R_n - Rbar_m - Rbar_n < R_gap)`, the error floor.
///
/// Each double-sum term is written as `(1 - c) / ((tau2 + c tau1)(tau2 + tau1))`
/// with `c = 2^{-2R}`, algebraically equal to the difference of reciprocals
/// divided by `tau1` and finite when `tau1 = 0`.
pub fn p_gap_below_asymptotic(users: usize, weak: usize, strong: usize, rate_gap: f64) -> Result<f64> {
    check_pair(users, weak, strong)?;
    if !(rate_gap >= 0.0) {
        return config_err(format!("rate gap must be >= 0, got {rate_gap}"));
    }
    if rate_gap.is_infinite() {
        return Ok(1.0);
    }
    let norm = OrderPairDensity::new(users, weak, strong)?.normalization;
    let c = (-2.0 * rate_gap).exp2();
    let one_minus_c = -(-2.0 * rate_gap * std::f64::consts::LN_2).exp_m1();
    let s: f64 = double_alternating_terms(weak - 1, strong - weak - 1)
        .iter()
        .map(|t| {
            let (j1, j2) = (t.indices[0] as f64, t.indices[1] as f64);
            let tau1 = j1 - j2 + (strong - weak) as f64;
            let tau2 = (users - strong + 1) as f64 + j2;
            t.signed() * one_minus_c / ((tau2 + c * tau1) * (tau2 + tau1))
        })
        .sum();
    guard_probability("asymptotic gap probability", norm * s)
}

/// Evaluation mode of the individual-rate probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    HighSnr,
}

fn individual_threshold(a_n_sq: f64, rho: f64) -> Result<f64> {
    if !(a_n_sq > 0.0 && a_n_sq <= 0.5) {
        return config_err(format!("a_n_sq must lie in (0, 1/2], got {a_n_sq}"));
    }
    if !(rho > 0.0) {
        return config_err(format!("rho must be positive, got {rho}"));
    }
    Ok((1.0 - 2.0 * a_n_sq) / (rho * a_n_sq * a_n_sq))
}

/// `P(R_m > Rbar_m) = P(|h_m|^2 < (1 - 2a_n^2) / (rho a_n^4))`.
pub fn p_user_m_gains(users: usize, weak: usize, a_n_sq: f64, rho: f64, mode: Mode) -> Result<f64> {
    check_index(users, weak)?;
    let t = individual_threshold(a_n_sq, rho)?;
    match mode {
        Mode::Exact => ordered_marginal_cdf(users, weak, t),
        Mode::HighSnr => {
            let norm = marginal_normalization(users, weak);
            Ok(norm * t.powi(weak as i32) / weak as f64)
        }
    }
}

/// `P(R_n > Rbar_n) = P(|h_n|^2 > (1 - 2a_n^2) / (rho a_n^4))`.
pub fn p_user_n_gains(users: usize, strong: usize, a_n_sq: f64, rho: f64, mode: Mode) -> Result<f64> {
    check_index(users, strong)?;
    let t = individual_threshold(a_n_sq, rho)?;
    match mode {
        Mode::Exact => ordered_marginal_sf(users, strong, t),
        Mode::HighSnr => {
            let norm = marginal_normalization(users, strong);
            Ok(1.0 - norm * t.powi(strong as i32) / strong as f64)
        }
    }
}

// sum_{i<k} C(k-1, i) (-1)^i norm/(M-k+i+1) (1 - e^{-(M-k+i+1) t}) = P(|h_k|^2 < t)
fn marginal_cdf_closed_sum(users: usize, k: usize, t: f64) -> f64 {
    let norm = marginal_normalization(users, k);
    (0..k)
        .map(|i| {
            let w = (users - k + i + 1) as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial((k - 1) as u32, i as u32) * norm / w * unit_cdf(w * t)
        })
        .sum()
}

/// Closed binomial-sum form of [`p_user_m_gains`] (exact mode).
pub fn p_user_m_gains_closed_sum(users: usize, weak: usize, a_n_sq: f64, rho: f64) -> Result<f64> {
    check_index(users, weak)?;
    let t = individual_threshold(a_n_sq, rho)?;
    Ok(marginal_cdf_closed_sum(users, weak, t))
}

/// Closed binomial-sum form of [`p_user_n_gains`] (exact mode).
pub fn p_user_n_gains_closed_sum(users: usize, strong: usize, a_n_sq: f64, rho: f64) -> Result<f64> {
    check_index(users, strong)?;
    let t = individual_threshold(a_n_sq, rho)?;
    Ok(1.0 - marginal_cdf_closed_sum(users, strong, t))
}
