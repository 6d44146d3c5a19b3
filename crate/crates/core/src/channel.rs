//! Ordered Rayleigh fading: sampling and densities of the order statistics of
//! `M` i.i.d. unit-mean exponential power gains.
//!
//! Gains are always unit scale. Formulas that need the transmit SNR multiply by
//! `rho` explicitly.
//!
//! # Random stream
//!
//! Draws come from ChaCha8 (`rand_chacha`) keyed with `seed_from_u64(seed)`,
//! nonce (stream id) `M`, and trial `t` starting at 32-bit word position
//! `2 * M * t`. Each gain consumes one `u64`, so a worker can seek straight to
//! its first trial and the union over workers does not depend on how trials
//! are partitioned.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{config_err, Result};
use crate::numerics::{double_alternating_terms, factorial_ratio, regularized_incomplete_beta};

/// Identifies the generator and stream-split rule in run metadata.
pub const RNG_DESCRIPTION: &str =
    "ChaCha8Rng(rand_chacha 0.10) seed_from_u64(seed); stream=M; trial t at word 2*M*t";

/// One realization of the `M` ordered gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// Ascending, strictly positive.
    pub gains: Vec<f64>,
    /// Trial index within the `(seed, M)` stream.
    pub seed_tag: u64,
}

impl ChannelDraw {
    /// Gain of the `k`-th weakest user (1-based).
    pub fn gain(&self, k: usize) -> f64 {
        self.gains[k - 1]
    }
}

/// Deterministic, seekable stream of ordered channel draws.
#[derive(Debug, Clone)]
pub struct OrderedGainStream {
    users: usize,
    rng: ChaCha8Rng,
    position: u64,
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

impl OrderedGainStream {
    pub fn new(users: usize, seed: u64) -> Result<Self> {
        if users < 2 {
            return config_err(format!("need at least two users, got M = {users}"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(users as u64);
        Ok(Self {
            users,
            rng,
            position: 0,
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Index of the next trial to be produced.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Repositions the stream so the next draw is trial `trial`.
    pub fn seek(&mut self, trial: u64) {
        self.rng
            .set_word_pos(2 * self.users as u128 * trial as u128);
        self.position = trial;
    }

    /// Writes the next draw's ascending gains into `out` (length `M`).
    pub fn fill_next(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.users);
        for g in out.iter_mut() {
            // Uniform on the open interval (0, 1).
            let u = ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53;
            *g = -(-u).ln_1p();
        }
        out.sort_unstable_by(f64::total_cmp);
        self.position += 1;
    }
}

impl Iterator for OrderedGainStream {
    type Item = ChannelDraw;

    fn next(&mut self) -> Option<ChannelDraw> {
        let tag = self.position;
        let mut gains = vec![0.0; self.users];
        self.fill_next(&mut gains);
        Some(ChannelDraw {
            gains,
            seed_tag: tag,
        })
    }
}

/// `trials` ordered draws of `M` unit-mean exponential gains.
pub fn sample_ordered_gains(
    users: usize,
    trials: u64,
    seed: u64,
) -> Result<impl Iterator<Item = ChannelDraw>> {
    if trials == 0 {
        return config_err("trials must be at least 1");
    }
    Ok(OrderedGainStream::new(users, seed)?.take(trials as usize))
}

pub(crate) fn check_pair(users: usize, weak: usize, strong: usize) -> Result<()> {
    if users < 2 {
        return config_err(format!("need at least two users, got M = {users}"));
    }
    if !(1 <= weak && weak < strong && strong <= users) {
        return config_err(format!(
            "indices must satisfy 1 <= m < n <= M, got m = {weak}, n = {strong}, M = {users}"
        ));
    }
    Ok(())
}

pub(crate) fn check_index(users: usize, k: usize) -> Result<()> {
    if users < 1 || k < 1 || k > users {
        return config_err(format!("index k = {k} outside 1..={users}"));
    }
    Ok(())
}

/// Unit-scale CDF `G(t) = 1 - e^{-t}`, accurate for small `t`.
#[inline]
pub fn unit_cdf(t: f64) -> f64 {
    -(-t).exp_m1()
}

/// Joint density of the `m`-th and `n`-th order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPairDensity {
    pub users: usize,
    pub weak: usize,
    pub strong: usize,
    /// `M! / ((m-1)! (n-1-m)! (M-n)!)`
    pub normalization: f64,
}

impl OrderPairDensity {
    pub fn new(users: usize, weak: usize, strong: usize) -> Result<Self> {
        check_pair(users, weak, strong)?;
        Ok(Self {
            users,
            weak,
            strong,
            normalization: factorial_ratio(
                users as u32,
                &[
                    (weak - 1) as u32,
                    (strong - 1 - weak) as u32,
                    (users - strong) as u32,
                ],
            ),
        })
    }

    pub fn pdf(&self, x: f64, y: f64) -> f64 {
        if x < 0.0 || x > y {
            return 0.0;
        }
        let gx = unit_cdf(x);
        // G(y) - G(x) = e^{-x} (1 - e^{-(y-x)})
        let gap = (-x).exp() * unit_cdf(y - x);
        self.normalization
            * (-x - y).exp()
            * gx.powi(self.weak as i32 - 1)
            * gap.powi((self.strong - 1 - self.weak) as i32)
            * (-y * (self.users - self.strong) as f64).exp()
    }
}

/// Joint density of `(|h_m|^2, |h_n|^2)` at `(x, y)`; zero off `0 <= x <= y`.
pub fn ordered_joint_pdf(users: usize, weak: usize, strong: usize, x: f64, y: f64) -> Result<f64> {
    Ok(OrderPairDensity::new(users, weak, strong)?.pdf(x, y))
}

/// `M! / ((k-1)! (M-k)!)`
pub fn marginal_normalization(users: usize, k: usize) -> f64 {
    factorial_ratio(users as u32, &[(k - 1) as u32, (users - k) as u32])
}

/// Density of the `k`-th smallest of `M` unit exponentials.
pub fn ordered_marginal_pdf(users: usize, k: usize, y: f64) -> Result<f64> {
    check_index(users, k)?;
    if y < 0.0 {
        return Ok(0.0);
    }
    let norm = marginal_normalization(users, k);
    Ok(norm * (-y * (users - k + 1) as f64).exp() * unit_cdf(y).powi(k as i32 - 1))
}

/// `P(|h_k|^2 <= x) = I_{G(x)}(k, M - k + 1)`.
pub fn ordered_marginal_cdf(users: usize, k: usize, x: f64) -> Result<f64> {
    check_index(users, k)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    regularized_incomplete_beta(k as u32, (users - k + 1) as u32, unit_cdf(x), (-x).exp())
}

/// `P(|h_k|^2 > x)`, computed from the upper tail directly so that values near
/// zero keep their relative precision.
pub fn ordered_marginal_sf(users: usize, k: usize, x: f64) -> Result<f64> {
    check_index(users, k)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    regularized_incomplete_beta((users - k + 1) as u32, k as u32, (-x).exp(), unit_cdf(x))
}

/// Density of the ratio `|h_m|^2 / |h_n|^2` on `[0, 1]`.
pub fn ratio_pdf(users: usize, weak: usize, strong: usize, z: f64) -> Result<f64> {
    check_pair(users, weak, strong)?;
    if !(0.0..=1.0).contains(&z) {
        return Ok(0.0);
    }
    let norm = OrderPairDensity::new(users, weak, strong)?.normalization;
    let total: f64 = double_alternating_terms(weak - 1, strong - weak - 1)
        .iter()
        .map(|t| {
            let (j1, j2) = (t.indices[0] as f64, t.indices[1] as f64);
            let tau1 = j1 - j2 + (strong - weak) as f64;
            let tau2 = (users - strong + 1) as f64 + j2;
            t.signed() / (tau2 + tau1 * z).powi(2)
        })
        .sum();
    Ok(norm * total)
}
