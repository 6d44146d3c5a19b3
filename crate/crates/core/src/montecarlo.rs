//! Monte Carlo estimation over the ordered channel stream.
//!
//! Trials are grouped into fixed blocks of [`BLOCK_TRIALS`]; each block seeks
//! to its own position in the stream and the per-block statistics are merged in
//! a fixed pairwise tree. The estimate is therefore bit-identical for any
//! worker count.

use serde::{Deserialize, Serialize};

use crate::channel::OrderedGainStream;
use crate::crnoma::power_coefficient_unchecked;
use crate::error::{config_err, Result};
use crate::fnoma::{noma_rates_unchecked, oma_rate, PairingConfig};

/// Smallest trial count accepted by the estimators.
pub const MIN_TRIALS: u64 = 1000;

/// Trials per block.
pub const BLOCK_TRIALS: u64 = 1024;

/// A Monte Carlo estimate with its one-sigma standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl ProbabilityEstimate {
    /// Whether `reference` lies within `k` standard errors of the estimate.
    pub fn covers(&self, reference: f64, k: f64) -> bool {
        (self.value - reference).abs() <= k * self.std_error
    }
}

/// How per-trial values are summarized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// 0/1 outcomes; the estimate is a probability.
    Indicator,
    /// Real-valued outcomes; the estimate is a sample mean.
    Mean,
}

/// A per-trial function of the ordered gains.
pub trait Metric: Sync {
    fn users(&self) -> usize;
    fn kind(&self) -> MetricKind;
    /// Called with the ascending gains of one trial.
    fn evaluate(&self, gains: &[f64]) -> f64;
}

/// The events and averages that have analytic counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// F-NOMA sum rate strictly below the OMA sum rate.
    FNomaSumWorse,
    /// F-NOMA sum rate exceeds OMA by strictly less than `rate_gap`.
    FNomaGapBelow,
    /// The weak user's F-NOMA rate strictly exceeds its OMA rate.
    UserMGains,
    /// The strong user's F-NOMA rate strictly exceeds its OMA rate.
    UserNGains,
    /// CR-NOMA strong-user rate strictly below `rate_target`.
    CrOutage,
    /// Mean CR-NOMA strong-user rate.
    CrErgodicRate,
}

/// An [`Event`] bound to its scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub event: Event,
    pub config: PairingConfig,
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl Metric for EventSpec {
    fn users(&self) -> usize {
        self.config.users
    }

    fn kind(&self) -> MetricKind {
        match self.event {
            Event::CrErgodicRate => MetricKind::Mean,
            _ => MetricKind::Indicator,
        }
    }

    fn evaluate(&self, gains: &[f64]) -> f64 {
        let c = &self.config;
        let (g_m, g_n) = (gains[c.weak - 1], gains[c.strong - 1]);
        match self.event {
            Event::FNomaSumWorse | Event::FNomaGapBelow => {
                let (rm, rn) = noma_rates_unchecked(g_m, g_n, c.a_n_sq, c.rho);
                let gap = rm + rn - oma_rate(g_m, c.rho) - oma_rate(g_n, c.rho);
                let threshold = if self.event == Event::FNomaSumWorse {
                    0.0
                } else {
                    c.rate_gap
                };
                indicator(gap < threshold)
            }
            Event::UserMGains => {
                let (rm, _) = noma_rates_unchecked(g_m, g_n, c.a_n_sq, c.rho);
                indicator(rm > oma_rate(g_m, c.rho))
            }
            Event::UserNGains => {
                let (_, rn) = noma_rates_unchecked(g_m, g_n, c.a_n_sq, c.rho);
                indicator(rn > oma_rate(g_n, c.rho))
            }
            Event::CrOutage | Event::CrErgodicRate => {
                let a = power_coefficient_unchecked(g_m, c.rho, c.sinr_target).a_n_sq;
                let rate = (a * c.rho * g_n).ln_1p() / std::f64::consts::LN_2;
                if self.event == Event::CrOutage {
                    indicator(rate < c.rate_target)
                } else {
                    rate
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockStats {
    count: f64,
    sum: f64,
    mean: f64,
    m2: f64,
}

impl BlockStats {
    fn push(&mut self, v: f64) {
        self.count += 1.0;
        self.sum += v;
        let delta = v - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(a: BlockStats, b: BlockStats) -> BlockStats {
        if a.count == 0.0 {
            return b;
        }
        if b.count == 0.0 {
            return a;
        }
        let count = a.count + b.count;
        let delta = b.mean - a.mean;
        BlockStats {
            count,
            sum: a.sum + b.sum,
            mean: a.mean + delta * b.count / count,
            m2: a.m2 + b.m2 + delta * delta * a.count * b.count / count,
        }
    }
}

fn merge_tree(blocks: &[BlockStats]) -> BlockStats {
    match blocks.len() {
        0 => BlockStats::default(),
        1 => blocks[0],
        n => {
            let (l, r) = blocks.split_at(n / 2);
            BlockStats::merge(merge_tree(l), merge_tree(r))
        }
    }
}

fn run_block<M: Metric + ?Sized>(
    metric: &M,
    stream: &mut OrderedGainStream,
    buf: &mut [f64],
    block: u64,
    trials: u64,
) -> BlockStats {
    let start = block * BLOCK_TRIALS;
    let end = (start + BLOCK_TRIALS).min(trials);
    stream.seek(start);
    let mut stats = BlockStats::default();
    for _ in start..end {
        stream.fill_next(buf);
        stats.push(metric.evaluate(buf));
    }
    stats
}

/// Estimates `metric` over `trials` draws, splitting blocks across `workers` threads.
pub fn estimate_metric<M: Metric + ?Sized>(
    metric: &M,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<ProbabilityEstimate> {
    if trials < MIN_TRIALS {
        return config_err(format!("need at least {MIN_TRIALS} trials, got {trials}"));
    }
    if workers == 0 {
        return config_err("worker count must be at least 1");
    }
    let users = metric.users();
    // Validates M before any thread starts.
    OrderedGainStream::new(users, seed)?;
    let n_blocks = trials.div_ceil(BLOCK_TRIALS);
    let workers = workers.min(n_blocks as usize);

    let worker_blocks = |w: usize| -> Vec<(u64, BlockStats)> {
        let mut stream = OrderedGainStream::new(users, seed).expect("validated above");
        let mut buf = vec![0.0; users];
        (w as u64..n_blocks)
            .step_by(workers)
            .map(|b| (b, run_block(metric, &mut stream, &mut buf, b, trials)))
            .collect()
    };

    let mut blocks = vec![BlockStats::default(); n_blocks as usize];
    if workers == 1 {
        for (b, s) in worker_blocks(0) {
            blocks[b as usize] = s;
        }
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| scope.spawn(move || worker_blocks(w)))
                .collect();
            for h in handles {
                for (b, s) in h.join().expect("Monte Carlo worker panicked") {
                    blocks[b as usize] = s;
                }
            }
        });
    }

    let total = merge_tree(&blocks);
    let n = trials as f64;
    let (value, std_error) = match metric.kind() {
        MetricKind::Indicator => {
            let p = total.sum / n;
            let se = if p == 0.0 || p == 1.0 {
                1.0 / n
            } else {
                (p * (1.0 - p) / n).sqrt()
            };
            (p, se)
        }
        MetricKind::Mean => (total.mean, (total.m2 / (n - 1.0)).sqrt() / n.sqrt()),
    };
    Ok(ProbabilityEstimate {
        value,
        std_error,
        trials,
        seed,
    })
}

/// Single-threaded estimate of an analytic event.
pub fn estimate(spec: &EventSpec, trials: u64, seed: u64) -> Result<ProbabilityEstimate> {
    estimate_parallel(spec, trials, seed, 1)
}

/// Estimate of an analytic event using `workers` threads; identical to [`estimate`].
pub fn estimate_parallel(
    spec: &EventSpec,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<ProbabilityEstimate> {
    spec.config.validate()?;
    estimate_metric(spec, trials, seed, workers)
}
