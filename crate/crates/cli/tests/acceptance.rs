//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use noma_pairing::channel::sample_ordered_gains;
use noma_pairing::crnoma::{
    diversity_slope, ergodic_gain_adjacent, ergodic_gain_mc, outage_exact, outage_region_oracle,
    power_coefficient, sinr_weak_user, sum_gain, OutageQuery,
};
use noma_pairing::fnoma::{
    db_to_linear, noma_rate_pair, p_gap_below_asymptotic, p_sum_worse_exact, p_user_m_gains,
    p_user_m_gains_closed_sum, p_user_n_gains, p_user_n_gains_closed_sum, Mode, PairingConfig,
};
use noma_pairing::montecarlo::{estimate_parallel, Event, EventSpec, ProbabilityEstimate};
use noma_pairing::numerics::{alternating_binomial_sum, exp_integral_ei, Integrator};
use noma_pairing_cli::PRESETS;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn mc(event: Event, config: PairingConfig, trials: u64, seed: u64) -> Result<ProbabilityEstimate, String> {
    estimate_parallel(&EventSpec { event, config }, trials, seed, workers()).map_err(|e| e.to_string())
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

const PAIRS_1: [(usize, usize); 4] = [(1, 2), (1, 5), (2, 3), (2, 5)];
const DB_1: [f64; 3] = [10.0, 20.0, 30.0];

fn sum_worse_vs_mc() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (i, &(m, n)) in PAIRS_1.iter().enumerate() {
        for (j, &db) in DB_1.iter().enumerate() {
            let cfg = PairingConfig::new(5, m, n, 1.0, 0.2).with_rho_db(db);
            let exact = p_sum_worse_exact(&cfg).map_err(|e| e.to_string())?;
            let est = mc(Event::FNomaSumWorse, cfg, 1_000_000, 100 + (3 * i + j) as u64)?;
            let tol = (3.0 * est.std_error).max(1e-4);
            let d = (exact - est.value).abs();
            check(d <= tol, || {
                format!("(m,n)=({m},{n}) {db} dB: exact {exact:.6e}, mc {:.6e} +- {:.1e}", est.value, est.std_error)
            })?;
            worst = worst.max(d / tol);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs <= 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("12 points, worst |diff|/tol {worst:.2}, {secs:.1} s"))
}

fn slope_over(points: impl Iterator<Item = f64>, f: impl Fn(f64) -> Result<f64, String>) -> Result<f64, String> {
    let pts = points
        .map(|db| Ok((db_to_linear(db), f(db_to_linear(db))?)))
        .collect::<Result<Vec<_>, String>>()?;
    diversity_slope(&pts).map_err(|e| e.to_string())
}

fn top_decade() -> impl Iterator<Item = f64> {
    (0..=10).map(|i| 30.0 + i as f64)
}

fn sum_worse_decay() -> Outcome {
    let mut out = Vec::new();
    for n in [2usize, 3, 5] {
        let s = slope_over(top_decade(), |rho| {
            p_sum_worse_exact(&PairingConfig::new(5, 1, n, rho, 0.2)).map_err(|e| e.to_string())
        })?;
        check((s - n as f64).abs() <= 0.3, || format!("n={n}: slope {s:.4}"))?;
        out.push(format!("n={n}: {s:.3}"));
    }
    Ok(out.join(", "))
}

fn error_floor() -> Outcome {
    let mut worst = 0.0f64;
    for m in 1..=4 {
        for r in [1.0, 2.0] {
            let floor = p_gap_below_asymptotic(5, m, 5, r).map_err(|e| e.to_string())?;
            let cfg = PairingConfig {
                rate_gap: r,
                ..PairingConfig::new(5, m, 5, 1.0, 0.2).with_rho_db(40.0)
            };
            let est = mc(Event::FNomaGapBelow, cfg, 1_000_000, 200 + m as u64 * 10 + r as u64)?;
            let d = (floor - est.value).abs();
            check(d <= 0.02, || format!("m={m} R={r}: floor {floor:.5}, mc {:.5}", est.value))?;
            worst = worst.max(d);
        }
    }
    let two = p_gap_below_asymptotic(2, 1, 2, 1.0).map_err(|e| e.to_string())?;
    check((two - 0.6).abs() <= 1e-10, || format!("M=2 floor {two}"))?;
    Ok(format!("worst |floor - mc| {worst:.4}; M=2 floor {two:.12}"))
}

fn individual_rates() -> Outcome {
    let e = |x: noma_pairing::Error| x.to_string();
    let mut worst_closed = 0.0f64;
    let mut worst_sigma = 0.0f64;
    let mut seed = 300;
    for &(m, n) in &PAIRS_1 {
        for &db in &DB_1 {
            let rho = db_to_linear(db);
            let pm = p_user_m_gains(5, m, 0.2, rho, Mode::Exact).map_err(e)?;
            let pn = p_user_n_gains(5, n, 0.2, rho, Mode::Exact).map_err(e)?;
            let cm = p_user_m_gains_closed_sum(5, m, 0.2, rho).map_err(e)?;
            let cn = p_user_n_gains_closed_sum(5, n, 0.2, rho).map_err(e)?;
            let d = (pm - cm).abs().max((pn - cn).abs());
            check(d <= 1e-10, || format!("(m,n)=({m},{n}) {db} dB: closed sum off by {d:e}"))?;
            worst_closed = worst_closed.max(d);
            let cfg = PairingConfig::new(5, m, n, rho, 0.2);
            for (event, p) in [(Event::UserMGains, pm), (Event::UserNGains, pn)] {
                seed += 1;
                let est = mc(event, cfg, 1_000_000, seed)?;
                check(est.covers(p, 3.0), || {
                    format!("(m,n)=({m},{n}) {db} dB {event:?}: {p:.6e} vs {:.6e} +- {:.1e}", est.value, est.std_error)
                })?;
                if est.std_error > 0.0 {
                    worst_sigma = worst_sigma.max((est.value - p).abs() / est.std_error);
                }
            }
        }
    }
    let p40 = p_user_n_gains(5, 5, 0.2, db_to_linear(40.0), Mode::Exact).map_err(e)?;
    check(p40 >= 0.99, || format!("P_n at 40 dB {p40}"))?;
    let rho = db_to_linear(20.0);
    let half_m = p_user_m_gains(5, 1, 0.5, rho, Mode::Exact).map_err(e)?;
    let half_n = p_user_n_gains(5, 2, 0.5, rho, Mode::Exact).map_err(e)?;
    check(half_m == 0.0 && half_n == 1.0, || format!("a_n^2 = 1/2 gives {half_m}, {half_n}"))?;
    Ok(format!(
        "closed sums within {worst_closed:.1e}, mc worst {worst_sigma:.2} sigma, P_n(40 dB) {p40:.5}"
    ))
}

fn outage_query(m: usize, n: usize, db: f64) -> OutageQuery {
    OutageQuery::from(&PairingConfig {
        sinr_target: 5.0,
        rate_target: 1.0,
        ..PairingConfig::new(5, m, n, 1.0, 0.2).with_rho_db(db)
    })
}

fn outage_accuracy() -> Outcome {
    let mut worst_oracle = 0.0f64;
    let mut worst_sigma = 0.0f64;
    for m in 1..=3 {
        for db in [20.0, 30.0, 40.0] {
            let q = outage_query(m, 5, db);
            let exact = outage_exact(&q).map_err(|e| e.to_string())?;
            let oracle = outage_region_oracle(&q).map_err(|e| e.to_string())?;
            let rel = (exact - oracle).abs() / oracle;
            check(rel <= 1e-6, || format!("m={m} {db} dB: exact {exact:e} oracle {oracle:e}"))?;
            worst_oracle = worst_oracle.max(rel);
            let cfg = PairingConfig {
                sinr_target: 5.0,
                rate_target: 1.0,
                ..PairingConfig::new(5, m, 5, 1.0, 0.2).with_rho_db(db)
            };
            let est = mc(Event::CrOutage, cfg, 10_000_000, 400 + 10 * m as u64 + (db / 10.0) as u64)?;
            check(est.covers(exact, 3.0), || {
                format!("m={m} {db} dB: exact {exact:.6e}, mc {:.6e} +- {:.1e}", est.value, est.std_error)
            })?;
            worst_sigma = worst_sigma.max((est.value - exact).abs() / est.std_error);
        }
    }
    Ok(format!("oracle rel diff <= {worst_oracle:.1e}, mc worst {worst_sigma:.2} sigma"))
}

fn outage_slope(m: usize, n: usize) -> Result<f64, String> {
    slope_over(top_decade(), |rho| {
        outage_exact(&outage_query(m, n, 10.0 * rho.log10())).map_err(|e| e.to_string())
    })
}

fn diversity_order() -> Outcome {
    let mut out = Vec::new();
    for m in 1..=3 {
        let s = outage_slope(m, 5)?;
        check((s - m as f64).abs() <= 0.35, || format!("m={m}: slope {s:.4}"))?;
        out.push(format!("m={m}: {s:.3}"));
    }
    let (s2, s5) = (outage_slope(1, 2)?, outage_slope(1, 5)?);
    check((s2 - s5).abs() <= 0.1, || format!("n=2 slope {s2:.4} vs n=5 slope {s5:.4}"))?;
    out.push(format!("(1,2) vs (1,5) differ by {:.3}", (s2 - s5).abs()));
    Ok(out.join(", "))
}

fn cr_identities() -> Outcome {
    let e = |x: noma_pairing::Error| x.to_string();
    let pairs = [(1, 2), (1, 5), (2, 4), (3, 5), (4, 5)];
    let draws = sample_ordered_gains(5, 100_000, 7).map_err(e)?;
    let (mut worst_sinr, mut worst_gain) = (0.0f64, 0.0f64);
    for (t, d) in draws.enumerate() {
        let (m, n) = pairs[t % pairs.len()];
        let rho = db_to_linear([0.0, 10.0, 20.0, 30.0, 40.0][(t / pairs.len()) % 5]);
        let i = [1.0, 5.0, 15.0][t % 3];
        let (g_m, g_n) = (d.gain(m), d.gain(n));
        let policy = power_coefficient(g_m, rho, i).map_err(e)?;
        if policy.served {
            let err = (sinr_weak_user(g_m, policy.a_n_sq, rho) - i).abs();
            check(err <= 1e-12, || format!("draw {t}: SINR off by {err:e}"))?;
            worst_sinr = worst_sinr.max(err);
        }
        let gain = sum_gain(g_m, g_n, rho, i).map_err(e)?;
        check(gain >= 0.0, || format!("draw {t}: negative sum gain {gain}"))?;
        let direct = if policy.served {
            noma_rate_pair(g_m, g_n, policy.a_n_sq, rho).map_err(e)?.sum() - log2_1p(rho * g_m)
        } else {
            0.0
        };
        let err = (gain - direct).abs();
        check(err <= 1e-12, || format!("draw {t}: sum gain {gain} vs direct {direct}"))?;
        worst_gain = worst_gain.max(err);
    }
    Ok(format!("1e5 draws, SINR err {worst_sinr:.1e}, sum gain err {worst_gain:.1e}"))
}

fn ergodic_gain() -> Outcome {
    let e = |x: noma_pairing::Error| x.to_string();
    let mut worst = 0.0f64;
    for m in [1usize, 4] {
        for db in [20.0, 30.0] {
            let rho = db_to_linear(db);
            let exact = ergodic_gain_adjacent(5, m, rho, 5.0).map_err(e)?;
            let est = ergodic_gain_mc(5, m, m + 1, rho, 5.0, 1_000_000, 500 + m as u64 + db as u64).map_err(e)?;
            check(est.covers(exact, 3.0), || {
                format!("m={m} {db} dB: analytic {exact:.5}, mc {:.5} +- {:.1e}", est.value, est.std_error)
            })?;
            worst = worst.max((est.value - exact).abs() / est.std_error);
        }
    }
    let rho = db_to_linear(30.0);
    let sim = |m, n, seed| ergodic_gain_mc(5, m, n, rho, 5.0, 1_000_000, seed).map_err(e);
    let r12 = ergodic_gain_adjacent(5, 1, rho, 5.0).map_err(e)?;
    let r15 = sim(1, 5, 601)?;
    let r45 = ergodic_gain_adjacent(5, 4, rho, 5.0).map_err(e)?;
    // Compare against a 3 sigma shrunken simulation so noise cannot carry the claim.
    let r15_low = r15.value - 3.0 * r15.std_error;
    let r15_high = r15.value + 3.0 * r15.std_error;
    check(r15_low - r12 > 1.0, || format!("E(1,5) {:.4} - E(1,2) {r12:.4} not > 1", r15.value))?;
    check(r45 > r15_high, || format!("E(4,5) {r45:.4} not > E(1,5) {:.4}", r15.value))?;
    Ok(format!(
        "mc worst {worst:.2} sigma; 30 dB: E(1,5) - E(1,2) = {:.3}, E(4,5) = {r45:.3} > E(1,5) = {:.3}",
        r15.value - r12,
        r15.value
    ))
}

fn ei_table() -> Vec<(f64, f64)> {
    include_str!("../../core/tests/data/ei_oracle.csv")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (x, v) = l.split_once(',').expect("two columns");
            (x.parse().unwrap(), v.parse().unwrap())
        })
        .collect()
}

fn numerics() -> Outcome {
    for n in 2..=12u32 {
        for l in 1..=n - 2 {
            let s = alternating_binomial_sum(n, l).map_err(|e| e.to_string())?;
            check(s == 0.0, || format!("n={n} l={l}: {s}"))?;
        }
        let fact: f64 = (1..n).map(f64::from).product();
        let want = if (n - 1) % 2 == 0 { fact } else { -fact };
        let s = alternating_binomial_sum(n, n - 1).map_err(|e| e.to_string())?;
        check(s == want, || format!("n={n} l={}: {s} vs {want}", n - 1))?;
    }

    let table = ei_table();
    check(table.len() == 50, || format!("{} table rows", table.len()))?;
    let mut worst_ei = 0.0f64;
    for (x, want) in table {
        let got = exp_integral_ei(x).map_err(|e| e.to_string())?;
        let rel = ((got - want) / want).abs();
        check(rel <= 1e-12, || format!("Ei({x}) = {got}, want {want}"))?;
        worst_ei = worst_ei.max(rel);
    }

    // Polynomials of degree 0..=12 with fixed coefficients, exact by the antiderivative.
    let quad = Integrator::new(1e-13, 1e-13);
    let mut worst_q = 0.0f64;
    for deg in 0..=12usize {
        let c: Vec<f64> = (0..=deg).map(|k| ((k * 7 + deg * 3) % 11) as f64 / 5.0 - 1.0).collect();
        for (a, b) in [(-1.0, 1.0), (0.0, 3.0), (-2.5, 0.5)] {
            let p = |x: f64| c.iter().rev().fold(0.0, |acc, &k| acc * x + k);
            let anti = |x: f64| c.iter().enumerate().rev().fold(0.0, |acc, (i, &k)| acc * x + k / (i + 1) as f64) * x;
            let got = quad.integrate(p, a, b).map_err(|e| e.to_string())?.value;
            let want = anti(b) - anti(a);
            let err = (got - want).abs() / want.abs().max(1.0);
            check(err <= 1e-12, || format!("degree {deg} on [{a}, {b}]: {got} vs {want}"))?;
            worst_q = worst_q.max(err);
        }
    }
    // Exponentials, finite and semi-infinite, held to relative accuracy.
    let quad = Integrator::relative(1e-12);
    for rate in [0.01, 0.1, 1.0, 7.5, 50.0] {
        for lower in [0.0, 0.3, 2.0] {
            let f = |x: f64| rate * (-rate * x).exp();
            let tail = quad.integrate(f, lower, f64::INFINITY).map_err(|e| e.to_string())?.value;
            let want = (-rate * lower).exp();
            let err = (tail - want).abs() / want.max(1e-300);
            check(err <= 1e-10, || format!("rate {rate} from {lower}: {tail} vs {want}"))?;
            let fin = quad.integrate(f, lower, lower + 1.0).map_err(|e| e.to_string())?.value;
            let want_fin = (-rate * lower).exp() * -(-rate).exp_m1();
            let err_fin = (fin - want_fin).abs() / want_fin.max(1e-300);
            check(err_fin <= 1e-10, || format!("rate {rate} on [{lower}, {}]: {fin} vs {want_fin}", lower + 1.0))?;
            worst_q = worst_q.max(err).max(err_fin);
        }
    }
    Ok(format!("identities exact for n <= 12, Ei rel err {worst_ei:.1e}, quadrature rel err {worst_q:.1e}"))
}

fn run_preset(name: &str, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_noma-pairing"))
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env("NO_COLOR", "1")
        .args(["sweep", "--preset", name, "--trials", "20000", "--out"])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    check(status.status.success(), || {
        format!("preset {name}: {}", String::from_utf8_lossy(&status.stderr).trim())
    })
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let e = e.map_err(|e| e.to_string())?;
            let bytes = std::fs::read(e.path()).map_err(|e| e.to_string())?;
            Ok((e.file_name().to_string_lossy().into_owned(), bytes))
        })
        .collect::<Result<Vec<_>, String>>()?;
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for name in PRESETS {
        let (a, b) = (tmp.path().join(format!("{name}-a")), tmp.path().join(format!("{name}-b")));
        run_preset(name, &a)?;
        run_preset(name, &b)?;
        let (fa, fb) = (read_dir_sorted(&a)?, read_dir_sorted(&b)?);
        check(!fa.is_empty() && fa == fb, || format!("preset {name} differs between runs"))?;
        files += fa.len();
    }

    let cfg = PairingConfig {
        sinr_target: 5.0,
        rate_target: 1.0,
        ..PairingConfig::new(5, 2, 4, 1.0, 0.2).with_rho_db(15.0)
    };
    for event in [Event::FNomaSumWorse, Event::CrOutage, Event::CrErgodicRate] {
        let spec = EventSpec { event, config: cfg };
        let base = estimate_parallel(&spec, 50_000, 9, 1).map_err(|e| e.to_string())?;
        for w in [2, 3, 4, 7, 16] {
            let other = estimate_parallel(&spec, 50_000, 9, w).map_err(|e| e.to_string())?;
            check(other == base, || format!("{event:?} with {w} workers: {other:?} vs {base:?}"))?;
        }
    }
    Ok(format!("{} presets, {files} files identical; estimates invariant for 1..16 workers", PRESETS.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("sum-rate loss probability vs simulation", sum_worse_vs_mc),
        ("sum-rate loss high-SNR decay", sum_worse_decay),
        ("sum-rate gap error floor", error_floor),
        ("individual-rate probabilities", individual_rates),
        ("CR-NOMA outage vs oracle and simulation", outage_accuracy),
        ("CR-NOMA diversity order", diversity_order),
        ("CR-NOMA identities", cr_identities),
        ("CR-NOMA ergodic rate", ergodic_gain),
        ("numerical kernels", numerics),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
