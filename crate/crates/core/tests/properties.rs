use noma_pairing::channel::{
    ordered_joint_pdf, ordered_marginal_cdf, ordered_marginal_pdf, sample_ordered_gains,
};
use noma_pairing::crnoma::{
    outage_region_oracle, power_coefficient, sinr_weak_user, sum_gain, OutageQuery,
};
use noma_pairing::fnoma::{db_to_linear, noma_rate_pair, p_sum_worse_exact, PairingConfig};
use noma_pairing::numerics::quadrature::DEFAULT_ABS_TOL;
use noma_pairing::numerics::Integrator;
use proptest::prelude::*;

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn poly_antiderivative(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (i, &k)| acc * x + k / (i + 1) as f64)
        * x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn quadrature_integrates_polynomials(
        coeffs in prop::collection::vec(-3.0f64..3.0, 1..=9),
        a in -2.0f64..2.0,
        width in 0.1f64..3.0,
    ) {
        let b = a + width;
        let got = Integrator::new(DEFAULT_ABS_TOL, 1e-12)
            .integrate(|x| poly_eval(&coeffs, x), a, b)
            .unwrap()
            .value;
        let want = poly_antiderivative(&coeffs, b) - poly_antiderivative(&coeffs, a);
        prop_assert!((got - want).abs() <= DEFAULT_ABS_TOL, "{} vs {}", got, want);
    }

    #[test]
    fn quadrature_integrates_shifted_exponentials(rate in 0.05f64..20.0, lower in 0.0f64..5.0) {
        let got = Integrator::new(1e-14, 1e-12)
            .integrate(|x| rate * (-rate * x).exp(), lower, f64::INFINITY)
            .unwrap()
            .value;
        let want = (-rate * lower).exp();
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1e-3));
    }

    #[test]
    fn marginal_cdf_monotone_with_pdf_derivative(
        users in 2usize..=12,
        k_frac in 0.0f64..1.0,
        x in 0.01f64..4.0,
    ) {
        let k = 1 + ((users - 1) as f64 * k_frac).round() as usize;
        let h = 1e-5 * x.max(0.1);
        let lo = ordered_marginal_cdf(users, k, x - h).unwrap();
        let hi = ordered_marginal_cdf(users, k, x + h).unwrap();
        prop_assert!(hi >= lo);
        let deriv = (hi - lo) / (2.0 * h);
        let pdf = ordered_marginal_pdf(users, k, x).unwrap();
        prop_assert!((deriv - pdf).abs() <= 1e-6 * pdf.max(1.0), "{} vs {}", deriv, pdf);
    }

    #[test]
    fn sic_decodability(seed in any::<u64>(), db in 0.0f64..40.0, a_n_sq in 0.01f64..=0.5) {
        let rho = db_to_linear(db);
        for d in sample_ordered_gains(5, 200, seed).unwrap() {
            for (m, n) in [(1, 2), (1, 5), (3, 4)] {
                let (g_m, g_n) = (d.gain(m), d.gain(n));
                let r = noma_rate_pair(g_m, g_n, a_n_sq, rho).unwrap();
                let at_strong = log2_1p(g_n * (1.0 - a_n_sq) / (g_n * a_n_sq + 1.0 / rho));
                prop_assert!(at_strong >= r.rate_weak);
            }
        }
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

#[test]
fn marginal_cdf_endpoints() {
    for users in [2, 5, 9] {
        for k in 1..=users {
            assert_eq!(ordered_marginal_cdf(users, k, 0.0).unwrap(), 0.0);
            assert!((ordered_marginal_cdf(users, k, 60.0).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn joint_pdf_marginalizes_to_strong_marginal() {
    for m in [1, 2] {
        for n in [3, 5] {
            for y in [0.1, 0.7, 1.5, 3.0] {
                let joint = Integrator::new(1e-14, 1e-12)
                    .integrate(|x| ordered_joint_pdf(5, m, n, x, y).unwrap(), 0.0, y)
                    .unwrap()
                    .value;
                let marginal = ordered_marginal_pdf(5, n, y).unwrap();
                assert!((joint - marginal).abs() < 1e-8, "m={m} n={n} y={y}");
            }
        }
    }
}

#[test]
fn qos_and_sum_gain_on_random_draws() {
    let (rho, i) = (db_to_linear(20.0), 5.0);
    let mut served = 0;
    for (t, d) in sample_ordered_gains(5, 100_000, 42).unwrap().enumerate() {
        let (m, n) = [(1, 2), (1, 5), (2, 4), (4, 5)][t % 4];
        let (g_m, g_n) = (d.gain(m), d.gain(n));
        let policy = power_coefficient(g_m, rho, i).unwrap();
        assert_eq!(policy.served, g_m > i / rho);
        assert!(policy.a_n_sq < 1.0 / (1.0 + i));
        if policy.served {
            served += 1;
            assert!((sinr_weak_user(g_m, policy.a_n_sq, rho) - i).abs() < 1e-12);
        }
        let gain = sum_gain(g_m, g_n, rho, i).unwrap();
        assert!(gain >= 0.0);
        let direct = if policy.served {
            let r = noma_rate_pair(g_m, g_n, policy.a_n_sq, rho).unwrap();
            r.sum() - log2_1p(rho * g_m)
        } else {
            0.0
        };
        assert!((gain - direct).abs() < 1e-12, "{gain} vs {direct}");
    }
    assert!(served > 80_000);
}

#[test]
fn sum_worse_nonincreasing_in_snr() {
    for (m, n) in [(1, 2), (2, 5)] {
        let mut prev = f64::INFINITY;
        for step in 0..10 {
            let p = p_sum_worse_exact(&PairingConfig::new(5, m, n, db_to_linear(4.0 * step as f64), 0.2))
                .unwrap();
            assert!(p <= prev);
            prev = p;
        }
    }
}

#[test]
fn region_outage_nonincreasing_in_snr() {
    let mut prev = f64::INFINITY;
    for db in [0.0, 8.0, 16.0, 24.0, 32.0, 40.0] {
        let q = OutageQuery {
            users: 5,
            weak: 1,
            strong: 5,
            rho: db_to_linear(db),
            sinr_target: 5.0,
            rate_target: 1.0,
        };
        let p = outage_region_oracle(&q).unwrap();
        assert!(p <= prev);
        prev = p;
    }
}
