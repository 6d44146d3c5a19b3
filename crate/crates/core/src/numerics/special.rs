//! Exponential integral and the regularized incomplete beta function.

use crate::error::{Error, Result};
use crate::numerics::combinatorics::ln_factorial;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;

/// Below this argument `|Ei(x)|` is under `1e-304` and is reported as zero.
pub const EI_UNDERFLOW: f64 = -700.0;

// E1(x) by its power series, valid and fast for 0 < x <= 1.
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x / kf;
        let add = term / kf;
        sum += add;
        if add.abs() < f64::EPSILON * sum.abs() * 0.1 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

// e^x E1(x) by the Lentz continued fraction, for x > 1.
fn e1_scaled_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `E1(x)` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("E1 requires x > 0, got {x}")));
    }
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok((-x).exp() * e1_scaled_continued_fraction(x))
    }
}

/// `e^x E1(x)` for `x > 0`, finite for arbitrarily large `x` where `E1` itself underflows.
pub fn exp_integral_e1_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("E1 requires x > 0, got {x}")));
    }
    if x <= 1.0 {
        Ok(x.exp() * e1_series(x))
    } else {
        Ok(e1_scaled_continued_fraction(x))
    }
}

/// Exponential integral `Ei(x) = -E1(-x)` on the negative axis.
///
/// Returns exactly zero for `x < -700`, where the true value is below `1e-304`.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Domain(format!(
            "Ei is only provided for negative arguments, got {x}"
        )));
    }
    if x < EI_UNDERFLOW {
        return Ok(0.0);
    }
    exp_integral_e1(-x).map(|v| -v)
}

// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..1000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` for positive integer shape parameters.
///
/// The caller passes both `x` and `1 - x` so that values computed as
/// `-expm1(-t)` and `exp(-t)` keep full relative precision in either tail.
pub fn regularized_incomplete_beta(a: u32, b: u32, x: f64, one_minus_x: f64) -> Result<f64> {
    if a == 0 || b == 0 {
        return Err(Error::Domain(format!(
            "incomplete beta shapes must be positive, got ({a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&one_minus_x) {
        return Err(Error::Domain(format!(
            "incomplete beta argument {x} outside [0, 1]"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if one_minus_x == 0.0 {
        return Ok(1.0);
    }
    let (af, bf) = (a as f64, b as f64);
    // ln[x^a (1-x)^b / B(a, b)] with B(a, b) = (a-1)!(b-1)!/(a+b-1)!.
    let ln_front = af * x.ln() + bf * one_minus_x.ln() + ln_factorial(a + b - 1)
        - ln_factorial(a - 1)
        - ln_factorial(b - 1);
    if x < (af + 1.0) / (af + bf + 2.0) {
        Ok(ln_front.exp() * beta_continued_fraction(af, bf, x) / af)
    } else {
        Ok(1.0 - ln_front.exp() * beta_continued_fraction(bf, af, one_minus_x) / bf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ei_reference_values() {
        let cases = [
            (-1.0, -0.219_383_934_395_520_3),
            (-0.5, -0.559_773_594_776_160_8),
        ];
        for (x, want) in cases {
            let got = exp_integral_ei(x).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "Ei({x}) = {got}");
        }
    }

    #[test]
    fn ei_decays_to_zero_from_below() {
        let mut prev = exp_integral_ei(-1.0).unwrap();
        for x in [-5.0, -20.0, -100.0, -500.0] {
            let v = exp_integral_ei(x).unwrap();
            assert!(v < 0.0 && v > prev);
            prev = v;
        }
        assert_eq!(exp_integral_ei(-800.0).unwrap(), 0.0);
    }

    #[test]
    fn ei_rejects_nonnegative() {
        assert!(matches!(exp_integral_ei(0.0), Err(Error::Domain(_))));
        assert!(matches!(exp_integral_ei(2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ei_derivative_matches_exp_over_x() {
        for x in [-0.5f64, -1.0, -3.0, -10.0] {
            let h = 1e-5 * x.abs();
            let d = (exp_integral_ei(x + h).unwrap() - exp_integral_ei(x - h).unwrap()) / (2.0 * h);
            let want = x.exp() / x;
            assert!(((d - want) / want).abs() < 1e-6, "x = {x}: {d} vs {want}");
        }
    }

    #[test]
    fn scaled_e1_consistent_on_both_branches() {
        for x in [0.3, 0.999, 1.001, 4.0, 30.0] {
            let direct = exp_integral_e1(x).unwrap() * f64::exp(x);
            let scaled = exp_integral_e1_scaled(x).unwrap();
            assert!(((direct - scaled) / scaled).abs() < 1e-13);
        }
        // Large arguments approach 1/x.
        let big = 1e8;
        assert!((exp_integral_e1_scaled(big).unwrap() * big - 1.0).abs() < 1e-7);
    }

    #[test]
    fn incomplete_beta_binomial_tail() {
        // I_p(3, 3) = P(Bin(5, p) >= 3)
        let p: f64 = -(-1.0f64).exp_m1();
        let q = 1.0 - p;
        let tail: f64 = (3..=5)
            .map(|j| {
                let c = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0][j];
                c * p.powi(j as i32) * q.powi(5 - j as i32)
            })
            .sum();
        let got = regularized_incomplete_beta(3, 3, p, (-1.0f64).exp()).unwrap();
        assert!((got - tail).abs() < 1e-14);
        assert!((got - 0.736_436_217_657_860_5).abs() < 1e-14);
    }

    #[test]
    fn incomplete_beta_endpoints() {
        assert_eq!(regularized_incomplete_beta(2, 4, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(regularized_incomplete_beta(2, 4, 1.0, 0.0).unwrap(), 1.0);
        assert!(regularized_incomplete_beta(0, 4, 0.5, 0.5).is_err());
    }
}
