//! Factorials, binomial coefficients and the alternating binomial sums that
//! appear in every closed form of the order-statistic expansions.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`alternating_binomial_sum`].
pub const MAX_ALTERNATING_N: u32 = 30;

const LN_FACTORIAL_TABLE: usize = 171;

fn ln_factorial_table() -> &'static [f64; LN_FACTORIAL_TABLE] {
    static TABLE: OnceLock<[f64; LN_FACTORIAL_TABLE]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; LN_FACTORIAL_TABLE];
        for k in 1..LN_FACTORIAL_TABLE {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

/// `ln(k!)` for `k <= 170`.
pub fn ln_factorial(k: u32) -> f64 {
    ln_factorial_table()[k as usize]
}

// Integer-valued results below 2^53 are snapped to the nearest integer.
fn snap(v: f64) -> f64 {
    if v < 9.0e15 {
        v.round()
    } else {
        v
    }
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    snap((ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp())
}

/// Multinomial-type ratio `num! / prod(den_i!)`, assumed integer valued.
pub fn factorial_ratio(num: u32, den: &[u32]) -> f64 {
    let ln = ln_factorial(num) - den.iter().map(|&d| ln_factorial(d)).sum::<f64>();
    snap(ln.exp())
}

/// Sign of a summation term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(k: usize) -> Self {
        if k % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// One term of a finite binomial expansion: the dummy indices it was generated
/// from, its sign and its (unsigned) coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct SummationTerm {
    pub indices: Vec<usize>,
    pub sign: Sign,
    pub coefficient: f64,
}

impl SummationTerm {
    pub fn signed(&self) -> f64 {
        self.sign.value() * self.coefficient
    }
}

/// Terms `(-1)^i C(k, i)` for `i = 0..=k`, the expansion of `(A - B)^k`.
pub fn alternating_binomial_terms(k: usize) -> Vec<SummationTerm> {
    (0..=k)
        .map(|i| SummationTerm {
            indices: vec![i],
            sign: Sign::from_parity(i),
            coefficient: binomial(k as u32, i as u32),
        })
        .collect()
}

/// Terms `(-1)^(j1+j2) C(k1, j1) C(k2, j2)` of a two-fold expansion.
pub fn double_alternating_terms(k1: usize, k2: usize) -> Vec<SummationTerm> {
    let mut out = Vec::with_capacity((k1 + 1) * (k2 + 1));
    for j1 in 0..=k1 {
        for j2 in 0..=k2 {
            out.push(SummationTerm {
                indices: vec![j1, j2],
                sign: Sign::from_parity(j1 + j2),
                coefficient: binomial(k1 as u32, j1 as u32) * binomial(k2 as u32, j2 as u32),
            });
        }
    }
    out
}

/// `sum_{j=0}^{n-1} C(n-1, j) (-1)^j j^l` evaluated exactly (`0^0 = 1`).
///
/// Zero for `1 <= l <= n-2` and `(-1)^(n-1) (n-1)!` at `l = n-1`.
pub fn alternating_binomial_sum(n: u32, l: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Config("alternating binomial sum needs n >= 1".into()));
    }
    if n > MAX_ALTERNATING_N {
        return Err(Error::Config(format!(
            "alternating binomial sum refused for n = {n} > {MAX_ALTERNATING_N}"
        )));
    }
    let top = n - 1;
    let mut total = BigInt::zero();
    let mut coeff = BigInt::one();
    for j in 0..=top {
        let term = &coeff * num_traits::pow(BigInt::from(j), l as usize);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
        coeff = coeff * BigInt::from(top - j) / BigInt::from(j + 1);
    }
    Ok(total.to_f64().unwrap_or(f64::NAN))
}

/// `A^p - B^p` given `A`, `B` and an accurately computed `A - B`.
///
/// Avoids the cancellation of subtracting two nearly equal powers.
pub fn pow_difference(a: f64, b: f64, a_minus_b: f64, p: u32) -> f64 {
    if p == 0 {
        return 0.0;
    }
    // A^p - B^p = (A - B) * sum_{j<p} A^(p-1-j) B^j, summed by Horner in A.
    let mut sum = 1.0;
    let mut b_pow = 1.0;
    for _ in 1..p {
        b_pow *= b;
        sum = sum * a + b_pow;
    }
    a_minus_b * sum
}
