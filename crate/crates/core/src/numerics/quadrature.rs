//! Globally adaptive Gauss-Kronrod (10/21 point) quadrature.
//!
//! Every definite integral in the F-NOMA and CR-NOMA evaluators goes through
//! [`Integrator::integrate`]. A semi-infinite range `[a, +inf)` is mapped onto
//! `[0, 1)` with `x = a + t / (1 - t)` before subdivision; the integrands in this
//! crate decay exponentially so the mapped integrand stays bounded.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Default absolute tolerance.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
/// Default relative tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Default cap on the number of live subintervals.
pub const DEFAULT_MAX_INTERVALS: usize = 4000;

/// Value, absolute error bound and evaluation count of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_bound: f64,
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

// QUADPACK's heuristic rescaling of |K21 - G10|.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand { abscissa: x })
    }
}

fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = checked(f, center)?;
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jt = 2 * j + 1;
        let dx = half * XGK[jt];
        let f1 = checked(f, center - dx)?;
        let f2 = checked(f, center + dx)?;
        fv1[jt] = f1;
        fv2[jt] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jt] * (f1 + f2);
        res_abs += WGK[jt] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jt = 2 * j;
        let dx = half * XGK[jt];
        let f1 = checked(f, center - dx)?;
        let f2 = checked(f, center + dx)?;
        fv1[jt] = f1;
        fv2[jt] = f2;
        res_k += WGK[jt] * (f1 + f2);
        res_abs += WGK[jt] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let error = rescale_error((res_k - res_g) * half, res_abs * scale, res_asc * scale);
    Ok(Segment {
        a,
        b,
        value: res_k * half,
        error,
    })
}

/// Adaptive integrator with explicit tolerances and a subdivision budget.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            max_intervals: DEFAULT_MAX_INTERVALS,
        }
    }
}

impl Integrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrator tuned for probabilities that may be many orders of magnitude
    /// below one, where only a relative criterion is meaningful.
    pub fn relative(rel_tol: f64) -> Self {
        Self::new(1e-300, rel_tol)
    }

    /// Integrates `f` over `[lower, upper]`; `upper` may be `f64::INFINITY`.
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        lower: f64,
        upper: f64,
    ) -> Result<QuadratureResult> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "tolerances must be positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if lower.is_nan() || upper.is_nan() || !lower.is_finite() || lower >= upper {
            return Err(Error::Config(format!(
                "integration range [{lower}, {upper}] must satisfy finite lower < upper"
            )));
        }
        if upper.is_infinite() {
            let mapped = |t: f64| {
                let s = 1.0 - t;
                let x = lower + t / s;
                if x.is_infinite() {
                    0.0
                } else {
                    f(x) / (s * s)
                }
            };
            return self.adapt(&mapped, 0.0, 1.0);
        }
        self.adapt(&f, lower, upper)
    }

    fn adapt<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<QuadratureResult> {
        let first = gauss_kronrod_21(f, a, b)?;
        let mut evaluations = 21;
        let mut total = first.value;
        let mut error = first.error;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        loop {
            if error <= self.abs_tol.max(self.rel_tol * total.abs()) {
                return Ok(QuadratureResult {
                    value: total,
                    error_bound: error,
                    evaluations,
                });
            }
            let worst = match heap.pop() {
                Some(s) => s,
                None => break,
            };
            let mid = 0.5 * (worst.a + worst.b);
            // The worst interval cannot be split further in floating point.
            if mid <= worst.a || mid >= worst.b || heap.len() + 2 > self.max_intervals {
                heap.push(worst);
                break;
            }
            let left = gauss_kronrod_21(f, worst.a, mid)?;
            let right = gauss_kronrod_21(f, mid, worst.b)?;
            evaluations += 42;
            total += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            // Re-sum occasionally so incremental updates do not drift.
            if evaluations % (42 * 64) == 21 {
                total = heap.iter().map(|s| s.value).sum();
                error = heap.iter().map(|s| s.error).sum();
            }
        }
        total = heap.iter().map(|s| s.value).sum();
        error = heap.iter().map(|s| s.error).sum();
        if error <= self.abs_tol.max(self.rel_tol * total.abs()) {
            return Ok(QuadratureResult {
                value: total,
                error_bound: error,
                evaluations,
            });
        }
        Err(Error::QuadratureBudget {
            estimate: total,
            error_bound: error,
            evaluations,
        })
    }
}

/// Integrates `f` over `[lower, upper]` (upper may be `+inf`) to
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    upper: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    Integrator::new(abs_tol, rel_tol).integrate(f, lower, upper)
}
