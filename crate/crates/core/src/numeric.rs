//! Scalar kernels shared by the bound formulas.

use serde::{Deserialize, Serialize};

/// Below this argument the power gap is summed as a binomial series.
pub const SERIES_CUTOFF: f64 = 1e-4;

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(Σ exp(x_i))`, `-inf` for an empty sequence.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// The power gap `(1 + t)^p - 1 - t^p` for `t >= 0`.
///
/// Three branches keep the relative error near machine precision:
/// a binomial series for tiny `t`, `expm1(p log1p t) - t^p` on `[1e-4, 1]`,
/// and the reflected form `t^p expm1(p log1p(1/t)) - 1` above 1, where
/// `(1 + t)^p` and `t^p` would otherwise cancel.
pub fn power_gap(t: f64, p: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t == 0.0 {
        return 0.0;
    }
    if t < SERIES_CUTOFF {
        binomial_tail(t, p) - t.powf(p)
    } else if t <= 1.0 {
        (p * t.ln_1p()).exp_m1() - t.powf(p)
    } else {
        let tp = t.powf(p);
        tp * (p * t.recip().ln_1p()).exp_m1() - 1.0
    }
}

/// `Σ_{k≥1} C(p, k) t^k`, i.e. `(1 + t)^p - 1`, for small `t`.
///
/// Starts from the four leading terms and keeps adding terms while they
/// still move the sum; integer `p` terminates on its own.
fn binomial_tail(t: f64, p: f64) -> f64 {
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for k in 1..=64u32 {
        let kf = f64::from(k);
        coeff *= (p - kf + 1.0) / kf;
        power *= t;
        let term = coeff * power;
        sum += term;
        if coeff == 0.0 || (k >= 4 && term.abs() <= f64::EPSILON * 0.25 * sum.abs()) {
            break;
        }
    }
    sum
}

/// A nonnegative sum carried either directly or as its natural logarithm.
///
/// Ratios of two sums are formed in whichever representation the pair
/// shares, so large exponents never have to materialize `x^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PowerSum {
    Plain(f64),
    Log(f64),
}

impl std::ops::Add for PowerSum {
    type Output = PowerSum;

    fn add(self, other: PowerSum) -> PowerSum {
        match (self, other) {
            (PowerSum::Plain(a), PowerSum::Plain(b)) => PowerSum::Plain(a + b),
            (a, b) => PowerSum::Log(log_add_exp(a.ln(), b.ln())),
        }
    }
}

impl PowerSum {
    pub fn value(self) -> f64 {
        match self {
            PowerSum::Plain(v) => v,
            PowerSum::Log(l) => l.exp(),
        }
    }

    pub fn ln(self) -> f64 {
        match self {
            PowerSum::Plain(v) => v.ln(),
            PowerSum::Log(l) => l,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            PowerSum::Plain(v) => v == 0.0,
            PowerSum::Log(l) => l == f64::NEG_INFINITY,
        }
    }

    pub fn scale(self, c: f64) -> PowerSum {
        match self {
            PowerSum::Plain(v) => PowerSum::Plain(c * v),
            PowerSum::Log(l) => PowerSum::Log(l + c.ln()),
        }
    }

    /// `self / other`.
    pub fn ratio(self, other: PowerSum) -> f64 {
        match (self, other) {
            (PowerSum::Plain(a), PowerSum::Plain(b)) => a / b,
            (a, b) => (a.ln() - b.ln()).exp(),
        }
    }

    /// `(self / other)^e`.
    pub fn ratio_pow(self, other: PowerSum, e: f64) -> f64 {
        match (self, other) {
            (PowerSum::Plain(a), PowerSum::Plain(b)) => (a / b).powf(e),
            (a, b) => (e * (a.ln() - b.ln())).exp(),
        }
    }

    /// `sqrt(self * other)`.
    pub fn geometric_mean(self, other: PowerSum) -> PowerSum {
        match (self, other) {
            (PowerSum::Plain(a), PowerSum::Plain(b)) => PowerSum::Plain(a.sqrt() * b.sqrt()),
            (a, b) => PowerSum::Log(0.5 * (a.ln() + b.ln())),
        }
    }

    /// `self^e`.
    pub fn pow(self, e: f64) -> f64 {
        match self {
            PowerSum::Plain(v) => v.powf(e),
            PowerSum::Log(l) => (e * l).exp(),
        }
    }
}

/// Signed relative difference `(a - b) / max(|a|, |b|, tiny)`.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    (a - b) / scale
}
