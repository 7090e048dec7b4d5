//! Finite weighted measure spaces and nonnegative functions on them.
//!
//! Every integral in the crate is a weighted sum over atoms. Norms are
//! evaluated either directly or in the log domain; the log domain takes
//! over for large exponents or values spanning many orders of magnitude.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, PowerSum};

/// Exponents above this always use the log-domain path.
pub const DIRECT_MAX_EXPONENT: f64 = 32.0;
/// Value dynamic range above which the log-domain path is used.
pub const DIRECT_MAX_DYNAMIC_RANGE: f64 = 1e8;
/// `p` is treated as exactly 2 within this distance.
pub const EXACTLY_TWO_TOL: f64 = 1e-12;

/// Atom weights of a finite measure space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MeasureSpace {
    weights: Arc<[f64]>,
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeight { index, value });
        }
        Ok(Self {
            weights: weights.into(),
        })
    }

    /// Counting measure on `n` atoms.
    pub fn counting(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn same_as(&self, other: &MeasureSpace) -> bool {
        Arc::ptr_eq(&self.weights, &other.weights) || self.weights == other.weights
    }
}

impl TryFrom<Vec<f64>> for MeasureSpace {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<MeasureSpace> for Vec<f64> {
    fn from(space: MeasureSpace) -> Self {
        space.weights.to_vec()
    }
}

/// A nonnegative function on a [`MeasureSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFunction {
    space: MeasureSpace,
    values: Vec<f64>,
}

impl WeightedFunction {
    pub fn new(space: &MeasureSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidValue { index, value });
        }
        Ok(Self {
            space: space.clone(),
            values,
        })
    }

    /// Function on the counting measure with as many atoms as values.
    pub fn counting(values: Vec<f64>) -> Result<Self> {
        let space = MeasureSpace::counting(values.len())?;
        Self::new(&space, values)
    }

    pub fn zero(space: &MeasureSpace) -> Self {
        Self {
            space: space.clone(),
            values: vec![0.0; space.len()],
        }
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        self.space.weights()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Ratio of the largest to the smallest nonzero value (1 for zero functions).
    pub fn dynamic_range(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .filter(|&&v| v > 0.0)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(i, _)| i)
    }

    /// `c · f` for `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::precondition(format!(
                "scale factor {c} must be finite and nonnegative"
            )));
        }
        Ok(self.map(|v| c * v))
    }

    /// `f^e` pointwise with `0^0 = 1` and `0^e = 0` for `e > 0`.
    pub fn powf(&self, e: f64) -> Self {
        self.map(|v| power(v, e))
    }

    fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    pub(crate) fn check_same_space(&self, other: &WeightedFunction) -> Result<()> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// `x^e` with the conventions `0^0 = 1` and `0^e = 0` for `e > 0`.
pub(crate) fn power(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if x == 0.0 {
        if e > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else if e == 1.0 {
        x
    } else {
        x.powf(e)
    }
}

/// Where `p` sits relative to the thresholds 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `p ∈ (0, 1]`; only used internally by the reverse forms.
    AtMostOne,
    Between1And2,
    Exactly2,
    AtLeast2,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::AtMostOne => "p<=1",
            Regime::Between1And2 => "1<p<2",
            Regime::Exactly2 => "p=2",
            Regime::AtLeast2 => "p>2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    Direct,
    LogDomain,
}

/// The exponent `p` with its conjugate and regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentContext {
    pub p: f64,
    pub q: f64,
    pub regime: Regime,
    /// Path forced by the exponent alone; values can still push a norm to the log domain.
    pub eval_path: EvalPath,
}

impl ExponentContext {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidExponent(p));
        }
        let regime = if (p - 2.0).abs() <= EXACTLY_TWO_TOL {
            Regime::Exactly2
        } else if p > 2.0 {
            Regime::AtLeast2
        } else if p > 1.0 {
            Regime::Between1And2
        } else {
            Regime::AtMostOne
        };
        let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
        let eval_path = if p > DIRECT_MAX_EXPONENT {
            EvalPath::LogDomain
        } else {
            EvalPath::Direct
        };
        Ok(Self {
            p,
            q,
            regime,
            eval_path,
        })
    }

    /// Context for `p > 1`, the range where the two-function bounds live.
    pub fn above_one(p: f64) -> Result<Self> {
        let ctx = Self::new(p)?;
        if ctx.regime == Regime::AtMostOne {
            return Err(Error::UnsupportedRegime {
                what: "two-function bounds",
                p,
            });
        }
        Ok(ctx)
    }

    /// `p ≥ 2` (the forward direction of every upper bound).
    pub fn is_upper_regime(&self) -> bool {
        matches!(self.regime, Regime::Exactly2 | Regime::AtLeast2)
    }

    /// `p ∈ (1, 2]`, where the inequalities reverse.
    pub fn is_reverse_regime(&self) -> bool {
        matches!(self.regime, Regime::Exactly2 | Regime::Between1And2)
    }

    /// Evaluation path for functions with the given dynamic range.
    pub fn path_for(&self, dynamic_range: f64) -> EvalPath {
        if self.eval_path == EvalPath::LogDomain || dynamic_range > DIRECT_MAX_DYNAMIC_RANGE {
            EvalPath::LogDomain
        } else {
            EvalPath::Direct
        }
    }
}

/// `Σ_i w_i f_i^a g_i^b` over atoms, with `0^0 = 1`.
///
/// Atoms contributing an exact zero are skipped on the log-domain path.
pub fn mixed_power_sum(weights: &[f64], f: &[f64], a: f64, g: &[f64], b: f64, path: EvalPath) -> PowerSum {
    match path {
        EvalPath::Direct => PowerSum::Plain(
            weights
                .iter()
                .zip(f)
                .zip(g)
                .map(|((&w, &x), &y)| w * power(x, a) * power(y, b))
                .sum(),
        ),
        EvalPath::LogDomain => {
            let logs: Vec<f64> = weights
                .iter()
                .zip(f)
                .zip(g)
                .filter(|((_, &x), &y)| !(a != 0.0 && x == 0.0) && !(b != 0.0 && y == 0.0))
                .map(|((&w, &x), &y)| {
                    let mut l = w.ln();
                    if a != 0.0 {
                        l += a * x.ln();
                    }
                    if b != 0.0 {
                        l += b * y.ln();
                    }
                    l
                })
                .collect();
            PowerSum::Log(log_sum_exp(&logs))
        }
    }
}

/// `∫ f^p = Σ w_i f_i^p` along a chosen path.
pub fn power_integral_with(f: &WeightedFunction, p: f64, path: EvalPath) -> PowerSum {
    mixed_power_sum(f.weights(), f.values(), p, f.values(), 0.0, path)
}

/// Path selected for `f` at exponent `p`.
pub fn select_path(f: &WeightedFunction, p: f64) -> EvalPath {
    if p > DIRECT_MAX_EXPONENT || f.dynamic_range() > DIRECT_MAX_DYNAMIC_RANGE {
        EvalPath::LogDomain
    } else {
        EvalPath::Direct
    }
}

/// `∫ f^p` with automatic path selection.
pub fn power_integral(f: &WeightedFunction, p: f64) -> f64 {
    power_integral_with(f, p, select_path(f, p)).value()
}

/// `(Σ w_i f_i^p)^{1/p}` along a chosen path. Zero functions have norm 0.
pub fn norm_p_with(f: &WeightedFunction, p: f64, path: EvalPath) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    match path {
        EvalPath::Direct => {
            // Rescale by the maximum so f^p cannot overflow or underflow.
            let m = f.max_value();
            let s: f64 = f
                .weights()
                .iter()
                .zip(f.values())
                .map(|(&w, &v)| w * power(v / m, p))
                .sum();
            m * s.powf(p.recip())
        }
        EvalPath::LogDomain => (power_integral_with(f, p, EvalPath::LogDomain).ln() / p).exp(),
    }
}

/// `‖f‖_p` for the context's exponent.
pub fn norm_p(f: &WeightedFunction, ctx: &ExponentContext) -> f64 {
    norm_p_with(f, ctx.p, ctx.path_for(f.dynamic_range()))
}

/// `(Σ w_i f_i^r)^{1/r}` for any `r ≠ 0`; negative `r` needs a strictly positive `f`.
pub(crate) fn power_mean(f: &WeightedFunction, r: f64) -> Result<f64> {
    if r == 0.0 || !r.is_finite() {
        return Err(Error::InvalidExponent(r));
    }
    if r > 0.0 {
        return Ok(norm_p_with(f, r, select_path(f, r)));
    }
    if !f.is_strictly_positive() {
        return Err(Error::precondition(
            "negative exponent needs a strictly positive function",
        ));
    }
    let s = power_integral_with(f, r, EvalPath::LogDomain);
    Ok((s.ln() / r).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointwiseOp {
    Product,
    Sum,
    AbsDifference,
}

/// `f ∘ g^e` pointwise, where `∘` is product, sum, or absolute difference.
pub fn pointwise(
    f: &WeightedFunction,
    g: &WeightedFunction,
    op: PointwiseOp,
    exponent_on_g: f64,
) -> Result<WeightedFunction> {
    f.check_same_space(g)?;
    if !(exponent_on_g.is_finite() && exponent_on_g >= 0.0) {
        return Err(Error::InvalidExponent(exponent_on_g));
    }
    let values = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(&x, &y)| {
            let y = power(y, exponent_on_g);
            match op {
                PointwiseOp::Product => x * y,
                PointwiseOp::Sum => x + y,
                PointwiseOp::AbsDifference => (x - y).abs(),
            }
        })
        .collect();
    WeightedFunction::new(f.space(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counting(values: &[f64]) -> WeightedFunction {
        WeightedFunction::counting(values.to_vec()).unwrap()
    }

    #[test]
    fn rejects_malformed_spaces_and_functions() {
        assert_eq!(MeasureSpace::new(vec![]), Err(Error::EmptySpace));
        assert!(matches!(
            MeasureSpace::new(vec![1.0, 0.0]),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
        let space = MeasureSpace::counting(3).unwrap();
        assert_eq!(
            WeightedFunction::new(&space, vec![1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        );
        assert!(matches!(
            WeightedFunction::new(&space, vec![1.0, -2.0, 0.0]),
            Err(Error::InvalidValue { index: 1, .. })
        ));
        assert!(matches!(
            WeightedFunction::new(&space, vec![1.0, f64::NAN, 0.0]),
            Err(Error::InvalidValue { index: 1, .. })
        ));
    }

    #[test]
    fn norm_of_counting_example() {
        let ctx = ExponentContext::new(2.0).unwrap();
        assert_eq!(norm_p(&counting(&[1.0, 2.0, 2.0]), &ctx), 3.0);
    }

    #[test]
    fn norm_at_one_is_weighted_sum() {
        let space = MeasureSpace::new(vec![0.5, 2.0, 3.0]).unwrap();
        let f = WeightedFunction::new(&space, vec![4.0, 0.25, 1.0]).unwrap();
        let ctx = ExponentContext::new(1.0).unwrap();
        assert!((norm_p(&f, &ctx) - 5.5).abs() < 1e-15);
    }

    #[test]
    fn zero_function_has_zero_norm_on_both_paths() {
        let f = counting(&[0.0, 0.0]);
        assert_eq!(norm_p_with(&f, 3.0, EvalPath::Direct), 0.0);
        assert_eq!(norm_p_with(&f, 3.0, EvalPath::LogDomain), 0.0);
    }

    #[test]
    fn wide_range_norm_matches_multiprecision_value() {
        // (1e144 + 1e-144)^(1/24) = 1e6 to far beyond double precision.
        let f = counting(&[1e6, 1e-6]);
        let ctx = ExponentContext::new(24.0).unwrap();
        for path in [EvalPath::Direct, EvalPath::LogDomain] {
            let v = norm_p_with(&f, 24.0, path);
            assert!(((v - 1e6) / 1e6).abs() < 1e-12, "{path:?}: {v}");
        }
        assert_eq!(ctx.path_for(f.dynamic_range()), EvalPath::LogDomain);
    }

    #[test]
    fn context_regimes_and_conjugate() {
        let ctx = ExponentContext::new(3.0).unwrap();
        assert_eq!(ctx.regime, Regime::AtLeast2);
        assert!((1.0 / ctx.p + 1.0 / ctx.q - 1.0).abs() < 1e-14);
        assert_eq!(ExponentContext::new(2.0 + 1e-13).unwrap().regime, Regime::Exactly2);
        assert_eq!(ExponentContext::new(1.5).unwrap().regime, Regime::Between1And2);
        assert_eq!(ExponentContext::new(0.5).unwrap().regime, Regime::AtMostOne);
        assert_eq!(ExponentContext::new(40.0).unwrap().eval_path, EvalPath::LogDomain);
        assert!(ExponentContext::new(0.0).is_err());
        assert!(ExponentContext::above_one(1.0).is_err());
    }

    #[test]
    fn pointwise_examples() {
        let f = counting(&[1.0, 1.0]);
        let g = counting(&[1.0, 0.0]);
        let r = pointwise(&f, &g, PointwiseOp::Product, 3.0).unwrap();
        assert_eq!(r.values(), &[1.0, 0.0]);

        let f = counting(&[2.0, 1.0]);
        let g = counting(&[1.0, 1.0]);
        let r = pointwise(&f, &g, PointwiseOp::Sum, 1.0).unwrap();
        assert_eq!(r.values(), &[3.0, 2.0]);

        let f = counting(&[1.0, 1.0]);
        let g = counting(&[4.0, 0.0]);
        let r = pointwise(&f, &g, PointwiseOp::Product, 0.5).unwrap();
        assert_eq!(r.values(), &[2.0, 0.0]);

        let r = pointwise(&f, &g, PointwiseOp::Product, 0.0).unwrap();
        assert_eq!(r.values(), &[1.0, 1.0]);

        let r = pointwise(&f, &g, PointwiseOp::AbsDifference, 1.0).unwrap();
        assert_eq!(r.values(), &[3.0, 1.0]);
    }

    #[test]
    fn pointwise_rejects_foreign_space() {
        let f = counting(&[1.0, 1.0]);
        let other = MeasureSpace::new(vec![1.0, 2.0]).unwrap();
        let g = WeightedFunction::new(&other, vec![1.0, 1.0]).unwrap();
        assert_eq!(pointwise(&f, &g, PointwiseOp::Sum, 1.0), Err(Error::SpaceMismatch));
    }

    #[test]
    fn negative_power_mean_needs_positive_function() {
        assert!(power_mean(&counting(&[1.0, 0.0]), -1.0).is_err());
        let hm = power_mean(&counting(&[1.0, 1.0]), -1.0).unwrap();
        assert!((hm - 0.5).abs() < 1e-15);
    }
}
