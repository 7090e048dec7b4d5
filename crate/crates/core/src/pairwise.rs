//! Two-function bounds on `‖f + g‖_p^p / (‖f‖_p^p + ‖g‖_p^p)`.
//!
//! The classical factors (`2^{p-1}`, Carbery, Carlen–Frank–Ivanisvili–Lieb,
//! Ivanisvili–Mooney) depend on the pair only through one overlap number.
//! The sandwich factors `J̲` and `J̄` depend on Hölder ratios between
//! mixed moments and are evaluated for both orientations of the pair.
//!
//! For `p ≥ 2` the sandwich reads
//!
//! ```text
//! max{J̲(f,g), J̲(g,f)} ≤ ratio ≤ min{J̄(f,g), J̄(g,f)}
//! ```
//!
//! and for `p ∈ (1, 2]` it reverses with max and min interchanged:
//! `max{J̄} ≤ ratio ≤ min{J̲}`, where the upper side needs both functions
//! strictly positive.

use serde::{Deserialize, Serialize};

use crate::check::{Relation, Sides, TolerancePolicy};
use crate::error::{Error, Result};
use crate::measure::{
    mixed_power_sum, power_integral_with, power_mean, EvalPath, ExponentContext, Regime, WeightedFunction,
};
use crate::numeric::{power_gap, PowerSum};

/// Slack allowed on `Γ ≤ 1` before it counts as a numerical failure.
pub const GAMMA_CLAMP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Fg,
    Gf,
}

impl Orientation {
    pub const BOTH: [Orientation; 2] = [Orientation::Fg, Orientation::Gf];

    pub fn swapped(self) -> Self {
        match self {
            Orientation::Fg => Orientation::Gf,
            Orientation::Gf => Orientation::Fg,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Fg => "fg",
            Orientation::Gf => "gf",
        }
    }
}

/// Whether a factor bounds the ratio from above or below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    Upper,
    Lower,
}

impl BoundDirection {
    /// Relation `ratio ? factor` this direction asserts.
    pub fn relation(self) -> Relation {
        match self {
            BoundDirection::Upper => Relation::LessEq,
            BoundDirection::Lower => Relation::GreaterEq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedFactor {
    pub value: f64,
    pub direction: BoundDirection,
}

/// Sums over atoms shared by every pair quantity.
///
/// `mixed_fg = ∫ f g^{p-1}` and `mixed_gf = ∫ g f^{p-1}`; the second is also
/// the `(p-1)`-moment `∫ (f g^{1/(p-1)})^{p-1}` used by `J̄(f,g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PairSums {
    path: EvalPath,
    f: PowerSum,
    g: PowerSum,
    sum: PowerSum,
    cross: PowerSum,
    mixed_fg: PowerSum,
    mixed_gf: PowerSum,
}

/// A validated pair `(f, g)` of nonzero nonnegative functions with `p > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairInput {
    f: WeightedFunction,
    g: WeightedFunction,
    ctx: ExponentContext,
    sums: PairSums,
}

impl PairInput {
    pub fn new(f: WeightedFunction, g: WeightedFunction, ctx: ExponentContext) -> Result<Self> {
        f.check_same_space(&g)?;
        if ctx.regime == Regime::AtMostOne {
            return Err(Error::UnsupportedRegime {
                what: "pair bounds",
                p: ctx.p,
            });
        }
        if f.is_zero() || g.is_zero() {
            return Err(Error::precondition("both functions need a nonzero p-norm"));
        }
        let p = ctx.p;
        let path = ctx.path_for(f.dynamic_range().max(g.dynamic_range()));
        let w = f.weights();
        let (fv, gv) = (f.values(), g.values());
        let sum_values: Vec<f64> = fv.iter().zip(gv).map(|(a, b)| a + b).collect();
        let sums = PairSums {
            path,
            f: power_integral_with(&f, p, path),
            g: power_integral_with(&g, p, path),
            sum: mixed_power_sum(w, &sum_values, p, &sum_values, 0.0, path),
            cross: mixed_power_sum(w, fv, 0.5 * p, gv, 0.5 * p, path),
            mixed_fg: mixed_power_sum(w, fv, 1.0, gv, p - 1.0, path),
            mixed_gf: mixed_power_sum(w, gv, 1.0, fv, p - 1.0, path),
        };
        if sums.f.is_zero() || sums.g.is_zero() {
            return Err(Error::precondition("p-norm underflowed to zero"));
        }
        Ok(Self { f, g, ctx, sums })
    }

    /// Convenience constructor from raw counting-measure values.
    pub fn counting(f: &[f64], g: &[f64], p: f64) -> Result<Self> {
        let f = WeightedFunction::counting(f.to_vec())?;
        let g = WeightedFunction::new(f.space(), g.to_vec())?;
        Self::new(f, g, ExponentContext::new(p)?)
    }

    pub fn f(&self) -> &WeightedFunction {
        &self.f
    }

    pub fn g(&self) -> &WeightedFunction {
        &self.g
    }

    pub fn ctx(&self) -> &ExponentContext {
        &self.ctx
    }

    pub fn p(&self) -> f64 {
        self.ctx.p
    }

    pub fn eval_path(&self) -> EvalPath {
        self.sums.path
    }

    pub fn both_strictly_positive(&self) -> bool {
        self.f.is_strictly_positive() && self.g.is_strictly_positive()
    }

    /// `(first, second)` for the orientation: `(f, g)` or `(g, f)`.
    pub fn oriented(&self, o: Orientation) -> (&WeightedFunction, &WeightedFunction) {
        match o {
            Orientation::Fg => (&self.f, &self.g),
            Orientation::Gf => (&self.g, &self.f),
        }
    }

    /// The same pair with `f` and `g` exchanged.
    pub fn swapped(&self) -> PairInput {
        let s = self.sums;
        PairInput {
            f: self.g.clone(),
            g: self.f.clone(),
            ctx: self.ctx,
            sums: PairSums {
                f: s.g,
                g: s.f,
                mixed_fg: s.mixed_gf,
                mixed_gf: s.mixed_fg,
                ..s
            },
        }
    }

    /// `‖f‖_p^p`.
    pub fn f_power(&self) -> f64 {
        self.sums.f.value()
    }

    /// `‖g‖_p^p`.
    pub fn g_power(&self) -> f64 {
        self.sums.g.value()
    }

    /// `‖f + g‖_p^p`.
    pub fn sum_power(&self) -> f64 {
        self.sums.sum.value()
    }

    pub fn norm_f(&self) -> f64 {
        self.sums.f.pow(self.p().recip())
    }

    pub fn norm_g(&self) -> f64 {
        self.sums.g.pow(self.p().recip())
    }

    pub fn norm_sum(&self) -> f64 {
        self.sums.sum.pow(self.p().recip())
    }

    /// `‖f + g‖_p^p / (‖f‖_p^p + ‖g‖_p^p)`.
    pub fn ratio(&self) -> f64 {
        self.sums.sum.ratio(self.sums.f + self.sums.g)
    }

    fn oriented_sums(&self, o: Orientation) -> (PowerSum, PowerSum, PowerSum, PowerSum) {
        let s = &self.sums;
        match o {
            Orientation::Fg => (s.f, s.g, s.mixed_fg, s.mixed_gf),
            Orientation::Gf => (s.g, s.f, s.mixed_gf, s.mixed_fg),
        }
    }
}

/// `Γ_p = 2‖fg‖_{p/2}^{p/2} / (‖f‖_p^p + ‖g‖_p^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaStatistic {
    pub gamma: f64,
}

pub fn gamma_p(pair: &PairInput) -> GammaStatistic {
    let s = &pair.sums;
    GammaStatistic {
        gamma: 2.0 * s.cross.ratio(s.f + s.g),
    }
}

/// Hölder ratios for one orientation `(f, g)`:
///
/// * `t = ‖f‖_p / ‖g‖_p`
/// * `t1 = ‖f g^{p-1}‖_1 / ‖g‖_p^p`
/// * `t2 = ‖f g^{1/(p-1)}‖_{p-1} / ‖g^q‖_{p-1}`
/// * `lambda = t2 / t`
///
/// For `p ≥ 2`, `t1 ≤ t2 ≤ t`; both inequalities reverse below 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderRatios {
    pub t: f64,
    pub t1: f64,
    pub t2: f64,
    pub lambda: f64,
    /// `t^p`, formed from the sums directly.
    pub t_pow_p: f64,
}

pub fn holder_ratios(pair: &PairInput, o: Orientation) -> HolderRatios {
    let p = pair.p();
    let (first, second, mixed, moment) = pair.oriented_sums(o);
    let t_pow_p = first.ratio(second);
    let t = first.ratio_pow(second, p.recip());
    let t1 = mixed.ratio(second);
    let t2 = moment.ratio_pow(second, (p - 1.0).recip());
    HolderRatios {
        t,
        t1,
        t2,
        lambda: if t > 0.0 { t2 / t } else { 0.0 },
        t_pow_p,
    }
}

fn sandwich_factor(inner: f64, t_pow_p: f64, p: f64) -> f64 {
    1.0 + power_gap(inner, p) / (1.0 + t_pow_p)
}

/// `J̄_p` for the orientation: `1 + H(t2) / (1 + t^p)`, `H(t) = (1+t)^p - 1 - t^p`.
///
/// An upper bound for `p ≥ 2`, a lower bound for `p ∈ (1, 2]`.
pub fn j_upper(pair: &PairInput, o: Orientation) -> f64 {
    let h = holder_ratios(pair, o);
    sandwich_factor(h.t2, h.t_pow_p, pair.p())
}

/// `J̲_p` for the orientation: `1 + H(t1) / (1 + t^p)`.
///
/// A lower bound for `p ≥ 2`, an upper bound for `p ∈ (1, 2]` when both
/// functions are strictly positive.
pub fn j_lower(pair: &PairInput, o: Orientation) -> f64 {
    let h = holder_ratios(pair, o);
    sandwich_factor(h.t1, h.t_pow_p, pair.p())
}

fn require_upper_regime(pair: &PairInput, what: &'static str) -> Result<()> {
    if pair.ctx.is_upper_regime() {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime { what, p: pair.p() })
    }
}

fn require_positive(pair: &PairInput, what: &str) -> Result<()> {
    if pair.both_strictly_positive() {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "{what} for p = {} needs f and g strictly positive",
            pair.p()
        )))
    }
}

/// `2^{p-1}`.
pub fn trivial_factor(p: f64) -> f64 {
    (p - 1.0).exp2()
}

/// Carbery's factor `(1 + ‖fg‖_{p/2} / (‖f‖_p ‖g‖_p))^{p-1}`, `p ≥ 2`.
pub fn carbery_factor(pair: &PairInput) -> Result<f64> {
    require_upper_regime(pair, "Carbery's bound")?;
    let p = pair.p();
    let s = &pair.sums;
    let overlap = s.cross.ratio_pow(s.f.geometric_mean(s.g), 2.0 / p);
    Ok((1.0 + overlap).powf(p - 1.0))
}

/// `(1 + Γ^{2/p})^{p-1}`: an upper bound for `p ≥ 2`, a lower bound for
/// `p ∈ (1, 2)` with strictly positive functions.
pub fn cfil_factor(pair: &PairInput) -> Result<DirectedFactor> {
    let p = pair.p();
    let direction = if pair.ctx.is_upper_regime() {
        BoundDirection::Upper
    } else {
        require_positive(pair, "the reverse CFIL bound")?;
        BoundDirection::Lower
    };
    let gamma = gamma_p(pair).gamma;
    Ok(DirectedFactor {
        value: (1.0 + gamma.powf(2.0 / p)).powf(p - 1.0),
        direction,
    })
}

/// `((½(1+s))^{1/p} + (½(1-s))^{1/p})^p` with `s = √(1 - γ²)`.
pub fn mooney_factor_from_gamma(gamma: f64, p: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::NumericalDomain(format!("Γ = {gamma} is negative")));
    }
    let d = 1.0 - gamma * gamma;
    if d < -GAMMA_CLAMP_TOL {
        return Err(Error::NumericalDomain(format!("Γ = {gamma} exceeds 1")));
    }
    let s = d.max(0.0).sqrt();
    let hi = 0.5 * (1.0 + s);
    let r = p.recip();
    // ½(1 - s) = γ² / (2(1 + s)), free of cancellation as γ → 0; the root is
    // taken in logs because γ² underflows long before its p-th root does
    let lo_root = if gamma == 0.0 {
        0.0
    } else {
        (r * (2.0 * gamma.min(1.0).ln() - (2.0 * (1.0 + s)).ln())).exp()
    };
    Ok((hi.powf(r) + lo_root).powf(p))
}

/// Ivanisvili–Mooney factor: upper bound for `p ≥ 2`, lower for `p ∈ (1, 2]`.
pub fn mooney_factor(pair: &PairInput) -> Result<DirectedFactor> {
    let value = mooney_factor_from_gamma(gamma_p(pair).gamma, pair.p())?;
    let direction = if pair.ctx.is_upper_regime() {
        BoundDirection::Upper
    } else {
        BoundDirection::Lower
    };
    Ok(DirectedFactor { value, direction })
}

/// `1 + (2^p - 2) t1^{p/2} / (1 + t^p)`: below `J̲` for `p ≥ 2`, above it
/// (as an upper bound on the ratio, positive functions only) for `p ∈ (1, 2)`.
pub fn simplified_lower(pair: &PairInput, o: Orientation) -> Result<DirectedFactor> {
    let p = pair.p();
    let direction = if pair.ctx.is_upper_regime() {
        BoundDirection::Lower
    } else {
        require_positive(pair, "the reverse simplified bound")?;
        BoundDirection::Upper
    };
    let h = holder_ratios(pair, o);
    Ok(DirectedFactor {
        value: 1.0 + (p.exp2() - 2.0) * h.t1.powf(0.5 * p) / (1.0 + h.t_pow_p),
        direction,
    })
}

/// `(1 - λ) + λ (1 + t)^p / (1 + t^p)`, the interpolated bound in ratio units.
pub fn interpolated_upper_factor(pair: &PairInput, o: Orientation) -> Result<f64> {
    require_upper_regime(pair, "the interpolation bound")?;
    let p = pair.p();
    let h = holder_ratios(pair, o);
    // (1 + t)^p / (1 + t^p) = 1 + H(t) / (1 + t^p)
    let full = 1.0 + power_gap(h.t, p) / (1.0 + h.t_pow_p);
    Ok((1.0 - h.lambda) + h.lambda * full)
}

/// `λ(‖f‖_p + ‖g‖_p)^p + (1 - λ)(‖f‖_p^p + ‖g‖_p^p)` for `p ≥ 2`.
pub fn interpolated_upper(pair: &PairInput, o: Orientation) -> Result<f64> {
    let factor = interpolated_upper_factor(pair, o)?;
    Ok(factor * (pair.sums.f + pair.sums.g).value())
}

/// The chain `‖fg‖_1 ≤ ‖g‖_q(‖f + g^{1/(p-1)}‖_p - ‖g^{1/(p-1)}‖_p) ≤ ‖g‖_q‖f‖_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaChain {
    pub values: [f64; 3],
    /// `LessEq` for `p > 1` (increasing); `GreaterEq` for `p ∈ (0, 1)`.
    pub relation: Relation,
}

impl LemmaChain {
    /// The weaker of the two links.
    pub fn sides(&self) -> Sides {
        let [a, b, c] = self.values;
        let first = Sides {
            lhs: a,
            rhs: b,
            relation: self.relation,
        };
        let second = Sides {
            lhs: b,
            rhs: c,
            relation: self.relation,
        };
        first.weakest(second)
    }
}

/// Lemma chain for `p ∈ (0, 1) ∪ (1, ∞)`; the `(0, 1)` case reverses and
/// needs `g` strictly positive.
pub fn lemma1_chain(f: &WeightedFunction, g: &WeightedFunction, ctx: &ExponentContext) -> Result<LemmaChain> {
    f.check_same_space(g)?;
    let p = ctx.p;
    if p == 1.0 {
        return Err(Error::UnsupportedRegime {
            what: "the Hölder–Minkowski chain",
            p,
        });
    }
    let relation = if p > 1.0 {
        Relation::LessEq
    } else {
        if !g.is_strictly_positive() {
            return Err(Error::precondition(
                "the reverse chain for p < 1 needs g strictly positive",
            ));
        }
        Relation::GreaterEq
    };
    let q = ctx.q;
    let fg: f64 = f
        .weights()
        .iter()
        .zip(f.values().iter().zip(g.values()))
        .map(|(w, (a, b))| w * a * b)
        .sum();
    if g.is_zero() {
        return Ok(LemmaChain {
            values: [0.0; 3],
            relation,
        });
    }
    let g_q = power_mean(g, q)?;
    let h = g.powf((p - 1.0).recip());
    let shifted = WeightedFunction::new(
        f.space(),
        f.values().iter().zip(h.values()).map(|(a, b)| a + b).collect(),
    )?;
    let middle = g_q * (power_mean(&shifted, p)? - power_mean(&h, p)?);
    let f_p = if f.is_zero() { 0.0 } else { power_mean(f, p)? };
    Ok(LemmaChain {
        values: [fg, middle, g_q * f_p],
        relation,
    })
}

/// `‖g‖_p + ‖f g^{p-1}‖_1 / ‖g‖_p^{p-1} ≤ ‖f + g‖_p ≤ ‖f‖_p + ‖g‖_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReverseMinkowski {
    pub lower: f64,
    pub norm_sum: f64,
    pub minkowski_cap: f64,
}

/// Reverse Minkowski bound with the second function of the orientation as base.
pub fn reverse_minkowski_lower(pair: &PairInput, o: Orientation) -> ReverseMinkowski {
    let h = holder_ratios(pair, o);
    let (nf, ng) = match o {
        Orientation::Fg => (pair.norm_f(), pair.norm_g()),
        Orientation::Gf => (pair.norm_g(), pair.norm_f()),
    };
    // ‖fg^{p-1}‖_1 / ‖g‖_p^{p-1} = ‖g‖_p · t1
    ReverseMinkowski {
        lower: ng * (1.0 + h.t1),
        norm_sum: pair.norm_sum(),
        minkowski_cap: nf + ng,
    }
}

/// Observed `|J̄ - J̲|` against the cap `p 2^{p-1} |t2 - t1|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    /// Orientation whose first function has the smaller norm.
    pub orientation: Orientation,
    pub gap: f64,
    pub cap: f64,
}

pub fn error_estimate(pair: &PairInput) -> ErrorEstimate {
    let o = if pair.sums.f.ratio(pair.sums.g) <= 1.0 {
        Orientation::Fg
    } else {
        Orientation::Gf
    };
    let p = pair.p();
    let h = holder_ratios(pair, o);
    let gap = (sandwich_factor(h.t2, h.t_pow_p, p) - sandwich_factor(h.t1, h.t_pow_p, p)).abs();
    ErrorEstimate {
        orientation: o,
        gap,
        cap: p * trivial_factor(p) * (h.t2 - h.t1).abs(),
    }
}

/// Both sides of `‖f - g‖_p^p ≤ (2^p - 2)(1 - ‖f g^{p-1}‖_1^{p/2})` after
/// normalizing `f` and `g` to unit norm. Reversed for `p ∈ (1, 2)`, where
/// both functions must be strictly positive.
pub fn hanner_diff_sides(pair: &PairInput, o: Orientation) -> Result<Sides> {
    let p = pair.p();
    if !pair.ctx.is_upper_regime() {
        require_positive(pair, "the reverse difference bound")?;
    }
    let (a, b) = pair.oriented(o);
    let (na, nb) = match o {
        Orientation::Fg => (pair.norm_f(), pair.norm_g()),
        Orientation::Gf => (pair.norm_g(), pair.norm_f()),
    };
    let diff = WeightedFunction::new(
        a.space(),
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x / na - y / nb).abs())
            .collect(),
    )?;
    let lhs = power_integral_with(&diff, p, pair.sums.path).value();
    // normalized ‖f g^{p-1}‖_1 = t1 / t
    let h = holder_ratios(pair, o);
    let overlap = (h.t1 / h.t).min(1.0);
    let rhs = (p.exp2() - 2.0) * (1.0 - overlap.powf(0.5 * p));
    Ok(if pair.ctx.is_upper_regime() {
        Sides::le(lhs, rhs)
    } else {
        Sides::ge(lhs, rhs)
    })
}

/// `‖(f+g)/2‖_p^p + ‖(f-g)/2‖_p^p ≤ 1` for unit-norm `f`, `g` and `p ≥ 2`.
pub fn hanner_unit_sides(pair: &PairInput) -> Result<Sides> {
    require_upper_regime(pair, "the unit-ball Hanner bound")?;
    let p = pair.p();
    let (nf, ng) = (pair.norm_f(), pair.norm_g());
    let half = |sign: f64| -> Result<f64> {
        let h = WeightedFunction::new(
            pair.f.space(),
            pair.f
                .values()
                .iter()
                .zip(pair.g.values())
                .map(|(x, y)| (0.5 * (x / nf + sign * y / ng)).abs())
                .collect(),
        )?;
        Ok(power_integral_with(&h, p, pair.sums.path).value())
    };
    Ok(Sides::le(half(1.0)? + half(-1.0)?, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualityKind {
    ProportionalOnSupportG,
    ProportionalOnSupportF,
    ProportionalEverywhere,
    DisjointSupports,
    Generic,
}

/// `α f = β g` on the relevant set, normalized to `alpha = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub alpha: f64,
    pub beta: f64,
}

impl Witness {
    /// Whether `(alpha, beta)` is a positive multiple of `(a, b)` to relative `tol`.
    pub fn matches(&self, a: f64, b: f64, tol: f64) -> bool {
        let lhs = self.beta * a;
        let rhs = self.alpha * b;
        (lhs - rhs).abs() <= tol * lhs.abs().max(rhs.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualityClass {
    pub kind: EqualityKind,
    pub witness: Option<Witness>,
}

/// Constant ratio `num_i / den_i` over atoms with `den_i > 0`, if any.
fn constant_ratio(num: &[f64], den: &[f64], tol: f64) -> Option<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (&n, &d) in num.iter().zip(den) {
        if d > 0.0 {
            let r = n / d;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo > 0.0 && lo.is_finite() && hi - lo <= tol * hi).then_some(0.5 * (lo + hi))
}

/// Which equality case of the sandwich, if any, the pair falls into.
pub fn classify_equality(pair: &PairInput, tol: f64) -> EqualityClass {
    let (f, g) = (pair.f.values(), pair.g.values());
    let on_g = constant_ratio(f, g, tol);
    let on_f = constant_ratio(g, f, tol);
    match (on_g, on_f) {
        (Some(r), Some(_)) => EqualityClass {
            kind: EqualityKind::ProportionalEverywhere,
            witness: Some(Witness { alpha: 1.0, beta: r }),
        },
        (Some(r), None) => EqualityClass {
            kind: EqualityKind::ProportionalOnSupportG,
            witness: Some(Witness { alpha: 1.0, beta: r }),
        },
        (None, Some(r)) => EqualityClass {
            kind: EqualityKind::ProportionalOnSupportF,
            witness: Some(Witness {
                alpha: 1.0,
                beta: r.recip(),
            }),
        },
        (None, None) => {
            let scale = pair.f.max_value() * pair.g.max_value();
            let overlap = f.iter().zip(g).map(|(a, b)| a * b).fold(0.0, f64::max);
            let kind = if overlap <= tol * scale {
                EqualityKind::DisjointSupports
            } else {
                EqualityKind::Generic
            };
            EqualityClass { kind, witness: None }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    Trivial,
    Carbery,
    Cfil,
    Mooney,
    SandwichLower,
    SandwichUpper,
    Simplified,
    Interpolated,
}

impl BoundId {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Trivial => "trivial",
            BoundId::Carbery => "carbery",
            BoundId::Cfil => "cfil",
            BoundId::Mooney => "mooney",
            BoundId::SandwichLower => "sandwich_lower",
            BoundId::SandwichUpper => "sandwich_upper",
            BoundId::Simplified => "simplified",
            BoundId::Interpolated => "interpolated",
        }
    }
}

/// Signed distance of one bound from the exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSlack {
    pub bound: BoundId,
    pub direction: BoundDirection,
    pub value: f64,
    /// `value - ratio` for upper bounds, `ratio - value` for lower ones.
    pub margin: f64,
    pub equality: bool,
}

/// Every two-function bound evaluated on one pair, in ratio units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: f64,
    pub regime: Regime,
    pub ratio: f64,
    pub gamma: f64,
    pub trivial_factor: f64,
    pub carbery_factor: Option<f64>,
    pub cfil_factor: Option<DirectedFactor>,
    pub mooney_factor: DirectedFactor,
    pub j_upper_fg: f64,
    pub j_upper_gf: f64,
    pub j_lower_fg: f64,
    pub j_lower_gf: f64,
    pub sandwich_lower: f64,
    pub sandwich_upper: f64,
    /// Best simplified bound over both orientations (lower for `p ≥ 2`).
    pub simplified_lower: Option<DirectedFactor>,
    /// Best interpolated upper bound over both orientations, `p ≥ 2` only.
    pub interpolated_upper: Option<f64>,
    pub slacks: Vec<BoundSlack>,
}

impl BoundReport {
    pub fn slack(&self, bound: BoundId) -> Option<&BoundSlack> {
        self.slacks.iter().find(|s| s.bound == bound)
    }

    /// Both sandwich sides hold with equality.
    pub fn sandwich_equality(&self) -> bool {
        [BoundId::SandwichLower, BoundId::SandwichUpper]
            .iter()
            .all(|&b| self.slack(b).is_some_and(|s| s.equality))
    }

    /// Every bound holds within the tolerance band.
    pub fn all_hold(&self, policy: &TolerancePolicy) -> bool {
        self.slacks
            .iter()
            .all(|s| s.margin >= -policy.band(s.value.max(self.ratio)))
    }
}

/// Sandwich check with the default tolerance.
pub fn theorem1_check(pair: &PairInput) -> Result<BoundReport> {
    theorem1_check_with(pair, &TolerancePolicy::default())
}

/// Evaluates every two-function bound on the pair with regime dispatch.
///
/// For `p ∈ (1, 2)` both functions must be strictly positive, because the
/// upper side of the reversed sandwich needs it.
pub fn theorem1_check_with(pair: &PairInput, policy: &TolerancePolicy) -> Result<BoundReport> {
    let p = pair.p();
    let upper_regime = pair.ctx.is_upper_regime();
    if !upper_regime {
        require_positive(pair, "the reversed sandwich")?;
    }
    let ratio = pair.ratio();
    let gamma = gamma_p(pair).gamma;
    let j_upper_fg = j_upper(pair, Orientation::Fg);
    let j_upper_gf = j_upper(pair, Orientation::Gf);
    let j_lower_fg = j_lower(pair, Orientation::Fg);
    let j_lower_gf = j_lower(pair, Orientation::Gf);
    let (sandwich_lower, sandwich_upper) = if upper_regime {
        (j_lower_fg.max(j_lower_gf), j_upper_fg.min(j_upper_gf))
    } else {
        (j_upper_fg.max(j_upper_gf), j_lower_fg.min(j_lower_gf))
    };

    let carbery = if upper_regime {
        Some(carbery_factor(pair)?)
    } else {
        None
    };
    let cfil = cfil_factor(pair).ok();
    let mooney = mooney_factor(pair)?;
    let simplified = {
        let a = simplified_lower(pair, Orientation::Fg)?;
        let b = simplified_lower(pair, Orientation::Gf)?;
        let value = match a.direction {
            BoundDirection::Lower => a.value.max(b.value),
            BoundDirection::Upper => a.value.min(b.value),
        };
        DirectedFactor {
            value,
            direction: a.direction,
        }
    };
    let interpolated = if upper_regime {
        Some(interpolated_upper_factor(pair, Orientation::Fg)?.min(interpolated_upper_factor(pair, Orientation::Gf)?))
    } else {
        None
    };

    let slack = |bound, direction, value: f64| {
        let margin = match direction {
            BoundDirection::Upper => value - ratio,
            BoundDirection::Lower => ratio - value,
        };
        BoundSlack {
            bound,
            direction,
            value,
            margin,
            equality: policy.is_equal(margin, value.max(ratio)),
        }
    };
    let (lower_dir, upper_dir) = (BoundDirection::Lower, BoundDirection::Upper);
    let mut slacks = vec![
        slack(BoundId::SandwichLower, lower_dir, sandwich_lower),
        slack(BoundId::SandwichUpper, upper_dir, sandwich_upper),
        slack(BoundId::Trivial, upper_dir, trivial_factor(p)),
        slack(BoundId::Mooney, mooney.direction, mooney.value),
        slack(BoundId::Simplified, simplified.direction, simplified.value),
    ];
    if let Some(c) = carbery {
        slacks.push(slack(BoundId::Carbery, upper_dir, c));
    }
    if let Some(c) = cfil {
        slacks.push(slack(BoundId::Cfil, c.direction, c.value));
    }
    if let Some(v) = interpolated {
        slacks.push(slack(BoundId::Interpolated, upper_dir, v));
    }

    Ok(BoundReport {
        p,
        regime: pair.ctx.regime,
        ratio,
        gamma,
        trivial_factor: trivial_factor(p),
        carbery_factor: carbery,
        cfil_factor: cfil,
        mooney_factor: mooney,
        j_upper_fg,
        j_upper_gf,
        j_lower_fg,
        j_lower_gf,
        sandwich_lower,
        sandwich_upper,
        simplified_lower: Some(simplified),
        interpolated_upper: interpolated,
        slacks,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::fixtures::Fixture;

    fn fixture(fx: Fixture, p: f64) -> PairInput {
        let (f, g) = fx.functions();
        PairInput::new(f, g, ExponentContext::new(p).unwrap()).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn pair_requires_nonzero_norms_and_p_above_one() {
        assert!(PairInput::counting(&[0.0, 0.0], &[1.0, 0.0], 2.0).is_err());
        assert!(PairInput::counting(&[1.0, 0.0], &[1.0, 0.0], 0.5).is_err());
        assert!(PairInput::counting(&[1.0, 0.0], &[1.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn gamma_fixtures() {
        assert!(close(gamma_p(&fixture(Fixture::C, 3.0)).gamma, 1.0, 1e-15));
        assert_eq!(gamma_p(&fixture(Fixture::D, 4.0)).gamma, 0.0);
        assert!(close(gamma_p(&fixture(Fixture::B, 4.0)).gamma, 2.0 / 3.0, 1e-15));
    }

    #[test]
    fn classical_factors_on_fixtures() {
        // Reference values from a 60-digit evaluation of the closed forms.
        let b = fixture(Fixture::B, 4.0);
        assert!(close(carbery_factor(&b).unwrap(), 6.2386131468221467357, 1e-14));
        assert!(close(cfil_factor(&b).unwrap().value, 5.9938207967349954534, 1e-14));
        assert!(close(mooney_factor(&b).unwrap().value, 5.9814239699997195952, 1e-14));

        for p in [2.0, 3.0, 4.5, 8.0] {
            let c = fixture(Fixture::C, p);
            let full = trivial_factor(p);
            assert!(close(carbery_factor(&c).unwrap(), full, 1e-13));
            assert!(close(cfil_factor(&c).unwrap().value, full, 1e-13));
            assert!(close(mooney_factor(&c).unwrap().value, full, 1e-13));
        }
        let d = fixture(Fixture::D, 4.0);
        assert_eq!(carbery_factor(&d).unwrap(), 1.0);
        assert_eq!(cfil_factor(&d).unwrap().value, 1.0);
        assert_eq!(mooney_factor(&d).unwrap().value, 1.0);
    }

    #[test]
    fn carbery_rejects_reverse_regime() {
        let e = fixture(Fixture::E, 1.5);
        assert!(matches!(carbery_factor(&e), Err(Error::UnsupportedRegime { .. })));
        assert!(interpolated_upper(&e, Orientation::Fg).is_err());
    }

    #[test]
    fn cfil_reverse_needs_positivity() {
        let b = fixture(Fixture::B, 1.5);
        assert!(matches!(cfil_factor(&b), Err(Error::Precondition(_))));
        let e = fixture(Fixture::E, 1.5);
        let c = cfil_factor(&e).unwrap();
        assert_eq!(c.direction, BoundDirection::Lower);
        assert!(close(c.value, 1.3766264931489970731, 1e-14));
    }

    #[test]
    fn mooney_gamma_domain() {
        assert!(mooney_factor_from_gamma(1.0 + 1e-13, 4.0).is_ok());
        assert!(matches!(
            mooney_factor_from_gamma(1.0 + 1e-6, 4.0),
            Err(Error::NumericalDomain(_))
        ));
        assert_eq!(mooney_factor_from_gamma(0.0, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn sandwich_factors_on_fix_b() {
        let b = fixture(Fixture::B, 4.0);
        assert!(close(j_upper(&b, Orientation::Fg), 17.0 / 3.0, 1e-14));
        assert!(close(j_upper(&b, Orientation::Gf), 6.969710169080678962536695, 1e-14));
        assert!(close(j_lower(&b, Orientation::Fg), 17.0 / 3.0, 1e-14));
        assert!(close(j_lower(&b, Orientation::Gf), 11.0 / 3.0, 1e-14));
        for o in Orientation::BOTH {
            assert!(close(j_upper(&fixture(Fixture::C, 5.0), o), 16.0, 1e-14));
            assert_eq!(j_upper(&fixture(Fixture::D, 4.0), o), 1.0);
            assert_eq!(j_lower(&fixture(Fixture::D, 4.0), o), 1.0);
            assert!(close(j_lower(&fixture(Fixture::A, 2.0), o), 10.0 / 7.0, 1e-14));
        }
    }

    #[test]
    fn report_on_fix_b_is_tight() {
        let r = theorem1_check(&fixture(Fixture::B, 4.0)).unwrap();
        assert!(close(r.ratio, 17.0 / 3.0, 1e-14));
        assert!(close(r.sandwich_lower, 17.0 / 3.0, 1e-14));
        assert!(close(r.sandwich_upper, 17.0 / 3.0, 1e-14));
        assert!(r.sandwich_equality());
        assert!(r.all_hold(&TolerancePolicy::default()));
    }

    #[test]
    fn report_on_fix_e_uses_reversed_reading() {
        let r = theorem1_check(&fixture(Fixture::E, 1.5)).unwrap();
        assert!(close(r.ratio, 1.376800185659397345373445, 1e-13));
        assert!(close(r.j_upper_fg, 1.374945412911078384811794, 1e-13));
        assert!(close(r.j_lower_fg, 1.38285792864629054038362, 1e-13));
        assert!(close(r.sandwich_lower, r.j_upper_fg, 0.0));
        // min over orientations is J̲(g,f)
        assert!(close(r.sandwich_upper, 1.381917210399328636242042, 1e-13));
        assert!(r.sandwich_lower < r.ratio && r.ratio < r.sandwich_upper);
        assert!(r.all_hold(&TolerancePolicy::default()));
        assert!(r.carbery_factor.is_none());
    }

    #[test]
    fn reversed_sandwich_rejects_zeros() {
        let b = fixture(Fixture::B, 1.5);
        assert!(matches!(theorem1_check(&b), Err(Error::Precondition(_))));
    }

    #[test]
    fn fix_d_is_disjoint_equality() {
        let d = fixture(Fixture::D, 4.0);
        let r = theorem1_check(&d).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert!(r.sandwich_equality());
        assert_eq!(classify_equality(&d, 1e-9).kind, EqualityKind::DisjointSupports);
    }

    #[test]
    fn simplified_fixtures() {
        let b = fixture(Fixture::B, 4.0);
        let s = simplified_lower(&b, Orientation::Fg).unwrap();
        assert_eq!(s.direction, BoundDirection::Lower);
        assert!(close(s.value, 17.0 / 3.0, 1e-14));
        assert_eq!(
            simplified_lower(&fixture(Fixture::D, 4.0), Orientation::Fg)
                .unwrap()
                .value,
            1.0
        );
        assert!(close(
            simplified_lower(&fixture(Fixture::C, 3.0), Orientation::Gf)
                .unwrap()
                .value,
            4.0,
            1e-14
        ));
    }

    #[test]
    fn interpolation_fixtures() {
        let c = fixture(Fixture::C, 3.0);
        // λ = 1: (2‖f‖)^p = 2^3 · 2 = 16
        assert!(close(interpolated_upper(&c, Orientation::Fg).unwrap(), 16.0, 1e-14));
        let d = fixture(Fixture::D, 4.0);
        assert_eq!(interpolated_upper(&d, Orientation::Fg).unwrap(), 2.0);
        let b = fixture(Fixture::B, 4.0);
        assert!(close(
            interpolated_upper(&b, Orientation::Fg).unwrap(),
            19.79209693950870659551175,
            1e-14
        ));
        assert!(close(
            interpolated_upper(&b, Orientation::Gf).unwrap(),
            21.84849152613049601372595,
            1e-14
        ));
    }

    #[test]
    fn lemma_chain_examples() {
        let ctx = ExponentContext::new(2.0).unwrap();
        let g = WeightedFunction::counting(vec![1.0, 1.0]).unwrap();
        let f = WeightedFunction::new(g.space(), vec![1.0, 1.0]).unwrap();
        let c = lemma1_chain(&f, &g, &ctx).unwrap();
        for v in c.values {
            assert!(close(v, 2.0, 1e-15));
        }
        let zero = WeightedFunction::zero(g.space());
        assert_eq!(lemma1_chain(&zero, &g, &ctx).unwrap().values, [0.0; 3]);

        let f = WeightedFunction::new(g.space(), vec![1.0, 0.0]).unwrap();
        let c = lemma1_chain(&f, &g, &ctx).unwrap();
        let expected = [1.0, 2f64.sqrt() * (5f64.sqrt() - 2f64.sqrt()), 2f64.sqrt()];
        for (v, e) in c.values.iter().zip(expected) {
            assert!(close(*v, e, 1e-15));
        }
        assert_eq!(c.relation, Relation::LessEq);
        assert!(c.sides().margin() > 0.0);
    }

    #[test]
    fn lemma_chain_reverse_regime() {
        let ctx = ExponentContext::new(0.5).unwrap();
        let g = WeightedFunction::counting(vec![1.0, 0.0]).unwrap();
        let f = WeightedFunction::new(g.space(), vec![1.0, 1.0]).unwrap();
        assert!(lemma1_chain(&f, &g, &ctx).is_err());
        let g = WeightedFunction::new(g.space(), vec![1.0, 3.0]).unwrap();
        let f = WeightedFunction::new(g.space(), vec![2.0, 0.5]).unwrap();
        let c = lemma1_chain(&f, &g, &ctx).unwrap();
        assert_eq!(c.relation, Relation::GreaterEq);
        assert!(
            c.values[0] >= c.values[1] && c.values[1] >= c.values[2],
            "{:?}",
            c.values
        );
    }

    #[test]
    fn reverse_minkowski_fixtures() {
        let b = fixture(Fixture::B, 4.0);
        let r = reverse_minkowski_lower(&b, Orientation::Fg);
        assert!(close(r.lower, 2.0, 1e-15));
        assert!(close(r.norm_sum, 17f64.powf(0.25), 1e-15));
        assert!(close(r.minkowski_cap, 2.1892071150027210667175, 1e-15));
        let c = fixture(Fixture::C, 3.0);
        let r = reverse_minkowski_lower(&c, Orientation::Fg);
        assert!(close(r.lower, r.norm_sum, 1e-15));
        let d = fixture(Fixture::D, 4.0);
        let r = reverse_minkowski_lower(&d, Orientation::Fg);
        assert_eq!(r.lower, 1.0);
        assert!(close(r.norm_sum, 2f64.powf(0.25), 1e-15));
    }

    #[test]
    fn error_estimate_fixtures() {
        let e = error_estimate(&fixture(Fixture::B, 4.0));
        assert_eq!(e.orientation, Orientation::Gf);
        assert!(close(e.gap, 3.303043502414012295870029, 1e-14));
        assert!(close(e.cap, 9.39841683149119159602729, 1e-14));
        for fx in [Fixture::C, Fixture::D] {
            let e = error_estimate(&fixture(fx, 4.0));
            assert_eq!(e.gap, 0.0);
            assert_eq!(e.cap, 0.0);
        }
    }

    #[test]
    fn hanner_difference_fixtures() {
        let d = fixture(Fixture::D, 4.0);
        let s = hanner_diff_sides(&d, Orientation::Fg).unwrap();
        assert!(close(s.lhs, 2.0, 1e-15));
        assert!(close(s.rhs, 14.0, 1e-15));
        let c = fixture(Fixture::C, 3.0);
        let s = hanner_diff_sides(&c, Orientation::Fg).unwrap();
        assert_eq!(s.lhs, 0.0);
        assert!(s.rhs.abs() < 1e-15);
    }

    #[test]
    fn equality_classification() {
        let b = fixture(Fixture::B, 4.0);
        let c = classify_equality(&b, 1e-9);
        assert_eq!(c.kind, EqualityKind::ProportionalOnSupportG);
        assert!(c.witness.unwrap().matches(1.0, 1.0, 1e-12));
        // f = (3, 0) has one-atom support, so f ∝ g there
        assert_eq!(
            classify_equality(&fixture(Fixture::A, 2.0), 1e-9).kind,
            EqualityKind::ProportionalOnSupportF
        );
        let generic = PairInput::counting(&[3.0, 1.0], &[1.0, 2.0], 4.0).unwrap();
        assert_eq!(classify_equality(&generic, 1e-9).kind, EqualityKind::Generic);
        let swapped = classify_equality(&b.swapped(), 1e-9);
        assert_eq!(swapped.kind, EqualityKind::ProportionalOnSupportF);
        let prop = PairInput::counting(&[3.0, 6.0], &[2.0, 4.0], 3.0).unwrap();
        let c = classify_equality(&prop, 1e-9);
        assert_eq!(c.kind, EqualityKind::ProportionalEverywhere);
        // 2 f = 3 g
        assert!(c.witness.unwrap().matches(2.0, 3.0, 1e-12));
    }

    #[test]
    fn one_atom_support_collapses_the_sandwich() {
        let a = fixture(Fixture::A, 4.0);
        let r = theorem1_check(&a).unwrap();
        assert!(r.sandwich_equality(), "{r:?}");
        assert!(close(j_upper(&a, Orientation::Gf), j_lower(&a, Orientation::Gf), 1e-14));
    }

    #[test]
    fn swapped_pair_exchanges_orientations() {
        let b = fixture(Fixture::B, 4.0);
        let s = b.swapped();
        assert_eq!(j_upper(&b, Orientation::Fg), j_upper(&s, Orientation::Gf));
        assert_eq!(j_lower(&b, Orientation::Gf), j_lower(&s, Orientation::Fg));
        assert_eq!(b.ratio(), s.ratio());
    }
}
