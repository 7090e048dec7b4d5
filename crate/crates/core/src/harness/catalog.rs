//! The inequality catalog: one key per checked inequality, each with a
//! double-precision and a multiprecision evaluation of both sides.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::check::{CheckOutcome, Sides, TolerancePolicy};
use crate::error::{Error, Result};
use crate::measure::{ExponentContext, Regime, WeightedFunction};
use crate::multi;
use crate::pairwise::{
    carbery_factor, cfil_factor, error_estimate, hanner_diff_sides, hanner_unit_sides, holder_ratios,
    interpolated_upper, j_lower, j_upper, lemma1_chain, mooney_factor, reverse_minkowski_lower, simplified_lower,
    trivial_factor, BoundDirection, DirectedFactor, Orientation, PairInput,
};
use crate::precise::{self, Mp, PrecisePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    /// `ratio ≤ 2^{p-1}`.
    Eq1Trivial,
    /// Carbery's factor, `p ≥ 2`.
    Eq2Carbery,
    /// `(1 + Γ^{2/p})^{p-1}`.
    Eq4Cfil,
    /// Ivanisvili–Mooney factor.
    Eq5Mooney,
    /// Both sides of the sandwich; the weaker one is reported.
    Thm1Sandwich,
    Thm1Lower,
    Thm1Upper,
    /// `1 + (2^p - 2) t1^{p/2} / (1 + t^p)` against the ratio.
    Thm1Simplified,
    /// `λ(‖f‖+‖g‖)^p + (1-λ)(‖f‖^p+‖g‖^p)`, `p ≥ 2`.
    Rem23Interpolation,
    /// Normalized `‖f - g‖^p` against `(2^p - 2)(1 - ‖fg^{p-1}‖_1^{p/2})`.
    HannerDiff,
    /// `‖(f+g)/2‖^p + ‖(f-g)/2‖^p ≤ 1` on the unit sphere, `p ≥ 2`.
    HannerUnit,
    /// `‖fg‖_1 ≤ ‖g‖_q(‖f + g^{1/(p-1)}‖_p - ‖g^{1/(p-1)}‖_p) ≤ ‖g‖_q‖f‖_p`.
    Lemma21Chain,
    /// `‖g‖(1 + t1) ≤ ‖f + g‖ ≤ ‖f‖ + ‖g‖`, both orientations.
    Rem22ReverseMinkowski,
    /// `|J̄ - J̲| ≤ p 2^{p-1} |t2 - t1|` in the orientation with the smaller first norm.
    Rem24Error,
    /// `t1 ≤ t2 ≤ t`, `p ≥ 2`.
    HolderChain,
    /// n-function Mooney bound.
    Eq7MooneySum,
    Thm2Upper,
    Thm2Lower,
    /// Scalar inequality with `C_p` or `C'_p`.
    Lemma31Scalar,
}

impl InequalityId {
    pub const ALL: [InequalityId; 19] = [
        InequalityId::Eq1Trivial,
        InequalityId::Eq2Carbery,
        InequalityId::Eq4Cfil,
        InequalityId::Eq5Mooney,
        InequalityId::Thm1Sandwich,
        InequalityId::Thm1Lower,
        InequalityId::Thm1Upper,
        InequalityId::Thm1Simplified,
        InequalityId::Rem23Interpolation,
        InequalityId::HannerDiff,
        InequalityId::HannerUnit,
        InequalityId::Lemma21Chain,
        InequalityId::Rem22ReverseMinkowski,
        InequalityId::Rem24Error,
        InequalityId::HolderChain,
        InequalityId::Eq7MooneySum,
        InequalityId::Thm2Upper,
        InequalityId::Thm2Lower,
        InequalityId::Lemma31Scalar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::Eq1Trivial => "eq1_trivial",
            InequalityId::Eq2Carbery => "eq2_carbery",
            InequalityId::Eq4Cfil => "eq4_cfil",
            InequalityId::Eq5Mooney => "eq5_mooney",
            InequalityId::Thm1Sandwich => "thm1_sandwich",
            InequalityId::Thm1Lower => "thm1_lower",
            InequalityId::Thm1Upper => "thm1_upper",
            InequalityId::Thm1Simplified => "thm1_simplified",
            InequalityId::Rem23Interpolation => "rem23_interpolation",
            InequalityId::HannerDiff => "hanner_diff",
            InequalityId::HannerUnit => "hanner_unit",
            InequalityId::Lemma21Chain => "lemma21_chain",
            InequalityId::Rem22ReverseMinkowski => "rem22_reverse_minkowski",
            InequalityId::Rem24Error => "rem24_error",
            InequalityId::HolderChain => "holder_chain",
            InequalityId::Eq7MooneySum => "eq7_mooney_sum",
            InequalityId::Thm2Upper => "thm2_upper",
            InequalityId::Thm2Lower => "thm2_lower",
            InequalityId::Lemma31Scalar => "lemma31_scalar",
        }
    }

    /// Keys that take a pair of functions.
    pub fn takes_pair(self) -> bool {
        !matches!(
            self,
            InequalityId::Eq7MooneySum
                | InequalityId::Thm2Upper
                | InequalityId::Thm2Lower
                | InequalityId::Lemma31Scalar
        )
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InequalityId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownInequality(s.to_string()))
    }
}

/// Inputs of one catalog check.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckInput {
    Pair(PairInput),
    /// Functions on one space; a family of exactly two also serves the
    /// pair chain for `p ∈ (0, 1)`.
    Family {
        functions: Vec<WeightedFunction>,
        p: f64,
    },
    Scalar {
        values: Vec<f64>,
        p: f64,
    },
}

impl CheckInput {
    pub fn p(&self) -> f64 {
        match self {
            CheckInput::Pair(pair) => pair.p(),
            CheckInput::Family { p, .. } | CheckInput::Scalar { p, .. } => *p,
        }
    }

    pub fn regime(&self) -> Regime {
        match self {
            CheckInput::Pair(pair) => pair.ctx().regime,
            _ => ExponentContext::new(self.p())
                .map(|c| c.regime)
                .unwrap_or(Regime::AtMostOne),
        }
    }

    fn pair(&self, id: InequalityId) -> Result<&PairInput> {
        match self {
            CheckInput::Pair(pair) => Ok(pair),
            _ => Err(Error::precondition(format!("{id} takes a pair of functions"))),
        }
    }

    fn family(&self, id: InequalityId) -> Result<(Vec<WeightedFunction>, f64)> {
        match self {
            CheckInput::Pair(pair) => Ok((vec![pair.f().clone(), pair.g().clone()], pair.p())),
            CheckInput::Family { functions, p } => Ok((functions.clone(), *p)),
            CheckInput::Scalar { .. } => Err(Error::precondition(format!("{id} takes a family of functions"))),
        }
    }
}

fn unsupported(id: InequalityId, p: f64) -> Error {
    Error::UnsupportedRegime { what: id.as_str(), p }
}

fn require_positive(id: InequalityId, pair: &PairInput) -> Result<()> {
    if pair.both_strictly_positive() {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "{id} for p = {} needs f and g strictly positive",
            pair.p()
        )))
    }
}

fn directed(ratio: f64, factor: DirectedFactor) -> Sides {
    match factor.direction {
        BoundDirection::Upper => Sides::le(ratio, factor.value),
        BoundDirection::Lower => Sides::ge(ratio, factor.value),
    }
}

fn weakest(all: impl IntoIterator<Item = Sides>) -> Sides {
    all.into_iter().reduce(Sides::weakest).expect("at least one side")
}

fn both<T>(mut f: impl FnMut(Orientation) -> T) -> [T; 2] {
    [f(Orientation::Fg), f(Orientation::Gf)]
}

fn lemma_functions(id: InequalityId, input: &CheckInput) -> Result<(WeightedFunction, WeightedFunction, f64)> {
    match input {
        CheckInput::Pair(pair) => Ok((pair.f().clone(), pair.g().clone(), pair.p())),
        CheckInput::Family { functions, p } if functions.len() == 2 => {
            Ok((functions[0].clone(), functions[1].clone(), *p))
        }
        _ => Err(Error::precondition(format!("{id} takes exactly two functions"))),
    }
}

/// Both sides in double precision.
pub fn double_sides(id: InequalityId, input: &CheckInput) -> Result<Sides> {
    use InequalityId::*;
    let p = input.p();
    if id == Lemma21Chain {
        let (f, g, p) = lemma_functions(id, input)?;
        return Ok(lemma1_chain(&f, &g, &ExponentContext::new(p)?)?.sides());
    }
    if !id.takes_pair() {
        return match id {
            Lemma31Scalar => match input {
                CheckInput::Scalar { values, p } => multi::scalar_sides(values, *p),
                _ => Err(Error::precondition(format!("{id} takes a list of numbers"))),
            },
            Eq7MooneySum => {
                let (fs, p) = input.family(id)?;
                multi::mooney_sum_sides(&fs, p)
            }
            Thm2Upper => {
                let (fs, p) = input.family(id)?;
                multi::thm2_upper_sides(&fs, p)
            }
            _ => {
                let (fs, p) = input.family(id)?;
                multi::thm2_lower_sides(&fs, p)
            }
        };
    }
    let pair = input.pair(id)?;
    let upper = pair.ctx().is_upper_regime();
    let ratio = pair.ratio();
    Ok(match id {
        Eq1Trivial => Sides::le(ratio, trivial_factor(p)),
        Eq2Carbery => Sides::le(ratio, carbery_factor(pair)?),
        Eq4Cfil => directed(ratio, cfil_factor(pair)?),
        Eq5Mooney => directed(ratio, mooney_factor(pair)?),
        Thm1Lower | Thm1Upper | Thm1Sandwich => {
            let [ufg, ugf] = both(|o| j_upper(pair, o));
            let [lfg, lgf] = both(|o| j_lower(pair, o));
            let (lo, hi) = if upper {
                (Sides::le(lfg.max(lgf), ratio), Sides::le(ratio, ufg.min(ugf)))
            } else {
                (Sides::le(ufg.max(ugf), ratio), Sides::le(ratio, lfg.min(lgf)))
            };
            match id {
                Thm1Lower => lo,
                Thm1Upper => {
                    if !upper {
                        require_positive(id, pair)?;
                    }
                    hi
                }
                _ => {
                    if !upper {
                        require_positive(id, pair)?;
                    }
                    lo.weakest(hi)
                }
            }
        }
        Thm1Simplified => {
            let [a, b] = both(|o| simplified_lower(pair, o));
            let (a, b) = (a?, b?);
            if upper {
                Sides::le(a.value.max(b.value), ratio)
            } else {
                Sides::le(ratio, a.value.min(b.value))
            }
        }
        Rem23Interpolation => {
            let [a, b] = both(|o| interpolated_upper(pair, o));
            Sides::le(pair.sum_power(), a?.min(b?))
        }
        HannerDiff => {
            let [a, b] = both(|o| hanner_diff_sides(pair, o));
            a?.weakest(b?)
        }
        HannerUnit => hanner_unit_sides(pair)?,
        Rem22ReverseMinkowski => weakest(
            both(|o| reverse_minkowski_lower(pair, o))
                .into_iter()
                .flat_map(|r| [Sides::le(r.lower, r.norm_sum), Sides::le(r.norm_sum, r.minkowski_cap)]),
        ),
        Rem24Error => {
            let e = error_estimate(pair);
            Sides::le(e.gap, e.cap)
        }
        HolderChain => {
            if !upper {
                return Err(unsupported(id, p));
            }
            weakest(
                both(|o| holder_ratios(pair, o))
                    .into_iter()
                    .flat_map(|h| [Sides::le(h.t1, h.t2), Sides::le(h.t2, h.t)]),
            )
        }
        Lemma21Chain | Eq7MooneySum | Thm2Upper | Thm2Lower | Lemma31Scalar => unreachable!(),
    })
}

fn mp_sides(lhs: Mp, rhs: Mp, less_eq: bool) -> Sides {
    if less_eq {
        Sides::le(lhs.to_f64(), rhs.to_f64())
    } else {
        Sides::ge(lhs.to_f64(), rhs.to_f64())
    }
}

fn mp_max(a: Mp, b: Mp) -> Mp {
    a.max(b)
}

fn mp_min(a: Mp, b: Mp) -> Mp {
    a.min(b)
}

/// Both sides re-evaluated at multiprecision from the raw values.
///
/// Preconditions are assumed to have passed the double-precision call.
pub fn precise_sides(id: InequalityId, input: &CheckInput) -> Result<Sides> {
    use InequalityId::*;
    match id {
        Lemma21Chain => {
            let (f, g, p) = lemma_functions(id, input)?;
            let [a, b, c] = precise::lemma_chain(&f, &g, p)?;
            let le = p > 1.0;
            return Ok(mp_sides(a, b.clone(), le).weakest(mp_sides(b, c, le)));
        }
        Lemma31Scalar => {
            return match input {
                CheckInput::Scalar { values, p } => multi::scalar_sides_precise(values, *p),
                _ => Err(Error::precondition(format!("{id} takes a list of numbers"))),
            };
        }
        Eq7MooneySum => {
            let (fs, p) = input.family(id)?;
            return multi::mooney_sum_sides_precise(&fs, p);
        }
        Thm2Upper => {
            let (fs, p) = input.family(id)?;
            return multi::thm2_upper_sides_precise(&fs, p);
        }
        Thm2Lower => {
            let (fs, p) = input.family(id)?;
            return multi::thm2_lower_sides_precise(&fs, p);
        }
        _ => {}
    }
    let pair = input.pair(id)?;
    let p = pair.p();
    let upper = pair.ctx().is_upper_regime();
    let mp = PrecisePair::new(pair.f(), pair.g(), p)?;
    let ratio = mp.ratio();
    Ok(match id {
        Eq1Trivial => mp_sides(ratio, mp.trivial_factor(), true),
        Eq2Carbery => mp_sides(ratio, mp.carbery_factor(), true),
        Eq4Cfil => mp_sides(ratio, mp.cfil_factor(), upper),
        Eq5Mooney => mp_sides(ratio, mp.mooney_factor(), upper),
        Thm1Lower | Thm1Upper | Thm1Sandwich => {
            let [ufg, ugf] = both(|o| mp.j_upper(o));
            let [lfg, lgf] = both(|o| mp.j_lower(o));
            let (lo, hi) = if upper {
                (
                    mp_sides(mp_max(lfg, lgf), ratio.clone(), true),
                    mp_sides(ratio, mp_min(ufg, ugf), true),
                )
            } else {
                (
                    mp_sides(mp_max(ufg, ugf), ratio.clone(), true),
                    mp_sides(ratio, mp_min(lfg, lgf), true),
                )
            };
            match id {
                Thm1Lower => lo,
                Thm1Upper => hi,
                _ => lo.weakest(hi),
            }
        }
        Thm1Simplified => {
            let [a, b] = both(|o| mp.simplified(o));
            if upper {
                mp_sides(mp_max(a, b), ratio, true)
            } else {
                mp_sides(ratio, mp_min(a, b), true)
            }
        }
        Rem23Interpolation => {
            let [a, b] = both(|o| mp.interpolated_upper(o));
            mp_sides(mp.sum_power().clone(), mp_min(a, b), true)
        }
        HannerDiff => {
            let [a, b] = both(|o| mp.hanner_diff(o));
            mp_sides(a.0, a.1, upper).weakest(mp_sides(b.0, b.1, upper))
        }
        HannerUnit => mp_sides(mp.hanner_unit(), Mp::one(), true),
        Rem22ReverseMinkowski => weakest(
            both(|o| mp.reverse_minkowski(o))
                .into_iter()
                .flat_map(|[lo, mid, cap]| [mp_sides(lo, mid.clone(), true), mp_sides(mid, cap, true)]),
        ),
        Rem24Error => {
            let (gap, cap) = mp.error_estimate(error_estimate(pair).orientation);
            mp_sides(gap, cap, true)
        }
        HolderChain => weakest(
            both(|o| mp.holder(o))
                .into_iter()
                .flat_map(|h| [mp_sides(h.t1, h.t2.clone(), true), mp_sides(h.t2, h.t, true)]),
        ),
        Lemma21Chain | Eq7MooneySum | Thm2Upper | Thm2Lower | Lemma31Scalar => unreachable!(),
    })
}

/// Runs one catalog check with escalation of violation candidates.
pub fn check(id: InequalityId, input: &CheckInput, policy: &TolerancePolicy) -> Result<CheckOutcome> {
    if id == InequalityId::Lemma31Scalar {
        return match input {
            CheckInput::Scalar { values, p } => multi::scalar_bound_check_with(values, *p, policy),
            _ => Err(Error::precondition(format!("{id} takes a list of numbers"))),
        };
    }
    let sides = double_sides(id, input)?;
    CheckOutcome::with_recheck(sides, policy, || precise_sides(id, input))
}

/// Convenience: the normalized difference bound on a pair.
pub fn hanner_diff_bound(pair: &PairInput, policy: &TolerancePolicy) -> Result<CheckOutcome> {
    check(InequalityId::HannerDiff, &CheckInput::Pair(pair.clone()), policy)
}

/// Whether an error means the key does not apply to the input, as opposed
/// to a defect.
pub fn is_not_applicable(err: &Error) -> bool {
    matches!(err, Error::UnsupportedRegime { .. } | Error::Precondition(_))
}
