//! Verdicts for a single inequality check.
//!
//! A check evaluates both sides in double precision. Margins inside the
//! tolerance band count as equality; a margin below the band is only a
//! candidate violation until the multiprecision tier has re-evaluated it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Relative band `|margin| ≤ rel_tol · max(1, |lhs|, |rhs|)` treated as equality.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Direction of `lhs ? rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    LessEq,
    #[serde(rename = ">=")]
    GreaterEq,
}

impl Relation {
    pub fn flipped(self) -> Self {
        match self {
            Relation::LessEq => Relation::GreaterEq,
            Relation::GreaterEq => Relation::LessEq,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::LessEq => "<=",
            Relation::GreaterEq => ">=",
        }
    }
}

/// Both sides of one inequality instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
}

impl Sides {
    pub fn le(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            relation: Relation::LessEq,
        }
    }

    pub fn ge(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            relation: Relation::GreaterEq,
        }
    }

    /// Signed slack; positive when the inequality holds.
    pub fn margin(&self) -> f64 {
        match self.relation {
            Relation::LessEq => self.rhs - self.lhs,
            Relation::GreaterEq => self.lhs - self.rhs,
        }
    }

    pub fn scale(&self) -> f64 {
        1f64.max(self.lhs.abs()).max(self.rhs.abs())
    }

    /// The weaker of two simultaneous inequalities (smallest relative margin).
    pub fn weakest(self, other: Sides) -> Sides {
        if other.margin() / other.scale() < self.margin() / self.scale() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StrictHold,
    EqualityWithinTol,
    ViolationCandidate,
    ConfirmedViolation,
}

impl Verdict {
    /// Stable identifier used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::StrictHold => "strict_hold",
            Verdict::EqualityWithinTol => "equality_within_tol",
            Verdict::ViolationCandidate => "violation_candidate",
            Verdict::ConfirmedViolation => "confirmed_violation",
        }
    }

    pub fn holds(self) -> bool {
        matches!(self, Verdict::StrictHold | Verdict::EqualityWithinTol)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionTier {
    Double,
    Multiprecision,
}

impl PrecisionTier {
    pub fn as_str(self) -> &'static str {
        match self {
            PrecisionTier::Double => "double",
            PrecisionTier::Multiprecision => "multiprecision",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub rel_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

impl TolerancePolicy {
    pub fn new(rel_tol: f64) -> Self {
        Self { rel_tol }
    }

    /// Equality band for a quantity of the given magnitude.
    pub fn band(&self, magnitude: f64) -> f64 {
        self.rel_tol * 1f64.max(magnitude.abs())
    }

    pub fn is_equal(&self, margin: f64, magnitude: f64) -> bool {
        margin.abs() <= self.band(magnitude)
    }

    fn classify(&self, sides: &Sides) -> Verdict {
        let band = self.rel_tol * sides.scale();
        let m = sides.margin();
        if m.abs() <= band {
            Verdict::EqualityWithinTol
        } else if m > 0.0 {
            Verdict::StrictHold
        } else {
            // negative beyond the band, or NaN
            Verdict::ViolationCandidate
        }
    }
}

/// Record of a multiprecision re-evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Escalation {
    pub double_margin: f64,
    pub precise_margin: f64,
    pub precise_lhs: f64,
    pub precise_rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub margin: f64,
    pub precision_tier: PrecisionTier,
    pub escalation: Option<Escalation>,
}

impl CheckOutcome {
    /// Double-precision verdict with no recheck available.
    pub fn from_double(sides: Sides, policy: &TolerancePolicy) -> Self {
        Self {
            verdict: policy.classify(&sides),
            lhs: sides.lhs,
            rhs: sides.rhs,
            relation: sides.relation,
            margin: sides.margin(),
            precision_tier: PrecisionTier::Double,
            escalation: None,
        }
    }

    /// Double-precision verdict, re-evaluated by `precise` when the margin is
    /// negative beyond tolerance. The higher tier's verdict wins.
    pub fn with_recheck<F>(sides: Sides, policy: &TolerancePolicy, precise: F) -> Result<Self>
    where
        F: FnOnce() -> Result<Sides>,
    {
        let first = Self::from_double(sides, policy);
        if first.verdict != Verdict::ViolationCandidate {
            return Ok(first);
        }
        let hi = precise()?;
        let verdict = match policy.classify(&hi) {
            Verdict::ViolationCandidate => Verdict::ConfirmedViolation,
            v => v,
        };
        Ok(Self {
            verdict,
            lhs: sides.lhs,
            rhs: sides.rhs,
            relation: sides.relation,
            margin: hi.margin(),
            precision_tier: PrecisionTier::Multiprecision,
            escalation: Some(Escalation {
                double_margin: sides.margin(),
                precise_margin: hi.margin(),
                precise_lhs: hi.lhs,
                precise_rhs: hi.rhs,
            }),
        })
    }

    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }

    pub fn is_equality(&self) -> bool {
        self.verdict == Verdict::EqualityWithinTol
    }

    /// Margin relative to `max(1, |lhs|, |rhs|)`.
    pub fn relative_margin(&self) -> f64 {
        self.margin / 1f64.max(self.lhs.abs()).max(self.rhs.abs())
    }
}
