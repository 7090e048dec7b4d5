//! Random inputs, the inequality catalog, ensembles and the default
//! verification suite.

pub mod catalog;
pub mod ensemble;
pub mod generate;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use catalog::{check, double_sides, hanner_diff_bound, precise_sides, CheckInput, InequalityId};
pub use ensemble::{ensemble_compare, ensemble_compare_with, EnsembleOptions, EnsembleStats};
pub use generate::{
    derive_seed, generate_family, generate_pair, generate_scalars, GeneratorKind, GeneratorSpec, SupportPattern,
    ValueDist, WeightMode,
};

use crate::check::{CheckOutcome, TolerancePolicy, Verdict};
use crate::error::Result;
use crate::measure::{ExponentContext, Regime};

/// One catalog check inside a suite run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub trial: usize,
    pub id: InequalityId,
    pub regime: Regime,
    pub outcome: CheckOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    /// Largest number of atoms per generated space (at least 2).
    pub max_atoms: usize,
    pub policy: TolerancePolicy,
}

impl SuiteConfig {
    pub fn new(p: f64, trials: usize, seed: u64) -> Self {
        Self {
            p,
            trials,
            seed,
            max_atoms: 32,
            policy: TolerancePolicy::default(),
        }
    }
}

/// Generator family of trial `i`; the rotation covers every kind.
fn trial_spec<R: Rng>(rng: &mut R, i: usize, atoms: usize, seed: u64) -> GeneratorSpec {
    let base = GeneratorSpec::iid(atoms, seed).with_weights(if i.is_multiple_of(2) {
        WeightMode::Counting
    } else {
        WeightMode::Random
    });
    let kind = match i % 6 {
        0 | 1 => return base,
        2 => GeneratorKind::Sparse { zero_prob: 0.5 },
        3 => GeneratorKind::Proportional {
            alpha: rng.gen_range(0.1..10.0),
            beta: rng.gen_range(0.1..10.0),
            support: if i % 12 == 3 {
                SupportPattern::Everywhere
            } else {
                SupportPattern::OnSupportG
            },
        },
        4 => GeneratorKind::Disjoint,
        _ => GeneratorKind::Example1 {
            block_a: rng.gen_range(1..atoms),
            alpha: rng.gen_range(0.1..10.0),
            beta: rng.gen_range(0.1..10.0),
            psi2_scale: if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            },
        },
    };
    base.with_kind(kind)
}

fn push(
    out: &mut Vec<CheckRecord>,
    trial: usize,
    id: InequalityId,
    input: &CheckInput,
    policy: &TolerancePolicy,
) -> Result<()> {
    match check(id, input, policy) {
        Ok(outcome) => {
            out.push(CheckRecord {
                trial,
                id,
                regime: input.regime(),
                outcome,
            });
            Ok(())
        }
        Err(e) if catalog::is_not_applicable(&e) => Ok(()),
        Err(e) => Err(e),
    }
}

fn run_trial(cfg: &SuiteConfig, ctx: &ExponentContext, i: usize) -> Result<Vec<CheckRecord>> {
    let seed = derive_seed(cfg.seed, i as u64);
    let mut rng = generate::rng_for(seed);
    let atoms = rng.gen_range(2..=cfg.max_atoms.max(2));
    let pair_seed = rng.gen();
    let spec = trial_spec(&mut rng, i, atoms, pair_seed);
    let mut out = Vec::new();

    let pair = CheckInput::Pair(generate_pair(&spec, ctx)?);
    for id in InequalityId::ALL.into_iter().filter(|id| id.takes_pair()) {
        push(&mut out, i, id, &pair, &cfg.policy)?;
    }

    let n = rng.gen_range(2..=8);
    let family_spec = GeneratorSpec::iid(atoms.max(n), rng.gen()).with_kind(match i % 3 {
        0 => GeneratorKind::Disjoint,
        _ => spec.kind,
    });
    let family_spec = match family_spec.kind {
        GeneratorKind::Example1 { .. } => family_spec.with_kind(GeneratorKind::Sparse { zero_prob: 0.3 }),
        _ => family_spec,
    };
    let family = CheckInput::Family {
        functions: generate_family(&family_spec, n, false)?,
        p: cfg.p,
    };
    for id in [
        InequalityId::Eq7MooneySum,
        InequalityId::Thm2Upper,
        InequalityId::Thm2Lower,
    ] {
        push(&mut out, i, id, &family, &cfg.policy)?;
    }

    let len = rng.gen_range(2..=16);
    let scalars = CheckInput::Scalar {
        values: generate_scalars(rng.gen(), len, 10.0),
        p: cfg.p,
    };
    push(&mut out, i, InequalityId::Lemma31Scalar, &scalars, &cfg.policy)?;
    Ok(out)
}

/// Every applicable catalog key on `trials` generated inputs at one `p`.
/// Keys whose regime or hypotheses do not match an input are skipped.
pub fn verify_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let ctx = ExponentContext::new(cfg.p)?;
    let per_trial: Vec<Vec<CheckRecord>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, &ctx, i))
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Exponents of the default suite; 40 exercises the log-domain path.
pub const DEFAULT_EXPONENTS: [f64; 9] = [1.1, 1.5, 2.0, 2.5, 3.0, 4.0, 8.0, 16.0, 40.0];

pub const DEFAULT_TRIALS: usize = 1000;

/// `verify_suite` with `DEFAULT_TRIALS` trials at each default exponent.
pub fn default_suite(seed: u64) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for (k, &p) in DEFAULT_EXPONENTS.iter().enumerate() {
        out.extend(verify_suite(&SuiteConfig::new(
            p,
            DEFAULT_TRIALS,
            derive_seed(seed, k as u64),
        ))?);
    }
    Ok(out)
}

/// Outcome counts of a suite run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub strict_hold: usize,
    pub equality_within_tol: usize,
    pub violation_candidate: usize,
    pub confirmed_violation: usize,
    pub escalated: usize,
}

impl VerdictCounts {
    pub fn tally(records: &[CheckRecord]) -> Self {
        let mut c = Self::default();
        for r in records {
            match r.outcome.verdict {
                Verdict::StrictHold => c.strict_hold += 1,
                Verdict::EqualityWithinTol => c.equality_within_tol += 1,
                Verdict::ViolationCandidate => c.violation_candidate += 1,
                Verdict::ConfirmedViolation => c.confirmed_violation += 1,
            }
            if r.outcome.escalation.is_some() {
                c.escalated += 1;
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.strict_hold + self.equality_within_tol + self.violation_candidate + self.confirmed_violation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn suite_covers_the_catalog_and_holds() {
        let mut seen = BTreeSet::new();
        for p in [1.5, 2.0, 3.0] {
            let records = verify_suite(&SuiteConfig::new(p, 60, 9)).unwrap();
            let counts = VerdictCounts::tally(&records);
            assert_eq!(counts.confirmed_violation, 0, "p = {p}");
            assert_eq!(counts.violation_candidate, 0, "p = {p}");
            seen.extend(records.iter().map(|r| r.id));
        }
        let missing: Vec<_> = InequalityId::ALL.iter().filter(|id| !seen.contains(id)).collect();
        // the chain for p < 1 is reached through explicit families only
        assert!(missing.is_empty(), "{missing:?}");
    }

    #[test]
    fn suite_is_deterministic() {
        let cfg = SuiteConfig::new(4.0, 40, 7);
        assert_eq!(verify_suite(&cfg).unwrap(), verify_suite(&cfg).unwrap());
    }
}
