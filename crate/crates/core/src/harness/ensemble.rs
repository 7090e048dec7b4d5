//! Tightness statistics of the two-function bounds over random trials.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{derive_seed, generate_pair, GeneratorSpec};
use crate::check::TolerancePolicy;
use crate::error::{Error, Result};
use crate::measure::ExponentContext;
use crate::pairwise::{theorem1_check_with, BoundDirection, BoundId, BoundReport, PairInput};

/// Two bound values closer than this (relative to `max(1, |a|, |b|)`) tie.
pub const TIE_REL_TOL: f64 = 1e-10;

pub const DEFAULT_WITNESS_CAP: usize = 5;

const UPPER_BOUNDS: [BoundId; 6] = [
    BoundId::SandwichUpper,
    BoundId::Mooney,
    BoundId::Cfil,
    BoundId::Carbery,
    BoundId::Interpolated,
    BoundId::Trivial,
];

const LOWER_BOUNDS: [BoundId; 2] = [BoundId::SandwichLower, BoundId::Simplified];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackQuantiles {
    pub bound: BoundId,
    pub direction: BoundDirection,
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
}

/// How often each of two same-direction bounds was strictly tighter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinCount {
    pub first: BoundId,
    pub second: BoundId,
    pub first_tighter: usize,
    pub second_tighter: usize,
    pub ties: usize,
}

/// A stored trial input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredPair {
    pub trial: usize,
    pub seed: u64,
    pub weights: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub sandwich_upper: f64,
    pub mooney: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub p: f64,
    pub trials: usize,
    pub slack: Vec<SlackQuantiles>,
    pub wins: Vec<WinCount>,
    /// Inputs where `min J̄` is strictly below the Mooney factor.
    pub sandwich_beats_mooney: Vec<StoredPair>,
    /// Inputs where the Mooney factor is strictly below `min J̄`.
    pub mooney_beats_sandwich: Vec<StoredPair>,
    /// Trials in which some bound failed beyond tolerance.
    pub failed_trials: usize,
}

impl EnsembleStats {
    pub fn win(&self, a: BoundId, b: BoundId) -> Option<(usize, usize, usize)> {
        self.wins.iter().find_map(|w| {
            if (w.first, w.second) == (a, b) {
                Some((w.first_tighter, w.second_tighter, w.ties))
            } else if (w.first, w.second) == (b, a) {
                Some((w.second_tighter, w.first_tighter, w.ties))
            } else {
                None
            }
        })
    }

    pub fn quantiles(&self, bound: BoundId) -> Option<&SlackQuantiles> {
        self.slack.iter().find(|s| s.bound == bound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub witness_cap: usize,
    pub policy: TolerancePolicy,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            witness_cap: DEFAULT_WITNESS_CAP,
            policy: TolerancePolicy::default(),
        }
    }
}

struct Trial {
    seed: u64,
    pair: PairInput,
    report: BoundReport,
}

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

/// `Some(true)` when `a` is strictly tighter than `b`, `None` on a tie.
fn tighter(a: f64, b: f64, direction: BoundDirection) -> Option<bool> {
    let scale = 1f64.max(a.abs()).max(b.abs());
    if (a - b).abs() <= TIE_REL_TOL * scale {
        return None;
    }
    Some(match direction {
        BoundDirection::Upper => a < b,
        BoundDirection::Lower => a > b,
    })
}

pub fn ensemble_compare(p: f64, trials: usize, specs: &[GeneratorSpec]) -> Result<EnsembleStats> {
    ensemble_compare_with(p, trials, specs, &EnsembleOptions::default())
}

/// Trial `i` draws from `specs[i % specs.len()]` with seed
/// `derive_seed(spec.seed, i)`, so results do not depend on scheduling.
pub fn ensemble_compare_with(
    p: f64,
    trials: usize,
    specs: &[GeneratorSpec],
    opts: &EnsembleOptions,
) -> Result<EnsembleStats> {
    let ctx = ExponentContext::new(p)?;
    if !ctx.is_upper_regime() {
        return Err(Error::UnsupportedRegime {
            what: "the ensemble comparison",
            p,
        });
    }
    if trials == 0 || specs.is_empty() {
        return Err(Error::InvalidSpec("the ensemble needs a trial and a spec".into()));
    }
    let runs: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let base = &specs[i % specs.len()];
            let seed = derive_seed(base.seed, i as u64);
            let pair = generate_pair(&base.with_seed(seed), &ctx)?;
            let report = theorem1_check_with(&pair, &opts.policy)?;
            Ok(Trial { seed, pair, report })
        })
        .collect::<Result<_>>()?;

    let value = |r: &BoundReport, b: BoundId| r.slack(b).map(|s| s.value);
    let mut slack = Vec::new();
    for bound in UPPER_BOUNDS.iter().chain(&LOWER_BOUNDS) {
        let mut margins: Vec<f64> = runs
            .iter()
            .filter_map(|t| t.report.slack(*bound))
            .map(|s| s.margin)
            .collect();
        if margins.is_empty() {
            continue;
        }
        margins.sort_by(f64::total_cmp);
        let direction = runs[0]
            .report
            .slack(*bound)
            .map(|s| s.direction)
            .unwrap_or(BoundDirection::Upper);
        slack.push(SlackQuantiles {
            bound: *bound,
            direction,
            p50: nearest_rank(&margins, 0.5),
            p95: nearest_rank(&margins, 0.95),
            max: *margins.last().expect("nonempty"),
        });
    }

    let mut wins = Vec::new();
    for (group, direction) in [
        (&UPPER_BOUNDS[..], BoundDirection::Upper),
        (&LOWER_BOUNDS[..], BoundDirection::Lower),
    ] {
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i + 1..] {
                let mut w = WinCount {
                    first: a,
                    second: b,
                    first_tighter: 0,
                    second_tighter: 0,
                    ties: 0,
                };
                for t in &runs {
                    let (Some(va), Some(vb)) = (value(&t.report, a), value(&t.report, b)) else {
                        continue;
                    };
                    match tighter(va, vb, direction) {
                        Some(true) => w.first_tighter += 1,
                        Some(false) => w.second_tighter += 1,
                        None => w.ties += 1,
                    }
                }
                wins.push(w);
            }
        }
    }

    let mut sandwich_beats_mooney = Vec::new();
    let mut mooney_beats_sandwich = Vec::new();
    let mut failed_trials = 0;
    for (i, t) in runs.iter().enumerate() {
        if !t.report.all_hold(&opts.policy) {
            failed_trials += 1;
        }
        let (s, m) = (t.report.sandwich_upper, t.report.mooney_factor.value);
        let store = |out: &mut Vec<StoredPair>| {
            if out.len() < opts.witness_cap {
                out.push(StoredPair {
                    trial: i,
                    seed: t.seed,
                    weights: t.pair.f().weights().to_vec(),
                    f: t.pair.f().values().to_vec(),
                    g: t.pair.g().values().to_vec(),
                    sandwich_upper: s,
                    mooney: m,
                });
            }
        };
        match tighter(s, m, BoundDirection::Upper) {
            Some(true) => store(&mut sandwich_beats_mooney),
            Some(false) => store(&mut mooney_beats_sandwich),
            None => {}
        }
    }

    Ok(EnsembleStats {
        p,
        trials,
        slack,
        wins,
        sandwich_beats_mooney,
        mooney_beats_sandwich,
        failed_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::super::generate::{GeneratorKind, SupportPattern};
    use super::*;

    #[test]
    fn example_family_always_favors_the_sandwich() {
        let spec = GeneratorSpec::iid(6, 11).with_kind(GeneratorKind::Example1 {
            block_a: 3,
            alpha: 1.0,
            beta: 2.0,
            psi2_scale: 0.0,
        });
        let stats = ensemble_compare(4.0, 200, &[spec]).unwrap();
        let (sandwich, mooney, ties) = stats.win(BoundId::SandwichUpper, BoundId::Mooney).unwrap();
        assert_eq!((sandwich, mooney, ties), (200, 0, 0));
        assert!(stats.mooney_beats_sandwich.is_empty());
        assert_eq!(stats.sandwich_beats_mooney.len(), DEFAULT_WITNESS_CAP);
        assert_eq!(stats.failed_trials, 0);
    }

    #[test]
    fn proportional_pairs_tie() {
        let spec = GeneratorSpec::iid(5, 3).with_kind(GeneratorKind::Proportional {
            alpha: 1.0,
            beta: 1.0,
            support: SupportPattern::Everywhere,
        });
        let stats = ensemble_compare(3.0, 50, &[spec]).unwrap();
        for w in &stats.wins {
            assert_eq!((w.first_tighter, w.second_tighter, w.ties), (0, 0, 50), "{w:?}");
        }
    }

    #[test]
    fn wins_never_exceed_trials_and_runs_are_reproducible() {
        let specs = [GeneratorSpec::iid(8, 5)];
        let a = ensemble_compare(4.0, 300, &specs).unwrap();
        let b = ensemble_compare(4.0, 300, &specs).unwrap();
        assert_eq!(a, b);
        for w in &a.wins {
            assert!(w.first_tighter + w.second_tighter <= a.trials);
            assert_eq!(w.first_tighter + w.second_tighter + w.ties, a.trials);
        }
        assert_eq!(a.failed_trials, 0);
    }

    #[test]
    fn reverse_regime_is_rejected() {
        assert!(ensemble_compare(1.5, 10, &[GeneratorSpec::iid(4, 1)]).is_err());
    }
}
