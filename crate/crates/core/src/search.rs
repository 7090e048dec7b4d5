//! Extremal search over discrete pairs and equality witnesses for the
//! Ivanisvili–Mooney bound.

use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::{CheckOutcome, TolerancePolicy, Verdict};
use crate::error::{Error, Result};
use crate::harness::catalog::{check, is_not_applicable, CheckInput, InequalityId};
use crate::harness::generate::{derive_seed, rng_for};
use crate::measure::{ExponentContext, MeasureSpace, WeightedFunction};
use crate::multi::ScalarKernel;
use crate::pairwise::{mooney_factor, theorem1_check, PairInput};

pub const MIN_BUDGET: usize = 100;
pub const MAX_DIM: usize = 32;
pub const DEFAULT_RESTARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `sandwich_upper - ratio`.
    MaxSlackSandwichUpper,
    /// `ratio - sandwich_lower`.
    MaxSlackSandwichLower,
    /// `mooney - min J̄`: how far the sandwich improves on Mooney, `p ≥ 2`.
    MaxGapSandwichMinusMooney,
    /// `min J̄ - mooney`, `p ≥ 2`.
    MaxGapMooneyMinusSandwich,
    /// The scalar kernel over `t ∈ (0, 1]`.
    MaxScalarKernel,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::MaxSlackSandwichUpper => "max_slack_sandwich_upper",
            Objective::MaxSlackSandwichLower => "max_slack_sandwich_lower",
            Objective::MaxGapSandwichMinusMooney => "max_gap_sandwich_minus_mooney",
            Objective::MaxGapMooneyMinusSandwich => "max_gap_mooney_minus_sandwich",
            Objective::MaxScalarKernel => "max_scalar_kernel",
        }
    }

    pub const ALL: [Objective; 5] = [
        Objective::MaxSlackSandwichUpper,
        Objective::MaxSlackSandwichLower,
        Objective::MaxGapSandwichMinusMooney,
        Objective::MaxGapMooneyMinusSandwich,
        Objective::MaxScalarKernel,
    ];
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Objective::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown objective {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchProblem {
    pub objective: Objective,
    /// Atoms of the counting space; ignored by the scalar kernel.
    pub dim: usize,
    pub p: f64,
    /// Total objective evaluations across restarts.
    pub budget: usize,
    pub seed: u64,
    pub restarts: usize,
    /// Extra starting points `(f, g)` of length `dim`.
    #[serde(default)]
    pub starts: Vec<(Vec<f64>, Vec<f64>)>,
}

impl SearchProblem {
    pub fn new(objective: Objective, dim: usize, p: f64, budget: usize, seed: u64) -> Self {
        Self {
            objective,
            dim,
            p,
            budget,
            seed,
            restarts: DEFAULT_RESTARTS,
            starts: Vec::new(),
        }
    }

    pub fn with_start(mut self, f: Vec<f64>, g: Vec<f64>) -> Self {
        self.starts.push((f, g));
        self
    }

    fn validate(&self) -> Result<()> {
        if self.budget < MIN_BUDGET {
            return Err(Error::InvalidSpec(format!("budget {} below {MIN_BUDGET}", self.budget)));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidSpec("at least one restart is needed".into()));
        }
        if self.objective == Objective::MaxScalarKernel {
            if !(self.p >= 1.0) {
                return Err(Error::UnsupportedRegime {
                    what: "the kernel search",
                    p: self.p,
                });
            }
            return Ok(());
        }
        if !(2..=MAX_DIM).contains(&self.dim) {
            return Err(Error::InvalidSpec(format!("dim {} outside 2..={MAX_DIM}", self.dim)));
        }
        let ctx = ExponentContext::new(self.p)?;
        if !(self.p > 1.0) {
            return Err(Error::UnsupportedRegime {
                what: "pair search",
                p: self.p,
            });
        }
        let gap = matches!(
            self.objective,
            Objective::MaxGapSandwichMinusMooney | Objective::MaxGapMooneyMinusSandwich
        );
        if gap && !ctx.is_upper_regime() {
            return Err(Error::UnsupportedRegime {
                what: "the sandwich–Mooney comparison",
                p: self.p,
            });
        }
        if let Some((f, g)) = self
            .starts
            .iter()
            .find(|(f, g)| f.len() != self.dim || g.len() != self.dim)
        {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: f.len().max(g.len()),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub objective: Objective,
    pub p: f64,
    /// Best point: `(f, g)` normalized to unit `p`-norm, or `[t]` in `f` for the kernel.
    pub best_f: Vec<f64>,
    pub best_g: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    /// Best-so-far value after each evaluation, restarts in order.
    pub trace: Vec<f64>,
    /// Catalog rechecks of the best pair.
    pub rechecks: Vec<(InequalityId, CheckOutcome)>,
    /// A recheck confirmed a violation of a proven bound.
    pub defect: bool,
}

/// Feasible point after projection, or `None` when a function vanishes.
fn project(x: &[f64], dim: usize, p: f64, floor: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let clamp = |v: &[f64]| -> Option<Vec<f64>> {
        let v: Vec<f64> = v
            .iter()
            .map(|&a| if a.is_finite() { a.max(floor) } else { floor })
            .collect();
        let norm = v.iter().map(|a| a.powf(p)).sum::<f64>().powf(p.recip());
        (norm > 0.0 && norm.is_finite()).then(|| v.iter().map(|a| a / norm).collect())
    };
    Some((clamp(&x[..dim])?, clamp(&x[dim..])?))
}

fn pair_objective(objective: Objective, f: &[f64], g: &[f64], p: f64) -> Option<f64> {
    let pair = PairInput::counting(f, g, p).ok()?;
    let report = theorem1_check(&pair).ok()?;
    let v = match objective {
        Objective::MaxSlackSandwichUpper => report.sandwich_upper - report.ratio,
        Objective::MaxSlackSandwichLower => report.ratio - report.sandwich_lower,
        Objective::MaxGapSandwichMinusMooney => mooney_factor(&pair).ok()?.value - report.sandwich_upper,
        Objective::MaxGapMooneyMinusSandwich => report.sandwich_upper - mooney_factor(&pair).ok()?.value,
        Objective::MaxScalarKernel => unreachable!(),
    };
    v.is_finite().then_some(v)
}

/// Nelder–Mead maximization of `h` from `x0`, spending at most `budget` calls.
/// Returns the best point and every evaluated value in order.
fn nelder_mead(h: &dyn Fn(&[f64]) -> f64, x0: Vec<f64>, step: f64, budget: usize) -> (Vec<f64>, f64, Vec<f64>) {
    let n = x0.len();
    let mut values = Vec::with_capacity(budget);
    let eval = |x: &[f64], values: &mut Vec<f64>| -> f64 {
        let v = h(x);
        values.push(v);
        // minimize the negation; infeasible points rank last
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(&x0, &mut values);
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        if values.len() >= budget {
            break;
        }
        let mut x = x0.clone();
        x[i] += if x[i].abs() > 1e-12 {
            step * x[i].abs().max(0.1)
        } else {
            step
        };
        let fx = eval(&x, &mut values);
        simplex.push((x, fx));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    while simplex.len() == n + 1 && values.len() + 2 <= budget {
        order(&mut simplex);
        let worst = simplex[n].clone();
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = eval(&xr, &mut values);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, &mut values);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(0.5);
                let fc = eval(&xc, &mut values);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut values);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    if values.len() >= budget {
                        break;
                    }
                    let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, y)| b + 0.5 * (y - b)).collect();
                    let fx = eval(&x, &mut values);
                    *vertex = (x, fx);
                }
            }
        }
    }
    order(&mut simplex);
    let (x, fx) = simplex.swap_remove(0);
    (x, -fx, values)
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

struct Run {
    x: Vec<f64>,
    value: f64,
    values: Vec<f64>,
}

/// Multi-start Nelder–Mead with projection onto nonnegative unit-norm pairs.
///
/// Restarts run in parallel; each has its own seed and an equal share of the
/// budget. The best point is rechecked against the catalog.
pub fn optimize(problem: &SearchProblem) -> Result<SearchResult> {
    problem.validate()?;
    let p = problem.p;
    let dim = problem.dim;
    let restarts = problem.restarts.max(problem.starts.len());
    let share = (problem.budget / restarts).max(1);
    let kernel = problem.objective == Objective::MaxScalarKernel;
    // the reverse sandwich needs strictly positive functions
    let floor = if p < 2.0 { 1e-9 } else { 0.0 };

    let h = |x: &[f64]| -> f64 {
        if kernel {
            let t = x[0].clamp(1e-12, 1.0);
            return ScalarKernel::new(p, t).map(|k| k.value).unwrap_or(f64::NEG_INFINITY);
        }
        match project(x, dim, p, floor) {
            Some((f, g)) => pair_objective(problem.objective, &f, &g, p).unwrap_or(f64::NEG_INFINITY),
            None => f64::NEG_INFINITY,
        }
    };

    let runs: Vec<Run> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(derive_seed(problem.seed, r as u64));
            let x0 = if kernel {
                vec![rng.gen_range(0.0..1.0) + f64::EPSILON]
            } else if let Some((f, g)) = problem.starts.get(r) {
                f.iter().chain(g).copied().collect()
            } else {
                (0..2 * dim).map(|_| rng.gen_range(0.0..1.0)).collect()
            };
            let (x, value, values) = nelder_mead(&h, x0, 0.25, share);
            Run { x, value, values }
        })
        .collect();

    let mut trace = Vec::new();
    let mut best_so_far = f64::NEG_INFINITY;
    for run in &runs {
        for &v in &run.values {
            if v > best_so_far {
                best_so_far = v;
            }
            trace.push(best_so_far);
        }
    }
    let best = runs
        .iter()
        .filter(|r| r.value.is_finite())
        .max_by(|a, b| a.value.total_cmp(&b.value).then_with(|| lexicographic(&b.x, &a.x)))
        .ok_or_else(|| Error::NumericalDomain("no feasible point was evaluated".into()))?;
    let evaluations = trace.len();

    if kernel {
        let t = best.x[0].clamp(1e-12, 1.0);
        return Ok(SearchResult {
            objective: problem.objective,
            p,
            best_f: vec![t],
            best_g: Vec::new(),
            best_value: best.value,
            evaluations,
            trace,
            rechecks: Vec::new(),
            defect: false,
        });
    }

    let (f, g) = project(&best.x, dim, p, floor).expect("best point is feasible");
    let pair = PairInput::counting(&f, &g, p)?;
    let input = CheckInput::Pair(pair);
    let policy = TolerancePolicy::default();
    let mut rechecks = Vec::new();
    for id in [
        InequalityId::Thm1Lower,
        InequalityId::Thm1Upper,
        InequalityId::Eq5Mooney,
    ] {
        match check(id, &input, &policy) {
            Ok(out) => rechecks.push((id, out)),
            Err(e) if is_not_applicable(&e) => {}
            Err(e) => return Err(e),
        }
    }
    let defect = rechecks.iter().any(|(_, o)| o.verdict == Verdict::ConfirmedViolation);
    Ok(SearchResult {
        objective: problem.objective,
        p,
        best_f: f,
        best_g: g,
        best_value: best.value,
        evaluations,
        trace,
        rechecks,
        defect,
    })
}

/// Target overlap `alpha ∈ [0, 1/2]` of a Mooney equality witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessRequest {
    pub alpha: f64,
    pub p: f64,
}

/// Root of `t^{p/2} / (1 + t^p) = alpha` on `[0, 1]` by bisection.
pub fn witness_t(alpha: f64, p: f64) -> f64 {
    if alpha >= 0.5 {
        return 1.0;
    }
    let phi = |t: f64| t.powf(0.5 * p) / (1.0 + t.powf(p));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A pair attaining equality in the Mooney bound with `Γ = 2 alpha`: the
/// one-atom pair `(1, t)`, or two disjoint atoms when `alpha = 0`.
pub fn mooney_witness(req: WitnessRequest) -> Result<PairInput> {
    let WitnessRequest { alpha, p } = req;
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::precondition(format!("alpha = {alpha} outside [0, 1/2]")));
    }
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::UnsupportedRegime {
            what: "Mooney witnesses",
            p,
        });
    }
    let ctx = ExponentContext::new(p)?;
    if alpha == 0.0 {
        let space = MeasureSpace::counting(2)?;
        return PairInput::new(
            WeightedFunction::new(&space, vec![1.0, 0.0])?,
            WeightedFunction::new(&space, vec![0.0, 1.0])?,
            ctx,
        );
    }
    let t = witness_t(alpha, p);
    let space = MeasureSpace::counting(1)?;
    PairInput::new(
        WeightedFunction::new(&space, vec![1.0])?,
        WeightedFunction::new(&space, vec![t])?,
        ctx,
    )
}
