//! Scalar and n-function bounds with the constants `C_p` and `C'_p`, and
//! the summability table for sequences of functions.
//!
//! For `p ≥ 2`
//!
//! ```text
//! ‖Σ f_j‖_p^p ≤ Σ ‖f_j‖_p^p + C_p ‖Σ f_j‖_p^{p-2} ‖Σ_{i<j} f_i f_j‖_{p/2}
//! ```
//!
//! and for `p ∈ [1, 2]` the reverse holds with `C'_p` and the factor
//! `‖Σ f_j‖_p^{-(2-p)}`, provided the sum is not the zero function.

use serde::{Deserialize, Serialize};

use crate::check::{CheckOutcome, Sides, TolerancePolicy};
use crate::error::{Error, Result};
use crate::measure::{power, power_integral, MeasureSpace, WeightedFunction};
use crate::numeric::power_gap;
use crate::precise::{self, PreciseFamily};

/// `(C_p, C'_p)` with `C'_p = 4 - 2^{3-p}` and `C_p = max{p, C'_p}`.
pub fn c_constants(p: f64) -> Result<(f64, f64)> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::UnsupportedRegime {
            what: "the constants C_p",
            p,
        });
    }
    let c_prime = 4.0 - (3.0 - p).exp2();
    Ok((p.max(c_prime), c_prime))
}

/// `((1+t)^p - 1 - t^p) / (t (1+t)^{p-2})` on `t ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarKernel {
    pub p: f64,
    pub t: f64,
    pub value: f64,
}

impl ScalarKernel {
    pub fn new(p: f64, t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::precondition(format!("kernel argument {t} outside (0, 1]")));
        }
        if !(p >= 1.0) {
            return Err(Error::UnsupportedRegime {
                what: "the scalar kernel",
                p,
            });
        }
        Ok(Self {
            p,
            t,
            value: kernel_value(p, t),
        })
    }
}

fn kernel_value(p: f64, t: f64) -> f64 {
    power_gap(t, p) / (t * (1.0 + t).powf(p - 2.0))
}

/// `Σ_{i<j} a_i a_j` accumulated as `Σ_j a_j Σ_{i<j} a_i`.
fn pair_products(a: &[f64]) -> f64 {
    let mut prefix = 0.0;
    let mut acc = 0.0;
    for &x in a {
        acc += x * prefix;
        prefix += x;
    }
    acc
}

fn scalar_form(a: &[f64], p: f64) -> Result<(bool, f64)> {
    if a.len() < 2 {
        return Err(Error::precondition("the scalar bound needs at least two numbers"));
    }
    if let Some((index, &value)) = a.iter().enumerate().find(|(_, x)| !(**x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidValue { index, value });
    }
    let (c, c_prime) = c_constants(p)?;
    if p >= 2.0 {
        Ok((true, c))
    } else {
        if a.iter().all(|&x| x == 0.0) {
            return Err(Error::precondition("the reverse scalar bound needs a nonzero sum"));
        }
        Ok((false, c_prime))
    }
}

/// Both sides of `(Σa)^p ? Σa^p + C (Σa)^{p-2} Σ_{i<j} a_i a_j`: `≤` with
/// `C_p` for `p ≥ 2`, `≥` with `C'_p` for `p ∈ [1, 2)`.
pub fn scalar_sides(a: &[f64], p: f64) -> Result<Sides> {
    let (upper, c) = scalar_form(a, p)?;
    let total: f64 = a.iter().sum();
    let powers: f64 = a.iter().map(|&x| power(x, p)).sum();
    let lhs = power(total, p);
    let rhs = powers + c * power(total, p - 2.0) * pair_products(a);
    Ok(if upper {
        Sides::le(lhs, rhs)
    } else {
        Sides::ge(lhs, rhs)
    })
}

pub(crate) fn scalar_sides_precise(a: &[f64], p: f64) -> Result<Sides> {
    let (upper, _) = scalar_form(a, p)?;
    let (c, c_prime) = precise::c_constants(p);
    let (lhs, rhs) = precise::scalar_sides(a, p, if upper { &c } else { &c_prime });
    Ok(if upper {
        Sides::le(lhs.to_f64(), rhs.to_f64())
    } else {
        Sides::ge(lhs.to_f64(), rhs.to_f64())
    })
}

pub fn scalar_bound_check(a: &[f64], p: f64) -> Result<CheckOutcome> {
    scalar_bound_check_with(a, p, &TolerancePolicy::default())
}

pub fn scalar_bound_check_with(a: &[f64], p: f64, policy: &TolerancePolicy) -> Result<CheckOutcome> {
    CheckOutcome::with_recheck(scalar_sides(a, p)?, policy, || scalar_sides_precise(a, p))
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the extremum of `h` on `[a, b]`.
fn golden_section(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize, maximize: bool) -> (f64, f64) {
    let better = |x: f64, y: f64| if maximize { x > y } else { x < y };
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    for _ in 0..iters {
        if better(hc, hd) {
            b = d;
            d = c;
            hd = hc;
            c = b - GOLDEN * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + GOLDEN * (b - a);
            hd = h(d);
        }
    }
    if better(hc, hd) {
        (c, hc)
    } else {
        (d, hd)
    }
}

/// Estimate of `sup_{t∈(0,1]}` (for `p ≥ 2`) or `inf` (for `p ∈ [1, 2)`) of the
/// scalar kernel: a uniform grid followed by golden-section refinement
/// around the best grid point.
pub fn verify_cp_extremal(p: f64, grid_size: usize, refine_iters: usize) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::UnsupportedRegime {
            what: "the kernel extremum",
            p,
        });
    }
    let grid_size = grid_size.max(2);
    let maximize = p >= 2.0;
    let h = |t: f64| kernel_value(p, t);
    let better = |x: f64, y: f64| if maximize { x > y } else { x < y };
    let step = 1.0 / grid_size as f64;
    let (mut best_k, mut best) = (grid_size, h(1.0));
    for k in 1..grid_size {
        let v = h(k as f64 * step);
        if better(v, best) {
            best_k = k;
            best = v;
        }
    }
    let lo = (best_k - 1) as f64 * step;
    let hi = ((best_k + 1) as f64 * step).min(1.0);
    let (_, refined) = golden_section(h, lo, hi, refine_iters, maximize);
    // the bracket end t = 1 is attainable, t = 0 is not
    let endpoint = h(1.0);
    let mut out = best;
    for v in [refined, endpoint] {
        if better(v, out) {
            out = v;
        }
    }
    Ok(out)
}

fn check_family(fs: &[WeightedFunction]) -> Result<()> {
    if fs.len() < 2 {
        return Err(Error::precondition("the n-function bound needs at least two functions"));
    }
    for f in &fs[1..] {
        fs[0].check_same_space(f)?;
    }
    Ok(())
}

/// Pointwise `Σ f_j` and `Σ_{i<j} f_i f_j`, the latter via running prefix sums.
fn sum_and_cross(fs: &[WeightedFunction]) -> (Vec<f64>, Vec<f64>) {
    let n = fs[0].len();
    let mut sum = vec![0.0; n];
    let mut cross = vec![0.0; n];
    for f in fs {
        for (k, &x) in f.values().iter().enumerate() {
            cross[k] += x * sum[k];
            sum[k] += x;
        }
    }
    (sum, cross)
}

/// Terms shared by the n-function bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyTerms {
    /// `‖Σ f_j‖_p^p`.
    pub sum_power: f64,
    /// `Σ ‖f_j‖_p^p`.
    pub sum_of_powers: f64,
    /// `‖Σ_{i<j} f_i f_j‖_{p/2}`.
    pub cross_norm: f64,
}

pub fn family_terms(fs: &[WeightedFunction], p: f64) -> Result<FamilyTerms> {
    check_family(fs)?;
    let space = fs[0].space();
    let (sum, cross) = sum_and_cross(fs);
    let sum = WeightedFunction::new(space, sum)?;
    let cross = WeightedFunction::new(space, cross)?;
    let half = 0.5 * p;
    Ok(FamilyTerms {
        sum_power: power_integral(&sum, p),
        sum_of_powers: fs.iter().map(|f| power_integral(f, p)).sum(),
        cross_norm: power(power_integral(&cross, half), half.recip()),
    })
}

/// Sides of the n-function upper bound, `p ≥ 2`.
pub fn thm2_upper_sides(fs: &[WeightedFunction], p: f64) -> Result<Sides> {
    if !(p >= 2.0) {
        return Err(Error::UnsupportedRegime {
            what: "the n-function upper bound",
            p,
        });
    }
    let t = family_terms(fs, p)?;
    let (c, _) = c_constants(p)?;
    let norm_pow = power(t.sum_power, (p - 2.0) / p);
    Ok(Sides::le(t.sum_power, t.sum_of_powers + c * norm_pow * t.cross_norm))
}

/// Sides of the n-function lower bound, `p ∈ [1, 2]`.
pub fn thm2_lower_sides(fs: &[WeightedFunction], p: f64) -> Result<Sides> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::UnsupportedRegime {
            what: "the n-function lower bound",
            p,
        });
    }
    let t = family_terms(fs, p)?;
    if t.sum_power == 0.0 {
        return Err(Error::precondition("the n-function lower bound needs a nonzero sum"));
    }
    let (_, c_prime) = c_constants(p)?;
    let norm_pow = power(t.sum_power, (2.0 - p) / p);
    Ok(Sides::ge(
        t.sum_power,
        t.sum_of_powers + c_prime * t.cross_norm / norm_pow,
    ))
}

pub(crate) fn thm2_upper_sides_precise(fs: &[WeightedFunction], p: f64) -> Result<Sides> {
    let fam = PreciseFamily::new(fs, p)?;
    let (c, _) = precise::c_constants(p);
    Ok(Sides::le(fam.sum_power().to_f64(), fam.thm2_upper_rhs(&c).to_f64()))
}

pub(crate) fn thm2_lower_sides_precise(fs: &[WeightedFunction], p: f64) -> Result<Sides> {
    let fam = PreciseFamily::new(fs, p)?;
    let (_, c_prime) = precise::c_constants(p);
    Ok(Sides::ge(
        fam.sum_power().to_f64(),
        fam.thm2_lower_rhs(&c_prime).to_f64(),
    ))
}

pub fn thm2_upper_check(fs: &[WeightedFunction], p: f64) -> Result<CheckOutcome> {
    thm2_upper_check_with(fs, p, &TolerancePolicy::default())
}

pub fn thm2_upper_check_with(fs: &[WeightedFunction], p: f64, policy: &TolerancePolicy) -> Result<CheckOutcome> {
    CheckOutcome::with_recheck(thm2_upper_sides(fs, p)?, policy, || thm2_upper_sides_precise(fs, p))
}

pub fn thm2_lower_check(fs: &[WeightedFunction], p: f64) -> Result<CheckOutcome> {
    thm2_lower_check_with(fs, p, &TolerancePolicy::default())
}

pub fn thm2_lower_check_with(fs: &[WeightedFunction], p: f64, policy: &TolerancePolicy) -> Result<CheckOutcome> {
    CheckOutcome::with_recheck(thm2_lower_sides(fs, p)?, policy, || thm2_lower_sides_precise(fs, p))
}

/// `Σ_{i<j} ‖f_i f_j‖_{p/2}^{p/2}` over all pairs.
fn cross_sum(fs: &[WeightedFunction], p: f64) -> f64 {
    let w = fs[0].weights();
    let half = 0.5 * p;
    let mut acc = 0.0;
    for (i, fi) in fs.iter().enumerate() {
        for fj in &fs[i + 1..] {
            acc += w
                .iter()
                .zip(fi.values().iter().zip(fj.values()))
                .map(|(wk, (a, b))| wk * power(a * b, half))
                .sum::<f64>();
        }
    }
    acc
}

/// Sides of `‖Σf‖_p^p ? Σ‖f_j‖_p^p + (2^p - 2) Σ_{i<j} ‖f_i f_j‖_{p/2}^{p/2}`:
/// `≤` for `p ∈ [1, 2]`, `≥` for `p > 2`.
pub fn mooney_sum_sides(fs: &[WeightedFunction], p: f64) -> Result<Sides> {
    if !(p >= 1.0) {
        return Err(Error::UnsupportedRegime {
            what: "the n-function Mooney bound",
            p,
        });
    }
    let t = family_terms(fs, p)?;
    let rhs = t.sum_of_powers + (p.exp2() - 2.0) * cross_sum(fs, p);
    Ok(if p <= 2.0 {
        Sides::le(t.sum_power, rhs)
    } else {
        Sides::ge(t.sum_power, rhs)
    })
}

pub(crate) fn mooney_sum_sides_precise(fs: &[WeightedFunction], p: f64) -> Result<Sides> {
    let fam = PreciseFamily::new(fs, p)?;
    let (lhs, rhs) = (fam.sum_power().to_f64(), fam.mooney_sum_rhs().to_f64());
    Ok(if p <= 2.0 {
        Sides::le(lhs, rhs)
    } else {
        Sides::ge(lhs, rhs)
    })
}

pub fn mooney_sum_check(fs: &[WeightedFunction], p: f64, policy: &TolerancePolicy) -> Result<CheckOutcome> {
    CheckOutcome::with_recheck(mooney_sum_sides(fs, p)?, policy, || mooney_sum_sides_precise(fs, p))
}

/// How the members of a family are generated; indices `j` start at 1.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    Explicit(Vec<WeightedFunction>),
    /// `f_j = c r^j χ_A`.
    Geometric {
        space: MeasureSpace,
        support: Vec<usize>,
        c: f64,
        r: f64,
    },
    /// `f_j = c j^{-s} χ_A`.
    PowerLaw {
        space: MeasureSpace,
        support: Vec<usize>,
        c: f64,
        s: f64,
    },
    /// `f_j = c r^j` on atom `j` of a counting space with `n_max` atoms.
    DisjointAtoms {
        c: f64,
        r: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily {
    pub kind: FamilyKind,
    pub n_max: usize,
}

impl FunctionFamily {
    pub fn new(kind: FamilyKind, n_max: usize) -> Result<Self> {
        let fam = Self { kind, n_max };
        fam.members()?;
        Ok(fam)
    }

    fn indicator_family(
        space: &MeasureSpace,
        support: &[usize],
        n: usize,
        coef: impl Fn(usize) -> f64,
    ) -> Result<Vec<WeightedFunction>> {
        if let Some(&bad) = support.iter().find(|&&i| i >= space.len()) {
            return Err(Error::InvalidSpec(format!(
                "support atom {bad} outside a space of {} atoms",
                space.len()
            )));
        }
        (1..=n)
            .map(|j| {
                let mut values = vec![0.0; space.len()];
                for &i in support {
                    values[i] = coef(j);
                }
                WeightedFunction::new(space, values)
            })
            .collect()
    }

    /// The first `n_max` members.
    pub fn members(&self) -> Result<Vec<WeightedFunction>> {
        if self.n_max == 0 {
            return Err(Error::InvalidSpec("a family needs n_max ≥ 1".into()));
        }
        let n = self.n_max;
        match &self.kind {
            FamilyKind::Explicit(fs) => {
                if fs.len() < n {
                    return Err(Error::InvalidSpec(format!(
                        "explicit family has {} members, n_max is {n}",
                        fs.len()
                    )));
                }
                for f in &fs[1..n] {
                    fs[0].check_same_space(f)?;
                }
                Ok(fs[..n].to_vec())
            }
            FamilyKind::Geometric { space, support, c, r } => {
                Self::indicator_family(space, support, n, |j| c * r.powi(j as i32))
            }
            FamilyKind::PowerLaw { space, support, c, s } => {
                Self::indicator_family(space, support, n, |j| c * (j as f64).powf(-s))
            }
            FamilyKind::DisjointAtoms { c, r } => {
                let space = MeasureSpace::counting(n)?;
                (0..n)
                    .map(|k| {
                        let mut values = vec![0.0; n];
                        values[k] = c * r.powi(k as i32 + 1);
                        WeightedFunction::new(&space, values)
                    })
                    .collect()
            }
        }
    }
}

/// One row of the summability table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummabilityRow {
    pub n: usize,
    /// `‖Σ_{j≤n} f_j‖_p^p`.
    pub lhs: f64,
    pub sum_norms: f64,
    pub cross_sum: f64,
    pub cross_norm: f64,
    /// Right side of the n-function upper bound, `p ≥ 2`.
    pub thm2_upper_rhs: Option<f64>,
    /// Right side of the n-function lower bound, `p ∈ [1, 2]` with a nonzero sum.
    pub thm2_lower_rhs: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Lhs,
    SumNorms,
    CrossSum,
    CrossNorm,
}

impl Column {
    pub fn as_str(self) -> &'static str {
        match self {
            Column::Lhs => "lhs",
            Column::SumNorms => "sum_norms",
            Column::CrossSum => "cross_sum",
            Column::CrossNorm => "cross_norm",
        }
    }

    fn get(self, row: &SummabilityRow) -> f64 {
        match self {
            Column::Lhs => row.lhs,
            Column::SumNorms => row.sum_norms,
            Column::CrossSum => row.cross_sum,
            Column::CrossNorm => row.cross_norm,
        }
    }
}

/// Growth heuristic. Never a proof either way.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergencePolicy {
    /// A column above this value is flagged outright.
    pub cap: f64,
    /// Flag when the increment over `(n/2, n]` is at least this fraction of
    /// the increment over `(n/4, n/2]`.
    pub saturation_ratio: f64,
    /// Increments below this fraction of the value count as saturated.
    pub rel_floor: f64,
}

impl Default for DivergencePolicy {
    fn default() -> Self {
        Self {
            cap: 1e12,
            saturation_ratio: 0.8,
            rel_floor: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthStatus {
    Saturating,
    NonConvergingAtNmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionRole {
    Sufficient,
    Necessary,
}

/// One condition from the regime's list, e.g. `Σ‖f_j‖^p < ∞ and Σ‖f_i f_j‖ < ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub role: ConditionRole,
    pub columns: Vec<Column>,
    /// Every listed column looks saturated at `n_max`.
    pub met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub p: f64,
    pub n_max: usize,
    pub rows: Vec<SummabilityRow>,
    pub growth: Vec<(Column, GrowthStatus)>,
    pub conditions: Vec<ConditionVerdict>,
}

impl SummabilityReport {
    pub fn status(&self, column: Column) -> GrowthStatus {
        self.growth
            .iter()
            .find(|(c, _)| *c == column)
            .map(|(_, s)| *s)
            .expect("every column has a status")
    }

    pub fn condition(&self, role: ConditionRole) -> &ConditionVerdict {
        self.conditions
            .iter()
            .find(|c| c.role == role)
            .expect("both roles present")
    }
}

fn growth_status(rows: &[SummabilityRow], column: Column, policy: &DivergencePolicy) -> GrowthStatus {
    let n = rows.len();
    let at = |k: usize| column.get(&rows[k.max(1) - 1]);
    let v = at(n);
    if !v.is_finite() || v > policy.cap {
        return GrowthStatus::NonConvergingAtNmax;
    }
    if n < 4 {
        return GrowthStatus::Saturating;
    }
    let d1 = v - at(n / 2);
    let d2 = at(n / 2) - at(n / 4);
    if d1 > policy.rel_floor * v.abs() && d1 >= policy.saturation_ratio * d2 {
        GrowthStatus::NonConvergingAtNmax
    } else {
        GrowthStatus::Saturating
    }
}

pub fn summability_report(family: &FunctionFamily, p: f64) -> Result<SummabilityReport> {
    summability_report_with(family, p, &DivergencePolicy::default())
}

/// Fills the per-`n` table for `n = 1..=n_max` incrementally.
pub fn summability_report_with(
    family: &FunctionFamily,
    p: f64,
    policy: &DivergencePolicy,
) -> Result<SummabilityReport> {
    let (c, c_prime) = c_constants(p)?;
    let fs = family.members()?;
    let atoms = fs[0].len();
    let w = fs[0].weights().to_vec();
    let half = 0.5 * p;
    let integrate = |h: &[f64], e: f64| -> f64 { w.iter().zip(h).map(|(wk, x)| wk * power(*x, e)).sum() };

    let mut sum = vec![0.0; atoms];
    let mut cross = vec![0.0; atoms];
    let (mut sum_norms, mut cross_sum) = (0.0, 0.0);
    let mut rows = Vec::with_capacity(fs.len());
    for (idx, f) in fs.iter().enumerate() {
        let fv = f.values();
        for prev in &fs[..idx] {
            cross_sum += w
                .iter()
                .zip(prev.values().iter().zip(fv))
                .map(|(wk, (a, b))| wk * power(a * b, half))
                .sum::<f64>();
        }
        for k in 0..atoms {
            cross[k] += fv[k] * sum[k];
            sum[k] += fv[k];
        }
        sum_norms += integrate(fv, p);
        let lhs = integrate(&sum, p);
        let cross_norm = power(integrate(&cross, half), half.recip());
        let thm2_upper_rhs = (p >= 2.0).then(|| sum_norms + c * power(lhs, (p - 2.0) / p) * cross_norm);
        let thm2_lower_rhs =
            (p <= 2.0 && lhs > 0.0).then(|| sum_norms + c_prime * cross_norm / power(lhs, (2.0 - p) / p));
        rows.push(SummabilityRow {
            n: idx + 1,
            lhs,
            sum_norms,
            cross_sum,
            cross_norm,
            thm2_upper_rhs,
            thm2_lower_rhs,
        });
    }

    let columns = [Column::Lhs, Column::SumNorms, Column::CrossSum, Column::CrossNorm];
    let growth: Vec<_> = columns
        .iter()
        .map(|&col| (col, growth_status(&rows, col, policy)))
        .collect();
    let saturated = |col: Column| growth.iter().any(|&(c, s)| c == col && s == GrowthStatus::Saturating);
    // p ∈ [1, 2]: the pairwise sum controls sufficiency, the norm of the cross
    // function necessity; for p ≥ 2 the roles swap
    let (sufficient, necessary) = if p <= 2.0 {
        (Column::CrossSum, Column::CrossNorm)
    } else {
        (Column::CrossNorm, Column::CrossSum)
    };
    let conditions = [
        (ConditionRole::Sufficient, sufficient),
        (ConditionRole::Necessary, necessary),
    ]
    .into_iter()
    .map(|(role, col)| {
        let columns = vec![Column::SumNorms, col];
        ConditionVerdict {
            role,
            met: columns.iter().all(|&c| saturated(c)),
            columns,
        }
    })
    .collect();
    Ok(SummabilityReport {
        p,
        n_max: family.n_max,
        rows,
        growth,
        conditions,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::check::Verdict;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn copies(n: usize, values: &[f64]) -> Vec<WeightedFunction> {
        let f = WeightedFunction::counting(values.to_vec()).unwrap();
        vec![f; n]
    }

    #[test]
    fn constants() {
        assert_eq!(c_constants(2.0).unwrap(), (2.0, 2.0));
        assert_eq!(c_constants(3.0).unwrap(), (3.0, 3.0));
        let (c, _) = c_constants(2.5).unwrap();
        assert!(close(c, 2.585786437626904951198311, 1e-15));
        assert!(close(c_constants(1.5).unwrap().1, 1.171572875253809902396623, 1e-15));
        assert_eq!(c_constants(4.0).unwrap().0, 4.0);
        assert!(c_constants(0.9).is_err());
    }

    #[test]
    fn scalar_examples() {
        let eq = scalar_bound_check(&[1.0, 1.0], 3.0).unwrap();
        assert_eq!((eq.lhs, eq.rhs, eq.verdict), (8.0, 8.0, Verdict::EqualityWithinTol));
        let eq2 = scalar_bound_check(&[1.0, 1.0, 1.0], 2.0).unwrap();
        assert_eq!((eq2.lhs, eq2.rhs, eq2.verdict), (9.0, 9.0, Verdict::EqualityWithinTol));
        let strict = scalar_bound_check(&[1.0, 1.0], 4.0).unwrap();
        assert_eq!(
            (strict.lhs, strict.rhs, strict.verdict),
            (16.0, 18.0, Verdict::StrictHold)
        );
        assert!(scalar_bound_check(&[0.0, 0.0], 1.5).is_err());
        assert!(scalar_bound_check(&[1.0], 3.0).is_err());
    }

    #[test]
    fn kernel_extremum_matches_the_constants() {
        for p in [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 8.0] {
            let (c, c_prime) = c_constants(p).unwrap();
            let want = if p >= 2.0 { c } else { c_prime };
            let got = verify_cp_extremal(p, 1000, 200).unwrap();
            assert!((got - want).abs() <= 1e-6, "p = {p}: {got} vs {want}");
        }
        assert!(ScalarKernel::new(3.0, 0.0).is_err());
        assert!(close(
            ScalarKernel::new(2.5, 1.0).unwrap().value,
            4.0 - 2f64.sqrt(),
            1e-14
        ));
    }

    #[test]
    fn thm2_examples() {
        let three = copies(3, &[1.0]);
        let up2 = thm2_upper_check(&three, 2.0).unwrap();
        assert_eq!(up2.verdict, Verdict::EqualityWithinTol);
        let up4 = thm2_upper_check(&three, 4.0).unwrap();
        assert!(close(up4.lhs, 81.0, 1e-15) && close(up4.rhs, 111.0, 1e-15));
        assert_eq!(up4.verdict, Verdict::StrictHold);
        let lo2 = thm2_lower_check(&three, 2.0).unwrap();
        assert_eq!(lo2.verdict, Verdict::EqualityWithinTol);

        let two = copies(2, &[1.0]);
        let lo = thm2_lower_check(&two, 1.5).unwrap();
        assert!(close(lo.lhs, 2.828427124746190097603377, 1e-15));
        assert!(close(lo.rhs, 2.828427124746190097603377, 1e-15));
        assert_eq!(lo.verdict, Verdict::EqualityWithinTol);

        let space = MeasureSpace::counting(2).unwrap();
        let d = vec![
            WeightedFunction::new(&space, vec![1.0, 0.0]).unwrap(),
            WeightedFunction::new(&space, vec![0.0, 1.0]).unwrap(),
        ];
        let dl = thm2_lower_check(&d, 1.5).unwrap();
        assert_eq!((dl.lhs, dl.rhs, dl.verdict), (2.0, 2.0, Verdict::EqualityWithinTol));
        assert_eq!(thm2_upper_check(&d, 5.0).unwrap().verdict, Verdict::EqualityWithinTol);

        let zeros = copies(2, &[0.0]);
        assert!(matches!(thm2_lower_check(&zeros, 1.5), Err(Error::Precondition(_))));
        assert!(thm2_upper_check(&three, 1.5).is_err());
    }

    #[test]
    fn mooney_sum_directions() {
        let two = copies(2, &[1.0, 2.0]);
        let s = mooney_sum_sides(&two, 1.5).unwrap();
        assert!(s.margin() >= -1e-12);
        let s = mooney_sum_sides(&two, 3.0).unwrap();
        // equal functions attain equality: (2a)^p = 2a^p + (2^p - 2) a^p
        assert!(s.margin().abs() <= 1e-12 * s.scale());
    }

    #[test]
    fn disjoint_family_converges() {
        let p = 3.0;
        let fam = FunctionFamily::new(
            FamilyKind::DisjointAtoms {
                c: 1.0,
                r: 0.5f64.powf(1.0 / p),
            },
            40,
        )
        .unwrap();
        let rep = summability_report(&fam, p).unwrap();
        assert!(rep.rows.iter().all(|r| r.cross_sum == 0.0 && r.cross_norm == 0.0));
        assert!(close(rep.rows.last().unwrap().sum_norms, 1.0, 1e-9));
        assert_eq!(rep.status(Column::Lhs), GrowthStatus::Saturating);
        assert!(rep.condition(ConditionRole::Sufficient).met);
        assert!(rep.condition(ConditionRole::Necessary).met);
    }

    #[test]
    fn harmonic_family_is_flagged() {
        let space = MeasureSpace::counting(1).unwrap();
        let fam = FunctionFamily::new(
            FamilyKind::PowerLaw {
                space,
                support: vec![0],
                c: 1.0,
                s: 1.0,
            },
            400,
        )
        .unwrap();
        let rep = summability_report(&fam, 2.0).unwrap();
        let last = rep.rows.last().unwrap();
        let h: f64 = (1..=400).map(|j| 1.0 / j as f64).sum();
        assert!(close(last.lhs, h * h, 1e-12));
        let h2: f64 = (1..=400).map(|j| 1.0 / (j * j) as f64).sum();
        assert!(close(last.sum_norms, h2, 1e-12));
        assert!(close(last.cross_norm, 0.5 * (h * h - h2), 1e-12));
        assert_eq!(rep.status(Column::SumNorms), GrowthStatus::Saturating);
        assert_eq!(rep.status(Column::CrossNorm), GrowthStatus::NonConvergingAtNmax);
        assert_eq!(rep.status(Column::Lhs), GrowthStatus::NonConvergingAtNmax);
        assert!(!rep.condition(ConditionRole::Sufficient).met);
    }

    #[test]
    fn geometric_family_converges_and_bounds_hold() {
        let space = MeasureSpace::counting(1).unwrap();
        let fam = FunctionFamily::new(
            FamilyKind::Geometric {
                space,
                support: vec![0],
                c: 1.0,
                r: 0.5,
            },
            60,
        )
        .unwrap();
        let rep = summability_report(&fam, 2.0).unwrap();
        for col in [Column::Lhs, Column::SumNorms, Column::CrossSum, Column::CrossNorm] {
            assert_eq!(rep.status(col), GrowthStatus::Saturating, "{}", col.as_str());
        }
        for r in &rep.rows {
            let tol = 1e-9 * r.lhs.max(1.0);
            assert!(r.lhs <= r.thm2_upper_rhs.unwrap() + tol);
            assert!(r.lhs >= r.thm2_lower_rhs.unwrap() - tol);
        }
        assert!(close(rep.rows.last().unwrap().lhs, 1.0, 1e-12));
    }
}
