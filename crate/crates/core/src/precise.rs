//! Multiprecision re-evaluation of the catalog formulas.
//!
//! Everything here is evaluated from the raw atom values at
//! [`PRECISION_BITS`] bits (about 77 decimal digits) using the defining
//! formulas directly, with none of the rescaling or log-domain tricks of the
//! double-precision path. It only runs when a double-precision margin looks
//! like a violation, so speed is not a concern.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use crate::error::{Error, Result};
use crate::measure::WeightedFunction;
use crate::pairwise::Orientation;

pub const PRECISION_BITS: usize = 256;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// A 256-bit binary float.
#[derive(Clone)]
pub struct Mp(BigFloat);

impl Mp {
    pub fn from_f64(x: f64) -> Self {
        Mp(BigFloat::from_f64(x, PRECISION_BITS))
    }

    pub fn zero() -> Self {
        Self::from_f64(0.0)
    }

    pub fn one() -> Self {
        Self::from_f64(1.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }

    pub fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Mp(self.0.abs())
    }

    pub fn sqrt(&self) -> Self {
        Mp(self.0.sqrt(PRECISION_BITS, RM))
    }

    pub fn ln(&self) -> Self {
        Mp(with_consts(|cc| self.0.ln(PRECISION_BITS, RM, cc)))
    }

    pub fn exp(&self) -> Self {
        Mp(with_consts(|cc| self.0.exp(PRECISION_BITS, RM, cc)))
    }

    /// `self^e` for `self ≥ 0`, with `0^0 = 1` and `0^e = 0` for `e > 0`.
    pub fn pow(&self, e: &Mp) -> Self {
        if e.is_zero() {
            Mp::one()
        } else if self.is_zero() {
            if e.is_negative() {
                Mp(astro_float::INF_POS)
            } else {
                Mp::zero()
            }
        } else {
            Mp(with_consts(|cc| self.0.pow(&e.0, PRECISION_BITS, RM, cc)))
        }
    }

    pub fn powf(&self, e: f64) -> Self {
        self.pow(&Mp::from_f64(e))
    }

    pub fn recip(&self) -> Self {
        Mp::one() / self
    }

    pub fn max(self, other: Mp) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Mp) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Nearest double (via a decimal rendering of the full mantissa).
    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        if self.0.is_zero() {
            return 0.0;
        }
        with_consts(|cc| self.0.format(Radix::Dec, RM, cc))
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl PartialEq for Mp {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Mp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

impl From<f64> for Mp {
    fn from(x: f64) -> Self {
        Mp::from_f64(x)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Mp> for &Mp {
            type Output = Mp;
            fn $method(self, rhs: &Mp) -> Mp {
                Mp(self.0.$method(&rhs.0, PRECISION_BITS, RM))
            }
        }
        impl $trait<Mp> for Mp {
            type Output = Mp;
            fn $method(self, rhs: Mp) -> Mp {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Mp> for Mp {
            type Output = Mp;
            fn $method(self, rhs: &Mp) -> Mp {
                (&self).$method(rhs)
            }
        }
        impl $trait<Mp> for &Mp {
            type Output = Mp;
            fn $method(self, rhs: Mp) -> Mp {
                self.$method(&rhs)
            }
        }
        impl $trait<f64> for Mp {
            type Output = Mp;
            fn $method(self, rhs: f64) -> Mp {
                (&self).$method(&Mp::from_f64(rhs))
            }
        }
        impl $trait<f64> for &Mp {
            type Output = Mp;
            fn $method(self, rhs: f64) -> Mp {
                self.$method(&Mp::from_f64(rhs))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(self.0.neg())
    }
}

fn lift(xs: &[f64]) -> Vec<Mp> {
    xs.iter().map(|&x| Mp::from_f64(x)).collect()
}

/// `Σ w_i h_i`.
fn integral(w: &[Mp], h: impl Fn(usize) -> Mp) -> Mp {
    w.iter().enumerate().fold(Mp::zero(), |acc, (i, wi)| acc + wi * h(i))
}

/// `(1 + t)^p - 1 - t^p`, evaluated directly.
pub fn power_gap(t: &Mp, p: &Mp) -> Mp {
    (Mp::one() + t).pow(p) - 1.0 - t.pow(p)
}

/// Hölder ratios of one orientation: `(t, t1, t2, t^p)`.
#[derive(Debug, Clone)]
pub struct PreciseHolder {
    pub t: Mp,
    pub t1: Mp,
    pub t2: Mp,
    pub t_pow_p: Mp,
}

/// A pair `(f, g)` lifted to multiprecision with every shared integral.
#[derive(Debug, Clone)]
pub struct PrecisePair {
    p: Mp,
    w: Vec<Mp>,
    f: Vec<Mp>,
    g: Vec<Mp>,
    sf: Mp,
    sg: Mp,
    ssum: Mp,
    cross: Mp,
    mixed_fg: Mp,
    mixed_gf: Mp,
}

impl PrecisePair {
    pub fn new(f: &WeightedFunction, g: &WeightedFunction, p: f64) -> Result<Self> {
        f.check_same_space(g)?;
        let pm = Mp::from_f64(p);
        let w = lift(f.weights());
        let fv = lift(f.values());
        let gv = lift(g.values());
        let half = Mp::from_f64(0.5 * p);
        let pm1 = Mp::from_f64(p - 1.0);
        let sf = integral(&w, |i| fv[i].pow(&pm));
        let sg = integral(&w, |i| gv[i].pow(&pm));
        if sf.is_zero() || sg.is_zero() {
            return Err(Error::precondition("both functions need a nonzero p-norm"));
        }
        let ssum = integral(&w, |i| (&fv[i] + &gv[i]).pow(&pm));
        let cross = integral(&w, |i| (&fv[i] * &gv[i]).pow(&half));
        let mixed_fg = integral(&w, |i| &fv[i] * gv[i].pow(&pm1));
        let mixed_gf = integral(&w, |i| &gv[i] * fv[i].pow(&pm1));
        Ok(Self {
            p: pm,
            w,
            f: fv,
            g: gv,
            sf,
            sg,
            ssum,
            cross,
            mixed_fg,
            mixed_gf,
        })
    }

    pub fn p(&self) -> &Mp {
        &self.p
    }

    pub fn f_power(&self) -> &Mp {
        &self.sf
    }

    pub fn g_power(&self) -> &Mp {
        &self.sg
    }

    pub fn sum_power(&self) -> &Mp {
        &self.ssum
    }

    fn norm(&self, s: &Mp) -> Mp {
        s.pow(&self.p.recip())
    }

    pub fn norm_f(&self) -> Mp {
        self.norm(&self.sf)
    }

    pub fn norm_g(&self) -> Mp {
        self.norm(&self.sg)
    }

    pub fn norm_sum(&self) -> Mp {
        self.norm(&self.ssum)
    }

    pub fn ratio(&self) -> Mp {
        &self.ssum / (&self.sf + &self.sg)
    }

    pub fn gamma(&self) -> Mp {
        (&self.cross * 2.0) / (&self.sf + &self.sg)
    }

    pub fn trivial_factor(&self) -> Mp {
        Mp::from_f64(2.0).pow(&(&self.p - 1.0))
    }

    pub fn carbery_factor(&self) -> Mp {
        let two_over_p = Mp::from_f64(2.0) / &self.p;
        let overlap = self.cross.pow(&two_over_p) / (&self.sf * &self.sg).pow(&self.p.recip());
        (Mp::one() + overlap).pow(&(&self.p - 1.0))
    }

    pub fn cfil_factor(&self) -> Mp {
        let two_over_p = Mp::from_f64(2.0) / &self.p;
        (Mp::one() + self.gamma().pow(&two_over_p)).pow(&(&self.p - 1.0))
    }

    pub fn mooney_factor(&self) -> Mp {
        mooney_factor_from_gamma(&self.gamma(), &self.p)
    }

    fn oriented(&self, o: Orientation) -> (&Mp, &Mp, &Mp, &Mp) {
        match o {
            Orientation::Fg => (&self.sf, &self.sg, &self.mixed_fg, &self.mixed_gf),
            Orientation::Gf => (&self.sg, &self.sf, &self.mixed_gf, &self.mixed_fg),
        }
    }

    pub fn holder(&self, o: Orientation) -> PreciseHolder {
        let (first, second, mixed, moment) = self.oriented(o);
        let t_pow_p = first / second;
        PreciseHolder {
            t: t_pow_p.pow(&self.p.recip()),
            t1: mixed / second,
            t2: (moment / second).pow(&(&self.p - 1.0).recip()),
            t_pow_p,
        }
    }

    fn sandwich_factor(&self, inner: &Mp, t_pow_p: &Mp) -> Mp {
        Mp::one() + power_gap(inner, &self.p) / (Mp::one() + t_pow_p)
    }

    pub fn j_upper(&self, o: Orientation) -> Mp {
        let h = self.holder(o);
        self.sandwich_factor(&h.t2, &h.t_pow_p)
    }

    pub fn j_lower(&self, o: Orientation) -> Mp {
        let h = self.holder(o);
        self.sandwich_factor(&h.t1, &h.t_pow_p)
    }

    pub fn simplified(&self, o: Orientation) -> Mp {
        let h = self.holder(o);
        let c = Mp::from_f64(2.0).pow(&self.p) - 2.0;
        Mp::one() + c * h.t1.pow(&(&self.p * 0.5)) / (Mp::one() + &h.t_pow_p)
    }

    /// Interpolated upper bound in absolute units.
    pub fn interpolated_upper(&self, o: Orientation) -> Mp {
        let h = self.holder(o);
        let lambda = if h.t.is_zero() { Mp::zero() } else { &h.t2 / &h.t };
        let (nf, ng) = (self.norm_f(), self.norm_g());
        let full = (nf + ng).pow(&self.p);
        let plain = &self.sf + &self.sg;
        &lambda * full + (Mp::one() - &lambda) * plain
    }

    /// `(‖g‖_p(1 + t1), ‖f + g‖_p, ‖f‖_p + ‖g‖_p)` with `g` the second function of `o`.
    pub fn reverse_minkowski(&self, o: Orientation) -> [Mp; 3] {
        let (nf, ng) = match o {
            Orientation::Fg => (self.norm_f(), self.norm_g()),
            Orientation::Gf => (self.norm_g(), self.norm_f()),
        };
        let h = self.holder(o);
        [&ng * (Mp::one() + h.t1), self.norm_sum(), nf + ng]
    }

    /// `(|J̄ - J̲|, p 2^{p-1} |t2 - t1|)` for the orientation.
    pub fn error_estimate(&self, o: Orientation) -> (Mp, Mp) {
        let h = self.holder(o);
        let gap = (self.sandwich_factor(&h.t2, &h.t_pow_p) - self.sandwich_factor(&h.t1, &h.t_pow_p)).abs();
        let cap = &self.p * self.trivial_factor() * (&h.t2 - &h.t1).abs();
        (gap, cap)
    }

    /// Normalized `(‖f - g‖_p^p, (2^p - 2)(1 - ‖f g^{p-1}‖_1^{p/2}))`.
    pub fn hanner_diff(&self, o: Orientation) -> (Mp, Mp) {
        let (a, b, na, nb) = match o {
            Orientation::Fg => (&self.f, &self.g, self.norm_f(), self.norm_g()),
            Orientation::Gf => (&self.g, &self.f, self.norm_g(), self.norm_f()),
        };
        let lhs = integral(&self.w, |i| (&a[i] / &na - &b[i] / &nb).abs().pow(&self.p));
        let pm1 = &self.p - 1.0;
        let overlap = integral(&self.w, |i| (&a[i] / &na) * (&b[i] / &nb).pow(&pm1)).min(Mp::one());
        let rhs = (Mp::from_f64(2.0).pow(&self.p) - 2.0) * (Mp::one() - overlap.pow(&(&self.p * 0.5)));
        (lhs, rhs)
    }

    /// `‖(f+g)/2‖_p^p + ‖(f-g)/2‖_p^p` for the normalized pair.
    pub fn hanner_unit(&self) -> Mp {
        let (nf, ng) = (self.norm_f(), self.norm_g());
        integral(&self.w, |i| {
            let a = &self.f[i] / &nf;
            let b = &self.g[i] / &ng;
            ((&a + &b) * 0.5).pow(&self.p) + ((a - b) * 0.5).abs().pow(&self.p)
        })
    }
}

/// `((½(1+s))^{1/p} + (½(1-s))^{1/p})^p` with `s = √(1 - γ²)`.
pub fn mooney_factor_from_gamma(gamma: &Mp, p: &Mp) -> Mp {
    let g2 = (gamma * gamma).min(Mp::one());
    let s = (Mp::one() - &g2).sqrt();
    let hi = (Mp::one() + &s) * 0.5;
    let lo = &g2 / ((Mp::one() + s) * 2.0);
    let r = p.recip();
    (hi.pow(&r) + lo.pow(&r)).pow(p)
}

/// `[‖fg‖_1, ‖g‖_q(‖f + g^{1/(p-1)}‖_p - ‖g^{1/(p-1)}‖_p), ‖g‖_q ‖f‖_p]`.
pub fn lemma_chain(f: &WeightedFunction, g: &WeightedFunction, p: f64) -> Result<[Mp; 3]> {
    f.check_same_space(g)?;
    let w = lift(f.weights());
    let fv = lift(f.values());
    let gv = lift(g.values());
    let pm = Mp::from_f64(p);
    let fg = integral(&w, |i| &fv[i] * &gv[i]);
    if g.is_zero() {
        return Ok([fg, Mp::zero(), Mp::zero()]);
    }
    let q = &pm / (&pm - 1.0);
    let mean = |s: Mp, r: &Mp| s.pow(&r.recip());
    let g_q = mean(integral(&w, |i| gv[i].pow(&q)), &q);
    let h: Vec<Mp> = gv.iter().map(|x| x.pow(&(&pm - 1.0).recip())).collect();
    let shifted = mean(integral(&w, |i| (&fv[i] + &h[i]).pow(&pm)), &pm);
    let base = mean(integral(&w, |i| h[i].pow(&pm)), &pm);
    let f_p = mean(integral(&w, |i| fv[i].pow(&pm)), &pm);
    Ok([fg, &g_q * (shifted - base), g_q * f_p])
}

/// A family `f_1, …, f_n` on one space, lifted to multiprecision.
#[derive(Debug, Clone)]
pub struct PreciseFamily {
    p: Mp,
    w: Vec<Mp>,
    fs: Vec<Vec<Mp>>,
}

impl PreciseFamily {
    pub fn new(fs: &[WeightedFunction], p: f64) -> Result<Self> {
        let first = fs
            .first()
            .ok_or_else(|| Error::precondition("a family needs at least one function"))?;
        for f in fs {
            first.check_same_space(f)?;
        }
        Ok(Self {
            p: Mp::from_f64(p),
            w: lift(first.weights()),
            fs: fs.iter().map(|f| lift(f.values())).collect(),
        })
    }

    fn atoms(&self) -> usize {
        self.w.len()
    }

    fn sum_at(&self, i: usize) -> Mp {
        self.fs.iter().fold(Mp::zero(), |acc, f| acc + &f[i])
    }

    /// `Σ_{i<j} f_i f_j` at one atom, from all pairs.
    fn cross_at(&self, k: usize) -> Mp {
        let mut acc = Mp::zero();
        for i in 0..self.fs.len() {
            for j in i + 1..self.fs.len() {
                acc = acc + &self.fs[i][k] * &self.fs[j][k];
            }
        }
        acc
    }

    /// `‖Σ f_j‖_p^p`.
    pub fn sum_power(&self) -> Mp {
        integral(&self.w, |i| self.sum_at(i).pow(&self.p))
    }

    /// `Σ ‖f_j‖_p^p`.
    pub fn sum_of_powers(&self) -> Mp {
        self.fs
            .iter()
            .fold(Mp::zero(), |acc, f| acc + integral(&self.w, |i| f[i].pow(&self.p)))
    }

    /// `‖Σ_{i<j} f_i f_j‖_{p/2}`.
    pub fn cross_norm(&self) -> Mp {
        let half = &self.p * 0.5;
        let crosses: Vec<Mp> = (0..self.atoms()).map(|k| self.cross_at(k)).collect();
        integral(&self.w, |k| crosses[k].pow(&half)).pow(&half.recip())
    }

    /// `Σ_{i<j} ‖f_i f_j‖_{p/2}^{p/2}`.
    pub fn cross_sum(&self) -> Mp {
        let half = &self.p * 0.5;
        let mut acc = Mp::zero();
        for i in 0..self.fs.len() {
            for j in i + 1..self.fs.len() {
                acc = acc + integral(&self.w, |k| (&self.fs[i][k] * &self.fs[j][k]).pow(&half));
            }
        }
        acc
    }

    /// `Σ‖f_j‖^p + C ‖Σf‖_p^{p-2} ‖Σ_{i<j} f_i f_j‖_{p/2}`.
    pub fn thm2_upper_rhs(&self, c: &Mp) -> Mp {
        let norm_pow = self.sum_power().pow(&((&self.p - 2.0) / &self.p));
        self.sum_of_powers() + c * norm_pow * self.cross_norm()
    }

    /// `Σ‖f_j‖^p + C' ‖Σ_{i<j} f_i f_j‖_{p/2} / ‖Σf‖_p^{2-p}`.
    pub fn thm2_lower_rhs(&self, c: &Mp) -> Mp {
        let norm_pow = self.sum_power().pow(&((Mp::from_f64(2.0) - &self.p) / &self.p));
        self.sum_of_powers() + c * self.cross_norm() / norm_pow
    }

    /// `Σ‖f_j‖^p + (2^p - 2) Σ_{i<j} ‖f_i f_j‖_{p/2}^{p/2}`.
    pub fn mooney_sum_rhs(&self) -> Mp {
        let c = Mp::from_f64(2.0).pow(&self.p) - 2.0;
        self.sum_of_powers() + c * self.cross_sum()
    }
}

/// `C_p = max{p, (2^p - 2)/2^{p-2}}` and `C'_p = (2^p - 2)/2^{p-2}` in the original form.
pub fn c_constants(p: f64) -> (Mp, Mp) {
    let pm = Mp::from_f64(p);
    let two = Mp::from_f64(2.0);
    let c_prime = (two.pow(&pm) - 2.0) / two.pow(&(&pm - 2.0));
    (pm.max(c_prime.clone()), c_prime)
}

/// `((Σa)^p, Σa^p + C (Σa)^{p-2} Σ_{i<j} a_i a_j)`.
pub fn scalar_sides(a: &[f64], p: f64, c: &Mp) -> (Mp, Mp) {
    let pm = Mp::from_f64(p);
    let av = lift(a);
    let total = av.iter().fold(Mp::zero(), |acc, x| acc + x);
    let powers = av.iter().fold(Mp::zero(), |acc, x| acc + x.pow(&pm));
    let mut cross = Mp::zero();
    for i in 0..av.len() {
        for j in i + 1..av.len() {
            cross = cross + &av[i] * &av[j];
        }
    }
    let lhs = total.pow(&pm);
    let rhs = powers + c * total.pow(&(&pm - 2.0)) * cross;
    (lhs, rhs)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn constants_round_trip() {
        assert!(close(Mp::from_f64(2.0).ln().to_f64(), std::f64::consts::LN_2, 1e-16));
        assert!(close(
            Mp::from_f64(2.0).sqrt().to_f64(),
            std::f64::consts::SQRT_2,
            1e-16
        ));
        assert!(close(Mp::one().exp().to_f64(), std::f64::consts::E, 1e-16));
        assert!(close(
            Mp::from_f64(2.0).powf(0.5).to_f64(),
            std::f64::consts::SQRT_2,
            1e-16
        ));
        assert_eq!(Mp::from_f64(-3.25).to_f64(), -3.25);
        assert_eq!(Mp::from_f64(1e-300).to_f64(), 1e-300);
        assert_eq!(Mp::zero().pow(&Mp::zero()).to_f64(), 1.0);
        assert_eq!(Mp::zero().powf(2.5).to_f64(), 0.0);
    }

    #[test]
    fn resolves_below_double_precision() {
        let eps = Mp::from_f64(1e-30);
        let x = (Mp::one() + &eps) - Mp::one();
        assert!(close(x.to_f64(), 1e-30, 1e-12));
        assert!(Mp::one() + &eps > Mp::one());
    }

    #[test]
    fn pair_values_match_the_fixtures() {
        let f = WeightedFunction::counting(vec![1.0, 1.0]).unwrap();
        let g = WeightedFunction::new(f.space(), vec![1.0, 0.0]).unwrap();
        let pair = PrecisePair::new(&f, &g, 4.0).unwrap();
        assert!(close(pair.ratio().to_f64(), 17.0 / 3.0, 1e-15));
        assert!(close(pair.gamma().to_f64(), 2.0 / 3.0, 1e-15));
        assert!(close(pair.j_lower(Orientation::Gf).to_f64(), 11.0 / 3.0, 1e-15));
        assert!(close(pair.carbery_factor().to_f64(), 6.2386131468221467357, 1e-15));
        assert!(close(pair.cfil_factor().to_f64(), 5.9938207967349954534, 1e-15));
        assert!(close(pair.mooney_factor().to_f64(), 5.9814239699997195952, 1e-15));
    }

    #[test]
    fn family_and_scalar_forms() {
        let f = WeightedFunction::counting(vec![1.0]).unwrap();
        let fam = PreciseFamily::new(&[f.clone(), f.clone(), f], 4.0).unwrap();
        let (c, _) = c_constants(4.0);
        assert!(close(fam.sum_power().to_f64(), 81.0, 1e-15));
        assert!(close(fam.thm2_upper_rhs(&c).to_f64(), 111.0, 1e-15));
        let (lhs, rhs) = scalar_sides(&[1.0, 1.0], 3.0, &c_constants(3.0).0);
        assert!(close(lhs.to_f64(), 8.0, 1e-15));
        assert!(close(rhs.to_f64(), 8.0, 1e-15));
    }
}
