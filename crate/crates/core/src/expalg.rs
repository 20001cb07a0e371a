//! Complex exponential polynomials: finite sums of `c * x^m * e^{k x}`.
//!
//! Values are kept in canonical form: like terms merged, zero coefficients
//! dropped, terms ordered by `(Re k, Im k, m)`. Zero is the empty list.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::C64;

/// Relative tolerance for identifying two rates.
pub const RATE_TOL: f64 = 1e-12;
/// Relative tolerance for treating a merged coefficient as zero.
pub const COEFF_TOL: f64 = 1e-12;
/// Largest power of `x` accepted in a term.
pub const MAX_POWER: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpAlgError {
    #[error("the zero function has no asymptotic exponent")]
    ZeroFunction,
}

/// One term `coeff * x^power * e^{rate x}`.
///
/// `tail` carries the rounding error of `coeff` (the exact coefficient is
/// `coeff + tail`); it is produced by the arithmetic, never by callers.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExpTerm {
    #[serde(rename = "c", with = "crate::expalg::cpair")]
    pub coeff: C64,
    #[serde(rename = "m")]
    pub power: u32,
    #[serde(rename = "k", with = "crate::expalg::cpair")]
    pub rate: C64,
    #[serde(rename = "t", with = "crate::expalg::cpair", default, skip_serializing_if = "is_zero_c")]
    pub tail: C64,
}

fn is_zero_c(z: &C64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

impl PartialEq for ExpTerm {
    fn eq(&self, o: &Self) -> bool {
        self.coeff == o.coeff && self.power == o.power && self.rate == o.rate
    }
}

impl ExpTerm {
    pub fn new(coeff: C64, power: u32, rate: C64) -> Self {
        ExpTerm { coeff, power, rate: snap_rate(rate), tail: C64::new(0.0, 0.0) }
    }

    fn with_tail(coeff: C64, tail: C64, power: u32, rate: C64) -> Self {
        ExpTerm { coeff, power, rate, tail }
    }

    pub fn eval(&self, x: f64) -> C64 {
        (self.coeff + self.tail) * x.powi(self.power as i32) * (self.rate * x).exp()
    }
}

/// Serde helper: complex numbers as `[re, im]`.
pub mod cpair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// `a b` as an unevaluated sum `hi + lo`, exact up to `O(eps^2)`.
fn two_prod(a: C64, b: C64) -> (C64, C64) {
    let prod = |x: f64, y: f64| {
        let p = x * y;
        (p, x.mul_add(y, -p))
    };
    let (rr, err) = prod(a.re, b.re);
    let (ii, eii) = prod(a.im, b.im);
    let (ri, eri) = prod(a.re, b.im);
    let (ir, eir) = prod(a.im, b.re);
    let (re, tre) = two_sum(rr, -ii);
    let (im, tim) = two_sum(ri, ir);
    (C64::new(re, im), C64::new(tre + err - eii, tim + eri + eir))
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Pushes `c (a + a_t) (b + b_t) x^m e^{kx}` to twice working precision.
fn push_product(v: &mut Vec<ExpTerm>, c: C64, (a, a_t): (C64, C64), (b, b_t): (C64, C64), m: u32, k: C64) {
    let (hi, mut lo) = two_prod(a, b);
    lo += a * b_t + a_t * b;
    if c == C64::new(1.0, 0.0) {
        v.push(ExpTerm::with_tail(hi, lo, m, k));
    } else if c == C64::new(-1.0, 0.0) {
        v.push(ExpTerm::with_tail(-hi, -lo, m, k));
    } else {
        let (h2, l2) = two_prod(c, hi);
        v.push(ExpTerm::with_tail(h2, l2 + c * lo, m, k));
    }
}

fn parts(t: &ExpTerm) -> (C64, C64) {
    (t.coeff, t.tail)
}

fn exact(z: C64) -> (C64, C64) {
    (z, C64::new(0.0, 0.0))
}

/// Compensated (Neumaier) complex accumulator.
#[derive(Clone, Copy)]
struct Comp {
    sum: C64,
    err: C64,
}

impl Comp {
    fn new(z: C64) -> Self {
        Comp { sum: z, err: C64::new(0.0, 0.0) }
    }

    fn add(&mut self, z: C64) {
        let step = |s: f64, x: f64| {
            let t = s + x;
            let e = if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
            (t, e)
        };
        let (re, ere) = step(self.sum.re, z.re);
        let (im, eim) = step(self.sum.im, z.im);
        self.sum = C64::new(re, im);
        self.err += C64::new(ere, eim);
    }

    /// The sum as `(hi, lo)`.
    fn value(&self) -> (C64, C64) {
        let (re, lre) = two_sum(self.sum.re, self.err.re);
        let (im, lim) = two_sum(self.sum.im, self.err.im);
        (C64::new(re, im), C64::new(lre, lim))
    }
}

/// Rates live on the grid `2^-46 Z[i]`, so sums of rates below `2^7` in
/// magnitude are exact and a rate reached by different routes is one value.
pub fn snap_rate(k: C64) -> C64 {
    const G: f64 = (1u64 << 46) as f64;
    let snap = |x: f64| if x.abs() < 128.0 { (x * G).round() / G } else { x };
    C64::new(snap(k.re), snap(k.im))
}

/// Rates `a`, `b` are the same rate under the merge rule.
pub fn rates_equal(a: C64, b: C64) -> bool {
    (a - b).norm() <= RATE_TOL * 1f64.max(a.norm()).max(b.norm())
}

fn cmp_rate(a: C64, b: C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn cmp_term(a: &ExpTerm, b: &ExpTerm) -> Ordering {
    cmp_rate(a.rate, b.rate)
        .then(a.power.cmp(&b.power))
        .then(a.coeff.re.total_cmp(&b.coeff.re))
        .then(a.coeff.im.total_cmp(&b.coeff.im))
}

/// Dominant exponential behaviour in one direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asymptotic {
    pub re_rate: f64,
    pub power: u32,
    pub oscillatory: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    PlusInf,
    MinusInf,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<ExpTerm>", into = "Vec<ExpTerm>")]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::term(c, 0, C64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    /// `c * x^m * e^{k x}`
    pub fn term(c: C64, m: u32, k: C64) -> Self {
        Self::canonicalize(vec![ExpTerm::new(c, m, k)])
    }

    /// `c * e^{k x}`
    pub fn exp(c: C64, k: C64) -> Self {
        Self::term(c, 0, k)
    }

    /// The identity function `x`.
    pub fn x() -> Self {
        Self::term(C64::new(1.0, 0.0), 1, C64::new(0.0, 0.0))
    }

    /// Builds the canonical form of an arbitrary term list.
    pub fn canonicalize(mut terms: Vec<ExpTerm>) -> Self {
        terms.retain(|t| !is_zero_c(&t.coeff) || !is_zero_c(&t.tail));
        for t in terms.iter_mut() {
            t.rate = snap_rate(t.rate);
        }
        if terms.is_empty() {
            return Self::zero();
        }
        for t in &terms {
            assert!(t.power <= MAX_POWER, "power {} exceeds the cap {MAX_POWER}", t.power);
        }
        terms.sort_by(cmp_term);

        let max_rate = terms.iter().map(|t| t.rate.norm()).fold(1.0, f64::max);
        let scan = RATE_TOL * max_rate;
        // Cluster rates; representatives appear in ascending (Re, Im) order.
        let mut reps: Vec<C64> = Vec::new();
        let mut cluster = Vec::with_capacity(terms.len());
        for t in &terms {
            let mut found = None;
            for (i, r) in reps.iter().enumerate().rev() {
                if t.rate.re - r.re > scan {
                    break;
                }
                if rates_equal(*r, t.rate) {
                    found = Some(i);
                    break;
                }
            }
            let id = match found {
                Some(i) => i,
                None => {
                    reps.push(t.rate);
                    reps.len() - 1
                }
            };
            cluster.push(id);
        }

        let mut keyed: Vec<(usize, u32, Comp, f64)> = Vec::new();
        let mut order: Vec<usize> = (0..terms.len()).collect();
        order.sort_by(|&a, &b| cluster[a].cmp(&cluster[b]).then(terms[a].power.cmp(&terms[b].power)));
        for i in order {
            let t = &terms[i];
            match keyed.last_mut() {
                Some((c, m, sum, big)) if *c == cluster[i] && *m == t.power => {
                    sum.add(t.coeff);
                    sum.add(t.tail);
                    *big = big.max(t.coeff.norm());
                }
                _ => {
                    let mut sum = Comp::new(t.coeff);
                    sum.add(t.tail);
                    keyed.push((cluster[i], t.power, sum, t.coeff.norm()))
                }
            }
        }
        let mut out: Vec<ExpTerm> = keyed
            .into_iter()
            .map(|(c, m, sum, big)| (c, m, sum.value(), big))
            .filter(|(_, _, (hi, _), big)| hi.norm() > COEFF_TOL * big)
            .map(|(c, m, (hi, lo), _)| ExpTerm::with_tail(hi, lo, m, reps[c]))
            .collect();
        out.sort_by(cmp_term);
        ExpPoly { terms: out }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<ExpTerm> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Returns the value if the function is a constant.
    pub fn as_constant(&self) -> Option<C64> {
        match self.terms.as_slice() {
            [] => Some(C64::new(0.0, 0.0)),
            [t] if t.power == 0 && rates_equal(t.rate, C64::new(0.0, 0.0)) => Some(t.coeff),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn neg(&self) -> Self {
        ExpPoly { terms: self.terms.iter().map(|t| ExpTerm::with_tail(-t.coeff, -t.tail, t.power, t.rate)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut v = self.terms.clone();
        v.extend_from_slice(&other.terms);
        Self::canonicalize(v)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut v = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            push_product(&mut v, C64::new(1.0, 0.0), parts(t), exact(c), t.power, t.rate);
        }
        Self::canonicalize(v)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut v = Vec::with_capacity(2 * self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                push_product(&mut v, C64::new(1.0, 0.0), parts(a), parts(b), a.power + b.power, a.rate + b.rate);
            }
        }
        Self::canonicalize(v)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `sum c_i a_i b_i` with every raw product term merged in one pass, so
    /// the zero test sees the magnitudes before any cancellation.
    pub fn sum_of_products(items: &[(C64, &ExpPoly, &ExpPoly)]) -> Self {
        let mut v = Vec::new();
        for (c, a, b) in items {
            for ta in &a.terms {
                for tb in &b.terms {
                    push_product(&mut v, *c, parts(ta), parts(tb), ta.power + tb.power, ta.rate + tb.rate);
                }
            }
        }
        Self::canonicalize(v)
    }

    /// Sum of a list of polynomials, canonicalized once.
    pub fn sum<'a, I: IntoIterator<Item = &'a ExpPoly>>(items: I) -> Self {
        let mut v = Vec::new();
        for p in items {
            v.extend_from_slice(&p.terms);
        }
        Self::canonicalize(v)
    }

    pub fn differentiate(&self) -> Self {
        let mut v = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            let one = C64::new(1.0, 0.0);
            if t.power > 0 {
                push_product(&mut v, one, parts(t), exact(C64::new(t.power as f64, 0.0)), t.power - 1, t.rate);
            }
            push_product(&mut v, one, parts(t), exact(t.rate), t.power, t.rate);
        }
        Self::canonicalize(v)
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.differentiate();
        }
        p
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Sum of `|term(x)|`, the natural scale for judging `|p(x)|` small.
    pub fn magnitude_scale(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x).norm()).sum()
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Largest power of `x` present (0 for the zero function).
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.power).max().unwrap_or(0)
    }

    /// Dominant growth at `+inf` or `-inf`.
    pub fn asymptotic_exponent(&self, dir: Direction) -> Result<Asymptotic, ExpAlgError> {
        if self.is_zero() {
            return Err(ExpAlgError::ZeroFunction);
        }
        let key = |t: &ExpTerm| match dir {
            Direction::PlusInf => t.rate.re,
            Direction::MinusInf => -t.rate.re,
        };
        let best = self.terms.iter().map(key).fold(f64::NEG_INFINITY, f64::max);
        let tol = RATE_TOL * self.terms.iter().map(|t| t.rate.norm()).fold(1.0, f64::max);
        let top: Vec<&ExpTerm> = self.terms.iter().filter(|t| best - key(t) <= tol).collect();
        let power = top.iter().map(|t| t.power).max().unwrap_or(0);
        let lead: Vec<&ExpTerm> = top.into_iter().filter(|t| t.power == power).collect();
        let first = lead[0].rate.im;
        let oscillatory = lead.iter().any(|t| (t.rate.im - first).abs() > tol);
        let re_rate = match dir {
            Direction::PlusInf => best,
            Direction::MinusInf => -best,
        };
        Ok(Asymptotic { re_rate, power, oscillatory })
    }

    /// Structural equality under the merge tolerances.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl From<Vec<ExpTerm>> for ExpPoly {
    fn from(terms: Vec<ExpTerm>) -> Self {
        ExpPoly::canonicalize(terms)
    }
}

impl From<ExpPoly> for Vec<ExpTerm> {
    fn from(p: ExpPoly) -> Self {
        p.terms
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)", t.coeff.re, t.coeff.im)?;
            if t.power > 0 {
                write!(f, "*x^{}", t.power)?;
            }
            if t.rate.norm() > 0.0 {
                write!(f, "*e^(({:.6}{:+.6}i)x)", t.rate.re, t.rate.im)?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        ExpPoly::add(self, rhs)
    }
}

impl<'a> Sub<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        ExpPoly::sub(self, rhs)
    }
}

impl<'a> Mul<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        ExpPoly::mul(self, rhs)
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        ExpPoly::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn exact_cancellation() {
        let k = C64::new(0.3, 0.7);
        let p = ExpPoly::canonicalize(vec![ExpTerm::new(c(1.0), 0, k), ExpTerm::new(c(-1.0), 0, k)]);
        assert!(p.is_zero());
    }

    #[test]
    fn like_terms_merge() {
        let k = C64::new(0.3, 0.7);
        let p = ExpPoly::canonicalize(vec![ExpTerm::new(c(1.0), 0, k), ExpTerm::new(c(1.0), 0, k)]);
        assert_eq!(p.terms(), &[ExpTerm::new(c(2.0), 0, k)]);
    }

    #[test]
    fn cosh_product_expansion_keeps_four_terms() {
        let (k1, k2) = (c(1.0), c(2.5));
        let ch = |k: C64| ExpPoly::exp(c(0.5), k).add(&ExpPoly::exp(c(0.5), -k));
        let p = ch(k1).mul(&ch(k2));
        assert_eq!(p.len(), 4);
        for t in p.terms() {
            assert!((t.coeff - c(0.25)).norm() < 1e-15);
        }
        let x = 0.37f64;
        assert!((p.eval(x) - c(x.cosh() * (2.5 * x).cosh())).norm() < 1e-14);
    }

    #[test]
    fn rates_sum_to_zero() {
        let k = C64::new(1.3, -0.2);
        let p = ExpPoly::exp(c(1.0), k).mul(&ExpPoly::exp(c(1.0), -k));
        assert_eq!(p, ExpPoly::one());
    }

    #[test]
    fn near_equal_rates_merge() {
        let a = C64::new(0.1, 0.2) + C64::new(0.7, 0.3);
        let b = C64::new(0.8, 0.5);
        let p = ExpPoly::exp(c(1.0), a).sub(&ExpPoly::exp(c(1.0), b));
        assert!(p.is_zero());
    }

    #[test]
    fn derivative_rules() {
        let k = C64::new(0.4, 1.1);
        assert!(ExpPoly::exp(c(1.0), k).differentiate().sub(&ExpPoly::exp(k, k)).is_zero());
        assert_eq!(ExpPoly::term(c(1.0), 2, c(0.0)).differentiate(), ExpPoly::term(c(2.0), 1, c(0.0)));
    }

    #[test]
    fn associated_mode_chain() {
        // (-d^2 + k^2)(-x e^{kx}/(2k)) = e^{kx}
        let k = C64::new(0.9, 0.4);
        let psi = ExpPoly::term(-1.0 / (2.0 * k), 1, k);
        let d1 = psi.differentiate();
        assert!(d1.approx_eq(&ExpPoly::exp(-1.0 / (2.0 * k), k).add(&ExpPoly::term(c(-0.5), 1, k))));
        let lhs = d1.differentiate().neg().add(&psi.scale(k * k));
        assert!(lhs.approx_eq(&ExpPoly::exp(c(1.0), k)));
    }

    #[test]
    fn asymptotics() {
        let k = c(0.8);
        let p = ExpPoly::exp(c(1.0), k).add(&ExpPoly::exp(c(1.0), -k));
        let a = p.asymptotic_exponent(Direction::PlusInf).unwrap();
        assert_eq!((a.re_rate, a.power, a.oscillatory), (snap_rate(k).re, 0, false));
        let b = p.asymptotic_exponent(Direction::MinusInf).unwrap();
        assert_eq!((b.re_rate, b.power, b.oscillatory), (-snap_rate(k).re, 0, false));

        let wave = ExpPoly::exp(c(1.0), C64::new(0.0, 1.7));
        for d in [Direction::PlusInf, Direction::MinusInf] {
            let a = wave.asymptotic_exponent(d).unwrap();
            assert_eq!((a.re_rate, a.power, a.oscillatory), (0.0, 0, false));
        }
        let cos = ExpPoly::exp(c(1.0), C64::new(0.0, 2.0)).add(&ExpPoly::exp(c(1.0), C64::new(0.0, -2.0)));
        assert!(cos.asymptotic_exponent(Direction::PlusInf).unwrap().oscillatory);
        assert_eq!(ExpPoly::zero().asymptotic_exponent(Direction::PlusInf), Err(ExpAlgError::ZeroFunction));
    }

    #[test]
    fn serialized_term_shape() {
        let p = ExpPoly::term(C64::new(1.5, -2.0), 1, C64::new(0.0, 3.0));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"[{"c":[1.5,-2.0],"m":1,"k":[0.0,3.0]}]"#);
        let back: ExpPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    #[should_panic(expected = "exceeds the cap")]
    fn power_cap() {
        ExpPoly::term(c(1.0), 40, c(0.0)).mul(&ExpPoly::term(c(1.0), 40, c(0.0)));
    }
}
