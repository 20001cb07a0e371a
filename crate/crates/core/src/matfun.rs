//! Matrix and vector functions over [`ExpPoly`] and their shared-denominator
//! fractions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expalg::ExpPoly;
use crate::linalg::CMat;
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatFunError {
    #[error("matrix function is singular (determinant is identically zero)")]
    SingularMatrixFunction,
}

/// Square `n x n` matrix of exponential polynomials, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatFun {
    pub n: usize,
    pub entries: Vec<ExpPoly>,
}

/// Column vector of exponential polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VecFun {
    pub entries: Vec<ExpPoly>,
}

/// `num(x) / den(x)` entrywise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatMatFun {
    pub num: MatFun,
    pub den: ExpPoly,
}

/// `num(x) / den(x)` componentwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatVecFun {
    pub num: VecFun,
    pub den: ExpPoly,
}

impl MatFun {
    pub fn zero(n: usize) -> Self {
        MatFun { n, entries: vec![ExpPoly::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.entries[i * n + i] = ExpPoly::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> ExpPoly) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        MatFun { n, entries }
    }

    pub fn from_const(c: &CMat) -> Self {
        Self::from_fn(c.nrows(), |i, j| ExpPoly::constant(c[(i, j)]))
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[VecFun]) -> Self {
        let n = cols.len();
        Self::from_fn(n, |i, j| cols[j].entries[i].clone())
    }

    pub fn get(&self, i: usize, j: usize) -> &ExpPoly {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: ExpPoly) {
        self.entries[i * self.n + j] = p;
    }

    pub fn column(&self, j: usize) -> VecFun {
        VecFun { entries: (0..self.n).map(|i| self.get(i, j).clone()).collect() }
    }

    pub fn with_column(&self, j: usize, v: &VecFun) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.set(i, j, v.entries[i].clone());
        }
        m
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(ExpPoly::is_zero)
    }

    /// Constant value if every entry is constant.
    pub fn as_const(&self) -> Option<CMat> {
        let vals: Option<Vec<C64>> = self.entries.iter().map(ExpPoly::as_constant).collect();
        vals.map(|v| CMat::from_row_slice(self.n, self.n, &v))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).add(o.get(i, j)))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).sub(o.get(i, j)))
    }

    pub fn neg(&self) -> Self {
        MatFun { n: self.n, entries: self.entries.iter().map(ExpPoly::neg).collect() }
    }

    pub fn scale(&self, c: C64) -> Self {
        MatFun { n: self.n, entries: self.entries.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn scale_poly(&self, p: &ExpPoly) -> Self {
        MatFun { n: self.n, entries: self.entries.iter().map(|e| e.mul(p)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| {
            let prods: Vec<_> = (0..n).map(|l| (C64::new(1.0, 0.0), self.get(i, l), o.get(l, j))).collect();
            ExpPoly::sum_of_products(&prods)
        })
    }

    pub fn mul_vec(&self, v: &VecFun) -> VecFun {
        let n = self.n;
        VecFun {
            entries: (0..n)
                .map(|i| {
                    let prods: Vec<_> = (0..n).map(|l| (C64::new(1.0, 0.0), self.get(i, l), &v.entries[l])).collect();
                    ExpPoly::sum_of_products(&prods)
                })
                .collect(),
        }
    }

    pub fn differentiate(&self) -> Self {
        MatFun { n: self.n, entries: self.entries.iter().map(ExpPoly::differentiate).collect() }
    }

    pub fn eval(&self, x: f64) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| self.get(i, j).eval(x))
    }

    /// Determinant by cofactor expansion along successive rows, sharing minors.
    pub fn det(&self) -> ExpPoly {
        let n = self.n;
        if n == 0 {
            return ExpPoly::one();
        }
        let mut memo: HashMap<u32, ExpPoly> = HashMap::new();
        self.minor_det((1u32 << n) - 1, &mut memo)
    }

    fn minor_det(&self, cols: u32, memo: &mut HashMap<u32, ExpPoly>) -> ExpPoly {
        if cols == 0 {
            return ExpPoly::one();
        }
        if let Some(p) = memo.get(&cols) {
            return p.clone();
        }
        let row = self.n - cols.count_ones() as usize;
        let mut subs = Vec::new();
        let mut sign = 1.0;
        for j in 0..self.n {
            if cols & (1 << j) == 0 {
                continue;
            }
            if !self.get(row, j).is_zero() {
                subs.push((C64::new(sign, 0.0), j, self.minor_det(cols & !(1 << j), memo)));
            }
            sign = -sign;
        }
        let parts: Vec<_> = subs.iter().map(|(c, j, sub)| (*c, self.get(row, *j), sub)).collect();
        let d = ExpPoly::sum_of_products(&parts);
        memo.insert(cols, d.clone());
        d
    }

    /// Matrix with row `r` and column `c` removed.
    pub fn minor(&self, r: usize, c: usize) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != r) {
            for j in (0..n).filter(|&j| j != c) {
                entries.push(self.get(i, j).clone());
            }
        }
        MatFun { n: n - 1, entries }
    }

    /// Classical adjugate: `adj[i][j] = (-1)^{i+j} det(minor(j, i))`.
    pub fn adjugate(&self) -> Self {
        let n = self.n;
        if n == 1 {
            return Self::identity(1);
        }
        Self::from_fn(n, |i, j| {
            let d = self.minor(j, i).det();
            if (i + j) % 2 == 0 {
                d
            } else {
                d.neg()
            }
        })
    }

    pub fn adjugate_inverse(&self) -> Result<RatMatFun, MatFunError> {
        let det = self.det();
        if det.is_zero() {
            return Err(MatFunError::SingularMatrixFunction);
        }
        Ok(RatMatFun { num: self.adjugate(), den: det })
    }
}

impl VecFun {
    pub fn new(entries: Vec<ExpPoly>) -> Self {
        VecFun { entries }
    }

    pub fn zero(n: usize) -> Self {
        VecFun { entries: vec![ExpPoly::zero(); n] }
    }

    /// `p * e_j` in `n` channels.
    pub fn unit(n: usize, j: usize, p: ExpPoly) -> Self {
        let mut v = Self::zero(n);
        v.entries[j] = p;
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(ExpPoly::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        VecFun { entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        VecFun { entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn neg(&self) -> Self {
        VecFun { entries: self.entries.iter().map(ExpPoly::neg).collect() }
    }

    pub fn scale(&self, c: C64) -> Self {
        VecFun { entries: self.entries.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn scale_poly(&self, p: &ExpPoly) -> Self {
        VecFun { entries: self.entries.iter().map(|e| e.mul(p)).collect() }
    }

    pub fn differentiate(&self) -> Self {
        VecFun { entries: self.entries.iter().map(ExpPoly::differentiate).collect() }
    }

    pub fn nth_derivative(&self, k: usize) -> Self {
        VecFun { entries: self.entries.iter().map(|p| p.nth_derivative(k)).collect() }
    }

    pub fn eval(&self, x: f64) -> Vec<C64> {
        self.entries.iter().map(|p| p.eval(x)).collect()
    }
}

fn const_den(d: &ExpPoly) -> Option<C64> {
    d.as_constant().filter(|c| c.norm() > 0.0)
}

/// `a p + c b q`, merged in one pass.
fn cross(a: &ExpPoly, p: &ExpPoly, b: &ExpPoly, q: &ExpPoly, c: C64) -> ExpPoly {
    ExpPoly::sum_of_products(&[(C64::new(1.0, 0.0), a, p), (c, b, q)])
}

fn same_den(a: &ExpPoly, b: &ExpPoly) -> bool {
    a == b || a.approx_eq(b)
}

impl RatMatFun {
    pub fn new(num: MatFun, den: ExpPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        RatMatFun { num, den }
    }

    pub fn from_exp(num: MatFun) -> Self {
        RatMatFun { num, den: ExpPoly::one() }
    }

    pub fn from_const(c: &CMat) -> Self {
        Self::from_exp(MatFun::from_const(c))
    }

    pub fn zero(n: usize) -> Self {
        Self::from_exp(MatFun::zero(n))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_exp(MatFun::identity(n))
    }

    pub fn n(&self) -> usize {
        self.num.n
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Constant value when the fraction reduces to a constant matrix.
    pub fn as_const(&self) -> Option<CMat> {
        let d = const_den(&self.den)?;
        self.num.as_const().map(|m| m / d)
    }

    /// Normalizes a constant denominator to one.
    fn tidy(mut self) -> Self {
        if let Some(d) = const_den(&self.den) {
            if d != C64::new(1.0, 0.0) {
                self.num = self.num.scale(1.0 / d);
                self.den = ExpPoly::one();
            }
        }
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        if same_den(&self.den, &o.den) {
            return RatMatFun { num: self.num.add(&o.num), den: self.den.clone() };
        }
        if let Some(c) = const_den(&o.den) {
            let num = self.num.add(&o.num.scale_poly(&self.den).scale(1.0 / c));
            return RatMatFun { num, den: self.den.clone() };
        }
        if let Some(c) = const_den(&self.den) {
            let num = self.num.scale_poly(&o.den).scale(1.0 / c).add(&o.num);
            return RatMatFun { num, den: o.den.clone() };
        }
        let num = MatFun {
            n: self.num.n,
            entries: self
                .num
                .entries
                .iter()
                .zip(&o.num.entries)
                .map(|(a, b)| cross(a, &o.den, b, &self.den, C64::new(1.0, 0.0)))
                .collect(),
        };
        RatMatFun { num, den: self.den.mul(&o.den) }
    }

    pub fn neg(&self) -> Self {
        RatMatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: C64) -> Self {
        RatMatFun { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        RatMatFun { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }.tidy()
    }

    pub fn mul_const_left(&self, c: &CMat) -> Self {
        RatMatFun { num: MatFun::from_const(c).mul(&self.num), den: self.den.clone() }
    }

    pub fn mul_const_right(&self, c: &CMat) -> Self {
        RatMatFun { num: self.num.mul(&MatFun::from_const(c)), den: self.den.clone() }
    }

    pub fn mul_vec(&self, v: &RatVecFun) -> RatVecFun {
        RatVecFun { num: self.num.mul_vec(&v.num), den: self.den.mul(&v.den) }.tidy()
    }

    pub fn differentiate(&self) -> Self {
        if const_den(&self.den).is_some() {
            return RatMatFun { num: self.num.differentiate(), den: self.den.clone() };
        }
        let dd = self.den.differentiate();
        let num = MatFun {
            n: self.num.n,
            entries: self
                .num
                .entries
                .iter()
                .map(|a| cross(&a.differentiate(), &self.den, a, &dd, C64::new(-1.0, 0.0)))
                .collect(),
        };
        RatMatFun { num, den: self.den.mul(&self.den) }
    }

    /// Derivatives `0..=upto`, the `j`-th over `den^(j+1)`.
    pub fn derivatives(&self, upto: usize) -> Vec<RatMatFun> {
        let mut out = vec![self.clone()];
        if const_den(&self.den).is_some() {
            for j in 1..=upto {
                out.push(RatMatFun { num: out[j - 1].num.differentiate(), den: self.den.clone() });
            }
            return out;
        }
        let dd = self.den.differentiate();
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        for p in 1..=upto {
            let c = C64::new(-(p as f64), 0.0);
            num = MatFun {
                n: num.n,
                entries: num.entries.iter().map(|a| cross(&a.differentiate(), &self.den, a, &dd, c)).collect(),
            };
            den = den.mul(&self.den);
            out.push(RatMatFun { num: num.clone(), den: den.clone() });
        }
        out
    }

    /// Commutator `[A, B] = AB - BA`.
    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn inverse(&self) -> Result<Self, MatFunError> {
        let inv = self.num.adjugate_inverse()?;
        Ok(RatMatFun { num: inv.num.scale_poly(&self.den), den: inv.den }.tidy())
    }

    pub fn eval(&self, x: f64) -> CMat {
        self.num.eval(x) / self.den.eval(x)
    }

    pub fn transpose(&self) -> Self {
        RatMatFun { num: self.num.transpose(), den: self.den.clone() }
    }
}

impl RatVecFun {
    pub fn new(num: VecFun, den: ExpPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        RatVecFun { num, den }
    }

    pub fn from_exp(num: VecFun) -> Self {
        RatVecFun { num, den: ExpPoly::one() }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_exp(VecFun::zero(n))
    }

    pub fn len(&self) -> usize {
        self.num.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn tidy(mut self) -> Self {
        if let Some(d) = const_den(&self.den) {
            if d != C64::new(1.0, 0.0) {
                self.num = self.num.scale(1.0 / d);
                self.den = ExpPoly::one();
            }
        }
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        if same_den(&self.den, &o.den) {
            return RatVecFun { num: self.num.add(&o.num), den: self.den.clone() };
        }
        if let Some(c) = const_den(&o.den) {
            let num = self.num.add(&o.num.scale_poly(&self.den).scale(1.0 / c));
            return RatVecFun { num, den: self.den.clone() };
        }
        if let Some(c) = const_den(&self.den) {
            let num = self.num.scale_poly(&o.den).scale(1.0 / c).add(&o.num);
            return RatVecFun { num, den: o.den.clone() };
        }
        let num = VecFun::new(
            self.num
                .entries
                .iter()
                .zip(&o.num.entries)
                .map(|(a, b)| cross(a, &o.den, b, &self.den, C64::new(1.0, 0.0)))
                .collect(),
        );
        RatVecFun { num, den: self.den.mul(&o.den) }
    }

    pub fn neg(&self) -> Self {
        RatVecFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: C64) -> Self {
        RatVecFun { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul_const(&self, c: &CMat) -> Self {
        RatVecFun { num: MatFun::from_const(c).mul_vec(&self.num), den: self.den.clone() }
    }

    pub fn differentiate(&self) -> Self {
        if const_den(&self.den).is_some() {
            return RatVecFun { num: self.num.differentiate(), den: self.den.clone() };
        }
        let dd = self.den.differentiate();
        let num = VecFun::new(
            self.num
                .entries
                .iter()
                .map(|a| cross(&a.differentiate(), &self.den, a, &dd, C64::new(-1.0, 0.0)))
                .collect(),
        );
        RatVecFun { num, den: self.den.mul(&self.den) }
    }

    /// Derivatives `0..=upto`, the `j`-th kept over `den^(j+1)` rather than
    /// the doubling denominators of repeated quotient rules.
    pub fn derivatives(&self, upto: usize) -> Vec<RatVecFun> {
        let mut out = vec![self.clone()];
        if const_den(&self.den).is_some() {
            for j in 1..=upto {
                out.push(RatVecFun { num: out[j - 1].num.differentiate(), den: self.den.clone() });
            }
            return out;
        }
        let dd = self.den.differentiate();
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        for p in 1..=upto {
            // (N / D^p)' = (N' D - p N D') / D^(p+1)
            let c = C64::new(-(p as f64), 0.0);
            num = VecFun::new(num.entries.iter().map(|a| cross(&a.differentiate(), &self.den, a, &dd, c)).collect());
            den = den.mul(&self.den);
            out.push(RatVecFun { num: num.clone(), den: den.clone() });
        }
        out
    }

    pub fn eval(&self, x: f64) -> Vec<C64> {
        let d = self.den.eval(x);
        self.num.eval(x).into_iter().map(|z| z / d).collect()
    }
}

/// Linear combination `sum c_i v_i` of rational vectors.
pub fn rat_combination(items: &[(C64, &RatVecFun)]) -> RatVecFun {
    let n = items.first().map_or(0, |(_, v)| v.len());
    items.iter().fold(RatVecFun::zero(n), |acc, (c, v)| acc.add(&v.scale(*c)))
}

/// Rewrites the vectors over one shared denominator.
pub fn common_denominator(vs: &[RatVecFun]) -> (Vec<VecFun>, ExpPoly) {
    if let Some(first) = vs.first() {
        if vs.iter().all(|v| same_den(&v.den, &first.den)) {
            return (vs.iter().map(|v| v.num.clone()).collect(), first.den.clone());
        }
    }
    let den = vs.iter().fold(ExpPoly::one(), |acc, v| acc.mul(&v.den));
    let nums = vs
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let other =
                vs.iter().enumerate().filter(|(j, _)| *j != i).fold(ExpPoly::one(), |acc, (_, w)| acc.mul(&w.den));
            v.num.scale_poly(&other)
        })
        .collect();
    (nums, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn det_of_scaled_identity() {
        let k = C64::new(0.7, 0.2);
        let m = MatFun::identity(2).scale_poly(&ExpPoly::exp(r(1.0), k));
        assert_eq!(m.det(), ExpPoly::exp(r(1.0), 2.0 * k));
        let inv = m.adjugate_inverse().unwrap();
        assert_eq!(inv.den, ExpPoly::exp(r(1.0), 2.0 * k));
        assert_eq!(inv.num, m);
    }

    #[test]
    fn singular_function_matrix() {
        let e = ExpPoly::exp(r(1.0), r(1.0));
        let m = MatFun::from_fn(2, |_, _| e.clone());
        assert_eq!(m.adjugate_inverse(), Err(MatFunError::SingularMatrixFunction));
    }

    #[test]
    fn tanh_derivative() {
        // d/dx (sh kx / ch kx) = k / ch^2 kx
        let k = 1.3;
        let sh = ExpPoly::exp(r(0.5), r(k)).sub(&ExpPoly::exp(r(0.5), r(-k)));
        let ch = ExpPoly::exp(r(0.5), r(k)).add(&ExpPoly::exp(r(0.5), r(-k)));
        let th = RatMatFun::new(MatFun { n: 1, entries: vec![sh] }, ch.clone());
        let d = th.differentiate();
        let expect = RatMatFun::new(MatFun { n: 1, entries: vec![ExpPoly::constant(r(k))] }, ch.mul(&ch));
        assert!(d.sub(&expect).is_zero());
    }

    #[test]
    fn rational_self_difference() {
        let p = MatFun::from_fn(2, |i, j| ExpPoly::term(r((i + 2 * j) as f64 + 1.0), 1, r(0.5)));
        let d = ExpPoly::exp(r(1.0), r(1.0)).add(&ExpPoly::one());
        let a = RatMatFun::new(p, d);
        assert!(a.sub(&a).is_zero());
        assert!(!RatMatFun::identity(2).is_zero());
    }
}
