//! Hamiltonians `H = -I d^2 + V(x)`, transformation sets and intertwining
//! operators `Q = sum_j X_j(x) d^j`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expalg::{Asymptotic, Direction, ExpPoly};
use crate::linalg::{self, CMat};
use crate::matfun::{MatFun, RatMatFun, RatVecFun, VecFun};
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("chain constraint violated at entry {0}: sigma = 1 requires equal consecutive eigenvalues")]
    ChainConstraintViolated(usize),
    #[error("Wronskian vanishes identically")]
    DegenerateWronskian,
    #[error("function is identically zero")]
    ZeroFunction,
    #[error("leading coefficient is singular")]
    SingularLeading,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    pub n: usize,
    pub potential: RatMatFun,
}

impl Hamiltonian {
    pub fn new(potential: RatMatFun) -> Self {
        Hamiltonian { n: potential.n(), potential }
    }

    /// `-I d^2` in `n` channels.
    pub fn free(n: usize) -> Self {
        Self::new(RatMatFun::zero(n))
    }

    /// `-v'' + V v`
    pub fn apply(&self, v: &RatVecFun) -> Result<RatVecFun, ModelError> {
        check_dim(self.n, v.len())?;
        let d = v.derivatives(2);
        Ok(self.potential.mul_vec(v).sub(&d[2]))
    }

    /// `(H - lambda) v`
    pub fn apply_shifted(&self, lambda: C64, v: &RatVecFun) -> Result<RatVecFun, ModelError> {
        Ok(self.apply(v)?.sub(&v.scale(lambda)))
    }
}

pub fn apply_hamiltonian(h: &Hamiltonian, v: &RatVecFun) -> Result<RatVecFun, ModelError> {
    h.apply(v)
}

fn check_dim(expected: usize, got: usize) -> Result<(), ModelError> {
    if expected == got {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch { expected, got })
    }
}

/// `H Phi_l = lambda_l Phi_l + sigma_l Phi_{l+1}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub phi: VecFun,
    #[serde(with = "crate::expalg::cpair")]
    pub lambda: C64,
    pub sigma: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformationSet {
    pub n: usize,
    pub entries: Vec<ChainEntry>,
}

impl TransformationSet {
    pub fn new(n: usize, entries: Vec<ChainEntry>) -> Result<Self, ModelError> {
        for e in &entries {
            check_dim(n, e.phi.len())?;
            if e.phi.is_zero() {
                return Err(ModelError::ZeroFunction);
            }
        }
        let s = TransformationSet { n, entries };
        s.check_chain()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn check_chain(&self) -> Result<(), ModelError> {
        for l in 0..self.entries.len().saturating_sub(1) {
            let (a, b) = (&self.entries[l], &self.entries[l + 1]);
            if a.sigma > 1 {
                return Err(ModelError::ChainConstraintViolated(l));
            }
            if a.sigma == 1 && (a.lambda - b.lambda).norm() > 1e-12 * 1f64.max(a.lambda.norm()) {
                return Err(ModelError::ChainConstraintViolated(l));
            }
        }
        Ok(())
    }

    /// `sigma_l`, with the last entry closing against the zero function.
    pub fn sigma(&self, l: usize) -> u8 {
        if l + 1 < self.entries.len() {
            self.entries[l].sigma
        } else {
            0
        }
    }

    pub fn phis(&self) -> Vec<VecFun> {
        self.entries.iter().map(|e| e.phi.clone()).collect()
    }

    /// The matrix with columns `Phi_l`.
    pub fn phi_matrix(&self) -> MatFun {
        MatFun::from_columns(&self.phis())
    }
}

/// Constant matrix of `H` restricted to the span of the set:
/// `T[l][l] = lambda_l`, `T[l][l+1] = sigma_l`, so `H Phi = Phi T^t`.
pub fn t_matrix(set: &TransformationSet) -> Result<CMat, ModelError> {
    set.check_chain()?;
    let d = set.len();
    let mut t = CMat::zeros(d, d);
    for l in 0..d {
        t[(l, l)] = set.entries[l].lambda;
        if set.sigma(l) == 1 {
            t[(l, l + 1)] = C64::new(1.0, 0.0);
        }
    }
    Ok(t)
}

/// Row `l` holds `(phi_l, phi_l', ..., phi_l^(N-1))`.
pub fn wronskian_matrix(set: &TransformationSet, order: usize) -> MatFun {
    let n = set.n;
    let d = n * order;
    let derivs: Vec<Vec<VecFun>> =
        set.entries.iter().map(|e| (0..order).map(|j| e.phi.nth_derivative(j)).collect()).collect();
    MatFun::from_fn(d, |l, c| derivs[l][c / n].entries[c % n].clone())
}

pub fn wronskian(set: &TransformationSet, order: usize) -> Result<ExpPoly, ModelError> {
    check_dim(set.n * order, set.len())?;
    Ok(wronskian_matrix(set, order).det())
}

/// Recovers the potential for which the set satisfies its chain equations.
pub fn potential_from_set(set: &TransformationSet) -> Result<Hamiltonian, ModelError> {
    let n = set.n;
    check_dim(n, set.len())?;
    set.check_chain()?;
    let rows = MatFun::from_fn(n, |l, j| set.entries[l].phi.entries[j].clone());
    let w = rows.det();
    if w.is_zero() {
        return Err(ModelError::DegenerateWronskian);
    }
    // R_l = phi_l'' + lambda_l phi_l + sigma_l phi_{l+1}; row i of V solves rows * v_i = (R_l[i])_l
    let rhs: Vec<VecFun> = (0..n)
        .map(|l| {
            let e = &set.entries[l];
            let mut r = e.phi.nth_derivative(2).add(&e.phi.scale(e.lambda));
            if set.sigma(l) == 1 {
                r = r.add(&set.entries[l + 1].phi);
            }
            r
        })
        .collect();
    let num = MatFun::from_fn(n, |i, j| {
        let col = VecFun::new((0..n).map(|l| rhs[l].entries[i].clone()).collect());
        rows.with_column(j, &col).det()
    });
    Ok(Hamiltonian::new(RatMatFun::new(num, w)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonvanishingReport {
    pub verdict: Verdict,
    pub min_abs: f64,
    pub min_rel: f64,
    pub at: f64,
    pub plus_inf: Asymptotic,
    pub minus_inf: Asymptotic,
}

/// Default relative threshold for the sampled `|W|` test.
pub const NONVANISHING_TOL: f64 = 1e-9;

/// Sampling plus asymptotics heuristic for `W(x) != 0` on the real axis.
pub fn check_nonvanishing(
    w: &ExpPoly,
    window: (f64, f64),
    samples: usize,
    tol: f64,
) -> Result<NonvanishingReport, ModelError> {
    if w.is_zero() {
        return Err(ModelError::ZeroFunction);
    }
    let plus_inf = w.asymptotic_exponent(Direction::PlusInf).map_err(|_| ModelError::ZeroFunction)?;
    let minus_inf = w.asymptotic_exponent(Direction::MinusInf).map_err(|_| ModelError::ZeroFunction)?;
    let (a, b) = window;
    let samples = samples.max(2);
    let mut fail = false;
    let (mut min_abs, mut min_rel, mut at) = (f64::INFINITY, f64::INFINITY, a);
    for i in 0..samples {
        let x = a + (b - a) * i as f64 / (samples - 1) as f64;
        let v = w.eval(x).norm();
        let scale = w.magnitude_scale(x);
        let rel = if scale > 0.0 { v / scale } else { 0.0 };
        if v <= tol * scale {
            fail = true;
        }
        if rel < min_rel {
            min_rel = rel;
            at = x;
        }
        min_abs = min_abs.min(v);
    }
    let verdict = if fail {
        Verdict::Fail
    } else if plus_inf.oscillatory || minus_inf.oscillatory {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(NonvanishingReport { verdict, min_abs, min_rel, at, plus_inf, minus_inf })
}

/// `Q = X_N d^N + sum_{j<N} X_j(x) d^j` with constant nondegenerate `X_N`.
/// The lower coefficients share one denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct IntertwiningOperator {
    pub order: usize,
    pub leading: CMat,
    pub lower: Vec<RatMatFun>,
}

impl IntertwiningOperator {
    pub fn new(leading: CMat, lower: Vec<RatMatFun>) -> Result<Self, ModelError> {
        let n = leading.nrows();
        if linalg::inverse(&leading).is_none() {
            return Err(ModelError::SingularLeading);
        }
        for c in &lower {
            check_dim(n, c.n())?;
        }
        let order = lower.len();
        Ok(IntertwiningOperator { order, leading, lower: share_denominator(lower) })
    }

    pub fn n(&self) -> usize {
        self.leading.nrows()
    }

    /// `X_j` for `j = 0..=N`.
    pub fn coeff(&self, j: usize) -> RatMatFun {
        if j == self.order {
            RatMatFun::from_const(&self.leading)
        } else {
            self.lower[j].clone()
        }
    }

    pub fn apply(&self, v: &RatVecFun) -> Result<RatVecFun, ModelError> {
        check_dim(self.n(), v.len())?;
        let d = v.derivatives(self.order);
        let mut acc = d[self.order].mul_const(&self.leading);
        for j in (0..self.order).rev() {
            acc = acc.add(&self.lower[j].mul_vec(&d[j]));
        }
        Ok(acc)
    }

    /// `C^{-1} Q C`
    pub fn conjugate(&self, c: &CMat, cinv: &CMat) -> Self {
        IntertwiningOperator {
            order: self.order,
            leading: MatFun::from_const(cinv)
                .mul(&MatFun::from_const(&self.leading))
                .mul(&MatFun::from_const(c))
                .as_const()
                .expect("product of constants is constant"),
            lower: self.lower.iter().map(|x| x.mul_const_left(cinv).mul_const_right(c)).collect(),
        }
    }
}

pub fn apply_operator(q: &IntertwiningOperator, v: &RatVecFun) -> Result<RatVecFun, ModelError> {
    q.apply(v)
}

fn share_denominator(lower: Vec<RatMatFun>) -> Vec<RatMatFun> {
    let Some(first) = lower.first() else {
        return lower;
    };
    if lower.iter().all(|c| c.den == first.den) {
        return lower;
    }
    let den =
        lower.iter().fold(ExpPoly::one(), |acc, c| if c.den.as_constant().is_some() { acc } else { acc.mul(&c.den) });
    lower
        .iter()
        .map(|c| {
            let other = lower.iter().filter(|o| !std::ptr::eq(*o, c)).fold(ExpPoly::one(), |acc, o| {
                if o.den.as_constant().is_some() {
                    acc
                } else {
                    acc.mul(&o.den)
                }
            });
            let scale = c.den.as_constant().map(|k| 1.0 / k).unwrap_or(C64::new(1.0, 0.0));
            RatMatFun { num: c.num.scale_poly(&other).scale(scale), den: den.clone() }
        })
        .collect()
}

/// Matrix differential operator `sum_j c_j(x) d^j` with rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp {
    pub coeffs: Vec<RatMatFun>,
}

impl DiffOp {
    pub fn multiplication(m: RatMatFun) -> Self {
        DiffOp { coeffs: vec![m] }
    }

    pub fn from_hamiltonian(h: &Hamiltonian) -> Self {
        let n = h.n;
        DiffOp {
            coeffs: vec![h.potential.clone(), RatMatFun::zero(n), RatMatFun::identity(n).scale(C64::new(-1.0, 0.0))],
        }
    }

    pub fn from_operator(q: &IntertwiningOperator) -> Self {
        DiffOp { coeffs: (0..=q.order).map(|j| q.coeff(j)).collect() }
    }

    pub fn n(&self) -> usize {
        self.coeffs.first().map_or(0, RatMatFun::n)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(RatMatFun::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.n().max(o.n());
        let len = self.coeffs.len().max(o.coeffs.len());
        let zero = RatMatFun::zero(n);
        DiffOp {
            coeffs: (0..len)
                .map(|j| {
                    let a = self.coeffs.get(j).unwrap_or(&zero);
                    let b = o.coeffs.get(j).unwrap_or(&zero);
                    a.add(b)
                })
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        DiffOp { coeffs: self.coeffs.iter().map(RatMatFun::neg).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// `self o other` as operators.
    pub fn compose(&self, o: &Self) -> Self {
        let n = self.n();
        let top = self.coeffs.len().saturating_sub(1);
        let derivs: Vec<Vec<RatMatFun>> = o.coeffs.iter().map(|b| b.derivatives(top)).collect();
        let len = top + o.coeffs.len();
        let mut coeffs = vec![RatMatFun::zero(n); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, bd) in derivs.iter().enumerate() {
                for (r, bdr) in bd.iter().enumerate().take(i + 1) {
                    if bdr.is_zero() {
                        continue;
                    }
                    let c = binomial(i, r) as f64;
                    let s = i - r + j;
                    coeffs[s] = coeffs[s].add(&a.mul(bdr).scale(C64::new(c, 0.0)));
                }
            }
        }
        DiffOp { coeffs }
    }

    pub fn apply(&self, v: &RatVecFun) -> RatVecFun {
        let d = v.derivatives(self.coeffs.len().saturating_sub(1));
        self.coeffs.iter().zip(&d).fold(RatVecFun::zero(v.len()), |acc, (c, dv)| acc.add(&c.mul_vec(dv)))
    }

    /// Largest `|coefficient(x)|` entry over the sample points.
    pub fn max_abs_on(&self, xs: &[f64]) -> f64 {
        let mut m: f64 = 0.0;
        for c in &self.coeffs {
            for &x in xs {
                m = m.max(c.eval(x).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        m
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn free_hamiltonian_on_modes() {
        let k = C64::new(0.8, 0.3);
        let h = Hamiltonian::free(2);
        let v = RatVecFun::from_exp(VecFun::unit(2, 0, ExpPoly::exp(r(1.0), k)));
        let hv = h.apply(&v).unwrap();
        assert!(hv.sub(&v.scale(-k * k)).is_zero());
        let c = RatVecFun::from_exp(VecFun::new(vec![ExpPoly::constant(r(2.0)), ExpPoly::one()]));
        assert!(h.apply(&c).unwrap().is_zero());
        let assoc = RatVecFun::from_exp(VecFun::unit(2, 0, ExpPoly::term(-1.0 / (2.0 * k), 1, k)));
        assert!(h.apply_shifted(-k * k, &assoc).unwrap().sub(&v).is_zero());
    }

    #[test]
    fn first_order_operator_action() {
        let k = r(1.5);
        let q = IntertwiningOperator::new(linalg::identity(2), vec![RatMatFun::identity(2).scale(-k)]).unwrap();
        let v = RatVecFun::from_exp(VecFun::unit(2, 1, ExpPoly::exp(r(1.0), -k)));
        let out = q.apply(&v).unwrap();
        let expect = RatVecFun::from_exp(VecFun::unit(2, 1, ExpPoly::exp(-2.0 * k, -k)));
        assert!(out.sub(&expect).is_zero());
    }

    #[test]
    fn t_matrix_forms() {
        let k = r(1.0);
        let e = |c: usize, kk: C64| VecFun::unit(2, c, ExpPoly::exp(r(1.0), kk));
        let diag = TransformationSet::new(
            2,
            vec![
                ChainEntry { phi: e(0, k), lambda: r(-1.0), sigma: 0 },
                ChainEntry { phi: e(1, r(2.0)), lambda: r(-4.0), sigma: 0 },
            ],
        )
        .unwrap();
        let t = t_matrix(&diag).unwrap();
        assert_eq!(t, CMat::from_row_slice(2, 2, &[r(-1.0), r(0.0), r(0.0), r(-4.0)]));
        let bad = TransformationSet {
            n: 2,
            entries: vec![
                ChainEntry { phi: e(0, k), lambda: r(-1.0), sigma: 1 },
                ChainEntry { phi: e(1, r(2.0)), lambda: r(-4.0), sigma: 0 },
            ],
        };
        assert_eq!(t_matrix(&bad), Err(ModelError::ChainConstraintViolated(0)));
    }

    #[test]
    fn identity_set_wronskian() {
        let k = C64::new(0.6, 0.1);
        let set = TransformationSet::new(
            2,
            (0..2)
                .map(|c| ChainEntry { phi: VecFun::unit(2, c, ExpPoly::exp(r(1.0), k)), lambda: -k * k, sigma: 0 })
                .collect(),
        )
        .unwrap();
        assert!(wronskian(&set, 1).unwrap().sub(&ExpPoly::exp(r(1.0), 2.0 * k)).is_zero());
        assert!(potential_from_set(&set).unwrap().potential.is_zero());
    }

    #[test]
    fn scalar_inverse_problem() {
        let k = r(0.9);
        let set = |p: ExpPoly| {
            TransformationSet::new(1, vec![ChainEntry { phi: VecFun::new(vec![p]), lambda: -k * k, sigma: 0 }]).unwrap()
        };
        let v = potential_from_set(&set(ExpPoly::exp(r(1.0), k))).unwrap();
        assert!(v.potential.is_zero());

        // phi = x e^{kx}: v = (phi'' + lambda phi) / phi = 2k e^{kx} / (x e^{kx})
        let s = set(ExpPoly::term(r(1.0), 1, k));
        let v = potential_from_set(&s).unwrap();
        assert!(v.potential.num.get(0, 0).approx_eq(&ExpPoly::exp(2.0 * k, k)));
        assert_eq!(v.potential.den, ExpPoly::term(r(1.0), 1, k));
        let w = wronskian(&s, 1).unwrap();
        let rep = check_nonvanishing(&w, (-5.0, 5.0), 201, NONVANISHING_TOL).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn nonvanishing_verdicts() {
        let k = r(1.0);
        let ch = ExpPoly::exp(r(0.5), k).add(&ExpPoly::exp(r(0.5), -k));
        let sh = ExpPoly::exp(r(0.5), k).sub(&ExpPoly::exp(r(0.5), -k));
        let w = (-5.0, 5.0);
        assert_eq!(check_nonvanishing(&ch, w, 201, NONVANISHING_TOL).unwrap().verdict, Verdict::Pass);
        assert_eq!(check_nonvanishing(&sh, w, 201, NONVANISHING_TOL).unwrap().verdict, Verdict::Fail);
        // cos 2x: zeros at odd multiples of pi/4, none on this grid
        let ik = C64::new(0.0, 1.0);
        let cos = ExpPoly::exp(r(1.0), 2.0 * ik).add(&ExpPoly::exp(r(1.0), -2.0 * ik));
        let v = check_nonvanishing(&cos, w, 201, NONVANISHING_TOL).unwrap().verdict;
        assert_ne!(v, Verdict::Pass);
        assert_eq!(check_nonvanishing(&ExpPoly::zero(), w, 10, 1e-9), Err(ModelError::ZeroFunction));
    }
}
