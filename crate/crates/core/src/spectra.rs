//! Chains of eigen- and associated functions, normalizability, free modes,
//! similarity transforms and plane-wave images.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expalg::{rates_equal, Asymptotic, Direction, ExpPoly};
use crate::linalg::{self, CMat};
use crate::matfun::{common_denominator, RatVecFun, VecFun};
use crate::model::{Hamiltonian, IntertwiningOperator, ModelError};
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("every chain member maps to zero")]
    EmptyImage,
    #[error("image of member {0} vanishes after a nonzero image")]
    NonMonotoneTrimming(usize),
    #[error("mapped chain breaks its defining relation at member {0}")]
    ChainBroken(usize),
    #[error("state is identically zero")]
    ZeroState,
    #[error("rate must be nonzero")]
    ZeroRate,
    #[error("similarity matrix is singular")]
    SingularMatrix,
    #[error("channel {channel} out of range for {n} channels")]
    ChannelOutOfRange { channel: usize, n: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `(H - lambda) Psi_0 = 0`, `(H - lambda) Psi_i = Psi_{i-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralChain {
    pub lambda: C64,
    pub members: Vec<RatVecFun>,
}

impl SpectralChain {
    pub fn new(lambda: C64, members: Vec<RatVecFun>) -> Self {
        SpectralChain { lambda, members }
    }

    /// Index of the first member violating the chain relations for `h`.
    pub fn first_violation(&self, h: &Hamiltonian) -> Result<Option<usize>, ModelError> {
        for (i, m) in self.members.iter().enumerate() {
            let mut r = h.apply_shifted(self.lambda, m)?;
            if i > 0 {
                r = r.sub(&self.members[i - 1]);
            }
            if !r.is_zero() {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    pub fn is_valid_for(&self, h: &Hamiltonian) -> Result<bool, ModelError> {
        Ok(self.first_violation(h)?.is_none())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MappedChain {
    pub chain: SpectralChain,
    /// Number of leading members annihilated by the operator.
    pub l0: usize,
}

/// Applies `q` to every member, drops the leading zero images and checks the
/// result against `h_minus`.
pub fn map_chain(
    q: &IntertwiningOperator,
    chain: &SpectralChain,
    h_minus: &Hamiltonian,
) -> Result<MappedChain, SpectraError> {
    let images = chain.members.iter().map(|m| q.apply(m)).collect::<Result<Vec<_>, _>>()?;
    let l0 = images.iter().take_while(|v| v.is_zero()).count();
    if l0 == images.len() {
        return Err(SpectraError::EmptyImage);
    }
    if let Some(i) = images.iter().skip(l0).position(|v| v.is_zero()) {
        return Err(SpectraError::NonMonotoneTrimming(i + l0));
    }
    let out = SpectralChain::new(chain.lambda, images.into_iter().skip(l0).collect());
    if let Some(i) = out.first_violation(h_minus)? {
        return Err(SpectraError::ChainBroken(i));
    }
    Ok(MappedChain { chain: out, l0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalizability {
    Normalizable,
    NonNormalizable,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndBehaviour {
    pub numerator: Asymptotic,
    pub denominator: Asymptotic,
    pub verdict: Normalizability,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundStateVerdict {
    pub state: RatVecFun,
    pub verdict: Normalizability,
    pub plus_inf: EndBehaviour,
    pub minus_inf: EndBehaviour,
    pub note: Option<String>,
}

const RE_TOL: f64 = 1e-9;

/// Dominant behaviour of a vector numerator: the worst component.
fn vector_asymptotic(v: &VecFun, dir: Direction) -> Option<Asymptotic> {
    let sign = match dir {
        Direction::PlusInf => 1.0,
        Direction::MinusInf => -1.0,
    };
    let mut best: Option<Asymptotic> = None;
    for e in v.entries.iter().filter(|e| !e.is_zero()) {
        let a = e.asymptotic_exponent(dir).ok()?;
        best = Some(match best {
            None => a,
            Some(b) => {
                let (ra, rb) = (sign * a.re_rate, sign * b.re_rate);
                if ra > rb + RE_TOL {
                    a
                } else if rb > ra + RE_TOL {
                    b
                } else if a.power != b.power {
                    if a.power > b.power {
                        a
                    } else {
                        b
                    }
                } else {
                    Asymptotic { oscillatory: a.oscillatory || b.oscillatory, ..a }
                }
            }
        });
    }
    best
}

fn end_verdict(num: Asymptotic, den: Asymptotic, dir: Direction) -> (Normalizability, Option<&'static str>) {
    let sign = match dir {
        Direction::PlusInf => 1.0,
        Direction::MinusInf => -1.0,
    };
    let gap = sign * (den.re_rate - num.re_rate);
    if gap > RE_TOL {
        return (Normalizability::Normalizable, None);
    }
    if gap < -RE_TOL {
        return (Normalizability::NonNormalizable, None);
    }
    if num.power < den.power {
        if den.oscillatory {
            (Normalizability::Inconclusive, Some("oscillatory denominator at a tie"))
        } else {
            (Normalizability::Normalizable, None)
        }
    } else if num.oscillatory || den.oscillatory {
        (Normalizability::NonNormalizable, Some("oscillatory"))
    } else {
        (Normalizability::NonNormalizable, None)
    }
}

/// Exponent comparison of numerator and denominator at both ends.
pub fn classify_normalizability(state: &RatVecFun) -> Result<BoundStateVerdict, SpectraError> {
    if state.is_zero() {
        return Err(SpectraError::ZeroState);
    }
    let mut notes = Vec::new();
    let mut ends = Vec::new();
    for dir in [Direction::PlusInf, Direction::MinusInf] {
        let num = vector_asymptotic(&state.num, dir).ok_or(SpectraError::ZeroState)?;
        let den = state.den.asymptotic_exponent(dir).map_err(|_| SpectraError::ZeroState)?;
        let (verdict, note) = end_verdict(num, den, dir);
        if let Some(n) = note {
            notes.push(format!("{}: {n}", if dir == Direction::PlusInf { "+inf" } else { "-inf" }));
        }
        ends.push(EndBehaviour { numerator: num, denominator: den, verdict });
    }
    let minus_inf = ends.pop().unwrap();
    let plus_inf = ends.pop().unwrap();
    let verdict = match (plus_inf.verdict, minus_inf.verdict) {
        (Normalizability::Normalizable, Normalizability::Normalizable) => Normalizability::Normalizable,
        (Normalizability::NonNormalizable, _) | (_, Normalizability::NonNormalizable) => {
            Normalizability::NonNormalizable
        }
        _ => Normalizability::Inconclusive,
    };
    Ok(BoundStateVerdict {
        state: state.clone(),
        verdict,
        plus_inf,
        minus_inf,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}

/// `sum c x^m e^{(k - s) x}` with `s` chosen so the denominator stays O(1);
/// avoids overflow for large `|x|`.
fn eval_ratio(state: &RatVecFun, x: f64) -> Vec<C64> {
    let shift = state.den.terms().iter().map(|t| t.rate.re * x).fold(f64::NEG_INFINITY, f64::max);
    let scaled = |p: &ExpPoly| -> C64 {
        p.terms().iter().map(|t| t.coeff * x.powi(t.power as i32) * (t.rate * x - shift).exp()).sum()
    };
    let d = scaled(&state.den);
    state.num.entries.iter().map(|e| scaled(e) / d).collect()
}

/// `int_{-L}^{L} |state|^2 dx` for each `L`, by the trapezoid rule with step `h`.
pub fn norm_integrals(state: &RatVecFun, ls: &[f64], h: f64) -> Vec<f64> {
    let lmax = ls.iter().copied().fold(0.0, f64::max);
    let steps = (lmax / h).round() as i64;
    let h = lmax / steps as f64;
    let sq = |x: f64| -> f64 {
        let v: f64 = eval_ratio(state, x).iter().map(|z| z.norm_sqr()).sum();
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let f0 = sq(0.0);
    let mut acc = 0.0;
    let mut out = vec![f64::NAN; ls.len()];
    let mut prev = (f0, f0);
    for i in 1..=steps {
        let x = i as f64 * h;
        let cur = (sq(x), sq(-x));
        acc += 0.5 * h * (prev.0 + cur.0 + prev.1 + cur.1);
        prev = cur;
        for (j, &l) in ls.iter().enumerate() {
            if (x - l).abs() < 0.5 * h {
                out[j] = acc;
            }
        }
    }
    out
}

/// Numeric cross-check: whether `int |state|^2` over `[-L, L]` stays bounded
/// as `L` runs through 10, 20, 40.
pub fn numerically_bounded(state: &RatVecFun) -> bool {
    let i = norm_integrals(state, &[10.0, 20.0, 40.0], 0.005);
    if i.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let (d1, d2) = (i[1] - i[0], i[2] - i[1]);
    if d2 <= 1e-10 * i[2] {
        return true;
    }
    d1 > 0.0 && d2 / d1 < 0.75
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Eigen,
    Associated1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Free-Hamiltonian mode for `lambda = -k^2`: `e^{+-kx} e_c` or
/// `-+ x e^{+-kx} / (2k) e_c`. The channel index is zero-based.
pub fn free_modes(n: usize, k: C64, channel: usize, kind: ModeKind, sign: Sign) -> Result<RatVecFun, SpectraError> {
    if k.norm() == 0.0 {
        return Err(SpectraError::ZeroRate);
    }
    if channel >= n {
        return Err(SpectraError::ChannelOutOfRange { channel, n });
    }
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let p = match kind {
        ModeKind::Eigen => ExpPoly::exp(C64::new(1.0, 0.0), s * k),
        ModeKind::Associated1 => ExpPoly::term(-s / (2.0 * k), 1, s * k),
    };
    Ok(RatVecFun::from_exp(VecFun::unit(n, channel, p)))
}

/// Conjugation by a constant matrix: `H -> C^{-1} H C`, `Q -> C^{-1} Q C`, `v -> C^{-1} v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Similarity {
    pub c: CMat,
    pub cinv: CMat,
}

impl Similarity {
    pub fn new(c: CMat) -> Result<Self, SpectraError> {
        let cinv = linalg::inverse(&c).ok_or(SpectraError::SingularMatrix)?;
        Ok(Similarity { c, cinv })
    }

    pub fn hamiltonian(&self, h: &Hamiltonian) -> Hamiltonian {
        Hamiltonian::new(h.potential.mul_const_left(&self.cinv).mul_const_right(&self.c))
    }

    pub fn operator(&self, q: &IntertwiningOperator) -> IntertwiningOperator {
        q.conjugate(&self.c, &self.cinv)
    }

    pub fn vector(&self, v: &RatVecFun) -> RatVecFun {
        v.mul_const(&self.cinv)
    }
}

pub fn similarity(c: CMat) -> Result<Similarity, SpectraError> {
    Similarity::new(c)
}

/// `Q (e^{i kappa x} e_c)`; an eigenfunction of the partner at `kappa^2`.
pub fn plane_wave_image(q: &IntertwiningOperator, kappa: f64, channel: usize) -> Result<RatVecFun, SpectraError> {
    let n = q.n();
    if channel >= n {
        return Err(SpectraError::ChannelOutOfRange { channel, n });
    }
    let wave = ExpPoly::exp(C64::new(1.0, 0.0), C64::new(0.0, kappa));
    Ok(q.apply(&RatVecFun::from_exp(VecFun::unit(n, channel, wave)))?)
}

/// Dimensions of the normalizable eigen- and first-order associated
/// subspaces inside the span of `candidates`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundStateCount {
    pub eigen: usize,
    pub associated: usize,
}

/// (component, rate, power)
type MonomialKey = (usize, C64, u32);

/// Coefficient rows of `vs` over a shared monomial basis, one row per
/// (component, rate, power) key.
fn coefficient_rows(vs: &[RatVecFun]) -> (Vec<Vec<C64>>, Vec<MonomialKey>, ExpPoly) {
    let (nums, den) = common_denominator(vs);
    let mut keys: Vec<MonomialKey> = Vec::new();
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (f, v) in nums.iter().enumerate() {
        for (c, e) in v.entries.iter().enumerate() {
            for t in e.terms() {
                let pos = keys.iter().position(|&(kc, kr, km)| kc == c && km == t.power && rates_equal(kr, t.rate));
                let r = match pos {
                    Some(r) => r,
                    None => {
                        keys.push((c, t.rate, t.power));
                        rows.push(vec![C64::new(0.0, 0.0); vs.len()]);
                        keys.len() - 1
                    }
                };
                rows[r][f] += t.coeff;
            }
        }
    }
    (rows, keys, den)
}

fn nullity(rows: &[Vec<C64>], cols: usize) -> usize {
    let rows: Vec<&Vec<C64>> = rows.iter().filter(|r| r.iter().any(|z| z.norm() > 0.0)).collect();
    if rows.is_empty() {
        return cols;
    }
    let m = DMatrix::from_fn(rows.len(), cols, |i, j| {
        let s = rows[i].iter().map(|z| z.norm()).fold(0.0, f64::max);
        rows[i][j] / s
    });
    let sv = m.svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > 1e-9 * top).count();
    cols - rank
}

/// Rows forcing decay at both ends relative to the denominator, or `None`
/// when the denominator's dominant behaviour is oscillatory.
fn decay_rows(vs: &[RatVecFun]) -> Option<Vec<Vec<C64>>> {
    let (rows, keys, den) = coefficient_rows(vs);
    let mut out = Vec::new();
    for dir in [Direction::PlusInf, Direction::MinusInf] {
        let a = den.asymptotic_exponent(dir).ok()?;
        if a.oscillatory {
            return None;
        }
        let sign = if dir == Direction::PlusInf { 1.0 } else { -1.0 };
        for (r, &(_, rate, m)) in keys.iter().enumerate() {
            let gap = sign * (rate.re - a.re_rate);
            if gap > RE_TOL || (gap.abs() <= RE_TOL && m >= a.power) {
                out.push(rows[r].clone());
            }
        }
    }
    Some(out)
}

/// Counts normalizable eigenfunctions (`(H - lambda) psi = 0`) and
/// first-order associated functions in the span of `candidates`, each
/// modulo the lower subspace. An associated function must map onto a
/// normalizable eigenfunction. `None` if decay cannot be decided.
pub fn bound_state_count(
    h: &Hamiltonian,
    lambda: C64,
    candidates: &[RatVecFun],
) -> Result<Option<BoundStateCount>, SpectraError> {
    let cols = candidates.len();
    if cols == 0 {
        return Ok(Some(BoundStateCount { eigen: 0, associated: 0 }));
    }
    let g1 = candidates.iter().map(|v| h.apply_shifted(lambda, v)).collect::<Result<Vec<_>, _>>()?;
    let g2 = g1.iter().map(|v| h.apply_shifted(lambda, v)).collect::<Result<Vec<_>, _>>()?;
    let (Some(decay), Some(image_decay)) = (decay_rows(candidates), decay_rows(&g1)) else {
        return Ok(None);
    };
    let zero = coefficient_rows(candidates).0;
    let r1 = coefficient_rows(&g1).0;
    let r2 = coefficient_rows(&g2).0;
    let stack = |a: &[Vec<C64>], b: &[Vec<C64>]| -> Vec<Vec<C64>> { a.iter().chain(b).cloned().collect() };
    let trivial = nullity(&zero, cols);
    let eigen = nullity(&stack(&r1, &decay), cols);
    let second = nullity(&stack(&stack(&r2, &decay), &image_decay), cols);
    Ok(Some(BoundStateCount { eigen: eigen - trivial, associated: second - eigen }))
}
