//! Hand-transcribed closed forms for the three bundled scenarios.
//!
//! Review-only ground truth: everything here is written out from the printed
//! formulas with `ExpPoly` arithmetic and never calls into the builders.

use crate::expalg::ExpPoly;
use crate::linalg::{self, CMat};
use crate::matfun::{MatFun, RatMatFun, RatVecFun, VecFun};
use crate::C64;

use super::Params;

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `c x^m e^{k x}`
fn e(c: C64, m: u32, k: C64) -> ExpPoly {
    ExpPoly::term(c, m, k)
}

fn sum(ps: &[ExpPoly]) -> ExpPoly {
    ExpPoly::sum(ps)
}

/// `(a, b)^t x^m e^{k x}`
fn ve(a: C64, b: C64, m: u32, k: C64) -> VecFun {
    VecFun::new(vec![e(a, m, k), e(b, m, k)])
}

fn v(a: ExpPoly, b: ExpPoly) -> VecFun {
    VecFun::new(vec![a, b])
}

fn vsum(parts: &[VecFun]) -> VecFun {
    parts.iter().fold(VecFun::zero(2), |acc, p| acc.add(p))
}

fn m(a: ExpPoly, b: ExpPoly, c: ExpPoly, d: ExpPoly) -> MatFun {
    MatFun { n: 2, entries: vec![a, b, c, d] }
}

fn mc(a: C64, b: C64, c: C64, d: C64) -> MatFun {
    m(ExpPoly::constant(a), ExpPoly::constant(b), ExpPoly::constant(c), ExpPoly::constant(d))
}

fn cmat(a: C64, b: C64, c: C64, d: C64) -> CMat {
    linalg::from_rows(&[vec![a, b], vec![c, d]])
}

fn diag_rational(a: RatMatFun, b: RatMatFun) -> RatMatFun {
    a.add(&b)
}

/// `p / q` placed at entry `(i, j)` of a 2x2 matrix.
fn at(i: usize, j: usize, p: ExpPoly, q: ExpPoly) -> RatMatFun {
    let mut num = MatFun::zero(2);
    num.set(i, j, p);
    RatMatFun::new(num, q)
}

/// Similarity matrix together with the reduced closed forms it produces.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub c: CMat,
    pub wronskian: Option<ExpPoly>,
    pub superpotential: Option<RatMatFun>,
    pub u0: Option<RatMatFun>,
    pub v_minus: Option<RatMatFun>,
    /// `(label, original state, reduced form of C^{-1} state)`.
    pub states: Vec<(String, String, RatVecFun)>,
    /// Eigenfunctions of the reduced partner at the given level.
    pub eigenstates: Vec<(String, C64, RatVecFun)>,
}

pub mod s51 {
    use super::*;

    pub fn wronskian(p: &Params) -> ExpPoly {
        let [_, _, c2, c3, c4, c5, c6, c7, c8] = p.c;
        let (k1, k2) = (p.k1, p.k2);
        sum(&[
            e(c7 - c3 * c5, 0, k1 + k2),
            e(c8 - c3 * c6, 0, k1 - k2),
            e(c2 * c7 - c4 * c5, 0, -(k1 - k2)),
            e(c2 * c8 - c4 * c6, 0, -(k1 + k2)),
        ])
    }

    pub fn superpotential(p: &Params) -> RatMatFun {
        let [_, _, c2, c3, c4, c5, c6, c7, c8] = p.c;
        let (k1, k2) = (p.k1, p.k2);
        let a = mc(k1 * c7 - k2 * c3 * c5, -(k1 - k2) * c5, (k1 - k2) * c3 * c7, k2 * c7 - k1 * c3 * c5);
        let b = mc(k1 * c8 + k2 * c3 * c6, -(k1 + k2) * c6, (k1 + k2) * c3 * c8, -(k2 * c8 + k1 * c3 * c6));
        let c =
            mc(-(k1 * c2 * c7 + k2 * c4 * c5), (k1 + k2) * c2 * c5, -(k1 + k2) * c4 * c7, k2 * c2 * c7 + k1 * c4 * c5);
        let d = mc(
            -(k1 * c2 * c8 - k2 * c4 * c6),
            (k1 - k2) * c2 * c6,
            -(k1 - k2) * c4 * c8,
            -(k2 * c2 * c8 - k1 * c4 * c6),
        );
        let num = a
            .scale_poly(&e(r(1.0), 0, k1 + k2))
            .add(&b.scale_poly(&e(r(1.0), 0, k1 - k2)))
            .add(&c.scale_poly(&e(r(1.0), 0, -(k1 - k2))))
            .add(&d.scale_poly(&e(r(1.0), 0, -(k1 + k2))));
        RatMatFun::new(num.neg(), wronskian(p))
    }

    pub fn u0(p: &Params) -> RatMatFun {
        let [_, _, c2, c3, c4, c5, c6, c7, c8] = p.c;
        let (q1, q2) = (p.k1 * p.k1, p.k2 * p.k2);
        let (k1, k2) = (p.k1, p.k2);
        let a = mc(-(q1 * c7 - q2 * c3 * c5), (q1 - q2) * c5, -(q1 - q2) * c3 * c7, -(q2 * c7 - q1 * c3 * c5));
        let b = mc(-(q1 * c8 - q2 * c3 * c6), (q1 - q2) * c6, -(q1 - q2) * c3 * c8, -(q2 * c8 - q1 * c3 * c6));
        let c = mc(
            -(q1 * c2 * c7 - q2 * c4 * c5),
            (q1 - q2) * c2 * c5,
            -(q1 - q2) * c4 * c7,
            -(q2 * c2 * c7 - q1 * c4 * c5),
        );
        let d = mc(
            -(q1 * c2 * c8 - q2 * c4 * c6),
            (q1 - q2) * c2 * c6,
            -(q1 - q2) * c4 * c8,
            -(q2 * c2 * c8 - q1 * c4 * c6),
        );
        let num = a
            .scale_poly(&e(r(1.0), 0, k1 + k2))
            .add(&b.scale_poly(&e(r(1.0), 0, k1 - k2)))
            .add(&c.scale_poly(&e(r(1.0), 0, -(k1 - k2))))
            .add(&d.scale_poly(&e(r(1.0), 0, -(k1 + k2))));
        RatMatFun::new(num, wronskian(p))
    }

    /// Shorthand coefficients shared by the potential and the states.
    struct Blocks {
        p: C64,
        q: C64,
        r: C64,
        s: C64,
        t: C64,
        u: C64,
        v: C64,
        w: C64,
    }

    fn blocks(p: &Params) -> Blocks {
        let [_, _, c2, c3, c4, c5, c6, c7, c8] = p.c;
        let (k1, k2) = (p.k1, p.k2);
        let (d1, dd1, d2, dd2) = (p.d1(), p.dd1(), p.d2(), p.dd2());
        Blocks {
            p: k1 * d2 - k2 * (dd2 - 2.0 * c3 * c5 * c6),
            q: k1 * d2 * c3 + k2 * (dd2 * c3 - 2.0 * c7 * c8),
            r: k2 * d1 * c5 - k1 * (dd1 * c5 - 2.0 * c2 * c7),
            s: k2 * d1 * c7 + k1 * (dd1 * c7 - 2.0 * c3 * c4 * c5),
            t: k2 * d1 * c6 + k1 * (dd1 * c6 - 2.0 * c2 * c8),
            u: k2 * d1 * c8 - k1 * (dd1 * c8 - 2.0 * c3 * c4 * c6),
            v: k1 * d2 * c2 + k2 * (dd2 * c2 - 2.0 * c4 * c5 * c6),
            w: k1 * d2 * c4 - k2 * (dd2 * c4 - 2.0 * c2 * c7 * c8),
        }
    }

    pub fn v_minus(p: &Params) -> RatMatFun {
        let [_, _, c2, c3, c4, c5, c6, c7, c8] = p.c;
        let (k1, k2) = (p.k1, p.k2);
        let (q1, q2) = (k1 * k1, k2 * k2);
        let (d1, dd1, d2, dd2) = (p.d1(), p.dd1(), p.d2(), p.dd2());
        let b = blocks(p);
        let ma = mc(c3 * b.p, -b.p, c3 * b.q, -b.q).scale(k2);
        let mb = mc(c7 * b.r, -c5 * b.r, c7 * b.s, -c5 * b.s).scale(k1);
        let mcc = mc(-c8 * b.t, c6 * b.t, -c8 * b.u, c6 * b.u).scale(k1);
        let md = mc(-c4 * b.v, c2 * b.v, -c4 * b.w, c2 * b.w).scale(k2);
        let me = mc(
            2.0 * (q1 * c2 * c7 * c8 + q2 * c3 * c4 * c5 * c6),
            (q1 - q2) * (dd1 * c5 * c6 - dd2 * c2),
            (q1 - q2) * (dd1 * c7 * c8 - dd2 * c3 * c4),
            2.0 * (q2 * c2 * c7 * c8 + q1 * c3 * c4 * c5 * c6),
        )
        .scale(r(2.0));
        let si = (q1 + q2) * dd1 * dd2 - 2.0 * k1 * k2 * d1 * d2;
        let bracket = ma
            .scale_poly(&e(r(1.0), 0, 2.0 * k1))
            .add(&mb.scale_poly(&e(r(1.0), 0, 2.0 * k2)))
            .add(&mcc.scale_poly(&e(r(1.0), 0, -2.0 * k2)))
            .add(&md.scale_poly(&e(r(1.0), 0, -2.0 * k1)))
            .add(&me)
            .sub(&MatFun::identity(2).scale(si));
        let w = wronskian(p);
        RatMatFun::new(bracket.scale(r(-4.0)), w.mul(&w))
    }

    /// States `Psi_1 .. Psi_12`; `None` for other indices.
    pub fn state(p: &Params, i: usize) -> Option<RatVecFun> {
        let [_, _, c2, c3, c4, c5, c6, c7, c8] = p.c;
        let (k1, k2) = (p.k1, p.k2);
        let (kp, km) = (k1 + k2, k1 - k2);
        let one = r(1.0);
        let w = wronskian(p);
        let b = blocks(p);
        let (d1, d2) = (p.d1(), p.d2());
        let over_w = |num: VecFun| Some(RatVecFun::new(num, w.clone()));
        match i {
            1 => over_w(vsum(&[
                ve(c5, c7, 0, 2.0 * k1 + k2).scale(-km * c3),
                ve(c6, c8, 0, 2.0 * k1 - k2).scale(-kp * c3),
                ve(2.0 * k1 * c2 * c7 - km * c4 * c5, kp * c4 * c7, 0, k2),
                ve(2.0 * k1 * c2 * c8 - kp * c4 * c6, km * c4 * c8, 0, -k2),
            ])),
            2 => over_w(vsum(&[
                ve(c6, c8, 0, -(2.0 * k1 + k2)).scale(km * c4),
                ve(c5, c7, 0, -(2.0 * k1 - k2)).scale(kp * c4),
                ve(2.0 * k1 * c7 - kp * c3 * c5, km * c3 * c7, 0, k2).neg(),
                ve(2.0 * k1 * c8 - km * c3 * c6, kp * c3 * c8, 0, -k2).neg(),
            ])),
            3 => over_w(vsum(&[
                ve(c5, c7, 0, 2.0 * k1 + k2).scale(km),
                ve(c6, c8, 0, 2.0 * k1 - k2).scale(kp),
                ve(kp * c2 * c5, 2.0 * k1 * c4 * c5 - km * c2 * c7, 0, k2).neg(),
                ve(km * c2 * c6, 2.0 * k1 * c4 * c6 - kp * c2 * c8, 0, -k2).neg(),
            ])),
            4 => over_w(vsum(&[
                ve(c6, c8, 0, -(2.0 * k1 + k2)).scale(-km * c2),
                ve(c5, c7, 0, -(2.0 * k1 - k2)).scale(-kp * c2),
                ve(km * c5, 2.0 * k1 * c3 * c5 - kp * c7, 0, k2),
                ve(kp * c6, 2.0 * k1 * c3 * c6 - km * c8, 0, -k2),
            ])),
            5 => over_w(vsum(&[
                ve(one, c3, 0, k1 + 2.0 * k2).scale(-km * c7),
                ve(c2, c4, 0, -(k1 - 2.0 * k2)).scale(kp * c7),
                ve(2.0 * k2 * c3 * c6 + km * c8, kp * c3 * c8, 0, k1).neg(),
                ve(2.0 * k2 * c4 * c6 - kp * c2 * c8, -km * c4 * c8, 0, -k1).neg(),
            ])),
            6 => over_w(vsum(&[
                ve(c2, c4, 0, -(k1 + 2.0 * k2)).scale(km * c8),
                ve(one, c3, 0, k1 - 2.0 * k2).scale(-kp * c8),
                ve(2.0 * k2 * c3 * c5 - kp * c7, -km * c3 * c7, 0, k1),
                ve(2.0 * k2 * c4 * c5 + km * c2 * c7, kp * c4 * c7, 0, -k1),
            ])),
            7 => over_w(vsum(&[
                ve(one, c3, 0, k1 + 2.0 * k2).scale(km * c5),
                ve(c2, c4, 0, -(k1 - 2.0 * k2)).scale(-kp * c5),
                ve(kp * c6, 2.0 * k2 * c8 + km * c3 * c6, 0, k1),
                ve(-km * c2 * c6, 2.0 * k2 * c2 * c8 - kp * c4 * c6, 0, -k1),
            ])),
            8 => over_w(vsum(&[
                ve(c2, c4, 0, -(k1 + 2.0 * k2)).scale(-km * c6),
                ve(one, c3, 0, k1 - 2.0 * k2).scale(kp * c6),
                ve(-km * c5, 2.0 * k2 * c7 - kp * c3 * c5, 0, k1).neg(),
                ve(kp * c2 * c5, 2.0 * k2 * c2 * c7 + km * c4 * c5, 0, -k1).neg(),
            ])),
            9 => {
                let num = vsum(&[
                    ve(one, c3, 0, 2.0 * k1 + k2).scale(c7 - c3 * c5),
                    ve(one, c3, 0, 2.0 * k1 - k2).scale(c8 - c3 * c6),
                    ve(b.r, b.s, 1, k2).scale(r(2.0)),
                    ve(c5, c7, 0, k2).scale(-d1),
                    ve(c6, c8, 0, -k2).scale(-d1),
                    ve(b.t, b.u, 1, -k2).scale(r(-2.0)),
                    ve(c2, c4, 0, -(2.0 * k1 - k2)).scale(-(c2 * c7 - c4 * c5)),
                    ve(c2, c4, 0, -(2.0 * k1 + k2)).scale(-p.d28()),
                ]);
                Some(RatVecFun::new(num.scale(-1.0 / (2.0 * k1)), w.clone()))
            }
            10 => {
                let num = vsum(&[
                    ve(c5, c7, 0, k1 + 2.0 * k2).scale(c7 - c3 * c5),
                    ve(c5, c7, 0, -(k1 - 2.0 * k2)).scale(c2 * c7 - c4 * c5),
                    ve(b.p, b.q, 1, k1).scale(r(-2.0)),
                    ve(one, c3, 0, k1).scale(d2),
                    ve(c2, c4, 0, -k1).scale(d2),
                    ve(b.v, b.w, 1, -k1).scale(r(2.0)),
                    ve(c6, c8, 0, k1 - 2.0 * k2).scale(-(c8 - c3 * c6)),
                    ve(c6, c8, 0, -(k1 + 2.0 * k2)).scale(-p.d28()),
                ]);
                Some(RatVecFun::new(num.scale(-1.0 / (2.0 * k2)), w.clone()))
            }
            11 => over_w(vsum(&[ve(b.r, b.s, 0, k2), ve(b.t, b.u, 0, -k2).neg()])),
            12 => over_w(vsum(&[ve(b.p, b.q, 0, k1).neg(), ve(b.v, b.w, 0, -k1)])),
            _ => None,
        }
    }

    /// `ch k1 x ch k2 (x - x0)` for the first partial case.
    pub fn case1_wronskian(k1: C64, k2: C64, x0: f64) -> ExpPoly {
        let a = e(r(1.0), 0, k1).add(&e(r(1.0), 0, -k1));
        let b = e((-k2 * x0).exp(), 0, k2).add(&e((k2 * x0).exp(), 0, -k2));
        a.mul(&b).scale(r(0.25))
    }

    /// `-2 diag(k1^2 / ch^2 k1 x, k2^2 / ch^2 k2 (x - x0))`
    pub fn case1_v_minus(k1: C64, k2: C64, x0: f64) -> RatMatFun {
        let a = e(r(1.0), 0, k1).add(&e(r(1.0), 0, -k1));
        let b = e((-k2 * x0).exp(), 0, k2).add(&e((k2 * x0).exp(), 0, -k2));
        diag_rational(
            at(0, 0, ExpPoly::constant(-8.0 * k1 * k1), a.mul(&a)),
            at(1, 1, ExpPoly::constant(-8.0 * k2 * k2), b.mul(&b)),
        )
    }

    /// `-diag(k1 th k1 x, k2 th k2 (x - x0))`
    pub fn case1_superpotential(k1: C64, k2: C64, x0: f64) -> RatMatFun {
        let a = e(r(1.0), 0, k1).add(&e(r(1.0), 0, -k1));
        let sa = e(r(1.0), 0, k1).sub(&e(r(1.0), 0, -k1));
        let b = e((-k2 * x0).exp(), 0, k2).add(&e((k2 * x0).exp(), 0, -k2));
        let sb = e((-k2 * x0).exp(), 0, k2).sub(&e((k2 * x0).exp(), 0, -k2));
        diag_rational(at(0, 0, sa.scale(-k1), a), at(1, 1, sb.scale(-k2), b))
    }

    pub fn case1_u0(k1: C64, k2: C64) -> RatMatFun {
        RatMatFun::from_const(&cmat(-k1 * k1, r(0.0), r(0.0), -k2 * k2))
    }

    /// `Psi_11 = (k1 / ch k1 x, 0)`, `Psi_12 = (0, k2 / ch k2 (x - x0)) / 4`.
    pub fn case1_states(k1: C64, k2: C64, x0: f64) -> (RatVecFun, RatVecFun) {
        let a = e(r(1.0), 0, k1).add(&e(r(1.0), 0, -k1));
        let b = e((-k2 * x0).exp(), 0, k2).add(&e((k2 * x0).exp(), 0, -k2));
        (
            RatVecFun::new(v(ExpPoly::constant(2.0 * k1), ExpPoly::zero()), a),
            RatVecFun::new(v(ExpPoly::zero(), ExpPoly::constant(0.5 * k2)), b),
        )
    }

    /// Reduction for `Delta_1 != 0` with `C = (1 C2; C3 C4)`.
    pub fn reduction_generic(p: &Params) -> Reduction {
        let [_, _, c2, c3, c4, c5, c6, c7, c8] = p.c;
        let (k1, k2) = (p.k1, p.k2);
        let (kp, km) = (k1 + k2, k1 - k2);
        let d1 = p.d1();
        let t5 = -(c2 * c7 - c4 * c5) / d1;
        let t6 = -p.d28() / d1;
        let t7 = (c7 - c3 * c5) / d1;
        let t8 = (c8 - c3 * c6) / d1;
        let one = r(1.0);
        let wt = sum(&[e(t7, 0, kp), e(t8, 0, km), e(-t5, 0, -km), e(-t6, 0, -kp)]);
        let xt = {
            let a = m(e(t6, 0, -kp), e(-t6, 0, km), e(-t7, 0, -km), e(t7, 0, kp)).scale(kp);
            let b = m(e(t5, 0, -km), e(-t5, 0, kp), e(-t8, 0, -kp), e(t8, 0, km)).scale(km);
            RatMatFun::new(a.add(&b).neg(), wt.clone()).add(&RatMatFun::from_const(&cmat(-k1, r(0.0), r(0.0), k1)))
        };
        let u0 = RatMatFun::new(
            m(
                sum(&[e(t5, 0, -km), e(t6, 0, -kp)]),
                sum(&[e(-t5, 0, kp), e(-t6, 0, km)]),
                sum(&[e(t7, 0, -km), e(t8, 0, -kp)]),
                sum(&[e(-t7, 0, kp), e(-t8, 0, km)]),
            )
            .scale(-(k1 * k1 - k2 * k2)),
            wt.clone(),
        )
        .add(&RatMatFun::identity(2).scale(-k1 * k1));
        let s_plus = sum(&[e(t5, 0, k2), e(t6, 0, -k2)]);
        let s_minus = sum(&[e(t5, 0, k2), e(-t6, 0, -k2)]);
        let r_plus = sum(&[e(t7, 0, k2), e(t8, 0, -k2)]);
        let r_minus = sum(&[e(t7, 0, k2), e(-t8, 0, -k2)]);
        let bracket =
            m(e(t5 * t6, 0, -2.0 * k1), e(-t5 * t6, 0, r(0.0)), e(-t7 * t8, 0, r(0.0)), e(t7 * t8, 0, 2.0 * k1))
                .scale(2.0 * k2 * k2)
                .add(
                    &m(e(one, 0, r(0.0)), e(-one, 0, 2.0 * k1), e(-one, 0, -2.0 * k1), e(one, 0, r(0.0)))
                        .scale(k2 * (km * t5 * t8 - kp * t6 * t7)),
                )
                .add(
                    // off-diagonal entries corrected: printed with the factors of the other channel
                    &m(
                        s_minus.mul(&r_plus),
                        s_plus.mul(&s_minus).neg(),
                        r_minus.mul(&r_plus),
                        s_plus.mul(&r_minus).neg(),
                    )
                    .scale(k1 * k2),
                )
                .sub(
                    &m(s_plus.mul(&r_plus), s_plus.mul(&s_plus).neg(), r_plus.mul(&r_plus).neg(), s_plus.mul(&r_plus))
                        .scale(k1 * k1),
                );
        let v_minus = RatMatFun::new(bracket.scale(r(-4.0)), wt.mul(&wt));
        let psi11 = RatVecFun::new(
            vsum(&[ve(km * t5, -kp * t7, 0, k2).neg(), ve(kp * t6, -km * t8, 0, -k2).neg()]),
            wt.clone(),
        );
        let g = kp * t6 * t7 - km * t5 * t8;
        let psi12 = RatVecFun::new(
            vsum(&[ve(g, 2.0 * k2 * t7 * t8, 0, k1), ve(2.0 * k2 * t5 * t6, g, 0, -k1).neg()]),
            wt.clone(),
        );
        Reduction {
            c: cmat(one, c2, c3, c4),
            wronskian: Some(wt),
            superpotential: Some(xt),
            u0: Some(u0),
            v_minus: Some(v_minus),
            eigenstates: vec![],
            states: vec![("psi11".into(), "Psi11".into(), psi11), ("psi12".into(), "Psi12".into(), psi12)],
        }
    }

    /// Reduction for `Delta_1 = 0` with `C = (1 0; C3 -alpha)`.
    pub fn reduction_degenerate(p: &Params, alpha: C64) -> Reduction {
        let [_, _, c2, c3, _, c5, c6, c7, c8] = p.c;
        let (k1, k2) = (p.k1, p.k2);
        let one = r(1.0);
        let t7 = -(c7 - c3 * c5) / alpha;
        let t8 = -(c8 - c3 * c6) / alpha;
        let pp = sum(&[e(one, 0, k1), e(c2, 0, -k1)]);
        let pm = sum(&[e(one, 0, k1), e(-c2, 0, -k1)]);
        let rr = sum(&[e(t7, 0, k2), e(t8, 0, -k2)]);
        let rm = sum(&[e(t7, 0, k2), e(-t8, 0, -k2)]);
        let ss = sum(&[e(c5, 0, k2), e(c6, 0, -k2)]);
        let sm = sum(&[e(c5, 0, k2), e(-c6, 0, -k2)]);
        let wt = pp.mul(&rr);
        let xt = at(0, 0, pm.scale(k1), pp.clone())
            .add(&at(0, 1, sm.scale(k2), rr.clone()))
            .sub(&at(0, 1, pm.mul(&ss).scale(k1), pp.mul(&rr)))
            .add(&at(1, 1, rm.scale(k2), rr.clone()))
            .neg();
        let u0 = RatMatFun::from_const(&cmat(-k1 * k1, r(0.0), r(0.0), -k2 * k2)).add(&at(
            0,
            1,
            ss.scale(k1 * k1 - k2 * k2),
            rr.clone(),
        ));
        let p2 = pp.mul(&pp);
        let r2 = rr.mul(&rr);
        let v_minus = at(0, 0, ExpPoly::constant(8.0 * k1 * k1 * c2), p2.clone())
            .sub(&at(0, 1, ss.scale(8.0 * k1 * k1 * c2), p2.mul(&rr)))
            .add(&at(1, 1, ExpPoly::constant(8.0 * k2 * k2 * t7 * t8), r2.clone()))
            .neg()
            .add(&at(0, 1, pm.scale(4.0 * k1 * k2 * (c5 * t8 - c6 * t7)), pp.mul(&r2)))
            .sub(&at(0, 1, ExpPoly::constant(4.0 * k2 * k2 * (c5 * t8 + c6 * t7)), r2));
        let psi11 = RatVecFun::new(v(ExpPoly::constant(2.0 * k1 * c2), ExpPoly::zero()), pp);
        Reduction {
            c: cmat(one, r(0.0), c3, -alpha),
            wronskian: Some(wt),
            superpotential: Some(xt),
            u0: Some(u0),
            v_minus: Some(v_minus),
            eigenstates: vec![],
            states: vec![("psi11".into(), "Psi11".into(), psi11)],
        }
    }
}

pub mod s52 {
    use super::*;

    pub fn wronskian(p: &Params) -> ExpPoly {
        let [_, _, c2, c3, _, _, c6, c7, c8] = p.c;
        let k = p.k1;
        sum(&[e(c7, 0, 2.0 * k), e(c8 - c3 * c6 + c2 * c7, 0, r(0.0)), e(p.d28(), 0, -2.0 * k)])
    }

    pub fn superpotential(p: &Params) -> RatMatFun {
        let [_, _, c2, c3, _, _, c6, c7, c8] = p.c;
        let k = p.k1;
        let g = c8 + c3 * c6 - c2 * c7;
        let scalar = sum(&[e(c7, 0, 2.0 * k), e(-p.d28(), 0, -2.0 * k)]);
        let num = MatFun::identity(2).scale_poly(&scalar).add(&mc(g, -2.0 * c6, 2.0 * p.d38(), -g));
        RatMatFun::new(num.scale(-k), wronskian(p))
    }

    pub fn u0(p: &Params) -> RatMatFun {
        RatMatFun::identity(2).scale(-p.k1 * p.k1)
    }

    pub fn v_minus(p: &Params) -> RatMatFun {
        let [_, _, c2, c3, _, _, c6, c7, c8] = p.c;
        let k = p.k1;
        let (d28, d38) = (p.d28(), p.d38());
        let a = c2 * c7 - c3 * c6;
        let bracket = mc(a, c6, -d38, c8)
            .scale(c7)
            .scale_poly(&e(r(1.0), 0, 2.0 * k))
            .add(&mc(c8, -c6, d38, a).scale(d28).scale_poly(&e(r(1.0), 0, -2.0 * k)))
            .add(&MatFun::identity(2).scale(2.0 * c7 * d28));
        let w = wronskian(p);
        RatMatFun::new(bracket.scale(-8.0 * k * k), w.mul(&w))
    }

    /// States `Psi_1 .. Psi_4`, `Psi_9 .. Psi_12`.
    pub fn state(p: &Params, i: usize) -> Option<RatVecFun> {
        let [_, _, c2, c3, c4, _, c6, c7, c8] = p.c;
        let k = p.k1;
        let (d1, d28, d38) = (p.d1(), p.d28(), p.d38());
        let (one, zero) = (r(1.0), r(0.0));
        let w = wronskian(p);
        let two_k = |num: VecFun| Some(RatVecFun::new(num.scale(2.0 * k), w.clone()));
        match i {
            1 => two_k(vsum(&[ve(c2 * c7 - c3 * c6, -d38, 0, k), ve(one, zero, 0, -k).scale(d28)])),
            2 => two_k(vsum(&[ve(one, zero, 0, k).scale(-c7), ve(c8, d38, 0, -k).neg()])),
            3 => two_k(vsum(&[ve(c6, c8, 0, k), ve(zero, one, 0, -k).scale(d28)])),
            4 => two_k(vsum(&[ve(zero, one, 0, k).scale(-c7), ve(-c6, c2 * c7 - c3 * c6, 0, -k).neg()])),
            9 => {
                let num = vsum(&[
                    ve(one, c3, 0, 3.0 * k).scale(c7),
                    ve(c2, c4, 1, k).scale(4.0 * k * c7),
                    ve(c8 - c3 * c6, c3 * (c8 - c3 * c6) - c7 * d1, 0, k),
                    ve(c2 * c2 * c7 + c6 * d1, c2 * c4 * c7 + c8 * d1, 0, -k).neg(),
                    ve(one, c3, 1, -k).scale(4.0 * k * d28),
                    ve(c2, c4, 0, -3.0 * k).scale(-d28),
                ]);
                Some(RatVecFun::new(num.scale(-1.0 / (2.0 * k)), w.clone()))
            }
            10 => {
                let num = vsum(&[
                    ve(zero, c7, 0, 3.0 * k).scale(c7),
                    ve(c6, c8, 1, k).scale(4.0 * k * c7),
                    ve(c6, c3 * c6 - c2 * c7, 0, k).scale(-c7),
                    ve(c6 * (c8 - c3 * c6) + c2 * c6 * c7, c8 * (c8 - c3 * c6) + c4 * c6 * c7, 0, -k).neg(),
                    ve(zero, c7, 1, -k).scale(4.0 * k * d28),
                    ve(c6, c8, 0, -3.0 * k).scale(-d28),
                ]);
                Some(RatVecFun::new(num.scale(-1.0 / (2.0 * k)), w.clone()))
            }
            11 => two_k(vsum(&[ve(c2, c4, 0, k).scale(c7), ve(one, c3, 0, -k).scale(d28)])),
            12 => two_k(vsum(&[ve(c6, c8, 0, k), ve(zero, one, 0, -k).scale(d28)]).scale(c7)),
            _ => None,
        }
    }

    /// Root used by the diagonalizing reduction; principal branch unless the
    /// side condition `C8 + C2C7 - C3C6 - Delta != 0` fails.
    pub fn delta_root(p: &Params) -> C64 {
        let [_, _, c2, c3, _, _, c6, c7, c8] = p.c;
        let g = c8 + c3 * c6 - c2 * c7;
        let d = (g * g - 4.0 * c6 * p.d38()).sqrt();
        let side = c8 + c2 * c7 - c3 * c6;
        if (side - d).norm() <= 1e-12 * 1f64.max(side.norm()) {
            -d
        } else {
            d
        }
    }

    fn pt_diag(k: C64, a: C64, b: C64, c: C64) -> RatMatFun {
        // -diag(8k^2 a / [e^{kx} + a e^{-kx}]^2, 8k^2 b c / [b e^{kx} + c e^{-kx}]^2)
        let one = r(1.0);
        let pa = sum(&[e(one, 0, k), e(a, 0, -k)]);
        let pb = sum(&[e(b, 0, k), e(c, 0, -k)]);
        at(0, 0, ExpPoly::constant(-8.0 * k * k * a), pa.mul(&pa)).add(&at(
            1,
            1,
            ExpPoly::constant(-8.0 * k * k * b * c),
            pb.mul(&pb),
        ))
    }

    /// Reduction to a diagonal potential for `C6 != 0` and a nonzero
    /// determinant of the constant matrix in the superpotential.
    ///
    /// The matrix is the one implied by the printed reduced transformation
    /// functions.
    pub fn reduction_diagonal(p: &Params) -> Reduction {
        let [_, _, c2, c3, _, _, c6, c7, c8] = p.c;
        let k = p.k1;
        let d = delta_root(p);
        let side = c8 + c2 * c7 - c3 * c6;
        let t2 = 2.0 * p.d28() / (side - d);
        let t8 = 0.5 * (side - d);
        let a = (t2 - c2) / c6;
        let b = (d - c8 + c2 * c7 + c3 * c6) / (2.0 * d);
        let c = cmat(r(1.0), -c6 / d, c3 + a * c7, b - c3 * c6 / d);
        let one = r(1.0);
        let pa = sum(&[e(one, 0, k), e(t2, 0, -k)]);
        let pb = sum(&[e(c7, 0, k), e(t8, 0, -k)]);
        Reduction {
            c,
            wronskian: Some(pa.mul(&pb)),
            superpotential: None,
            u0: Some(RatMatFun::identity(2).scale(-k * k)),
            v_minus: Some(pt_diag(k, t2, c7, t8)),
            eigenstates: vec![
                ("psi1".into(), -k * k, RatVecFun::new(v(ExpPoly::one(), ExpPoly::zero()), pa)),
                ("psi2".into(), -k * k, RatVecFun::new(v(ExpPoly::zero(), ExpPoly::one()), pb)),
            ],
            states: vec![],
        }
    }

    /// The matrix printed next to the diagonalizing reduction; identical to
    /// the one of the `C6 = 0` reduction.
    pub fn reduction_diagonal_printed_matrix(p: &Params) -> CMat {
        let [_, _, c2, _, _, _, _, c7, c8] = p.c;
        cmat(r(1.0), r(0.0), p.d38() / (c8 - c2 * c7), r(1.0))
    }

    /// Reduction for `C6 = 0`.
    pub fn reduction_c6_zero(p: &Params) -> Reduction {
        let [_, _, c2, _, _, _, _, c7, c8] = p.c;
        let k = p.k1;
        let one = r(1.0);
        let pa = sum(&[e(one, 0, k), e(c2, 0, -k)]);
        let ma = sum(&[e(one, 0, k), e(-c2, 0, -k)]);
        let pb = sum(&[e(c7, 0, k), e(c8, 0, -k)]);
        let mb = sum(&[e(c7, 0, k), e(-c8, 0, -k)]);
        let xt = at(0, 0, ma.scale(-k), pa.clone()).add(&at(1, 1, mb.scale(-k), pb.clone()));
        Reduction {
            c: cmat(one, r(0.0), p.d38() / (c8 - c2 * c7), one),
            wronskian: Some(pa.mul(&pb)),
            superpotential: Some(xt),
            u0: Some(RatMatFun::identity(2).scale(-k * k)),
            v_minus: Some(pt_diag(k, c2, c7, c8)),
            eigenstates: vec![],
            states: vec![],
        }
    }

    /// `C6 = C3C8 - C4C7 = 0` with a vanishing determinant: scalar well.
    pub fn scalar_well(p: &Params) -> Reduction {
        let [_, _, c2, c3, _, _, _, c7, _] = p.c;
        let k = p.k1;
        let one = r(1.0);
        let pa = sum(&[e(one, 0, k), e(c2, 0, -k)]);
        let ma = sum(&[e(one, 0, k), e(-c2, 0, -k)]);
        let xt = RatMatFun::new(MatFun::identity(2).scale_poly(&ma.scale(-k)), pa.clone());
        let vm = RatMatFun::new(MatFun::identity(2).scale(-8.0 * k * k * c2), pa.mul(&pa));
        Reduction {
            c: linalg::identity(2),
            wronskian: Some(pa.mul(&pa).scale(c7)),
            superpotential: Some(xt),
            u0: Some(RatMatFun::identity(2).scale(-k * k)),
            v_minus: Some(vm),
            eigenstates: vec![],
            states: vec![
                (
                    "psi11".into(),
                    "Psi11".into(),
                    RatVecFun::new(v(ExpPoly::one(), ExpPoly::constant(c3)).scale(2.0 * k * c2), pa.clone()),
                ),
                (
                    "psi12".into(),
                    "Psi12".into(),
                    RatVecFun::new(v(ExpPoly::zero(), ExpPoly::one()).scale(2.0 * k * c2 * c7), pa),
                ),
            ],
        }
    }
}

pub mod s53 {
    use super::*;

    pub fn m1(p: &Params) -> MatFun {
        let c3 = p.c[3];
        mc(c3, r(-1.0), c3 * c3, -c3)
    }

    pub fn m2(p: &Params) -> MatFun {
        let [_, _, c2, _, c4, ..] = p.c;
        mc(c2 * c4, -c2 * c2, c4 * c4, -c2 * c4)
    }

    pub fn m3(p: &Params) -> MatFun {
        let [_, _, c2, c3, c4, ..] = p.c;
        mc(c4 + c2 * c3, -2.0 * c2, 2.0 * c3 * c4, -c4 - c2 * c3)
    }

    pub fn m4(p: &Params) -> MatFun {
        let [_, _, _, _, _, _, c6, _, c8] = p.c;
        let a = c8 - p.d27();
        mc(a, -2.0 * c6, 2.0 * p.d38(), -a)
    }

    pub fn wronskian(p: &Params) -> ExpPoly {
        let [_, _, _, _, _, _, _, c7, c8] = p.c;
        let k = p.k1;
        sum(&[e(-c7, 0, 2.0 * k), e(-p.d28(), 0, -2.0 * k), e(-p.d1() / k, 1, r(0.0)), e(-(c8 + p.d27()), 0, r(0.0))])
    }

    pub fn superpotential(p: &Params) -> RatMatFun {
        let c7 = p.c[7];
        let k = p.k1;
        let scalar = sum(&[e(k * c7, 0, 2.0 * k), e(-k * p.d28(), 0, -2.0 * k), e(p.d1() / (2.0 * k), 0, r(0.0))]);
        let num = MatFun::identity(2)
            .scale_poly(&scalar)
            .add(&m1(p).scale(1.0 / (2.0 * k)).scale_poly(&e(r(1.0), 0, 2.0 * k)))
            .sub(&m2(p).scale(1.0 / (2.0 * k)).scale_poly(&e(r(1.0), 0, -2.0 * k)))
            .add(&m3(p).scale_poly(&ExpPoly::x()))
            .add(&m4(p).scale(k));
        RatMatFun::new(num, wronskian(p))
    }

    pub fn u0(p: &Params) -> RatMatFun {
        let k = p.k1;
        let num = m1(p).scale_poly(&e(r(1.0), 0, 2.0 * k)).add(&m2(p).scale_poly(&e(r(1.0), 0, -2.0 * k))).add(&m3(p));
        RatMatFun::new(num, wronskian(p)).add(&RatMatFun::identity(2).scale(-k * k))
    }

    /// The explicit matrix form of `U0` printed alongside the `M` expansion.
    pub fn u0_explicit(p: &Params) -> RatMatFun {
        let [_, _, c2, c3, c4, ..] = p.c;
        let k = p.k1;
        let pp = sum(&[e(r(1.0), 0, k), e(c2, 0, -k)]);
        let qq = sum(&[e(c3, 0, k), e(c4, 0, -k)]);
        let num = m(pp.mul(&qq), pp.mul(&pp).neg(), qq.mul(&qq), pp.mul(&qq).neg());
        RatMatFun::new(num, wronskian(p)).add(&RatMatFun::identity(2).scale(-k * k))
    }

    pub fn v_minus(p: &Params) -> RatMatFun {
        let [_, _, _, _, _, _, _, c7, c8] = p.c;
        let k = p.k1;
        let (d1, d27, d28) = (p.d1(), p.d27(), p.d28());
        let g = c8 + d27;
        let x = ExpPoly::x();
        let ep = e(r(1.0), 0, 2.0 * k);
        let em = e(r(1.0), 0, -2.0 * k);
        let plus = sum(&[ep.scale(c7), em.scale(d28)]);
        let minus = sum(&[ep.scale(c7), em.scale(-d28)]);
        let lin = sum(&[x.scale(d1), ExpPoly::constant(k * g)]);
        let scalar = sum(&[
            lin.mul(&plus).scale(-2.0 * k),
            minus.scale(2.0 * d1),
            ExpPoly::constant(-8.0 * k * k * c7 * d28 + d1 * d1 / (2.0 * k * k)),
        ]);
        let f1 = sum(&[e(d1 / k, 1, 2.0 * k), e(g - d1 / (2.0 * k * k), 0, 2.0 * k), ExpPoly::constant(4.0 * d28)]);
        let f2 = sum(&[e(d1 / k, 1, -2.0 * k), e(g + d1 / (2.0 * k * k), 0, -2.0 * k), ExpPoly::constant(4.0 * c7)]);
        let f3 = sum(&[x.mul(&minus).scale(2.0 * k), plus.neg()]);
        let f4 = minus.scale(2.0 * k * k);
        let num = MatFun::identity(2)
            .scale_poly(&scalar)
            .sub(&m1(p).scale_poly(&f1))
            .sub(&m2(p).scale_poly(&f2))
            .add(&m3(p).scale_poly(&f3))
            .add(&m4(p).scale_poly(&f4));
        let w = wronskian(p);
        RatMatFun::new(num.scale(r(2.0)), w.mul(&w))
    }

    /// `a x^2 + b x + c` times `e^{k x}`.
    fn q(a: C64, b: C64, c: C64, k: C64) -> ExpPoly {
        sum(&[e(a, 2, k), e(b, 1, k), e(c, 0, k)])
    }

    /// States `Psi_{i,j}` for `i = 1..4`, `j = 0, 1`, and `Psi_{5,0}`.
    pub fn state(p: &Params, i: usize, j: usize) -> Option<RatVecFun> {
        let [_, _, c2, c3, c4, _, c6, c7, c8] = p.c;
        let k = p.k1;
        let (d1, d27, d28, d38) = (p.d1(), p.d27(), p.d28(), p.d38());
        let g = c8 + d27;
        let kk = 4.0 * k * k;
        let (one, zero) = (r(1.0), r(0.0));
        let w = wronskian(p);
        let half = |num: VecFun| Some(RatVecFun::new(num.scale(1.0 / (2.0 * k)), w.clone()));
        let quarter = |num: VecFun| Some(RatVecFun::new(num.scale(1.0 / kk), w.clone()));
        match (i, j) {
            (1, 0) => half(vsum(&[
                ve(one, c3, 0, 3.0 * k).scale(c3),
                ve(c2, c4, 1, k).scale(4.0 * k * c3),
                ve(kk * d27 - d1, -kk * d38, 0, k).neg(),
                ve(kk * d28 + c2 * c4, c4 * c4, 0, -k).neg(),
            ])),
            (1, 1) => quarter(vsum(&[
                v(q(zero, c3, -2.0 * k * c7, 3.0 * k), q(zero, c3 * c3, zero, 3.0 * k)).neg(),
                v(q(zero, kk * d28 + c2 * c4, 2.0 * k * d28, -k), q(zero, c4 * c4, zero, -k)),
                v(q(4.0 * k * c2 * c3, -(d1 + kk * d27), -2.0 * k * g, k), q(4.0 * k * c3 * c4, kk * d38, zero, k))
                    .neg(),
            ])),
            (2, 0) => half(vsum(&[
                ve(c2, c4, 0, -3.0 * k).scale(-c4),
                ve(one, c3, 1, -k).scale(4.0 * k * c4),
                ve(kk * c8 + d1, kk * d38, 0, -k),
                ve(kk * c7 + c3, c3 * c3, 0, k),
            ])),
            // printed with e^{-3x}; the rate must be -3k for the terms to balance
            (2, 1) => quarter(vsum(&[
                v(q(zero, c2 * c4, 2.0 * k * d28, -3.0 * k), q(zero, c4 * c4, zero, -3.0 * k)).neg(),
                v(q(zero, kk * c7 + c3, -2.0 * k * c7, k), q(zero, c3 * c3, zero, k)),
                v(q(4.0 * k * c4, -(d1 - kk * c8), -2.0 * k * g, -k), q(4.0 * k * c3 * c4, kk * d38, zero, -k)),
            ])),
            (3, 0) => half(vsum(&[
                ve(one, c3, 0, 3.0 * k).neg(),
                ve(c2, c4, 1, k).scale(-4.0 * k),
                ve(kk * c6, kk * c8 - d1, 0, k).neg(),
                ve(c2 * c2, -kk * d28 + c2 * c4, 0, -k),
            ])),
            (3, 1) => quarter(vsum(&[
                v(q(zero, one, zero, 3.0 * k), q(zero, c3, 2.0 * k * c7, 3.0 * k)),
                v(q(zero, c2 * c2, zero, -k), q(zero, -(kk * d28 - c2 * c4), -2.0 * k * d28, -k)).neg(),
                v(q(4.0 * k * c2, kk * c6, zero, k), q(4.0 * k * c4, d1 + kk * c8, 2.0 * k * g, k)),
            ])),
            (4, 0) => half(vsum(&[
                ve(c2, c4, 0, -3.0 * k).scale(c2),
                ve(one, c3, 1, -k).scale(-4.0 * k * c2),
                ve(kk * c6, -kk * d27 - d1, 0, -k).neg(),
                ve(one, -kk * c7 + c3, 0, k).neg(),
            ])),
            (4, 1) => quarter(vsum(&[
                v(q(zero, c2 * c2, zero, -3.0 * k), q(zero, c2 * c4, -2.0 * k * d28, -3.0 * k)),
                v(q(zero, one, zero, k), q(zero, -(kk * c7 - c3), 2.0 * k * c7, k)).neg(),
                v(q(4.0 * k * c2, kk * c6, zero, -k), q(4.0 * k * c2 * c3, d1 - kk * d27, 2.0 * k * g, -k)).neg(),
            ])),
            (5, 0) => {
                let h = d1 / (2.0 * k * k);
                half(vsum(&[
                    ve(zero, c7, 0, 3.0 * k).scale(c7),
                    ve(2.0 * c2 * c7 - h, 2.0 * c4 * c7 - c3 * h, 2, k),
                    ve(4.0 * k * c6 * c7 - g / k, 4.0 * k * c7 * c8 - c3 * g / k, 1, k),
                    ve(c6, -d27, 0, k).scale(-c7),
                    ve(c6 * g, c8 * c8 - c6 * d38, 0, -k).neg(),
                    ve(-c2 * g / k, 4.0 * k * c7 * d28 - c4 * g / k, 1, -k),
                    ve(2.0 * d28 + c2 * h, 2.0 * c3 * d28 + c4 * h, 2, -k).neg(),
                    ve(c6, c8, 0, -3.0 * k).scale(-d28),
                ]))
            }
            _ => None,
        }
    }

    /// `Psi_{6,0} = Psi_{1,0} + C3 Psi_{3,0}` and
    /// `Psi_{6,1} = Psi_{1,1} + C3 Psi_{3,1} + C7 Psi_{3,0}` from the closed forms above.
    pub fn jordan_pair(p: &Params) -> (RatVecFun, RatVecFun) {
        let [_, _, _, c3, _, _, _, c7, _] = p.c;
        let s = |i, j| state(p, i, j).unwrap();
        let psi0 = s(1, 0).add(&s(3, 0).scale(c3));
        let psi1 = s(1, 1).add(&s(3, 1).scale(c3)).add(&s(3, 0).scale(c7));
        (psi0, psi1)
    }

    /// The alternative expressions `-C2 Psi_{2,0} - C4 Psi_{4,0}` and
    /// `-C2 Psi_{2,1} - C4 Psi_{4,1} - C6 Psi_{2,0} - C8 Psi_{4,0}`.
    pub fn jordan_pair_alt(p: &Params) -> (RatVecFun, RatVecFun) {
        let [_, _, c2, _, c4, _, c6, _, c8] = p.c;
        let s = |i, j| state(p, i, j).unwrap();
        let psi0 = s(2, 0).scale(-c2).sub(&s(4, 0).scale(c4));
        let psi1 = s(2, 1).scale(-c2).sub(&s(4, 1).scale(c4)).sub(&s(2, 0).scale(c6)).sub(&s(4, 0).scale(c8));
        (psi0, psi1)
    }

    /// Reduction for `Delta_1 != 0` with `C = (1 C2; C3 C4)`.
    pub fn reduction_generic(p: &Params) -> Reduction {
        let [_, _, c2, c3, c4, _, _, c7, c8] = p.c;
        let k = p.k1;
        let d1 = p.d1();
        let t6 = -p.d28() / d1;
        let t7 = c7 / d1;
        let t8 = (c8 + p.d27()) / d1;
        let (one, zero) = (r(1.0), r(0.0));
        let iq = one / (4.0 * k * k);
        let x = ExpPoly::x();
        let lin = sum(&[x.clone(), ExpPoly::constant(k * t8)]);
        let wt = sum(&[e(-t7, 0, 2.0 * k), e(t6, 0, -2.0 * k), lin.scale(-one / k)]);
        let xt = {
            let scalar = sum(&[e(t7, 0, 2.0 * k), e(t6, 0, -2.0 * k), ExpPoly::constant(one / (2.0 * k * k))]);
            let mat = m(
                lin.scale(one / (2.0 * k)),
                sum(&[e(iq, 0, 2.0 * k), ExpPoly::constant(t6)]).neg(),
                sum(&[ExpPoly::constant(t7), e(iq, 0, -2.0 * k)]).neg(),
                lin.scale(-one / (2.0 * k)),
            );
            let num = MatFun::identity(2).scale_poly(&scalar).add(&mat.scale(r(2.0)));
            RatMatFun::new(num.scale(k), wt.clone())
        };
        let u0 = RatMatFun::new(
            m(ExpPoly::one(), e(-one, 0, 2.0 * k), e(one, 0, -2.0 * k), ExpPoly::constant(-one)),
            wt.clone(),
        )
        .add(&RatMatFun::identity(2).scale(-k * k));
        let a = sum(&[e(t7, 0, k), e(iq, 0, -k)]);
        let b = sum(&[e(iq, 0, k), e(t6, 0, -k)]);
        let part1 = m(e(t6, 0, -2.0 * k), e(iq, 0, 2.0 * k), e(-iq, 0, -2.0 * k), e(-t7, 0, 2.0 * k)).scale_poly(&lin);
        let part2 = mc(iq, t6, -t7, -iq).scale_poly(&sum(&[e(t7, 0, 2.0 * k), e(-t6, 0, -2.0 * k)]).scale(-k));
        let part3 = m(a.mul(&b), b.mul(&b).neg(), a.mul(&a).neg(), a.mul(&b)).scale(2.0 * k);
        let v_minus = RatMatFun::new(part1.add(&part2).add(&part3).scale(8.0 * k), wt.mul(&wt));
        let psi10 = RatVecFun::new(v(b.clone(), a.neg()).scale(2.0 * k), wt.clone());
        let _ = zero;
        Reduction {
            c: cmat(one, c2, c3, c4),
            wronskian: Some(wt),
            superpotential: Some(xt),
            u0: Some(u0),
            v_minus: Some(v_minus),
            eigenstates: vec![],
            states: vec![("psi1_0".into(), "Psi6_0".into(), psi10)],
        }
    }

    /// Reduction for `Delta_1 = 0` with `C = (1 0; C3 -alpha)`.
    pub fn reduction_degenerate(p: &Params, alpha: C64) -> Reduction {
        let [_, _, c2, c3, _, _, c6, c7, c8] = p.c;
        let k = p.k1;
        let one = r(1.0);
        let t7 = -c7 / alpha;
        let t8 = -(c8 - c3 * c6) / alpha;
        let pp = sum(&[e(one, 0, k), e(c2, 0, -k)]);
        let pm = sum(&[e(one, 0, k), e(-c2, 0, -k)]);
        let rr = sum(&[e(t7, 0, k), e(t8, 0, -k)]);
        let rm = sum(&[e(t7, 0, k), e(-t8, 0, -k)]);
        let wt = pp.mul(&rr).neg();
        let lin = sum(&[e(c2, 1, r(0.0)), ExpPoly::constant(k * c6)]);
        let xt = at(0, 0, pm.scale(k), pp.clone())
            .sub(&at(
                0,
                1,
                sum(&[e(one, 0, 2.0 * k), e(-c2 * c2, 0, -2.0 * k), lin.scale(4.0 * k)]).scale(one / (2.0 * k)),
                pp.mul(&rr),
            ))
            .add(&at(1, 1, rm.scale(k), rr.clone()))
            .neg();
        let u0 = RatMatFun::identity(2).scale(-k * k).add(&at(0, 1, pp.clone(), rr.clone()));
        let p2 = pp.mul(&pp);
        let r2 = rr.mul(&rr);
        let v_minus = at(0, 0, ExpPoly::constant(8.0 * k * k * c2), p2.clone())
            .add(&at(0, 1, lin.mul(&sum(&[e(t7, 0, 2.0 * k), e(-c2 * t8, 0, -2.0 * k)])).scale(8.0 * k), p2.mul(&r2)))
            .add(&at(1, 1, ExpPoly::constant(8.0 * k * k * t7 * t8), r2.clone()))
            .neg()
            .add(&at(0, 1, ExpPoly::constant(2.0 * (t8 + c2 * t7)), r2))
            .add(&at(0, 1, ExpPoly::constant(4.0 * c2), pp.mul(&rr)));
        let psi10 = RatVecFun::new(v(ExpPoly::constant(2.0 * k * c2), ExpPoly::zero()), pp);
        Reduction {
            c: cmat(one, r(0.0), c3, -alpha),
            wronskian: Some(wt),
            superpotential: Some(xt),
            u0: Some(u0),
            v_minus: Some(v_minus),
            eigenstates: vec![],
            states: vec![("psi1_0".into(), "Psi6_0".into(), psi10)],
        }
    }
}
