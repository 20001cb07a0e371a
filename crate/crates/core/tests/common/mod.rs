//! Strategies and property cases shared by the property and acceptance suites.
#![allow(dead_code)]

use proptest::prelude::*;
use specdesign::expalg::{ExpPoly, ExpTerm};
use specdesign::matfun::MatFun;
use specdesign::C64;

pub fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

/// Mostly rates from a small pool, so products and sums collide and merge.
pub fn rate() -> impl Strategy<Value = C64> {
    let pool = [
        C64::new(0.0, 0.0),
        C64::new(0.5, 0.0),
        C64::new(-0.5, 0.0),
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(0.0, -1.0),
        C64::new(0.3, 0.7),
        C64::new(-0.3, -0.7),
        C64::new(1.2, 0.0),
    ];
    prop_oneof![
        4 => proptest::sample::select(pool.to_vec()),
        1 => complex(1.2),
    ]
}

pub fn term() -> impl Strategy<Value = ExpTerm> {
    (complex(2.0), 0u32..=2, rate()).prop_map(|(c, m, k)| ExpTerm::new(c, m, k))
}

pub fn terms(max: usize) -> impl Strategy<Value = Vec<ExpTerm>> {
    proptest::collection::vec(term(), 0..=max)
}

pub fn poly(max: usize) -> impl Strategy<Value = ExpPoly> {
    terms(max).prop_map(ExpPoly::canonicalize)
}

pub fn matrix(n: usize, max_terms: usize) -> impl Strategy<Value = MatFun> {
    proptest::collection::vec(poly(max_terms), n * n).prop_map(move |v| MatFun::from_fn(n, |i, j| v[i * n + j].clone()))
}

fn same(what: &str, a: &ExpPoly, b: &ExpPoly) -> Result<(), String> {
    if a.sub(b).is_zero() {
        Ok(())
    } else {
        Err(format!("{what}: difference {}", a.sub(b)))
    }
}

pub fn ring_case(a: &ExpPoly, b: &ExpPoly, c: &ExpPoly) -> Result<(), String> {
    same("a + b = b + a", &a.add(b), &b.add(a))?;
    same("ab = ba", &a.mul(b), &b.mul(a))?;
    same("(a + b) + c", &a.add(b).add(c), &a.add(&b.add(c)))?;
    same("(ab)c", &a.mul(b).mul(c), &a.mul(&b.mul(c)))?;
    same("a(b + c)", &a.mul(&b.add(c)), &a.mul(b).add(&a.mul(c)))?;
    if !a.add(&a.neg()).is_zero() {
        return Err("a + (-a) is not zero".into());
    }
    Ok(())
}

pub fn product_rule_case(a: &ExpPoly, b: &ExpPoly) -> Result<(), String> {
    let lhs = a.mul(b).differentiate();
    let rhs = a.differentiate().mul(b).add(&a.mul(&b.differentiate()));
    same("(ab)'", &lhs, &rhs)
}

pub fn eval_case(a: &ExpPoly, b: &ExpPoly, x: f64) -> Result<(), String> {
    let (sa, sb) = (a.magnitude_scale(x), b.magnitude_scale(x));
    let prod = (a.mul(b).eval(x) - a.eval(x) * b.eval(x)).norm();
    if prod > 1e-12 * sa * sb {
        return Err(format!("product at {x}: error {prod:e}, scale {:e}", sa * sb));
    }
    let sum = (a.add(b).eval(x) - (a.eval(x) + b.eval(x))).norm();
    if sum > 1e-12 * (sa + sb) {
        return Err(format!("sum at {x}: error {sum:e}"));
    }
    Ok(())
}

/// Leibniz expansion of a 3x3 determinant.
pub fn leibniz3(m: &MatFun) -> ExpPoly {
    const PERMS: [([usize; 3], f64); 6] =
        [([0, 1, 2], 1.0), ([1, 2, 0], 1.0), ([2, 0, 1], 1.0), ([0, 2, 1], -1.0), ([2, 1, 0], -1.0), ([1, 0, 2], -1.0)];
    PERMS.iter().fold(ExpPoly::zero(), |acc, (p, s)| {
        let prod = m.get(0, p[0]).mul(m.get(1, p[1])).mul(m.get(2, p[2]));
        acc.add(&prod.scale(C64::new(*s, 0.0)))
    })
}

pub fn det_case(m: &MatFun) -> Result<(), String> {
    same("cofactor vs Leibniz", &m.det(), &leibniz3(m))
}
