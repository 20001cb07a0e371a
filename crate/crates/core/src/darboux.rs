//! First-order and order-N intertwining operators built from a kernel basis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expalg::ExpPoly;
use crate::linalg::{self, CMat};
use crate::matfun::{common_denominator, MatFun, RatMatFun, RatVecFun, VecFun};
use crate::model::{t_matrix, DiffOp, Hamiltonian, IntertwiningOperator, ModelError, TransformationSet};
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DarbouxError {
    #[error("Wronskian vanishes identically")]
    DegenerateWronskian,
    #[error("entry {0} does not satisfy its chain equation for the given potential")]
    SetInconsistentWithPotential(usize),
    #[error("leading coefficient is singular")]
    SingularLeading,
    #[error("the two routes to U0 disagree")]
    U0RouteMismatch,
    #[error("kernel size {got} is not a multiple of the channel count {n}")]
    KernelSize { n: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Kernel function with rational components: `H psi_l = lambda_l psi_l + sigma_l psi_{l+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelEntry {
    pub psi: RatVecFun,
    pub lambda: C64,
    pub sigma: u8,
}

pub fn kernel_from_set(set: &TransformationSet) -> Vec<KernelEntry> {
    set.entries
        .iter()
        .enumerate()
        .map(|(l, e)| KernelEntry { psi: RatVecFun::from_exp(e.phi.clone()), lambda: e.lambda, sigma: set.sigma(l) })
        .collect()
}

/// Checks `(H - lambda_l) psi_l - sigma_l psi_{l+1} == 0` for every entry.
pub fn check_consistency(h: &Hamiltonian, kernel: &[KernelEntry]) -> Result<(), DarbouxError> {
    for (l, e) in kernel.iter().enumerate() {
        let mut r = h.apply_shifted(e.lambda, &e.psi)?;
        if e.sigma == 1 && l + 1 < kernel.len() {
            r = r.sub(&kernel[l + 1].psi);
        }
        if !r.is_zero() {
            return Err(DarbouxError::SetInconsistentWithPotential(l));
        }
    }
    Ok(())
}

/// `X~0 = -Phi' Phi^{-1}` with `Phi` the matrix of columns `Phi_l`.
pub fn superpotential(set: &TransformationSet) -> Result<RatMatFun, DarbouxError> {
    let phi = set.phi_matrix();
    let inv = phi.adjugate_inverse().map_err(|_| DarbouxError::DegenerateWronskian)?;
    Ok(RatMatFun::new(phi.differentiate().mul(&inv.num).neg(), inv.den))
}

/// Column `l` of `X~0` by Cramer's rule: `-(1/W) det(rows with column l replaced by Phi')`,
/// one component at a time.
pub fn superpotential_by_columns(set: &TransformationSet) -> Result<RatMatFun, DarbouxError> {
    let n = set.n;
    let rows = MatFun::from_fn(n, |m, c| set.entries[m].phi.entries[c].clone());
    let w = rows.det();
    if w.is_zero() {
        return Err(DarbouxError::DegenerateWronskian);
    }
    let d: Vec<VecFun> = set.entries.iter().map(|e| e.phi.differentiate()).collect();
    let num = MatFun::from_fn(n, |i, l| {
        let col = VecFun::new((0..n).map(|m| d[m].entries[i].clone()).collect());
        rows.with_column(l, &col).det().neg()
    });
    Ok(RatMatFun::new(num, w))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderBuild {
    pub q_minus: IntertwiningOperator,
    pub q_plus: IntertwiningOperator,
    pub h_minus: Hamiltonian,
    pub superpotential: RatMatFun,
    pub u0: RatMatFun,
    pub u: RatMatFun,
    pub v0: RatMatFun,
    pub wronskian: ExpPoly,
}

/// `U0 = Phi T^t Phi^{-1}`
pub fn u0_via_transformation_matrix(set: &TransformationSet) -> Result<RatMatFun, DarbouxError> {
    let phi = set.phi_matrix();
    let inv = phi.adjugate_inverse().map_err(|_| DarbouxError::DegenerateWronskian)?;
    let tt = t_matrix(set)?.transpose();
    Ok(RatMatFun::new(phi.mul(&MatFun::from_const(&tt)).mul(&inv.num), inv.den))
}

pub fn build_first_order(
    set: &TransformationSet,
    x1: &CMat,
    h_plus: &Hamiltonian,
) -> Result<FirstOrderBuild, DarbouxError> {
    let x1_inv = linalg::inverse(x1).ok_or(DarbouxError::SingularLeading)?;
    let xt = superpotential(set)?;
    check_consistency(h_plus, &kernel_from_set(set))?;
    let n = set.n;
    let xt_d = xt.differentiate();

    let u0 = h_plus.potential.add(&xt_d).sub(&xt.mul(&xt));
    let u0_t = u0_via_transformation_matrix(set)?;
    if !u0.sub(&u0_t).is_zero() {
        return Err(DarbouxError::U0RouteMismatch);
    }

    let q_minus = IntertwiningOperator::new(x1.clone(), vec![xt.mul_const_left(x1)])?;
    let q_plus = IntertwiningOperator::new(-x1_inv.clone(), vec![xt.mul_const_right(&x1_inv)])?;
    let v_minus = h_plus.potential.add(&xt_d.scale(C64::new(2.0, 0.0))).mul_const_left(x1).mul_const_right(&x1_inv);
    let u = u0.mul_const_left(x1).mul_const_right(&x1_inv);
    let v0 = u0.add(&xt.mul(&xt));
    debug_assert_eq!(v0.n(), n);
    Ok(FirstOrderBuild {
        q_minus,
        q_plus,
        h_minus: Hamiltonian::new(v_minus),
        wronskian: xt.den.clone(),
        superpotential: xt,
        u0,
        u,
        v0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderNBuild {
    pub q: IntertwiningOperator,
    pub h_minus: Hamiltonian,
    /// Determinant of the kernel matrix after clearing denominators.
    pub wronskian: ExpPoly,
}

/// Lower coefficients of the operator with leading coefficient `I` whose
/// kernel is spanned by the given functions.
///
/// For exponential-polynomial kernels with `M` the matrix of derivatives,
/// `X_j[i][c] = -det(M with column (j n + c) <- (psi_l^(N)[i])_l) / det M`.
fn monic_kernel_coefficients(n: usize, psis: &[RatVecFun]) -> Result<(Vec<RatMatFun>, ExpPoly), DarbouxError> {
    let dim = psis.len();
    if dim == 0 || !dim.is_multiple_of(n) {
        return Err(DarbouxError::KernelSize { n, got: dim });
    }
    let order = dim / n;
    let (nums, den) = common_denominator(psis);
    if den.as_constant().is_none() {
        return conjugated_by_denominator(n, order, &nums, &den);
    }
    let inv = C64::new(1.0, 0.0) / den.as_constant().unwrap_or(C64::new(1.0, 0.0));
    let base: Vec<RatVecFun> = nums.iter().map(|v| RatVecFun::from_exp(v.scale(inv))).collect();
    let derivs: Vec<Vec<RatVecFun>> = base.iter().map(|p| p.derivatives(order)).collect();
    let m = MatFun::from_fn(dim, |l, c| derivs[l][c / n].num.entries[c % n].clone());
    let w = m.det();
    if w.is_zero() {
        return Err(DarbouxError::DegenerateWronskian);
    }
    let cols: Vec<Vec<ExpPoly>> =
        (0..n).map(|i| (0..dim).map(|l| derivs[l][order].num.entries[i].clone()).collect()).collect();
    let dets: Vec<Vec<ExpPoly>> = crate::par::map(&(0..dim).collect::<Vec<_>>(), |&col| {
        (0..n)
            .map(|i| {
                let v = VecFun::new(cols[i].clone());
                m.with_column(col, &v).det().neg()
            })
            .collect()
    });
    let coeffs =
        (0..order).map(|j| RatMatFun::new(MatFun::from_fn(n, |i, c| dets[j * n + c][i].clone()), w.clone())).collect();
    Ok((coeffs, w))
}

/// Kernel `N_l / D`: the operator is `D^{-1} Q^ D` with `Q^` the monic operator
/// annihilating the numerators, so
/// `X_i = sum_{j >= i} C(j, i) X^_j D^(j-i) / D`.
fn conjugated_by_denominator(
    n: usize,
    order: usize,
    nums: &[VecFun],
    den: &ExpPoly,
) -> Result<(Vec<RatMatFun>, ExpPoly), DarbouxError> {
    let plain: Vec<RatVecFun> = nums.iter().map(|v| RatVecFun::from_exp(v.clone())).collect();
    let (hat, w) = monic_kernel_coefficients(n, &plain)?;
    let dd: Vec<ExpPoly> = (0..=order).map(|k| den.nth_derivative(k)).collect();
    let shared = w.mul(den);
    let binom = |j: usize, i: usize| (0..i).fold(1.0, |acc, t| acc * (j - t) as f64 / (t + 1) as f64);
    let coeffs = (0..order)
        .map(|i| {
            let num = MatFun::from_fn(n, |r, c| {
                let mut acc =
                    if r == c { w.mul(&dd[order - i]).scale(C64::new(binom(order, i), 0.0)) } else { ExpPoly::zero() };
                for j in i..order {
                    acc = acc.add(&hat[j].num.get(r, c).mul(&dd[j - i]).scale(C64::new(binom(j, i), 0.0)));
                }
                acc
            });
            RatMatFun::new(num, shared.clone())
        })
        .collect();
    Ok((coeffs, w))
}

/// Builds `Q` with leading `xn` and kernel `kernel`, plus the partner of `h`:
/// `V' = X_N V X_N^{-1} + 2 X_{N-1}' X_N^{-1}`.
pub fn build_from_kernel(kernel: &[KernelEntry], xn: &CMat, h: &Hamiltonian) -> Result<OrderNBuild, DarbouxError> {
    let n = h.n;
    let xn_inv = linalg::inverse(xn).ok_or(DarbouxError::SingularLeading)?;
    let psis: Vec<RatVecFun> = kernel.iter().map(|e| e.psi.clone()).collect();
    let (monic, w) = monic_kernel_coefficients(n, &psis)?;
    check_consistency(h, kernel)?;
    let order = monic.len();
    let lower: Vec<RatMatFun> = monic.iter().map(|x| x.mul_const_left(xn)).collect();
    let top = lower[order - 1].differentiate().mul_const_right(&xn_inv);
    let v_minus = h.potential.mul_const_left(xn).mul_const_right(&xn_inv).add(&top.scale(C64::new(2.0, 0.0)));
    let q = IntertwiningOperator::new(xn.clone(), lower)?;
    Ok(OrderNBuild { q, h_minus: Hamiltonian::new(v_minus), wronskian: w })
}

pub fn build_order_n(set: &TransformationSet, xn: &CMat, h_plus: &Hamiltonian) -> Result<OrderNBuild, DarbouxError> {
    build_from_kernel(&kernel_from_set(set), xn, h_plus)
}

/// Operator from `h_minus` back to a Schroedinger partner, leading coefficient `I`.
pub fn build_reverse(h_minus: &Hamiltonian, kernel: &[KernelEntry]) -> Result<OrderNBuild, DarbouxError> {
    build_from_kernel(kernel, &linalg::identity(h_minus.n), h_minus)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    /// `H+ - Q+ Q- - U0 == 0`
    pub h_plus_factorized: bool,
    /// `H- - Q- Q+ - U == 0`
    pub h_minus_factorized: bool,
    /// `U0' - [U0, X~0] == 0`
    pub commutator_identity: bool,
    /// `Q- U0 - U Q- == 0`
    pub u0_intertwined: bool,
    /// `U0' == 0`
    pub u0_constant: bool,
    /// `Q+ H- - H+ Q+ == 0`, only decided when `U0` is constant.
    pub reverse_intertwining: Option<bool>,
}

impl FactorizationReport {
    pub fn all_identities(&self) -> bool {
        self.h_plus_factorized && self.h_minus_factorized && self.commutator_identity && self.u0_intertwined
    }
}

pub fn factorization_report(b: &FirstOrderBuild, h_plus: &Hamiltonian) -> FactorizationReport {
    let hp = DiffOp::from_hamiltonian(h_plus);
    let hm = DiffOp::from_hamiltonian(&b.h_minus);
    let qm = DiffOp::from_operator(&b.q_minus);
    let qp = DiffOp::from_operator(&b.q_plus);
    let u0 = DiffOp::multiplication(b.u0.clone());
    let u = DiffOp::multiplication(b.u.clone());

    let a = hp.sub(&qp.compose(&qm)).sub(&u0).is_zero();
    let bb = hm.sub(&qm.compose(&qp)).sub(&u).is_zero();
    let c = b.u0.differentiate().sub(&b.u0.commutator(&b.superpotential)).is_zero();
    let d = qm.compose(&u0).sub(&u.compose(&qm)).is_zero();
    let u0_constant = b.u0.differentiate().is_zero();
    let reverse = u0_constant.then(|| qp.compose(&hm).sub(&hp.compose(&qp)).is_zero());
    FactorizationReport {
        h_plus_factorized: a,
        h_minus_factorized: bb,
        commutator_identity: c,
        u0_intertwined: d,
        u0_constant,
        reverse_intertwining: reverse,
    }
}

/// Eigenvalues of `U0(x)` at a point.
pub fn u0_spectrum_at(u0: &RatMatFun, x: f64) -> Vec<C64> {
    linalg::eigenvalues(&u0.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChainEntry;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn identity_set(k: C64) -> TransformationSet {
        TransformationSet::new(
            2,
            (0..2)
                .map(|c| ChainEntry { phi: VecFun::unit(2, c, ExpPoly::exp(r(1.0), k)), lambda: -k * k, sigma: 0 })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_set_build() {
        let k = C64::new(1.2, 0.3);
        let set = identity_set(k);
        let xt = superpotential(&set).unwrap();
        assert!(xt.sub(&RatMatFun::identity(2).scale(-k)).is_zero());
        let b = build_first_order(&set, &linalg::identity(2), &Hamiltonian::free(2)).unwrap();
        assert!(b.h_minus.potential.is_zero());
        assert!(b.u0.sub(&RatMatFun::identity(2).scale(-k * k)).is_zero());
        let rep = factorization_report(&b, &Hamiltonian::free(2));
        assert!(rep.all_identities());
        assert!(rep.u0_constant);
        assert_eq!(rep.reverse_intertwining, Some(true));
    }

    #[test]
    fn degenerate_set_rejected() {
        let k = r(1.0);
        let e = VecFun::unit(2, 0, ExpPoly::exp(r(1.0), k));
        let set = TransformationSet::new(
            2,
            vec![
                ChainEntry { phi: e.clone(), lambda: -k * k, sigma: 0 },
                ChainEntry { phi: e.scale(r(2.0)), lambda: -k * k, sigma: 0 },
            ],
        )
        .unwrap();
        assert_eq!(
            build_first_order(&set, &linalg::identity(2), &Hamiltonian::free(2)).unwrap_err(),
            DarbouxError::DegenerateWronskian
        );
        assert_eq!(
            build_order_n(&set, &linalg::identity(2), &Hamiltonian::free(2)).unwrap_err(),
            DarbouxError::DegenerateWronskian
        );
    }

    #[test]
    fn inconsistent_set_rejected() {
        let k = r(1.0);
        let mut set = identity_set(k);
        set.entries[1].lambda = r(3.0);
        assert_eq!(
            build_first_order(&set, &linalg::identity(2), &Hamiltonian::free(2)).unwrap_err(),
            DarbouxError::SetInconsistentWithPotential(1)
        );
    }
}
