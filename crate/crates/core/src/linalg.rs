//! Constant complex matrices, backed by nalgebra.

use nalgebra::DMatrix;

use crate::C64;

pub type CMat = DMatrix<C64>;

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_rows(rows: &[Vec<C64>]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn to_rows(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Inverse, or `None` when the matrix is numerically singular.
pub fn inverse(m: &CMat) -> Option<CMat> {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let d = m.determinant().norm();
    if d <= 1e-13 * scale.powi(m.nrows() as i32) {
        return None;
    }
    m.clone().try_inverse()
}

pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    match m.clone().schur().eigenvalues() {
        Some(v) => v.iter().copied().collect(),
        None => Vec::new(),
    }
}

/// Whether two multisets of complex numbers agree within `tol` (greedy matching).
pub fn same_multiset(a: &[C64], b: &[C64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let best = (0..b.len()).filter(|&j| !used[j]).min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
        match best {
            Some(j) if (b[j] - x).norm() <= tol * 1f64.max(x.norm()) => used[j] = true,
            _ => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_spectrum() {
        let m =
            from_rows(&[vec![C64::new(2.0, 0.0), C64::new(1.0, 0.0)], vec![C64::new(0.0, 0.0), C64::new(3.0, 1.0)]]);
        let inv = inverse(&m).unwrap();
        assert!((&m * &inv - identity(2)).norm() < 1e-14);
        let ev = eigenvalues(&m);
        assert!(same_multiset(&ev, &[C64::new(3.0, 1.0), C64::new(2.0, 0.0)], 1e-12));
        let sing = from_rows(&[vec![C64::new(1.0, 0.0); 2], vec![C64::new(2.0, 0.0); 2]]);
        assert!(inverse(&sing).is_none());
    }
}
