//! Reference computations on nalgebra's own SVD, independent of the crate's Jacobi kernel.
#![allow(dead_code)]

use gapless::Matrix;
use nalgebra::DMatrix;

pub fn to_na(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn from_na(a: &DMatrix<f64>) -> Matrix {
    Matrix::from_col_major(a.nrows(), a.ncols(), a.as_slice().to_vec()).unwrap()
}

/// Singular values in non-increasing order.
pub fn sigma(a: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub fn norm2(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    sigma(a)[0]
}

pub fn pinv(a: &Matrix) -> Matrix {
    from_na(&to_na(a).pseudo_inverse(1e-12 * norm2(a).max(f64::MIN_POSITIVE)).unwrap())
}

/// Orthogonal projector onto R(A).
pub fn projector(a: &Matrix) -> Matrix {
    a.matmul(&pinv(a))
}

/// `‖(I − P_T) P_S‖` in both norms, straight from projectors.
pub fn sin_theta_projectors(s: &Matrix, t: &Matrix) -> (f64, f64) {
    let ps = projector(s);
    let m = &ps - &projector(t).matmul(&ps);
    (norm2(&m), m.norm_fro())
}

/// Best rank-i approximation from nalgebra's SVD.
pub fn truncate(a: &Matrix, i: usize) -> Matrix {
    let svd = to_na(a).svd(true, true);
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&x, &y| svd.singular_values[y].partial_cmp(&svd.singular_values[x]).unwrap());
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut out = DMatrix::zeros(a.rows(), a.cols());
    for &c in idx.iter().take(i) {
        out += u.column(c) * vt.row(c) * svd.singular_values[c];
    }
    from_na(&out)
}
