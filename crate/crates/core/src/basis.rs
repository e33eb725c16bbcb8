//! Orthonormal bases, ranges, pseudoinverses and truncated approximations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, Matrix};
use crate::svd::{complete_orthonormal, numerical_rank, thin_svd, thin_svd_with_tol};

/// A matrix with orthonormal columns, viewed as a basis of its range.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    q: Matrix,
}

impl OrthonormalBasis {
    /// Wraps `q`, checking `‖QᵀQ − I‖_F ≤ 1e-10 · max(1, dim)`.
    pub fn new(q: Matrix) -> Result<Self> {
        q.ensure_finite()?;
        let defect = q.orthonormality_defect();
        if defect > 1e-10 * q.cols().max(1) as f64 {
            return Err(Error::InvalidArgument(format!(
                "columns are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(OrthonormalBasis { q })
    }

    /// Wraps `q` without checking; callers guarantee orthonormality.
    pub(crate) fn from_trusted(q: Matrix) -> Self {
        OrthonormalBasis { q }
    }

    /// The zero subspace of `R^ambient`.
    pub fn empty(ambient: usize) -> Self {
        OrthonormalBasis {
            q: Matrix::zeros(ambient, 0),
        }
    }

    /// `span{e_start, …, e_{end-1}}` in `R^ambient` (zero-based).
    pub fn coordinate(ambient: usize, range: std::ops::Range<usize>) -> Self {
        let q = Matrix::from_fn(ambient, range.len(), |i, j| {
            if i == range.start + j {
                1.0
            } else {
                0.0
            }
        });
        OrthonormalBasis { q }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.q
    }

    pub fn into_matrix(self) -> Matrix {
        self.q
    }

    pub fn ambient_dim(&self) -> usize {
        self.q.rows()
    }

    pub fn dim(&self) -> usize {
        self.q.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.q.cols() == 0
    }

    /// `Q Qᵀ`.
    pub fn projector(&self) -> Matrix {
        self.q.matmul_tr(&self.q)
    }

    /// `(I − QQᵀ) B` computed as `B − Q(QᵀB)`.
    pub fn project_out(&self, b: &Matrix) -> Matrix {
        if self.is_empty() {
            return b.clone();
        }
        b - &self.q.matmul(&self.q.tr_matmul(b))
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> OrthonormalBasis {
        let full = complete_orthonormal(&self.q, self.ambient_dim());
        OrthonormalBasis {
            q: full.col_range(self.dim()..self.ambient_dim()),
        }
    }

    /// Leading `k` basis vectors.
    pub fn truncate(&self, k: usize) -> OrthonormalBasis {
        OrthonormalBasis {
            q: self.q.col_range(0..k.min(self.dim())),
        }
    }

    /// `Q · C` for a matrix `C` with orthonormal columns.
    pub fn rotate(&self, c: &Matrix) -> OrthonormalBasis {
        OrthonormalBasis {
            q: self.q.matmul(c),
        }
    }
}

/// Moore–Penrose pseudoinverse through the SVD; singular values at or below
/// `rank_tol · σ_1 · max(m, n)` are treated as zero.
pub fn pseudoinverse(a: &Matrix, rank_tol: f64) -> Result<Matrix> {
    pseudoinverse_with_rank(a, rank_tol).map(|(p, _)| p)
}

/// The pseudoinverse together with the numerical rank it was built from.
pub fn pseudoinverse_with_rank(a: &Matrix, rank_tol: f64) -> Result<(Matrix, usize)> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok((Matrix::zeros(n, m), 0));
    }
    let svd = thin_svd_with_tol(a, rank_tol)?;
    let r = svd.rank();
    let mut v = svd.v_head(r);
    for (j, &s) in svd.sigma()[..r].iter().enumerate() {
        v.col_mut(j).iter_mut().for_each(|x| *x /= s);
    }
    Ok((v.matmul_tr(&svd.u_head(r)), r))
}

/// Orthonormal basis of `R(A)` of dimension equal to the numerical rank.
pub fn orthonormal_range(a: &Matrix, rank_tol: f64) -> Result<OrthonormalBasis> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(OrthonormalBasis::empty(m));
    }
    let svd = thin_svd_with_tol(a, rank_tol)?;
    Ok(OrthonormalBasis {
        q: svd.u_head(svd.rank()),
    })
}

/// Numerical rank with the given relative tolerance.
pub fn rank(a: &Matrix, rank_tol: f64) -> usize {
    let s = crate::svd::singular_values(a);
    numerical_rank(&s, a.rows(), a.cols(), rank_tol)
}

/// Best rank-`i` approximation `A_i = U_i Σ_i V_iᵀ`.
pub fn truncated_svd_approx(a: &Matrix, i: usize) -> Result<Matrix> {
    let p = a.rows().min(a.cols());
    if i > p {
        return Err(Error::InvalidArgument(format!(
            "truncation index {i} exceeds min(m, n) = {p}"
        )));
    }
    let svd = thin_svd(a)?;
    let mut u = svd.u_head(i);
    for (j, &s) in svd.sigma()[..i].iter().enumerate() {
        u.col_mut(j).iter_mut().for_each(|x| *x *= s);
    }
    Ok(u.matmul_tr(&svd.v_head(i)))
}

/// Spectral and Frobenius norms of a matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Norms {
    pub two: f64,
    pub fro: f64,
}

impl Norms {
    pub fn of(a: &Matrix) -> Norms {
        Norms {
            two: crate::svd::norm_2(a),
            fro: a.norm_fro(),
        }
    }

    pub const ZERO: Norms = Norms { two: 0.0, fro: 0.0 };

    pub fn scale(self, s: f64) -> Norms {
        Norms {
            two: self.two * s,
            fro: self.fro * s,
        }
    }
}

impl std::ops::Add for Norms {
    type Output = Norms;

    fn add(self, rhs: Norms) -> Norms {
        Norms {
            two: self.two + rhs.two,
            fro: self.fro + rhs.fro,
        }
    }
}

/// Orthonormalizes `block` against the columns of `existing` and itself.
///
/// Two full classical Gram–Schmidt passes against `existing`, then
/// Gram–Schmidt with column pivoting inside the block: the column of largest
/// remaining norm is accepted while that norm exceeds `abs_tol`. Returns the
/// accepted columns only.
pub(crate) fn orthonormalize_block(existing: &Matrix, block: &Matrix, abs_tol: f64) -> Matrix {
    let m = block.rows();
    let mut cols: Vec<Vec<f64>> = block.columns().map(<[f64]>::to_vec).collect();
    for _ in 0..2 {
        for c in cols.iter_mut() {
            reorthogonalize(existing, c);
        }
    }

    let mut accepted = Matrix::zeros(m, 0);
    loop {
        let (best, norm) = cols
            .iter()
            .enumerate()
            .map(|(i, c)| (i, norm2(c)))
            .fold((usize::MAX, 0.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
        if best == usize::MAX || !(norm > abs_tol) {
            break;
        }
        let mut q = cols.swap_remove(best);
        q.iter_mut().for_each(|x| *x /= norm);
        // One more pass keeps the accepted vector orthogonal to full precision.
        reorthogonalize(existing, &mut q);
        reorthogonalize(&accepted, &mut q);
        let n2 = norm2(&q);
        q.iter_mut().for_each(|x| *x /= n2);
        for c in cols.iter_mut() {
            let d = dot(&q, c);
            axpy(-d, &q, c);
        }
        accepted.push_column(&q);
    }
    accepted
}

fn reorthogonalize(basis: &Matrix, v: &mut [f64]) {
    if basis.cols() == 0 {
        return;
    }
    let coeffs: Vec<f64> = basis.columns().map(|c| dot(c, v)).collect();
    for (c, d) in basis.columns().zip(coeffs) {
        axpy(-d, c, v);
    }
}
