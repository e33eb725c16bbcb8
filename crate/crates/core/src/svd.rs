//! Full singular value decompositions with a deterministic sign convention.
//!
//! Matrices whose smaller dimension is at most [`JACOBI_MAX_DIM`] are
//! factored by one-sided (Hestenes) Jacobi, which delivers singular values
//! to high relative accuracy. Larger inputs go through nalgebra's
//! Golub–Kahan bidiagonalization with implicit QR.
//!
//! Both routes return full orthogonal factors: `U` is `m × m` and `V` is
//! `n × n`. Columns beyond the numerical rank are completed greedily from
//! the standard basis, so partition views such as `U_{k,⊥}` are always
//! available. Each column of `U` has its first significant entry
//! non-negative (the paired column of `V` flips with it).

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, Matrix};

/// Relative rank tolerance, scaled by `σ_1 · max(m, n)`.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Largest `min(m, n)` factored by one-sided Jacobi.
pub const JACOBI_MAX_DIM: usize = 64;

const MAX_SWEEPS: usize = 80;

/// Entries below this magnitude are skipped when fixing column signs.
const SIGN_THRESHOLD: f64 = 1e-10;

/// `A = U · diag(σ) · Vᵀ` with full orthogonal `U` and `V`.
#[derive(Clone, Debug)]
pub struct Svd {
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
    rank: usize,
    rank_tol: f64,
}

/// Factors `a` with the default rank tolerance.
pub fn thin_svd(a: &Matrix) -> Result<Svd> {
    thin_svd_with_tol(a, DEFAULT_RANK_TOL)
}

pub fn thin_svd_with_tol(a: &Matrix, rank_tol: f64) -> Result<Svd> {
    a.ensure_finite()?;
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rank tolerance must be positive, got {rank_tol}"
        )));
    }
    let (m, n) = a.shape();
    let p = m.min(n);

    let (u, sigma, v) = if p <= JACOBI_MAX_DIM {
        if m >= n {
            let (w, v) = jacobi(a.clone(), true);
            let v = v.expect("requested right vectors");
            let (sigma, order) = column_norms_sorted(&w);
            let v = permute_columns(&v, &order);
            let u = left_vectors(&w, &sigma, &order, m);
            (u, sigma, v)
        } else {
            let (w, u) = jacobi(a.transpose(), true);
            let u = u.expect("requested right vectors");
            let (sigma, order) = column_norms_sorted(&w);
            let u = permute_columns(&u, &order);
            let v = left_vectors(&w, &sigma, &order, n);
            (u, sigma, v)
        }
    } else {
        golub_kahan(a)
    };

    let mut svd = Svd {
        u,
        sigma,
        v,
        rank: 0,
        rank_tol,
    };
    svd.fix_signs();
    svd.rank = numerical_rank(&svd.sigma, m, n, rank_tol);
    Ok(svd)
}

/// Singular values only, non-increasing.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a.norm_fro()];
    }
    if m == 1 {
        return vec![a.norm_fro()];
    }
    if m.min(n) <= JACOBI_MAX_DIM {
        let w = if m >= n {
            jacobi(a.clone(), false).0
        } else {
            jacobi(a.transpose(), false).0
        };
        column_norms_sorted(&w).0
    } else {
        let dm = nalgebra::DMatrix::from_column_slice(m, n, a.as_slice());
        let mut s: Vec<f64> = dm.singular_values().iter().copied().collect();
        s.sort_by(|x, y| y.total_cmp(x));
        s
    }
}

/// Spectral norm `‖A‖₂`; zero for empty matrices.
pub fn norm_2(a: &Matrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Number of singular values above `tol · σ_1 · max(m, n)`.
pub fn numerical_rank(sigma: &[f64], rows: usize, cols: usize, tol: f64) -> usize {
    let s1 = sigma.first().copied().unwrap_or(0.0);
    if s1 <= 0.0 {
        return 0;
    }
    let cutoff = tol * s1 * rows.max(cols) as f64;
    sigma.iter().take_while(|&&s| s > cutoff).count()
}

impl Svd {
    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    /// The `min(m, n)` singular values, non-increasing.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// `σ_ℓ` with one-based indexing; zero beyond `min(m, n)`.
    ///
    /// # Panics
    /// If `ell == 0`; the sentinel `σ_0 = ∞` is never materialized.
    pub fn sigma_at(&self, ell: usize) -> f64 {
        assert!(ell >= 1, "σ_0 is a sentinel, not a value");
        self.sigma.get(ell - 1).copied().unwrap_or(0.0)
    }

    /// `U_ℓ`: the first `ℓ` left singular vectors.
    pub fn u_head(&self, ell: usize) -> Matrix {
        self.u.col_range(0..ell)
    }

    /// `U_{ℓ,⊥}`: the remaining `m − ℓ` left singular vectors.
    pub fn u_tail(&self, ell: usize) -> Matrix {
        self.u.col_range(ell..self.u.cols())
    }

    pub fn v_head(&self, ell: usize) -> Matrix {
        self.v.col_range(0..ell)
    }

    pub fn v_tail(&self, ell: usize) -> Matrix {
        self.v.col_range(ell..self.v.cols())
    }

    /// `U · diag(σ) · Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let p = self.sigma.len();
        let mut us = self.u.col_range(0..p);
        for (j, &s) in self.sigma.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        us.matmul_tr(&self.v.col_range(0..p))
    }

    /// Factorization of `Aᵀ` obtained by swapping the factors.
    pub fn transposed(&self) -> Svd {
        Svd {
            u: self.v.clone(),
            sigma: self.sigma.clone(),
            v: self.u.clone(),
            rank: self.rank,
            rank_tol: self.rank_tol,
        }
    }

    /// Builds a factorization from explicit factors, checking the invariants
    /// loosely (orthogonality to `1e-10`, ordering of `σ`).
    pub fn from_parts(u: Matrix, sigma: Vec<f64>, v: Matrix, rank_tol: f64) -> Result<Svd> {
        let (m, n) = (u.rows(), v.rows());
        if u.cols() != m || v.cols() != n || sigma.len() != m.min(n) {
            return Err(Error::InvalidArgument(
                "factor shapes do not form a full SVD".into(),
            ));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) || sigma.iter().any(|&s| s < 0.0) {
            return Err(Error::InvalidArgument(
                "singular values must be non-negative and non-increasing".into(),
            ));
        }
        if u.orthonormality_defect() > 1e-10 * m.max(1) as f64
            || v.orthonormality_defect() > 1e-10 * n.max(1) as f64
        {
            return Err(Error::InvalidArgument("factors are not orthogonal".into()));
        }
        let rank = numerical_rank(&sigma, m, n, rank_tol);
        Ok(Svd {
            u,
            sigma,
            v,
            rank,
            rank_tol,
        })
    }

    fn fix_signs(&mut self) {
        let p = self.sigma.len();
        for j in 0..self.u.cols() {
            if first_significant(self.u.col(j)) < 0.0 {
                self.u.col_mut(j).iter_mut().for_each(|x| *x = -*x);
                if j < p {
                    self.v.col_mut(j).iter_mut().for_each(|x| *x = -*x);
                }
            }
        }
        for j in p..self.v.cols() {
            if first_significant(self.v.col(j)) < 0.0 {
                self.v.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
}

fn first_significant(col: &[f64]) -> f64 {
    col.iter()
        .copied()
        .find(|x| x.abs() > SIGN_THRESHOLD)
        .unwrap_or(0.0)
}

/// One-sided Jacobi on a matrix with at least as many rows as columns.
///
/// Returns the rotated matrix `W = A·V` (mutually orthogonal columns) and
/// optionally the accumulated rotation `V`.
fn jacobi(mut w: Matrix, want_v: bool) -> (Matrix, Option<Matrix>) {
    let (m, n) = w.shape();
    debug_assert!(m >= n);
    let mut v = want_v.then(|| Matrix::identity(n));
    let tol = f64::EPSILON * (m as f64).sqrt().max(1.0);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let wp = w.col(p);
                    let wq = w.col(q);
                    (dot(wp, wp), dot(wq, wq), dot(wp, wq))
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                if let Some(v) = v.as_mut() {
                    rotate_columns(v, p, q, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

fn rotate_columns(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = a.rows();
    for i in 0..rows {
        let x = a[(i, p)];
        let y = a[(i, q)];
        a[(i, p)] = c * x - s * y;
        a[(i, q)] = s * x + c * y;
    }
}

/// Column norms of `w` sorted non-increasing, with the sorting permutation.
fn column_norms_sorted(w: &Matrix) -> (Vec<f64>, Vec<usize>) {
    let norms: Vec<f64> = w.columns().map(norm2).collect();
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    (order.iter().map(|&i| norms[i]).collect(), order)
}

fn permute_columns(a: &Matrix, order: &[usize]) -> Matrix {
    let cols: Vec<&[f64]> = order.iter().map(|&j| a.col(j)).collect();
    Matrix::from_columns(a.rows(), &cols)
}

/// Normalized columns of `w` for the numerically nonzero singular values,
/// completed to a `dim × dim` orthogonal matrix.
fn left_vectors(w: &Matrix, sigma: &[f64], order: &[usize], dim: usize) -> Matrix {
    let s1 = sigma.first().copied().unwrap_or(0.0);
    let floor = s1 * f64::EPSILON * dim.max(w.cols()) as f64;
    let mut u = Matrix::zeros(dim, 0);
    for (&j, &s) in order.iter().zip(sigma) {
        if s <= floor || s <= f64::MIN_POSITIVE {
            break;
        }
        let col: Vec<f64> = w.col(j).iter().map(|x| x / s).collect();
        u.push_column(&col);
    }
    complete_orthonormal(&u, dim)
}

fn golub_kahan(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (m, n) = a.shape();
    let dm = nalgebra::DMatrix::from_column_slice(m, n, a.as_slice());
    let svd = dm.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&x, &y| s[y].total_cmp(&s[x]).then(x.cmp(&y)));
    let sigma: Vec<f64> = order.iter().map(|&i| s[i]).collect();

    let s1 = sigma.first().copied().unwrap_or(0.0);
    let floor = s1 * f64::EPSILON * m.max(n) as f64;
    let keep = sigma.iter().take_while(|&&x| x > floor).count();
    let mut uk = Matrix::zeros(m, 0);
    let mut vk = Matrix::zeros(n, 0);
    for &i in order.iter().take(keep) {
        let ucol: Vec<f64> = (0..m).map(|r| u[(r, i)]).collect();
        let vcol: Vec<f64> = (0..n).map(|c| vt[(i, c)]).collect();
        uk.push_column(&ucol);
        vk.push_column(&vcol);
    }
    (
        complete_orthonormal(&uk, m),
        sigma,
        complete_orthonormal(&vk, n),
    )
}

/// Extends the orthonormal columns of `q` to `target` orthonormal columns.
///
/// New columns are standard basis vectors orthogonalized (twice) against
/// the current set; at each step the candidate with the largest residual is
/// taken, which keeps the choice deterministic and well conditioned.
pub(crate) fn complete_orthonormal(q: &Matrix, target: usize) -> Matrix {
    let dim = q.rows();
    assert!(target <= dim && q.cols() <= target);
    let mut out = q.clone();
    if out.cols() == 0 && out.rows() == 0 {
        out = Matrix::zeros(dim, 0);
    }
    // Squared residual of each e_i against the current columns.
    let mut residual: Vec<f64> = (0..dim)
        .map(|i| 1.0 - out.columns().map(|c| c[i] * c[i]).sum::<f64>())
        .collect();
    while out.cols() < target {
        let mut pick = 0;
        for i in 1..dim {
            if residual[i].max(0.0).sqrt() > residual[pick].max(0.0).sqrt() + 1e-12 {
                pick = i;
            }
        }
        let mut e = vec![0.0; dim];
        e[pick] = 1.0;
        for _ in 0..2 {
            for c in out.columns() {
                let d = dot(c, &e);
                axpy(-d, c, &mut e);
            }
        }
        let nrm = norm2(&e);
        e.iter_mut().for_each(|x| *x /= nrm);
        for (r, x) in residual.iter_mut().zip(&e) {
            *r -= x * x;
        }
        out.push_column(&e);
    }
    out
}
