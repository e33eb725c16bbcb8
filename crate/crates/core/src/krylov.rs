//! Block Krylov spaces `K_q(A, X) = R(AX, (AAᵀ)AX, …, (AAᵀ)^q AX)` and the
//! augmented space `K*_{q,t} = R((AᵀA)X) + … + R((AᵀA)^{q+t+1}X)`.
//!
//! Bases are grown one block at a time: the next raw block is `A(AᵀQ)` for
//! the newest orthonormal block `Q`, orthogonalized against everything so far
//! with two classical Gram–Schmidt passes and then deflated with column
//! pivoting. A column is dropped when its residual norm falls below
//! `rank_tol` times the largest raw column norm seen since the first block
//! (with `X` scaled to unit largest column), and never below `rank_tol·‖A‖_F/√min(m, n)`.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::basis::{orthonormalize_block, OrthonormalBasis};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_KRYLOV_TOL: f64 = 1e-10;

/// Identifies the `(A, X)` pair a basis was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Provenance {
    pub a_shape: (usize, usize),
    pub x_shape: (usize, usize),
    pub a_fingerprint: u64,
    pub x_fingerprint: u64,
}

impl Provenance {
    pub fn of(a: &Matrix, x: &Matrix) -> Self {
        Provenance {
            a_shape: a.shape(),
            x_shape: x.shape(),
            a_fingerprint: fingerprint(a),
            x_fingerprint: fingerprint(x),
        }
    }
}

fn fingerprint(m: &Matrix) -> u64 {
    let mut h = DefaultHasher::new();
    m.shape().hash(&mut h);
    for v in m.as_slice() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Orthonormal basis of `K_q(A, X)` with the state needed to extend it.
///
/// An empty basis (`dim = 0`) signals `AX = 0`; see [`KrylovBasis::require_nonempty`].
#[derive(Clone, Debug)]
pub struct KrylovBasis {
    basis: OrthonormalBasis,
    q: usize,
    block_dims: Vec<usize>,
    provenance: Provenance,
    last_block: Matrix,
    scale: f64,
    rank_tol: f64,
}

impl KrylovBasis {
    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn into_basis(self) -> OrthonormalBasis {
        self.basis
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Columns retained from each generator block `(AAᵀ)^i AX`, `i = 0..=q`.
    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// Basis of `K_p(A, X)` for `p ≤ q`: the columns contributed by the first `p + 1` blocks.
    pub fn prefix(&self, p: usize) -> OrthonormalBasis {
        let cols: usize = self.block_dims.iter().take(p + 1).sum();
        self.basis.truncate(cols)
    }

    /// Grows the basis in place until it spans `K_q(A, X)`.
    pub(crate) fn grow_to(&mut self, a: &Matrix, q: usize) {
        while self.q < q {
            let kb = std::mem::replace(self, placeholder());
            *self = grow(kb, a);
        }
    }

    /// Turns the empty basis into [`Error::EmptyKrylov`].
    pub fn require_nonempty(self) -> Result<Self> {
        if self.is_empty() {
            Err(Error::EmptyKrylov)
        } else {
            Ok(self)
        }
    }

    fn absorb(&mut self, raw: &Matrix) {
        for c in raw.columns() {
            self.scale = self.scale.max(crate::matrix::norm2(c));
        }
        let block = if self.scale > 0.0 {
            orthonormalize_block(self.basis.matrix(), raw, self.rank_tol * self.scale)
        } else {
            Matrix::zeros(raw.rows(), 0)
        };
        self.block_dims.push(block.cols());
        let merged = Matrix::hcat(&[self.basis.matrix(), &block]);
        self.basis = OrthonormalBasis::from_trusted(merged);
        self.last_block = block;
    }
}

/// Orthonormal basis of `K_q(A, X)`.
pub fn krylov_basis(a: &Matrix, x: &Matrix, q: usize, rank_tol: f64) -> Result<KrylovBasis> {
    if a.cols() != x.rows() {
        return Err(Error::InvalidArgument(format!(
            "A is {}×{} but X has {} rows",
            a.rows(),
            a.cols(),
            x.rows()
        )));
    }
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("rank tolerance must be positive, got {rank_tol}")));
    }
    a.ensure_finite()?;
    x.ensure_finite()?;
    let mut kb = KrylovBasis {
        basis: OrthonormalBasis::empty(a.rows()),
        q: 0,
        block_dims: Vec::with_capacity(q + 1),
        provenance: Provenance::of(a, x),
        last_block: Matrix::zeros(a.rows(), 0),
        scale: 0.0,
        rank_tol,
    };
    // X is rescaled to unit largest column, which leaves R(AX) alone, and the
    // threshold is floored at ‖A‖_F / √min(m, n) ≤ ‖A‖₂ so that an AX that is
    // zero up to rounding is not inflated into spurious directions.
    let x_scale = x.columns().map(crate::matrix::norm2).fold(0.0, f64::max);
    let dim = a.rows().min(a.cols()).max(1) as f64;
    kb.scale = a.norm_fro() / dim.sqrt();
    let first = a.matmul(x);
    kb.absorb(&if x_scale > 0.0 { &first * (1.0 / x_scale) } else { first });
    for _ in 0..q {
        kb = grow(kb, a);
    }
    Ok(kb)
}

fn placeholder() -> KrylovBasis {
    KrylovBasis {
        basis: OrthonormalBasis::empty(0),
        q: 0,
        block_dims: Vec::new(),
        provenance: Provenance {
            a_shape: (0, 0),
            x_shape: (0, 0),
            a_fingerprint: 0,
            x_fingerprint: 0,
        },
        last_block: Matrix::zeros(0, 0),
        scale: 0.0,
        rank_tol: 0.0,
    }
}

fn grow(mut kb: KrylovBasis, a: &Matrix) -> KrylovBasis {
    kb.q += 1;
    if kb.last_block.cols() == 0 {
        kb.block_dims.push(0);
        return kb;
    }
    let raw = a.matmul(&a.tr_matmul(&kb.last_block));
    kb.absorb(&raw);
    kb
}

/// Extends `K_q(A, X)` to `K_{q+1}(A, X)`.
pub fn extend(kb: KrylovBasis, a: &Matrix, x: &Matrix) -> Result<KrylovBasis> {
    if Provenance::of(a, x) != kb.provenance {
        return Err(Error::InvalidArgument(
            "basis was built from a different (A, X) pair".into(),
        ));
    }
    Ok(grow(kb, a))
}

/// Orthonormal basis of `K*_{q,t}`, built as `K_t(Aᵀ, Y_q)` with `Y_q` a basis of `K_q(A, X)`.
pub fn augmented_subspace(
    a: &Matrix,
    x: &Matrix,
    q: usize,
    t: usize,
    rank_tol: f64,
) -> Result<OrthonormalBasis> {
    let y = krylov_basis(a, x, q, rank_tol)?.require_nonempty()?;
    augmented_from_basis(a, y.basis(), t, rank_tol)
}

/// `K_t(Aᵀ, Y)` for an already computed basis `Y` of `K_q(A, X)`.
pub fn augmented_from_basis(
    a: &Matrix,
    y: &OrthonormalBasis,
    t: usize,
    rank_tol: f64,
) -> Result<OrthonormalBasis> {
    let at = a.transpose();
    let kb = krylov_basis(&at, y.matrix(), t, rank_tol)?.require_nonempty()?;
    Ok(kb.into_basis())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::orthonormal_range;
    use crate::subspace::sin_theta;

    fn diag_example() -> (Matrix, Matrix) {
        (Matrix::diag(&[3.0, 2.0, 1.0]), Matrix::column_vector(&[1.0, 1.0, 1.0]))
    }

    #[test]
    fn explicit_generators() {
        let (a, x) = diag_example();
        let kb = krylov_basis(&a, &x, 1, DEFAULT_KRYLOV_TOL).unwrap();
        assert_eq!(kb.dim(), 2);
        let gens = Matrix::from_rows(&[[3.0, 27.0], [2.0, 8.0], [1.0, 1.0]]);
        let oracle = orthonormal_range(&gens, 1e-12).unwrap();
        assert!(sin_theta(&oracle, kb.basis()).unwrap().two < 1e-12);
        assert!(sin_theta(kb.basis(), &oracle).unwrap().two < 1e-12);

        let full = krylov_basis(&a, &x, 2, DEFAULT_KRYLOV_TOL).unwrap();
        assert_eq!(full.dim(), 3);
        assert_eq!(full.block_dims(), &[1, 1, 1]);
    }

    #[test]
    fn kernel_start_is_empty() {
        let a = Matrix::diag(&[1.0, 0.0]);
        let x = Matrix::column_vector(&[0.0, 1.0]);
        let kb = krylov_basis(&a, &x, 3, DEFAULT_KRYLOV_TOL).unwrap();
        assert!(kb.is_empty());
        let kb = extend(kb, &a, &x).unwrap();
        assert!(matches!(kb.require_nonempty(), Err(Error::EmptyKrylov)));
        assert!(matches!(
            augmented_subspace(&a, &x, 0, 0, DEFAULT_KRYLOV_TOL),
            Err(Error::EmptyKrylov)
        ));
    }

    #[test]
    fn extend_matches_direct_build() {
        let (a, x) = diag_example();
        let kb = krylov_basis(&a, &x, 0, DEFAULT_KRYLOV_TOL).unwrap();
        let kb = extend(extend(kb, &a, &x).unwrap(), &a, &x).unwrap();
        assert_eq!(kb.q(), 2);
        assert_eq!(kb.dim(), 3);
        assert_eq!(kb.prefix(0).dim(), 1);
        assert_eq!(kb.prefix(1).dim(), 2);
        let other = Matrix::column_vector(&[1.0, 0.0, 0.0]);
        assert!(extend(kb, &a, &other).is_err());
    }

    #[test]
    fn augmented_single_summand() {
        let (a, x) = diag_example();
        let k = augmented_subspace(&a, &x, 0, 0, DEFAULT_KRYLOV_TOL).unwrap();
        let direct = orthonormal_range(&a.tr_matmul(&a.matmul(&x)), 1e-12).unwrap();
        assert_eq!(k.dim(), 1);
        assert!(sin_theta(&direct, &k).unwrap().two < 1e-12);
    }

    #[test]
    fn roundoff_start_is_empty() {
        // AX is about 1e-17 here, far below ‖A‖ but not exactly zero.
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        let x = Matrix::column_vector(&[0.1, -0.1 + 1e-17]);
        assert!(a.matmul(&x).max_abs() > 0.0);
        assert!(krylov_basis(&a, &x, 2, DEFAULT_KRYLOV_TOL).unwrap().is_empty());
    }

    #[test]
    fn guess_scale_does_not_change_dimension() {
        let a = Matrix::diag(&[1.0, 1e-6, 1e-9]);
        let x = Matrix::column_vector(&[1.0, 1.0, 1.0]);
        let dims: Vec<usize> = [1e-8, 1.0, 1e8]
            .iter()
            .map(|&c| krylov_basis(&a, &(&x * c), 2, DEFAULT_KRYLOV_TOL).unwrap().dim())
            .collect();
        assert_eq!(dims, vec![dims[0]; 3]);
    }
}
