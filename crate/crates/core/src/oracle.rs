//! A matrix bundled with its exact SVD, the reference every bound is evaluated against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::DEFAULT_KRYLOV_TOL;
use crate::matrix::Matrix;
use crate::spectrum::{partition_svd, SpectrumPartition, DEFAULT_CLUSTER_TOL};
use crate::svd::{thin_svd_with_tol, Svd, DEFAULT_RANK_TOL};

/// Which singular vectors a quantity refers to: `U` (left) or `V` (right).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Numerical tolerances shared by all bound computations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative cutoff (times `σ_1 · max(m, n)`) for ranks and pseudoinverses.
    pub rank_tol: f64,
    /// Deflation threshold for Krylov blocks, relative to the largest raw column norm.
    pub krylov_tol: f64,
    /// Singular values within `cluster_tol · σ_1` of a cluster's first value join it.
    pub cluster_tol: f64,
    /// Smallest cosine accepted as "angle strictly below π/2".
    pub compat_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: DEFAULT_RANK_TOL,
            krylov_tol: DEFAULT_KRYLOV_TOL,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            compat_tol: 1e-12,
        }
    }
}

/// `A` together with a full SVD `A = UΣVᵀ`.
#[derive(Clone, Debug)]
pub struct Oracle {
    a: Matrix,
    svd: Svd,
}

impl Oracle {
    pub fn new(a: Matrix) -> Result<Self> {
        let svd = thin_svd_with_tol(&a, DEFAULT_RANK_TOL)?;
        Ok(Oracle { a, svd })
    }

    /// Uses a caller-supplied SVD, e.g. one rotated inside a cluster.
    pub fn with_svd(a: Matrix, svd: Svd) -> Result<Self> {
        if svd.rows() != a.rows() || svd.cols() != a.cols() {
            return Err(Error::InvalidArgument("SVD shape does not match A".into()));
        }
        let resid = (&svd.reconstruct() - &a).norm_fro();
        if resid > 1e-10 * (1.0 + a.norm_fro()) {
            return Err(Error::InvalidArgument(format!(
                "SVD does not reproduce A (residual {resid:.3e})"
            )));
        }
        Ok(Oracle { a, svd })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn svd(&self) -> &Svd {
        &self.svd
    }

    pub fn rank(&self) -> usize {
        self.svd.rank()
    }

    pub fn partition(&self, h: usize, tols: &Tolerances) -> Result<SpectrumPartition> {
        partition_svd(&self.svd, h, tols.cluster_tol)
    }

    /// Singular vectors of one side: `U` for left, `V` for right.
    pub fn vectors(&self, side: Side) -> &Matrix {
        match side {
            Side::Left => self.svd.u(),
            Side::Right => self.svd.v(),
        }
    }

    /// First `ell` singular vectors of the given side.
    pub fn head(&self, side: Side, ell: usize) -> Matrix {
        self.vectors(side).col_range(0..ell)
    }

    /// Singular vectors `ell + 1, …` of the given side (the full complement).
    pub fn tail(&self, side: Side, ell: usize) -> Matrix {
        let v = self.vectors(side);
        v.col_range(ell..v.cols())
    }

    /// Singular vectors `from + 1 ..= to`.
    pub fn block(&self, side: Side, from: usize, to: usize) -> Matrix {
        self.vectors(side).col_range(from..to)
    }

    /// Ambient dimension of the given side (`m` for left, `n` for right).
    pub fn ambient(&self, side: Side) -> usize {
        self.vectors(side).rows()
    }
}
