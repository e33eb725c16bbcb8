//! Block Krylov approximation of dominant subspaces and low-rank
//! approximations when the target index sits inside a singular value cluster.

pub mod amplifier;
pub mod basis;
pub mod bounds;
pub mod error;
pub mod harness;
pub mod io;
pub mod json;
pub mod krylov;
pub mod lowrank;
pub mod matrix;
pub mod oracle;
pub mod spectrum;
pub mod subspace;
pub mod svd;

pub use basis::{orthonormal_range, pseudoinverse, truncated_svd_approx, Norms, OrthonormalBasis};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use oracle::{Oracle, Side, Tolerances};
pub use svd::{thin_svd, thin_svd_with_tol, Svd};

/// The guide's snippets, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/angles.md")]
    mod angles {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/amplifier.md")]
    mod amplifier {}
    #[doc = include_str!("../../../book/src/krylov.md")]
    mod krylov {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/lowrank.md")]
    mod lowrank {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
