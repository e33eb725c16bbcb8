//! Seeded test matrices with a prescribed spectrum and starting guesses.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, Matrix};
use crate::spectrum::{partition_svd, DEFAULT_CLUSTER_TOL};
use crate::svd::Svd;

/// The RNG used by every generator: ChaCha8 seeded from a `u64`.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix of independent standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    let mut g = Matrix::zeros(rows, cols);
    for j in 0..cols {
        for v in g.col_mut(j) {
            *v = rng.sample(StandardNormal);
        }
    }
    g
}

/// Haar-distributed orthogonal `n × n` matrix: the `Q` factor of a Gaussian
/// matrix with `R` normalized to a positive diagonal.
pub fn haar_orthogonal(n: usize, rng: &mut impl Rng) -> Matrix {
    let mut q = gaussian_matrix(n, n, rng);
    for j in 0..n {
        // Two Gram-Schmidt passes; the column norm becomes R_jj > 0.
        for _ in 0..2 {
            for i in 0..j {
                let prev = q.col(i).to_vec();
                let c = dot(&prev, q.col(j));
                axpy(-c, &prev, q.col_mut(j));
            }
        }
        let col = q.col_mut(j);
        let nrm = norm2(col);
        col.iter_mut().for_each(|v| *v /= nrm);
    }
    q
}

fn check_spectrum(sigma: &[f64], m: usize, n: usize) -> Result<()> {
    if sigma.len() > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "{} singular values do not fit a {m}×{n} matrix",
            sigma.len()
        )));
    }
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidArgument("singular values must be finite and non-negative".into()));
    }
    if sigma.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("singular values must be non-increasing".into()));
    }
    Ok(())
}

/// `A = U diag(σ) Vᵀ` with Haar `U` (`m × m`) and `V` (`n × n`); missing
/// singular values are zero.
pub fn generate_test_matrix(sigma: &[f64], m: usize, n: usize, seed: u64) -> Result<Matrix> {
    generate_test_matrix_with(sigma, m, n, &mut rng_from_seed(seed))
}

/// [`generate_test_matrix`] drawing from a caller-supplied RNG.
pub fn generate_test_matrix_with(sigma: &[f64], m: usize, n: usize, rng: &mut impl Rng) -> Result<Matrix> {
    check_spectrum(sigma, m, n)?;
    let u = haar_orthogonal(m, rng);
    let v = haar_orthogonal(n, rng);
    let p = sigma.len();
    let mut us = u.col_range(0..p);
    for (j, s) in sigma.iter().enumerate() {
        us.col_mut(j).iter_mut().for_each(|x| *x *= s);
    }
    Ok(us.matmul_tr(&v.col_range(0..p)))
}

/// How a starting guess relates to the right singular vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GuessMode {
    /// `X = V_h`.
    ExactDominant,
    /// `V_h + ε·G`, columns normalized.
    Perturbed { epsilon: f64 },
    /// Gaussian `X`.
    Random,
    /// Columns taken from `V_j` and the singular vectors past the cluster, so
    /// `X` misses the cluster entirely.
    AdversarialOrthogonal,
}

impl fmt::Display for GuessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuessMode::ExactDominant => f.write_str("exact-dominant"),
            GuessMode::Perturbed { epsilon } => write!(f, "perturbed:{epsilon}"),
            GuessMode::Random => f.write_str("random"),
            GuessMode::AdversarialOrthogonal => f.write_str("adversarial-orthogonal"),
        }
    }
}

impl FromStr for GuessMode {
    type Err = Error;

    /// `exact-dominant`, `random`, `adversarial-orthogonal` or `perturbed:<ε>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-dominant" => Ok(GuessMode::ExactDominant),
            "random" => Ok(GuessMode::Random),
            "adversarial-orthogonal" => Ok(GuessMode::AdversarialOrthogonal),
            _ => {
                let eps = s
                    .strip_prefix("perturbed:")
                    .and_then(|e| e.parse::<f64>().ok())
                    .filter(|e| e.is_finite() && *e >= 0.0)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown guess mode {s:?}")))?;
                Ok(GuessMode::Perturbed { epsilon: eps })
            }
        }
    }
}

/// An `n × h` starting guess for `A` with SVD `svd`.
pub fn generate_guess(svd: &Svd, h: usize, mode: GuessMode, seed: u64) -> Result<Matrix> {
    generate_guess_with(svd, h, mode, &mut rng_from_seed(seed))
}

/// [`generate_guess`] drawing from a caller-supplied RNG.
pub fn generate_guess_with(svd: &Svd, h: usize, mode: GuessMode, rng: &mut impl Rng) -> Result<Matrix> {
    if h == 0 || h > svd.rank() {
        return Err(Error::InvalidArgument(format!(
            "h = {h} must satisfy 1 ≤ h ≤ rank = {}",
            svd.rank()
        )));
    }
    let n = svd.v().rows();
    Ok(match mode {
        GuessMode::ExactDominant => svd.v_head(h),
        GuessMode::Random => gaussian_matrix(n, h, rng),
        GuessMode::Perturbed { epsilon } => {
            let mut x = svd.v_head(h);
            let g = gaussian_matrix(n, h, rng);
            for j in 0..h {
                let col = x.col_mut(j);
                axpy(epsilon, g.col(j), col);
                let nrm = norm2(col);
                if nrm > 0.0 {
                    col.iter_mut().for_each(|v| *v /= nrm);
                }
            }
            x
        }
        GuessMode::AdversarialOrthogonal => {
            let p = partition_svd(svd, h, DEFAULT_CLUSTER_TOL)?;
            let pool: Vec<usize> = (0..p.j).chain(p.k..n).collect();
            if pool.is_empty() {
                // The cluster fills the whole space; nothing avoids it.
                Matrix::zeros(n, h)
            } else {
                let cols: Vec<&[f64]> = (0..h).map(|i| svd.v().col(pool[i % pool.len()])).collect();
                Matrix::from_columns(n, &cols)
            }
        }
    })
}
