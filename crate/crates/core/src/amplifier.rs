//! Odd gap-amplifying polynomials and their action `φ(A)X = U φ(Σ) Vᵀ X`.
//!
//! The amplifier is the scaled Chebyshev polynomial
//! `φ(x) = σ_k · T_{2q+1}(x/σ_{k+1}) / T_{2q+1}(σ_k/σ_{k+1})`, which fixes
//! `σ_k`, grows super-linearly above it and stays below
//! `4σ_{k+1} / 2^{(2q+1)·min(√γ_k, 1)}` in magnitude on `[0, σ_{k+1}]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// An odd polynomial `φ(x) = x·ψ(x²)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OddPolynomial {
    kind: Kind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    /// Coefficients of `x, x³, x⁵, …`.
    Monomial { odd_coeffs: Vec<f64> },
    /// `σ_k · T_{2q+1}(x/σ_{k+1}) / T_{2q+1}(σ_k/σ_{k+1})`.
    Chebyshev {
        sigma_k: f64,
        sigma_k1: f64,
        q: usize,
        norm: f64,
    },
}

/// Builds the scaled Chebyshev amplifier of degree `2q + 1`.
pub fn build_amplifier(sigma_k: f64, sigma_k1: f64, q: usize) -> Result<OddPolynomial> {
    if !(sigma_k1 > 0.0 && sigma_k > sigma_k1 && sigma_k.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "amplifier needs σ_k > σ_(k+1) > 0, got {sigma_k} and {sigma_k1}"
        )));
    }
    let n = 2 * q + 1;
    let norm = chebyshev(n, sigma_k / sigma_k1);
    if !norm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "T_{n}({}) overflows; lower q",
            sigma_k / sigma_k1
        )));
    }
    Ok(OddPolynomial {
        kind: Kind::Chebyshev {
            sigma_k,
            sigma_k1,
            q,
            norm,
        },
    })
}

/// `T_n(y)` by the three-term recurrence.
pub fn chebyshev(n: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, y);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * y * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// The guaranteed tail level `4σ_{k+1} / 2^{(2q+1)·min(√γ, 1)}`.
pub fn tail_bound(sigma_k1: f64, gamma: f64, q: usize) -> f64 {
    4.0 * sigma_k1 / decay_factor(gamma, q)
}

/// `2^{(2q+1)·min(√γ, 1)}`.
pub fn decay_factor(gamma: f64, q: usize) -> f64 {
    2f64.powf((2 * q + 1) as f64 * gamma.sqrt().min(1.0))
}

impl OddPolynomial {
    /// `φ(x) = x`.
    pub fn identity() -> Self {
        Self::monomial(vec![1.0])
    }

    /// `φ(x) = Σ_i c_i x^{2i+1}`.
    pub fn monomial(odd_coeffs: Vec<f64>) -> Self {
        OddPolynomial {
            kind: Kind::Monomial { odd_coeffs },
        }
    }

    pub fn degree(&self) -> usize {
        match &self.kind {
            Kind::Monomial { odd_coeffs } => 2 * odd_coeffs.len().max(1) - 1,
            Kind::Chebyshev { q, .. } => 2 * q + 1,
        }
    }

    /// The power parameter `q` with `degree ≤ 2q + 1`.
    pub fn q(&self) -> usize {
        self.degree() / 2
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Monomial { odd_coeffs } => {
                let x2 = x * x;
                x * odd_coeffs.iter().rev().fold(0.0, |acc, c| acc * x2 + c)
            }
            Kind::Chebyshev {
                sigma_k,
                sigma_k1,
                q,
                norm,
            } => sigma_k * chebyshev(2 * q + 1, x / sigma_k1) / norm,
        }
    }

    /// `φ` applied entrywise to a diagonal block.
    pub fn eval_diag(&self, sigma: &[f64]) -> Vec<f64> {
        sigma.iter().map(|&s| self.eval(s)).collect()
    }

    /// `‖φ(Σ_tail)‖₂ = max |φ(σ_i)|` (0 for an empty tail).
    pub fn tail_norm(&self, tail: &[f64]) -> f64 {
        tail.iter().fold(0.0, |m: f64, &s| m.max(self.eval(s).abs()))
    }

    /// `‖φ(Σ_head)^{-1}‖₂`; `+∞` when some `φ(σ_i)` vanishes.
    pub fn head_inverse_norm(&self, head: &[f64]) -> f64 {
        head.iter()
            .fold(0.0, |m: f64, &s| m.max(1.0 / self.eval(s).abs()))
    }

    /// Checks `φ(σ_1) ≥ … ≥ φ(σ_k) > 0` on a non-increasing head.
    pub fn is_admissible(&self, head: &[f64]) -> bool {
        let vals = self.eval_diag(head);
        vals.iter().all(|v| *v > 0.0) && vals.windows(2).all(|w| w[0] >= w[1])
    }

    /// Coefficients of `x, x³, …`, available for degree ≤ 9.
    pub fn odd_coefficients(&self) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Monomial { odd_coeffs } => Some(odd_coeffs.clone()),
            Kind::Chebyshev {
                sigma_k,
                sigma_k1,
                q,
                norm,
            } => {
                if *q > 4 {
                    return None;
                }
                let t = chebyshev_coefficients(2 * q + 1);
                let scale = sigma_k / norm;
                Some(
                    t.iter()
                        .enumerate()
                        .skip(1)
                        .step_by(2)
                        .map(|(p, c)| scale * c / sigma_k1.powi(p as i32))
                        .collect(),
                )
            }
        }
    }
}

/// Power-basis coefficients of `T_n`, lowest degree first.
fn chebyshev_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `φ(A)X = ψ(AAᵀ)·A·X` for `φ(x) = x·ψ(x²)`, using only products with `A` and `Aᵀ`.
pub fn apply_odd_polynomial(a: &Matrix, phi: &OddPolynomial, x: &Matrix) -> Result<Matrix> {
    if a.cols() != x.rows() {
        return Err(Error::InvalidArgument(format!(
            "A is {}×{} but X has {} rows",
            a.rows(),
            a.cols(),
            x.rows()
        )));
    }
    let ax = a.matmul(x);
    let step = |z: &Matrix| a.matmul(&a.tr_matmul(z));
    match &phi.kind {
        Kind::Monomial { odd_coeffs } => {
            // Horner in AAᵀ.
            let Some((last, rest)) = odd_coeffs.split_last() else {
                return Ok(Matrix::zeros(a.rows(), x.cols()));
            };
            let mut z = ax.scale(*last);
            for c in rest.iter().rev() {
                z = &step(&z) + &ax.scale(*c);
            }
            Ok(z)
        }
        Kind::Chebyshev {
            sigma_k,
            sigma_k1,
            q,
            norm,
        } => {
            // Z_n = T_n(A/s)X on odd n: Z_{n+2} = (4/s²)AAᵀZ_n − 2Z_n − Z_{n−2}, Z_{−1} = Z_1.
            let s = *sigma_k1;
            let z1 = ax.scale(1.0 / s);
            let mut prev = z1.clone();
            let mut cur = z1;
            for _ in 0..*q {
                let next = &(&step(&cur).scale(4.0 / (s * s)) - &cur.scale(2.0)) - &prev;
                prev = cur;
                cur = next;
            }
            Ok(cur.scale(sigma_k / norm))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_is_identity() {
        let phi = build_amplifier(2.0, 1.0, 0).unwrap();
        for x in [0.0, 0.3, 1.0, 7.5] {
            assert!((phi.eval(x) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_example() {
        let phi = build_amplifier(2.0, 1.0, 1).unwrap();
        assert!((phi.eval(2.0) - 2.0).abs() < 1e-15);
        assert!((phi.eval(1.0) - 1.0 / 13.0).abs() < 1e-15);
        let c = phi.odd_coefficients().unwrap();
        assert!((c[0] + 3.0 / 13.0).abs() < 1e-15);
        assert!((c[1] - 4.0 / 13.0).abs() < 1e-15);
        assert!(1.0 / 13.0 <= tail_bound(1.0, 1.0, 1));
    }

    #[test]
    fn no_gap_is_rejected() {
        assert!(build_amplifier(1.0, 1.0, 2).is_err());
        assert!(build_amplifier(1.0, 0.0, 2).is_err());
    }

    #[test]
    fn recurrence_matches_closed_form() {
        for n in [1usize, 3, 7, 17] {
            for y in [-1.0f64, -0.3, 0.0, 0.8, 1.0, 1.5, 5.0] {
                let closed = if y.abs() <= 1.0 {
                    (n as f64 * y.acos()).cos()
                } else {
                    y.signum().powi(n as i32) * (n as f64 * y.abs().acosh()).cosh()
                };
                let r = chebyshev(n, y);
                assert!((r - closed).abs() <= 1e-12 * closed.abs().max(1.0), "n={n} y={y}");
            }
        }
    }

    #[test]
    fn powers_of_a() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [0.5, -1.0], [3.0, 0.0]]);
        let x = Matrix::from_rows(&[[1.0], [-2.0]]);
        let ax = a.matmul(&x);
        let id = apply_odd_polynomial(&a, &OddPolynomial::identity(), &x).unwrap();
        assert!(id.max_abs_diff(&ax) < 1e-15);
        let cube = apply_odd_polynomial(&a, &OddPolynomial::monomial(vec![0.0, 1.0]), &x).unwrap();
        let expected = a.matmul(&a.tr_matmul(&ax));
        assert!(cube.max_abs_diff(&expected) < 1e-13);
    }
}
