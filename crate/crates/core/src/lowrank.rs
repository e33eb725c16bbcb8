//! The block Krylov proto-algorithm for rank-`h` approximation and its error
//! certificates, with and without a singular gap at the rank parameter.

use serde::Serialize;

use crate::amplifier::{build_amplifier, OddPolynomial};
use crate::basis::{orthonormal_range, truncated_svd_approx, Norms, OrthonormalBasis};
use crate::bounds::{deflation_coefficient, within, BoundContext, TheoremId};
use crate::error::{Error, Result};
use crate::krylov::krylov_basis;
use crate::matrix::Matrix;
use crate::oracle::{Oracle, Side, Tolerances};
use crate::subspace::sin_theta;
use crate::svd::{thin_svd, Svd, DEFAULT_RANK_TOL};

/// Output of the proto-algorithm: `Û_h` and the per-prefix errors.
#[derive(Clone, Debug, Serialize)]
pub struct LowRankResult {
    pub h: usize,
    pub power: usize,
    /// `d = dim K_power(A, X)`.
    pub krylov_dim: usize,
    /// `‖A − Û_iÛ_iᵀA‖₂` for `i = 1..=h`.
    pub errors2: Vec<f64>,
    pub errors_f: Vec<f64>,
    /// `‖A − A_i‖₂ = σ_{i+1}`.
    pub opt_errors2: Vec<f64>,
    pub opt_errors_f: Vec<f64>,
    /// `‖û_iᵀA‖₂`.
    pub captured: Vec<f64>,
    #[serde(skip)]
    pub u_hat: Matrix,
}

/// Runs the proto-algorithm: orthonormalize `K_ell(A, X)`, compress
/// `W = U_Kᵀ A`, and return `Û_h = U_K · U_{W,h}`.
pub fn proto_algorithm(a: &Matrix, x: &Matrix, h: usize, ell: usize, rank_tol: f64) -> Result<LowRankResult> {
    run_proto(a, &thin_svd(a)?, x, h, ell, rank_tol)
}

/// [`proto_algorithm`] reusing the oracle's factorization for the error norms.
pub fn proto_algorithm_on(oracle: &Oracle, x: &Matrix, h: usize, ell: usize, rank_tol: f64) -> Result<LowRankResult> {
    run_proto(oracle.a(), oracle.svd(), x, h, ell, rank_tol)
}

fn run_proto(a: &Matrix, svd: &Svd, x: &Matrix, h: usize, ell: usize, rank_tol: f64) -> Result<LowRankResult> {
    if h == 0 {
        return Err(Error::InvalidArgument("rank parameter must be at least 1".into()));
    }
    let kb = krylov_basis(a, x, ell, rank_tol)?;
    let d = kb.dim();
    if d < h {
        return Err(Error::InsufficientKrylovRank { dim: d, required: h });
    }
    let uk = kb.basis().matrix();
    let w = uk.tr_matmul(a);
    let uw = thin_svd(&w)?.u_head(h);
    let u_hat = uk.matmul(&uw);

    // A = U_r Σ_r V_rᵀ, so (I − P)A and (I − P)U_r Σ_r share singular values.
    let sigma = svd.sigma();
    let r = svd.rank();
    let mut us = svd.u_head(r);
    for (j, s) in sigma[..r].iter().enumerate() {
        us.col_mut(j).iter_mut().for_each(|v| *v *= s);
    }
    let tail_f = |i: usize| sigma.iter().skip(i).map(|s| s * s).sum::<f64>().sqrt();
    let mut errors2 = Vec::with_capacity(h);
    let mut errors_f = Vec::with_capacity(h);
    let mut captured = Vec::with_capacity(h);
    for i in 1..=h {
        let ui = OrthonormalBasis::from_trusted(u_hat.col_range(0..i));
        let e = Norms::of(&ui.project_out(&us));
        errors2.push(e.two);
        errors_f.push(e.fro);
        captured.push(us.tr_matmul(&u_hat.col_range(i - 1..i)).norm_fro());
    }
    Ok(LowRankResult {
        h,
        power: ell,
        krylov_dim: d,
        errors2,
        errors_f,
        opt_errors2: (1..=h).map(|i| sigma.get(i).copied().unwrap_or(0.0)).collect(),
        opt_errors_f: (1..=h).map(tail_f).collect(),
        captured,
        u_hat,
    })
}

/// `‖A − UUᵀA‖` in both norms.
pub fn approx_error(a: &Matrix, u: &OrthonormalBasis) -> Result<Norms> {
    if u.ambient_dim() != a.rows() {
        return Err(Error::InvalidArgument(format!(
            "basis lives in dimension {}, A has {} rows",
            u.ambient_dim(),
            a.rows()
        )));
    }
    Ok(Norms::of(&u.project_out(a)))
}

/// Norm selector for [`best_rank_i_from_range`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Two,
    Frobenius,
}

/// `C · argmin_{rank Y ≤ i} ‖A − CY‖`, computed as `Q·[QᵀA]_i` with `Q` an
/// orthonormal basis of `R(C)`.
///
/// That matrix is the exact Frobenius minimizer. For the spectral norm it is
/// exact when `rank(QᵀA) ≤ i` (then it equals `QQᵀA`) and an upper bound of
/// the minimum otherwise.
pub fn best_rank_i_from_range(c: &Matrix, a: &Matrix, i: usize, _norm: NormKind) -> Result<Matrix> {
    if c.rows() != a.rows() {
        return Err(Error::InvalidArgument("C and A must have the same number of rows".into()));
    }
    let q = orthonormal_range(c, DEFAULT_RANK_TOL)?;
    if i > q.dim() {
        return Err(Error::InvalidArgument(format!(
            "i = {i} exceeds rank(C) = {}",
            q.dim()
        )));
    }
    let qa = q.matrix().tr_matmul(a);
    Ok(q.matrix().matmul(&truncated_svd_approx(&qa, i)?))
}

/// The gapless low-rank certificate for power `q + t + 1`.
#[derive(Clone, Debug, Serialize)]
pub struct LowRankCertificate {
    pub theorem: TheoremId,
    pub h: usize,
    pub j: usize,
    pub k: usize,
    pub q: usize,
    pub t: usize,
    pub power: usize,
    pub theta0: f64,
    /// `4Δ(X,q,j)₂σ_{j+1}/σ_j + Δ*(Y_q,t,k)₂σ_{k+1}/σ_k`.
    pub condition_lhs: f64,
    /// `sin θ0`.
    pub condition_rhs: f64,
    pub applicable: bool,
    pub first_term: Option<Norms>,
    pub second_term: Option<Norms>,
    pub first_omitted: bool,
    pub second_omitted: bool,
    /// `δ_i(θ0) = σ_{i+1} · [Frobenius bracket] / cos θ0` for `i = 1..=h`.
    pub deltas: Vec<f64>,
}

/// A certificate checked against an actual run of the proto-algorithm.
#[derive(Clone, Debug, Serialize)]
pub struct LowRankCheck {
    pub certificate: LowRankCertificate,
    pub result: LowRankResult,
    /// Count of `(i, norm)` pairs where the certified inequality fails
    /// (only counted when the certificate applies).
    pub violations: usize,
}

fn check_theta0(theta0: f64) -> Result<()> {
    if !(theta0 > 0.0 && theta0 < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("θ0 = {theta0} must lie in (0, π/2)")));
    }
    Ok(())
}

/// Evaluates the condition and the `δ_i(θ0)` for the given context.
pub fn lowrank_certificate_in(ctx: &mut BoundContext<'_>, q: usize, t: usize, theta0: f64) -> Result<LowRankCertificate> {
    check_theta0(theta0)?;
    let (first, second) = ctx.augmented_terms(q, t)?;
    let bracket = first.unwrap_or(Norms::ZERO) + second.unwrap_or(Norms::ZERO);
    let p = ctx.partition().clone();
    let cos = theta0.cos();
    let deltas = (1..=p.h).map(|i| p.sigma_after(i) * bracket.fro / cos).collect();
    let condition_rhs = theta0.sin();
    Ok(LowRankCertificate {
        theorem: TheoremId::T37,
        h: p.h,
        j: p.j,
        k: p.k,
        q,
        t,
        power: q + t + 1,
        theta0,
        condition_lhs: bracket.two,
        condition_rhs,
        applicable: bracket.two <= condition_rhs,
        first_term: first,
        second_term: second,
        first_omitted: first.is_none(),
        second_omitted: second.is_none(),
        deltas,
    })
}

/// Single-shot certificate with the default tolerances' hypotheses check.
pub fn lowrank_certificate(
    oracle: &Oracle,
    x: &Matrix,
    h: usize,
    q: usize,
    t: usize,
    theta0: f64,
    tols: &Tolerances,
) -> Result<LowRankCertificate> {
    let mut ctx = BoundContext::new(oracle, x, h, *tols)?;
    lowrank_certificate_in(&mut ctx, q, t, theta0)
}

/// Runs the proto-algorithm at power `q + t + 1` and checks
/// `‖A − Û_iÛ_iᵀA‖ ≤ ‖A − A_i‖ + δ_i(θ0)` whenever the certificate applies.
pub fn certify_lowrank(
    oracle: &Oracle,
    x: &Matrix,
    h: usize,
    q: usize,
    t: usize,
    theta0: f64,
    tols: &Tolerances,
) -> Result<LowRankCheck> {
    let mut ctx = BoundContext::new(oracle, x, h, *tols)?;
    certify_lowrank_in(&mut ctx, oracle, x, q, t, theta0)
}

/// [`certify_lowrank`] reusing an existing context.
pub fn certify_lowrank_in(
    ctx: &mut BoundContext<'_>,
    oracle: &Oracle,
    x: &Matrix,
    q: usize,
    t: usize,
    theta0: f64,
) -> Result<LowRankCheck> {
    let certificate = lowrank_certificate_in(ctx, q, t, theta0)?;
    let result = proto_algorithm_on(oracle, x, certificate.h, certificate.power, ctx.tolerances().krylov_tol)?;
    let violations = if certificate.applicable {
        count_excess(&result, &certificate.deltas)
    } else {
        0
    };
    Ok(LowRankCheck {
        certificate,
        result,
        violations,
    })
}

/// The proto-algorithm at power `q + t + 1`, certified when the guess is
/// compatible and reported bare otherwise.
#[derive(Clone, Debug, Serialize)]
pub struct LowRankReport {
    pub result: LowRankResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<LowRankCertificate>,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncertified: Option<String>,
}

pub fn lowrank_report(
    oracle: &Oracle,
    x: &Matrix,
    h: usize,
    q: usize,
    t: usize,
    theta0: f64,
    tols: &Tolerances,
) -> Result<LowRankReport> {
    match certify_lowrank(oracle, x, h, q, t, theta0, tols) {
        Ok(c) => Ok(LowRankReport {
            result: c.result,
            certificate: Some(c.certificate),
            violations: c.violations,
            uncertified: None,
        }),
        Err(e @ (Error::NotCompatible(_) | Error::NoGapAtIndex { .. })) => Ok(LowRankReport {
            result: proto_algorithm_on(oracle, x, h, q + t + 1, tols.krylov_tol)?,
            certificate: None,
            violations: 0,
            uncertified: Some(e.to_string()),
        }),
        Err(e) => Err(e),
    }
}

/// Absolute slack added to the low-rank error comparisons.
pub const ERROR_SLACK: f64 = 1e-8;

fn count_excess(result: &LowRankResult, deltas: &[f64]) -> usize {
    let mut bad = 0;
    for i in 0..result.h {
        if result.errors2[i] > result.opt_errors2[i] + deltas[i] + ERROR_SLACK {
            bad += 1;
        }
        if result.errors_f[i] > result.opt_errors_f[i] + deltas[i] + ERROR_SLACK {
            bad += 1;
        }
    }
    bad
}

/// One inequality evaluated on an instance.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Check {
            name: name.into(),
            lhs,
            rhs,
            holds: within(lhs, rhs),
        }
    }
}

/// The classical bounds when `σ_k > σ_{k+1}` and `rank(V_kᵀX̃) = k`.
#[derive(Clone, Debug, Serialize)]
pub struct GapCaseReport {
    pub k: usize,
    pub q: usize,
    pub raw: Norms,
    /// `‖φ(Σ_{k,⊥})‖₂ · ‖V_{k,⊥}ᵀX̃(V_kᵀX̃)†‖_F`.
    pub filter_delta: f64,
    /// `Δ(X̃, q, k)`.
    pub delta: Norms,
    pub checks: Vec<Check>,
    pub violations: usize,
}

/// Evaluates every gap-case inequality for the rank parameter `k` and power `q`.
pub fn gap_case_report(oracle: &Oracle, x: &Matrix, k: usize, q: usize, tols: &Tolerances) -> Result<GapCaseReport> {
    let rank = oracle.rank();
    if k == 0 || k > rank {
        return Err(Error::InvalidArgument(format!("k = {k} must satisfy 1 ≤ k ≤ rank = {rank}")));
    }
    let p = oracle.partition(k, tols)?;
    if p.k != k {
        return Err(Error::NoGapAtIndex { index: k });
    }
    let sigma = oracle.svd().sigma().to_vec();
    let vk = oracle.head(Side::Right, k);
    let g = vk.tr_matmul(x);
    let (pinv, r) = crate::basis::pseudoinverse_with_rank(&g, tols.rank_tol)?;
    if r < k {
        return Err(Error::NotCompatible(format!("rank(V_kᵀX) = {r} < k = {k}")));
    }
    let raw = Norms::of(&oracle.tail(Side::Right, k).tr_matmul(x).matmul(&pinv));
    let phi = if k < rank {
        build_amplifier(sigma[k - 1], sigma[k], q)?
    } else {
        OddPolynomial::identity()
    };
    let tail = phi.tail_norm(&sigma[k..]);
    let head_inv = phi.head_inverse_norm(&sigma[..k]);
    let delta = deflation_coefficient(oracle, x, q, k, Side::Right, k, tols)?;
    let ratio = if k < rank { sigma[k] / sigma[k - 1] } else { 0.0 };
    let filter_delta = tail * raw.fro;

    let kq = krylov_basis(oracle.a(), x, q, tols.krylov_tol)?.require_nonempty()?;
    let uk = OrthonormalBasis::from_trusted(oracle.head(Side::Left, k));
    let angle = sin_theta(&uk, kq.basis())?;
    let mut checks = vec![
        Check::new("filter_sin2", angle.two, tail * head_inv * raw.two),
        Check::new("filter_sinF", angle.fro, tail * head_inv * raw.fro),
        Check::new("delta_sin2", angle.two, delta.delta.two * ratio),
        Check::new("delta_sinF", angle.fro, delta.delta.fro * ratio),
    ];

    let run = proto_algorithm_on(oracle, x, k, q, tols.krylov_tol)?;
    let amplified = delta.delta.fro * sigma.get(k).copied().unwrap_or(0.0);
    for i in 0..k {
        let n = i + 1;
        checks.push(Check::new(format!("filter_err2_{n}"), run.errors2[i], run.opt_errors2[i] + filter_delta));
        checks.push(Check::new(format!("filter_errF_{n}"), run.errors_f[i], run.opt_errors_f[i] + filter_delta));
        checks.push(Check::new(format!("captured_lower_{n}"), sigma[i] - filter_delta, run.captured[i]));
        checks.push(Check::new(format!("captured_upper_{n}"), run.captured[i], sigma[i]));
        checks.push(Check::new(format!("delta_err2_{n}"), run.errors2[i], run.opt_errors2[i] + amplified));
        checks.push(Check::new(format!("delta_errF_{n}"), run.errors_f[i], run.opt_errors_f[i] + amplified));
    }
    let violations = checks.iter().filter(|c| !c.holds).count();
    Ok(GapCaseReport {
        k,
        q,
        raw,
        filter_delta,
        delta: delta.delta,
        checks,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_krylov_space_recovers_optimum() {
        let a = Matrix::diag(&[3.0, 2.0, 1.0]);
        for ell in 0..3 {
            let r = proto_algorithm(&a, &Matrix::identity(3), 2, ell, 1e-10).unwrap();
            assert!((r.errors_f[1] - 1.0).abs() < 1e-12);
            assert!((r.opt_errors_f[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_block_is_too_small() {
        let a = Matrix::diag(&[3.0, 2.0, 1.0]);
        let x = Matrix::column_vector(&[1.0, 1.0, 1.0]);
        assert!(matches!(
            proto_algorithm(&a, &x, 3, 0, 1e-10),
            Err(Error::InsufficientKrylovRank { dim: 1, required: 3 })
        ));
    }

    #[test]
    fn range_projection_cases() {
        let a = Matrix::diag(&[3.0, 2.0, 1.0]);
        let c = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        let p = best_rank_i_from_range(&c, &a, 1, NormKind::Frobenius).unwrap();
        assert!(p.max_abs_diff(&Matrix::diag(&[3.0, 0.0, 0.0])) < 1e-12);
        let z = best_rank_i_from_range(&c, &a, 0, NormKind::Two).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert!(best_rank_i_from_range(&c, &a, 3, NormKind::Two).is_err());
    }

    #[test]
    fn approx_error_of_leading_vectors() {
        let a = Matrix::diag(&[3.0, 2.0, 1.0]);
        let u = OrthonormalBasis::coordinate(3, 0..1);
        let e = approx_error(&a, &u).unwrap();
        assert!((e.two - 2.0).abs() < 1e-14);
        assert!((e.fro - 5f64.sqrt()).abs() < 1e-14);
        let e = approx_error(&a, &OrthonormalBasis::coordinate(3, 0..3)).unwrap();
        assert_eq!((e.two, e.fro), (0.0, 0.0));
    }

    #[test]
    fn theta0_must_be_acute() {
        assert!(check_theta0(0.0).is_err());
        assert!(check_theta0(std::f64::consts::FRAC_PI_2).is_err());
        assert!(check_theta0(0.3).is_ok());
    }
}
