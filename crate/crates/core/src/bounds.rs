//! Compatibility tests, the `Δ`/`Δ*` coefficients and certificates for the
//! dominant-subspace bounds.
//!
//! Every bound is an existence statement ("some h-dimensional dominant
//! subspace is close to the Krylov space"). The left-hand side is evaluated
//! against a constructed witness: inside the cluster `σ_{j+1} = … = σ_k` the
//! witness keeps `U_j` and adds the `h − j` directions of `U_k ⊖ U_j` closest
//! to the Krylov space. That choice minimizes the Frobenius distance exactly;
//! when its spectral distance exceeds the bound, a small Grassmann search
//! looks for a better spectral witness before a violation is reported.

use std::collections::HashMap;

use serde::Serialize;

use crate::amplifier::{build_amplifier, decay_factor, OddPolynomial};
use crate::basis::{orthonormal_range, orthonormalize_block, pseudoinverse_with_rank, Norms, OrthonormalBasis};
use crate::error::{Error, Result};
use crate::krylov::{krylov_basis, KrylovBasis};
use crate::matrix::Matrix;
use crate::oracle::{Oracle, Side, Tolerances};
use crate::spectrum::{clusters, SpectrumPartition};
use crate::subspace::{principal_angles, sin_theta};
use crate::svd::thin_svd_with_tol;

/// Slack in `lhs ≤ rhs + SOUNDNESS_TOL · (1 + rhs)`.
pub const SOUNDNESS_TOL: f64 = 1e-8;

/// Slack used when comparing angle vectors entrywise.
pub const ANGLE_TOL: f64 = 1e-9;

/// `lhs ≤ rhs` up to the soundness slack.
pub fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + SOUNDNESS_TOL * (1.0 + rhs)
}

/// Which statement a certificate evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TheoremId {
    /// Krylov space vs. left dominant subspace, general odd filter.
    T31,
    /// Same with the Chebyshev amplifier folded into `Δ`.
    C32,
    /// Augmented space `K*_{q,t}` vs. right dominant subspace.
    T33,
    /// `K_{q+t+1}` vs. left dominant subspace.
    T34,
    /// Monotonicity of the residual coefficient in `q ≥ q0`.
    T35,
    /// Low-rank error certificate.
    T37,
}

impl TheoremId {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::T31 => "t31",
            TheoremId::C32 => "c32",
            TheoremId::T33 => "t33",
            TheoremId::T34 => "t34",
            TheoremId::T35 => "t35",
            TheoremId::T37 => "t37",
        }
    }
}

impl std::str::FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t31" => Ok(TheoremId::T31),
            "c32" => Ok(TheoremId::C32),
            "t33" => Ok(TheoremId::T33),
            "t34" => Ok(TheoremId::T34),
            "t35" => Ok(TheoremId::T35),
            "t37" => Ok(TheoremId::T37),
            other => Err(Error::InvalidArgument(format!("unknown theorem id '{other}'"))),
        }
    }
}

/// An `h`-dimensional dominant subspace on one side.
#[derive(Clone, Debug)]
pub struct DominantSubspace {
    pub side: Side,
    pub basis: OrthonormalBasis,
    pub h: usize,
}

/// Outcome of the compatibility test.
#[derive(Clone, Debug, Serialize)]
pub struct CompatReport {
    pub compatible: bool,
    pub h: usize,
    pub j: usize,
    pub k: usize,
    /// `π/2` minus the largest principal angle between the witness and `R(X)`.
    pub margin_angle: f64,
    pub min_cosine: f64,
    pub angles: Vec<f64>,
    pub compat_tol: f64,
    #[serde(skip)]
    pub witness: Option<DominantSubspace>,
}

/// `Δ`-type coefficient `4·raw / 2^{(2·power+1)·min(√γ, 1)}` with
/// `raw = ‖tailᵀ W (headᵀ W)†‖`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeflationCoefficient {
    pub index: usize,
    pub power: usize,
    pub side: Side,
    pub raw: Norms,
    pub delta: Norms,
    #[serde(serialize_with = "crate::json::option_finite_or_null")]
    pub gamma: Option<f64>,
    /// Set when `index` is 0 or the rank, where the term is dropped.
    pub omitted: bool,
}

/// How the spectral left-hand side was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// The principal-direction witness (Frobenius-optimal).
    Principal,
    /// The exhaustive Grassmann search improved the spectral value.
    GridSearch,
}

/// Entrywise comparison of two vectors of principal angles.
#[derive(Clone, Debug, Serialize)]
pub struct AngleComparison {
    pub compressed: Vec<f64>,
    pub original: Vec<f64>,
    pub holds: bool,
}

/// One evaluated bound: right-hand side, achieved left-hand side and provenance.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCertificate {
    pub theorem: TheoremId,
    pub h: usize,
    pub j: usize,
    pub k: usize,
    pub q: usize,
    pub t: Option<usize>,
    pub rhs2: f64,
    pub rhs_f: f64,
    pub lhs2: f64,
    pub lhs_f: f64,
    pub first_term: Option<Norms>,
    pub second_term: Option<Norms>,
    pub first_omitted: bool,
    pub second_omitted: bool,
    pub krylov_dim: usize,
    pub spectral_witness: WitnessKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secondary: Option<AngleComparison>,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub witness: DominantSubspace,
}

impl BoundCertificate {
    /// `lhs ≤ rhs` in both norms (and the secondary inequality, if any).
    pub fn holds(&self) -> bool {
        within(self.lhs2, self.rhs2)
            && within(self.lhs_f, self.rhs_f)
            && self.secondary.as_ref().map_or(true, |s| s.holds)
    }
}

/// Residual coefficients over a range of powers, checked for monotonicity.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityCertificate {
    pub theorem: TheoremId,
    pub q0: usize,
    pub q_from: usize,
    pub values: Vec<Norms>,
    pub violations: usize,
    pub slack: f64,
}

impl MonotonicityCertificate {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Slack for the monotonicity check.
pub const MONOTONE_SLACK: f64 = 1e-10;

fn check_rows(oracle: &Oracle, x: &Matrix) -> Result<()> {
    if x.rows() != oracle.a().cols() {
        return Err(Error::InvalidArgument(format!(
            "X has {} rows but A has {} columns",
            x.rows(),
            oracle.a().cols()
        )));
    }
    x.ensure_finite()
}

struct PrincipalWitness {
    subspace: DominantSubspace,
    /// `(U_j, C, P0)` when the cluster leaves freedom (`h < k`).
    free: Option<(Matrix, Matrix, Matrix)>,
}

fn principal_witness(
    oracle: &Oracle,
    target: &OrthonormalBasis,
    h: usize,
    side: Side,
    tols: &Tolerances,
) -> Result<PrincipalWitness> {
    let p = oracle.partition(h, tols)?;
    if target.ambient_dim() != oracle.ambient(side) {
        return Err(Error::InvalidArgument(format!(
            "target lives in dimension {}, expected {}",
            target.ambient_dim(),
            oracle.ambient(side)
        )));
    }
    if p.k == h {
        return Ok(PrincipalWitness {
            subspace: DominantSubspace {
                side,
                basis: OrthonormalBasis::from_trusted(oracle.head(side, h)),
                h,
            },
            free: None,
        });
    }
    let uj = oracle.head(side, p.j);
    let c = oracle.block(side, p.j, p.k);
    let p0 = if target.is_empty() {
        Matrix::identity(c.cols()).col_range(0..h - p.j)
    } else {
        let cross = c.tr_matmul(target.matrix());
        thin_svd_with_tol(&cross, tols.rank_tol)?.u_head(h - p.j)
    };
    let basis = Matrix::hcat(&[&uj, &c.matmul(&p0)]);
    Ok(PrincipalWitness {
        subspace: DominantSubspace {
            side,
            basis: OrthonormalBasis::from_trusted(basis),
            h,
        },
        free: Some((uj, c, p0)),
    })
}

/// `U_j ⊕ C·P` with `C` spanning `U_k ⊖ U_j` and `P` the `h − j` principal
/// directions of `R(C)` towards `target` (`V` in place of `U` for the right side).
pub fn best_dominant_subspace(
    oracle: &Oracle,
    target: &OrthonormalBasis,
    h: usize,
    side: Side,
    tols: &Tolerances,
) -> Result<DominantSubspace> {
    Ok(principal_witness(oracle, target, h, side, tols)?.subspace)
}

/// Decides whether some `h`-dimensional right dominant subspace makes all
/// principal angles with `R(X)` smaller than `π/2`.
///
/// The witness keeps `V_j`, projects the cluster block `Q_XᵀV_c` away from
/// `R(Q_XᵀV_j)` and takes the top `h − j` right singular vectors of the
/// remainder. `dim(XᵀS) = h` is attainable exactly when this witness attains it.
pub fn is_h_compatible(oracle: &Oracle, x: &Matrix, h: usize, tols: &Tolerances) -> Result<CompatReport> {
    check_rows(oracle, x)?;
    let p = oracle.partition(h, tols)?;
    let qx = orthonormal_range(x, tols.rank_tol)?;
    let report = |compatible: bool, angles: Vec<f64>, min_cosine: f64, witness| {
        let largest = angles.last().copied().unwrap_or(std::f64::consts::FRAC_PI_2);
        CompatReport {
            compatible,
            h,
            j: p.j,
            k: p.k,
            margin_angle: std::f64::consts::FRAC_PI_2 - largest,
            min_cosine,
            angles,
            compat_tol: tols.compat_tol,
            witness,
        }
    };
    if qx.is_empty() {
        let w = best_dominant_subspace(oracle, &qx, h, Side::Right, tols)?;
        return Ok(report(false, vec![std::f64::consts::FRAC_PI_2; h], 0.0, Some(w)));
    }
    let vj = oracle.head(Side::Right, p.j);
    let vc = oracle.block(Side::Right, p.j, p.k);
    let basis = if p.k == h {
        oracle.head(Side::Right, h)
    } else {
        let gj = qx.matrix().tr_matmul(&vj);
        let pi = orthonormal_range(&gj, tols.rank_tol)?;
        let rest = pi.project_out(&qx.matrix().tr_matmul(&vc));
        let pdir = thin_svd_with_tol(&rest, tols.rank_tol)?.v_head(h - p.j);
        Matrix::hcat(&[&vj, &vc.matmul(&pdir)])
    };
    let witness = DominantSubspace {
        side: Side::Right,
        basis: OrthonormalBasis::from_trusted(basis),
        h,
    };
    let pa = principal_angles(&witness.basis, &qx)?.angles;
    let mut angles = pa.angles.clone();
    let mut min_cos = pa.cosines.last().copied().unwrap_or(0.0);
    if qx.dim() < h {
        angles.resize(h, std::f64::consts::FRAC_PI_2);
        min_cos = 0.0;
    }
    let compatible = qx.dim() >= h && min_cos > tols.compat_tol;
    Ok(report(compatible, angles, min_cos, Some(witness)))
}

fn has_gap(oracle: &Oracle, ell: usize, tols: &Tolerances) -> bool {
    let sigma = &oracle.svd().sigma()[..oracle.rank()];
    clusters(sigma, tols.cluster_tol).iter().any(|c| c.end == ell)
}

/// The `Δ` (right side, `V`) or `Δ*` (left side, `U`) coefficient at index `ell`.
///
/// `min_rank` is the rank required of `headᵀW`: `ell` itself when the index
/// is `j`, and `h` for the cluster end `k`, where `headᵀW` can have rank
/// `h < k`.
pub fn deflation_coefficient(
    oracle: &Oracle,
    w: &Matrix,
    power: usize,
    ell: usize,
    side: Side,
    min_rank: usize,
    tols: &Tolerances,
) -> Result<DeflationCoefficient> {
    if w.rows() != oracle.ambient(side) {
        return Err(Error::InvalidArgument(format!(
            "W has {} rows, expected {}",
            w.rows(),
            oracle.ambient(side)
        )));
    }
    let rank = oracle.rank();
    if ell == 0 || ell >= rank {
        return Ok(DeflationCoefficient {
            index: ell,
            power,
            side,
            raw: Norms::ZERO,
            delta: Norms::ZERO,
            gamma: None,
            omitted: true,
        });
    }
    if !has_gap(oracle, ell, tols) {
        return Err(Error::NoGapAtIndex { index: ell });
    }
    let raw = raw_coefficient(oracle, w, ell, side, min_rank, tols)?;
    let s = oracle.svd();
    let gamma = (s.sigma_at(ell) - s.sigma_at(ell + 1)) / s.sigma_at(ell + 1);
    Ok(DeflationCoefficient {
        index: ell,
        power,
        side,
        raw,
        delta: raw.scale(4.0 / decay_factor(gamma, power)),
        gamma: Some(gamma),
        omitted: false,
    })
}

fn raw_coefficient(
    oracle: &Oracle,
    w: &Matrix,
    ell: usize,
    side: Side,
    min_rank: usize,
    tols: &Tolerances,
) -> Result<Norms> {
    let head = oracle.head(side, ell).tr_matmul(w);
    let (pinv, r) = pseudoinverse_with_rank(&head, tols.rank_tol)?;
    if r < min_rank.max(1) {
        return Err(Error::NotCompatible(format!(
            "projection onto the top {ell} singular vectors has rank {r}, need {}",
            min_rank.max(1)
        )));
    }
    Ok(Norms::of(&oracle.tail(side, ell).tr_matmul(w).matmul(&pinv)))
}

/// `‖U_{k,⊥}ᵀ Y (U_kᵀ Y)†‖` in both norms.
pub fn residual_coefficient(oracle: &Oracle, y: &OrthonormalBasis, k: usize, tols: &Tolerances) -> Result<Norms> {
    if y.ambient_dim() != oracle.a().rows() {
        return Err(Error::InvalidArgument("Y must live in the column space dimension of A".into()));
    }
    raw_coefficient(oracle, y.matrix(), k, Side::Left, 1, tols)
}

/// The scaled Chebyshev amplifier for the gap at `k`, or `φ(x) = x` when `k = rank`.
pub fn default_amplifier(partition: &SpectrumPartition, q: usize) -> Result<OddPolynomial> {
    if partition.k_is_rank() {
        return Ok(OddPolynomial::identity());
    }
    let sk = partition.sigma_at(partition.k).expect("k ≥ 1");
    build_amplifier(sk, partition.sigma_after(partition.k), q)
}

/// Exhaustive spectral search over `(h−j)`-dimensional subspaces of `R(C)`
/// when the Grassmannian has at most four dimensions. Returns the smallest
/// `‖(I − P_K)[U_j, CP]‖₂` found.
fn grid_spectral_witness(k_basis: &OrthonormalBasis, uj: &Matrix, c: &Matrix, p0: &Matrix) -> Option<f64> {
    let d = p0.cols();
    let cdim = c.cols();
    let nparams = d * (cdim - d);
    if nparams == 0 || nparams > 4 {
        return None;
    }
    let rj = k_basis.project_out(uj);
    let rc = k_basis.project_out(c);
    let gjj = rj.tr_matmul(&rj);
    let gjc = rj.tr_matmul(&rc);
    let gcc = rc.tr_matmul(&rc);
    let jd = uj.cols();
    let p0c = OrthonormalBasis::from_trusted(p0.clone()).complement().into_matrix();

    let eval = |theta: &[f64]| -> f64 {
        let b = Matrix::from_fn(cdim - d, d, |r, s| theta[r * d + s].tan());
        let m = p0 + &p0c.matmul(&b);
        let p = orthonormalize_block(&Matrix::zeros(cdim, 0), &m, 0.0);
        let top = gjc.matmul(&p);
        let bottom = p.tr_matmul(&gcc.matmul(&p));
        let n = jd + d;
        let g = nalgebra::DMatrix::from_fn(n, n, |r, s| match (r < jd, s < jd) {
            (true, true) => gjj[(r, s)],
            (true, false) => top[(r, s - jd)],
            (false, true) => top[(s, r - jd)],
            (false, false) => bottom[(r - jd, s - jd)],
        });
        g.symmetric_eigenvalues().max().max(0.0).sqrt()
    };

    let step_deg = match nparams {
        1 | 2 => 10.0,
        3 => 15.0,
        _ => 20.0,
    };
    let span = (89.999 / step_deg) as i64;
    let to_rad = std::f64::consts::PI / 180.0;
    let mut best_theta = vec![0.0; nparams];
    let mut best = eval(&best_theta);
    let mut idx = vec![-span; nparams];
    'grid: loop {
        let theta: Vec<f64> = idx.iter().map(|&i| i as f64 * step_deg * to_rad).collect();
        let v = eval(&theta);
        if v < best {
            best = v;
            best_theta = theta;
        }
        for slot in idx.iter_mut() {
            if *slot < span {
                *slot += 1;
                continue 'grid;
            }
            *slot = -span;
        }
        break;
    }

    let limit = 89.99 * to_rad;
    for step in [1.0, 0.1, 0.01] {
        let h = step * to_rad;
        for _ in 0..500 {
            let mut improved = false;
            for i in 0..nparams {
                for sign in [-1.0, 1.0] {
                    let mut trial = best_theta.clone();
                    trial[i] = (trial[i] + sign * h).clamp(-limit, limit);
                    let v = eval(&trial);
                    if v < best {
                        best = v;
                        best_theta = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    Some(best)
}

struct Lhs {
    norms: Norms,
    witness: DominantSubspace,
    kind: WitnessKind,
}

fn evaluate_lhs(
    oracle: &Oracle,
    k_basis: &OrthonormalBasis,
    h: usize,
    side: Side,
    rhs2: f64,
    tols: &Tolerances,
) -> Result<Lhs> {
    let pw = principal_witness(oracle, k_basis, h, side, tols)?;
    let mut norms = sin_theta(&pw.subspace.basis, k_basis)?;
    let mut kind = WitnessKind::Principal;
    if !within(norms.two, rhs2) {
        if let Some((uj, c, p0)) = &pw.free {
            if let Some(v) = grid_spectral_witness(k_basis, uj, c, p0) {
                if v < norms.two {
                    norms.two = v;
                    kind = WitnessKind::GridSearch;
                }
            }
        }
    }
    Ok(Lhs {
        norms,
        witness: pw.subspace,
        kind,
    })
}

/// Cached state for evaluating many certificates of one `(A, X, h)` triple.
///
/// Krylov bases are grown on demand and reused: the basis of `K_q` is a
/// column prefix of the basis of `K_{q'}` for `q ≤ q'`.
pub struct BoundContext<'a> {
    oracle: &'a Oracle,
    x: Matrix,
    ax: Matrix,
    at: Matrix,
    h: usize,
    tols: Tolerances,
    partition: SpectrumPartition,
    compat: CompatReport,
    krylov_x: Option<KrylovBasis>,
    krylov_w: Option<KrylovBasis>,
    augmented: HashMap<usize, KrylovBasis>,
}

impl<'a> BoundContext<'a> {
    /// Verifies the hypotheses (range of `h`, compatibility) up front.
    pub fn new(oracle: &'a Oracle, x: &Matrix, h: usize, tols: Tolerances) -> Result<Self> {
        check_rows(oracle, x)?;
        let partition = oracle.partition(h, &tols)?;
        let compat = is_h_compatible(oracle, x, h, &tols)?;
        if !compat.compatible {
            return Err(Error::NotCompatible(format!(
                "no {h}-dimensional right dominant subspace meets R(X) at angles below π/2 (min cosine {:.3e})",
                compat.min_cosine
            )));
        }
        Ok(BoundContext {
            oracle,
            ax: oracle.a().matmul(x),
            at: oracle.a().transpose(),
            x: x.clone(),
            h,
            tols,
            partition,
            compat,
            krylov_x: None,
            krylov_w: None,
            augmented: HashMap::new(),
        })
    }

    pub fn partition(&self) -> &SpectrumPartition {
        &self.partition
    }

    pub fn compat(&self) -> &CompatReport {
        &self.compat
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tols
    }

    /// Basis of `K_q(A, X)`.
    pub fn krylov(&mut self, q: usize) -> Result<OrthonormalBasis> {
        let kb = match &mut self.krylov_x {
            Some(kb) => kb,
            slot => slot.insert(krylov_basis(self.oracle.a(), &self.x, q, self.tols.krylov_tol)?),
        };
        kb.grow_to(self.oracle.a(), q);
        let b = kb.prefix(q);
        if b.is_empty() {
            return Err(Error::EmptyKrylov);
        }
        Ok(b)
    }

    /// Basis of `K_q(Aᵀ, AX)`.
    fn krylov_w(&mut self, q: usize) -> Result<OrthonormalBasis> {
        let kb = match &mut self.krylov_w {
            Some(kb) => kb,
            slot => slot.insert(krylov_basis(&self.at, &self.ax, q, self.tols.krylov_tol)?),
        };
        kb.grow_to(&self.at, q);
        let b = kb.prefix(q);
        if b.is_empty() {
            return Err(Error::EmptyKrylov);
        }
        Ok(b)
    }

    /// Basis of `K*_{q,t} = K_t(Aᵀ, Y_q)`.
    pub fn augmented(&mut self, q: usize, t: usize) -> Result<OrthonormalBasis> {
        if !self.augmented.contains_key(&q) {
            let y = self.krylov(q)?;
            let kb = krylov_basis(&self.at, y.matrix(), t, self.tols.krylov_tol)?;
            self.augmented.insert(q, kb);
        }
        let kb = self.augmented.get_mut(&q).expect("inserted above");
        kb.grow_to(&self.at, t);
        let b = kb.prefix(t);
        if b.is_empty() {
            return Err(Error::EmptyKrylov);
        }
        Ok(b)
    }

    fn gap_ratio(&self, ell: usize) -> f64 {
        let s = self.oracle.svd();
        s.sigma_at(ell + 1) / s.sigma_at(ell)
    }

    fn term(&self, c: DeflationCoefficient, factor: f64) -> Option<Norms> {
        (!c.omitted).then(|| c.delta.scale(factor * self.gap_ratio(c.index)))
    }

    /// `4·Δ(X,q,j)·σ_{j+1}/σ_j` and `Δ*(Y_q,t,k)·σ_{k+1}/σ_k`; `None` marks an omitted term.
    pub fn augmented_terms(&mut self, q: usize, t: usize) -> Result<(Option<Norms>, Option<Norms>)> {
        let (j, k, h) = (self.partition.j, self.partition.k, self.h);
        let first = deflation_coefficient(self.oracle, &self.x, q, j, Side::Right, j, &self.tols)?;
        let y = self.krylov(q)?;
        let second = deflation_coefficient(self.oracle, y.matrix(), t, k, Side::Left, h, &self.tols)?;
        Ok((self.term(first, 4.0), self.term(second, 1.0)))
    }

    fn certificate(
        &self,
        theorem: TheoremId,
        q: usize,
        t: Option<usize>,
        terms: (Option<Norms>, Option<Norms>),
        k_basis: &OrthonormalBasis,
        side: Side,
    ) -> Result<BoundCertificate> {
        let rhs = terms.0.unwrap_or(Norms::ZERO) + terms.1.unwrap_or(Norms::ZERO);
        let lhs = evaluate_lhs(self.oracle, k_basis, self.h, side, rhs.two, &self.tols)?;
        Ok(BoundCertificate {
            theorem,
            h: self.h,
            j: self.partition.j,
            k: self.partition.k,
            q,
            t,
            rhs2: rhs.two,
            rhs_f: rhs.fro,
            lhs2: lhs.norms.two,
            lhs_f: lhs.norms.fro,
            first_term: terms.0,
            second_term: terms.1,
            first_omitted: terms.0.is_none(),
            second_omitted: terms.1.is_none(),
            krylov_dim: k_basis.dim(),
            spectral_witness: lhs.kind,
            secondary: None,
            tolerances: self.tols,
            witness: lhs.witness,
        })
    }

    /// `K_q` against a left dominant subspace with an arbitrary admissible odd filter `φ`.
    pub fn thm31(&mut self, q: usize, phi: &OddPolynomial) -> Result<BoundCertificate> {
        let (j, k, h) = (self.partition.j, self.partition.k, self.h);
        if phi.degree() > 2 * q + 1 {
            return Err(Error::InvalidArgument(format!(
                "filter degree {} exceeds 2q + 1 = {}",
                phi.degree(),
                2 * q + 1
            )));
        }
        let sigma = self.oracle.svd().sigma();
        if !phi.is_admissible(&sigma[..k]) {
            return Err(Error::InvalidArgument(
                "filter must satisfy φ(σ_1) ≥ … ≥ φ(σ_k) > 0".into(),
            ));
        }
        let vk = self.oracle.head(Side::Right, k);
        let compressed = orthonormal_range(&vk.tr_matmul(&self.x), self.tols.rank_tol)?;
        let (first, secondary) = if j == 0 {
            (None, None)
        } else {
            let ej = OrthonormalBasis::coordinate(k, 0..j);
            let first = sin_theta(&ej, &compressed)?.scale(4.0);
            let vj = OrthonormalBasis::from_trusted(self.oracle.head(Side::Right, j));
            let qx = orthonormal_range(&self.x, self.tols.rank_tol)?;
            let lhs = principal_angles(&ej, &compressed)?.angles.angles;
            let rhs = principal_angles(&vj, &qx)?.angles.angles;
            let holds = lhs.iter().zip(&rhs).all(|(a, b)| *a <= b + ANGLE_TOL);
            (
                Some(first),
                Some(AngleComparison {
                    compressed: lhs,
                    original: rhs,
                    holds,
                }),
            )
        };
        let second = if self.partition.k_is_rank() {
            None
        } else {
            let raw = raw_coefficient(self.oracle, &self.x, k, Side::Right, h, &self.tols)?;
            let factor = phi.tail_norm(&sigma[k..]) * phi.head_inverse_norm(&sigma[..k]);
            Some(raw.scale(factor))
        };
        let kq = self.krylov(q)?;
        let mut cert = self.certificate(TheoremId::T31, q, None, (first, second), &kq, Side::Left)?;
        cert.secondary = secondary;
        Ok(cert)
    }

    /// `K_q` against a left dominant subspace, amplifier folded into `Δ(X,q,k)`.
    pub fn cor32(&mut self, q: usize) -> Result<BoundCertificate> {
        let (j, k, h) = (self.partition.j, self.partition.k, self.h);
        let first = if j == 0 {
            None
        } else {
            let vj = OrthonormalBasis::from_trusted(self.oracle.head(Side::Right, j));
            let qx = orthonormal_range(&self.x, self.tols.rank_tol)?;
            Some(sin_theta(&vj, &qx)?.scale(4.0))
        };
        let delta = deflation_coefficient(self.oracle, &self.x, q, k, Side::Right, h, &self.tols)?;
        let second = self.term(delta, 1.0);
        let kq = self.krylov(q)?;
        self.certificate(TheoremId::C32, q, None, (first, second), &kq, Side::Left)
    }

    /// `K*_{q,t}` against a right dominant subspace.
    pub fn thm33(&mut self, q: usize, t: usize) -> Result<BoundCertificate> {
        let terms = self.augmented_terms(q, t)?;
        let kstar = self.augmented(q, t)?;
        self.certificate(TheoremId::T33, q, Some(t), terms, &kstar, Side::Right)
    }

    /// `K_{q+t+1}` against a left dominant subspace.
    pub fn thm34(&mut self, q: usize, t: usize) -> Result<BoundCertificate> {
        let (j, k, h) = (self.partition.j, self.partition.k, self.h);
        let first = deflation_coefficient(self.oracle, &self.ax, q, j, Side::Left, j, &self.tols)?;
        let wq = self.krylov_w(q)?;
        let second = deflation_coefficient(self.oracle, wq.matrix(), t, k, Side::Right, h, &self.tols)?;
        let terms = (self.term(first, 4.0), self.term(second, 1.0));
        let kq = self.krylov(q + t + 1)?;
        self.certificate(TheoremId::T34, q, Some(t), terms, &kq, Side::Left)
    }

    /// `‖U_{k,⊥}ᵀ Y_q (U_kᵀ Y_q)†‖` for `q = q_from..=q_to`, checked to be non-increasing
    /// from `q0` on.
    pub fn thm35(&mut self, q_from: usize, q_to: usize) -> Result<MonotonicityCertificate> {
        let k = self.partition.k;
        let mut values = Vec::with_capacity(q_to.saturating_sub(q_from) + 1);
        for q in q_from..=q_to {
            let y = self.krylov(q)?;
            values.push(residual_coefficient(self.oracle, &y, k, &self.tols)?);
        }
        let q0 = self.partition.q0;
        let mut violations = 0;
        for (i, w) in values.windows(2).enumerate() {
            if q_from + i < q0 {
                continue;
            }
            let bad = |a: f64, b: f64| b > a + MONOTONE_SLACK * (1.0 + a);
            if bad(w[0].two, w[1].two) || bad(w[0].fro, w[1].fro) {
                violations += 1;
            }
        }
        Ok(MonotonicityCertificate {
            theorem: TheoremId::T35,
            q0,
            q_from,
            values,
            violations,
            slack: MONOTONE_SLACK,
        })
    }
}

/// Single-shot form of [`BoundContext::thm31`].
pub fn thm31_bound(
    oracle: &Oracle,
    x: &Matrix,
    h: usize,
    q: usize,
    phi: &OddPolynomial,
    tols: &Tolerances,
) -> Result<BoundCertificate> {
    BoundContext::new(oracle, x, h, *tols)?.thm31(q, phi)
}

/// Single-shot form of [`BoundContext::cor32`].
pub fn cor32_bound(oracle: &Oracle, x: &Matrix, h: usize, q: usize, tols: &Tolerances) -> Result<BoundCertificate> {
    BoundContext::new(oracle, x, h, *tols)?.cor32(q)
}

/// Single-shot form of [`BoundContext::thm33`].
pub fn thm33_bound(
    oracle: &Oracle,
    x: &Matrix,
    h: usize,
    q: usize,
    t: usize,
    tols: &Tolerances,
) -> Result<BoundCertificate> {
    BoundContext::new(oracle, x, h, *tols)?.thm33(q, t)
}

/// Single-shot form of [`BoundContext::thm34`].
pub fn thm34_bound(
    oracle: &Oracle,
    x: &Matrix,
    h: usize,
    q: usize,
    t: usize,
    tols: &Tolerances,
) -> Result<BoundCertificate> {
    BoundContext::new(oracle, x, h, *tols)?.thm34(q, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn diag221() -> Oracle {
        Oracle::new(Matrix::diag(&[2.0, 2.0, 1.0])).unwrap()
    }

    fn col(v: &[f64]) -> Matrix {
        Matrix::column_vector(v)
    }

    #[test]
    fn compatibility_examples() {
        let o = diag221();
        let tols = Tolerances::default();
        let r = is_h_compatible(&o, &col(&[1.0, 0.0, 0.0]), 1, &tols).unwrap();
        assert!(r.compatible);
        let w = r.witness.unwrap();
        assert!((w.basis.matrix()[(0, 0)].abs() - 1.0).abs() < 1e-14);

        let r = is_h_compatible(&o, &col(&[0.0, 0.0, 1.0]), 1, &tols).unwrap();
        assert!(!r.compatible);

        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        let r = is_h_compatible(&o, &x, 2, &tols).unwrap();
        assert!(r.compatible);
        assert!((r.margin_angle - FRAC_PI_2).abs() < 1e-12);
        assert!(is_h_compatible(&o, &x, 4, &tols).is_err());
    }

    #[test]
    fn deflation_example() {
        let o = diag221();
        let tols = Tolerances::default();
        let s = 0.5f64.sqrt();
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, s], [0.0, s]]);
        let d = deflation_coefficient(&o, &x, 1, 2, Side::Right, 2, &tols).unwrap();
        assert!((d.raw.two - 1.0).abs() < 1e-12);
        assert_eq!(d.gamma, Some(1.0));
        assert!((d.delta.two - 0.5).abs() < 1e-12);

        let d = deflation_coefficient(&o, &x, 1, 3, Side::Right, 2, &tols).unwrap();
        assert!(d.omitted && d.delta == Norms::ZERO);
        assert!(matches!(
            deflation_coefficient(&o, &x, 1, 1, Side::Right, 1, &tols),
            Err(Error::NoGapAtIndex { index: 1 })
        ));
    }

    #[test]
    fn aligned_start_has_zero_raw_coefficient() {
        let o = Oracle::new(Matrix::diag(&[3.0, 2.0, 2.0, 1.0])).unwrap();
        let tols = Tolerances::default();
        let v3 = o.head(Side::Right, 3);
        let d = deflation_coefficient(&o, &v3, 2, 3, Side::Right, 3, &tols).unwrap();
        assert!(d.raw.fro < 1e-14);
    }

    #[test]
    fn witness_inside_cluster() {
        let o = diag221();
        let tols = Tolerances::default();
        let s = 0.5f64.sqrt();
        let target = OrthonormalBasis::new(col(&[s, s, 0.0])).unwrap();
        let w = best_dominant_subspace(&o, &target, 1, Side::Left, &tols).unwrap();
        assert!(sin_theta(&w.basis, &target).unwrap().two < 1e-14);

        let o = Oracle::new(Matrix::diag(&[3.0, 2.0, 1.0])).unwrap();
        let w = best_dominant_subspace(&o, &target, 2, Side::Left, &tols).unwrap();
        let u2 = OrthonormalBasis::coordinate(3, 0..2);
        assert!(sin_theta(&w.basis, &u2).unwrap().two < 1e-14);
    }

    #[test]
    fn degenerate_spectrum_omits_both_terms() {
        let o = Oracle::new(Matrix::diag(&[2.0, 2.0, 2.0])).unwrap();
        let tols = Tolerances::default();
        let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [0.0, 2.0]]);
        let c = cor32_bound(&o, &x, 2, 1, &tols).unwrap();
        assert!(c.first_omitted && c.second_omitted);
        assert_eq!((c.rhs2, c.rhs_f), (0.0, 0.0));
        assert!(c.lhs_f < 1e-12 && c.holds());
    }

    #[test]
    fn theorem_ids_parse() {
        assert_eq!("T34".parse::<TheoremId>().unwrap(), TheoremId::T34);
        assert!("t99".parse::<TheoremId>().is_err());
    }
}
