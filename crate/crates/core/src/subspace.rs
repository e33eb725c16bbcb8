//! Principal angles, principal vectors and `sin Θ` / `tan Θ` distances.
//!
//! For subspaces `S` and `T` with orthonormal bases, the cosines of the
//! principal angles are the singular values of `SᵀT`. Cosines lose accuracy
//! for small angles, so angles whose cosine exceeds `1/√2` are recomputed
//! from the sines, which are the singular values of `(I − TTᵀ)S` (taking the
//! smaller subspace as `S`).
//!
//! The `sin Θ` norms follow the asymmetric convention `dim S ≤ dim T`:
//! `‖sin Θ(S, T)‖ = ‖(I − P_T) P_S‖`. [`sin_tan_theta_norms`] rejects the
//! other order instead of silently swapping.

use serde::Serialize;

use crate::basis::{Norms, OrthonormalBasis};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::svd::{singular_values, thin_svd};

/// Angles at or above `π/2 − RIGHT_ANGLE_MARGIN` count as right angles.
pub const RIGHT_ANGLE_MARGIN: f64 = 1e-12;

const SINE_SWITCH: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Principal angles in `[0, π/2]`, non-decreasing, with cached cosines and sines.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrincipalAngles {
    pub angles: Vec<f64>,
    pub cosines: Vec<f64>,
    pub sines: Vec<f64>,
}

impl PrincipalAngles {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn largest(&self) -> Option<f64> {
        self.angles.last().copied()
    }

    pub fn sin_norms(&self) -> Norms {
        Norms {
            two: self.sines.iter().fold(0.0, |m: f64, s| m.max(*s)),
            fro: self.sines.iter().map(|s| s * s).sum::<f64>().sqrt(),
        }
    }
}

/// Principal vectors of `S` (`u_basis`) and `T` (`v_basis`) paired with the angles.
#[derive(Clone, Debug)]
pub struct PrincipalVectorPair {
    pub u_basis: OrthonormalBasis,
    pub v_basis: OrthonormalBasis,
    pub angles: PrincipalAngles,
}

/// `sin Θ` and `tan Θ` norms of a pair of subspaces.
///
/// `tan2`/`tan_f` are `+∞` (and `tan_unbounded` set) when some angle is a
/// right angle within [`RIGHT_ANGLE_MARGIN`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaNorms {
    pub sin2: f64,
    pub sin_f: f64,
    #[serde(serialize_with = "crate::json::finite_or_null")]
    pub tan2: f64,
    #[serde(serialize_with = "crate::json::finite_or_null")]
    pub tan_f: f64,
    pub tan_unbounded: bool,
}

fn check_ambient(s: &OrthonormalBasis, t: &OrthonormalBasis) -> Result<()> {
    if s.ambient_dim() != t.ambient_dim() {
        return Err(Error::InvalidArgument(format!(
            "ambient dimensions differ: {} vs {}",
            s.ambient_dim(),
            t.ambient_dim()
        )));
    }
    Ok(())
}

/// Principal angles and vectors between `R(S)` and `R(T)`.
pub fn principal_angles(s: &OrthonormalBasis, t: &OrthonormalBasis) -> Result<PrincipalVectorPair> {
    check_ambient(s, t)?;
    if s.is_empty() || t.is_empty() {
        return Err(Error::InvalidArgument(
            "principal angles need non-trivial subspaces".into(),
        ));
    }
    let count = s.dim().min(t.dim());
    let cross = s.matrix().tr_matmul(t.matrix());
    let svd = thin_svd(&cross)?;
    let cosines: Vec<f64> = svd.sigma()[..count].iter().map(|c| c.clamp(0.0, 1.0)).collect();

    // Sines of the angles, ascending, from the smaller subspace.
    let residual = if s.dim() <= t.dim() {
        t.project_out(s.matrix())
    } else {
        s.project_out(t.matrix())
    };
    let mut sines = singular_values(&residual);
    sines.truncate(count);
    sines.reverse();
    let sines: Vec<f64> = sines.iter().map(|x| x.clamp(0.0, 1.0)).collect();

    let mut angles = Vec::with_capacity(count);
    let mut prev = 0.0f64;
    for (&c, &sn) in cosines.iter().zip(&sines) {
        let theta = if c > SINE_SWITCH { sn.asin() } else { c.acos() };
        let theta = theta.clamp(0.0, std::f64::consts::FRAC_PI_2).max(prev);
        angles.push(theta);
        prev = theta;
    }

    let u_basis = s.rotate(&svd.u().col_range(0..count));
    let v_basis = t.rotate(&svd.v().col_range(0..count));
    Ok(PrincipalVectorPair {
        u_basis,
        v_basis,
        angles: PrincipalAngles {
            angles,
            cosines,
            sines,
        },
    })
}

/// `sin Θ(S, T)` through the projector route: the norms of `(I − TTᵀ)S`.
///
/// No dimension ordering is enforced; with `dim S ≤ dim T` this equals the
/// `sin Θ` norms of the principal angles.
pub fn sin_theta(s: &OrthonormalBasis, t: &OrthonormalBasis) -> Result<Norms> {
    check_ambient(s, t)?;
    Ok(Norms::of(&t.project_out(s.matrix())))
}

/// `sin Θ` and `tan Θ` norms from the principal angles (requires `dim S ≤ dim T`).
pub fn sin_tan_theta_norms(s: &OrthonormalBasis, t: &OrthonormalBasis) -> Result<ThetaNorms> {
    check_ambient(s, t)?;
    if s.dim() > t.dim() {
        return Err(Error::InvalidArgument(format!(
            "sin Θ(S, T) is defined for dim S ≤ dim T (got {} > {}); the roles are not symmetric",
            s.dim(),
            t.dim()
        )));
    }
    if s.is_empty() {
        return Ok(ThetaNorms {
            sin2: 0.0,
            sin_f: 0.0,
            tan2: 0.0,
            tan_f: 0.0,
            tan_unbounded: false,
        });
    }
    let pa = principal_angles(s, t)?.angles;
    let sin = pa.sin_norms();
    let limit = std::f64::consts::FRAC_PI_2 - RIGHT_ANGLE_MARGIN;
    let unbounded = pa.angles.iter().any(|&a| a >= limit);
    let (tan2, tan_f) = if unbounded {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let tans: Vec<f64> = pa
            .sines
            .iter()
            .zip(&pa.cosines)
            .zip(&pa.angles)
            .map(|((&sn, &c), &a)| if c > SINE_SWITCH { sn / c } else { a.tan() })
            .collect();
        (
            tans.iter().fold(0.0, |m: f64, x| m.max(*x)),
            tans.iter().map(|x| x * x).sum::<f64>().sqrt(),
        )
    };
    Ok(ThetaNorms {
        sin2: sin.two,
        sin_f: sin.fro,
        tan2,
        tan_f,
        tan_unbounded: unbounded,
    })
}

/// Orthonormal basis of `R(A)` (convenience re-export of the range extraction).
pub fn span(a: &Matrix) -> Result<OrthonormalBasis> {
    crate::basis::orthonormal_range(a, crate::svd::DEFAULT_RANK_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn basis(rows: &[&[f64]]) -> OrthonormalBasis {
        OrthonormalBasis::new(Matrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn planar_rotation() {
        let t0: f64 = 0.3;
        let s = basis(&[&[1.0], &[0.0]]);
        let t = basis(&[&[t0.cos()], &[t0.sin()]]);
        let pa = principal_angles(&s, &t).unwrap();
        assert!((pa.angles.angles[0] - 0.3).abs() < 1e-15);
        let n = sin_tan_theta_norms(&s, &t).unwrap();
        assert!((n.sin2 - t0.sin()).abs() < 1e-15);
        assert!((n.tan2 - t0.tan()).abs() < 1e-15);
    }

    #[test]
    fn identical_subspaces() {
        let s = OrthonormalBasis::coordinate(5, 1..4);
        let pa = principal_angles(&s, &s).unwrap();
        assert!(pa.angles.angles.iter().all(|&a| a == 0.0));
        let n = sin_tan_theta_norms(&s, &s).unwrap();
        assert_eq!((n.sin2, n.sin_f, n.tan2, n.tan_f), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn shared_and_orthogonal_directions() {
        let s = OrthonormalBasis::coordinate(3, 0..2);
        let t = basis(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]);
        let pa = principal_angles(&s, &t).unwrap();
        assert!(pa.angles.angles[0].abs() < 1e-15);
        assert!((pa.angles.angles[1] - FRAC_PI_2).abs() < 1e-15);
        let n = sin_tan_theta_norms(&s, &t).unwrap();
        assert!(n.tan_unbounded && n.tan2.is_infinite());
    }

    #[test]
    fn asymmetric_order_is_rejected() {
        let s = OrthonormalBasis::coordinate(4, 0..2);
        let t = OrthonormalBasis::coordinate(4, 0..1);
        assert!(matches!(
            sin_tan_theta_norms(&s, &t),
            Err(Error::InvalidArgument(_))
        ));
        assert!(principal_angles(&s, &OrthonormalBasis::coordinate(5, 0..1)).is_err());
    }

    #[test]
    fn tiny_angles_keep_relative_accuracy() {
        let eps: f64 = 1e-9;
        let s = basis(&[&[1.0], &[0.0]]);
        let t = basis(&[&[eps.cos()], &[eps.sin()]]);
        let pa = principal_angles(&s, &t).unwrap();
        assert!((pa.angles.angles[0] / eps - 1.0).abs() < 1e-12);
    }

    #[test]
    fn principal_vectors_are_paired() {
        let s = basis(&[&[1.0, 0.0], &[0.0, 0.6], &[0.0, 0.8], &[0.0, 0.0]]);
        let t = basis(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]);
        let pair = principal_angles(&s, &t).unwrap();
        let g = pair.u_basis.matrix().tr_matmul(pair.v_basis.matrix());
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { pair.angles.cosines[j] } else { 0.0 };
                assert!((g[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }
}
