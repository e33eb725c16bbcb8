//! Clustering of the singular spectrum and the enclosing indices `j(h)`, `k(h)`.
//!
//! Indices are 1-based throughout, matching `σ_1 ≥ σ_2 ≥ …`. Index 0 stands
//! for the sentinel `σ_0 = +∞` and is never used in arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::svd::{numerical_rank, Svd, DEFAULT_RANK_TOL};

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-10;

/// A maximal run `σ_start..=σ_end` of numerically equal singular values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub start: usize,
    pub end: usize,
    pub value: f64,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.start..=self.end).contains(&index)
    }
}

/// The partition of the spectrum around a target index `h`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumPartition {
    pub h: usize,
    pub j: usize,
    pub k: usize,
    pub rank: usize,
    /// `(σ_j − σ_{j+1}) / σ_{j+1}`; absent when `j = 0`.
    #[serde(serialize_with = "crate::json::option_finite_or_null")]
    pub gamma_j: Option<f64>,
    /// `(σ_k − σ_{k+1}) / σ_{k+1}`; absent when `k = rank`.
    #[serde(serialize_with = "crate::json::option_finite_or_null")]
    pub gamma_k: Option<f64>,
    pub q0: usize,
    pub clusters: Vec<Cluster>,
    pub cluster_tol: f64,
    /// `σ_1 … σ_rank`.
    pub sigma: Vec<f64>,
}

impl SpectrumPartition {
    /// `σ_ℓ` for `1 ≤ ℓ ≤ rank`; `None` for the sentinel `ℓ = 0`.
    pub fn sigma_at(&self, ell: usize) -> Option<f64> {
        if ell == 0 {
            None
        } else {
            self.sigma.get(ell - 1).copied()
        }
    }

    /// `σ_{ℓ+1}`, which is 0 past the rank.
    pub fn sigma_after(&self, ell: usize) -> f64 {
        self.sigma.get(ell).copied().unwrap_or(0.0)
    }

    /// True when the lower gap term is absent (`j = 0`).
    pub fn j_is_zero(&self) -> bool {
        self.j == 0
    }

    /// True when the upper gap term is absent (`k = rank`).
    pub fn k_is_rank(&self) -> bool {
        self.k == self.rank
    }

    /// True when `σ_h = σ_{h+1}`, the regime without a gap at `h`.
    pub fn gapless(&self) -> bool {
        self.k > self.h
    }

    /// `min(γ_j, γ_k)` over the gaps that exist.
    pub fn gamma_min(&self) -> Option<f64> {
        match (self.gamma_j, self.gamma_k) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Cluster index (0-based) holding `σ_ℓ`.
    pub fn cluster_of(&self, ell: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(ell))
    }

    /// Whether `σ_ℓ > σ_{ℓ+1}` in the clustered sense.
    pub fn has_gap_at(&self, ell: usize) -> bool {
        ell >= 1 && ell <= self.rank && self.clusters.iter().any(|c| c.end == ell)
    }
}

/// Groups `σ_1..σ_rank` into clusters: a value joins the current cluster when
/// it is within `cluster_tol · σ_1` of the cluster's first value.
pub fn clusters(sigma: &[f64], cluster_tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let Some(&top) = sigma.first() else {
        return out;
    };
    let tol = cluster_tol * top;
    for (i, &s) in sigma.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (c.value - s).abs() <= tol => c.end = i + 1,
            _ => out.push(Cluster {
                start: i + 1,
                end: i + 1,
                value: s,
            }),
        }
    }
    out
}

/// Partition of a non-increasing spectrum at `h`.
///
/// The rank is the number of values above `1e-12 · σ_1 · len`.
pub fn partition_at(sigma: &[f64], h: usize, cluster_tol: f64) -> Result<SpectrumPartition> {
    validate_sigma(sigma)?;
    let rank = numerical_rank(sigma, sigma.len(), sigma.len(), DEFAULT_RANK_TOL);
    partition_with_rank(sigma, rank, h, cluster_tol)
}

/// Partition using the rank recorded in a factorization.
pub fn partition_svd(svd: &Svd, h: usize, cluster_tol: f64) -> Result<SpectrumPartition> {
    partition_with_rank(svd.sigma(), svd.rank(), h, cluster_tol)
}

fn validate_sigma(sigma: &[f64]) -> Result<()> {
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidInput("singular values must be finite and non-negative".into()));
    }
    if sigma.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("singular values must be non-increasing".into()));
    }
    Ok(())
}

fn partition_with_rank(
    sigma: &[f64],
    rank: usize,
    h: usize,
    cluster_tol: f64,
) -> Result<SpectrumPartition> {
    if !(cluster_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("cluster tolerance {cluster_tol} is negative")));
    }
    if h == 0 || h > rank {
        return Err(Error::InvalidArgument(format!(
            "target index h = {h} must satisfy 1 ≤ h ≤ rank = {rank}"
        )));
    }
    let sigma = sigma[..rank].to_vec();
    let clusters = clusters(&sigma, cluster_tol);
    let q0 = clusters
        .iter()
        .position(|c| c.contains(h))
        .expect("clusters cover 1..=rank");
    let cl = clusters[q0];
    let j = cl.start - 1;
    let k = cl.end;
    let gap = |ell: usize| {
        let next = sigma[ell];
        (sigma[ell - 1] - next) / next
    };
    let gamma_j = (j >= 1).then(|| gap(j));
    let gamma_k = (k < rank).then(|| gap(k));
    debug_assert!(q0 < h);
    Ok(SpectrumPartition {
        h,
        j,
        k,
        rank,
        gamma_j,
        gamma_k,
        q0,
        clusters,
        cluster_tol,
        sigma,
    })
}

/// Parses a spectrum in the cluster notation `"3,2*3,1"` = `(3, 2, 2, 2, 1)`.
pub fn parse_spectrum(spec: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(Error::InvalidInput(format!("empty entry in spectrum '{spec}'")));
        }
        let (value, count) = match item.split_once('*') {
            Some((v, c)) => (v.trim(), c.trim()),
            None => (item, "1"),
        };
        let value: f64 = value
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad singular value '{value}'")))?;
        let count: usize = count
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad multiplicity '{count}'")))?;
        if count == 0 {
            return Err(Error::InvalidInput(format!("zero multiplicity in '{item}'")));
        }
        out.extend(std::iter::repeat(value).take(count));
    }
    validate_sigma(&out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_in_the_middle() {
        let p = partition_at(&[3.0, 2.0, 2.0, 1.0], 2, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!((p.j, p.k, p.q0), (1, 3, 1));
        assert_eq!(p.gamma_j, Some(0.5));
        assert_eq!(p.gamma_k, Some(1.0));
        assert!(p.gapless());
    }

    #[test]
    fn gap_at_h() {
        let p = partition_at(&[3.0, 2.0, 1.0], 2, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!((p.j, p.k, p.q0), (1, 2, 1));
        assert_eq!(p.gamma_k, Some(1.0));
        assert!(!p.gapless());
    }

    #[test]
    fn fully_degenerate_cluster() {
        let p = partition_at(&[2.0, 2.0, 2.0], 2, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!((p.j, p.k, p.rank), (0, 3, 3));
        assert!(p.j_is_zero() && p.k_is_rank());
        assert_eq!((p.gamma_j, p.gamma_k), (None, None));
        assert_eq!(p.q0, 0);
    }

    #[test]
    fn h_beyond_rank_is_rejected() {
        assert!(matches!(
            partition_at(&[2.0, 1.0, 0.0], 3, DEFAULT_CLUSTER_TOL),
            Err(Error::InvalidArgument(_))
        ));
        assert!(partition_at(&[2.0, 1.0], 0, DEFAULT_CLUSTER_TOL).is_err());
    }

    #[test]
    fn near_equal_values_cluster_against_the_anchor() {
        let s = [1.0, 1.0 - 0.6e-10, 1.0 - 1.2e-10, 0.5];
        let c = clusters(&s, 1e-10);
        assert_eq!(c.len(), 3);
        assert_eq!((c[0].start, c[0].end), (1, 2));
    }

    #[test]
    fn j_and_k_do_not_depend_on_h_inside_a_cluster() {
        let s = parse_spectrum("5,4,2*4,1*2").unwrap();
        for h in 3..=6 {
            let p = partition_at(&s, h, DEFAULT_CLUSTER_TOL).unwrap();
            assert_eq!((p.j, p.k, p.q0), (2, 6, 2));
        }
    }

    #[test]
    fn dsl() {
        assert_eq!(parse_spectrum("3,2*3,1").unwrap(), vec![3.0, 2.0, 2.0, 2.0, 1.0]);
        assert!(parse_spectrum("1,2").is_err());
        assert!(parse_spectrum("2*0").is_err());
        assert!(parse_spectrum("a").is_err());
    }
}
