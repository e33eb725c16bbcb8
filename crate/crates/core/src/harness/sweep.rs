//! Seeded experiment sweeps over `(q, t)` grids with JSON and CSV reports.
//!
//! Trial `i` draws its matrix and then its guess from one ChaCha8 generator
//! seeded with the config seed and switched to stream `i`. Each trial is a
//! pure function of `(config, i)`, so serial and parallel runs agree byte for
//! byte; results are ordered by trial, then by `q`, then by `t`.

use std::path::PathBuf;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate_guess_with, generate_test_matrix_with, rng_from_seed, GuessMode};
use crate::bounds::{default_amplifier, BoundCertificate, BoundContext, MonotonicityCertificate, TheoremId};
use crate::error::{Error, Result};
use crate::json::format_f64;
use crate::lowrank::{certify_lowrank_in, LowRankCheck};
use crate::oracle::{Oracle, Tolerances};
use crate::spectrum::parse_spectrum;

/// Environment variable holding the worker thread count for sweeps.
pub const THREADS_ENV: &str = "GAPLESS_THREADS";

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// A spectrum given either as explicit values or in the cluster notation
/// `"3,2*3,1"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectrumSpec {
    Values(Vec<f64>),
    Clusters(String),
}

impl SpectrumSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            SpectrumSpec::Values(v) => Ok(v.clone()),
            SpectrumSpec::Clusters(s) => parse_spectrum(s),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

fn default_monotone_steps() -> usize {
    5
}

fn default_theta0() -> f64 {
    std::f64::consts::FRAC_PI_4
}

fn default_guess() -> GuessMode {
    GuessMode::Random
}

/// A sweep description, read from a single JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spectrum: SpectrumSpec,
    pub m: usize,
    pub n: usize,
    pub h: usize,
    pub q_grid: Vec<usize>,
    pub t_grid: Vec<usize>,
    #[serde(default = "default_guess")]
    pub guess: GuessMode,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Angle used for the low-rank certificate.
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    /// The residual coefficient is tracked for `q = q0 ..= q0 + monotone_steps`.
    #[serde(default = "default_monotone_steps")]
    pub monotone_steps: usize,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    /// The built-in demonstration sweep.
    pub fn demo() -> Self {
        ExperimentConfig {
            spectrum: SpectrumSpec::Clusters("3,2*3,1".into()),
            m: 12,
            n: 10,
            h: 2,
            q_grid: vec![0, 1, 2],
            t_grid: vec![0, 1],
            guess: GuessMode::Random,
            trials: 4,
            seed: 2024,
            tolerances: Tolerances::default(),
            theta0: default_theta0(),
            monotone_steps: default_monotone_steps(),
            output: OutputPaths::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_grid.is_empty() || self.t_grid.is_empty() {
            return Err(Error::InvalidArgument("q_grid and t_grid must be non-empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(self.theta0 > 0.0 && self.theta0 < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidArgument("theta0 must lie in (0, π/2)".into()));
        }
        let sigma = self.spectrum.values()?;
        if self.h == 0 || self.h > sigma.len() {
            return Err(Error::InvalidArgument(format!(
                "h = {} must lie in 1..={}",
                self.h,
                sigma.len()
            )));
        }
        Ok(())
    }
}

/// Results for one `(q, t)` grid point of one trial.
#[derive(Clone, Debug, Serialize)]
pub struct PointRecord {
    pub q: usize,
    pub t: usize,
    pub certificates: Vec<BoundCertificate>,
    pub lowrank: LowRankCheck,
    pub violations: usize,
}

/// Results for one trial.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub j: usize,
    pub k: usize,
    pub q0: usize,
    pub compatible: bool,
    /// Why bounds were not evaluated, if they were not.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotonicity: Option<MonotonicityCertificate>,
    pub points: Vec<PointRecord>,
    pub violations: usize,
}

/// The full sweep report.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub library_version: &'static str,
    pub theorems: Vec<TheoremId>,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub total_violations: usize,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        crate::json::to_string_pretty(self).expect("reports contain only serializable data")
    }

    /// One row per trial and grid point. Skipped trials keep their rows with
    /// empty numeric fields.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = [
            "seed", "trial", "q", "t", "h", "lhs2", "rhs2", "lhsF", "rhsF", "conditionLHS", "errF_h", "optF_h",
            "delta_h", "violations",
        ];
        w.write_record(header).expect("in-memory write");
        let c = &self.config;
        for tr in &self.trials {
            let mut rows: Vec<Vec<String>> = Vec::new();
            if tr.points.is_empty() {
                for &q in &c.q_grid {
                    for &t in &c.t_grid {
                        let mut r = vec![c.seed.to_string(), tr.trial.to_string(), q.to_string(), t.to_string(), c.h.to_string()];
                        r.extend(std::iter::repeat(String::new()).take(8));
                        r.push("0".into());
                        rows.push(r);
                    }
                }
            }
            for p in &tr.points {
                let t34 = p
                    .certificates
                    .iter()
                    .find(|b| b.theorem == TheoremId::T34)
                    .expect("every point carries an augmented-space certificate");
                let lr = &p.lowrank;
                let i = lr.result.h - 1;
                rows.push(vec![
                    c.seed.to_string(),
                    tr.trial.to_string(),
                    p.q.to_string(),
                    p.t.to_string(),
                    c.h.to_string(),
                    format_f64(t34.lhs2),
                    format_f64(t34.rhs2),
                    format_f64(t34.lhs_f),
                    format_f64(t34.rhs_f),
                    format_f64(lr.certificate.condition_lhs),
                    format_f64(lr.result.errors_f[i]),
                    format_f64(lr.result.opt_errors_f[i]),
                    format_f64(lr.certificate.deltas[i]),
                    p.violations.to_string(),
                ]);
            }
            for r in rows {
                w.write_record(&r).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
    }

    /// Writes the JSON and CSV files named in the config.
    pub fn write_outputs(&self) -> Result<()> {
        if let Some(p) = &self.config.output.json {
            std::fs::write(p, self.to_json()).map_err(|e| Error::io(p, e))?;
        }
        if let Some(p) = &self.config.output.csv {
            std::fs::write(p, self.to_csv()).map_err(|e| Error::io(p, e))?;
        }
        Ok(())
    }
}

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|n| *n > 0)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_trial(c: &ExperimentConfig, sigma: &[f64], trial: usize) -> Result<TrialRecord> {
    let mut rng = trial_rng(c.seed, trial);
    let a = generate_test_matrix_with(sigma, c.m, c.n, &mut rng)?;
    let oracle = Oracle::new(a)?;
    let x = generate_guess_with(oracle.svd(), c.h, c.guess, &mut rng)?;
    let tols = c.tolerances;
    let part = oracle.partition(c.h, &tols)?;
    let mut record = TrialRecord {
        trial,
        j: part.j,
        k: part.k,
        q0: part.q0,
        compatible: false,
        skipped: None,
        monotonicity: None,
        points: Vec::new(),
        violations: 0,
    };
    let mut ctx = match BoundContext::new(&oracle, &x, c.h, tols) {
        Ok(ctx) => ctx,
        Err(e @ (Error::NotCompatible(_) | Error::EmptyKrylov)) => {
            record.skipped = Some(e.to_string());
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    record.compatible = true;
    let mono = ctx.thm35(part.q0, part.q0 + c.monotone_steps)?;
    record.violations += mono.violations;
    record.monotonicity = Some(mono);
    for &q in &c.q_grid {
        let phi = default_amplifier(&part, q)?;
        for &t in &c.t_grid {
            let certificates = vec![ctx.thm31(q, &phi)?, ctx.cor32(q)?, ctx.thm33(q, t)?, ctx.thm34(q, t)?];
            let lowrank = certify_lowrank_in(&mut ctx, &oracle, &x, q, t, c.theta0)?;
            let violations = certificates.iter().filter(|b| !b.holds()).count() + lowrank.violations;
            record.violations += violations;
            record.points.push(PointRecord {
                q,
                t,
                certificates,
                lowrank,
                violations,
            });
        }
    }
    Ok(record)
}

/// Runs the sweep with the thread count from [`THREADS_ENV`] (rayon's default
/// when unset).
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    run_sweep_with_threads(config, threads_from_env())
}

/// Runs the sweep on `threads` workers (`Some(1)` is fully serial).
pub fn run_sweep_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<SweepReport> {
    config.validate()?;
    let sigma = config.spectrum.values()?;
    let trials: Vec<TrialRecord> = if threads == Some(1) {
        (0..config.trials)
            .map(|i| run_trial(config, &sigma, i))
            .collect::<Result<_>>()?
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map(|i| run_trial(config, &sigma, i))
                .collect::<Result<_>>()
        })?
    };
    let total_violations = trials.iter().map(|t| t.violations).sum();
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        library_version: env!("CARGO_PKG_VERSION"),
        theorems: vec![
            TheoremId::T31,
            TheoremId::C32,
            TheoremId::T33,
            TheoremId::T34,
            TheoremId::T35,
            TheoremId::T37,
        ],
        config: config.clone(),
        trials,
        total_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_fill_in() {
        let c = ExperimentConfig::from_json(
            r#"{"spectrum":"3,2*3,1","m":8,"n":6,"h":2,"q_grid":[0],"t_grid":[0],"trials":1,"seed":5}"#,
        )
        .unwrap();
        assert_eq!(c.guess, GuessMode::Random);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.spectrum.values().unwrap(), vec![3.0, 2.0, 2.0, 2.0, 1.0]);
        let bad = r#"{"spectrum":[1.0],"m":2,"n":2,"h":1,"q_grid":[],"t_grid":[0],"trials":1,"seed":0}"#;
        assert!(ExperimentConfig::from_json(bad).is_err());
    }

    #[test]
    fn incompatible_trials_are_skipped() {
        let mut c = ExperimentConfig::demo();
        c.guess = GuessMode::AdversarialOrthogonal;
        c.trials = 1;
        let r = run_sweep_with_threads(&c, Some(1)).unwrap();
        assert!(r.trials[0].skipped.is_some());
        assert_eq!(r.to_csv().lines().count(), 1 + 6);
    }
}
