use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gapless::bounds::{default_amplifier, is_h_compatible, BoundContext, TheoremId};
use gapless::harness::generate::{generate_guess_with, generate_test_matrix_with, rng_from_seed};
use gapless::harness::{run_sweep, ExperimentConfig, GuessMode};
use gapless::io::{read_csv, read_matrix_market, write_matrix_market, MmFormat};
use gapless::lowrank::lowrank_report;
use gapless::spectrum::parse_spectrum;
use gapless::{Matrix, Oracle, Tolerances};

#[derive(Parser)]
#[command(name = "gapless", version, about = "Block Krylov dominant subspaces without a singular gap")]
struct Cli {
    /// Seed for generated matrices and guesses.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster the spectrum and report j(h), k(h), gaps and q0.
    Spectrum {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long)]
        h: usize,
    },
    /// Test whether the starting guess is h-compatible.
    Compat {
        #[command(flatten)]
        input: MatrixInput,
        #[command(flatten)]
        guess: GuessInput,
        #[arg(long)]
        h: usize,
    },
    /// Evaluate one subspace bound against the exact SVD.
    Bound {
        #[command(flatten)]
        input: MatrixInput,
        #[command(flatten)]
        guess: GuessInput,
        #[arg(long, value_parser = parse_theorem)]
        theorem: TheoremId,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        q: usize,
        /// Augmentation depth (t33 and t34 only).
        #[arg(long, default_value_t = 0)]
        t: usize,
    },
    /// Run the proto-algorithm at power q + t + 1 and certify its errors.
    Lowrank {
        #[command(flatten)]
        input: MatrixInput,
        #[command(flatten)]
        guess: GuessInput,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 0)]
        t: usize,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        theta0: f64,
        /// Write Û_h here as a Matrix Market array.
        #[arg(long)]
        out_u: Option<PathBuf>,
    },
    /// Run a sweep described by a JSON config file.
    Sweep {
        config: PathBuf,
        /// Overrides the config's JSON output path.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Overrides the config's CSV output path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Worker threads; 1 runs serially.
        #[arg(long, env = gapless::harness::THREADS_ENV)]
        threads: Option<usize>,
    },
}

/// Either a matrix file or a generated matrix with a prescribed spectrum.
#[derive(Args)]
struct MatrixInput {
    /// Matrix Market (`.mtx`) or dense CSV file.
    #[arg(long, conflicts_with = "spectrum")]
    matrix: Option<PathBuf>,
    /// Singular values, e.g. "3,2*3,1", for a seeded random matrix.
    #[arg(long)]
    spectrum: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct GuessInput {
    /// Starting guess file (n × r).
    #[arg(long, conflicts_with = "guess_mode")]
    guess: Option<PathBuf>,
    /// exact-dominant, random, adversarial-orthogonal or perturbed:<eps>.
    #[arg(long, default_value = "random")]
    guess_mode: String,
}

fn parse_theorem(s: &str) -> Result<TheoremId, String> {
    let id: TheoremId = s.parse().map_err(|e: gapless::Error| e.to_string())?;
    match id {
        TheoremId::T31 | TheoremId::C32 | TheoremId::T33 | TheoremId::T34 => Ok(id),
        _ => Err("expected one of t31, c32, t33, t34".into()),
    }
}

fn read_matrix(path: &Path) -> Result<Matrix> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    Ok(if ext.eq_ignore_ascii_case("csv") {
        read_csv(path)?
    } else {
        read_matrix_market(path)?
    })
}

/// Matrix and guess share one seeded stream (matrix first), matching trial 0
/// of a sweep with the same seed.
struct Problem {
    oracle: Oracle,
    x: Option<Matrix>,
}

fn load(input: &MatrixInput, guess: Option<(&GuessInput, usize)>, seed: u64) -> Result<Problem> {
    let mut rng = rng_from_seed(seed);
    let a = match (&input.matrix, &input.spectrum) {
        (Some(p), _) => read_matrix(p)?,
        (None, Some(s)) => {
            let sigma = parse_spectrum(s)?;
            let m = input.m.unwrap_or(sigma.len());
            let n = input.n.unwrap_or(sigma.len());
            generate_test_matrix_with(&sigma, m, n, &mut rng)?
        }
        (None, None) => bail!("pass --matrix FILE or --spectrum SPEC"),
    };
    let oracle = Oracle::new(a)?;
    let x = match guess {
        None => None,
        Some((g, _)) if g.guess.is_some() => Some(read_matrix(g.guess.as_ref().unwrap())?),
        Some((g, h)) => {
            let mode: GuessMode = g.guess_mode.parse()?;
            Some(generate_guess_with(oracle.svd(), h, mode, &mut rng)?)
        }
    };
    Ok(Problem { oracle, x })
}

fn print<T: Serialize>(value: &T) -> Result<()> {
    print!("{}", gapless::json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let tols = Tolerances::default();
    match cli.command {
        Command::Spectrum { input, h } => {
            let p = load(&input, None, cli.seed)?;
            print(&p.oracle.partition(h, &tols)?)?;
        }
        Command::Compat { input, guess, h } => {
            let p = load(&input, Some((&guess, h)), cli.seed)?;
            let report = is_h_compatible(&p.oracle, p.x.as_ref().unwrap(), h, &tols)?;
            print(&report)?;
            if !report.compatible {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Bound { input, guess, theorem, h, q, t } => {
            let p = load(&input, Some((&guess, h)), cli.seed)?;
            let mut ctx = BoundContext::new(&p.oracle, p.x.as_ref().unwrap(), h, tols)?;
            let cert = match theorem {
                TheoremId::T31 => {
                    let phi = default_amplifier(ctx.partition(), q)?;
                    ctx.thm31(q, &phi)?
                }
                TheoremId::C32 => ctx.cor32(q)?,
                TheoremId::T33 => ctx.thm33(q, t)?,
                TheoremId::T34 => ctx.thm34(q, t)?,
                _ => unreachable!("rejected by the argument parser"),
            };
            print(&cert)?;
            if !cert.holds() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Lowrank { input, guess, h, q, t, theta0, out_u } => {
            let p = load(&input, Some((&guess, h)), cli.seed)?;
            let report = lowrank_report(&p.oracle, p.x.as_ref().unwrap(), h, q, t, theta0, &tols)?;
            if let Some(path) = out_u {
                write_matrix_market(&path, &report.result.u_hat, MmFormat::Array)?;
            }
            print(&report)?;
            if report.violations > 0 {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Sweep { config, json, csv, threads } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(p) = json {
                cfg.output.json = Some(p);
            }
            if let Some(p) = csv {
                cfg.output.csv = Some(p);
            }
            let report = match threads {
                Some(n) => gapless::harness::run_sweep_with_threads(&cfg, Some(n))?,
                None => run_sweep(&cfg)?,
            };
            report.write_outputs()?;
            if cfg.output.json.is_none() {
                print!("{}", report.to_json());
            }
            eprintln!(
                "{} trials, {} grid points each, {} violations",
                report.trials.len(),
                cfg.q_grid.len() * cfg.t_grid.len(),
                report.total_violations
            );
            if report.total_violations > 0 {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

