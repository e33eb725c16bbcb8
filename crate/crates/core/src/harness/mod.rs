//! Experiment tooling: seeded generators and reproducible sweeps.

pub mod generate;
pub mod sweep;

pub use generate::{generate_guess, generate_test_matrix, GuessMode};
pub use sweep::{run_sweep, run_sweep_with_threads, ExperimentConfig, SpectrumSpec, SweepReport, THREADS_ENV};
