//! Experiment harness: runs the audit suites of `qcomm` at configurable
//! scale and records the results.

pub mod config;
pub mod error;
pub mod record;
pub mod suites;

use std::time::Instant;

pub use config::Config;
pub use error::{LabError, Result};
pub use record::{Outcome, RunRecord, SuiteReport};
pub use suites::Suite;

/// A single suite or all of them in [`Suite::ALL`] order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    One(Suite),
    FullSuite,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::One(s) => s.name(),
            Subcommand::FullSuite => "full-suite",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        if name == "full-suite" {
            Ok(Subcommand::FullSuite)
        } else {
            Suite::from_name(name).map(Subcommand::One)
        }
    }

    pub fn suites(self) -> Vec<Suite> {
        match self {
            Subcommand::One(s) => vec![s],
            Subcommand::FullSuite => Suite::ALL.to_vec(),
        }
    }
}

/// Runs the suites in order on the current rayon pool.
pub fn run(cmd: Subcommand, cfg: &Config, seed: u64) -> Result<Outcome> {
    cfg.validate()?;
    let reports = cmd
        .suites()
        .into_iter()
        .map(|s| s.run(cfg, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome::new(cmd.name(), seed, cfg.clone(), reports))
}

/// [`run`] on a dedicated pool with `jobs` workers (`0` = rayon's default),
/// timed for the run log.
pub fn run_with_jobs(cmd: Subcommand, cfg: &Config, seed: u64, jobs: usize) -> Result<RunRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| LabError::Config(format!("worker pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| run(cmd, cfg, seed))?;
    let workers = pool.current_num_threads();
    Ok(RunRecord::new(outcome, start.elapsed().as_millis() as u64, workers))
}
