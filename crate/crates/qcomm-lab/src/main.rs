use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use qcomm_lab::{Config, LabError, Subcommand, Suite};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, clap::Subcommand)]
enum Command {
    /// Swap-test protocol on planted forrelation instances
    ForrDemo,
    /// BHM quantum protocol: relation, edge-hit rate, success
    BhmDemo,
    /// Exact moment comparison, correlation identity, matching probability
    MomentCheck,
    /// Two-way POVM completeness and sampling, SMP Fourier growth chain
    FourierGrowth,
    /// Scalar and matrix level-k inequality audits
    LevelkAudit,
    /// Shared-state decomposition exactness
    DecomposeCheck,
    /// Entanglement removal for simultaneous protocols
    StripQsmp,
    /// Entanglement removal for one-way protocols
    StripOneway,
    /// Exhaustive one-way classical optimum
    ClassicalOracle,
    /// Every suite above, in order
    FullSuite,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        let suite = match c {
            Command::ForrDemo => Suite::ForrDemo,
            Command::BhmDemo => Suite::BhmDemo,
            Command::MomentCheck => Suite::MomentCheck,
            Command::FourierGrowth => Suite::FourierGrowth,
            Command::LevelkAudit => Suite::LevelkAudit,
            Command::DecomposeCheck => Suite::DecomposeCheck,
            Command::StripQsmp => Suite::StripQsmp,
            Command::StripOneway => Suite::StripOneway,
            Command::ClassicalOracle => Suite::ClassicalOracle,
            Command::FullSuite => return Subcommand::FullSuite,
        };
        Subcommand::One(suite)
    }
}

/// Runs the qcomm audit suites and appends one record per run to a JSON-lines
/// log. The deterministic report goes to stdout. Exit status is 0 when every
/// check passes, 1 when some check fails and 2 on errors.
#[derive(Debug, Parser)]
#[command(name = "qcomm-lab", version, after_long_help = config_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat TOML file; missing keys take the defaults listed below
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; suite i uses derive(seed, [i])
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Run log, appended to
    #[arg(long, global = true, default_value = "qcomm-runs.jsonl")]
    out: PathBuf,
    /// Worker threads, 0 for one per core
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Report format on stdout
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn config_help() -> String {
    format!("Config keys and defaults:\n{}", Config::describe_defaults())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qcomm-lab: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, LabError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let cmd = Subcommand::from(cli.command);
    let record = qcomm_lab::run_with_jobs(cmd, &cfg, cli.seed, cli.jobs)?;
    record.append_to(&cli.out)?;
    let report = match cli.format {
        Format::Json => record.outcome.to_json(),
        Format::Csv => record.outcome.to_csv()?,
    };
    print!("{report}");
    for s in &record.outcome.suites {
        for name in s.failed_checks() {
            eprintln!("FAIL {}: {name}", s.suite);
        }
    }
    Ok(record.outcome.pass)
}
