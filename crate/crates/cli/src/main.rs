use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use gkdv_cli::config::{key_reference, Command};
use gkdv_cli::{run, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Evolve initial data and record trajectory and conserved quantities
    Solve,
    /// Sweep the almost-conservation increment over cut-offs N
    Almost,
    /// Run trial ensembles for the space-time estimates
    Estimate,
    /// Rescale, iterate unit steps under the I_N budget, and unscale
    Globalize,
    /// Fast invariant suite
    Validate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Almost => Command::Almost,
            Cmd::Estimate => Command::Estimate,
            Cmd::Globalize => Command::Globalize,
            Cmd::Validate => Command::Validate,
        }
    }
}

/// gKdV-3 I-method laboratory.
///
/// Exit status: 0 success, 1 I/O error, 2 configuration error, 3 blow-up,
/// 4 budget violation, 5 estimate or validation failure, 6 other numerical
/// error.
#[derive(Debug, Parser)]
#[command(version, after_help = key_reference())]
struct Args {
    command: Cmd,
    /// Flat `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override `seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Override a configuration key, e.g. `--set grid.n=256`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = RunConfig::load(
        args.command.into(),
        args.config.as_deref(),
        &args.sets,
        args.seed,
        args.out,
        args.threads,
    )
    .and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            println!("manifest {}", outcome.manifest_hash);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gkdv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
