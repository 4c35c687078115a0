mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use roldarp_core::Scalar;

/// Revenue online dial-a-ride: generate instances, run the segmented
/// algorithm and the exact optimum, duel adaptive adversaries, check bounds.
#[derive(Parser, Debug)]
#[command(name = "roldarp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated instance.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run an online algorithm with the whole request sequence known in advance.
    #[command(subcommand)]
    Run(RunCommand),
    /// Exact offline optimum.
    Opt(OptArgs),
    /// Play a policy against an adaptive adversary.
    Duel(DuelArgs),
    /// Evaluate a bound on one or more instances.
    Check(CheckArgs),
    /// Rewrite a general instance as a complete bipartite one.
    Reduce(ReduceArgs),
    /// Collect bound rows from check outputs or instances into CSV.
    Report(ReportArgs),
    /// Validate an instance and, optionally, a schedule against it.
    Validate(ValidateArgs),
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Two-row lower-bound family.
    Fig1(Fig1Args),
    /// Seeded random instance.
    Random(RandomArgs),
}

#[derive(Subcommand, Debug)]
enum RunCommand {
    /// Segmented best path.
    Sbp(InOut),
}

#[derive(Args, Debug)]
struct InOut {
    /// Instance JSON.
    #[arg(short, long)]
    input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Fig1Args {
    /// Even segment count, at least 4.
    #[arg(long)]
    f: u32,
    /// Half a segment length.
    #[arg(long)]
    h: Scalar,
    /// Base revenue.
    #[arg(long = "B")]
    b: Scalar,
    #[arg(long)]
    eps: Scalar,
    /// Also write the witness schedule here.
    #[arg(long)]
    witness: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RandomArgs {
    #[arg(long)]
    vertices: usize,
    #[arg(long)]
    requests: usize,
    #[arg(long)]
    seed: u64,
    /// All revenues equal to 1.
    #[arg(long)]
    uniform: bool,
    /// Complete bipartite graph with minimum edge factor `--k`.
    #[arg(long)]
    bipartite: bool,
    #[arg(long, requires = "bipartite", default_value = "1")]
    k: Scalar,
    /// Segment count.
    #[arg(long, default_value_t = 4)]
    f: u32,
    /// Integer segment length `T/f`.
    #[arg(long, default_value_t = 5)]
    segment_length: u32,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OptArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Deadline other than `T`.
    #[arg(long)]
    horizon: Option<Scalar>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AdversaryKind {
    LastWindow,
    FirstHorizon,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PolicyKind {
    Sbp,
    Idle,
}

#[derive(Args, Debug)]
struct DuelArgs {
    #[arg(long, value_enum)]
    adversary: AdversaryKind,
    #[arg(long, value_enum, default_value = "sbp")]
    policy: PolicyKind,
    #[arg(long)]
    uniform: bool,
    /// Payoff revenue or chain length (last-window), chain length (first-horizon).
    #[arg(long)]
    k: Option<u32>,
    /// Horizon of the last-window construction.
    #[arg(long = "T")]
    horizon: Option<Scalar>,
    /// Segment count of the last-window construction.
    #[arg(long)]
    f: Option<u32>,
    /// Segment length of the first-horizon construction.
    #[arg(long = "X")]
    x: Option<Scalar>,
    /// Small revenue of the nonuniform first-horizon construction.
    #[arg(long)]
    eps: Option<Scalar>,
    #[arg(long)]
    delta: Option<Scalar>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// thm4, thm6, thm7, thm8, lem3, lem8, lem9, or `all` for every bound
    /// whose hypotheses the instance meets.
    #[arg(long)]
    bound: String,
    /// Instance JSON; repeat for a batch.
    #[arg(short, long, required = true)]
    input: Vec<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Directory for replayable records of violated bounds.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Split-edge factor; defaults to a value small enough to keep the optimum.
    #[arg(long)]
    eps: Option<Scalar>,
    /// Write `{instance, epsilon, delta}` instead of the bare instance.
    #[arg(long)]
    record: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Pattern of check outputs or instance files.
    #[arg(long)]
    glob: String,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Schedule JSON to replay.
    #[arg(short, long)]
    schedule: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            io::CliError::usage("USAGE", first).report();
            return ExitCode::from(io::EXIT_USAGE);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            e.report();
            ExitCode::from(e.exit)
        }
    }
}
