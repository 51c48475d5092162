use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use compaction_cli::{execute, Invocation, Options, Source, Subcommand};

#[derive(Parser)]
#[command(
    name = "compaction",
    version,
    about = "Reactive compaction of a sedimentary basin"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; missing keys take defaults.
    #[arg(
        long,
        global = true,
        value_name = "PATH",
        conflicts_with = "seed_manifest"
    )]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Also write a gnuplot script.
    #[arg(long, global = true)]
    plot: bool,
    /// Re-run with the configuration recorded in a manifest.
    #[arg(long, global = true, value_name = "PATH")]
    seed_manifest: Option<PathBuf>,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Integrate the moving-boundary PDE system.
    Simulate,
    /// Assemble the matched travelling-wave profile.
    Wave {
        /// Profile nodes.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Solve the matching condition for the wave speed.
    Speed,
    /// Run the verification checks.
    Verify {
        /// Include the simulation cross-check and convergence study.
        #[arg(long)]
        full: bool,
    },
    /// Run a subcommand over a cartesian parameter grid.
    Sweep {
        /// Axes such as `sdot=0.5,1,2`.
        #[arg(value_name = "KEY=V1,V2,...")]
        axes: Vec<String>,
        /// Subcommand run at each point.
        #[arg(long, default_value = "speed")]
        task: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let mut options = Options {
        plot: cli.common.plot,
        ..Options::default()
    };
    let subcommand = match cli.command {
        Command::Simulate => Subcommand::Simulate,
        Command::Wave { points } => {
            options.points = points;
            Subcommand::Wave
        }
        Command::Speed => Subcommand::Speed,
        Command::Verify { full } => {
            options.full = full;
            Subcommand::Verify
        }
        Command::Sweep { axes, task } => {
            options.axes = axes;
            options.task = Some(task);
            Subcommand::Sweep
        }
    };
    let source = match (cli.common.config, cli.common.seed_manifest) {
        (Some(path), _) => Source::Config(path),
        (None, Some(path)) => Source::Manifest(path),
        (None, None) => Source::Defaults,
    };
    let inv = Invocation {
        subcommand,
        options,
        source,
        out: cli.common.out,
    };
    match execute(&inv) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for line in &outcome.lines {
                println!("{line}");
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
