use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use irbl_cli::{run, Command};

#[derive(Parser)]
#[command(name = "irbl", version, about = "IR bug localization at file and method level")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; 0 uses every CPU.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Sub {
    /// Rewrite the source history into a method-level repository.
    Transform(Common),
    /// Link bug reports to fixing commits and derive oracles.
    Link(Common),
    /// Rank modules for every bug, technique and granularity.
    Localize(Common),
    /// Summarize ranked lists into MAP, MRR and top-k LOC reports.
    Eval(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Transform(c) => (Command::Transform, c),
        Sub::Link(c) => (Command::Link, c),
        Sub::Localize(c) => (Command::Localize, c),
        Sub::Eval(c) => (Command::Eval, c),
    };
    match run(command, &common.config, common.jobs) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
