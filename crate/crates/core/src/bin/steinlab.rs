use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use steinlab::harness;
use steinlab::Error;

#[derive(Parser)]
#[command(name = "steinlab", version, about = "Normal approximation bound experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle checks; nonzero exit names the failures.
    Selftest {
        /// Also write selftest.csv and selftest.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print an annotated config covering every field.
    Describe,
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run { config, out } => match harness::run_file(&config, out) {
            Ok(r) => {
                println!("{}\n\n{}", r.table, r.summary);
                println!("wrote {} and {}", r.artifacts.csv.display(), r.artifacts.json.display());
                ExitCode::SUCCESS
            }
            Err(e @ (Error::InvalidConfig(_) | Error::Toml(_))) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Cmd::Selftest { out } => match harness::selftest_to(out.as_deref()) {
            Ok((report, _)) => {
                println!("{}", report.table().render());
                if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    eprintln!("selftest failed: {}", report.failures().join(", "));
                    ExitCode::FAILURE
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Cmd::Describe => {
            print!("{}", harness::describe());
            ExitCode::SUCCESS
        }
    }
}
