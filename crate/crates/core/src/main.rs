use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sdrelax::app::{error_json, exit, run_file, Options, RunConfig, TaskKind};

#[derive(Parser)]
#[command(name = "sdrelax", version, about = "Relaxed energies of second-order structured deformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: config `output.dir`, then $SDRELAX_OUT_DIR, then `.`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Exit with code 4 on hard hypothesis failures.
        #[arg(long)]
        strict: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the task names.
    Tasks,
}

fn fail(e: &sdrelax::Error) -> ExitCode {
    eprintln!("{}", error_json(e));
    ExitCode::from(sdrelax::app::exit_code(e) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seed, strict, threads } => {
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                pool = pool.num_threads(t);
            }
            let pool = match pool.build() {
                Ok(p) => p,
                Err(e) => return fail(&sdrelax::Error::Config(format!("cannot start {threads:?} threads: {e}"))),
            };
            let opts = Options { out, seed, strict };
            match pool.install(|| run_file(&config, &opts)) {
                Ok(a) => {
                    println!("{}", a.report.display());
                    if let Some(csv) = &a.csv {
                        println!("{}", csv.display());
                    }
                    ExitCode::from(a.exit_code as u8)
                }
                Err(e) => fail(&e),
            }
        }
        Command::Validate { config } => match RunConfig::from_file(&config) {
            Ok(cfg) => {
                println!("{}: ok ({})", config.display(), cfg.task.name());
                ExitCode::from(exit::OK as u8)
            }
            Err(e) => fail(&e),
        },
        Command::Tasks => {
            for t in [
                TaskKind::CheckHypotheses,
                TaskKind::Energy,
                TaskKind::ApproxSequence,
                TaskKind::CellSweep,
                TaskKind::ExampleVerify,
                TaskKind::RelaxAssemble,
            ] {
                println!("{}", t.name());
            }
            ExitCode::from(exit::OK as u8)
        }
    }
}
