use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use vecgrav::runner::{execute_file, Command, Overrides};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Run,
    Static,
    Wave,
    Identities,
    Convergence,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Run => Command::Run,
            Sub::Static => Command::Static,
            Sub::Wave => Command::Wave,
            Sub::Identities => Command::Identities,
            Sub::Convergence => Command::Convergence,
        }
    }
}

/// Vector-field gravity simulator and verification suite.
#[derive(Debug, Parser)]
#[command(name = "vecgrav", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Sub,
    /// Config file in `section.key = value` form.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Nodes per axis, keeping the physical domain.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    let overrides = Overrides {
        out: cli.out.clone(),
        resolution: cli.resolution,
        lambda: cli.lambda,
        mu: cli.mu,
        nu: cli.nu,
    };
    match pool.install(|| execute_file(cli.subcommand.into(), &cli.config, &overrides)) {
        Ok(report) => {
            print!("{}", report.to_text());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
