use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tdhfb::cli::{error_record, run, write_error_record, Command, Overrides};
use tdhfb::config::parse_config;

#[derive(Parser)]
#[command(name = "tdhfb", version, about = "1D TDHFB simulator and estimate verifier")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for ensembles and sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for random ensembles; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Evolve the configured initial data and record diagnostics.
    Simulate,
    /// Duhamel fixed-point iteration with contraction report.
    Picard,
    /// Hartree-only evolution of the density matrix.
    Hartree,
    /// Collapsing-estimate ratios over a seeded random ensemble.
    VerifyEstimates,
    /// Norms and drifts over a grid of (N, beta).
    Sweep,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let command = match args.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::Picard => Command::Picard,
        Cmd::Hartree => Command::Hartree,
        Cmd::VerifyEstimates => Command::VerifyEstimates,
        Cmd::Sweep => Command::Sweep,
    };
    let Some(path) = args.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(2);
    };
    let ov = Overrides {
        out: args.out.clone(),
        threads: args.threads,
        seed: args.seed,
    };
    let cfg = match parse_config(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", error_record(Some(command), &e));
            return ExitCode::FAILURE;
        }
    };
    match run(command, &cfg, &ov) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = error_record(Some(command), &e);
            eprintln!("{record}");
            write_error_record(&ov.out.clone().unwrap_or_else(|| cfg.output_dir()), &record);
            ExitCode::FAILURE
        }
    }
}
