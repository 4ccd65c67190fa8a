//! Configuration-driven experiment runner for the bosegas suite.
//!
//! `bosegas run <config.json>` executes one experiment kind and writes a
//! machine-readable report (JSON + CSV) plus a human summary with PASS/FAIL
//! lines; the exit status is nonzero iff any check failed. `bosegas
//! validate <config.json>` checks the schema and feasibility without
//! running anything.

mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bosegas", version, about = "Bose-gas verification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment described by the config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random seed (overrides the config's seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sweep points (overrides the config).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check the config schema and feasibility without running.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => {
            let parsed = match config::load_config(&config) {
                Ok(p) => p,
                Err(message) => {
                    println!("[FAIL] schema: {message}");
                    return Ok(ExitCode::from(1));
                }
            };
            let diagnostics = config::validate(&parsed);
            let mut fatal = false;
            for d in &diagnostics {
                let tag = if d.fatal { "FAIL" } else { "info" };
                println!("[{tag}] {}: {}", d.path, d.message);
                fatal |= d.fatal;
            }
            if fatal {
                Ok(ExitCode::from(1))
            } else {
                println!("[ok] {} config is feasible", parsed.kind.as_str());
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => {
            let parsed = config::load_config(&config).map_err(|e| anyhow::anyhow!(e))?;
            let diagnostics = config::validate(&parsed);
            let fatal: Vec<_> = diagnostics.iter().filter(|d| d.fatal).collect();
            if !fatal.is_empty() {
                for d in &fatal {
                    eprintln!("[FAIL] {}: {}", d.path, d.message);
                }
                anyhow::bail!("config rejected by validation");
            }

            let seed = seed.unwrap_or(parsed.seed);
            let out_dir = out
                .or_else(|| parsed.output_dir.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let threads = threads.or(parsed.threads).unwrap_or(1);

            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()?;
            let report = pool.install(|| runner::run(&parsed, &out_dir, seed))?;
            report.write(&out_dir)?;

            for check in &report.checks {
                println!("{}", check.summary_line());
            }
            let passed = report.all_passed();
            println!(
                "overall: {} ({} checks, reports in {})",
                if passed { "PASS" } else { "FAIL" },
                report.checks.len(),
                out_dir.display()
            );
            Ok(if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
