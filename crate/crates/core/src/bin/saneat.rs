use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use saneat::experiment::{compare, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(version, about = "NEAT and surrogate-assisted NEAT experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicated experiments and write CSV artifacts.
    Run {
        /// `key = value` config file; unset keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// neat or sa-neat
        #[arg(long)]
        algo: Option<String>,
        /// cartpole, nettest or external:<cmd>
        #[arg(long)]
        env: Option<String>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<usize>,
        /// Replicates run concurrently on this many threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare evaluations-to-solve of two experiment directories.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Exit nonzero unless median(B) / median(A) reaches this factor.
        #[arg(long)]
        assert_speedup: Option<f64>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            algo,
            env,
            replicates,
            seed,
            budget,
            jobs,
            out,
        } => {
            let text = match config {
                Some(path) => match std::fs::read_to_string(&path) {
                    Ok(t) => t,
                    Err(e) => {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                },
                None => String::new(),
            };
            let overrides = [
                ("algo", algo),
                ("env", env),
                ("replicates", replicates.map(|v| v.to_string())),
                ("seed", seed.map(|v| v.to_string())),
                ("budget", budget.map(|v| v.to_string())),
            ];
            let cfg = ExperimentConfig::parse(&text).and_then(|mut c| {
                for (k, v) in &overrides {
                    if let Some(v) = v {
                        c.set(k, v)?;
                    }
                }
                Ok(c)
            });
            let cfg = match cfg {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: config: {e}");
                    return ExitCode::from(2);
                }
            };
            match run_experiment(&cfg, &out, jobs) {
                Ok(o) => {
                    if let Some(s) = o.stats {
                        println!(
                            "{} on {}: solved {}/{}  median {}{}  q1 {}  q3 {}",
                            o.config.algorithm,
                            o.config.env,
                            s.solved,
                            s.completed,
                            s.median,
                            if s.median_censored { " (censored)" } else { "" },
                            s.q1,
                            s.q3
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Compare { a, b, assert_speedup } => {
            let c = match compare(&a, &b) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            println!("{c}");
            match assert_speedup {
                Some(x) if !c.meets_speedup(x) => {
                    eprintln!("speedup assertion failed: wanted at least {x}");
                    ExitCode::FAILURE
                }
                _ => ExitCode::SUCCESS,
            }
        }
    }
}
