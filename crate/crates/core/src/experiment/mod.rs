//! Replicated experiments, their artifact files, and comparisons between
//! two experiment directories.

mod config;
mod stats;

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use self::config::{Algorithm, EnvSpec, ExperimentConfig, Threshold, KEYS};
pub use self::stats::{best_so_far_curve, lower_median, nearest_rank, CurvePoint, SolveRecord, SolveStats};

use crate::error::Error;
use crate::evolve::{run_neat, run_sa_neat, RunLog};

/// Writes through a temporary file in the same directory, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

/// What an experiment produced.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub solves: Vec<SolveRecord>,
    pub stats: Option<SolveStats>,
    pub curve: Vec<CurvePoint>,
    pub dir: PathBuf,
}

/// Runs every replicate (seed = base seed + index) on a pool of `jobs`
/// threads and writes `run_<i>.csv`, `best_<i>.genome`, `summary.csv`,
/// `solves.csv` and `config.resolved` into `out`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path, jobs: usize) -> Result<ExperimentOutput, Error> {
    config.validate()?;
    let mut config = config.clone();
    config.resolve_threshold(config.build_env()?.as_ref());
    fs::create_dir_all(out)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Experiment(e.to_string()))?;
    let cfg = &config;
    let results: Vec<(RunLog, Option<Error>)> = pool.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|i| {
                let seed = cfg.seed.wrapping_add(i as u64);
                let env = match cfg.build_env() {
                    Ok(env) => env,
                    Err(e) => return (RunLog { seed, ..RunLog::default() }, Some(e)),
                };
                let run = match cfg.algorithm {
                    Algorithm::Neat => run_neat(&cfg.run, env.as_ref(), seed),
                    Algorithm::SaNeat => run_sa_neat(&cfg.run, env.as_ref(), seed),
                };
                match run {
                    Ok(log) => (log, None),
                    Err(f) => (f.log, Some(f.error)),
                }
            })
            .collect()
    });

    let budget = config.run.max_evaluations;
    let mut solves = Vec::with_capacity(results.len());
    for (i, (log, err)) in results.iter().enumerate() {
        write_atomic(&out.join(format!("run_{i}.csv")), log.to_csv().as_bytes())?;
        if let Some(g) = &log.best_genome {
            write_atomic(&out.join(format!("best_{i}.genome")), g.to_text().as_bytes())?;
        }
        if let Some(e) = err {
            eprintln!("warning: replicate {i} failed: {e}");
        }
        solves.push(SolveRecord {
            replicate: i,
            seed: log.seed,
            evals_to_solve: log.solved_at.unwrap_or(budget + 1),
            solved: log.solved_at.is_some(),
            failed: err.is_some(),
        });
    }
    let failures = solves.iter().filter(|s| s.failed).count();
    if 2 * failures > solves.len() {
        return Err(Error::Experiment(format!(
            "{failures} of {} replicates failed",
            solves.len()
        )));
    }

    let completed: Vec<&RunLog> = results.iter().filter(|r| r.1.is_none()).map(|r| &r.0).collect();
    let curve = best_so_far_curve(&completed);
    let mut summary = String::from("eval_index,median_best,std_best\n");
    for p in &curve {
        let _ = writeln!(summary, "{},{},{}", p.eval_index, p.median, p.std_dev);
    }
    write_atomic(&out.join("summary.csv"), summary.as_bytes())?;
    write_atomic(&out.join("solves.csv"), solves_csv(&solves).as_bytes())?;
    write_atomic(&out.join("config.resolved"), config.to_text().as_bytes())?;

    Ok(ExperimentOutput {
        stats: SolveStats::from_records(&solves),
        config,
        solves,
        curve,
        dir: out.to_path_buf(),
    })
}

const SOLVES_HEADER: &str = "replicate,seed,evals_to_solve,solved,status";

fn solves_csv(solves: &[SolveRecord]) -> String {
    let mut s = format!("{SOLVES_HEADER}\n");
    for r in solves {
        let status = if r.failed { "failed" } else { "ok" };
        let _ = writeln!(
            s,
            "{},{},{},{},{status}",
            r.replicate, r.seed, r.evals_to_solve, r.solved
        );
    }
    s
}

/// Reads `solves.csv` from an experiment directory.
pub fn read_solves(dir: &Path) -> Result<Vec<SolveRecord>, Error> {
    let path = dir.join("solves.csv");
    let text = fs::read_to_string(&path)?;
    let bad = |line: usize| Error::Experiment(format!("{}:{line}: malformed row", path.display()));
    let mut lines = text.lines();
    if lines.next() != Some(SOLVES_HEADER) {
        return Err(bad(1));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(i + 2));
            }
            Ok(SolveRecord {
                replicate: f[0].parse().map_err(|_| bad(i + 2))?,
                seed: f[1].parse().map_err(|_| bad(i + 2))?,
                evals_to_solve: f[2].parse().map_err(|_| bad(i + 2))?,
                solved: f[3].parse().map_err(|_| bad(i + 2))?,
                failed: match f[4] {
                    "ok" => false,
                    "failed" => true,
                    _ => return Err(bad(i + 2)),
                },
            })
        })
        .collect()
}

/// Solve statistics of two experiments side by side.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub a: SolveStats,
    pub b: SolveStats,
    /// `median(b) / median(a)`; `None` when either median is censored.
    pub ratio: Option<f64>,
    /// The best quarter of `b` needed at least as many evaluations as the
    /// worst quarter of `a` (`q1(b) >= q3(a)`).
    pub quartiles_separated: bool,
}

impl Comparison {
    pub fn new(a: SolveStats, b: SolveStats) -> Comparison {
        let ratio = (!a.median_censored && !b.median_censored).then(|| b.median as f64 / a.median as f64);
        Comparison {
            quartiles_separated: b.q1 >= a.q3,
            a,
            b,
            ratio,
        }
    }

    /// Whether `a` is at least `factor` times faster than `b` by median.
    pub fn meets_speedup(&self, factor: f64) -> bool {
        self.ratio.is_some_and(|r| r >= factor)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, s) in [("A", &self.a), ("B", &self.b)] {
            writeln!(
                f,
                "{name}: solved {}/{}  median {}{}  q1 {}  q3 {}",
                s.solved,
                s.completed,
                s.median,
                if s.median_censored { " (censored)" } else { "" },
                s.q1,
                s.q3
            )?;
        }
        match self.ratio {
            Some(r) => writeln!(f, "ratio B/A: {r:.3}")?,
            None => writeln!(f, "ratio B/A: undefined (censored median)")?,
        }
        write!(
            f,
            "quartile separation (q1 B >= q3 A): {}",
            if self.quartiles_separated { "yes" } else { "no" }
        )
    }
}

/// Compares the `solves.csv` files of two experiment directories.
pub fn compare(a: &Path, b: &Path) -> Result<Comparison, Error> {
    let stats = |dir: &Path| {
        SolveStats::from_records(&read_solves(dir)?)
            .ok_or_else(|| Error::Experiment(format!("{}: no completed replicates", dir.display())))
    };
    Ok(Comparison::new(stats(a)?, stats(b)?))
}
