//! Per-evaluation run records.

use std::fmt::{self, Write as _};

use crate::gp::GpHyper;
use crate::neat::Genome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Init,
    Infill,
    Resolve,
    /// A full generation of the NEAT baseline.
    Generation,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Infill => "infill",
            Phase::Resolve => "resolve",
            Phase::Generation => "generation",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    /// 1-based.
    pub eval_index: usize,
    pub fitness: f64,
    pub best_so_far: f64,
    pub n_nodes: usize,
    pub n_conns: usize,
    pub phase: Phase,
}

/// One surrogate rebuild.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFit {
    /// Evaluations done when the model was rebuilt.
    pub eval_index: usize,
    pub hyper: GpHyper,
    pub log_likelihood: f64,
    pub training_size: usize,
    /// Whether hyperparameters were searched (as opposed to reused).
    pub tuned: bool,
    pub fallback: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunLog {
    pub seed: u64,
    /// `key = value` settings echoed in the CSV header.
    pub config: Vec<(String, String)>,
    pub records: Vec<RunRecord>,
    pub best_genome: Option<Genome>,
    /// Evaluation index at which the solve threshold was first reached.
    pub solved_at: Option<usize>,
    pub model_fits: Vec<ModelFit>,
}

impl RunLog {
    pub fn evaluations(&self) -> usize {
        self.records.len()
    }

    pub fn best_fitness(&self) -> Option<f64> {
        self.records.last().map(|r| r.best_so_far)
    }

    pub fn count(&self, phase: Phase) -> usize {
        self.records.iter().filter(|r| r.phase == phase).count()
    }

    pub const CSV_HEADER: &'static str = "eval_index,fitness,best_so_far,n_nodes,n_conns,phase";

    /// Commented `key = value` header, column line, then one row per evaluation.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# seed = {}", self.seed);
        for (k, v) in &self.config {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s.push_str(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.eval_index, r.fitness, r.best_so_far, r.n_nodes, r.n_conns, r.phase
            );
        }
        s
    }

    /// Checks index contiguity and best-so-far monotonicity.
    pub fn check(&self) -> Result<(), String> {
        let mut best = f64::NEG_INFINITY;
        for (i, r) in self.records.iter().enumerate() {
            if r.eval_index != i + 1 {
                return Err(format!("record {i} has index {}", r.eval_index));
            }
            let expect = best.max(r.fitness);
            if r.best_so_far != expect {
                return Err(format!("best_so_far wrong at index {}", r.eval_index));
            }
            best = expect;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let log = RunLog {
            seed: 7,
            config: vec![("algo".into(), "neat".into())],
            records: vec![RunRecord {
                eval_index: 1,
                fitness: 2.5,
                best_so_far: 2.5,
                n_nodes: 6,
                n_conns: 5,
                phase: Phase::Init,
            }],
            ..RunLog::default()
        };
        assert_eq!(
            log.to_csv(),
            "# seed = 7\n# algo = neat\neval_index,fitness,best_so_far,n_nodes,n_conns,phase\n1,2.5,2.5,6,5,init\n"
        );
        assert!(log.check().is_ok());
    }
}
