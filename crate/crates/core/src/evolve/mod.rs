//! The surrogate-assisted loop and the plain NEAT baseline.

mod log;
mod neat;
mod sa_neat;
mod training;

use rayon::prelude::*;

pub use self::log::{ModelFit, Phase, RunLog, RunRecord};
pub use self::neat::run_neat;
pub use self::sa_neat::{run_sa_neat, SaNeat};
pub use self::training::{TrainingEntry, TrainingSet};

use crate::env::Environment;
use crate::error::Error;
use crate::gp::GpFitConfig;
use crate::neat::{CompatCoefficients, Genome, ReproductionConfig, SpeciationConfig, VariationRates};

/// How infill candidates are ranked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfillRanking {
    /// Upper confidence bound, `mean + κσ`.
    Ucb,
    /// Posterior mean only.
    Mean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaNeatConfig {
    pub population_size: usize,
    pub gens_per_infill: usize,
    pub inds_per_infill: usize,
    pub training_capacity: usize,
    /// True evaluations without improvement that trigger a resolve; 0 disables resolve.
    pub stagnation_evals: usize,
    pub kappa: f64,
    pub infill_ranking: InfillRanking,
    /// Variation used by surrogate generations and the population update.
    pub rates: VariationRates,
    /// Variation used by the true-fitness generations inside a resolve.
    pub resolve_rates: VariationRates,
    /// Variation used by the NEAT baseline.
    pub neat_rates: VariationRates,
    /// Everything about reproduction except the rates, which are set per phase.
    pub reproduction: ReproductionConfig,
    pub coeffs: CompatCoefficients,
    pub speciation: SpeciationConfig,
    /// Initial weights are uniform in `[-init_weight_range, init_weight_range]`.
    pub init_weight_range: f64,
    pub max_evaluations: usize,
    pub solve_threshold: Option<f64>,
    /// Hyperparameter search for the first model.
    pub gp: GpFitConfig,
    /// Warm-started search budget for later rebuilds.
    pub gp_refit_budget: usize,
    pub gp_refit_sigma: f64,
    /// Search hyperparameters on every n-th rebuild; the others reuse the current ones.
    pub gp_refit_interval: usize,
}

impl Default for SaNeatConfig {
    fn default() -> Self {
        SaNeatConfig {
            population_size: 128,
            gens_per_infill: 4,
            inds_per_infill: 4,
            training_capacity: 512,
            stagnation_evals: 128,
            kappa: 1.0,
            infill_ranking: InfillRanking::Ucb,
            rates: VariationRates::sa_neat(),
            resolve_rates: VariationRates::sa_neat(),
            neat_rates: VariationRates::neat(),
            reproduction: ReproductionConfig::default(),
            coeffs: CompatCoefficients::default(),
            speciation: SpeciationConfig::default(),
            init_weight_range: 1.0,
            max_evaluations: 20_000,
            solve_threshold: None,
            gp: GpFitConfig::default(),
            gp_refit_budget: 32,
            gp_refit_sigma: 0.2,
            gp_refit_interval: 8,
        }
    }
}

impl SaNeatConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("population_size", self.population_size),
            ("gens_per_infill", self.gens_per_infill),
            ("inds_per_infill", self.inds_per_infill),
            ("training_capacity", self.training_capacity),
            ("max_evaluations", self.max_evaluations),
            ("gp_refit_interval", self.gp_refit_interval),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.inds_per_infill > self.population_size {
            return Err("inds_per_infill exceeds population_size".into());
        }
        if !(self.kappa >= 0.0) {
            return Err("kappa must be non-negative".into());
        }
        for r in [&self.rates, &self.resolve_rates, &self.neat_rates] {
            let p = [r.add_node, r.add_connection, r.reenable, r.crossover, r.mutate_weights];
            if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err("variation rates must lie in [0, 1]".into());
            }
        }
        if self.speciation.target_species == 0 {
            return Err("target species must be positive".into());
        }
        Ok(())
    }
}

/// A run that stopped on an error, with everything logged up to that point.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub log: RunLog,
}

pub type RunResult = Result<RunLog, Box<RunFailure>>;

/// Owns the run log and enforces the evaluation budget. Every true
/// evaluation goes through here, so log length equals evaluation count.
pub(crate) struct Evaluator<'a, E: Environment + ?Sized> {
    env: &'a E,
    pub log: RunLog,
    budget: usize,
    threshold: Option<f64>,
    best: f64,
    since_improvement: usize,
}

impl<'a, E: Environment + ?Sized> Evaluator<'a, E> {
    pub fn new(env: &'a E, budget: usize, threshold: Option<f64>, log: RunLog) -> Self {
        Evaluator {
            env,
            log,
            budget,
            threshold,
            best: f64::NEG_INFINITY,
            since_improvement: 0,
        }
    }

    pub fn evaluations(&self) -> usize {
        self.log.records.len()
    }

    pub fn remaining(&self) -> usize {
        self.budget.saturating_sub(self.evaluations())
    }

    pub fn solved(&self) -> bool {
        self.log.solved_at.is_some()
    }

    pub fn done(&self) -> bool {
        self.solved() || self.remaining() == 0
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    /// Evaluations since the best-so-far last improved.
    pub fn since_improvement(&self) -> usize {
        self.since_improvement
    }

    pub fn reset_stagnation(&mut self) {
        self.since_improvement = 0;
    }

    /// Evaluates as many of `genomes` as the budget allows, in parallel, and
    /// logs them in order. Returns the fitnesses of the evaluated prefix.
    pub fn evaluate(&mut self, genomes: &[Genome], phase: Phase) -> Result<Vec<f64>, Error> {
        let n = genomes.len().min(self.remaining());
        let env = self.env;
        let results: Vec<_> = genomes[..n].par_iter().map(|g| env.evaluate(g)).collect();
        let mut out = Vec::with_capacity(n);
        for (g, r) in genomes.iter().zip(results) {
            let f = r?;
            if !f.is_finite() {
                return Err(Error::Experiment(format!("environment returned fitness {f}")));
            }
            self.record(g, f, phase);
            out.push(f);
        }
        Ok(out)
    }

    fn record(&mut self, g: &Genome, fitness: f64, phase: Phase) {
        let eval_index = self.log.records.len() + 1;
        if fitness > self.best {
            self.best = fitness;
            self.since_improvement = 0;
            self.log.best_genome = Some(g.clone());
        } else {
            self.since_improvement += 1;
        }
        if self.log.solved_at.is_none() && self.threshold.is_some_and(|t| fitness >= t) {
            self.log.solved_at = Some(eval_index);
        }
        self.log.records.push(RunRecord {
            eval_index,
            fitness,
            best_so_far: self.best,
            n_nodes: g.nodes().len(),
            n_conns: g.connections().len(),
            phase,
        });
    }

    pub fn fail(self, error: Error) -> Box<RunFailure> {
        Box::new(RunFailure { error, log: self.log })
    }
}

/// Settings shared by both algorithms, for the log header.
pub(crate) fn describe_config<E: Environment + ?Sized>(c: &SaNeatConfig, algo: &str, env: &E) -> Vec<(String, String)> {
    let rates = |r: &VariationRates| {
        format!(
            "add_node={} add_connection={} reenable={} crossover={} mutate_weights={}",
            r.add_node, r.add_connection, r.reenable, r.crossover, r.mutate_weights
        )
    };
    let mut v: Vec<(String, String)> = vec![
        ("algo".into(), algo.into()),
        ("env".into(), env.name()),
        ("population_size".into(), c.population_size.to_string()),
        ("max_evaluations".into(), c.max_evaluations.to_string()),
        (
            "solve_threshold".into(),
            c.solve_threshold.map_or("none".into(), |t| t.to_string()),
        ),
        ("compat.c1".into(), c.coeffs.c1.to_string()),
        ("compat.c2".into(), c.coeffs.c2.to_string()),
        ("speciation.initial_threshold".into(), c.speciation.initial_threshold.to_string()),
        ("speciation.target_species".into(), c.speciation.target_species.to_string()),
        ("speciation.stagnation_limit".into(), c.speciation.stagnation_limit.to_string()),
        ("init_weight_range".into(), c.init_weight_range.to_string()),
        ("weights.perturb_sigma".into(), c.reproduction.weights.perturb_sigma.to_string()),
        ("weights.reset_prob".into(), c.reproduction.weights.reset_prob.to_string()),
        ("weights.clamp".into(), c.reproduction.weights.clamp.to_string()),
    ];
    if algo == "neat" {
        v.push(("rates".into(), rates(&c.neat_rates)));
    } else {
        v.extend([
            ("rates".into(), rates(&c.rates)),
            ("resolve_rates".into(), rates(&c.resolve_rates)),
            ("gens_per_infill".into(), c.gens_per_infill.to_string()),
            ("inds_per_infill".into(), c.inds_per_infill.to_string()),
            ("training_capacity".into(), c.training_capacity.to_string()),
            ("stagnation_evals".into(), c.stagnation_evals.to_string()),
            ("kappa".into(), c.kappa.to_string()),
            (
                "infill_ranking".into(),
                match c.infill_ranking {
                    InfillRanking::Ucb => "ucb".into(),
                    InfillRanking::Mean => "mean".into(),
                },
            ),
            ("gp.budget".into(), c.gp.budget.to_string()),
            ("gp.refit_budget".into(), c.gp_refit_budget.to_string()),
            ("gp.refit_interval".into(), c.gp_refit_interval.to_string()),
        ]);
    }
    v.extend(env.describe());
    v
}
