use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    describe_config, Evaluator, InfillRanking, ModelFit, Phase, RunFailure, RunLog, RunResult, SaNeatConfig,
    TrainingEntry, TrainingSet,
};
use crate::env::Environment;
use crate::error::Error;
use crate::gp::{ucb, GpFitConfig, GpModel};
use crate::neat::{reproduce, Genome, InnovationTracker, ReproductionConfig, SpeciesSet, VariationRates};

/// State of one surrogate-assisted run. The phases are exposed so they can be
/// driven and inspected one at a time; [`run_sa_neat`] strings them together.
pub struct SaNeat<'a, E: Environment + ?Sized> {
    config: SaNeatConfig,
    ev: Evaluator<'a, E>,
    rng: ChaCha8Rng,
    tracker: InnovationTracker,
    species: SpeciesSet,
    population: Vec<Genome>,
    training: TrainingSet,
    model: Option<GpModel>,
    /// True fitness of every genome evaluated so far, by fingerprint.
    known: HashMap<u64, f64>,
    /// Utilities under the current model, by fingerprint.
    utility_cache: HashMap<u64, f64>,
    rebuilds: usize,
    generation: u32,
}

impl<'a, E: Environment + ?Sized> SaNeat<'a, E> {
    /// Creates the minimal population, evaluates it, seeds the training set
    /// and fits the first model.
    pub fn initialize(config: &SaNeatConfig, env: &'a E, seed: u64) -> Result<Self, Box<RunFailure>> {
        let log = RunLog {
            seed,
            config: describe_config(config, "sa-neat", env),
            ..RunLog::default()
        };
        let ev = Evaluator::new(env, config.max_evaluations, config.solve_threshold, log);
        if let Err(e) = config.validate() {
            return Err(ev.fail(Error::Experiment(e)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = env.shape();
        let population = (0..config.population_size)
            .map(|_| Genome::minimal(shape, &mut rng, config.init_weight_range))
            .collect();
        let mut s = SaNeat {
            config: config.clone(),
            ev,
            rng,
            tracker: InnovationTracker::new(shape),
            species: SpeciesSet::new(config.speciation),
            population,
            training: TrainingSet::new(config.training_capacity, config.coeffs),
            model: None,
            known: HashMap::new(),
            utility_cache: HashMap::new(),
            rebuilds: 0,
            generation: 0,
        };
        let pop = s.population.clone();
        if let Err(e) = s.evaluate_into_training(&pop, Phase::Init) {
            return Err(s.ev.fail(e));
        }
        if let Err(e) = s.rebuild_model() {
            return Err(s.ev.fail(e));
        }
        Ok(s)
    }

    pub fn population(&self) -> &[Genome] {
        &self.population
    }

    pub fn training(&self) -> &TrainingSet {
        &self.training
    }

    pub fn model(&self) -> Option<&GpModel> {
        self.model.as_ref()
    }

    pub fn species(&self) -> &SpeciesSet {
        &self.species
    }

    pub fn log(&self) -> &RunLog {
        &self.ev.log
    }

    pub fn evaluations(&self) -> usize {
        self.ev.evaluations()
    }

    pub fn done(&self) -> bool {
        self.ev.done()
    }

    pub fn into_log(self) -> RunLog {
        self.ev.log
    }

    fn evaluate_into_training(&mut self, genomes: &[Genome], phase: Phase) -> Result<Vec<f64>, Error> {
        let start = self.ev.evaluations();
        let fitness = self.ev.evaluate(genomes, phase)?;
        for (i, (g, &f)) in genomes.iter().zip(&fitness).enumerate() {
            self.known.insert(g.fingerprint(), f);
            self.training.push(TrainingEntry {
                genome: g.clone(),
                fitness: f,
                eval_index: start + i + 1,
            });
        }
        Ok(fitness)
    }

    /// Refits on the current training set. The first fit searches
    /// hyperparameters with the full budget; later ones warm-start a short
    /// search every `gp_refit_interval` rebuilds and otherwise reuse them.
    fn rebuild_model(&mut self) -> Result<(), Error> {
        if self.training.is_empty() {
            return Ok(());
        }
        let genomes = self.training.genomes();
        let fitness = self.training.fitnesses();
        let dist = self.training.distances();
        let seed = self.rng.random();
        let (cfg, start, tuned) = match &self.model {
            None => (
                GpFitConfig {
                    seed,
                    ..self.config.gp.clone()
                },
                None,
                true,
            ),
            Some(m) => {
                let tune = self.rebuilds % self.config.gp_refit_interval == 0;
                let budget = if tune { self.config.gp_refit_budget } else { 0 };
                (
                    GpFitConfig {
                        budget,
                        sigma0: self.config.gp_refit_sigma,
                        seed,
                        ..self.config.gp.clone()
                    },
                    Some(*m.hyper()),
                    tune && budget > 0,
                )
            }
        };
        let model = GpModel::fit_with_distances(&genomes, &fitness, &dist, self.config.coeffs, &cfg, start.as_ref())?;
        self.rebuilds += 1;
        self.ev.log.model_fits.push(ModelFit {
            eval_index: self.ev.evaluations(),
            hyper: *model.hyper(),
            log_likelihood: model.log_likelihood(),
            training_size: model.len(),
            tuned,
            fallback: model.used_fallback(),
        });
        self.model = Some(model);
        self.utility_cache.clear();
        Ok(())
    }

    /// Surrogate utility of each genome.
    pub fn utilities(&self, genomes: &[Genome]) -> Vec<f64> {
        let model = self.model.as_ref().expect("model is fitted after initialize");
        let kappa = match self.config.infill_ranking {
            InfillRanking::Ucb => self.config.kappa,
            InfillRanking::Mean => 0.0,
        };
        genomes.par_iter().map(|g| ucb(&model.predict(g), kappa)).collect()
    }

    /// Utilities of the current population. Clones are common, so each
    /// distinct genome is predicted once per model.
    fn population_utilities(&mut self) -> Vec<f64> {
        let keys: Vec<u64> = self.population.iter().map(Genome::fingerprint).collect();
        let (mut todo, mut genomes) = (Vec::new(), Vec::new());
        let mut seen = HashSet::new();
        for (g, k) in self.population.iter().zip(&keys) {
            if !self.utility_cache.contains_key(k) && seen.insert(*k) {
                todo.push(*k);
                genomes.push(g.clone());
            }
        }
        for (k, u) in todo.into_iter().zip(self.utilities(&genomes)) {
            self.utility_cache.insert(k, u);
        }
        keys.iter().map(|k| self.utility_cache[k]).collect()
    }

    fn breed(&mut self, scored: Vec<(Genome, f64)>, rates: VariationRates) {
        self.species = self.species.speciate(scored, self.config.coeffs, &mut self.rng);
        self.species.adjust_threshold();
        let counts = self.species.allocate_offspring(self.config.population_size);
        let repro = ReproductionConfig {
            rates,
            ..self.config.reproduction
        };
        self.generation += 1;
        self.population = reproduce(
            &self.species,
            &counts,
            &mut self.tracker,
            &mut self.rng,
            &repro,
            self.generation,
        );
    }

    /// One NEAT generation on surrogate utilities. No true evaluations.
    pub fn surrogate_generation(&mut self) {
        let util = self.population_utilities();
        let scored = self.population.drain(..).zip(util).collect();
        self.breed(scored, self.config.rates);
    }

    /// Picks the genomes to evaluate: the best member of each of the top
    /// species by utility, topped up with the next best individuals overall.
    /// Genomes that were already evaluated are passed over while others remain,
    /// since their fitness is known exactly.
    pub fn select_infill(&mut self) -> Vec<Genome> {
        let util = self.population_utilities();
        let n = self.population.len();
        let scored: Vec<(Genome, f64)> = self.population.iter().cloned().zip(util.iter().copied()).collect();
        self.species = self.species.speciate(scored, self.config.coeffs, &mut self.rng);

        let fresh: Vec<bool> = self
            .population
            .iter()
            .map(|g| !self.known.contains_key(&g.fingerprint()))
            .collect();
        // Members keep population order within a species, so a second pass
        // over the population recovers each genome's species.
        let species_of = self.species_membership();
        let k = self.config.inds_per_infill;
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        for pass_fresh_only in [true, false] {
            let eligible = |i: usize| (!pass_fresh_only || fresh[i]) && !chosen.contains(&i);
            let mut heads: Vec<usize> = Vec::new();
            for s in 0..self.species.len() {
                let best = (0..n)
                    .filter(|&i| species_of[i] == s && eligible(i))
                    .max_by(|&a, &b| util[a].total_cmp(&util[b]).then(b.cmp(&a)));
                heads.extend(best);
            }
            heads.sort_by(|&a, &b| util[b].total_cmp(&util[a]).then(a.cmp(&b)));
            let mut rest: Vec<usize> = (0..n).filter(|&i| eligible(i) && !heads.contains(&i)).collect();
            rest.sort_by(|&a, &b| util[b].total_cmp(&util[a]).then(a.cmp(&b)));
            let take = k - chosen.len();
            chosen.extend(heads.into_iter().chain(rest).take(take));
            if chosen.len() == k {
                break;
            }
        }
        chosen.into_iter().map(|i| self.population[i].clone()).collect()
    }

    /// Species index of each population member after the latest speciation.
    fn species_membership(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.population.len()];
        let mut cursor = vec![0usize; self.species.len()];
        for (i, g) in self.population.iter().enumerate() {
            for (s, sp) in self.species.species.iter().enumerate() {
                if let Some((m, _)) = sp.members.get(cursor[s]) {
                    if m == g {
                        out[i] = s;
                        cursor[s] += 1;
                        break;
                    }
                }
            }
        }
        out
    }

    /// Truly evaluates the selected genomes, adds them to the training set and refits.
    pub fn infill(&mut self) -> Result<Vec<f64>, Error> {
        let picks = self.select_infill();
        let f = self.evaluate_into_training(&picks, Phase::Infill)?;
        self.rebuild_model()?;
        Ok(f)
    }

    /// Breeds the next population from the current one (scored by utility)
    /// together with the most recent training entries (scored by true fitness).
    pub fn population_update(&mut self) {
        let util = self.population_utilities();
        let mut pool: Vec<(Genome, f64)> = self.population.drain(..).zip(util).collect();
        let n = self.training.len().min(self.config.population_size);
        pool.extend(self.training.most_recent(n).map(|e| (e.genome.clone(), e.fitness)));
        self.breed(pool, self.config.rates);
    }

    pub fn stagnating(&self) -> bool {
        self.config.stagnation_evals > 0 && self.ev.since_improvement() >= self.config.stagnation_evals
    }

    /// Resolves whole populations to true fitness, breeding on it between
    /// rounds, until the best improves, as many individuals as the training
    /// set holds have been resolved, or the budget runs out. Genomes already
    /// evaluated keep their known fitness and cost no evaluation. Returns the
    /// number of rounds.
    pub fn resolve(&mut self) -> Result<usize, Error> {
        let start_best = self.ev.best();
        let mut resolved = 0;
        let mut rounds = 0;
        loop {
            let pop = std::mem::take(&mut self.population);
            let keys: Vec<u64> = pop.iter().map(Genome::fingerprint).collect();
            let mut fresh = Vec::new();
            let mut queued = HashSet::new();
            for (g, k) in pop.iter().zip(&keys) {
                if !self.known.contains_key(k) && queued.insert(*k) {
                    fresh.push(g.clone());
                }
            }
            let f = self.evaluate_into_training(&fresh, Phase::Resolve)?;
            rounds += 1;
            if f.len() < fresh.len() || self.ev.best() > start_best || self.ev.done() {
                self.population = pop;
                break;
            }
            resolved += pop.len();
            if resolved >= self.training.capacity() {
                self.population = pop;
                break;
            }
            let scored = pop.into_iter().zip(keys).map(|(g, k)| (g, self.known[&k])).collect();
            self.breed(scored, self.config.resolve_rates);
        }
        self.ev.reset_stagnation();
        self.rebuild_model()?;
        Ok(rounds)
    }

    /// One full cycle: surrogate generations, infill, population update and,
    /// if stagnating, a resolve.
    pub fn cycle(&mut self) -> Result<(), Error> {
        for _ in 0..self.config.gens_per_infill {
            self.surrogate_generation();
        }
        self.infill()?;
        if self.ev.done() {
            return Ok(());
        }
        self.population_update();
        if self.stagnating() {
            self.resolve()?;
        }
        Ok(())
    }
}

/// Runs SA-NEAT until the solve threshold or the evaluation budget is reached.
pub fn run_sa_neat<E: Environment + ?Sized>(config: &SaNeatConfig, env: &E, seed: u64) -> RunResult {
    let mut s = SaNeat::initialize(config, env, seed)?;
    while !s.done() {
        if let Err(e) = s.cycle() {
            return Err(s.ev.fail(e));
        }
    }
    Ok(s.into_log())
}
