use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{describe_config, Evaluator, Phase, RunLog, RunResult, SaNeatConfig};
use crate::env::Environment;
use crate::error::Error;
use crate::neat::{reproduce, Genome, InnovationTracker, ReproductionConfig, SpeciesSet};

/// Generational NEAT: every individual of every generation is truly evaluated.
pub fn run_neat<E: Environment + ?Sized>(config: &SaNeatConfig, env: &E, seed: u64) -> RunResult {
    let log = RunLog {
        seed,
        config: describe_config(config, "neat", env),
        ..RunLog::default()
    };
    let mut ev = Evaluator::new(env, config.max_evaluations, config.solve_threshold, log);
    if let Err(e) = config.validate() {
        return Err(ev.fail(Error::Experiment(e)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = env.shape();
    let mut tracker = InnovationTracker::new(shape);
    let repro = ReproductionConfig {
        rates: config.neat_rates,
        ..config.reproduction
    };
    let mut species = SpeciesSet::new(config.speciation);
    let mut population: Vec<Genome> = (0..config.population_size)
        .map(|_| Genome::minimal(shape, &mut rng, config.init_weight_range))
        .collect();
    let mut phase = Phase::Init;
    let mut generation = 0;

    loop {
        let fitness = match ev.evaluate(&population, phase) {
            Ok(f) => f,
            Err(e) => return Err(ev.fail(e)),
        };
        if ev.done() {
            break;
        }
        let scored = population.into_iter().zip(fitness).collect();
        species = species.speciate(scored, config.coeffs, &mut rng);
        species.adjust_threshold();
        let counts = species.allocate_offspring(config.population_size);
        generation += 1;
        population = reproduce(&species, &counts, &mut tracker, &mut rng, &repro, generation);
        phase = Phase::Generation;
    }
    Ok(ev.log)
}
