use rand::Rng;

use super::crossover::crossover;
use super::genome::Genome;
use super::innovation::InnovationTracker;
use super::mutation::{mutate_add_connection, mutate_add_node, mutate_weights, WeightMutation};
use super::species::{SpeciesId, SpeciesSet};

/// Per-offspring variation probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationRates {
    pub add_node: f64,
    pub add_connection: f64,
    /// Chance a gene disabled in a parent is enabled in the child.
    pub reenable: f64,
    pub crossover: f64,
    /// Chance an offspring has its weights mutated.
    pub mutate_weights: f64,
}

impl VariationRates {
    /// Rates of the original NEAT experiments.
    pub const CANONICAL: VariationRates = VariationRates {
        add_node: 0.03,
        add_connection: 0.05,
        reenable: 0.25,
        crossover: 0.75,
        mutate_weights: 0.8,
    };

    pub fn scaled(&self, factor: f64) -> VariationRates {
        let s = |p: f64| (p * factor).clamp(0.0, 1.0);
        VariationRates {
            add_node: s(self.add_node),
            add_connection: s(self.add_connection),
            reenable: s(self.reenable),
            crossover: s(self.crossover),
            mutate_weights: s(self.mutate_weights),
        }
    }

    /// Plain NEAT baseline: canonical × ½.
    pub fn neat() -> VariationRates {
        Self::CANONICAL.scaled(0.5)
    }

    /// One surrogate generation of SA-NEAT: canonical × ⅛.
    pub fn sa_neat() -> VariationRates {
        Self::CANONICAL.scaled(0.125)
    }

    pub fn zero() -> VariationRates {
        Self::CANONICAL.scaled(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReproductionConfig {
    pub rates: VariationRates,
    pub weights: WeightMutation,
    /// New connections draw weights from `[-new_weight_range, new_weight_range]`.
    pub new_weight_range: f64,
    pub tournament_size: usize,
    /// Fraction of each species (lowest scores) excluded from parenthood.
    pub cull_fraction: f64,
    /// Species at least this large keep their champion unchanged.
    pub elitism_min_size: usize,
}

impl Default for ReproductionConfig {
    fn default() -> Self {
        ReproductionConfig {
            rates: VariationRates::neat(),
            weights: WeightMutation::default(),
            new_weight_range: 1.0,
            tournament_size: 2,
            cull_fraction: 0.5,
            elitism_min_size: 5,
        }
    }
}

/// Produces `Σ counts` offspring, species by species, in the order of `counts`.
///
/// Starts a new generation on `tracker`. Offspring are stamped with `generation`.
pub fn reproduce<R: Rng + ?Sized>(
    species: &SpeciesSet,
    counts: &[(SpeciesId, usize)],
    tracker: &mut InnovationTracker,
    rng: &mut R,
    config: &ReproductionConfig,
    generation: u32,
) -> Vec<Genome> {
    tracker.begin_generation();
    let total: usize = counts.iter().map(|c| c.1).sum();
    let mut out = Vec::with_capacity(total);

    for &(id, count) in counts {
        if count == 0 {
            continue;
        }
        let Some(sp) = species.get(id) else { continue };
        let mut ranked: Vec<&(Genome, f64)> = sp.members.iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));

        let mut made = 0;
        if ranked.len() >= config.elitism_min_size {
            out.push(ranked[0].0.clone());
            made += 1;
        }

        let keep = ((ranked.len() as f64) * (1.0 - config.cull_fraction))
            .ceil()
            .max(1.0) as usize;
        let parents = &ranked[..keep.min(ranked.len())];

        while made < count {
            let p1 = tournament(parents, config.tournament_size, rng);
            let mut child = if rng.random_bool(config.rates.crossover) {
                let p2 = tournament(parents, config.tournament_size, rng);
                crossover((&p1.0, p1.1), (&p2.0, p2.1), rng, config.rates.reenable)
            } else {
                p1.0.clone()
            };
            if rng.random_bool(config.rates.mutate_weights) {
                mutate_weights(&mut child, rng, &config.weights);
            }
            if rng.random_bool(config.rates.add_node) {
                mutate_add_node(&mut child, tracker, rng);
            }
            if rng.random_bool(config.rates.add_connection) {
                mutate_add_connection(&mut child, tracker, rng, config.new_weight_range);
            }
            child.birth_generation = generation;
            debug_assert_eq!(child.validate(), Ok(()));
            out.push(child);
            made += 1;
        }
    }
    out
}

fn tournament<'a, R: Rng + ?Sized>(
    pool: &[&'a (Genome, f64)],
    size: usize,
    rng: &mut R,
) -> &'a (Genome, f64) {
    let mut best = pool[rng.random_range(0..pool.len())];
    for _ in 1..size.max(1) {
        let c = pool[rng.random_range(0..pool.len())];
        if c.1 > best.1 {
            best = c;
        }
    }
    best
}
