//! Threshold clustering of a population into species, and the per-species
//! share of offspring.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::distance::{compatibility_distance, CompatCoefficients};
use super::genome::Genome;

pub type SpeciesId = u32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeciationConfig {
    pub initial_threshold: f64,
    pub target_species: usize,
    /// Threshold change per adjustment.
    pub threshold_step: f64,
    pub threshold_floor: f64,
    /// Generations without improvement after which a species gets no offspring.
    pub stagnation_limit: u32,
}

impl Default for SpeciationConfig {
    fn default() -> Self {
        SpeciationConfig {
            initial_threshold: 3.0,
            target_species: 4,
            threshold_step: 0.1,
            threshold_floor: 0.1,
            stagnation_limit: 15,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Species {
    pub id: SpeciesId,
    pub representative: Genome,
    /// Members with the score they were ranked by (true fitness or surrogate utility).
    pub members: Vec<(Genome, f64)>,
    /// Best member score seen so far.
    pub best_score: f64,
    pub generations_since_improvement: u32,
}

impl Species {
    pub fn mean_score(&self) -> f64 {
        self.members.iter().map(|(_, s)| s).sum::<f64>() / self.members.len() as f64
    }

    pub fn max_score(&self) -> f64 {
        self.members
            .iter()
            .map(|(_, s)| *s)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct SpeciesSet {
    /// Ordered by ascending id.
    pub species: Vec<Species>,
    pub threshold: f64,
    pub config: SpeciationConfig,
    next_id: SpeciesId,
}

impl SpeciesSet {
    pub fn new(config: SpeciationConfig) -> Self {
        SpeciesSet {
            species: Vec::new(),
            threshold: config.initial_threshold,
            config,
            next_id: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn member_count(&self) -> usize {
        self.species.iter().map(|s| s.members.len()).sum()
    }

    pub fn get(&self, id: SpeciesId) -> Option<&Species> {
        self.species.iter().find(|s| s.id == id)
    }

    /// Assigns every individual to the first species (in id order) whose
    /// representative is closer than the threshold, founding new species as needed.
    ///
    /// Representatives of existing species are redrawn uniformly from their
    /// previous members first. Species left without members are dropped.
    pub fn speciate<R: Rng + ?Sized>(
        &self,
        population: Vec<(Genome, f64)>,
        coeffs: CompatCoefficients,
        rng: &mut R,
    ) -> SpeciesSet {
        let mut species: Vec<Species> = self
            .species
            .iter()
            .map(|s| Species {
                id: s.id,
                representative: s
                    .members
                    .choose(rng)
                    .map(|(g, _)| g.clone())
                    .unwrap_or_else(|| s.representative.clone()),
                members: Vec::new(),
                best_score: s.best_score,
                generations_since_improvement: s.generations_since_improvement,
            })
            .collect();
        let mut next_id = self.next_id;
        let existing = species.len();

        for (genome, score) in population {
            let home = species
                .iter()
                .position(|s| compatibility_distance(&genome, &s.representative, coeffs) < self.threshold);
            match home {
                Some(i) => species[i].members.push((genome, score)),
                None => {
                    species.push(Species {
                        id: next_id,
                        representative: genome.clone(),
                        members: vec![(genome, score)],
                        best_score: f64::NEG_INFINITY,
                        generations_since_improvement: 0,
                    });
                    next_id += 1;
                }
            }
        }

        for (i, s) in species.iter_mut().enumerate() {
            if s.members.is_empty() {
                continue;
            }
            let best = s.max_score();
            if best > s.best_score {
                s.best_score = best;
                s.generations_since_improvement = 0;
            } else if i < existing {
                s.generations_since_improvement += 1;
            }
        }
        species.retain(|s| !s.members.is_empty());

        SpeciesSet {
            species,
            threshold: self.threshold,
            config: self.config,
            next_id,
        }
    }

    /// Moves the threshold one step toward the target species count and returns it.
    pub fn adjust_threshold(&mut self) -> f64 {
        let target = self.config.target_species.max(1);
        let count = self.species.len();
        if count > target {
            self.threshold += self.config.threshold_step;
        } else if count < target {
            self.threshold -= self.config.threshold_step;
        }
        self.threshold = self.threshold.max(self.config.threshold_floor);
        self.threshold
    }

    /// Offspring count per species, summing to `population_size`.
    ///
    /// Shares are proportional to each species' total fitness-shared score
    /// (the mean member score), shifted so the weakest species keeps a small
    /// positive share. Species stagnant for `stagnation_limit` generations get
    /// nothing; if that would leave no species, the one with the highest current
    /// score survives. Counts are rounded by largest remainder.
    pub fn allocate_offspring(&self, population_size: usize) -> Vec<(SpeciesId, usize)> {
        let n = self.species.len();
        if n == 0 {
            return Vec::new();
        }
        let limit = self.config.stagnation_limit;
        let mut eligible: Vec<bool> = self
            .species
            .iter()
            .map(|s| n == 1 || s.generations_since_improvement < limit)
            .collect();
        if !eligible.iter().any(|&e| e) {
            let best = (0..n)
                .max_by(|&a, &b| {
                    self.species[a]
                        .max_score()
                        .total_cmp(&self.species[b].max_score())
                        .then(b.cmp(&a))
                })
                .unwrap();
            eligible[best] = true;
        }

        let means: Vec<f64> = self.species.iter().map(Species::mean_score).collect();
        let (lo, hi) = (0..n)
            .filter(|&i| eligible[i])
            .map(|i| means[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)));
        let floor = if hi > lo { 0.1 * (hi - lo) } else { 1.0 };
        let weights: Vec<f64> = (0..n)
            .map(|i| if eligible[i] { means[i] - lo + floor } else { 0.0 })
            .collect();
        let counts = largest_remainder(&weights, population_size);
        self.species.iter().map(|s| s.id).zip(counts).collect()
    }
}

/// Apportions `total` proportionally to `weights` (non-negative, not all zero).
pub(crate) fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    // Rounding can leave `assigned` a hair above or below; trim or pad.
    let mut remaining = total as isize - assigned as isize;
    let mut k = 0;
    while remaining > 0 {
        counts[order[k % order.len()]] += 1;
        remaining -= 1;
        k += 1;
    }
    while remaining < 0 {
        let i = order[order.len() - 1 - (k % order.len())];
        if counts[i] > 0 {
            counts[i] -= 1;
            remaining += 1;
        }
        k += 1;
    }
    counts
}
