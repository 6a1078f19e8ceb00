//! Random genome generators shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use saneat::neat::{
    compatibility_distance, crossover, mutate_add_connection, CompatCoefficients, mutate_add_node, mutate_weights, Genome, InnovationTracker, NetworkShape,
    WeightMutation,
};

/// A family of related genomes grown from one minimal ancestor, so that they
/// share some innovations and differ in others.
pub fn family(seed: u64, shape: NetworkShape, size: usize, max_steps: usize) -> Vec<Genome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = InnovationTracker::new(shape);
    let root = Genome::minimal(shape, &mut rng, 2.0);
    let mut out: Vec<Genome> = Vec::with_capacity(size);
    while out.len() < size {
        let mut g = if out.is_empty() || rng.random_bool(0.3) {
            root.clone()
        } else {
            out[rng.random_range(0..out.len())].clone()
        };
        for _ in 0..rng.random_range(0..=max_steps) {
            match rng.random_range(0..4) {
                0 => {
                    mutate_add_node(&mut g, &mut tracker, &mut rng);
                }
                1 => {
                    mutate_add_connection(&mut g, &mut tracker, &mut rng, 2.0);
                }
                2 if !out.is_empty() => {
                    let other = &out[rng.random_range(0..out.len())];
                    g = crossover((&g, rng.random()), (other, rng.random()), &mut rng, 0.25);
                }
                _ => {
                    mutate_weights(&mut g, &mut rng, &WeightMutation::default());
                }
            }
        }
        out.push(g);
    }
    out
}

/// Like [`family`] but no two members are at distance zero.
pub fn distinct_family(seed: u64, shape: NetworkShape, size: usize, max_steps: usize) -> Vec<Genome> {
    let mut out: Vec<Genome> = Vec::with_capacity(size);
    let mut k = 0;
    while out.len() < size {
        for g in family(seed.wrapping_mul(1_000_003).wrapping_add(k), shape, size, max_steps) {
            if out.len() < size && out.iter().all(|o| compatibility_distance(o, &g, CompatCoefficients::default()) > 1e-3) {
                out.push(g);
            }
        }
        k += 1;
    }
    out
}

/// A length scale at which every off-diagonal kernel entry is below
/// `1 / (spread · n)` of the diagonal, so K is diagonally dominant.
pub fn dominant_length_scale(genomes: &[Genome], spread: f64) -> f64 {
    let mut dmin = f64::INFINITY;
    for (i, a) in genomes.iter().enumerate() {
        for b in &genomes[..i] {
            dmin = dmin.min(compatibility_distance(a, b, CompatCoefficients::default()));
        }
    }
    dmin * dmin / (2.0 * (spread * genomes.len() as f64).ln())
}
