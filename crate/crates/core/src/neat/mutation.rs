//! Structural and weight mutation operators.
//!
//! All operators mutate the genome in place and report whether anything changed.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::genome::{ConnectionGene, Genome, NodeGene, NodeId, NodeKind};
use super::innovation::InnovationTracker;

/// Per-weight mutation settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightMutation {
    /// Probability a weight is perturbed when it is not reset.
    pub perturb_prob: f64,
    /// Standard deviation of the Gaussian perturbation.
    pub perturb_sigma: f64,
    /// Probability a weight is replaced by a fresh uniform draw.
    pub reset_prob: f64,
    /// Fresh draws come from `[-reset_range, reset_range]`.
    pub reset_range: f64,
    /// Weights are clamped to `[-clamp, clamp]`.
    pub clamp: f64,
}

impl Default for WeightMutation {
    fn default() -> Self {
        WeightMutation {
            perturb_prob: 1.0,
            perturb_sigma: 2.0,
            reset_prob: 0.1,
            reset_range: 3.0,
            clamp: 30.0,
        }
    }
}

/// Every `(source, target)` pair that could be connected without duplicating an
/// existing gene or closing a cycle.
pub fn legal_connection_pairs(g: &Genome) -> Vec<(NodeId, NodeId)> {
    let existing: HashSet<(NodeId, NodeId)> = g
        .connections()
        .iter()
        .map(|c| (c.source, c.target))
        .collect();
    let mut pairs = Vec::new();
    for target in g.nodes().iter().filter(|n| !n.kind.is_sensor()) {
        // A source is illegal if it is downstream of (or equal to) the target.
        let downstream = descendants(g, target.id);
        for source in g.nodes() {
            if !downstream.contains(&source.id) && !existing.contains(&(source.id, target.id)) {
                pairs.push((source.id, target.id));
            }
        }
    }
    pairs
}

fn descendants(g: &Genome, from: NodeId) -> HashSet<NodeId> {
    let mut seen = HashSet::new();
    let mut stack = vec![from];
    while let Some(n) = stack.pop() {
        if seen.insert(n) {
            stack.extend(
                g.connections()
                    .iter()
                    .filter(|c| c.source == n)
                    .map(|c| c.target),
            );
        }
    }
    seen
}

/// Adds one enabled connection between a random legal pair, with weight uniform
/// in `[-weight_range, weight_range]`. Returns `false` if the topology is saturated.
pub fn mutate_add_connection<R: Rng + ?Sized>(
    g: &mut Genome,
    tracker: &mut InnovationTracker,
    rng: &mut R,
    weight_range: f64,
) -> bool {
    let pairs = legal_connection_pairs(g);
    let Some(&(source, target)) = pairs.choose(rng) else {
        return false;
    };
    let innovation = tracker.connection(source, target);
    g.push_connection(ConnectionGene {
        innovation,
        source,
        target,
        weight: rng.random_range(-weight_range..=weight_range),
        enabled: true,
    });
    debug_assert_eq!(g.validate(), Ok(()));
    true
}

/// Splits a random enabled connection `s → t` (weight `w`) into `s → n` (1.0)
/// and `n → t` (`w`), disabling the original.
pub fn mutate_add_node<R: Rng + ?Sized>(
    g: &mut Genome,
    tracker: &mut InnovationTracker,
    rng: &mut R,
) -> bool {
    let enabled: Vec<usize> = g
        .connections()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.enabled)
        .map(|(i, _)| i)
        .collect();
    let Some(&index) = enabled.choose(rng) else {
        return false;
    };
    let old = g.connections()[index];
    let split = tracker.split(old.innovation, old.source, old.target, |id| {
        g.node(id).is_some()
    });
    g.connection_mut(index).enabled = false;
    g.push_node(NodeGene {
        id: split.node,
        kind: NodeKind::Hidden,
    });
    g.push_connection(ConnectionGene {
        innovation: split.into_node,
        source: old.source,
        target: split.node,
        weight: 1.0,
        enabled: true,
    });
    g.push_connection(ConnectionGene {
        innovation: split.out_of_node,
        source: split.node,
        target: old.target,
        weight: old.weight,
        enabled: true,
    });
    debug_assert_eq!(g.validate(), Ok(()));
    true
}

/// Resets or perturbs each weight independently, then clamps. Topology is untouched.
pub fn mutate_weights<R: Rng + ?Sized>(g: &mut Genome, rng: &mut R, params: &WeightMutation) -> bool {
    let noise = Normal::new(0.0, params.perturb_sigma.max(0.0)).expect("finite sigma");
    let mut changed = false;
    for (w, _) in g.connections_mut() {
        let before = *w;
        if params.reset_prob > 0.0 && rng.random_bool(params.reset_prob.min(1.0)) {
            *w = rng.random_range(-params.reset_range..=params.reset_range);
        } else if params.perturb_prob > 0.0 && rng.random_bool(params.perturb_prob.min(1.0)) {
            *w += noise.sample(rng);
        }
        *w = w.clamp(-params.clamp, params.clamp);
        changed |= *w != before;
    }
    changed
}
