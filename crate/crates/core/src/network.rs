//! Feed-forward phenotypes compiled from genomes.

use std::collections::HashMap;

use crate::error::NetworkError;
use crate::neat::{Genome, NodeId, NodeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    /// Logistic sigmoid.
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Identity => x,
        }
    }
}

/// Executable form of a genome: nodes in topological order with their incoming
/// enabled edges resolved to slot indices.
#[derive(Clone, Debug)]
pub struct Phenotype {
    /// Slot of each input node, in input order.
    inputs: Vec<usize>,
    bias: usize,
    outputs: Vec<usize>,
    /// Non-sensor slots in evaluation order, with `(source slot, weight)` edges.
    order: Vec<(usize, Vec<(usize, f64)>)>,
    node_ids: Vec<NodeId>,
    activation: Activation,
}

impl Phenotype {
    pub fn build(g: &Genome) -> Result<Phenotype, NetworkError> {
        Self::with_activation(g, Activation::Tanh)
    }

    /// Topologically sorts the enabled subgraph (Kahn). Fails on a cycle.
    pub fn with_activation(g: &Genome, activation: Activation) -> Result<Phenotype, NetworkError> {
        let node_ids: Vec<NodeId> = g.nodes().iter().map(|n| n.id).collect();
        let slot: HashMap<NodeId, usize> =
            node_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let n = node_ids.len();

        let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for c in g.connections().iter().filter(|c| c.enabled) {
            let (s, t) = (slot[&c.source], slot[&c.target]);
            incoming[t].push((s, c.weight));
            fanout[s].push(t);
            indegree[t] += 1;
        }

        let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        ready.reverse();
        let mut sorted = Vec::with_capacity(n);
        while let Some(i) = ready.pop() {
            sorted.push(i);
            for &t in &fanout[i] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    ready.push(t);
                }
            }
        }
        if sorted.len() != n {
            return Err(NetworkError::Cycle);
        }

        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        let mut bias = usize::MAX;
        for (i, node) in g.nodes().iter().enumerate() {
            match node.kind {
                NodeKind::Input => inputs.push(i),
                NodeKind::Bias => bias = i,
                NodeKind::Output => outputs.push(i),
                NodeKind::Hidden => {}
            }
        }
        let order = sorted
            .into_iter()
            .filter(|&i| !g.nodes()[i].kind.is_sensor())
            .map(|i| (i, std::mem::take(&mut incoming[i])))
            .collect();

        Ok(Phenotype {
            inputs,
            bias,
            outputs,
            order,
            node_ids,
            activation,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Node ids of non-sensor nodes in evaluation order.
    pub fn evaluation_order(&self) -> Vec<NodeId> {
        self.order.iter().map(|(i, _)| self.node_ids[*i]).collect()
    }

    /// Depth of each non-sensor node (sensors are depth 0), keyed by node id.
    pub fn depths(&self) -> HashMap<NodeId, usize> {
        let mut depth = vec![0usize; self.node_ids.len()];
        for (i, edges) in &self.order {
            depth[*i] = edges.iter().map(|(s, _)| depth[*s] + 1).max().unwrap_or(1);
        }
        self.order
            .iter()
            .map(|(i, _)| (self.node_ids[*i], depth[*i]))
            .collect()
    }

    /// Number of layers including the sensor layer.
    pub fn layer_count(&self) -> usize {
        self.depths().values().copied().max().unwrap_or(0) + 1
    }

    /// Evaluates the network; the bias node is fixed at 1.0.
    pub fn activate(&self, inputs: &[f64]) -> Result<Vec<f64>, NetworkError> {
        let mut scratch = vec![0.0; self.node_ids.len()];
        let mut out = vec![0.0; self.outputs.len()];
        self.activate_into(inputs, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Allocation-free variant; `scratch` must hold one value per node.
    pub fn activate_into(
        &self,
        inputs: &[f64],
        scratch: &mut [f64],
        out: &mut [f64],
    ) -> Result<(), NetworkError> {
        if inputs.len() != self.inputs.len() {
            return Err(NetworkError::InputArity {
                expected: self.inputs.len(),
                got: inputs.len(),
            });
        }
        scratch.fill(0.0);
        for (&slot, &x) in self.inputs.iter().zip(inputs) {
            scratch[slot] = x;
        }
        if self.bias != usize::MAX {
            scratch[self.bias] = 1.0;
        }
        for (i, edges) in &self.order {
            let sum: f64 = edges.iter().map(|&(s, w)| w * scratch[s]).sum();
            scratch[*i] = self.activation.apply(sum);
        }
        for (o, &slot) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[slot];
        }
        Ok(())
    }

    pub fn scratch_len(&self) -> usize {
        self.node_ids.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neat::{ConnectionGene, InnovationTracker, NetworkShape};
    use crate::neat::mutation::mutate_add_node;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn minimal_genome_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let g = Genome::minimal(NetworkShape::new(3, 1), &mut rng, 2.0);
            let p = Phenotype::build(&g).unwrap();
            assert_eq!(p.layer_count(), 2);
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = g.connections().iter().map(|c| c.weight).collect();
            let expect = (w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + w[3]).tanh();
            let got = p.activate(&x).unwrap()[0];
            assert!((got - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn add_node_gives_three_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let shape = NetworkShape::new(2, 1);
        let mut g = Genome::minimal(shape, &mut rng, 1.0);
        let mut t = InnovationTracker::new(shape);
        mutate_add_node(&mut g, &mut t, &mut rng);
        let p = Phenotype::build(&g).unwrap();
        assert_eq!(p.evaluation_order(), vec![4, 3]);
        assert_eq!(p.layer_count(), 3);
    }

    #[test]
    fn zero_weights_and_disabled_connections() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = Genome::minimal(NetworkShape::new(4, 2), &mut rng, 1.0);
        for (w, _) in g.connections_mut() {
            *w = 0.0;
        }
        let p = Phenotype::build(&g).unwrap();
        assert_eq!(p.activate(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.0, 0.0]);

        let mut off = Genome::minimal(NetworkShape::new(4, 2), &mut rng, 5.0);
        for (_, e) in off.connections_mut() {
            *e = false;
        }
        let p = Phenotype::build(&off).unwrap();
        assert_eq!(p.activate(&[9.0, 9.0, 9.0, 9.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn arity_is_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = Genome::minimal(NetworkShape::new(4, 1), &mut rng, 1.0);
        let p = Phenotype::build(&g).unwrap();
        assert_eq!(
            p.activate(&[1.0]),
            Err(NetworkError::InputArity {
                expected: 4,
                got: 1
            })
        );
    }

    #[test]
    fn outputs_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = Genome::minimal(NetworkShape::new(2, 1), &mut rng, 1.0);
        for (w, _) in g.connections_mut() {
            *w = 8.0;
        }
        let p = Phenotype::build(&g).unwrap();
        assert!(p.activate(&[1.0, 1.0]).unwrap()[0] <= 1.0);
        assert!(p.activate(&[-1.0, -1.0]).unwrap()[0] >= -1.0);
        let mid = p.activate(&[0.1, -0.6]).unwrap()[0];
        assert!(mid.abs() < 1.0);
    }

    #[test]
    fn cycle_is_reported() {
        // Built directly so validation can't catch it first.
        let mut nodes = NetworkShape::new(1, 1).fixed_nodes();
        nodes.push(crate::neat::NodeGene {
            id: 3,
            kind: NodeKind::Hidden,
        });
        let conn = |innovation, source, target| ConnectionGene {
            innovation,
            source,
            target,
            weight: 1.0,
            enabled: true,
        };
        let g = Genome::from_parts_unchecked_for_test(nodes, vec![conn(0, 2, 3), conn(1, 3, 2)]);
        assert_eq!(Phenotype::build(&g).unwrap_err(), NetworkError::Cycle);
    }
}
