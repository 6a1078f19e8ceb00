use std::collections::HashMap;

use super::genome::{Innovation, NetworkShape, NodeId};

/// Numbers handed out for one split of a connection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitInnovation {
    pub node: NodeId,
    pub into_node: Innovation,
    pub out_of_node: Innovation,
}

/// Running counters for innovation numbers and hidden-node ids.
///
/// Within one generation the same structural mutation gets the same numbers;
/// [`begin_generation`](Self::begin_generation) clears that cache. Counters only
/// ever grow, and every innovation handed out is recorded with its endpoints so
/// the run-wide binding `innovation → (source, target)` can be audited.
#[derive(Clone, Debug)]
pub struct InnovationTracker {
    next_innovation: Innovation,
    next_node_id: NodeId,
    connection_cache: HashMap<(NodeId, NodeId), Innovation>,
    split_cache: HashMap<Innovation, SplitInnovation>,
    bindings: HashMap<Innovation, (NodeId, NodeId)>,
}

impl InnovationTracker {
    /// Tracker whose counters start past the minimal genome of `shape`.
    pub fn new(shape: NetworkShape) -> Self {
        let mut bindings = HashMap::new();
        for sensor in 0..=shape.inputs {
            for output in 0..shape.outputs {
                bindings.insert(
                    shape.initial_innovation(sensor, output),
                    (sensor as NodeId, shape.output_id(output)),
                );
            }
        }
        InnovationTracker {
            next_innovation: shape.initial_connection_count() as Innovation,
            next_node_id: shape.fixed_node_count() as NodeId,
            connection_cache: HashMap::new(),
            split_cache: HashMap::new(),
            bindings,
        }
    }

    pub fn begin_generation(&mut self) {
        self.connection_cache.clear();
        self.split_cache.clear();
    }

    pub fn next_innovation(&self) -> Innovation {
        self.next_innovation
    }

    pub fn next_node_id(&self) -> NodeId {
        self.next_node_id
    }

    /// Innovation for a new `source → target` connection.
    pub fn connection(&mut self, source: NodeId, target: NodeId) -> Innovation {
        if let Some(&innov) = self.connection_cache.get(&(source, target)) {
            return innov;
        }
        let innov = self.fresh_innovation(source, target);
        self.connection_cache.insert((source, target), innov);
        innov
    }

    /// Node id and the two connection innovations for splitting `split`
    /// (`source → target`).
    ///
    /// `taken` reports node ids already present in the genome being mutated;
    /// if the cached split would collide with one (the same gene split twice in a
    /// genome), fresh uncached numbers are issued instead.
    pub fn split(
        &mut self,
        split: Innovation,
        source: NodeId,
        target: NodeId,
        taken: impl Fn(NodeId) -> bool,
    ) -> SplitInnovation {
        if let Some(cached) = self.split_cache.get(&split) {
            if !taken(cached.node) {
                return *cached;
            }
            return self.fresh_split(source, target);
        }
        let fresh = self.fresh_split(source, target);
        self.split_cache.insert(split, fresh);
        self.connection_cache
            .insert((source, fresh.node), fresh.into_node);
        self.connection_cache
            .insert((fresh.node, target), fresh.out_of_node);
        fresh
    }

    fn fresh_split(&mut self, source: NodeId, target: NodeId) -> SplitInnovation {
        let node = self.next_node_id;
        self.next_node_id += 1;
        SplitInnovation {
            node,
            into_node: self.fresh_innovation(source, node),
            out_of_node: self.fresh_innovation(node, target),
        }
    }

    fn fresh_innovation(&mut self, source: NodeId, target: NodeId) -> Innovation {
        let innov = self.next_innovation;
        self.next_innovation += 1;
        self.bindings.insert(innov, (source, target));
        innov
    }

    /// Endpoints recorded for an innovation number.
    pub fn binding(&self, innovation: Innovation) -> Option<(NodeId, NodeId)> {
        self.bindings.get(&innovation).copied()
    }
}
