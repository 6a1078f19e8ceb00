//! Variable-topology genomes.
//!
//! A genome is a list of node genes and a list of connection genes. Connection
//! genes carry the innovation number assigned when the structure first
//! appeared, and are kept sorted by it so that two genomes can be aligned with
//! a single linear merge.
//!
//! Node ids of the fixed sensor and actuator nodes follow a fixed layout shared
//! by every genome of a run: inputs are `0..n_in`, the bias node is `n_in`, and
//! outputs are `n_in + 1 ..= n_in + n_out`. Hidden nodes get ids from the
//! [`InnovationTracker`](super::InnovationTracker).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::GenomeError;

pub type NodeId = u32;
pub type Innovation = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Input,
    Bias,
    Output,
    Hidden,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Input => "input",
            NodeKind::Bias => "bias",
            NodeKind::Output => "output",
            NodeKind::Hidden => "hidden",
        }
    }

    /// Sensors never receive connections.
    pub fn is_sensor(self) -> bool {
        matches!(self, NodeKind::Input | NodeKind::Bias)
    }
}

impl FromStr for NodeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "input" => Ok(NodeKind::Input),
            "bias" => Ok(NodeKind::Bias),
            "output" => Ok(NodeKind::Output),
            "hidden" => Ok(NodeKind::Hidden),
            other => Err(format!("unknown node kind `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeGene {
    pub id: NodeId,
    pub kind: NodeKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionGene {
    pub innovation: Innovation,
    pub source: NodeId,
    pub target: NodeId,
    pub weight: f64,
    pub enabled: bool,
}

/// Number of task inputs (excluding bias) and outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetworkShape {
    pub inputs: usize,
    pub outputs: usize,
}

impl NetworkShape {
    pub fn new(inputs: usize, outputs: usize) -> Self {
        NetworkShape { inputs, outputs }
    }

    pub fn bias_id(&self) -> NodeId {
        self.inputs as NodeId
    }

    pub fn output_id(&self, index: usize) -> NodeId {
        (self.inputs + 1 + index) as NodeId
    }

    /// Input, bias and output nodes, in id order.
    pub fn fixed_nodes(&self) -> Vec<NodeGene> {
        let mut nodes = Vec::with_capacity(self.fixed_node_count());
        nodes.extend((0..self.inputs).map(|i| NodeGene {
            id: i as NodeId,
            kind: NodeKind::Input,
        }));
        nodes.push(NodeGene {
            id: self.bias_id(),
            kind: NodeKind::Bias,
        });
        nodes.extend((0..self.outputs).map(|o| NodeGene {
            id: self.output_id(o),
            kind: NodeKind::Output,
        }));
        nodes
    }

    pub fn fixed_node_count(&self) -> usize {
        self.inputs + 1 + self.outputs
    }

    /// Innovation number of the initial sensor→output connection.
    pub fn initial_innovation(&self, sensor: usize, output: usize) -> Innovation {
        (sensor * self.outputs + output) as Innovation
    }

    /// Connections in the fully-connected minimal genome, `(inputs + 1) * outputs`.
    pub fn initial_connection_count(&self) -> usize {
        (self.inputs + 1) * self.outputs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Genome {
    nodes: Vec<NodeGene>,
    connections: Vec<ConnectionGene>,
    pub birth_generation: u32,
}

impl Genome {
    /// Fully connected sensor→output genome with weights uniform in `[-init_range, init_range]`.
    pub fn minimal<R: Rng + ?Sized>(shape: NetworkShape, rng: &mut R, init_range: f64) -> Genome {
        let nodes = shape.fixed_nodes();
        let mut connections = Vec::with_capacity(shape.initial_connection_count());
        for sensor in 0..=shape.inputs {
            for output in 0..shape.outputs {
                connections.push(ConnectionGene {
                    innovation: shape.initial_innovation(sensor, output),
                    source: sensor as NodeId,
                    target: shape.output_id(output),
                    weight: rng.random_range(-init_range..=init_range),
                    enabled: true,
                });
            }
        }
        Genome {
            nodes,
            connections,
            birth_generation: 0,
        }
    }

    /// Builds a genome from raw gene lists, sorting both and validating the result.
    pub fn from_parts(
        mut nodes: Vec<NodeGene>,
        mut connections: Vec<ConnectionGene>,
    ) -> Result<Genome, GenomeError> {
        nodes.sort_by_key(|n| n.id);
        connections.sort_by_key(|c| c.innovation);
        let genome = Genome {
            nodes,
            connections,
            birth_generation: 0,
        };
        genome.validate()?;
        Ok(genome)
    }

    /// Assumes the caller has upheld every invariant; checked in debug builds.
    pub(crate) fn from_parts_unchecked(
        nodes: Vec<NodeGene>,
        connections: Vec<ConnectionGene>,
        birth_generation: u32,
    ) -> Genome {
        let genome = Genome {
            nodes,
            connections,
            birth_generation,
        };
        debug_assert_eq!(genome.validate(), Ok(()));
        genome
    }

    #[cfg(test)]
    pub(crate) fn from_parts_unchecked_for_test(
        nodes: Vec<NodeGene>,
        connections: Vec<ConnectionGene>,
    ) -> Genome {
        Genome {
            nodes,
            connections,
            birth_generation: 0,
        }
    }

    pub fn nodes(&self) -> &[NodeGene] {
        &self.nodes
    }

    pub fn connections(&self) -> &[ConnectionGene] {
        &self.connections
    }

    /// Mutable access to weights and enabled flags. Topology cannot change through this.
    pub fn connections_mut(&mut self) -> impl Iterator<Item = (&mut f64, &mut bool)> {
        self.connections
            .iter_mut()
            .map(|c| (&mut c.weight, &mut c.enabled))
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeGene> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn enabled_count(&self) -> usize {
        self.connections.iter().filter(|c| c.enabled).count()
    }

    /// Hash of the genes (not `birth_generation`). Equal genomes share it.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for n in &self.nodes {
            (n.id, n.kind as u8).hash(&mut h);
        }
        for c in &self.connections {
            (c.innovation, c.source, c.target, c.weight.to_bits(), c.enabled).hash(&mut h);
        }
        h.finish()
    }

    pub fn hidden_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Hidden)
            .count()
    }

    pub fn has_pair(&self, source: NodeId, target: NodeId) -> bool {
        self.connections
            .iter()
            .any(|c| c.source == source && c.target == target)
    }

    /// True when a `source → target` edge would close a directed cycle.
    ///
    /// Disabled connections are included since crossover can re-enable them.
    pub fn creates_cycle(&self, source: NodeId, target: NodeId) -> bool {
        creates_cycle(&self.connections, source, target)
    }

    pub(crate) fn push_node(&mut self, node: NodeGene) {
        let pos = self.nodes.partition_point(|n| n.id < node.id);
        self.nodes.insert(pos, node);
    }

    pub(crate) fn push_connection(&mut self, conn: ConnectionGene) {
        let pos = self
            .connections
            .partition_point(|c| c.innovation < conn.innovation);
        self.connections.insert(pos, conn);
    }

    pub(crate) fn connection_mut(&mut self, index: usize) -> &mut ConnectionGene {
        &mut self.connections[index]
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<(), GenomeError> {
        let mut kinds = HashMap::with_capacity(self.nodes.len());
        for n in &self.nodes {
            if kinds.insert(n.id, n.kind).is_some() {
                return Err(GenomeError::DuplicateNode(n.id));
            }
        }
        let mut pairs = HashSet::with_capacity(self.connections.len());
        for (i, c) in self.connections.iter().enumerate() {
            if i > 0 {
                let prev = self.connections[i - 1].innovation;
                if prev == c.innovation {
                    return Err(GenomeError::DuplicateInnovation(c.innovation));
                }
                if prev > c.innovation {
                    return Err(GenomeError::Unsorted(i));
                }
            }
            for node in [c.source, c.target] {
                if !kinds.contains_key(&node) {
                    return Err(GenomeError::MissingNode {
                        innovation: c.innovation,
                        node,
                    });
                }
            }
            if kinds[&c.target].is_sensor() {
                return Err(GenomeError::IntoSensor(c.innovation));
            }
            if !pairs.insert((c.source, c.target)) {
                return Err(GenomeError::DuplicatePair(c.source, c.target));
            }
        }
        // Rebuild edge by edge so the offending gene can be named.
        for (i, c) in self.connections.iter().enumerate() {
            if creates_cycle(&self.connections[..i], c.source, c.target) {
                return Err(GenomeError::Cycle(c.innovation));
            }
        }
        Ok(())
    }

    /// Serializes to the line-oriented genome text format.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Genome, GenomeError> {
        text.parse()
    }
}

pub(crate) fn creates_cycle(connections: &[ConnectionGene], source: NodeId, target: NodeId) -> bool {
    if source == target {
        return true;
    }
    // Is `source` reachable from `target`?
    let mut stack = vec![target];
    let mut seen = HashSet::new();
    while let Some(node) = stack.pop() {
        if node == source {
            return true;
        }
        if !seen.insert(node) {
            continue;
        }
        stack.extend(
            connections
                .iter()
                .filter(|c| c.source == node)
                .map(|c| c.target),
        );
    }
    false
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "genome {} {}", self.nodes.len(), self.connections.len())?;
        for n in &self.nodes {
            writeln!(f, "node {} {}", n.id, n.kind.as_str())?;
        }
        for c in &self.connections {
            writeln!(
                f,
                "conn {} {} {} {:.16e} {}",
                c.innovation,
                c.source,
                c.target,
                c.weight,
                u8::from(c.enabled)
            )?;
        }
        Ok(())
    }
}

impl FromStr for Genome {
    type Err = GenomeError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        fn field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, GenomeError> {
            tok.and_then(|t| t.parse().ok()).ok_or_else(|| GenomeError::Parse {
                line,
                msg: format!("bad or missing {what}"),
            })
        }

        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(GenomeError::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("genome") {
            return Err(GenomeError::Parse {
                line: hline,
                msg: "expected `genome <n_nodes> <n_conns>`".into(),
            });
        }
        let n_nodes: usize = field(toks.next(), hline, "node count")?;
        let n_conns: usize = field(toks.next(), hline, "connection count")?;

        let mut nodes = Vec::with_capacity(n_nodes);
        let mut connections = Vec::with_capacity(n_conns);
        for (line, l) in lines {
            let mut toks = l.split_whitespace();
            match toks.next() {
                Some("node") => {
                    let id = field(toks.next(), line, "node id")?;
                    let kind = toks
                        .next()
                        .ok_or("missing node kind".to_string())
                        .and_then(NodeKind::from_str)
                        .map_err(|msg| GenomeError::Parse { line, msg })?;
                    nodes.push(NodeGene { id, kind });
                }
                Some("conn") => {
                    let innovation = field(toks.next(), line, "innovation")?;
                    let source = field(toks.next(), line, "source")?;
                    let target = field(toks.next(), line, "target")?;
                    let weight: f64 = field(toks.next(), line, "weight")?;
                    let enabled = match toks.next() {
                        Some("1") => true,
                        Some("0") => false,
                        _ => {
                            return Err(GenomeError::Parse {
                                line,
                                msg: "enabled flag must be 0 or 1".into(),
                            })
                        }
                    };
                    connections.push(ConnectionGene {
                        innovation,
                        source,
                        target,
                        weight,
                        enabled,
                    });
                }
                _ => {
                    return Err(GenomeError::Parse {
                        line,
                        msg: format!("unexpected line `{l}`"),
                    })
                }
            }
        }
        if nodes.len() != n_nodes || connections.len() != n_conns {
            return Err(GenomeError::Parse {
                line: hline,
                msg: format!(
                    "header declares {n_nodes} nodes / {n_conns} conns, found {} / {}",
                    nodes.len(),
                    connections.len()
                ),
            });
        }
        Genome::from_parts(nodes, connections)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn minimal_genome_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let shape = NetworkShape::new(4, 1);
        let g = Genome::minimal(shape, &mut rng, 1.0);
        assert_eq!(g.nodes().len(), 6);
        assert_eq!(g.connections().len(), 5);
        assert!(g.connections().iter().all(|c| c.weight.abs() <= 1.0));
        assert_eq!(g.node(4).unwrap().kind, NodeKind::Bias);
        assert_eq!(g.node(5).unwrap().kind, NodeKind::Output);
        g.validate().unwrap();
    }

    #[test]
    fn text_format_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut g = Genome::minimal(NetworkShape::new(2, 2), &mut rng, 1.0);
        g.connection_mut(1).enabled = false;
        let text = g.to_text();
        assert!(text.starts_with("genome 5 6\nnode 0 input\n"));
        assert!(text.contains("node 2 bias"));
        let back = Genome::from_text(&text).unwrap();
        assert_eq!(back.nodes(), g.nodes());
        assert_eq!(back.connections(), g.connections());
    }

    #[test]
    fn weight_has_seventeen_significant_digits() {
        let g = Genome::from_parts(
            NetworkShape::new(1, 1).fixed_nodes(),
            vec![ConnectionGene {
                innovation: 0,
                source: 0,
                target: 2,
                weight: 0.1,
                enabled: true,
            }],
        )
        .unwrap();
        assert!(g.to_text().contains("conn 0 0 2 1.0000000000000001e-1 1"));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Genome::from_text("genome 1 0\nnode 0 sideways\n"),
            Err(GenomeError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Genome::from_text("genome 2 0\nnode 0 input\n"),
            Err(GenomeError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Genome::from_text("genome 2 1\nnode 0 input\nnode 1 output\nconn 0 0 1 0.5 2\n"),
            Err(GenomeError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn validate_rejects_broken_genomes() {
        let nodes = NetworkShape::new(1, 1).fixed_nodes();
        let conn = |innovation, source, target| ConnectionGene {
            innovation,
            source,
            target,
            weight: 0.0,
            enabled: true,
        };
        assert_eq!(
            Genome::from_parts(nodes.clone(), vec![conn(0, 0, 9)]),
            Err(GenomeError::MissingNode {
                innovation: 0,
                node: 9
            })
        );
        assert_eq!(
            Genome::from_parts(nodes.clone(), vec![conn(0, 0, 2), conn(1, 0, 2)]),
            Err(GenomeError::DuplicatePair(0, 2))
        );
        assert_eq!(
            Genome::from_parts(nodes.clone(), vec![conn(0, 2, 1)]),
            Err(GenomeError::IntoSensor(0))
        );
        let mut with_hidden = nodes.clone();
        with_hidden.push(NodeGene {
            id: 3,
            kind: NodeKind::Hidden,
        });
        assert_eq!(
            Genome::from_parts(with_hidden, vec![conn(0, 2, 3), conn(1, 3, 2)]),
            Err(GenomeError::Cycle(1))
        );
    }
}
