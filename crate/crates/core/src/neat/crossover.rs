use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use rand::Rng;

use super::genome::{creates_cycle, ConnectionGene, Genome, NodeGene, NodeId, NodeKind};

/// Recombines two scored parents.
///
/// Matching genes come from either parent at random; non-matching genes come from
/// the higher-scoring parent, or from both on a tie. A gene disabled in either
/// parent is enabled in the child with probability `reenable_prob`.
///
/// On a tie the union of both parents' genes can contain two genes for the same
/// node pair or a directed cycle; such genes are dropped in innovation order.
pub fn crossover<R: Rng + ?Sized>(
    a: (&Genome, f64),
    b: (&Genome, f64),
    rng: &mut R,
    reenable_prob: f64,
) -> Genome {
    let (ga, sa) = a;
    let (gb, sb) = b;
    let take_a = sa >= sb;
    let take_b = sb >= sa;
    let tie = take_a && take_b;

    let ca = ga.connections();
    let cb = gb.connections();
    let mut child: Vec<ConnectionGene> = Vec::with_capacity(ca.len().max(cb.len()));
    let mut pairs: HashSet<(NodeId, NodeId)> = HashSet::new();

    let mut inherit = |gene: ConnectionGene, disabled_somewhere: bool, rng: &mut R| {
        if !pairs.insert((gene.source, gene.target)) {
            return;
        }
        if tie && creates_cycle(&child, gene.source, gene.target) {
            pairs.remove(&(gene.source, gene.target));
            return;
        }
        let enabled = !disabled_somewhere || rng.random_bool(reenable_prob.clamp(0.0, 1.0));
        child.push(ConnectionGene { enabled, ..gene });
    };

    let (mut i, mut j) = (0, 0);
    while i < ca.len() || j < cb.len() {
        let ord = match (ca.get(i), cb.get(j)) {
            (Some(x), Some(y)) => x.innovation.cmp(&y.innovation),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => unreachable!(),
        };
        match ord {
            Ordering::Equal => {
                let (x, y) = (ca[i], cb[j]);
                let gene = if rng.random_bool(0.5) { x } else { y };
                inherit(gene, !x.enabled || !y.enabled, rng);
                i += 1;
                j += 1;
            }
            Ordering::Less => {
                if take_a {
                    inherit(ca[i], !ca[i].enabled, rng);
                }
                i += 1;
            }
            Ordering::Greater => {
                if take_b {
                    inherit(cb[j], !cb[j].enabled, rng);
                }
                j += 1;
            }
        }
    }

    let mut nodes: BTreeMap<NodeId, NodeKind> = ga
        .nodes()
        .iter()
        .filter(|n| n.kind != NodeKind::Hidden)
        .map(|n| (n.id, n.kind))
        .collect();
    for c in &child {
        for id in [c.source, c.target] {
            nodes.entry(id).or_insert(NodeKind::Hidden);
        }
    }
    let nodes = nodes
        .into_iter()
        .map(|(id, kind)| NodeGene { id, kind })
        .collect();
    Genome::from_parts_unchecked(nodes, child, 0)
}
