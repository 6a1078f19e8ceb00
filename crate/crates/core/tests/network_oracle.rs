mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saneat::neat::{Genome, NetworkShape, NodeId, NodeKind};
use saneat::network::Phenotype;

/// Evaluates a node by recursing into its enabled inputs, without memoising.
fn value(g: &Genome, node: NodeId, inputs: &[f64]) -> f64 {
    let kind = g.node(node).unwrap().kind;
    match kind {
        NodeKind::Input => inputs[node as usize],
        NodeKind::Bias => 1.0,
        NodeKind::Output | NodeKind::Hidden => {
            let mut sum = 0.0;
            for c in g.connections().iter().filter(|c| c.enabled && c.target == node) {
                sum += c.weight * value(g, c.source, inputs);
            }
            sum.tanh()
        }
    }
}

fn recursive(g: &Genome, shape: NetworkShape, inputs: &[f64]) -> Vec<f64> {
    (0..shape.outputs).map(|o| value(g, shape.output_id(o), inputs)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn activate_matches_recursion(seed in any::<u64>(), n_in in 1usize..5, n_out in 1usize..3) {
        let shape = NetworkShape::new(n_in, n_out);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in common::family(seed, shape, 8, 10) {
            let net = Phenotype::build(&g).unwrap();
            for _ in 0..10 {
                let x: Vec<f64> = (0..n_in).map(|_| rng.random_range(-2.0..2.0)).collect();
                let got = net.activate(&x).unwrap();
                let want = recursive(&g, shape, &x);
                for (a, b) in got.iter().zip(&want) {
                    prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn disabled_edges_are_ignored() {
    let g: Genome = "genome 4 3\nnode 0 input\nnode 1 bias\nnode 2 output\nnode 3 hidden\n\
                     conn 0 0 2 5.0 0\nconn 2 0 3 1.0 1\nconn 3 3 2 0.5 1\n"
        .parse()
        .unwrap();
    let y = Phenotype::build(&g).unwrap().activate(&[0.3]).unwrap()[0];
    assert_eq!(y, (0.5 * 0.3f64.tanh()).tanh());
}
