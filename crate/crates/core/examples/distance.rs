//! Compatibility distance between related genomes as structure diverges.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use saneat::neat::{
    align, compatibility_distance, mutate_add_connection, mutate_add_node, mutate_weights, CompatCoefficients, Genome,
    InnovationTracker, NetworkShape, WeightMutation,
};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let shape = NetworkShape::new(4, 1);
    let mut tracker = InnovationTracker::new(shape);
    let coeffs = CompatCoefficients::default();

    let parent = Genome::minimal(shape, &mut rng, 1.0);
    let mut child = parent.clone();
    println!("step  nodes  conns  matching  disjoint+excess  mean|dw|  delta");
    for step in 0..6 {
        let a = align(parent.connections(), child.connections());
        println!(
            "{step:>4}  {:>5}  {:>5}  {:>8}  {:>15}  {:>8.3}  {:.3}",
            child.nodes().len(),
            child.connections().len(),
            a.matching,
            a.non_matching,
            a.mean_weight_diff(),
            compatibility_distance(&parent, &child, coeffs)
        );
        if step % 2 == 0 {
            mutate_add_node(&mut child, &mut tracker, &mut rng);
        } else {
            mutate_add_connection(&mut child, &mut tracker, &mut rng, 1.0);
            mutate_weights(&mut child, &mut rng, &WeightMutation::default());
        }
    }
    let other = Genome::minimal(shape, &mut rng, 1.0);
    println!("unrelated minimal genome: delta {:.3}", compatibility_distance(&parent, &other, coeffs));
}
