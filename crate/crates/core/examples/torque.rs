//! Network outputs read as torque increments, integrated and clamped.

use saneat::env::TorqueIntegrator;

fn main() {
    let mut t = TorqueIntegrator::new(vec![1.0, 0.5], 0.5);
    for out in [[0.4, 0.4], [1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [0.0, 0.0]] {
        let torque = t.apply(&out).to_vec();
        println!("outputs {out:?} -> torque {torque:?}");
    }
}
