//! A small analytic task: fit a fixed nonlinear target at ten points.
//!
//! Cheap and deterministic, so loops can be exercised quickly.

use std::f64::consts::PI;

use super::Environment;
use crate::error::EnvError;
use crate::neat::{Genome, NetworkShape};
use crate::network::Phenotype;

#[derive(Clone, Debug)]
pub struct NetTest {
    points: Vec<([f64; 2], f64)>,
}

impl Default for NetTest {
    fn default() -> Self {
        let points = (0..10)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / 10.0;
                ([0.8 * a.cos(), 0.8 * a.sin()], 0.5 * (3.0 * a).sin())
            })
            .collect();
        NetTest { points }
    }
}

impl NetTest {
    pub fn points(&self) -> &[([f64; 2], f64)] {
        &self.points
    }
}

impl Environment for NetTest {
    fn name(&self) -> String {
        "nettest".into()
    }

    fn shape(&self) -> NetworkShape {
        NetworkShape::new(2, 1)
    }

    /// Negative sum of squared errors, so 0 is perfect.
    fn evaluate(&self, genome: &Genome) -> Result<f64, EnvError> {
        let net = Phenotype::build(genome)?;
        let mut sse = 0.0;
        for (x, target) in &self.points {
            let y = net.activate(x)?[0];
            sse += (y - target).powi(2);
        }
        Ok(-sse)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_scores_target_energy() {
        let env = NetTest::default();
        let mut g = Genome::minimal(env.shape(), &mut ChaCha8Rng::seed_from_u64(0), 1.0);
        for (w, _) in g.connections_mut() {
            *w = 0.0;
        }
        let expect: f64 = env.points().iter().map(|(_, t)| t * t).sum();
        assert!((env.evaluate(&g).unwrap() + expect).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_non_positive() {
        let env = NetTest::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = Genome::minimal(env.shape(), &mut rng, 2.0);
            let a = env.evaluate(&g).unwrap();
            assert!(a <= 0.0);
            assert_eq!(a, env.evaluate(&g).unwrap());
        }
    }
}
