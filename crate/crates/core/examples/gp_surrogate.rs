//! Fits the compatibility-kernel GP to a few hundred evaluated genomes and
//! checks how well it ranks genomes it has not seen.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use saneat::env::{Environment, NetTest};
use saneat::gp::{GpFitConfig, GpModel};
use saneat::neat::{mutate_add_node, mutate_weights, CompatCoefficients, Genome, InnovationTracker, WeightMutation};

fn population(n: usize, rng: &mut ChaCha8Rng, tracker: &mut InnovationTracker, env: &NetTest) -> Vec<Genome> {
    let base = Genome::minimal(env.shape(), rng, 1.0);
    (0..n)
        .map(|i| {
            let mut g = base.clone();
            if i % 3 == 0 {
                mutate_add_node(&mut g, tracker, rng);
            }
            mutate_weights(&mut g, rng, &WeightMutation::default());
            g
        })
        .collect()
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (k, &i) in idx.iter().enumerate() {
            r[i] = k as f64;
        }
        r
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = a.len() as f64;
    let d2: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - y).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

fn main() {
    let env = NetTest::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut tracker = InnovationTracker::new(env.shape());
    let train = population(200, &mut rng, &mut tracker, &env);
    let test = population(100, &mut rng, &mut tracker, &env);
    let fit = |g: &[Genome]| -> Vec<f64> { g.iter().map(|g| env.evaluate(g).unwrap()).collect() };
    let (f_train, f_test) = (fit(&train), fit(&test));

    let cfg = GpFitConfig {
        budget: 400,
        seed: 1,
        ..GpFitConfig::default()
    };
    let model = GpModel::fit(&train, &f_train, CompatCoefficients::default(), &cfg, None).expect("fit");
    let h = model.hyper();
    println!(
        "l {:.4}  eta {:.4}  mu {:.4}  sigma_n {:.2e}  log-likelihood {:.2}  jitter {:.0e}",
        h.length_scale,
        h.signal_variance,
        h.mean,
        h.noise,
        model.log_likelihood(),
        model.jitter()
    );
    let pred: Vec<f64> = test.iter().map(|g| model.predict(g).mean).collect();
    println!("held-out rank correlation {:.3}", spearman(&pred, &f_test));
    for (g, f) in test.iter().zip(&f_test).take(5) {
        let p = model.predict(g);
        println!("true {f:>8.4}  mean {:>8.4}  std {:.4}", p.mean, p.std_dev());
    }
}
