use saneat::cmaes::{maximize, CmaesOptions};

fn sphere(x: &[f64]) -> f64 {
    -x.iter().map(|v| v * v).sum::<f64>()
}

fn rosenbrock(x: &[f64]) -> f64 {
    -(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2))
}

#[test]
fn sphere_4d() {
    for seed in 0..5 {
        let r = maximize(sphere, &[1.0, -1.0, 2.0, 0.5], &CmaesOptions::unbounded(4, 0.5, 4000, seed));
        assert!(r.evaluations <= 4000);
        assert!(-r.best_value < 1e-10, "seed {seed}: {}", -r.best_value);
    }
}

#[test]
fn rosenbrock_2d() {
    for seed in 0..5 {
        let r = maximize(rosenbrock, &[-1.2, 1.0], &CmaesOptions::unbounded(2, 0.5, 20000, seed));
        assert!(r.evaluations <= 20000);
        assert!(-r.best_value < 1e-6, "seed {seed}: {}", -r.best_value);
    }
}

#[test]
fn same_seed_same_run() {
    let opts = CmaesOptions::unbounded(2, 0.5, 3000, 42);
    let a = maximize(rosenbrock, &[0.0, 0.0], &opts);
    let b = maximize(rosenbrock, &[0.0, 0.0], &opts);
    assert_eq!(a.best_x, b.best_x);
    assert_eq!(a.history, b.history);
    let c = maximize(rosenbrock, &[0.0, 0.0], &CmaesOptions::unbounded(2, 0.5, 3000, 43));
    assert_ne!(a.history, c.history);
}
