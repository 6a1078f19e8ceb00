//! CMA-ES on the sphere and Rosenbrock functions (maximizing their negation).

use saneat::cmaes::{maximize, CmaesOptions};

fn main() {
    let sphere = |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>();
    let r = maximize(sphere, &[1.0, -2.0, 0.5, 3.0], &CmaesOptions::unbounded(4, 0.5, 4000, 1));
    println!(
        "sphere:     f {:.3e} after {} evaluations ({} generations)",
        -r.best_value, r.evaluations, r.generations
    );

    let rosen = |x: &[f64]| -(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
    let r = maximize(rosen, &[-1.2, 1.0], &CmaesOptions::unbounded(2, 0.5, 20000, 1));
    println!(
        "rosenbrock: f {:.3e} at {:?} after {} evaluations",
        -r.best_value, r.best_x, r.evaluations
    );

    let opts = CmaesOptions::bounded(vec![1.0, 1.0], vec![2.0, 2.0], 0.3, 2000, 1);
    let r = maximize(sphere, &[1.5, 1.5], &opts);
    println!("sphere on [1,2]^2: best x {:?}", r.best_x);
}
