//! Replicated NEAT and SA-NEAT experiments on the analytic task, written to
//! `out/neat_vs_sa_neat/{neat,sa-neat}` and compared by evaluations-to-solve.
//!
//! The same comparison on the cart-pole task is
//! `saneat run --algo neat --env cartpole --replicates 10 --out a`,
//! the same with `--algo sa-neat --out b`, then `saneat compare a b`.

use std::path::Path;

use saneat::experiment::{run_experiment, Comparison, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new("out/neat_vs_sa_neat");
    let mut stats = Vec::new();
    for algo in ["neat", "sa-neat"] {
        let text = format!(
            "algo = {algo}\nenv = nettest\nreplicates = 3\nseed = 11\nbudget = 1000\nsolve_threshold = -1.245\n"
        );
        let cfg = ExperimentConfig::parse(&text)?;
        let out = run_experiment(&cfg, &root.join(algo), 1)?;
        for r in &out.solves {
            println!("{algo:8} seed {:3}  evals {:5}  solved {}", r.seed, r.evals_to_solve, r.solved);
        }
        stats.push(out.stats.ok_or("no completed replicates")?);
    }
    let b = stats.pop().unwrap();
    let a = stats.pop().unwrap();
    println!("A = sa-neat, B = neat");
    println!("{}", Comparison::new(b, a));
    Ok(())
}
