//! Fitness computed by a separate process speaking the line protocol: the
//! genome text, a blank line, then `fitness <x>` back.
//!
//! The evaluator here is a small awk script that rewards enabled weights
//! close to 0.5. Any program that follows the protocol can take its place,
//! e.g. `saneat run --env "external:python3 my_eval.py"`.

use std::time::Duration;

use saneat::env::ExternalEnv;
use saneat::evolve::{run_neat, SaNeatConfig};
use saneat::neat::NetworkShape;

// awk reads its input in blocks, so each genome gets its own awk.
const SCRIPT: &str = r#"
g=
while IFS= read -r line; do
    if [ -z "$line" ]; then
        printf '%s\n' "$g" | awk '$1 == "conn" && $6 == 1 { s -= ($5 - 0.5) ^ 2 } END { printf "fitness %.17g\n", s }'
        g=
    else
        g="$g
$line"
    fi
done
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let env = ExternalEnv::shell(SCRIPT, NetworkShape::new(3, 1), Duration::from_secs(10))?;
    let cfg = SaNeatConfig {
        population_size: 50,
        max_evaluations: 1500,
        solve_threshold: Some(-0.01),
        ..SaNeatConfig::default()
    };
    let log = run_neat(&cfg, &env, 3).map_err(|f| f.error)?;
    println!(
        "{} evaluations, best {:.4}, solved at {:?}",
        log.evaluations(),
        log.best_fitness().unwrap_or(f64::NAN),
        log.solved_at
    );
    if let Some(g) = &log.best_genome {
        print!("{}", g.to_text());
    }
    Ok(())
}
