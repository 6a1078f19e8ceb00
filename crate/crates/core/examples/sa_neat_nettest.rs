//! SA-NEAT driven one cycle at a time on the analytic regression task,
//! printing how true evaluations are spent and what the surrogate looks like.

use saneat::env::NetTest;
use saneat::evolve::{Phase, SaNeat, SaNeatConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let env = NetTest::default();
    let cfg = SaNeatConfig {
        max_evaluations: 600,
        ..SaNeatConfig::default()
    };
    let mut s = SaNeat::initialize(&cfg, &env, 7).map_err(|f| f.error)?;
    let mut cycle = 0;
    while !s.done() {
        let stagnating_before = s.stagnating();
        s.cycle()?;
        cycle += 1;
        if cycle % 10 == 0 || stagnating_before {
            let h = s.model().map(|m| *m.hyper());
            println!(
                "cycle {cycle:3}  evals {:4}  best {:8.4}  training {:3}  species {:2}  {}",
                s.evaluations(),
                s.log().best_fitness().unwrap_or(f64::NAN),
                s.training().len(),
                s.species().len(),
                h.map_or(String::new(), |h| format!(
                    "l {:.3} eta {:.3} mu {:.3} noise {:.3}",
                    h.length_scale, h.signal_variance, h.mean, h.noise
                ))
            );
        }
    }
    let log = s.into_log();
    println!(
        "evaluations: {} init, {} infill, {} resolve; {} model rebuilds",
        log.count(Phase::Init),
        log.count(Phase::Infill),
        log.count(Phase::Resolve),
        log.model_fits.len()
    );
    Ok(())
}
