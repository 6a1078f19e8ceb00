//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.
//!
//! Set `ACCEPTANCE_SKIP=1,8` to skip criteria while iterating; skipped
//! criteria are reported as such and do not count as passes.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use saneat::cmaes::{maximize, CmaesOptions};
use saneat::env::{cartpole_swingup_evaluate, CartPoleParams, Environment, NetTest, SwingUpPlanner};
use saneat::error::EnvError;
use saneat::experiment::{run_experiment, Algorithm, EnvSpec, ExperimentConfig, SolveStats};
use saneat::gp::{build_kernel_matrix, factor_with_jitter, kernel, DistanceMatrix, GpFitConfig, GpHyper, GpModel};
use saneat::neat::{compatibility_distance, CompatCoefficients, Genome, NetworkShape, NodeId, NodeKind};
use saneat::network::Phenotype;
use saneat::evolve::{Phase, SaNeat, SaNeatConfig};

type Check = Result<String, String>;

const C: CompatCoefficients = CompatCoefficients { c1: 1.0, c2: 1.0 };

fn within(limit: Duration, t: Instant) -> Result<(), String> {
    let e = t.elapsed();
    if e <= limit {
        Ok(())
    } else {
        Err(format!("took {e:.1?}, limit {limit:?}"))
    }
}

/// Cart-pole data efficiency: SA-NEAT median evaluations-to-solve at most half
/// of NEAT's over 10 replicates, both medians solved within 20000.
fn data_efficiency() -> Check {
    let t = Instant::now();
    let mut stats = Vec::new();
    for algo in [Algorithm::Neat, Algorithm::SaNeat] {
        let cfg = ExperimentConfig {
            algorithm: algo,
            env: EnvSpec::CartPole,
            replicates: 10,
            seed: 1,
            ..ExperimentConfig::default()
        };
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = run_experiment(&cfg, dir.path(), 1).map_err(|e| e.to_string())?;
        let s = out.stats.ok_or("no completed replicates")?;
        stats.push((algo, s, out.solves.iter().map(|r| r.evals_to_solve).collect::<Vec<_>>()));
    }
    let describe = |(a, s, v): &(Algorithm, SolveStats, Vec<usize>)| {
        format!(
            "{a} median {}{} solved {}/{} {:?}",
            s.median,
            if s.median_censored { " (censored)" } else { "" },
            s.solved,
            s.completed,
            v
        )
    };
    let msg = format!("{}; {}; {:.0?}", describe(&stats[0]), describe(&stats[1]), t.elapsed());
    let (neat, sa) = (&stats[0].1, &stats[1].1);
    if neat.median_censored || sa.median_censored {
        return Err(format!("censored median: {msg}"));
    }
    if 2 * sa.median > neat.median {
        return Err(format!("speedup {:.2} below 2: {msg}", neat.median as f64 / sa.median as f64));
    }
    within(Duration::from_secs(3600), t)?;
    Ok(format!("speedup {:.2}: {msg}", neat.median as f64 / sa.median as f64))
}

/// The scripted swing-up controller solves the task.
fn solvability() -> Check {
    let t = Instant::now();
    let p = CartPoleParams::default();
    let f = cartpole_swingup_evaluate(&mut SwingUpPlanner::new(p, 4), &p).map_err(|e| e.to_string())?;
    within(Duration::from_secs(1), t)?;
    if f == 100.0 {
        Ok(format!("fitness {f} in {:.1?}", t.elapsed()))
    } else {
        Err(format!("fitness {f}"))
    }
}

fn random_f(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..100.0)).collect()
}

/// GP interpolation, dense-oracle agreement and factorization robustness.
fn gp_suite() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // (a) interpolation with sigma_n = 1e-8
    let mut worst_a = 0.0f64;
    for set in 0..50 {
        let n = rng.random_range(2..=20);
        let g = common::distinct_family(set, NetworkShape::new(3, 1), n, 6);
        let f = random_f(n, &mut rng);
        let range = f.iter().cloned().fold(f64::MIN, f64::max) - f.iter().cloned().fold(f64::MAX, f64::min);
        let l = common::dominant_length_scale(&g, 10.0);
        let h = GpHyper { length_scale: l, signal_variance: 1000.0, mean: 50.0, noise: 1e-8 };
        let m = GpModel::new(&g, &f, h, C).map_err(|e| format!("(a) set {set}: {e}"))?;
        for (x, fx) in g.iter().zip(&f) {
            worst_a = worst_a.max((m.predict(x).mean - fx).abs() / range);
        }
    }
    if worst_a >= 1e-4 {
        return Err(format!("(a) interpolation error {worst_a:e} of range"));
    }

    // (b) dense oracle on 5-point sets
    let mut worst_b = 0.0f64;
    for set in 0..50 {
        let g = common::distinct_family(100 + set, NetworkShape::new(3, 1), 8, 5);
        let (train, queries) = g.split_at(5);
        let f = random_f(5, &mut rng);
        let l = common::dominant_length_scale(train, 2.0);
        let h = GpHyper { length_scale: l, signal_variance: 300.0, mean: 40.0, noise: 3.0 };
        let Ok(m) = GpModel::new(train, &f, h, C) else {
            return Err(format!("(b) set {set}: factorization failed"));
        };
        let k = DMatrix::from_fn(5, 5, |i, j| kernel(&train[i], &train[j], &h, &C) + if i == j { 9.0 } else { 0.0 });
        let inv = k.try_inverse().ok_or("(b) singular oracle matrix")?;
        let y = DVector::from_fn(5, |i, _| f[i] - h.mean);
        for x in train.iter().chain(queries) {
            let ks = DVector::from_fn(5, |i, _| kernel(x, &train[i], &h, &C));
            let mean = h.mean + (ks.transpose() * &inv * &y)[(0, 0)];
            let var = (h.signal_variance - (ks.transpose() * &inv * &ks)[(0, 0)]).max(0.0);
            let p = m.predict(x);
            worst_b = worst_b.max((p.mean - mean).abs()).max((p.variance - var).abs());
        }
    }
    if worst_b >= 1e-8 {
        return Err(format!("(b) dense oracle mismatch {worst_b:e}"));
    }

    // (c) the matrices the GP factors (library hyperparameters for the set)
    // need at most 1e-4 relative jitter. Raw K at the default length scale
    // is counted separately: the kernel is not positive definite in general.
    let (mut worst_c, mut raw_indefinite) = (0.0f64, 0);
    for set in 0..1000 {
        let n = rng.random_range(2..=20);
        let g = common::family(5000 + set, NetworkShape::new(3, 1), n, 6);
        let f = random_f(n, &mut rng);
        let dist = DistanceMatrix::compute(&g, &C);
        let cfg = GpFitConfig { budget: 0, ..GpFitConfig::default() };
        let m = GpModel::fit_with_distances(&g, &f, &dist, C, &cfg, None).map_err(|e| format!("(c) set {set}: {e}"))?;
        worst_c = worst_c.max(m.jitter() / m.hyper().signal_variance);
        let h = GpModel::default_hyper(&f, &dist);
        let mut a: Vec<f64> = build_kernel_matrix(&g, &h, &C).iter().cloned().collect();
        for i in 0..n {
            a[i * n + i] += h.noise * h.noise;
        }
        if factor_with_jitter(&a, n, h.signal_variance).is_err() {
            raw_indefinite += 1;
        }
    }
    if worst_c > 1e-4 {
        return Err(format!("(c) jitter {worst_c:e} of eta"));
    }
    within(Duration::from_secs(60), t)?;
    Ok(format!(
        "(a) max err {worst_a:.1e}·range (b) max diff {worst_b:.1e} (c) max jitter {worst_c:.0e}·eta; \
         raw default-hyperparameter K not factorable on {raw_indefinite}/1000 sets; {:.1?}",
        t.elapsed()
    ))
}

fn set_oracle(a: &Genome, b: &Genome, c: CompatCoefficients) -> f64 {
    let wa: BTreeMap<u64, f64> = a.connections().iter().map(|g| (g.innovation, g.weight)).collect();
    let wb: BTreeMap<u64, f64> = b.connections().iter().map(|g| (g.innovation, g.weight)).collect();
    let ka: BTreeSet<u64> = wa.keys().copied().collect();
    let kb: BTreeSet<u64> = wb.keys().copied().collect();
    let shared: Vec<u64> = ka.intersection(&kb).copied().collect();
    let mut sum = 0.0;
    for i in &shared {
        sum += (wa[i] - wb[i]).abs();
    }
    let mean = if shared.is_empty() { 0.0 } else { sum / shared.len() as f64 };
    c.c1 * ka.symmetric_difference(&kb).count() as f64 + c.c2 * mean
}

/// Distance against the set-alignment oracle on 10000 pairs.
fn distance_suite() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pairs = 0;
    let mut family = 0;
    while pairs < 10_000 {
        let g = common::family(family, NetworkShape::new(3, 2), 20, 8);
        family += 1;
        for _ in 0..100 {
            let (a, b) = (&g[rng.random_range(0..20)], &g[rng.random_range(0..20)]);
            let c = CompatCoefficients { c1: rng.random_range(0.0..3.0), c2: rng.random_range(0.0..3.0) };
            let d = compatibility_distance(a, b, c);
            if d != set_oracle(a, b, c) {
                return Err(format!("pair {pairs}: {d} vs oracle {}", set_oracle(a, b, c)));
            }
            if d != compatibility_distance(b, a, c) || compatibility_distance(a, a, c) != 0.0 {
                return Err(format!("pair {pairs}: symmetry or self-distance"));
            }
            pairs += 1;
        }
    }
    within(Duration::from_secs(10), t)?;
    Ok(format!("{pairs} pairs exact; {:.1?}", t.elapsed()))
}

/// CMA-ES on sphere and Rosenbrock, and seeded determinism.
fn cmaes_suite() -> Check {
    let t = Instant::now();
    let sphere = |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>();
    let rosen = |x: &[f64]| -(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
    let s = maximize(sphere, &[1.0, -1.0, 2.0, 0.5], &CmaesOptions::unbounded(4, 0.5, 4000, 1));
    if !(-s.best_value < 1e-10 && s.evaluations <= 4000) {
        return Err(format!("sphere {:e} after {}", -s.best_value, s.evaluations));
    }
    let r = maximize(rosen, &[-1.2, 1.0], &CmaesOptions::unbounded(2, 0.5, 20000, 1));
    if !(-r.best_value < 1e-6 && r.evaluations <= 20000) {
        return Err(format!("rosenbrock {:e} after {}", -r.best_value, r.evaluations));
    }
    let again = maximize(rosen, &[-1.2, 1.0], &CmaesOptions::unbounded(2, 0.5, 20000, 1));
    if again.history != r.history || again.best_x != r.best_x {
        return Err("same seed gave a different run".into());
    }
    within(Duration::from_secs(5), t)?;
    Ok(format!(
        "sphere {:.1e} in {} evals, rosenbrock {:.1e} in {} evals, deterministic; {:.1?}",
        -s.best_value,
        s.evaluations,
        -r.best_value,
        r.evaluations,
        t.elapsed()
    ))
}

struct Counting {
    inner: NetTest,
    calls: AtomicUsize,
}

impl Environment for Counting {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn shape(&self) -> NetworkShape {
        self.inner.shape()
    }

    fn evaluate(&self, g: &Genome) -> Result<f64, EnvError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(g)
    }
}

/// SA-NEAT bookkeeping on the analytic task with budget 600.
fn loop_accounting() -> Check {
    let t = Instant::now();
    let env = Counting { inner: NetTest::default(), calls: AtomicUsize::new(0) };
    let cfg = SaNeatConfig { max_evaluations: 600, ..SaNeatConfig::default() };
    let mut s = SaNeat::initialize(&cfg, &env, 1).map_err(|f| f.error.to_string())?;
    let (mut infills, mut resolves, mut max_training) = (0, 0, s.training().len());
    while !s.done() {
        for _ in 0..cfg.gens_per_infill {
            s.surrogate_generation();
        }
        let before = s.evaluations();
        s.infill().map_err(|e| e.to_string())?;
        infills += 1;
        let used = s.evaluations() - before;
        if used != cfg.inds_per_infill && !s.done() {
            return Err(format!("infill used {used} evaluations"));
        }
        max_training = max_training.max(s.training().len());
        if s.done() {
            break;
        }
        s.population_update();
        if s.stagnating() {
            s.resolve().map_err(|e| e.to_string())?;
            resolves += 1;
            max_training = max_training.max(s.training().len());
        }
    }
    let log = s.into_log();
    let calls = env.calls.load(Ordering::Relaxed);
    if log.records.len() != calls {
        return Err(format!("{} records for {calls} evaluations", log.records.len()));
    }
    if max_training > 512 {
        return Err(format!("training set reached {max_training}"));
    }
    log.check()?;
    within(Duration::from_secs(10), t)?;
    Ok(format!(
        "{calls} evaluations = records ({} init, {} infill, {} resolve), {infills} infills, {resolves} resolves, \
         training <= {max_training}; {:.1?}",
        log.count(Phase::Init),
        log.count(Phase::Infill),
        log.count(Phase::Resolve),
        t.elapsed()
    ))
}

fn recursive_value(g: &Genome, node: NodeId, x: &[f64]) -> f64 {
    match g.node(node).unwrap().kind {
        NodeKind::Input => x[node as usize],
        NodeKind::Bias => 1.0,
        _ => {
            let mut sum = 0.0;
            for c in g.connections().iter().filter(|c| c.enabled && c.target == node) {
                sum += c.weight * recursive_value(g, c.source, x);
            }
            sum.tanh()
        }
    }
}

/// Network activation against a recursive evaluator.
fn network_oracle() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shape = NetworkShape::new(4, 2);
    let genomes: Vec<Genome> = (0..10).flat_map(|s| common::family(s, shape, 10, 10)).collect();
    let mut worst = 0.0f64;
    for g in &genomes {
        let net = Phenotype::build(g).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y = net.activate(&x).map_err(|e| e.to_string())?;
            for (o, v) in y.iter().enumerate() {
                worst = worst.max((v - recursive_value(g, shape.output_id(o), &x)).abs());
            }
        }
    }
    if worst > 1e-12 {
        return Err(format!("max difference {worst:e}"));
    }
    within(Duration::from_secs(5), t)?;
    Ok(format!("{} genomes x 100 inputs, max difference {worst:e}; {:.1?}", genomes.len(), t.elapsed()))
}

fn dir_contents(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        let name = e.file_name().to_string_lossy().into_owned();
        out.insert(name, fs::read(e.path()).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// Two CLI runs with the same config and seed write identical directories.
fn determinism() -> Check {
    let t = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("exp.conf");
    fs::write(
        &config,
        "algo = sa-neat\nenv = nettest\nreplicates = 3\nbudget = 400\npopulation_size = 64\ngp.budget = 200\n",
    )
    .map_err(|e| e.to_string())?;
    let mut dirs = Vec::new();
    for (name, jobs) in [("a", "1"), ("b", "3")] {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_saneat"))
            .args(["run", "--config"])
            .arg(&config)
            .args(["--seed", "17", "--jobs", jobs, "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("run failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        dirs.push(dir_contents(&out)?);
    }
    if dirs[0] != dirs[1] {
        return Err("artifact directories differ".into());
    }
    Ok(format!("{} files identical; {:.1?}", dirs[0].len(), t.elapsed()))
}

fn main() -> ExitCode {
    let skip: Vec<usize> = std::env::var("ACCEPTANCE_SKIP")
        .unwrap_or_default()
        .split(',')
        .filter_map(|s| s.trim().parse().ok())
        .collect();
    let checks: [(usize, &str, fn() -> Check); 8] = [
        (1, "cart-pole data efficiency", data_efficiency),
        (2, "swing-up oracle", solvability),
        (3, "GP suite", gp_suite),
        (4, "distance oracle", distance_suite),
        (5, "CMA-ES suite", cmaes_suite),
        (6, "loop accounting", loop_accounting),
        (7, "network oracle", network_oracle),
        (8, "artifact determinism", determinism),
    ];
    let mut failed = 0;
    for (n, name, check) in checks {
        if skip.contains(&n) {
            println!("criterion {n} ({name}): SKIPPED");
            continue;
        }
        match check() {
            Ok(msg) => println!("criterion {n} ({name}): PASS: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
