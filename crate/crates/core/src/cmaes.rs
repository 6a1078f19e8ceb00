//! (μ/μ_w, λ)-CMA-ES for box-bounded maximization.
//!
//! Candidates that leave the box are clamped coordinate-wise and the clamped
//! point is what enters the update, so every evaluated point is feasible.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Debug)]
pub struct CmaesOptions {
    pub sigma0: f64,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Stop once `σ · λ_max(C)` drops below this.
    pub tol: f64,
    /// Offspring per generation; `None` uses `4 + ⌊3 ln n⌋`.
    pub lambda: Option<usize>,
    pub seed: u64,
}

impl CmaesOptions {
    /// Unbounded problem of dimension `n`.
    pub fn unbounded(n: usize, sigma0: f64, budget: usize, seed: u64) -> Self {
        CmaesOptions {
            sigma0,
            budget,
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            tol: 1e-12,
            lambda: None,
            seed,
        }
    }

    pub fn bounded(lower: Vec<f64>, upper: Vec<f64>, sigma0: f64, budget: usize, seed: u64) -> Self {
        assert_eq!(lower.len(), upper.len());
        CmaesOptions {
            sigma0,
            budget,
            lower,
            upper,
            tol: 1e-12,
            lambda: None,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CmaesResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    pub generations: usize,
    /// Best value seen after each generation.
    pub history: Vec<f64>,
}

/// Default population size for dimension `n`.
pub fn default_lambda(n: usize) -> usize {
    4 + (3.0 * (n as f64).ln()).floor() as usize
}

/// Maximizes `objective` starting from `x0`. Non-finite objective values rank worst.
pub fn maximize<F>(mut objective: F, x0: &[f64], opts: &CmaesOptions) -> CmaesResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n >= 1, "dimension must be positive");
    assert_eq!(opts.lower.len(), n);
    assert_eq!(opts.upper.len(), n);
    let clamp = |x: &mut DVector<f64>| {
        for i in 0..n {
            x[i] = x[i].clamp(opts.lower[i], opts.upper[i]);
        }
    };
    let score = |v: f64| if v.is_finite() { v } else { f64::NEG_INFINITY };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let nf = n as f64;
    let lambda = opts.lambda.unwrap_or_else(|| default_lambda(n)).max(2);
    let mu = lambda / 2;
    let raw: Vec<f64> = (0..mu)
        .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - ((i + 1) as f64).ln())
        .collect();
    let wsum: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / wsum).collect();
    let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

    let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
    let c_s = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
    let c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
    let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
    let d_s = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_s;
    let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));

    let mut mean = DVector::from_column_slice(x0);
    clamp(&mut mean);
    let mut sigma = opts.sigma0;
    let mut cov = DMatrix::<f64>::identity(n, n);
    let mut b = DMatrix::<f64>::identity(n, n);
    let mut d = DVector::<f64>::from_element(n, 1.0);
    let mut p_s = DVector::<f64>::zeros(n);
    let mut p_c = DVector::<f64>::zeros(n);

    let mut best_x: Vec<f64> = mean.iter().copied().collect();
    let mut best_value = score(objective(&best_x));
    let mut evaluations = 1;
    let mut generations = 0;
    let mut history = Vec::new();

    while evaluations < opts.budget {
        if sigma * d.max().powi(2) < opts.tol {
            break;
        }
        let mut pop: Vec<(f64, DVector<f64>)> = Vec::with_capacity(lambda);
        for _ in 0..lambda {
            if evaluations >= opts.budget {
                break;
            }
            let z = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let mut x = &mean + (&b * d.component_mul(&z)) * sigma;
            clamp(&mut x);
            let v = score(objective(x.as_slice()));
            evaluations += 1;
            if v > best_value {
                best_value = v;
                best_x = x.iter().copied().collect();
            }
            pop.push((v, x));
        }
        if pop.len() < mu {
            history.push(best_value);
            break;
        }
        // Stable sort: ties keep sampling order.
        pop.sort_by(|a, b| b.0.total_cmp(&a.0));

        let old_mean = mean.clone();
        mean = DVector::zeros(n);
        for (w, (_, x)) in weights.iter().zip(&pop) {
            mean += x * *w;
        }
        let y_w = (&mean - &old_mean) / sigma;

        // C^{-1/2} y_w
        let inv_sqrt = &b * DMatrix::from_diagonal(&d.map(|v| 1.0 / v)) * b.transpose();
        p_s = &p_s * (1.0 - c_s) + (&inv_sqrt * &y_w) * (c_s * (2.0 - c_s) * mu_eff).sqrt();
        let gen1 = (generations + 1) as f64;
        let ps_norm = p_s.norm();
        let h_s = ps_norm / (1.0 - (1.0 - c_s).powf(2.0 * gen1)).sqrt() / chi_n < 1.4 + 2.0 / (nf + 1.0);
        let h = if h_s { 1.0 } else { 0.0 };
        p_c = &p_c * (1.0 - c_c) + &y_w * (h * (c_c * (2.0 - c_c) * mu_eff).sqrt());

        let mut rank_mu = DMatrix::<f64>::zeros(n, n);
        for (w, (_, x)) in weights.iter().zip(&pop) {
            let y = (x - &old_mean) / sigma;
            rank_mu += &y * y.transpose() * *w;
        }
        let delta_h = (1.0 - h) * c_c * (2.0 - c_c);
        cov = &cov * (1.0 - c_1 - c_mu + c_1 * delta_h) + (&p_c * p_c.transpose()) * c_1 + rank_mu * c_mu;
        cov = (&cov + cov.transpose()) * 0.5;

        sigma *= ((c_s / d_s) * (ps_norm / chi_n - 1.0)).exp();
        generations += 1;
        history.push(best_value);

        let eig = SymmetricEigen::new(cov.clone());
        let floor = 1e-300;
        b = eig.eigenvectors;
        d = eig.eigenvalues.map(|v| v.max(floor).sqrt());
        if !sigma.is_finite() || d.iter().any(|v| !v.is_finite()) {
            break;
        }
    }

    CmaesResult {
        best_x,
        best_value,
        evaluations,
        generations,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        -x.iter().map(|v| v * v).sum::<f64>()
    }

    #[test]
    fn lambda_formula() {
        assert_eq!(default_lambda(1), 4);
        assert_eq!(default_lambda(2), 6);
        assert_eq!(default_lambda(4), 8);
        assert_eq!(default_lambda(10), 10);
    }

    #[test]
    fn sphere_converges() {
        let opts = CmaesOptions::unbounded(4, 0.5, 4000, 1);
        let r = maximize(sphere, &[1.0; 4], &opts);
        assert!(r.best_value > -1e-10, "{}", r.best_value);
        assert!(r.evaluations <= 4000);
    }

    #[test]
    fn respects_budget_and_bounds() {
        let opts = CmaesOptions::bounded(vec![0.5, -1.0], vec![2.0, 1.0], 1.0, 101, 3);
        let mut calls = 0;
        let r = maximize(
            |x| {
                calls += 1;
                assert!(x[0] >= 0.5 && x[0] <= 2.0 && x[1].abs() <= 1.0);
                sphere(x)
            },
            &[1.5, 0.5],
            &opts,
        );
        assert!(calls <= 101);
        assert_eq!(calls, r.evaluations);
        assert!((r.best_x[0] - 0.5).abs() < 1e-3);
        assert!((r.best_value + 0.25).abs() < 1e-3);
    }

    #[test]
    fn monotone_history_and_nan() {
        let opts = CmaesOptions::unbounded(3, 1.0, 600, 9);
        let r = maximize(
            |x| if x[0] > 0.5 { f64::NAN } else { sphere(x) },
            &[0.3, 1.0, -1.0],
            &opts,
        );
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.best_x[0] <= 0.5);
        assert!(r.best_value.is_finite());
    }

    #[test]
    fn zero_step_returns_start() {
        let opts = CmaesOptions::unbounded(2, 0.0, 100, 0);
        let r = maximize(sphere, &[0.0, 0.0], &opts);
        assert_eq!(r.best_value, 0.0);
        assert_eq!(r.best_x, vec![0.0, 0.0]);
    }
}
