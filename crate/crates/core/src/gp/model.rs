use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::cholesky::{dot, Cholesky, JITTER_LADDER};
use super::{kernel_from_distance, GpHyper, Prediction};
use crate::cmaes::{self, CmaesOptions};
use crate::error::GpError;
use crate::neat::{compatibility_distance, CompatCoefficients, Genome};

pub fn kernel(a: &Genome, b: &Genome, h: &GpHyper, coeffs: &CompatCoefficients) -> f64 {
    kernel_from_distance(compatibility_distance(a, b, *coeffs), h)
}

/// `K[i][j] = kernel(x_i, x_j)`, filled from the upper triangle.
pub fn build_kernel_matrix(genomes: &[Genome], h: &GpHyper, coeffs: &CompatCoefficients) -> DMatrix<f64> {
    let n = genomes.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel(&genomes[i], &genomes[j], h, coeffs);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Symmetric matrix of pairwise compatibility distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn compute(genomes: &[Genome], coeffs: &CompatCoefficients) -> Self {
        let n = genomes.len();
        let mut m = DistanceMatrix { n, d: vec![0.0; n * n] };
        for i in 0..n {
            for j in 0..i {
                m.set(i, j, compatibility_distance(&genomes[i], &genomes[j], *coeffs));
            }
        }
        m
    }

    pub fn zeros(n: usize) -> Self {
        DistanceMatrix { n, d: vec![0.0; n * n] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.d[i * self.n + j] = v;
        self.d[j * self.n + i] = v;
    }

    /// Grows to `n` points; new entries are zero.
    pub fn resize(&mut self, n: usize) {
        let mut d = vec![0.0; n * n];
        let keep = self.n.min(n);
        for i in 0..keep {
            d[i * n..i * n + keep].copy_from_slice(&self.d[i * self.n..i * self.n + keep]);
        }
        self.n = n;
        self.d = d;
    }

    /// Copy restricted to the first `n` points.
    pub fn truncated(&self, n: usize) -> Self {
        let mut m = self.clone();
        m.resize(n);
        m
    }

    /// Mean of `δ²` over distinct pairs; 0 with fewer than two points.
    pub fn mean_square(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                s += self.get(i, j).powi(2);
            }
        }
        s / (self.n * (self.n - 1) / 2) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GpFitConfig {
    /// CMA-ES evaluation budget.
    pub budget: usize,
    /// Initial CMA-ES step in the (mostly logarithmic) search coordinates.
    pub sigma0: f64,
    pub length_scale_bounds: (f64, f64),
    /// Relative to the variance of the observed fitnesses.
    pub signal_variance_bounds: (f64, f64),
    /// Relative to the standard deviation of the observed fitnesses.
    pub noise_bounds: (f64, f64),
    pub seed: u64,
}

impl Default for GpFitConfig {
    fn default() -> Self {
        GpFitConfig {
            budget: 2000,
            sigma0: 0.5,
            length_scale_bounds: (1e-3, 1e3),
            signal_variance_bounds: (1e-4, 1e4),
            noise_bounds: (1e-6, 1e1),
            seed: 0,
        }
    }
}

/// Summary statistics of the fitness values that set the search scales.
#[derive(Clone, Copy, Debug)]
struct Scales {
    mean: f64,
    min: f64,
    max: f64,
    /// Variance, or 1 if the values are constant.
    var: f64,
    std: f64,
}

impl Scales {
    fn of(f: &[f64]) -> Scales {
        let n = f.len() as f64;
        let mean = f.iter().sum::<f64>() / n;
        let var = f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let (min, max) = f
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let var = if var > 0.0 { var } else { 1.0 };
        Scales {
            mean,
            min,
            max,
            var,
            std: var.sqrt(),
        }
    }

    fn to_coords(self, h: &GpHyper) -> [f64; 4] {
        [
            h.length_scale.ln(),
            (h.signal_variance / self.var).ln(),
            (h.mean - self.mean) / self.std,
            (h.noise / self.std).max(1e-300).ln(),
        ]
    }

    fn from_coords(self, x: &[f64]) -> GpHyper {
        GpHyper {
            length_scale: x[0].exp(),
            signal_variance: x[1].exp() * self.var,
            mean: self.mean + x[2] * self.std,
            noise: x[3].exp() * self.std,
        }
    }
}

/// Reusable buffers for repeated likelihood evaluations on one data set.
struct LikelihoodWork<'a> {
    dist: &'a DistanceMatrix,
    f: &'a [f64],
    a: Vec<f64>,
    l: Vec<f64>,
    z: Vec<f64>,
    jitter: f64,
}

impl<'a> LikelihoodWork<'a> {
    fn new(dist: &'a DistanceMatrix, f: &'a [f64]) -> Self {
        let n = f.len();
        LikelihoodWork {
            dist,
            f,
            a: vec![0.0; n * n],
            l: Vec::with_capacity(n * n),
            z: vec![0.0; n],
            jitter: 0.0,
        }
    }

    /// Fills `K + σ_n²I` (lower triangle) and factors it with escalating jitter.
    /// Leaves the factor in `self.l` and returns the jitter used.
    fn factor(&mut self, h: &GpHyper) -> Result<f64, GpError> {
        let n = self.f.len();
        let inv = -1.0 / (2.0 * h.length_scale);
        for i in 0..n {
            let row = &mut self.a[i * n..i * n + i + 1];
            for (j, v) in row[..i].iter_mut().enumerate() {
                let d = self.dist.get(i, j);
                *v = h.signal_variance * (d * d * inv).exp();
            }
            row[i] = h.signal_variance + h.noise * h.noise;
        }
        let mut last = 0.0;
        for rel in JITTER_LADDER {
            last = rel * h.signal_variance;
            if Cholesky::factor_into(&self.a, n, last, &mut self.l) {
                self.jitter = last;
                return Ok(last);
            }
        }
        Err(GpError::Degenerate(last))
    }

    fn log_likelihood(&mut self, h: &GpHyper) -> Result<f64, GpError> {
        self.factor(h)?;
        let n = self.f.len();
        for (z, f) in self.z.iter_mut().zip(self.f) {
            *z = f - h.mean;
        }
        let mut log_det = 0.0;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let d = self.l[i * n + i];
            self.z[i] = (self.z[i] - dot(row, &self.z[..i])) / d;
            log_det += d.ln();
        }
        let quad = dot(&self.z, &self.z);
        Ok(-0.5 * quad - log_det - 0.5 * n as f64 * (2.0 * PI).ln())
    }
}

fn check_data(genomes: usize, f: &[f64]) -> Result<(), GpError> {
    if f.is_empty() {
        return Err(GpError::Empty);
    }
    if genomes != f.len() {
        return Err(GpError::LengthMismatch {
            genomes,
            fitnesses: f.len(),
        });
    }
    if let Some(i) = f.iter().position(|v| !v.is_finite()) {
        return Err(GpError::NonFinite(i));
    }
    Ok(())
}

/// `log p(f | X, h)` with the prior mean subtracted, via Cholesky.
pub fn log_marginal_likelihood(
    genomes: &[Genome],
    f: &[f64],
    h: &GpHyper,
    coeffs: &CompatCoefficients,
) -> Result<f64, GpError> {
    check_data(genomes.len(), f)?;
    let dist = DistanceMatrix::compute(genomes, coeffs);
    LikelihoodWork::new(&dist, f).log_likelihood(h)
}

/// A fitted Gaussian process, ready for prediction.
#[derive(Clone, Debug)]
pub struct GpModel {
    genomes: Vec<Genome>,
    hyper: GpHyper,
    coeffs: CompatCoefficients,
    chol: Cholesky,
    alpha: Vec<f64>,
    jitter: f64,
    log_likelihood: f64,
    fallback: bool,
}

impl GpModel {
    /// Builds a model with fixed hyperparameters.
    pub fn new(genomes: &[Genome], f: &[f64], hyper: GpHyper, coeffs: CompatCoefficients) -> Result<Self, GpError> {
        check_data(genomes.len(), f)?;
        let dist = DistanceMatrix::compute(genomes, &coeffs);
        Self::assemble(genomes, f, &dist, hyper, coeffs, false)
    }

    /// Hyperparameters used when fitting is impossible or fails: ℓ = mean
    /// pairwise δ², η = variance of `f`, μ = mean of `f`, σ_n = std of `f` / 100.
    pub fn default_hyper(f: &[f64], dist: &DistanceMatrix) -> GpHyper {
        let s = Scales::of(f);
        let ms = dist.mean_square();
        GpHyper {
            length_scale: if ms > 0.0 { ms } else { 1.0 },
            signal_variance: s.var,
            mean: s.mean,
            noise: 1e-2 * s.std,
        }
    }

    /// The kernel is not positive semi-definite for every distance matrix, so
    /// `h` may not factor. Raises the noise up to `max_noise`, then shrinks ℓ
    /// (which drives `K` towards `ηI`) until it does.
    fn factorable(f: &[f64], dist: &DistanceMatrix, mut h: GpHyper, max_noise: f64) -> GpHyper {
        let mut work = LikelihoodWork::new(dist, f);
        let floor = 1e-3 * h.signal_variance.sqrt();
        for _ in 0..80 {
            if work.factor(&h).is_ok() {
                break;
            }
            if h.noise < max_noise {
                h.noise = (2.0 * h.noise).max(floor).min(max_noise);
            } else {
                h.length_scale *= 0.5;
            }
        }
        h
    }

    /// Fits hyperparameters by maximum likelihood and builds the model.
    ///
    /// The search starts from `start` if given, else from the defaults, after
    /// moving it to the nearest factorable point. The defaults are always
    /// evaluated too so the result is never worse than them.
    pub fn fit(
        genomes: &[Genome],
        f: &[f64],
        coeffs: CompatCoefficients,
        cfg: &GpFitConfig,
        start: Option<&GpHyper>,
    ) -> Result<Self, GpError> {
        check_data(genomes.len(), f)?;
        let dist = DistanceMatrix::compute(genomes, &coeffs);
        Self::fit_with_distances(genomes, f, &dist, coeffs, cfg, start)
    }

    /// As [`GpModel::fit`] with a precomputed distance matrix in the same order as `genomes`.
    pub fn fit_with_distances(
        genomes: &[Genome],
        f: &[f64],
        dist: &DistanceMatrix,
        coeffs: CompatCoefficients,
        cfg: &GpFitConfig,
        start: Option<&GpHyper>,
    ) -> Result<Self, GpError> {
        check_data(genomes.len(), f)?;
        assert_eq!(dist.len(), genomes.len(), "distance matrix size");
        let defaults = Self::default_hyper(f, dist);
        if f.len() < 2 || cfg.budget == 0 {
            let h = start.copied().unwrap_or(defaults);
            let max_noise = cfg.noise_bounds.1 * Scales::of(f).std;
            return Self::assemble(genomes, f, dist, h, coeffs, false).or_else(|_| {
                Self::assemble(genomes, f, dist, Self::factorable(f, dist, h, max_noise), coeffs, true)
            });
        }

        let s = Scales::of(f);
        let range = s.max - s.min;
        let lower = vec![
            cfg.length_scale_bounds.0.ln(),
            cfg.signal_variance_bounds.0.ln(),
            (s.min - range - s.mean) / s.std,
            cfg.noise_bounds.0.ln(),
        ];
        let upper = vec![
            cfg.length_scale_bounds.1.ln(),
            cfg.signal_variance_bounds.1.ln(),
            (s.max + range - s.mean) / s.std,
            cfg.noise_bounds.1.ln(),
        ];
        let clamp = |x: [f64; 4]| -> Vec<f64> {
            (0..4).map(|i| x[i].clamp(lower[i], upper[i])).collect()
        };
        let max_noise = cfg.noise_bounds.1 * s.std;
        let x_default = clamp(s.to_coords(&defaults));
        let start = start.copied().unwrap_or(defaults);
        let x0 = clamp(s.to_coords(&Self::factorable(f, dist, start, max_noise)));

        let mut work = LikelihoodWork::new(dist, f);
        let mut objective = |x: &[f64]| work.log_likelihood(&s.from_coords(x)).unwrap_or(f64::NEG_INFINITY);
        let default_value = objective(&x_default);
        let opts = CmaesOptions::bounded(lower.clone(), upper.clone(), cfg.sigma0, cfg.budget, cfg.seed);
        let r = cmaes::maximize(&mut objective, &x0, &opts);

        let (best_x, best_value) = if default_value > r.best_value {
            (x_default, default_value)
        } else {
            (r.best_x, r.best_value)
        };
        if best_value == f64::NEG_INFINITY {
            let h = Self::factorable(f, dist, defaults, max_noise);
            return Self::assemble(genomes, f, dist, h, coeffs, true);
        }
        Self::assemble(genomes, f, dist, s.from_coords(&best_x), coeffs, false)
    }

    fn assemble(
        genomes: &[Genome],
        f: &[f64],
        dist: &DistanceMatrix,
        hyper: GpHyper,
        coeffs: CompatCoefficients,
        fallback: bool,
    ) -> Result<Self, GpError> {
        let mut work = LikelihoodWork::new(dist, f);
        let log_likelihood = work.log_likelihood(&hyper)?;
        let jitter = work.jitter;
        let n = f.len();
        let chol = Cholesky::from_raw(n, std::mem::take(&mut work.l));
        let y: Vec<f64> = f.iter().map(|v| v - hyper.mean).collect();
        let alpha = chol.solve(&y);
        Ok(GpModel {
            genomes: genomes.to_vec(),
            hyper,
            coeffs,
            chol,
            alpha,
            jitter,
            log_likelihood,
            fallback,
        })
    }

    pub fn hyper(&self) -> &GpHyper {
        &self.hyper
    }

    pub fn len(&self) -> usize {
        self.genomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genomes.is_empty()
    }

    pub fn genomes(&self) -> &[Genome] {
        &self.genomes
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    /// Jitter added to the diagonal for the cached factor.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// True if no candidate hyperparameters could be factored and the defaults were used.
    pub fn used_fallback(&self) -> bool {
        self.fallback
    }

    pub fn predict(&self, g: &Genome) -> Prediction {
        let deltas: Vec<f64> = self
            .genomes
            .iter()
            .map(|x| compatibility_distance(g, x, self.coeffs))
            .collect();
        self.predict_from_distances(&deltas)
    }

    /// Prediction given the distances from the query to each training genome.
    pub fn predict_from_distances(&self, deltas: &[f64]) -> Prediction {
        let mut k: Vec<f64> = deltas.iter().map(|&d| kernel_from_distance(d, &self.hyper)).collect();
        let mean = self.hyper.mean + dot(&k, &self.alpha);
        self.chol.solve_lower_in_place(&mut k);
        let variance = (self.hyper.signal_variance - dot(&k, &k)).max(0.0);
        Prediction { mean, variance }
    }
}
