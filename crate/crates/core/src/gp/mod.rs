//! Gaussian-process regression over genomes.
//!
//! The covariance between two genomes is a squared-exponential in their
//! compatibility distance, `η · exp(-δ² / (2ℓ))`. Hyperparameters are fitted
//! by maximizing the log marginal likelihood with CMA-ES.

pub mod cholesky;
mod model;

pub use cholesky::{factor_with_jitter, Cholesky, JITTER_LADDER};
pub use model::{
    build_kernel_matrix, kernel, log_marginal_likelihood, DistanceMatrix, GpFitConfig, GpModel,
};

/// Kernel and likelihood hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpHyper {
    /// ℓ
    pub length_scale: f64,
    /// η, the prior variance at any single genome.
    pub signal_variance: f64,
    /// Constant prior mean, in fitness units.
    pub mean: f64,
    /// Observation noise standard deviation.
    pub noise: f64,
}

impl GpHyper {
    pub fn is_valid(&self) -> bool {
        self.length_scale > 0.0
            && self.signal_variance > 0.0
            && self.noise >= 0.0
            && self.length_scale.is_finite()
            && self.signal_variance.is_finite()
            && self.mean.is_finite()
            && self.noise.is_finite()
    }
}

/// Kernel value for a given compatibility distance.
#[inline]
pub fn kernel_from_distance(delta: f64, h: &GpHyper) -> f64 {
    h.signal_variance * (-(delta * delta) / (2.0 * h.length_scale)).exp()
}

/// Posterior at one genome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    /// Never negative.
    pub variance: f64,
}

impl Prediction {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Upper confidence bound `mean + κ·σ`.
pub fn ucb(p: &Prediction, kappa: f64) -> f64 {
    p.mean + kappa * p.variance.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        let h = GpHyper {
            length_scale: 1.0,
            signal_variance: 1.0,
            mean: 0.0,
            noise: 0.0,
        };
        assert_eq!(kernel_from_distance(0.0, &h), 1.0);
        assert!((kernel_from_distance(3.2, &h) - 5.976e-3).abs() < 1e-6);
        assert!((kernel_from_distance(3.2, &h) - (-5.12f64).exp()).abs() < 1e-15);
        let wide = GpHyper {
            length_scale: 1e12,
            signal_variance: 2.5,
            ..h
        };
        assert!((kernel_from_distance(40.0, &wide) - 2.5).abs() < 1e-8);
    }

    #[test]
    fn ucb_arithmetic() {
        let p = Prediction {
            mean: 2.0,
            variance: 4.0,
        };
        assert_eq!(ucb(&p, 1.0), 4.0);
        assert_eq!(ucb(&p, 0.0), 2.0);
        let flat = Prediction {
            mean: -3.0,
            variance: 0.0,
        };
        assert_eq!(ucb(&flat, 7.0), -3.0);
    }
}
