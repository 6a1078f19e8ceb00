//! Fitness evaluation tasks.

pub mod cartpole;
pub mod external;
pub mod nettest;
pub mod torque;

use crate::error::EnvError;
use crate::neat::{Genome, NetworkShape};
use crate::network::Phenotype;

pub use cartpole::{
    cartpole_swingup_evaluate, longest_run, step_dynamics, CartPoleParams, CartPoleState,
    CartPoleSwingUp, SwingUpPlanner,
};
pub use external::{ExternalEnv, ExternalProcess};
pub use nettest::NetTest;
pub use torque::{integrate_torque, TorqueIntegrator};

/// Anything that maps observations to actions once per control step.
pub trait Controller {
    fn n_inputs(&self) -> usize;
    fn n_outputs(&self) -> usize;
    fn act(&mut self, inputs: &[f64], outputs: &mut [f64]) -> Result<(), EnvError>;
}

impl Controller for Phenotype {
    fn n_inputs(&self) -> usize {
        Phenotype::n_inputs(self)
    }

    fn n_outputs(&self) -> usize {
        Phenotype::n_outputs(self)
    }

    fn act(&mut self, inputs: &[f64], outputs: &mut [f64]) -> Result<(), EnvError> {
        let y = self.activate(inputs)?;
        outputs.copy_from_slice(&y);
        Ok(())
    }
}

/// A task that scores a genome. Evaluation must be deterministic for a given genome.
pub trait Environment: Send + Sync {
    fn name(&self) -> String;

    /// Input (excluding bias) and output counts the genomes must have.
    fn shape(&self) -> NetworkShape;

    fn evaluate(&self, genome: &Genome) -> Result<f64, EnvError>;

    /// Fitness at which the task counts as solved, if it has one.
    fn solve_threshold(&self) -> Option<f64> {
        None
    }

    /// `key = value` lines describing the task settings, echoed into run logs.
    fn describe(&self) -> Vec<(String, String)> {
        Vec::new()
    }
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn shape(&self) -> NetworkShape {
        (**self).shape()
    }
    fn evaluate(&self, genome: &Genome) -> Result<f64, EnvError> {
        (**self).evaluate(genome)
    }
    fn solve_threshold(&self) -> Option<f64> {
        (**self).solve_threshold()
    }
    fn describe(&self) -> Vec<(String, String)> {
        (**self).describe()
    }
}
