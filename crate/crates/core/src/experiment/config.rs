//! Flat `key = value` experiment configuration.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::env::{CartPoleSwingUp, Environment, ExternalEnv, NetTest};
use crate::error::{ConfigError, Error};
use crate::evolve::{InfillRanking, SaNeatConfig};
use crate::neat::{NetworkShape, VariationRates};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Neat,
    SaNeat,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Neat => "neat",
            Algorithm::SaNeat => "sa-neat",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "neat" => Ok(Algorithm::Neat),
            "sa-neat" => Ok(Algorithm::SaNeat),
            _ => Err(format!("unknown algorithm `{s}`")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which environment to evaluate on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnvSpec {
    CartPole,
    NetTest,
    /// Shell command speaking the line protocol.
    External(String),
}

impl FromStr for EnvSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cartpole" => Ok(EnvSpec::CartPole),
            "nettest" => Ok(EnvSpec::NetTest),
            _ => match s.strip_prefix("external:") {
                Some(cmd) if !cmd.trim().is_empty() => Ok(EnvSpec::External(cmd.to_string())),
                _ => Err(format!("unknown environment `{s}`")),
            },
        }
    }
}

impl fmt::Display for EnvSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSpec::CartPole => f.write_str("cartpole"),
            EnvSpec::NetTest => f.write_str("nettest"),
            EnvSpec::External(cmd) => write!(f, "external:{cmd}"),
        }
    }
}

/// Solve threshold setting. `Auto` takes the environment's own threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Auto,
    Off,
    Value(f64),
}

impl FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Threshold::Auto),
            "none" => Ok(Threshold::Off),
            _ => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Threshold::Value(v)),
                _ => Err(s.to_string()),
            },
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Auto => f.write_str("auto"),
            Threshold::Off => f.write_str("none"),
            Threshold::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub env: EnvSpec,
    pub replicates: usize,
    pub seed: u64,
    pub threshold: Threshold,
    /// Shape declared for external environments.
    pub external_inputs: usize,
    pub external_outputs: usize,
    pub external_timeout_secs: f64,
    /// Evaluation budget and everything else about a run. Its
    /// `solve_threshold` follows `threshold`.
    pub run: SaNeatConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algorithm: Algorithm::SaNeat,
            env: EnvSpec::CartPole,
            replicates: 1,
            seed: 0,
            threshold: Threshold::Auto,
            external_inputs: 4,
            external_outputs: 1,
            external_timeout_secs: 60.0,
            run: SaNeatConfig::default(),
        }
    }
}

/// Every accepted key, in the order they are written out.
pub const KEYS: &[&str] = &[
    "algo",
    "env",
    "replicates",
    "seed",
    "budget",
    "solve_threshold",
    "external.inputs",
    "external.outputs",
    "external.timeout",
    "population_size",
    "gens_per_infill",
    "inds_per_infill",
    "training_capacity",
    "stagnation_evals",
    "kappa",
    "infill_ranking",
    "init_weight_range",
    "compat.c1",
    "compat.c2",
    "speciation.initial_threshold",
    "speciation.target_species",
    "speciation.threshold_step",
    "speciation.threshold_floor",
    "speciation.stagnation_limit",
    "reproduction.new_weight_range",
    "reproduction.tournament_size",
    "reproduction.cull_fraction",
    "reproduction.elitism_min_size",
    "weights.perturb_prob",
    "weights.perturb_sigma",
    "weights.reset_prob",
    "weights.reset_range",
    "weights.clamp",
    "rates.add_node",
    "rates.add_connection",
    "rates.reenable",
    "rates.crossover",
    "rates.mutate_weights",
    "resolve_rates.add_node",
    "resolve_rates.add_connection",
    "resolve_rates.reenable",
    "resolve_rates.crossover",
    "resolve_rates.mutate_weights",
    "neat_rates.add_node",
    "neat_rates.add_connection",
    "neat_rates.reenable",
    "neat_rates.crossover",
    "neat_rates.mutate_weights",
    "gp.budget",
    "gp.sigma0",
    "gp.length_scale_min",
    "gp.length_scale_max",
    "gp.signal_variance_min",
    "gp.signal_variance_max",
    "gp.noise_min",
    "gp.noise_max",
    "gp.refit_budget",
    "gp.refit_sigma",
    "gp.refit_interval",
];

fn parse<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Type {
        path: key.to_string(),
        expected,
        value: value.to_string(),
    })
}

fn float(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse(key, value, "a number")?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::Type {
            path: key.to_string(),
            expected: "a finite number",
            value: value.to_string(),
        })
    }
}

fn rate_field<'a>(r: &'a mut VariationRates, name: &str) -> Option<&'a mut f64> {
    Some(match name {
        "add_node" => &mut r.add_node,
        "add_connection" => &mut r.add_connection,
        "reenable" => &mut r.reenable,
        "crossover" => &mut r.crossover,
        "mutate_weights" => &mut r.mutate_weights,
        _ => return None,
    })
}

impl ExperimentConfig {
    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = ExperimentConfig::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if seen.contains(&k) {
                return Err(ConfigError::Invalid {
                    path: k.to_string(),
                    msg: "set more than once".into(),
                });
            }
            seen.push(k);
            c.set(k, v)?;
        }
        Ok(c)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let r = &mut self.run;
        match key {
            "algo" => self.algorithm = parse(key, value, "neat or sa-neat")?,
            "env" => self.env = parse(key, value, "cartpole, nettest or external:<cmd>")?,
            "replicates" => self.replicates = parse(key, value, "a count")?,
            "seed" => self.seed = parse(key, value, "an unsigned integer")?,
            "budget" => r.max_evaluations = parse(key, value, "a count")?,
            "solve_threshold" => {
                self.threshold = parse(key, value, "auto, none or a number")?;
                r.solve_threshold = match self.threshold {
                    Threshold::Value(v) => Some(v),
                    _ => None,
                };
            }
            "external.inputs" => self.external_inputs = parse(key, value, "a count")?,
            "external.outputs" => self.external_outputs = parse(key, value, "a count")?,
            "external.timeout" => self.external_timeout_secs = float(key, value)?,
            "population_size" => r.population_size = parse(key, value, "a count")?,
            "gens_per_infill" => r.gens_per_infill = parse(key, value, "a count")?,
            "inds_per_infill" => r.inds_per_infill = parse(key, value, "a count")?,
            "training_capacity" => r.training_capacity = parse(key, value, "a count")?,
            "stagnation_evals" => r.stagnation_evals = parse(key, value, "a count")?,
            "kappa" => r.kappa = float(key, value)?,
            "infill_ranking" => {
                r.infill_ranking = match value {
                    "ucb" => InfillRanking::Ucb,
                    "mean" => InfillRanking::Mean,
                    _ => {
                        return Err(ConfigError::Type {
                            path: key.into(),
                            expected: "ucb or mean",
                            value: value.into(),
                        })
                    }
                }
            }
            "init_weight_range" => r.init_weight_range = float(key, value)?,
            "compat.c1" => r.coeffs.c1 = float(key, value)?,
            "compat.c2" => r.coeffs.c2 = float(key, value)?,
            "speciation.initial_threshold" => r.speciation.initial_threshold = float(key, value)?,
            "speciation.target_species" => r.speciation.target_species = parse(key, value, "a count")?,
            "speciation.threshold_step" => r.speciation.threshold_step = float(key, value)?,
            "speciation.threshold_floor" => r.speciation.threshold_floor = float(key, value)?,
            "speciation.stagnation_limit" => r.speciation.stagnation_limit = parse(key, value, "a count")?,
            "reproduction.new_weight_range" => r.reproduction.new_weight_range = float(key, value)?,
            "reproduction.tournament_size" => r.reproduction.tournament_size = parse(key, value, "a count")?,
            "reproduction.cull_fraction" => r.reproduction.cull_fraction = float(key, value)?,
            "reproduction.elitism_min_size" => r.reproduction.elitism_min_size = parse(key, value, "a count")?,
            "weights.perturb_prob" => r.reproduction.weights.perturb_prob = float(key, value)?,
            "weights.perturb_sigma" => r.reproduction.weights.perturb_sigma = float(key, value)?,
            "weights.reset_prob" => r.reproduction.weights.reset_prob = float(key, value)?,
            "weights.reset_range" => r.reproduction.weights.reset_range = float(key, value)?,
            "weights.clamp" => r.reproduction.weights.clamp = float(key, value)?,
            "gp.budget" => r.gp.budget = parse(key, value, "a count")?,
            "gp.sigma0" => r.gp.sigma0 = float(key, value)?,
            "gp.length_scale_min" => r.gp.length_scale_bounds.0 = float(key, value)?,
            "gp.length_scale_max" => r.gp.length_scale_bounds.1 = float(key, value)?,
            "gp.signal_variance_min" => r.gp.signal_variance_bounds.0 = float(key, value)?,
            "gp.signal_variance_max" => r.gp.signal_variance_bounds.1 = float(key, value)?,
            "gp.noise_min" => r.gp.noise_bounds.0 = float(key, value)?,
            "gp.noise_max" => r.gp.noise_bounds.1 = float(key, value)?,
            "gp.refit_budget" => r.gp_refit_budget = parse(key, value, "a count")?,
            "gp.refit_sigma" => r.gp_refit_sigma = float(key, value)?,
            "gp.refit_interval" => r.gp_refit_interval = parse(key, value, "a count")?,
            _ => {
                let (group, name) = key.split_once('.').ok_or_else(|| unknown(key))?;
                let rates = match group {
                    "rates" => &mut r.rates,
                    "resolve_rates" => &mut r.resolve_rates,
                    "neat_rates" => &mut r.neat_rates,
                    _ => return Err(unknown(key)),
                };
                *rate_field(rates, name).ok_or_else(|| unknown(key))? = float(key, value)?;
            }
        }
        Ok(())
    }

    /// Text form of one key, as accepted by [`set`](Self::set).
    pub fn get(&self, key: &str) -> Option<String> {
        let r = &self.run;
        let w = &r.reproduction.weights;
        let s = match key {
            "algo" => self.algorithm.to_string(),
            "env" => self.env.to_string(),
            "replicates" => self.replicates.to_string(),
            "seed" => self.seed.to_string(),
            "budget" => r.max_evaluations.to_string(),
            "solve_threshold" => self.threshold.to_string(),
            "external.inputs" => self.external_inputs.to_string(),
            "external.outputs" => self.external_outputs.to_string(),
            "external.timeout" => self.external_timeout_secs.to_string(),
            "population_size" => r.population_size.to_string(),
            "gens_per_infill" => r.gens_per_infill.to_string(),
            "inds_per_infill" => r.inds_per_infill.to_string(),
            "training_capacity" => r.training_capacity.to_string(),
            "stagnation_evals" => r.stagnation_evals.to_string(),
            "kappa" => r.kappa.to_string(),
            "infill_ranking" => match r.infill_ranking {
                InfillRanking::Ucb => "ucb".into(),
                InfillRanking::Mean => "mean".into(),
            },
            "init_weight_range" => r.init_weight_range.to_string(),
            "compat.c1" => r.coeffs.c1.to_string(),
            "compat.c2" => r.coeffs.c2.to_string(),
            "speciation.initial_threshold" => r.speciation.initial_threshold.to_string(),
            "speciation.target_species" => r.speciation.target_species.to_string(),
            "speciation.threshold_step" => r.speciation.threshold_step.to_string(),
            "speciation.threshold_floor" => r.speciation.threshold_floor.to_string(),
            "speciation.stagnation_limit" => r.speciation.stagnation_limit.to_string(),
            "reproduction.new_weight_range" => r.reproduction.new_weight_range.to_string(),
            "reproduction.tournament_size" => r.reproduction.tournament_size.to_string(),
            "reproduction.cull_fraction" => r.reproduction.cull_fraction.to_string(),
            "reproduction.elitism_min_size" => r.reproduction.elitism_min_size.to_string(),
            "weights.perturb_prob" => w.perturb_prob.to_string(),
            "weights.perturb_sigma" => w.perturb_sigma.to_string(),
            "weights.reset_prob" => w.reset_prob.to_string(),
            "weights.reset_range" => w.reset_range.to_string(),
            "weights.clamp" => w.clamp.to_string(),
            "gp.budget" => r.gp.budget.to_string(),
            "gp.sigma0" => r.gp.sigma0.to_string(),
            "gp.length_scale_min" => r.gp.length_scale_bounds.0.to_string(),
            "gp.length_scale_max" => r.gp.length_scale_bounds.1.to_string(),
            "gp.signal_variance_min" => r.gp.signal_variance_bounds.0.to_string(),
            "gp.signal_variance_max" => r.gp.signal_variance_bounds.1.to_string(),
            "gp.noise_min" => r.gp.noise_bounds.0.to_string(),
            "gp.noise_max" => r.gp.noise_bounds.1.to_string(),
            "gp.refit_budget" => r.gp_refit_budget.to_string(),
            "gp.refit_sigma" => r.gp_refit_sigma.to_string(),
            "gp.refit_interval" => r.gp_refit_interval.to_string(),
            _ => {
                let (group, name) = key.split_once('.')?;
                let mut rates = match group {
                    "rates" => r.rates,
                    "resolve_rates" => r.resolve_rates,
                    "neat_rates" => r.neat_rates,
                    _ => return None,
                };
                rate_field(&mut rates, name)?.to_string()
            }
        };
        Some(s)
    }

    /// One `key = value` line per key. Parsing the result gives back `self`.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("every listed key has a value")))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |path: &str, msg: &str| {
            Err(ConfigError::Invalid {
                path: path.into(),
                msg: msg.into(),
            })
        };
        if self.replicates == 0 {
            return invalid("replicates", "must be at least 1");
        }
        if self.run.max_evaluations < self.run.population_size {
            return invalid("budget", "must be at least population_size");
        }
        if self.external_inputs == 0 || self.external_outputs == 0 {
            return invalid("external.inputs", "external shape must be positive");
        }
        if !(self.external_timeout_secs > 0.0) {
            return invalid("external.timeout", "must be positive");
        }
        let r = &self.run;
        if r.coeffs.c1 < 0.0 || r.coeffs.c2 < 0.0 || r.coeffs.c1 + r.coeffs.c2 == 0.0 {
            return invalid("compat.c1", "coefficients must be non-negative and not both zero");
        }
        let (lo, hi) = r.gp.length_scale_bounds;
        if !(lo > 0.0 && lo < hi) {
            return invalid("gp.length_scale_min", "bounds must satisfy 0 < min < max");
        }
        let (lo, hi) = r.gp.signal_variance_bounds;
        if !(lo > 0.0 && lo < hi) {
            return invalid("gp.signal_variance_min", "bounds must satisfy 0 < min < max");
        }
        let (lo, hi) = r.gp.noise_bounds;
        if !(lo > 0.0 && lo < hi) {
            return invalid("gp.noise_min", "bounds must satisfy 0 < min < max");
        }
        r.validate().map_err(|msg| ConfigError::Invalid {
            path: "run".into(),
            msg,
        })
    }

    pub fn build_env(&self) -> Result<Box<dyn Environment>, Error> {
        Ok(match &self.env {
            EnvSpec::CartPole => Box::new(CartPoleSwingUp::default()),
            EnvSpec::NetTest => Box::new(NetTest::default()),
            EnvSpec::External(cmd) => Box::new(ExternalEnv::shell(
                cmd,
                NetworkShape::new(self.external_inputs, self.external_outputs),
                Duration::from_secs_f64(self.external_timeout_secs),
            )?),
        })
    }

    /// Replaces `auto` by the environment's threshold and copies it into the
    /// run settings.
    pub fn resolve_threshold(&mut self, env: &dyn Environment) {
        if self.threshold == Threshold::Auto {
            self.threshold = env.solve_threshold().map_or(Threshold::Off, Threshold::Value);
        }
        self.run.solve_threshold = match self.threshold {
            Threshold::Value(v) => Some(v),
            _ => None,
        };
    }
}

fn unknown(key: &str) -> ConfigError {
    ConfigError::UnknownKey { path: key.to_string() }
}
