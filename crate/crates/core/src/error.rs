use std::io;

use thiserror::Error;

use crate::neat::genome::{Innovation, NodeId};

/// Structural problems found when validating or parsing a genome.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenomeError {
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate innovation number {0}")]
    DuplicateInnovation(Innovation),
    #[error("connections not sorted by innovation at position {0}")]
    Unsorted(usize),
    #[error("connection {innovation} references missing node {node}")]
    MissingNode { innovation: Innovation, node: NodeId },
    #[error("more than one connection from {0} to {1}")]
    DuplicatePair(NodeId, NodeId),
    #[error("connection {0} targets an input or bias node")]
    IntoSensor(Innovation),
    #[error("connection {0} closes a directed cycle")]
    Cycle(Innovation),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("genome contains a directed cycle over enabled connections")]
    Cycle,
    #[error("expected {expected} inputs, got {got}")]
    InputArity { expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("the training set is empty")]
    Empty,
    #[error("{genomes} genomes but {fitnesses} fitness values")]
    LengthMismatch { genomes: usize, fitnesses: usize },
    #[error("non-finite fitness value at index {0}")]
    NonFinite(usize),
    #[error("kernel matrix is not positive definite even with jitter {0:e}")]
    Degenerate(f64),
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("controller arity mismatch: {0}")]
    Arity(String),
    #[error("simulation produced a non-finite state")]
    Simulation,
    #[error("network: {0}")]
    Network(#[from] NetworkError),
    #[error("external process timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("external process protocol error: {0}")]
    Protocol(String),
    #[error("external process exited")]
    ProcessExited,
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{path}: unknown key")]
    UnknownKey { path: String },
    #[error("{path}: expected {expected}, got `{value}`")]
    Type {
        path: String,
        expected: &'static str,
        value: String,
    },
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
}

/// Errors surfaced by evolutionary runs and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Genome(#[from] GenomeError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error("environment: {0}")]
    Env(#[from] EnvError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Experiment(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
