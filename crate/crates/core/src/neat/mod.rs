//! Genomes, variation operators with innovation tracking, compatibility
//! distance, speciation and species-based reproduction.

pub mod crossover;
pub mod distance;
pub mod genome;
pub mod innovation;
pub mod mutation;
pub mod reproduction;
pub mod species;

pub use crossover::crossover;
pub use distance::{align, compatibility_distance, Alignment, CompatCoefficients};
pub use genome::{ConnectionGene, Genome, Innovation, NetworkShape, NodeGene, NodeId, NodeKind};
pub use innovation::InnovationTracker;
pub use mutation::{
    legal_connection_pairs, mutate_add_connection, mutate_add_node, mutate_weights,
    WeightMutation,
};
pub use reproduction::{reproduce, ReproductionConfig, VariationRates};
pub use species::{SpeciationConfig, Species, SpeciesId, SpeciesSet};
