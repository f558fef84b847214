//! Optimizers for a quantized, mixed-unit parameter grid.
//!
//! The crate holds the algorithmic core only: the parameter space and its
//! genotypes, a genetic algorithm and a particle swarm variant that both
//! propose batches of never-before-evaluated grid points, the Gaussian-sum
//! benchmark landscape, and the trial/sweep machinery used to tune the
//! optimizers' own parameters. Everything here is `no_std` with `alloc`;
//! file formats, sessions and the CLI live in the `lightswim` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod fitness;
pub mod ga;
pub mod genome;
pub mod optimizer;
pub mod pso;
pub mod rng;
pub mod sweep;

pub use error::{Error, Result};
pub use fitness::{FitnessProvider, MeasuredFitness, ProviderKind, Surrogate, SurrogateParams};
pub use ga::{GaConfig, GaState, PoolStrategy, Selection};
pub use genome::{DimensionSpec, EvaluatedIndividual, Genotype, ParameterSpace};
pub use optimizer::{Algorithm, AlgorithmConfig, Optimizer};
pub use pso::{Particle, PsoConfig, SwarmState};
pub use rng::{derive_seed, EngineRng};
