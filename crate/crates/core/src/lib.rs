//! Correlation-based discretization of continuous parameters into QUBO form.
//!
//! Continuous parameters are binary-expanded over a fixed basis. Parameter
//! pairs that a short Metropolis chain finds strongly correlated share the
//! bits carrying their largest basis coefficients, which shrinks the QUBO
//! handed to an annealer. The crate ships the encoding, a dense QUBO/Ising
//! model, a simulated-annealing solver and a linear-regression benchmark.

pub mod annealer;
pub mod config;
pub mod datagen;
pub mod encoding;
pub mod error;
pub mod harness;
pub mod qubo;
pub mod regression;
pub mod sampler;

pub use annealer::{anneal, AnnealResult, AnnealSchedule};
pub use encoding::{BasisVector, EncodingPlan};
pub use error::{Error, Result};
pub use qubo::{IsingProblem, QuboProblem};
pub use regression::RegressionDataset;
pub use sampler::{CorrelationReport, SamplerConfig};
