// SPDX-License-Identifier: Apache-2.0

//! Genetic search over matrix instances: fitness, best-N selection,
//! scattered crossover, mutation and the generation loop.

mod fitness;
mod operators;
mod search;

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::backend::BackendError;
use crate::metagrammar::{BindError, MatrixStructure};

pub use fitness::{fitness, BenchmarkOutcome, Evaluator, FitnessReport, Score};
pub use operators::{best_n, best_n_indices, crossover, crossover_population, mutate, mutate_at, CrossoverMask};
pub use search::{history_csv, search, search_with, GenerationRecord, SearchOutcome, HISTORY_HEADER};

/// Search hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub parent_count: usize,
    pub max_generations: usize,
    /// Per-call solver timeout, also the T of the fitness function.
    pub timeout: Duration,
    /// Per-cell flip probability; `None` means one over the number of valid cells.
    pub mutation_rate: Option<f64>,
    pub seed: u64,
    pub workers: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 60,
            parent_count: 15,
            max_generations: 100,
            timeout: Duration::from_secs(10),
            mutation_rate: None,
            seed: 0,
            workers: 1,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("population size must be positive")]
    EmptyPopulation,
    #[error("parent count {parents} exceeds population size {population}")]
    TooManyParents { parents: usize, population: usize },
    #[error("crossover needs at least 2 parents, got {0}")]
    TooFewParents(usize),
    #[error("mutation rate {0} is not in [0, 1]")]
    MutationRate(f64),
    #[error("timeout must be positive")]
    ZeroTimeout,
    #[error("worker count must be positive")]
    NoWorkers,
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size == 0 {
            return Err(ConfigError::EmptyPopulation);
        }
        if self.parent_count > self.population_size {
            return Err(ConfigError::TooManyParents { parents: self.parent_count, population: self.population_size });
        }
        if self.max_generations > 0 && self.parent_count < 2 {
            return Err(ConfigError::TooFewParents(self.parent_count));
        }
        if let Some(p) = self.mutation_rate {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::MutationRate(p));
            }
        }
        if self.timeout.is_zero() {
            return Err(ConfigError::ZeroTimeout);
        }
        if self.workers == 0 {
            return Err(ConfigError::NoWorkers);
        }
        Ok(())
    }

    /// The configured rate, or one flip per child on average.
    pub fn effective_mutation_rate(&self, s: &MatrixStructure) -> f64 {
        self.mutation_rate.unwrap_or_else(|| match s.valid_count() {
            0 => 0.0,
            n => 1.0 / n as f64,
        })
    }
}

#[derive(Debug, Error)]
pub enum GaError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error("instance or mask does not match the structure")]
    Shape,
    #[error("cell ({row}, {col}) is not a valid cell")]
    InvalidCell { row: usize, col: usize },
    #[error("cannot select {n} of {len} instances")]
    Selection { n: usize, len: usize },
    #[error("crossover needs at least 2 parents, got {0}")]
    TooFewParents(usize),
    #[error("no benchmarks to evaluate")]
    NoBenchmarks,
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Purpose of a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    Init = 0,
    Crossover = 1,
    Mutation = 2,
}

/// Independent generator for one purpose in one generation.
pub fn stream(seed: u64, generation: usize, role: Role) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 8) | role as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn config_validation() {
        assert_eq!(GaConfig::default().validate(), Ok(()));
        let bad = |f: fn(&mut GaConfig)| {
            let mut c = GaConfig::default();
            f(&mut c);
            c.validate().unwrap_err()
        };
        assert_eq!(bad(|c| c.parent_count = 61), ConfigError::TooManyParents { parents: 61, population: 60 });
        assert_eq!(bad(|c| c.parent_count = 1), ConfigError::TooFewParents(1));
        assert_eq!(bad(|c| c.mutation_rate = Some(1.5)), ConfigError::MutationRate(1.5));
        assert_eq!(bad(|c| c.timeout = Duration::ZERO), ConfigError::ZeroTimeout);
        assert_eq!(bad(|c| c.population_size = 0), ConfigError::EmptyPopulation);
        let mut c = GaConfig { parent_count: 1, max_generations: 0, ..GaConfig::default() };
        assert_eq!(c.validate(), Ok(()));
        c.mutation_rate = Some(1.0);
        assert_eq!(c.validate(), Ok(()));
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        let draw = |g, r| stream(7, g, r).random::<u64>();
        assert_eq!(draw(3, Role::Mutation), draw(3, Role::Mutation));
        assert_ne!(draw(3, Role::Mutation), draw(3, Role::Crossover));
        assert_ne!(draw(3, Role::Mutation), draw(4, Role::Mutation));
        assert_ne!(stream(7, 0, Role::Init).random::<u64>(), stream(8, 0, Role::Init).random::<u64>());
    }
}
