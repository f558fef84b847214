//! Ask/tell driver shared by simulations and lab sessions.
//!
//! `ask` proposes the next generation (random for the first one), `tell`
//! hands back one fitness value per proposal in the same order. Both engines
//! consume a single [`EngineRng`] owned by the optimizer, so a run is a pure
//! function of `(space, config, seed, told fitness values)`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ga::{self, GaConfig, GaState};
use crate::genome::{Genotype, ParameterSpace};
use crate::pso::{self, PsoConfig, SwarmState};
use crate::rng::{engine_rng, EngineRng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ga,
    Pso,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ga => "ga",
            Algorithm::Pso => "pso",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmConfig {
    Ga(GaConfig),
    Pso(PsoConfig),
}

impl AlgorithmConfig {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            AlgorithmConfig::Ga(_) => Algorithm::Ga,
            AlgorithmConfig::Pso(_) => Algorithm::Pso,
        }
    }

    pub fn default_for(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Ga => AlgorithmConfig::Ga(GaConfig::default()),
            Algorithm::Pso => AlgorithmConfig::Pso(PsoConfig::default()),
        }
    }

    /// Individuals per generation.
    pub fn population(&self) -> usize {
        match self {
            AlgorithmConfig::Ga(c) => c.population,
            AlgorithmConfig::Pso(c) => c.swarm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmConfig::Ga(c) => c.validate(),
            AlgorithmConfig::Pso(c) => c.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Engine {
    Fresh,
    Ga(GaState),
    Pso(SwarmState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    space: ParameterSpace,
    config: AlgorithmConfig,
    rng: EngineRng,
    engine: Engine,
    pending: Option<Vec<Genotype>>,
    generations_told: u32,
    best: Option<(Genotype, f64)>,
}

impl Optimizer {
    pub fn new(space: ParameterSpace, config: AlgorithmConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Optimizer {
            space,
            config,
            rng: engine_rng(seed),
            engine: Engine::Fresh,
            pending: None,
            generations_told: 0,
            best: None,
        })
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn config(&self) -> &AlgorithmConfig {
        &self.config
    }

    /// Completed (told) generations.
    pub fn generations(&self) -> u32 {
        self.generations_told
    }

    pub fn pending(&self) -> Option<&[Genotype]> {
        self.pending.as_deref()
    }

    /// Best `(genotype, fitness)` told so far.
    pub fn best(&self) -> Option<(&Genotype, f64)> {
        self.best.as_ref().map(|(g, f)| (g, *f))
    }

    pub fn ga_state(&self) -> Option<&GaState> {
        match &self.engine {
            Engine::Ga(s) => Some(s),
            _ => None,
        }
    }

    pub fn swarm_state(&self) -> Option<&SwarmState> {
        match &self.engine {
            Engine::Pso(s) => Some(s),
            _ => None,
        }
    }

    /// Propose the next generation. Fails if the previous one was not told.
    pub fn ask(&mut self) -> Result<Vec<Genotype>> {
        if self.pending.is_some() {
            return Err(Error::StateConflict("previous generation has not been told"));
        }
        let batch = match (&mut self.engine, &self.config) {
            (Engine::Fresh, config) => self.space.random_population(config.population(), &mut self.rng)?,
            (Engine::Ga(state), AlgorithmConfig::Ga(c)) => ga::next_generation(state, c, &self.space, &mut self.rng)?,
            (Engine::Pso(state), AlgorithmConfig::Pso(c)) => {
                pso::next_generation(state, c, &self.space, &mut self.rng)?
            }
            _ => unreachable!("engine and config kinds always agree"),
        };
        self.pending = Some(batch.clone());
        Ok(batch)
    }

    /// Report fitness for the pending generation, in proposal order.
    pub fn tell(&mut self, fitness: &[f64]) -> Result<()> {
        let batch = self.pending.as_ref().ok_or(Error::StateConflict("nothing was asked"))?;
        if fitness.len() != batch.len() {
            return Err(Error::BatchSizeMismatch { expected: batch.len(), got: fitness.len() });
        }
        if let Some(&bad) = fitness.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
            return Err(Error::InvalidFitness(bad));
        }
        match &mut self.engine {
            Engine::Fresh => match &self.config {
                AlgorithmConfig::Ga(_) => {
                    let mut st = GaState::new();
                    st.record_generation(&zip(batch, fitness))?;
                    self.engine = Engine::Ga(st);
                }
                AlgorithmConfig::Pso(_) => {
                    let mut st = SwarmState::new(&self.space, batch);
                    st.register_generation(&self.space, fitness, &mut self.rng)?;
                    self.engine = Engine::Pso(st);
                }
            },
            Engine::Ga(st) => st.record_generation(&zip(batch, fitness))?,
            Engine::Pso(st) => st.register_generation(&self.space, fitness, &mut self.rng)?,
        }
        for (g, &f) in batch.iter().zip(fitness) {
            if self.best.as_ref().is_none_or(|(_, b)| f > *b) {
                self.best = Some((g.clone(), f));
            }
        }
        self.pending = None;
        self.generations_told += 1;
        Ok(())
    }
}

fn zip(batch: &[Genotype], fitness: &[f64]) -> Vec<(Genotype, f64)> {
    batch.iter().cloned().zip(fitness.iter().copied()).collect()
}
