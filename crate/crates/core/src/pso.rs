//! Particle swarm over the quantized grid.
//!
//! Particles move in raw units; the grid point a particle proposes is the
//! quantization of its raw position. Velocities are clamped per component
//! to the dimension's full range, non-periodic coordinates are clipped to
//! `[min, max]` and periodic ones wrapped. A proposal that repeats a point
//! evaluated in an *earlier* generation is retried with further swarm steps
//! and, failing that, mutated one gene at a time until it is new. Repeats
//! inside one generation are allowed.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::genome::{wrap, Genotype, ParameterSpace};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    /// Inertia weight.
    pub w: f64,
    /// Cognitive coefficient.
    pub c1: f64,
    /// Social coefficient.
    pub c2: f64,
    pub swarm: usize,
    pub max_dedup_steps: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig { w: 0.0, c1: 0.2, c2: 1.4, swarm: 8, max_dedup_steps: 5 }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("w", self.w), ("c1", self.c1), ("c2", self.c2)] {
            if !v.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        if self.swarm < 2 {
            return Err(Error::config("swarm", "must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_position: Vec<f64>,
    pub pbest_fitness: f64,
    pub genotype: Genotype,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub gbest_position: Vec<f64>,
    pub gbest_fitness: f64,
    /// Every genotype evaluated in a completed generation.
    pub evaluated: BTreeSet<Genotype>,
    pub generation: u32,
}

impl SwarmState {
    /// Particles at the raw values of the given genotypes, at rest, with no
    /// personal or global best yet.
    pub fn new(space: &ParameterSpace, genotypes: &[Genotype]) -> Self {
        let n = space.ndims();
        let particles = genotypes
            .iter()
            .map(|g| {
                let position = space.values_of(g);
                Particle {
                    pbest_position: position.clone(),
                    position,
                    velocity: vec![0.0; n],
                    pbest_fitness: f64::NEG_INFINITY,
                    genotype: g.clone(),
                }
            })
            .collect();
        SwarmState {
            particles,
            gbest_position: vec![0.0; n],
            gbest_fitness: f64::NEG_INFINITY,
            evaluated: BTreeSet::new(),
            generation: 0,
        }
    }

    pub fn genotypes(&self) -> Vec<Genotype> {
        self.particles.iter().map(|p| p.genotype.clone()).collect()
    }

    /// Feed the fitness of particle `index`'s current genotype.
    ///
    /// A new personal best moves `pbest`; a new global best moves `gbest`
    /// and replaces the particle's velocity by [`gbest_reset_velocity`].
    pub fn register_fitness<R: Rng + ?Sized>(
        &mut self,
        space: &ParameterSpace,
        index: usize,
        fitness: f64,
        rng: &mut R,
    ) -> Result<()> {
        if !fitness.is_finite() {
            return Err(Error::InvalidFitness(fitness));
        }
        let p = &mut self.particles[index];
        self.evaluated.insert(p.genotype.clone());
        if fitness > p.pbest_fitness {
            p.pbest_fitness = fitness;
            p.pbest_position = p.position.clone();
        }
        if fitness > self.gbest_fitness {
            self.gbest_fitness = fitness;
            self.gbest_position = p.position.clone();
            p.velocity = gbest_reset_velocity(space, rng);
        }
        Ok(())
    }

    /// Register a whole generation in particle order and close it.
    pub fn register_generation<R: Rng + ?Sized>(
        &mut self,
        space: &ParameterSpace,
        fitness: &[f64],
        rng: &mut R,
    ) -> Result<()> {
        if fitness.len() != self.particles.len() {
            return Err(Error::BatchSizeMismatch { expected: self.particles.len(), got: fitness.len() });
        }
        if let Some(&bad) = fitness.iter().find(|f| !f.is_finite()) {
            return Err(Error::InvalidFitness(bad));
        }
        for (i, &f) in fitness.iter().enumerate() {
            self.register_fitness(space, i, f, rng)?;
        }
        self.generation += 1;
        Ok(())
    }
}

/// `v' = w v + c1 r1 (pbest - x) + c2 r2 (gbest - x)` with scalar
/// `r1, r2 ~ U[0,1)`, each component clamped to `[-range, range]`.
pub fn velocity_update<R: Rng + ?Sized>(
    p: &Particle,
    gbest: &[f64],
    config: &PsoConfig,
    space: &ParameterSpace,
    rng: &mut R,
) -> Vec<f64> {
    let r1: f64 = rng.random();
    let r2: f64 = rng.random();
    (0..space.ndims())
        .map(|d| {
            let x = p.position[d];
            let v =
                config.w * p.velocity[d] + config.c1 * r1 * (p.pbest_position[d] - x) + config.c2 * r2 * (gbest[d] - x);
            let r = space.dimension(d).range();
            v.clamp(-r, r)
        })
        .collect()
}

/// Move by `velocity`, clip or wrap, and quantize.
pub fn position_update(position: &[f64], velocity: &[f64], space: &ParameterSpace) -> (Vec<f64>, Genotype) {
    let x: Vec<f64> = space
        .dimensions()
        .iter()
        .enumerate()
        .map(|(d, dim)| {
            let raw = position[d] + velocity[d];
            match dim.period {
                Some(period) => wrap(raw, period),
                None => raw.clamp(dim.min(), dim.max()),
            }
        })
        .collect();
    let g = space.quantize(&x);
    (x, g)
}

/// One scalar `u ~ U[-1, 1]` times the per-dimension range vector.
pub fn gbest_reset_velocity<R: Rng + ?Sized>(space: &ParameterSpace, rng: &mut R) -> Vec<f64> {
    let u: f64 = rng.random_range(-1.0..=1.0);
    scaled_ranges(space, u)
}

pub(crate) fn scaled_ranges(space: &ParameterSpace, u: f64) -> Vec<f64> {
    space.ranges().into_iter().map(|r| u * r).collect()
}

/// Advance every particle (in index order) and return the proposals.
pub fn next_generation<R: Rng + ?Sized>(
    state: &mut SwarmState,
    config: &PsoConfig,
    space: &ParameterSpace,
    rng: &mut R,
) -> Result<Vec<Genotype>> {
    config.validate()?;
    if state.evaluated.len() as u64 >= space.cardinality() {
        return Err(Error::SearchSpaceExhausted);
    }
    let gbest = state.gbest_position.clone();
    for p in state.particles.iter_mut() {
        let mut steps = 0;
        loop {
            let v = velocity_update(p, &gbest, config, space, rng);
            let (x, g) = position_update(&p.position, &v, space);
            p.velocity = v;
            p.position = x;
            p.genotype = g;
            if !state.evaluated.contains(&p.genotype) || steps == config.max_dedup_steps {
                break;
            }
            steps += 1;
        }
        if state.evaluated.contains(&p.genotype) {
            let mut g = p.genotype.clone();
            while state.evaluated.contains(&g) {
                g = space.mutate_random_gene(&g, rng);
            }
            p.position = space.values_of(&g);
            p.genotype = g;
        }
    }
    Ok(state.genotypes())
}
