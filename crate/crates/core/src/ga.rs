//! Genetic algorithm over the quantized grid.
//!
//! One generation is produced as follows: parents are drawn in pairs from a
//! selection pool (the best eight individuals ever evaluated, or the whole
//! history), each parent copy receives `mutation_count(rate)` single-gene
//! mutations at distinct positions, the two copies are recombined by a
//! half-and-half uniform crossover, and finally every child that repeats an
//! already evaluated or already accepted genotype is mutated one gene at a
//! time until it is new.
//!
//! RNG draw order: all pair selections first, then per pair the mutation
//! of parent one, of parent two and the crossover mask, then duplicate
//! resolution in child order.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::genome::{EvaluatedIndividual, Genotype, ParameterSpace};
use crate::{Error, Result};

/// Size of the elitist selection pool.
pub const ELITE_POOL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Rank,
    Roulette,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolStrategy {
    /// The [`ELITE_POOL`] best individuals found so far.
    Elite8,
    /// Every individual evaluated so far.
    AllHistory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub selection: Selection,
    pub pool: PoolStrategy,
    pub m_min: f64,
    pub m_max: f64,
    pub adaptive: bool,
    pub population: usize,
    pub pairs: usize,
}

impl Default for GaConfig {
    /// Elitist rank selection with one mutation per parent.
    fn default() -> Self {
        GaConfig {
            selection: Selection::Rank,
            pool: PoolStrategy::Elite8,
            m_min: 1.0,
            m_max: 1.0,
            adaptive: false,
            population: 8,
            pairs: 4,
        }
    }
}

impl GaConfig {
    pub fn with_rate(mut self, rate: f64) -> Self {
        self.m_min = rate;
        self.m_max = rate;
        self.adaptive = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m_min.is_finite() && self.m_min >= 0.0) {
            return Err(Error::config("m_min", "must be finite and >= 0"));
        }
        if !(self.m_max.is_finite() && self.m_max >= self.m_min) {
            return Err(Error::config("m_max", "must be finite and >= m_min"));
        }
        if !self.adaptive && self.m_min != self.m_max {
            return Err(Error::config("m_max", "must equal m_min when adaptive is false"));
        }
        if self.pairs == 0 {
            return Err(Error::config("pairs", "must be at least 1"));
        }
        if self.population != 2 * self.pairs {
            return Err(Error::config("population", "must equal 2 * pairs"));
        }
        Ok(())
    }
}

/// Everything the GA has evaluated so far.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GaState {
    pub history: Vec<EvaluatedIndividual>,
    /// Number of generations recorded.
    pub generation: u32,
    /// Highest fitness in `history` (0 while empty).
    pub f_max_seen: f64,
    seen: BTreeSet<Genotype>,
}

impl GaState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, g: &Genotype) -> bool {
        self.seen.contains(g)
    }

    /// Append one evaluated generation.
    pub fn record_generation(&mut self, batch: &[(Genotype, f64)]) -> Result<()> {
        let mut fresh = BTreeSet::new();
        for (g, f) in batch {
            if !(f.is_finite() && *f >= 0.0) {
                return Err(Error::InvalidFitness(*f));
            }
            if self.seen.contains(g) || !fresh.insert(g) {
                return Err(Error::StateConflict("genotype already evaluated"));
            }
        }
        for (g, f) in batch {
            let id = self.history.len() as u64;
            self.history.push(EvaluatedIndividual {
                id,
                genotype: g.clone(),
                fitness: *f,
                generation: self.generation,
            });
            self.seen.insert(g.clone());
            if *f > self.f_max_seen {
                self.f_max_seen = *f;
            }
        }
        self.generation += 1;
        Ok(())
    }
}

/// Rank-based selection probabilities, `P(k) = B(1-B)^k + (1-B)^n / n`
/// with `B = n^(-2/3)` and `k = 0` the best-ranked individual.
pub fn rank_probabilities(n: usize) -> Vec<f64> {
    assert!(n >= 1, "rank_probabilities needs n >= 1");
    let nf = n as f64;
    let b = libm::pow(nf, -2.0 / 3.0);
    let tail = libm::pow(1.0 - b, nf) / nf;
    (0..n).map(|k| b * libm::pow(1.0 - b, k as f64) + tail).collect()
}

/// Fitness-proportional probabilities; uniform when every fitness is zero.
pub fn roulette_probabilities(fitnesses: &[f64]) -> Result<Vec<f64>> {
    if fitnesses.is_empty() {
        return Err(Error::EmptyInput("roulette over no individuals"));
    }
    if let Some(&bad) = fitnesses.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
        return Err(Error::InvalidFitness(bad));
    }
    let total: f64 = fitnesses.iter().sum();
    if total == 0.0 {
        let u = 1.0 / fitnesses.len() as f64;
        return Ok(fitnesses.iter().map(|_| u).collect());
    }
    Ok(fitnesses.iter().map(|f| f / total).collect())
}

/// Candidate parents sorted best first; equal fitness keeps earlier ids first.
pub fn selection_pool(state: &GaState, config: &GaConfig) -> Vec<EvaluatedIndividual> {
    let mut pool = state.history.clone();
    pool.sort_by(|a, b| b.fitness.total_cmp(&a.fitness).then(a.id.cmp(&b.id)));
    if config.pool == PoolStrategy::Elite8 {
        pool.truncate(ELITE_POOL);
    }
    pool
}

pub fn pool_probabilities(pool: &[EvaluatedIndividual], selection: Selection) -> Result<Vec<f64>> {
    match selection {
        Selection::Rank => Ok(rank_probabilities(pool.len())),
        Selection::Roulette => {
            let f: Vec<f64> = pool.iter().map(|i| i.fitness).collect();
            roulette_probabilities(&f)
        }
    }
}

/// Draw `pairs` parent pairs (as pool indices) with replacement across pairs.
///
/// The second member of a pair is drawn from `probs` conditioned on being a
/// different individual than the first, falling back to uniform over the
/// others when the remaining mass is zero.
pub fn select_pairs<R: Rng + ?Sized>(probs: &[f64], pairs: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    let n = probs.len();
    if n < 2 {
        return Err(Error::PoolTooSmall(n));
    }
    let first = WeightedIndex::new(probs).map_err(|_| Error::InvalidFitness(f64::NAN))?;
    let mut out = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let a = first.sample(rng);
        let mut rest = probs.to_vec();
        rest[a] = 0.0;
        let b = match WeightedIndex::new(&rest) {
            Ok(w) => w.sample(rng),
            Err(_) => {
                let b = rng.random_range(0..n - 1);
                if b >= a {
                    b + 1
                } else {
                    b
                }
            }
        };
        out.push((a, b));
    }
    Ok(out)
}

/// `floor(m)` mutations plus one more with probability `m - floor(m)`.
pub fn mutation_count<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> usize {
    let whole = libm::floor(rate);
    let frac = rate - whole;
    let extra = frac > 0.0 && rng.random::<f64>() < frac;
    whole as usize + usize::from(extra)
}

/// Adaptive mutation rate, `(f_max - f)(m_max - m_min)/f_max + m_min`.
///
/// Returns `m_max` when `f_max` is not positive (nothing has scored yet).
pub fn adaptive_rate(f: f64, f_max: f64, m_min: f64, m_max: f64) -> f64 {
    if f_max <= 0.0 {
        return m_max;
    }
    (f_max - f) * (m_max - m_min) / f_max + m_min
}

/// Mutate `k` distinct, randomly chosen genes (all genes if `k` exceeds the
/// dimension count).
pub fn mutate_genes<R: Rng + ?Sized>(space: &ParameterSpace, g: &Genotype, k: usize, rng: &mut R) -> Genotype {
    let n = space.ndims();
    let mut out = g.clone();
    for d in index::sample(rng, n, k.min(n)).iter() {
        out = space.mutate_gene(&out, d, rng);
    }
    out
}

/// Half-gene uniform crossover.
///
/// A random subset of `n/2` positions goes from `a` to the first child and
/// from `b` to the second; the remaining positions are swapped.
pub fn uniform_crossover<R: Rng + ?Sized>(a: &Genotype, b: &Genotype, rng: &mut R) -> (Genotype, Genotype) {
    let n = a.len();
    let mut c1 = b.clone();
    let mut c2 = a.clone();
    for d in index::sample(rng, n, n / 2).iter() {
        c1.0[d] = a.0[d];
        c2.0[d] = b.0[d];
    }
    (c1, c2)
}

fn parent_rate(config: &GaConfig, state: &GaState, fitness: f64) -> f64 {
    if config.adaptive {
        adaptive_rate(fitness, state.f_max_seen, config.m_min, config.m_max)
    } else {
        config.m_min
    }
}

/// Propose `config.population` distinct genotypes never evaluated before.
pub fn next_generation<R: Rng + ?Sized>(
    state: &GaState,
    config: &GaConfig,
    space: &ParameterSpace,
    rng: &mut R,
) -> Result<Vec<Genotype>> {
    config.validate()?;
    if state.history.len() < 2 {
        return Err(Error::InsufficientHistory(state.history.len()));
    }
    let free = space.cardinality().saturating_sub(state.history.len() as u64);
    if free < config.population as u64 {
        return Err(Error::SearchSpaceExhausted);
    }

    let pool = selection_pool(state, config);
    let probs = pool_probabilities(&pool, config.selection)?;
    let pairs = select_pairs(&probs, config.pairs, rng)?;

    let mut children = Vec::with_capacity(config.population);
    for (a, b) in pairs {
        let (pa, pb) = (&pool[a], &pool[b]);
        let ka = mutation_count(parent_rate(config, state, pa.fitness), rng);
        let ma = mutate_genes(space, &pa.genotype, ka, rng);
        let kb = mutation_count(parent_rate(config, state, pb.fitness), rng);
        let mb = mutate_genes(space, &pb.genotype, kb, rng);
        let (c1, c2) = uniform_crossover(&ma, &mb, rng);
        children.push(c1);
        children.push(c2);
    }

    let mut accepted: Vec<Genotype> = Vec::with_capacity(children.len());
    for mut child in children {
        while state.contains(&child) || accepted.contains(&child) {
            child = space.mutate_random_gene(&child, rng);
        }
        accepted.push(child);
    }
    Ok(accepted)
}
