//! Surrogate trials and algorithm-parameter sweeps.
//!
//! A trial is one short optimization run against the Gaussian-sum landscape;
//! a sweep repeats trials over a grid of optimizer settings and reports the
//! mean (and spread) of each cell's per-trial best fitness.
//!
//! Repetition `r` of grid cell `c` is seeded with
//! `derive_seed(base_seed, c, r)`; the cell index does not depend on the
//! σ value, so every σ sees the same seeds. Results are reduced in
//! repetition order, which makes the output independent of how the work
//! units were scheduled.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use serde::{Deserialize, Serialize};

use crate::fitness::{Surrogate, SurrogateParams};
use crate::ga::{PoolStrategy, Selection};
use crate::genome::{Genotype, ParameterSpace};
use crate::optimizer::{AlgorithmConfig, Optimizer};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Randomized generation plus four optimized ones.
pub const DEFAULT_ITERATIONS: u32 = 5;
pub const DEFAULT_REPETITIONS: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub config: AlgorithmConfig,
    pub sigma: f64,
    pub iterations: u32,
    pub seed: u64,
}

impl TrialSpec {
    pub fn new(config: AlgorithmConfig, sigma: f64, seed: u64) -> Self {
        TrialSpec { config, sigma, iterations: DEFAULT_ITERATIONS, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub best_fitness: f64,
    pub best_genotype: Genotype,
    /// Best fitness within each generation.
    pub generation_best: Vec<f64>,
    /// Best fitness over generations `0..=i`.
    pub best_so_far: Vec<f64>,
    /// Genotype achieving `best_so_far[i]`.
    pub best_so_far_genotype: Vec<Genotype>,
}

pub fn run_trial(space: &ParameterSpace, spec: &TrialSpec) -> Result<TrialResult> {
    if spec.iterations == 0 {
        return Err(Error::config("iterations", "must be at least 1"));
    }
    let params = SurrogateParams::new(spec.sigma)?;
    let surrogate = Surrogate::new(space.clone(), params);
    let mut opt = Optimizer::new(space.clone(), spec.config.clone(), spec.seed)?;
    let mut generation_best = Vec::with_capacity(spec.iterations as usize);
    let mut best_so_far = Vec::with_capacity(spec.iterations as usize);
    let mut best_so_far_genotype = Vec::with_capacity(spec.iterations as usize);
    for _ in 0..spec.iterations {
        let batch = opt.ask()?;
        let f: Vec<f64> = batch.iter().map(|g| surrogate.value(g)).collect();
        generation_best.push(f.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        opt.tell(&f)?;
        let (g, f) = opt.best().expect("a generation was just told");
        best_so_far.push(f);
        best_so_far_genotype.push(g.clone());
    }
    let (g, f) = opt.best().expect("at least one generation told");
    Ok(TrialResult { best_fitness: f, best_genotype: g.clone(), generation_best, best_so_far, best_so_far_genotype })
}

/// A value on one grid axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Bool(bool),
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<GridValue>,
}

impl GridAxis {
    pub fn numeric(name: &str, values: Vec<f64>) -> Self {
        GridAxis { name: name.to_string(), values: values.into_iter().map(GridValue::Num).collect() }
    }
}

fn num(field: &'static str, v: &GridValue) -> Result<f64> {
    match v {
        GridValue::Num(x) => Ok(*x),
        _ => Err(Error::config(field, "expected a number")),
    }
}

fn count(field: &'static str, v: &GridValue) -> Result<usize> {
    let x = num(field, v)?;
    if x < 0.0 || libm::trunc(x) != x {
        return Err(Error::config(field, "expected a nonnegative integer"));
    }
    Ok(x as usize)
}

/// Set one named field of a config from a grid value.
pub fn apply_param(config: &mut AlgorithmConfig, name: &str, value: &GridValue) -> Result<()> {
    match config {
        AlgorithmConfig::Ga(c) => match name {
            "selection" => {
                c.selection = match value {
                    GridValue::Text(s) if s == "rank" => Selection::Rank,
                    GridValue::Text(s) if s == "roulette" => Selection::Roulette,
                    _ => return Err(Error::config("selection", "expected `rank` or `roulette`")),
                }
            }
            "pool" => {
                c.pool = match value {
                    GridValue::Text(s) if s == "elite8" => PoolStrategy::Elite8,
                    GridValue::Text(s) if s == "all_history" => PoolStrategy::AllHistory,
                    _ => return Err(Error::config("pool", "expected `elite8` or `all_history`")),
                }
            }
            "m_min" => c.m_min = num("m_min", value)?,
            "m_max" => c.m_max = num("m_max", value)?,
            "rate" => {
                let r = num("rate", value)?;
                c.m_min = r;
                c.m_max = r;
            }
            "adaptive" => match value {
                GridValue::Bool(b) => c.adaptive = *b,
                _ => return Err(Error::config("adaptive", "expected true or false")),
            },
            "population" => c.population = count("population", value)?,
            "pairs" => c.pairs = count("pairs", value)?,
            _ => return Err(Error::config("grid", format!("unknown GA parameter `{name}`"))),
        },
        AlgorithmConfig::Pso(c) => match name {
            "w" => c.w = num("w", value)?,
            "c1" => c.c1 = num("c1", value)?,
            "c2" => c.c2 = num("c2", value)?,
            "swarm" => c.swarm = count("swarm", value)?,
            "max_dedup_steps" => c.max_dedup_steps = count("max_dedup_steps", value)?,
            _ => return Err(Error::config("grid", format!("unknown PSO parameter `{name}`"))),
        },
    }
    Ok(())
}

/// `0, step, 2 step, ..., to` on a decimal grid of tenths.
fn tenths_grid(to_tenths: u32, step_tenths: u32) -> Vec<f64> {
    (0..=to_tenths / step_tenths).map(|k| f64::from(k * step_tenths) / 10.0).collect()
}

/// Selection method x pool x adaptive `m_min` in 0..=2 x `m_max` in 0..=3
/// (step 0.1). Cells with `m_max < m_min` are skipped, leaving 1764.
pub fn full_ga_grid() -> Vec<GridAxis> {
    vec![
        GridAxis {
            name: "selection".into(),
            values: vec![GridValue::Text("rank".into()), GridValue::Text("roulette".into())],
        },
        GridAxis {
            name: "pool".into(),
            values: vec![GridValue::Text("elite8".into()), GridValue::Text("all_history".into())],
        },
        GridAxis { name: "adaptive".into(), values: vec![GridValue::Bool(true)] },
        GridAxis::numeric("m_min", tenths_grid(20, 1)),
        GridAxis::numeric("m_max", tenths_grid(30, 1)),
    ]
}

/// `w`, `c1`, `c2` each in 0..=3 with step 0.2: 4096 cells.
pub fn full_pso_grid() -> Vec<GridAxis> {
    ["w", "c1", "c2"].iter().map(|n| GridAxis::numeric(n, tenths_grid(30, 2))).collect()
}

pub fn pso_coefficient_values() -> Vec<f64> {
    tenths_grid(30, 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub config: AlgorithmConfig,
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub grid: Vec<GridAxis>,
    #[serde(default = "default_reps")]
    pub repetitions: u32,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: u32,
}

fn default_reps() -> u32 {
    DEFAULT_REPETITIONS
}

fn default_iterations() -> u32 {
    DEFAULT_ITERATIONS
}

/// One independent trial of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkUnit {
    pub sigma_index: usize,
    pub cell_index: usize,
    pub repetition: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub sigma: f64,
    pub config: AlgorithmConfig,
    pub mean_best: f64,
    pub std_best: f64,
    pub repetitions: u32,
    pub normalized_mean: f64,
}

impl SweepSpec {
    pub fn new(config: AlgorithmConfig, sigmas: Vec<f64>) -> Self {
        SweepSpec {
            config,
            sigmas,
            grid: Vec::new(),
            repetitions: DEFAULT_REPETITIONS,
            base_seed: 0,
            iterations: DEFAULT_ITERATIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::config("repetitions", "must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations", "must be at least 1"));
        }
        if self.sigmas.is_empty() {
            return Err(Error::config("sigmas", "at least one sigma is required"));
        }
        for &s in &self.sigmas {
            SurrogateParams::new(s)?;
        }
        for axis in &self.grid {
            if axis.values.is_empty() {
                return Err(Error::config("grid", format!("axis `{}` has no values", axis.name)));
            }
        }
        self.cells().map(|_| ())
    }

    /// The grid cells' configs, first axis varying slowest.
    ///
    /// GA cells with `m_max < m_min` are skipped; any other invalid cell is
    /// an error.
    pub fn cells(&self) -> Result<Vec<AlgorithmConfig>> {
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.grid.len()];
        loop {
            let mut cfg = self.config.clone();
            for (axis, &i) in self.grid.iter().zip(&idx) {
                apply_param(&mut cfg, &axis.name, &axis.values[i])?;
            }
            let skip = matches!(&cfg, AlgorithmConfig::Ga(c) if c.m_max < c.m_min);
            if !skip {
                cfg.validate()?;
                out.push(cfg);
            }
            // odometer with the last axis fastest
            let mut d = self.grid.len();
            loop {
                if d == 0 {
                    return Ok(out);
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < self.grid[d].values.len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    /// Work units ordered by σ, then cell, then repetition.
    pub fn work_units(&self, ncells: usize) -> Vec<WorkUnit> {
        let mut units = Vec::with_capacity(self.sigmas.len() * ncells * self.repetitions as usize);
        for sigma_index in 0..self.sigmas.len() {
            for cell_index in 0..ncells {
                for repetition in 0..self.repetitions {
                    units.push(WorkUnit { sigma_index, cell_index, repetition });
                }
            }
        }
        units
    }

    pub fn trial_spec(&self, cells: &[AlgorithmConfig], unit: WorkUnit) -> TrialSpec {
        TrialSpec {
            config: cells[unit.cell_index].clone(),
            sigma: self.sigmas[unit.sigma_index],
            iterations: self.iterations,
            seed: derive_seed(self.base_seed, unit.cell_index as u64, u64::from(unit.repetition)),
        }
    }

    /// Best fitness of one work unit's trial.
    pub fn run_unit(&self, space: &ParameterSpace, cells: &[AlgorithmConfig], unit: WorkUnit) -> Result<f64> {
        run_trial(space, &self.trial_spec(cells, unit)).map(|r| r.best_fitness)
    }

    /// Reduce per-unit results (in [`SweepSpec::work_units`] order) into
    /// normalized cells.
    pub fn assemble(&self, cells: &[AlgorithmConfig], results: &[f64]) -> Result<Vec<SweepCell>> {
        let reps = self.repetitions as usize;
        if results.len() != self.sigmas.len() * cells.len() * reps {
            return Err(Error::BatchSizeMismatch {
                expected: self.sigmas.len() * cells.len() * reps,
                got: results.len(),
            });
        }
        let mut out = Vec::with_capacity(self.sigmas.len() * cells.len());
        for (s, &sigma) in self.sigmas.iter().enumerate() {
            let mut group = Vec::with_capacity(cells.len());
            for (c, cfg) in cells.iter().enumerate() {
                let start = (s * cells.len() + c) * reps;
                let (mean_best, std_best) = mean_std(&results[start..start + reps]);
                group.push(SweepCell {
                    sigma,
                    config: cfg.clone(),
                    mean_best,
                    std_best,
                    repetitions: self.repetitions,
                    normalized_mean: 0.0,
                });
            }
            normalize_within_sigma(&mut group)?;
            out.extend(group);
        }
        Ok(out)
    }
}

/// Sequential sweep; see the `lightswim` crate for the parallel driver.
pub fn run_sweep(space: &ParameterSpace, spec: &SweepSpec) -> Result<Vec<SweepCell>> {
    spec.validate()?;
    let cells = spec.cells()?;
    let results = spec
        .work_units(cells.len())
        .into_iter()
        .map(|u| spec.run_unit(space, &cells, u))
        .collect::<Result<Vec<f64>>>()?;
    spec.assemble(&cells, &results)
}

/// Mean and sample standard deviation, accumulated in slice order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1) as f64))
}

/// Divide each cell's mean by the best mean of the group.
pub fn normalize_within_sigma(cells: &mut [SweepCell]) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::EmptyInput("no cells to normalize"));
    }
    let sigma = cells[0].sigma;
    if cells.iter().any(|c| c.sigma != sigma) {
        return Err(Error::config("sigma", "cells of one normalization group must share sigma"));
    }
    let max = cells.iter().map(|c| c.mean_best).fold(f64::NEG_INFINITY, f64::max);
    for c in cells.iter_mut() {
        c.normalized_mean = if max > 0.0 { c.mean_best / max } else { 1.0 };
    }
    Ok(())
}
