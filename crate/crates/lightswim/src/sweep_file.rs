//! Sweep documents (TOML).
//!
//! ```toml
//! algorithm = "pso"
//! sigmas = [0.05, 0.1, 0.25, 0.5]
//! repetitions = 1000
//! base_seed = 1
//! iterations = 5
//! preset = "full"         # optional; the full grid for the algorithm
//!
//! [config]                # optional base-config overrides
//! c1 = 0.2
//!
//! [[grid]]                # optional extra axes, applied after the preset
//! name = "c2"
//! values = [0.6, 1.0, 1.4]
//! ```

use std::path::Path;

use lightswim_core::optimizer::{Algorithm, AlgorithmConfig};
use lightswim_core::sweep::{self, GridAxis, SweepSpec, DEFAULT_ITERATIONS, DEFAULT_REPETITIONS};
use lightswim_core::{GaConfig, PsoConfig};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum SweepFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed sweep document: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Full,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDocument {
    algorithm: Algorithm,
    sigmas: Vec<f64>,
    #[serde(default = "default_reps")]
    repetitions: u32,
    #[serde(default)]
    base_seed: u64,
    #[serde(default = "default_iterations")]
    iterations: u32,
    #[serde(default)]
    preset: Option<Preset>,
    #[serde(default)]
    config: Option<toml::Table>,
    #[serde(default)]
    grid: Vec<GridAxis>,
}

fn default_reps() -> u32 {
    DEFAULT_REPETITIONS
}

fn default_iterations() -> u32 {
    DEFAULT_ITERATIONS
}

/// The preset grid for `algorithm`.
pub fn preset_grid(algorithm: Algorithm, preset: Preset) -> Vec<GridAxis> {
    match (algorithm, preset) {
        (Algorithm::Ga, Preset::Full) => sweep::full_ga_grid(),
        (Algorithm::Pso, Preset::Full) => sweep::full_pso_grid(),
    }
}

pub fn parse(text: &str) -> Result<SweepSpec, SweepFileError> {
    let doc: SweepDocument = toml::from_str(text).map_err(|e| SweepFileError::Parse(e.to_string()))?;
    let table = doc.config.unwrap_or_default();
    let config = match doc.algorithm {
        Algorithm::Ga => {
            AlgorithmConfig::Ga(table.try_into::<GaConfig>().map_err(|e| SweepFileError::Parse(e.to_string()))?)
        }
        Algorithm::Pso => {
            AlgorithmConfig::Pso(table.try_into::<PsoConfig>().map_err(|e| SweepFileError::Parse(e.to_string()))?)
        }
    };
    let mut grid = doc.preset.map(|p| preset_grid(doc.algorithm, p)).unwrap_or_default();
    grid.extend(doc.grid);
    let spec = SweepSpec {
        config,
        sigmas: doc.sigmas,
        grid,
        repetitions: doc.repetitions,
        base_seed: doc.base_seed,
        iterations: doc.iterations,
    };
    spec.validate().map_err(|e| SweepFileError::Invalid(e.to_string()))?;
    Ok(spec)
}

pub fn load(path: &Path) -> Result<SweepSpec, SweepFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SweepFileError::Io { path: path.display().to_string(), source })?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_document() {
        let spec = parse(
            r#"
            algorithm = "pso"
            sigmas = [0.1, 0.25]
            repetitions = 10
            base_seed = 3
            [config]
            c1 = 0.0
            [[grid]]
            name = "c2"
            values = [0.6, 1.4]
            "#,
        )
        .unwrap();
        assert_eq!(spec.repetitions, 10);
        assert_eq!(spec.iterations, 5);
        assert_eq!(spec.cells().unwrap().len(), 2);
        match &spec.config {
            AlgorithmConfig::Pso(c) => assert_eq!((c.w, c.c1, c.c2), (0.0, 0.0, 1.4)),
            _ => panic!("expected pso"),
        }
    }

    #[test]
    fn presets_expand() {
        let ga = parse("algorithm='ga'\nsigmas=[0.1]\npreset='full'\n").unwrap();
        assert_eq!(ga.cells().unwrap().len(), 1764);
        let pso = parse("algorithm='pso'\nsigmas=[0.1]\npreset='full'\n").unwrap();
        assert_eq!(pso.cells().unwrap().len(), 4096);
    }

    #[test]
    fn invalid_documents() {
        assert!(matches!(parse("algorithm='ga'\n"), Err(SweepFileError::Parse(_))));
        assert!(matches!(parse("algorithm='ga'\nsigmas=[0.1]\nrepetitions=0\n"), Err(SweepFileError::Invalid(_))));
        assert!(matches!(parse("algorithm='ga'\nsigmas=[-1.0]\n"), Err(SweepFileError::Invalid(_))));
        assert!(matches!(
            parse("algorithm='pso'\nsigmas=[0.1]\n[[grid]]\nname='pool'\nvalues=['elite8']\n"),
            Err(SweepFileError::Invalid(_))
        ));
        assert!(matches!(parse("algorithm='ga'\nsigmas=[0.1]\nextra=1\n"), Err(SweepFileError::Parse(_))));
    }
}
