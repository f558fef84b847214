//! Parameter-space documents.
//!
//! TOML (or JSON, picked by a `.json` extension) with one `[[dimension]]`
//! entry per axis:
//!
//! ```toml
//! [[dimension]]
//! name = "polarization_angle"
//! unit = "deg"
//! values = [0.0, 15.0, 30.0]
//! periodic = true
//! period = 180.0
//! ```

use std::path::Path;

use lightswim_core::{DimensionSpec, ParameterSpace};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SpaceFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed space document: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionEntry {
    pub name: String,
    #[serde(default)]
    pub unit: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub periodic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDocument {
    pub dimension: Vec<DimensionEntry>,
}

impl SpaceDocument {
    pub fn from_space(space: &ParameterSpace) -> Self {
        let dimension = space
            .dimensions()
            .iter()
            .map(|d| DimensionEntry {
                name: d.name.clone(),
                unit: d.unit.clone(),
                values: d.values.clone(),
                periodic: d.is_periodic(),
                period: d.period,
            })
            .collect();
        SpaceDocument { dimension }
    }

    pub fn build(&self) -> Result<ParameterSpace, SpaceFileError> {
        let mut dims = Vec::with_capacity(self.dimension.len());
        for e in &self.dimension {
            let period = match (e.periodic, e.period) {
                (true, Some(p)) => Some(p),
                (false, None) => None,
                (true, None) => {
                    return Err(SpaceFileError::Invalid(format!("dimension `{}`: periodic without a period", e.name)))
                }
                (false, Some(_)) => {
                    return Err(SpaceFileError::Invalid(format!(
                        "dimension `{}`: period given but periodic = false",
                        e.name
                    )))
                }
            };
            let d = DimensionSpec::new(e.name.clone(), e.unit.clone(), e.values.clone(), period)
                .map_err(|e| SpaceFileError::Invalid(e.to_string()))?;
            dims.push(d);
        }
        ParameterSpace::new(dims).map_err(|e| SpaceFileError::Invalid(e.to_string()))
    }
}

pub fn parse_toml(text: &str) -> Result<ParameterSpace, SpaceFileError> {
    let doc: SpaceDocument = toml::from_str(text).map_err(|e| SpaceFileError::Parse(e.to_string()))?;
    doc.build()
}

pub fn parse_json(text: &str) -> Result<ParameterSpace, SpaceFileError> {
    let doc: SpaceDocument = serde_json::from_str(text).map_err(|e| SpaceFileError::Parse(e.to_string()))?;
    doc.build()
}

pub fn to_toml(space: &ParameterSpace) -> String {
    toml::to_string(&SpaceDocument::from_space(space)).expect("space documents always serialize")
}

pub fn to_json(space: &ParameterSpace) -> String {
    serde_json::to_string_pretty(&SpaceDocument::from_space(space)).expect("space documents always serialize")
}

pub fn load(path: &Path) -> Result<ParameterSpace, SpaceFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SpaceFileError::Io { path: path.display().to_string(), source })?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        parse_json(&text)
    } else {
        parse_toml(&text)
    }
}

/// The given file, or the built-in default space.
pub fn load_or_default(path: Option<&Path>) -> Result<ParameterSpace, SpaceFileError> {
    match path {
        Some(p) => load(p),
        None => Ok(ParameterSpace::default_space()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_space_round_trips() {
        let s = ParameterSpace::default_space();
        assert_eq!(parse_toml(&to_toml(&s)).unwrap(), s);
        assert_eq!(parse_json(&to_json(&s)).unwrap(), s);
    }

    #[test]
    fn periodic_flag_and_period_must_agree() {
        let bad = "[[dimension]]\nname='a'\nvalues=[0.0,1.0]\nperiodic=true\n";
        assert!(matches!(parse_toml(bad), Err(SpaceFileError::Invalid(_))));
        let bad = "[[dimension]]\nname='a'\nvalues=[0.0,1.0]\nperiod=2.0\n";
        assert!(matches!(parse_toml(bad), Err(SpaceFileError::Invalid(_))));
        let ok = "[[dimension]]\nname='a'\nunit='deg'\nvalues=[0.0,90.0]\nperiodic=true\nperiod=180.0\n";
        let s = parse_toml(ok).unwrap();
        assert_eq!(s.dimension(0).period, Some(180.0));
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(matches!(parse_toml("dimension = 3"), Err(SpaceFileError::Parse(_))));
        assert!(matches!(parse_toml("[[dimension]]\nname='a'\nvalues=[1.0]\n"), Err(SpaceFileError::Invalid(_))));
        assert!(matches!(
            parse_toml("[[dimension]]\nname='a'\nvalues=[0.0,1.0]\nbogus=1\n"),
            Err(SpaceFileError::Parse(_))
        ));
    }
}
