//! The quantized parameter space and its points.
//!
//! A [`Genotype`] stores one value *index* per dimension; raw values are
//! looked up on demand. Keeping indices makes equality, mutation and
//! journaling exact.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One axis of the search grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
    /// Present iff the dimension wraps around (e.g. a polarization angle).
    pub period: Option<f64>,
}

impl DimensionSpec {
    pub fn new(
        name: impl Into<String>,
        unit: impl Into<String>,
        values: Vec<f64>,
        period: Option<f64>,
    ) -> Result<Self> {
        let dim = DimensionSpec { name: name.into(), unit: unit.into(), values, period };
        dim.validate()?;
        Ok(dim)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpace(format!("dimension `{}`: {msg}", self.name)));
        if self.name.is_empty() {
            return Err(Error::InvalidSpace("dimension with empty name".to_string()));
        }
        if self.values.len() < 2 {
            return bad(format!("needs at least 2 values, has {}", self.values.len()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("values must be finite".to_string());
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("values must be strictly increasing".to_string());
        }
        if let Some(p) = self.period {
            if !(p.is_finite() && p > 0.0) {
                return bad(format!("period must be positive, got {p}"));
            }
            if self.values.iter().any(|&v| v < 0.0 || v >= p) {
                return bad(format!("periodic values must lie in [0, {p})"));
            }
        }
        Ok(())
    }

    pub fn is_periodic(&self) -> bool {
        self.period.is_some()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Full value range `max - min`; also the PSO velocity clamp.
    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }

    fn distance(&self, x: f64, v: f64) -> f64 {
        match self.period {
            Some(p) => {
                let d = libm::fabs(x - v) % p;
                if p - d < d {
                    p - d
                } else {
                    d
                }
            }
            None => libm::fabs(x - v),
        }
    }

    /// Index of the nearest grid value; ties go to the lower index.
    pub fn nearest_index(&self, x: f64) -> usize {
        let x = match self.period {
            Some(p) => wrap(x, p),
            None => x,
        };
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &v) in self.values.iter().enumerate() {
            let d = self.distance(x, v);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Human-readable `value unit` string.
    pub fn label(&self, index: usize) -> String {
        let v = self.values[index];
        if self.unit.is_empty() {
            format!("{v}")
        } else {
            format!("{v} {}", self.unit)
        }
    }
}

/// Reduce `x` into `[0, period)`.
pub(crate) fn wrap(x: f64, period: f64) -> f64 {
    let r = x - period * libm::floor(x / period);
    // x slightly below a multiple of the period can round up to `period`
    if r >= period {
        0.0
    } else {
        r
    }
}

/// The ordered set of dimensions making up the search grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DimensionSpec>", into = "Vec<DimensionSpec>")]
pub struct ParameterSpace {
    dimensions: Vec<DimensionSpec>,
}

impl TryFrom<Vec<DimensionSpec>> for ParameterSpace {
    type Error = Error;

    fn try_from(dimensions: Vec<DimensionSpec>) -> Result<Self> {
        ParameterSpace::new(dimensions)
    }
}

impl From<ParameterSpace> for Vec<DimensionSpec> {
    fn from(space: ParameterSpace) -> Self {
        space.dimensions
    }
}

/// `k * step_tenths / 10` for `k` in `from..=to`, computed so each value is
/// the correctly rounded decimal.
fn tenths(from: u32, to: u32, step_tenths: u32) -> Vec<f64> {
    (from..=to).map(|k| f64::from(k * step_tenths) / 10.0).collect()
}

impl ParameterSpace {
    pub fn new(dimensions: Vec<DimensionSpec>) -> Result<Self> {
        if dimensions.is_empty() {
            return Err(Error::InvalidSpace("no dimensions".to_string()));
        }
        for (i, d) in dimensions.iter().enumerate() {
            d.validate()?;
            if dimensions[..i].iter().any(|o| o.name == d.name) {
                return Err(Error::InvalidSpace(format!("duplicate dimension name `{}`", d.name)));
            }
        }
        Ok(ParameterSpace { dimensions })
    }

    /// The eight-dimensional robot/actuation grid, 345,600 points.
    pub fn default_space() -> Self {
        let dim = |name: &str, unit: &str, values: Vec<f64>, period: Option<f64>| DimensionSpec {
            name: name.to_string(),
            unit: unit.to_string(),
            values,
            period,
        };
        let dimensions = vec![
            dim("laser_power", "W", tenths(1, 8, 4), None),
            dim("scan_frequency", "Hz", tenths(1, 50, 1), None),
            dim("polarization_angle", "deg", (0..12).map(|k| f64::from(k * 15)).collect(), Some(180.0)),
            dim("thickness", "um", vec![50.0, 90.0], None),
            dim("length", "mm", vec![6.0, 12.0, 18.0], None),
            dim("curl_length", "mm", vec![1.0, 2.0, 3.0], None),
            dim("tail_direction", "", vec![0.0, 1.0], None),
            dim("dye_concentration", "mol%", vec![0.2, 1.0], None),
        ];
        ParameterSpace::new(dimensions).expect("default space is valid")
    }

    pub fn dimensions(&self) -> &[DimensionSpec] {
        &self.dimensions
    }

    pub fn dimension(&self, d: usize) -> &DimensionSpec {
        &self.dimensions[d]
    }

    pub fn ndims(&self) -> usize {
        self.dimensions.len()
    }

    /// Number of grid points (product of per-dimension value counts).
    pub fn cardinality(&self) -> u64 {
        self.dimensions.iter().map(|d| d.len() as u64).product()
    }

    /// Per-dimension `max - min`.
    pub fn ranges(&self) -> Vec<f64> {
        self.dimensions.iter().map(DimensionSpec::range).collect()
    }

    pub fn contains(&self, g: &Genotype) -> bool {
        g.len() == self.ndims() && g.0.iter().zip(&self.dimensions).all(|(&i, d)| i < d.len())
    }

    pub fn check(&self, g: &Genotype) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::InvalidSpace(format!("genotype {:?} is not a point of this space", g.0)))
        }
    }

    /// Each index uniform over its dimension, dimensions drawn in order.
    pub fn random_genotype<R: Rng + ?Sized>(&self, rng: &mut R) -> Genotype {
        Genotype(self.dimensions.iter().map(|d| rng.random_range(0..d.len())).collect())
    }

    /// `n` pairwise-distinct random genotypes (rejection sampling).
    pub fn random_population<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Genotype>> {
        if n as u64 > self.cardinality() {
            return Err(Error::SearchSpaceExhausted);
        }
        let mut out: Vec<Genotype> = Vec::with_capacity(n);
        while out.len() < n {
            let g = self.random_genotype(rng);
            if !out.contains(&g) {
                out.push(g);
            }
        }
        Ok(out)
    }

    /// Raw values (in each dimension's unit) of a genotype.
    pub fn values_of(&self, g: &Genotype) -> Vec<f64> {
        g.0.iter().zip(&self.dimensions).map(|(&i, d)| d.values[i]).collect()
    }

    /// Map to `[0,1]^n` by `(value - min) / (max - min)` per dimension.
    ///
    /// Periodic dimensions are treated as the plain interval `[min, max]`.
    pub fn normalize(&self, g: &Genotype) -> Vec<f64> {
        g.0.iter().zip(&self.dimensions).map(|(&i, d)| (d.values[i] - d.min()) / d.range()).collect()
    }

    /// Nearest grid point to a raw-unit vector.
    pub fn quantize(&self, x: &[f64]) -> Genotype {
        debug_assert_eq!(x.len(), self.ndims());
        Genotype(x.iter().zip(&self.dimensions).map(|(&v, d)| d.nearest_index(v)).collect())
    }

    /// Replace gene `d` with a uniformly drawn *different* value.
    pub fn mutate_gene<R: Rng + ?Sized>(&self, g: &Genotype, d: usize, rng: &mut R) -> Genotype {
        let n = self.dimensions[d].len();
        let current = g.0[d];
        let mut pick = rng.random_range(0..n - 1);
        if pick >= current {
            pick += 1;
        }
        let mut out = g.clone();
        out.0[d] = pick;
        out
    }

    /// Mutate one uniformly chosen gene.
    pub fn mutate_random_gene<R: Rng + ?Sized>(&self, g: &Genotype, rng: &mut R) -> Genotype {
        let d = rng.random_range(0..self.ndims());
        self.mutate_gene(g, d, rng)
    }

    pub fn labels(&self, g: &Genotype) -> Vec<String> {
        g.0.iter().zip(&self.dimensions).map(|(&i, d)| d.label(i)).collect()
    }
}

impl Default for ParameterSpace {
    fn default() -> Self {
        ParameterSpace::default_space()
    }
}

/// One grid point: a value index per dimension.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genotype(pub Vec<usize>);

impl Genotype {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of positions where two genotypes differ.
    pub fn hamming(&self, other: &Genotype) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl From<Vec<usize>> for Genotype {
    fn from(v: Vec<usize>) -> Self {
        Genotype(v)
    }
}

/// A genotype together with its fitness and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedIndividual {
    pub id: u64,
    pub genotype: Genotype,
    pub fitness: f64,
    pub generation: u32,
}
