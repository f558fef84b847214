//! Fitness providers.
//!
//! [`Surrogate`] is the Gaussian-sum benchmark landscape used for the
//! simulation study; [`MeasuredFitness`] serves values entered by an
//! operator and reports `None` for points that have not been raced yet.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::genome::{Genotype, ParameterSpace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Surrogate,
    External,
}

pub trait FitnessProvider {
    fn kind(&self) -> ProviderKind;

    /// `None` when the value is not available yet (external measurements).
    fn evaluate(&self, genotype: &Genotype) -> Option<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateParams {
    pub sigma: f64,
    #[serde(default = "default_peak")]
    pub peak_fraction: f64,
}

fn default_peak() -> f64 {
    0.75
}

impl SurrogateParams {
    pub fn new(sigma: f64) -> Result<Self> {
        let p = SurrogateParams { sigma, peak_fraction: default_peak() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::config("sigma", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.peak_fraction) {
            return Err(Error::config("peak_fraction", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Height of one dimension's peak, `1 / (sigma sqrt(2 pi))`.
    pub fn peak_height(&self) -> f64 {
        1.0 / (self.sigma * libm::sqrt(2.0 * PI))
    }

    /// Contribution of a single normalized coordinate.
    pub fn term(&self, normalized: f64) -> f64 {
        let z = (normalized - self.peak_fraction) / self.sigma;
        libm::exp(-0.5 * z * z) * self.peak_height()
    }

    /// Sum of per-dimension normal densities over normalized coordinates.
    pub fn evaluate_normalized(&self, normalized: &[f64]) -> f64 {
        normalized.iter().map(|&n| self.term(n)).sum()
    }

    /// Supremum over the continuous cube: every coordinate at the peak.
    pub fn upper_bound(&self, ndims: usize) -> f64 {
        ndims as f64 * self.peak_height()
    }
}

/// Gaussian-sum value of a grid point.
pub fn gaussian_sum(space: &ParameterSpace, g: &Genotype, params: &SurrogateParams) -> f64 {
    params.evaluate_normalized(&space.normalize(g))
}

/// Exact maximizer of [`gaussian_sum`] over the grid.
///
/// The landscape is a sum of one-dimensional terms, so each gene is chosen
/// independently: the value whose normalized coordinate scores highest, the
/// lower index on ties.
pub fn argmax_oracle(space: &ParameterSpace, params: &SurrogateParams) -> (Genotype, f64) {
    let mut indices = Vec::with_capacity(space.ndims());
    let mut total = 0.0;
    for dim in space.dimensions() {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, &v) in dim.values.iter().enumerate() {
            let t = params.term((v - dim.min()) / dim.range());
            if t > best.1 {
                best = (i, t);
            }
        }
        indices.push(best.0);
        total += best.1;
    }
    (Genotype(indices), total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub space: ParameterSpace,
    pub params: SurrogateParams,
}

impl Surrogate {
    pub fn new(space: ParameterSpace, params: SurrogateParams) -> Self {
        Surrogate { space, params }
    }

    pub fn value(&self, g: &Genotype) -> f64 {
        gaussian_sum(&self.space, g, &self.params)
    }
}

impl FitnessProvider for Surrogate {
    fn kind(&self) -> ProviderKind {
        ProviderKind::Surrogate
    }

    fn evaluate(&self, genotype: &Genotype) -> Option<f64> {
        Some(self.value(genotype))
    }
}

/// Operator-entered values keyed by genotype.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasuredFitness {
    values: BTreeMap<Genotype, f64>,
}

impl MeasuredFitness {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, genotype: Genotype, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidFitness(value));
        }
        self.values.insert(genotype, value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FitnessProvider for MeasuredFitness {
    fn kind(&self) -> ProviderKind {
        ProviderKind::External
    }

    fn evaluate(&self, genotype: &Genotype) -> Option<f64> {
        self.values.get(genotype).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::DimensionSpec;
    use crate::rng::engine_rng;
    use alloc::vec;
    use rand::Rng;

    const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

    #[test]
    fn all_peak_value() {
        for sigma in [0.05, 0.1, 0.25, 0.5] {
            let p = SurrogateParams::new(sigma).unwrap();
            let v = p.evaluate_normalized(&[0.75; 8]);
            assert!((v - 8.0 / (sigma * SQRT_2PI)).abs() < 1e-9);
            assert!((v - p.upper_bound(8)).abs() < 1e-12);
        }
        let v = SurrogateParams::new(0.5).unwrap().evaluate_normalized(&[0.75; 8]);
        assert!((v - 6.383_076_486).abs() < 1e-8, "{v}");
    }

    #[test]
    fn one_dimension_off_peak() {
        let p = SurrogateParams::new(0.25).unwrap();
        let mut n = [0.75; 8];
        n[3] = 0.25;
        let h = 1.0 / (0.25 * SQRT_2PI);
        let expected = 7.0 * h + (-2.0f64).exp() * h;
        let v = p.evaluate_normalized(&n);
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 11.386_348).abs() < 1e-6, "{v}");
    }

    #[test]
    fn symmetric_about_peak() {
        let p = SurrogateParams::new(0.1).unwrap();
        for dz in [0.0, 0.05, 0.2, 0.5] {
            assert!((p.term(0.75 + dz) - p.term(0.75 - dz)).abs() < 1e-12);
        }
    }

    #[test]
    fn invariant_under_unit_relabeling() {
        let s = ParameterSpace::default_space();
        let mut dims = s.dimensions().to_vec();
        dims[0].values = dims[0].values.iter().map(|v| v * 1000.0 + 3.0).collect();
        dims[0].unit = "mW".into();
        let t = ParameterSpace::new(dims).unwrap();
        let p = SurrogateParams::new(0.25).unwrap();
        let mut rng = engine_rng(1);
        for _ in 0..100 {
            let g = s.random_genotype(&mut rng);
            assert!((gaussian_sum(&s, &g, &p) - gaussian_sum(&t, &g, &p)).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_dimension_argmax_is_one() {
        let s = ParameterSpace::new(vec![DimensionSpec::new("b", "", vec![0.0, 1.0], None).unwrap()]).unwrap();
        let (g, _) = argmax_oracle(&s, &SurrogateParams::new(0.25).unwrap());
        assert_eq!(g.0, vec![1]);
    }

    #[test]
    fn default_space_argmax_nearest_to_peak() {
        let s = ParameterSpace::default_space();
        let p = SurrogateParams::new(0.25).unwrap();
        let (g, v) = argmax_oracle(&s, &p);
        let n = s.normalize(&g);
        for (d, dim) in s.dimensions().iter().enumerate() {
            let best = dim
                .values
                .iter()
                .map(|&x| libm::fabs((x - dim.min()) / dim.range() - 0.75))
                .fold(f64::INFINITY, f64::min);
            assert!((libm::fabs(n[d] - 0.75) - best).abs() < 1e-12);
        }
        assert!((v - gaussian_sum(&s, &g, &p)).abs() < 1e-12);
        assert!(v <= p.upper_bound(8));
    }

    fn exhaustive_argmax(space: &ParameterSpace, p: &SurrogateParams) -> f64 {
        let sizes: Vec<usize> = space.dimensions().iter().map(|d| d.len()).collect();
        let mut idx = vec![0usize; sizes.len()];
        let mut best = f64::NEG_INFINITY;
        loop {
            best = best.max(gaussian_sum(space, &Genotype(idx.clone()), p));
            let mut d = 0;
            loop {
                if d == sizes.len() {
                    return best;
                }
                idx[d] += 1;
                if idx[d] < sizes[d] {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    #[test]
    fn separable_argmax_matches_exhaustive_on_subspaces() {
        let full = ParameterSpace::default_space();
        let mut rng = engine_rng(77);
        for _ in 0..30 {
            let mut dims: Vec<DimensionSpec> = full.dimensions().to_vec();
            // random 3-dimension subspace with random value subsets
            while dims.len() > 3 {
                let i = rng.random_range(0..dims.len());
                dims.remove(i);
            }
            let space = ParameterSpace::new(dims).unwrap();
            let p = SurrogateParams::new([0.05, 0.1, 0.25, 0.5][rng.random_range(0..4)]).unwrap();
            let (g, v) = argmax_oracle(&space, &p);
            let brute = exhaustive_argmax(&space, &p);
            assert!((v - brute).abs() < 1e-12);
            assert!((gaussian_sum(&space, &g, &p) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn measured_provider_defers_unknown_points() {
        let mut m = MeasuredFitness::new();
        let g = Genotype(vec![0, 1]);
        assert_eq!(m.evaluate(&g), None);
        m.record(g.clone(), 2.5).unwrap();
        assert_eq!(m.evaluate(&g), Some(2.5));
        assert!(m.record(g, -1.0).is_err());
        assert_eq!(m.kind(), ProviderKind::External);
    }
}
