//! Uniform grids in one to three dimensions, the fields sampled on them, and
//! the dyadic annulus bookkeeping shared by every norm in the crate.
//!
//! Samples sit at `x_i = center_i + (j - (N_i - 1) / 2) * h_i` and are stored
//! row-major with the last axis fastest. Every integral is a midpoint-rule sum
//! with weight `h_1 * ... * h_n`; fields are zero outside the grid.

mod annulus;
mod exponent;
pub mod expr;
pub mod hsf;

pub use annulus::{build_annuli, pow2, AnnulusDecomposition, AnnulusMode, Shell};
pub use exponent::{Exponent, ExponentVector};
pub use expr::{sample_expression, Expr};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    samples: Vec<usize>,
    spacing: Vec<f64>,
    center: Vec<f64>,
}

impl GridSpec {
    pub fn new(samples: Vec<usize>, spacing: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        let dim = samples.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if spacing.len() != dim || center.len() != dim {
            return Err(Error::InvalidGrid(
                "samples, spacing and center must have one entry per axis".into(),
            ));
        }
        if samples.contains(&0) {
            return Err(Error::InvalidGrid("every axis needs at least one sample".into()));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidGrid("spacing must be positive and finite".into()));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGrid("center must be finite".into()));
        }
        samples
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&total| total <= isize::MAX as usize / 8)
            .ok_or_else(|| Error::InvalidGrid("sample count overflows memory".into()))?;
        Ok(Self { samples, spacing, center })
    }

    /// Grid centered at the origin with the same sample count and spacing on every axis.
    pub fn uniform(dim: usize, samples: usize, spacing: f64) -> Result<Self> {
        Self::new(vec![samples; dim], vec![spacing; dim], vec![0.0; dim])
    }

    /// `samples` cells of equal width tiling `[lo, hi]` on every axis, sampled at midpoints.
    pub fn tiling(dim: usize, lo: f64, hi: f64, samples: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidGrid(format!("empty interval [{lo}, {hi}]")));
        }
        if samples == 0 {
            return Err(Error::InvalidGrid("every axis needs at least one sample".into()));
        }
        let h = (hi - lo) / samples as f64;
        Self::new(vec![samples; dim], vec![h; dim], vec![0.5 * (lo + hi); dim])
    }

    /// `samples` points on every axis including both endpoints of `[lo, hi]`.
    pub fn spanning(dim: usize, lo: f64, hi: f64, samples: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidGrid(format!("empty interval [{lo}, {hi}]")));
        }
        if samples < 2 {
            return Err(Error::InvalidGrid("a spanning grid needs at least two samples per axis".into()));
        }
        let h = (hi - lo) / (samples - 1) as f64;
        Self::new(vec![samples; dim], vec![h; dim], vec![0.5 * (lo + hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[usize] {
        &self.samples
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn len(&self) -> usize {
        self.samples.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of a single sample.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    pub fn strides(&self) -> [usize; MAX_DIM] {
        let mut strides = [0; MAX_DIM];
        let mut acc = 1;
        for axis in (0..self.dim()).rev() {
            strides[axis] = acc;
            acc *= self.samples[axis];
        }
        strides
    }

    #[inline]
    pub fn coord(&self, axis: usize, j: usize) -> f64 {
        let half = (self.samples[axis] as f64 - 1.0) / 2.0;
        self.center[axis] + (j as f64 - half) * self.spacing[axis]
    }

    #[inline]
    pub fn unravel(&self, mut index: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for axis in (0..self.dim()).rev() {
            idx[axis] = index % self.samples[axis];
            index /= self.samples[axis];
        }
        idx
    }

    #[inline]
    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.samples)
            .fold(0, |acc, (&j, &n)| acc * n + j)
    }

    /// Coordinates of sample `index`; unused trailing entries are zero.
    #[inline]
    pub fn point(&self, index: usize) -> [f64; MAX_DIM] {
        let idx = self.unravel(index);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim() {
            x[axis] = self.coord(axis, idx[axis]);
        }
        x
    }

    #[inline]
    pub fn radius(&self, index: usize) -> f64 {
        let x = self.point(index);
        x[..self.dim()].iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.radius(i)).collect()
    }

    /// Diameter of the box spanned by the sample points.
    pub fn diameter(&self) -> f64 {
        self.samples
            .iter()
            .zip(&self.spacing)
            .map(|(&n, &h)| ((n - 1) as f64 * h).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Same sample layout with every spacing multiplied by `factor` (centers too).
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.samples.clone(),
            self.spacing.iter().map(|h| h * factor).collect(),
            self.center.iter().map(|c| c * factor).collect(),
        )
    }
}

/// A real field on a [`GridSpec`]. Values are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl SampledField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: &GridSpec) -> Self {
        Self { values: vec![0.0; spec.len()], spec: spec.clone() }
    }

    pub fn constant(spec: &GridSpec, c: f64) -> Self {
        assert!(c.is_finite());
        Self { values: vec![c; spec.len()], spec: spec.clone() }
    }

    /// Samples `f` at every grid point. `f` receives a slice of length `dim`.
    pub fn from_fn(spec: &GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let dim = spec.dim();
        let values = (0..spec.len())
            .map(|i| {
                let x = spec.point(i);
                f(&x[..dim])
            })
            .collect();
        Self::new(spec.clone(), values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise map. Panics if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        assert!(values.iter().all(|v| v.is_finite()), "map produced a non-finite value");
        Self { spec: self.spec.clone(), values }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.spec.clone(), values)
    }

    /// Per-axis index bounds `[lo, hi]` of the nonzero samples, or `None` for the zero field.
    pub fn support_bounds(&self) -> Option<[(usize, usize); MAX_DIM]> {
        let dim = self.spec.dim();
        let mut bounds = [(usize::MAX, 0); MAX_DIM];
        let mut any = false;
        for (i, &v) in self.values.iter().enumerate() {
            if v != 0.0 {
                any = true;
                let idx = self.spec.unravel(i);
                for axis in 0..dim {
                    bounds[axis].0 = bounds[axis].0.min(idx[axis]);
                    bounds[axis].1 = bounds[axis].1.max(idx[axis]);
                }
            }
        }
        any.then_some(bounds)
    }
}

/// `f` on the listed samples, zero elsewhere. Realizes `f * 1_S` for an index set `S`.
pub fn restrict(f: &SampledField, indices: &[usize]) -> Result<SampledField> {
    let len = f.len();
    let mut values = vec![0.0; len];
    for &i in indices {
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
        values[i] = f.values[i];
    }
    Ok(SampledField { spec: f.spec.clone(), values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_are_centered() {
        let spec = GridSpec::uniform(1, 5, 0.5).unwrap();
        let xs: Vec<f64> = (0..5).map(|j| spec.coord(0, j)).collect();
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn tiling_midpoints() {
        let spec = GridSpec::tiling(1, 0.0, 1.0, 4).unwrap();
        let xs: Vec<f64> = (0..4).map(|j| spec.coord(0, j)).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(spec.cell_volume(), 0.25);
    }

    #[test]
    fn ravel_unravel_roundtrip() {
        let spec = GridSpec::new(vec![3, 4, 5], vec![1.0; 3], vec![0.0; 3]).unwrap();
        for i in 0..spec.len() {
            let idx = spec.unravel(i);
            assert_eq!(spec.ravel(&idx[..3]), i);
        }
        // last axis fastest
        assert_eq!(spec.unravel(1), [0, 0, 1]);
        assert_eq!(spec.strides(), [20, 5, 1]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(vec![], vec![], vec![]).is_err());
        assert!(GridSpec::new(vec![2; 4], vec![1.0; 4], vec![0.0; 4]).is_err());
        assert!(GridSpec::new(vec![0], vec![1.0], vec![0.0]).is_err());
        assert!(GridSpec::new(vec![3], vec![-1.0], vec![0.0]).is_err());
        assert!(GridSpec::new(vec![3], vec![1.0, 1.0], vec![0.0]).is_err());
    }

    #[test]
    fn field_rejects_non_finite() {
        let spec = GridSpec::uniform(1, 3, 1.0).unwrap();
        let err = SampledField::new(spec, vec![0.0, f64::NAN, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 1 }));
    }

    #[test]
    fn restrict_identity_and_empty() {
        let spec = GridSpec::uniform(2, 4, 0.5).unwrap();
        let f = SampledField::from_fn(&spec, |x| x[0] + 2.0 * x[1]).unwrap();
        let all: Vec<usize> = (0..spec.len()).collect();
        assert_eq!(restrict(&f, &all).unwrap(), f);
        assert!(restrict(&f, &[]).unwrap().is_zero());
        assert!(matches!(
            restrict(&f, &[16]),
            Err(Error::IndexOutOfRange { index: 16, len: 16 })
        ));
    }

    #[test]
    fn restrict_is_idempotent() {
        let spec = GridSpec::uniform(1, 9, 0.25).unwrap();
        let f = SampledField::from_fn(&spec, |x| (3.0 * x[0]).sin()).unwrap();
        let idx = [0, 2, 3, 8];
        let once = restrict(&f, &idx).unwrap();
        assert_eq!(restrict(&once, &idx).unwrap(), once);
    }

    #[test]
    fn support_bounds_of_bump() {
        let spec = GridSpec::uniform(2, 5, 1.0).unwrap();
        let mut values = vec![0.0; 25];
        values[spec.ravel(&[1, 3])] = 1.0;
        values[spec.ravel(&[2, 1])] = -1.0;
        let f = SampledField::new(spec, values).unwrap();
        let b = f.support_bounds().unwrap();
        assert_eq!(&b[..2], &[(1, 2), (1, 3)]);
    }
}
