//! Mixed-norm slice (amalgam) norms.
//!
//! For every grid center `x` the local quantity
//! `g(x) = ||f 1_{B(x,t)}||_{L^v} / ||1_{B(0,t)}||_{L^v}` is computed by sweeping a
//! precomputed Euclidean ball stencil; the slice norm is `||g||_{L^u}`. The
//! denominator is evaluated once at the origin and reused for every center, and
//! samples outside the grid count as zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Exponent, ExponentVector, GridSpec, SampledField, MAX_DIM};
use crate::mixed_norm::{dense_mixed_norm, mixed_lebesgue_norm};
use crate::reduce::{abs_pow, pairwise_sum};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceParams {
    /// Ball radius in length units.
    pub t: f64,
    /// Outer exponents.
    pub u: ExponentVector,
    /// Inner (ball-local) exponents; must be finite.
    pub v: ExponentVector,
}

impl SliceParams {
    pub fn new(t: f64, u: ExponentVector, v: ExponentVector) -> Result<Self> {
        let p = Self { t, u, v };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParam(format!("ball radius t must be positive, got {}", self.t)));
        }
        if self.u.dim() != self.v.dim() {
            return Err(Error::DimensionMismatch { expected: self.u.dim(), got: self.v.dim() });
        }
        if !self.v.all_finite() {
            return Err(Error::InvalidParam("inner exponents v must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        self.check()?;
        self.u.validate(dim)?;
        self.v.validate(dim)
    }

    /// Conjugate exponents `(u', v')` with the same radius.
    pub fn conjugate(&self) -> Self {
        Self { t: self.t, u: self.u.conjugate(), v: self.v.conjugate() }
    }

    /// Exponents divided by `r` (for the power-rescaling identity).
    pub fn divided(&self, r: f64) -> Self {
        Self { t: self.t, u: self.u.divided(r), v: self.v.divided(r) }
    }
}

#[inline]
pub(crate) fn offset_dist2(delta: &[isize], spacing: &[f64]) -> f64 {
    delta
        .iter()
        .zip(spacing)
        .map(|(&d, &h)| {
            let x = d as f64 * h;
            x * x
        })
        .fold(0.0, |acc, x| acc + x)
}

/// Offsets `delta` with `|delta . h| < t`, organized as rows along axis 0.
///
/// For each offset `rho` on axes `2..n` (row-major over the bounding box), the
/// offsets along axis 0 form the symmetric range `-L..=L`, or the row is empty.
#[derive(Clone, Debug)]
pub struct BallStencil {
    radius: f64,
    spacing: Vec<f64>,
    half_width: [usize; MAX_DIM],
    rows: Vec<Option<usize>>,
    count: usize,
}

impl BallStencil {
    /// Stencil for a slice ball; rejects radii below one grid cell.
    pub fn new(spec: &GridSpec, t: f64) -> Result<Self> {
        let h = spec.max_spacing();
        if !(t >= h) || !t.is_finite() {
            return Err(Error::BallUnresolved { t, spacing: h });
        }
        Ok(Self::with_radius(spec.spacing(), t))
    }

    /// Stencil for any positive radius; always contains the zero offset.
    pub fn with_radius(spacing: &[f64], radius: f64) -> Self {
        assert!(radius > 0.0);
        let dim = spacing.len();
        let r2 = radius * radius;
        let mut half_width = [0usize; MAX_DIM];
        for axis in 0..dim {
            let h = spacing[axis];
            let mut d = ((radius / h).ceil() as usize).saturating_sub(1);
            while ((d + 1) as f64 * h).powi(2) < r2 {
                d += 1;
            }
            while d > 0 && (d as f64 * h).powi(2) >= r2 {
                d -= 1;
            }
            half_width[axis] = d;
        }

        let rest_shape: Vec<usize> = (1..dim).map(|a| 2 * half_width[a] + 1).collect();
        let rest_len: usize = rest_shape.iter().product();
        let mut rows = Vec::with_capacity(rest_len);
        let mut count = 0;
        let mut delta = [0isize; MAX_DIM];
        for ri in 0..rest_len {
            let mut rem = ri;
            for axis in (1..dim).rev() {
                let w = 2 * half_width[axis] + 1;
                delta[axis] = (rem % w) as isize - half_width[axis] as isize;
                rem /= w;
            }
            let mut row = None;
            for d0 in (0..=half_width[0]).rev() {
                delta[0] = d0 as isize;
                if offset_dist2(&delta[..dim], spacing) < r2 {
                    row = Some(d0);
                    break;
                }
            }
            if let Some(l) = row {
                count += 2 * l + 1;
            }
            rows.push(row);
        }
        Self { radius, spacing: spacing.to_vec(), half_width, rows, count }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.spacing.len()
    }

    /// Number of offsets in the ball.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn half_width(&self) -> &[usize] {
        &self.half_width[..self.dim()]
    }

    fn rest_shape(&self) -> Vec<usize> {
        (1..self.dim()).map(|a| 2 * self.half_width[a] + 1).collect()
    }

    fn rest_offset(&self, ri: usize) -> [isize; MAX_DIM] {
        let dim = self.dim();
        let mut delta = [0isize; MAX_DIM];
        let mut rem = ri;
        for axis in (1..dim).rev() {
            let w = 2 * self.half_width[axis] + 1;
            delta[axis] = (rem % w) as isize - self.half_width[axis] as isize;
            rem /= w;
        }
        delta
    }

    /// All offsets in row-major order (axis 0 slowest).
    pub fn offsets(&self) -> Vec<[isize; MAX_DIM]> {
        let h0 = self.half_width[0] as isize;
        let mut out = Vec::with_capacity(self.count);
        for d0 in -h0..=h0 {
            for (ri, row) in self.rows.iter().enumerate() {
                if let Some(l) = row {
                    if d0.unsigned_abs() <= *l {
                        let mut delta = self.rest_offset(ri);
                        delta[0] = d0;
                        out.push(delta);
                    }
                }
            }
        }
        out
    }
}

/// Precomputed stencil and denominator for one `(grid, t, v)` combination.
#[derive(Clone, Debug)]
pub struct SliceKernel {
    spec: GridSpec,
    params: SliceParams,
    stencil: BallStencil,
    denominator: f64,
}

impl SliceKernel {
    pub fn new(spec: &GridSpec, params: &SliceParams) -> Result<Self> {
        params.validate(spec.dim())?;
        let stencil = BallStencil::new(spec, params.t)?;
        let mut kernel = Self { spec: spec.clone(), params: params.clone(), stencil, denominator: 1.0 };
        kernel.denominator = kernel.indicator_norm();
        Ok(kernel)
    }

    pub fn stencil(&self) -> &BallStencil {
        &self.stencil
    }

    pub fn params(&self) -> &SliceParams {
        &self.params
    }

    /// `||1_{B(0,t)}||_{L^v}` on the grid.
    pub fn denominator(&self) -> f64 {
        self.denominator
    }

    fn v0(&self) -> f64 {
        self.params.v.entries()[0].finite().expect("validated finite")
    }

    fn outer_reduce(&self, rows: &[f64], scratch: &mut Vec<f64>) -> f64 {
        match self.spec.dim() {
            1 => rows[0],
            // single rest axis: the one-axis reduction without intermediate buffers
            2 => match self.params.v.entries()[1] {
                Exponent::Inf => rows.iter().fold(0.0f64, |m, r| m.max(r.abs())),
                Exponent::Finite(p) => {
                    scratch.clear();
                    scratch.extend(rows.iter().map(|&r| abs_pow(r, p)));
                    let s = pairwise_sum(scratch) * self.spec.spacing()[1];
                    if s == 0.0 {
                        0.0
                    } else {
                        s.powf(1.0 / p)
                    }
                }
            },
            _ => dense_mixed_norm(
                rows,
                &self.stencil.rest_shape(),
                &self.spec.spacing()[1..],
                &self.params.v.entries()[1..],
            ),
        }
    }

    fn row_value(&self, sum: f64) -> f64 {
        let s = sum * self.spec.spacing()[0];
        if s == 0.0 {
            0.0
        } else {
            s.powf(1.0 / self.v0())
        }
    }

    fn indicator_norm(&self) -> f64 {
        let ones: Vec<f64> = vec![1.0; 2 * self.stencil.half_width[0] + 1];
        let rows: Vec<f64> = self
            .stencil
            .rows
            .iter()
            .map(|row| match row {
                Some(l) => self.row_value(pairwise_sum(&ones[..2 * l + 1])),
                None => 0.0,
            })
            .collect();
        self.outer_reduce(&rows, &mut Vec::new())
    }

    /// The local field `g(x) = ||f 1_{B(x,t)}||_{L^v} / ||1_{B(0,t)}||_{L^v}`.
    pub fn local_field(&self, f: &SampledField) -> Result<SampledField> {
        if f.spec() != &self.spec {
            return Err(Error::SpecMismatch);
        }
        let spec = &self.spec;
        let dim = spec.dim();
        let Some(bounds) = f.support_bounds() else {
            return Ok(SampledField::zeros(spec));
        };
        let v0 = self.v0();
        let powers: Vec<f64> = f.values().iter().map(|&x| abs_pow(x, v0)).collect();

        let n0 = spec.samples()[0];
        let rest_len = spec.len() / n0;
        // nonzero counts along axis 0, exclusive prefix per column
        let mut nz = vec![0u32; (n0 + 1) * rest_len];
        for j0 in 0..n0 {
            for r in 0..rest_len {
                let here = (powers[j0 * rest_len + r] != 0.0) as u32;
                nz[(j0 + 1) * rest_len + r] = nz[j0 * rest_len + r] + here;
            }
        }

        // row values for every grid point and every distinct row half-length
        let mut lengths: Vec<usize> = self.stencil.rows.iter().flatten().copied().collect();
        lengths.sort_unstable();
        lengths.dedup();
        let row_tables: Vec<Vec<f64>> = lengths
            .iter()
            .map(|&l| {
                (0..spec.len())
                    .into_par_iter()
                    .map_init(Vec::new, |column, p| {
                        let (j0, rest_flat) = (p / rest_len, p % rest_len);
                        let lo = j0.saturating_sub(l);
                        let hi = (j0 + l).min(n0 - 1);
                        if nz[(hi + 1) * rest_len + rest_flat] == nz[lo * rest_len + rest_flat] {
                            return 0.0;
                        }
                        column.clear();
                        column.extend((lo..=hi).map(|k0| powers[k0 * rest_len + rest_flat]));
                        self.row_value(pairwise_sum(column))
                    })
                    .collect()
            })
            .collect();
        let table_of: Vec<Option<usize>> =
            self.stencil.rows.iter().map(|row| row.map(|l| lengths.binary_search(&l).unwrap())).collect();

        let hw = self.stencil.half_width;
        let offsets: Vec<[isize; MAX_DIM]> =
            (0..self.stencil.rows.len()).map(|ri| self.stencil.rest_offset(ri)).collect();
        let samples = spec.samples();
        let strides = spec.strides();

        let values: Vec<f64> = (0..spec.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0; self.stencil.rows.len()], Vec::new()),
                |(rows, scratch), center| {
                    let c = spec.unravel(center);
                    for axis in 0..dim {
                        if c[axis] + hw[axis] < bounds[axis].0 || c[axis] > bounds[axis].1 + hw[axis] {
                            return 0.0;
                        }
                    }
                    let mut any = false;
                    for (ri, table) in table_of.iter().enumerate() {
                        rows[ri] = 0.0;
                        let Some(table) = *table else { continue };
                        let mut rest_flat = 0usize;
                        let mut inside = true;
                        for axis in 1..dim {
                            let j = c[axis] as isize + offsets[ri][axis];
                            if j < 0 || j >= samples[axis] as isize {
                                inside = false;
                                break;
                            }
                            rest_flat += j as usize * strides[axis];
                        }
                        if !inside {
                            continue;
                        }
                        rows[ri] = row_tables[table][c[0] * rest_len + rest_flat];
                        any |= rows[ri] != 0.0;
                    }
                    if !any {
                        return 0.0;
                    }
                    self.outer_reduce(rows, scratch) / self.denominator
                },
            )
            .collect();
        SampledField::new(spec.clone(), values)
    }

    pub fn norm(&self, f: &SampledField) -> Result<f64> {
        let g = self.local_field(f)?;
        mixed_lebesgue_norm(&g, &self.params.u)
    }
}

/// `||1_{B(0,t)}||_{L^v}` computed on the grid of `spec`.
pub fn indicator_ball_norm(spec: &GridSpec, t: f64, v: &ExponentVector) -> Result<f64> {
    let u = v.clone();
    let params = SliceParams::new(t, u, v.clone())?;
    Ok(SliceKernel::new(spec, &params)?.denominator())
}

pub fn local_slice_field(f: &SampledField, p: &SliceParams) -> Result<SampledField> {
    SliceKernel::new(f.spec(), p)?.local_field(f)
}

/// `||f||_{(E^u_v)_t}`.
pub fn slice_norm(f: &SampledField, p: &SliceParams) -> Result<f64> {
    SliceKernel::new(f.spec(), p)?.norm(f)
}

/// Approximate slice norm for isotropic `v`, replacing the ball by its inscribed
/// box and using separable running sums. Rounding differs from [`slice_norm`] and
/// the geometry is different; use it for quick surveys only.
pub fn box_slice_norm_fast(f: &SampledField, p: &SliceParams) -> Result<f64> {
    let spec = f.spec();
    p.validate(spec.dim())?;
    let q = p
        .v
        .as_isotropic()
        .ok_or_else(|| Error::InvalidParam("fast path needs isotropic v".into()))?;
    let dim = spec.dim();
    let side = p.t / (dim as f64).sqrt();
    let hw: Vec<usize> = spec
        .spacing()
        .iter()
        .map(|&h| {
            let mut d = (side / h).floor() as usize;
            while d > 0 && d as f64 * h >= side {
                d -= 1;
            }
            d
        })
        .collect();
    let count: f64 = hw.iter().map(|&w| (2 * w + 1) as f64).product();

    let mut acc: Vec<f64> = f.values().iter().map(|&x| abs_pow(x, q)).collect();
    let strides = spec.strides();
    for axis in 0..dim {
        let n = spec.samples()[axis];
        let stride = strides[axis];
        let w = hw[axis];
        let mut out = vec![0.0; acc.len()];
        for base in 0..acc.len() {
            if !(base / stride).is_multiple_of(n) {
                continue;
            }
            let mut running = 0.0;
            for j in 0..=w.min(n - 1) {
                running += acc[base + j * stride];
            }
            for j in 0..n {
                out[base + j * stride] = running;
                if j + w + 1 < n {
                    running += acc[base + (j + w + 1) * stride];
                }
                if j >= w {
                    running -= acc[base + (j - w) * stride];
                }
            }
        }
        acc = out;
    }
    let g: Vec<f64> = acc.iter().map(|&s| (s.max(0.0) / count).powf(1.0 / q)).collect();
    let g = SampledField::new(spec.clone(), g)?;
    mixed_lebesgue_norm(&g, &p.u)
}

/// True when the support of `f` stays at least `t` (in every axis) away from the
/// grid boundary, so no ball around a support point leaves the grid.
pub fn interior_supported(f: &SampledField, t: f64) -> bool {
    let spec = f.spec();
    let Some(bounds) = f.support_bounds() else { return true };
    (0..spec.dim()).all(|axis| {
        let h = spec.spacing()[axis];
        let margin = (t / h).ceil() as usize;
        bounds[axis].0 >= margin && bounds[axis].1 + margin < spec.samples()[axis]
    })
}
