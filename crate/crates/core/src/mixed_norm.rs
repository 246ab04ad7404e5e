//! Mixed-norm Lebesgue norms `||f||_{L^u}` by iterated one-axis reductions.
//!
//! Axis 1 is reduced first (the innermost integral), then axis 2, and so on.
//! Each finite reduction is `(sum_j |.|^{u_i} h_i)^{1/u_i}` with a pairwise sum;
//! an `inf` entry takes the maximum.

use crate::error::{Error, Result};
use crate::grid::{Exponent, ExponentVector, SampledField};
use crate::reduce::{abs_pow, pairwise_sum};

/// Reduces the leading (slowest) axis of a row-major block of `len0 * rest` values.
pub(crate) fn reduce_leading_axis(
    data: &[f64],
    len0: usize,
    rest: usize,
    p: Exponent,
    h: f64,
    out: &mut Vec<f64>,
) {
    debug_assert_eq!(data.len(), len0 * rest);
    out.clear();
    let mut column = Vec::with_capacity(len0);
    for r in 0..rest {
        let value = match p {
            Exponent::Inf => (0..len0).fold(0.0f64, |m, j| m.max(data[j * rest + r].abs())),
            Exponent::Finite(p) => {
                column.clear();
                column.extend((0..len0).map(|j| abs_pow(data[j * rest + r], p)));
                let s = pairwise_sum(&column) * h;
                if s == 0.0 {
                    0.0
                } else {
                    s.powf(1.0 / p)
                }
            }
        };
        out.push(value);
    }
}

/// Mixed norm of a dense row-major block with the given shape and spacing.
/// Assumes the exponents were validated by the caller.
pub(crate) fn dense_mixed_norm(
    values: &[f64],
    shape: &[usize],
    spacing: &[f64],
    exponents: &[Exponent],
) -> f64 {
    debug_assert_eq!(values.len(), shape.iter().product::<usize>());
    let mut current = values.to_vec();
    let mut next = Vec::new();
    for axis in 0..shape.len() {
        let len0 = shape[axis];
        let rest: usize = shape[axis + 1..].iter().product();
        reduce_leading_axis(&current, len0, rest, exponents[axis], spacing[axis], &mut next);
        std::mem::swap(&mut current, &mut next);
    }
    debug_assert_eq!(current.len(), 1);
    current[0]
}

/// `||f||_{L^u}` on the grid of `f`.
pub fn mixed_lebesgue_norm(f: &SampledField, u: &ExponentVector) -> Result<f64> {
    let spec = f.spec();
    u.validate(spec.dim())?;
    Ok(dense_mixed_norm(f.values(), spec.samples(), spec.spacing(), u.entries()))
}

/// Scalar `L^q` norm by a single flat reduction over all samples.
pub fn flat_lebesgue_norm(f: &SampledField, q: Exponent) -> Result<f64> {
    q.require_above(1.0, "finite exponents must exceed 1")?;
    Ok(match q {
        Exponent::Inf => f.max_abs(),
        Exponent::Finite(q) => {
            let powers: Vec<f64> = f.values().iter().map(|&v| abs_pow(v, q)).collect();
            let s = pairwise_sum(&powers) * f.spec().cell_volume();
            if s == 0.0 {
                0.0
            } else {
                s.powf(1.0 / q)
            }
        }
    })
}

/// `||phi * psi||_{L^1} = sum |phi psi| * cell volume`.
pub fn discrete_holder_l1(phi: &SampledField, psi: &SampledField) -> Result<f64> {
    if phi.spec() != psi.spec() {
        return Err(Error::SpecMismatch);
    }
    let products: Vec<f64> = phi
        .values()
        .iter()
        .zip(psi.values())
        .map(|(a, b)| (a * b).abs())
        .collect();
    Ok(pairwise_sum(&products) * phi.spec().cell_volume())
}
