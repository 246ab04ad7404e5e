//! Herz-slice norms and classical Herz norms over dyadic shells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_annuli, restrict, AnnulusDecomposition, AnnulusMode, Exponent, SampledField};
use crate::mixed_norm::flat_lebesgue_norm;
use crate::reduce::pairwise_sum;
use crate::slice::{SliceKernel, SliceParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HerzSliceParams {
    /// Annulus weight exponent.
    pub beta: f64,
    /// Outer sequence exponent, `(0, inf]`.
    pub s: Exponent,
    pub slice: SliceParams,
    pub mode: AnnulusMode,
    /// Optional override of the outermost shell index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<i32>,
}

impl HerzSliceParams {
    pub fn new(beta: f64, s: Exponent, slice: SliceParams, mode: AnnulusMode) -> Result<Self> {
        let p = Self { beta, s, slice, mode, k_max: None };
        p.check()?;
        Ok(p)
    }

    pub fn with_k_max(mut self, k_max: Option<i32>) -> Self {
        self.k_max = k_max;
        self
    }

    fn check(&self) -> Result<()> {
        if !self.beta.is_finite() {
            return Err(Error::InvalidParam(format!("beta must be finite, got {}", self.beta)));
        }
        self.s.require_above(0.0, "outer exponent s must be positive")
    }

    /// Lower end of the range `beta > -sum 1/u_i` in which the space is a ball
    /// quasi-Banach function space.
    pub fn ball_window_floor(&self) -> f64 {
        -self.slice.u.sum_reciprocals()
    }

    pub fn in_ball_window(&self) -> bool {
        self.beta > self.ball_window_floor()
    }

    pub fn require_ball_window(&self) -> Result<()> {
        if self.in_ball_window() {
            Ok(())
        } else {
            Err(Error::InvalidParam(format!(
                "beta = {} violates β ∈ (−Σ1/u_i, ∞) with −Σ1/u_i = {}",
                self.beta,
                self.ball_window_floor()
            )))
        }
    }

    /// Parameters of the dual pairing partner: `-beta`, dual outer exponent and
    /// componentwise conjugate inner exponents.
    pub fn dual(&self) -> Self {
        Self {
            beta: -self.beta,
            s: dual_outer_exponent(self.s),
            slice: self.slice.conjugate(),
            mode: self.mode,
            k_max: self.k_max,
        }
    }

    /// Parameters for `|f|^r`: `beta r`, `s / r`, `u / r`, `v / r`.
    pub fn power_rescaled(&self, r: f64) -> Self {
        Self {
            beta: self.beta * r,
            s: self.s.divided(r),
            slice: self.slice.divided(r),
            mode: self.mode,
            k_max: self.k_max,
        }
    }
}

/// `s' = s / (s - 1)` for `s > 1`, `inf` for `0 < s <= 1`, `1` for `s = inf`.
pub fn dual_outer_exponent(s: Exponent) -> Exponent {
    match s {
        Exponent::Finite(s) if s <= 1.0 => Exponent::Inf,
        other => other.conjugate(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellTerm {
    pub k: i32,
    /// `2^{k beta}`.
    pub weight: f64,
    /// Norm of the shell restriction.
    pub norm: f64,
}

/// A Herz-type norm together with the shell range it was summed over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HerzNorm {
    pub value: f64,
    pub k_min: i32,
    pub k_max: i32,
    pub residual_shell: bool,
    pub terms: Vec<ShellTerm>,
}

fn combine(annuli: &AnnulusDecomposition, beta: f64, s: Exponent, norms: Vec<f64>) -> HerzNorm {
    let terms: Vec<ShellTerm> = annuli
        .shells
        .iter()
        .zip(norms)
        .map(|(shell, norm)| ShellTerm { k: shell.k, weight: (shell.k as f64 * beta).exp2(), norm })
        .collect();
    let weighted = terms.iter().map(|t| t.weight * t.norm);
    let value = match s {
        Exponent::Inf => weighted.fold(0.0, f64::max),
        Exponent::Finite(s) => {
            let powers: Vec<f64> = weighted.map(|x| if x == 0.0 { 0.0 } else { x.powf(s) }).collect();
            let sum = pairwise_sum(&powers);
            if sum == 0.0 {
                0.0
            } else {
                sum.powf(1.0 / s)
            }
        }
    };
    HerzNorm {
        value,
        k_min: annuli.k_min,
        k_max: annuli.k_max,
        residual_shell: annuli.residual_shell,
        terms,
    }
}

/// Herz-slice norm with its per-shell breakdown.
pub fn herz_slice_report(f: &SampledField, p: &HerzSliceParams) -> Result<HerzNorm> {
    p.check()?;
    let annuli = build_annuli(f.spec(), p.mode, p.k_max)?;
    let kernel = SliceKernel::new(f.spec(), &p.slice)?;
    let norms = annuli
        .shells
        .par_iter()
        .map(|shell| {
            if shell.indices.is_empty() {
                return Ok(0.0);
            }
            kernel.norm(&restrict(f, &shell.indices)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(combine(&annuli, p.beta, p.s, norms))
}

/// `(sum_k 2^{k beta s} ||f 1_{S_k}||^s_{(E^u_v)_t})^{1/s}`, maximum for `s = inf`.
pub fn herz_slice_norm(f: &SampledField, p: &HerzSliceParams) -> Result<f64> {
    Ok(herz_slice_report(f, p)?.value)
}

/// Classical Herz norm with scalar exponent `u`, shell by shell in flat `L^u`.
pub fn herz_report(
    f: &SampledField,
    beta: f64,
    s: Exponent,
    u: Exponent,
    mode: AnnulusMode,
    k_max: Option<i32>,
) -> Result<HerzNorm> {
    if !beta.is_finite() {
        return Err(Error::InvalidParam(format!("beta must be finite, got {beta}")));
    }
    s.require_above(0.0, "outer exponent s must be positive")?;
    if u.is_inf() {
        return Err(Error::InvalidExponent { value: f64::INFINITY, reason: "u must be finite" });
    }
    u.require_above(1.0, "finite exponents must exceed 1")?;
    let annuli = build_annuli(f.spec(), mode, k_max)?;
    let norms = annuli
        .shells
        .par_iter()
        .map(|shell| {
            if shell.indices.is_empty() {
                return Ok(0.0);
            }
            flat_lebesgue_norm(&restrict(f, &shell.indices)?, u)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(combine(&annuli, beta, s, norms))
}

pub fn herz_norm(f: &SampledField, beta: f64, s: Exponent, u: Exponent, mode: AnnulusMode) -> Result<f64> {
    Ok(herz_report(f, beta, s, u, mode, None)?.value)
}
