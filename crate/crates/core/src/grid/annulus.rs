use serde::{Deserialize, Serialize};

use super::GridSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnulusMode {
    /// Shells `S_k` for all integers `k`, truncated below at grid resolution.
    Homogeneous,
    /// Shells `k >= 0`, with shell 0 the full unit ball.
    NonHomogeneous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Shell {
    pub k: i32,
    /// Flat sample indices, ascending.
    pub indices: Vec<usize>,
}

/// Dyadic shells `2^{k-1} <= |x| < 2^k` over a grid.
///
/// The lowest shell `k_min` holds every sample with `|x| < 2^{k_min}`: in
/// non-homogeneous mode that is the unit ball, in homogeneous mode it is the
/// residual ball below grid resolution (including the origin sample).
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusDecomposition {
    pub mode: AnnulusMode,
    pub k_min: i32,
    pub k_max: i32,
    /// Homogeneous truncation: shell `k_min` absorbs the ball `|x| < 2^{k_min - 1}`.
    pub residual_shell: bool,
    /// One entry per `k` in `k_min..=k_max`, possibly empty.
    pub shells: Vec<Shell>,
}

impl AnnulusDecomposition {
    pub fn shell(&self, k: i32) -> Option<&Shell> {
        if k < self.k_min || k > self.k_max {
            return None;
        }
        self.shells.get((k - self.k_min) as usize)
    }

    /// Shell index of a radius, or `None` if `r >= 2^{k_max}`.
    pub fn shell_of_radius(&self, r: f64) -> Option<i32> {
        shell_index(r, self.k_min, self.k_max)
    }

    pub fn covered(&self) -> usize {
        self.shells.iter().map(|s| s.indices.len()).sum()
    }
}

/// `2^k`, exact for the exponents a grid can produce.
#[inline]
pub fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

/// Smallest `k` with `2^k > r` (r > 0).
fn smallest_power_above(r: f64) -> i32 {
    let mut k = r.log2().floor() as i32 + 1;
    while pow2(k - 1) > r {
        k -= 1;
    }
    while pow2(k) <= r {
        k += 1;
    }
    k
}

/// Smallest `e` with `2^e >= r` (r > 0).
fn smallest_power_at_least(r: f64) -> i32 {
    let mut e = r.log2().ceil() as i32;
    while pow2(e - 1) >= r {
        e -= 1;
    }
    while pow2(e) < r {
        e += 1;
    }
    e
}

fn shell_index(r: f64, k_min: i32, k_max: i32) -> Option<i32> {
    if r >= pow2(k_max) {
        None
    } else if r < pow2(k_min) {
        Some(k_min)
    } else {
        Some(smallest_power_above(r))
    }
}

/// Bins every grid sample into dyadic shells.
///
/// `k_max` defaults to the smallest `k` with `2^k` strictly above the largest
/// sample radius, so every sample is covered. Membership uses the strict
/// inequality `|x| < 2^k`: samples on a dyadic sphere go to the outer shell.
pub fn build_annuli(
    spec: &GridSpec,
    mode: AnnulusMode,
    k_max_override: Option<i32>,
) -> Result<AnnulusDecomposition> {
    let radii = spec.radii();
    let max_r = radii.iter().cloned().fold(0.0, f64::max);
    let min_pos = radii.iter().cloned().filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min);

    let k_min = match mode {
        AnnulusMode::NonHomogeneous => 0,
        AnnulusMode::Homogeneous => {
            if !min_pos.is_finite() {
                return Err(Error::NoShellStructure);
            }
            smallest_power_at_least(min_pos) + 1
        }
    };
    let natural_k_max = if max_r > 0.0 { smallest_power_above(max_r) } else { k_min };
    let k_max = match k_max_override {
        Some(k) if k < k_min => {
            return Err(Error::InvalidParam(format!(
                "k_max override {k} lies below the lowest shell {k_min}"
            )))
        }
        Some(k) => k,
        None => natural_k_max.max(k_min),
    };

    let mut shells: Vec<Shell> = (k_min..=k_max).map(|k| Shell { k, indices: Vec::new() }).collect();
    for (i, &r) in radii.iter().enumerate() {
        if let Some(k) = shell_index(r, k_min, k_max) {
            shells[(k - k_min) as usize].indices.push(i);
        }
    }
    if shells.iter().all(|s| s.indices.is_empty()) {
        return Err(Error::EmptyAnnuli);
    }
    Ok(AnnulusDecomposition {
        mode,
        k_min,
        k_max,
        residual_shell: mode == AnnulusMode::Homogeneous,
        shells,
    })
}
