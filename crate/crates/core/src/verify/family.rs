//! Seeded random field families.
//!
//! Trial `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so every
//! field can be regenerated in isolation from `(seed, i)` and the output does not
//! depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    SmoothBumps,
    AnnulusSupported,
    IndicatorStacks,
    SignAlternating,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth_bumps" | "bumps" => Ok(Self::SmoothBumps),
            "annulus_supported" | "annulus" => Ok(Self::AnnulusSupported),
            "indicator_stacks" | "indicators" => Ok(Self::IndicatorStacks),
            "sign_alternating" | "alternating" => Ok(Self::SignAlternating),
            other => Err(Error::InvalidParam(format!("unknown field family `{other}`"))),
        }
    }
}

/// Where generated fields live.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// Inside the open ball `|x| < radius`.
    Radius(f64),
    /// Inside shell `S_k`.
    Shell(i32),
    /// Inside a shell drawn uniformly from `lo..=hi` per trial.
    Shells(i32, i32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldFamily {
    pub kind: FamilyKind,
    pub seed: u64,
    pub count: usize,
    pub support: Support,
}

impl FieldFamily {
    pub fn new(kind: FamilyKind, seed: u64, count: usize, support: Support) -> Self {
        Self { kind, seed, count, support }
    }

    /// RNG for trial `index`.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Field for trial `index`. Never identically zero on grids that resolve the
    /// support region.
    pub fn generate(&self, spec: &GridSpec, index: usize) -> Result<SampledField> {
        let mut rng = self.rng(index);
        self.draw(spec, &mut rng)
    }

    /// Draws one field from an explicit RNG (for suites that need several fields
    /// per trial).
    pub fn draw(&self, spec: &GridSpec, rng: &mut ChaCha8Rng) -> Result<SampledField> {
        let (lo, hi) = match self.support {
            Support::Radius(r) => (0.0, r),
            Support::Shell(k) => ((k as f64 - 1.0).exp2(), (k as f64).exp2()),
            Support::Shells(a, b) => {
                let k = rng.gen_range(a..=b);
                ((k as f64 - 1.0).exp2(), (k as f64).exp2())
            }
        };
        let dim = spec.dim();
        let profile = Profile::draw(self.kind, dim, hi, rng);
        let f = SampledField::from_fn(spec, |x| {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            if r < lo || r >= hi {
                0.0
            } else {
                profile.eval(x)
            }
        })?;
        if f.is_zero() {
            // fall back to the support indicator so the trial stays meaningful
            let g = SampledField::from_fn(spec, |x| {
                let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                if r >= lo && r < hi {
                    1.0
                } else {
                    0.0
                }
            })?;
            if g.is_zero() {
                return Err(Error::InvalidParam(format!(
                    "support region {lo} <= |x| < {hi} holds no grid samples"
                )));
            }
            return Ok(g);
        }
        Ok(f)
    }
}

enum Profile {
    Bumps(Vec<([f64; 3], f64, f64)>),
    Indicators(Vec<([f64; 3], f64, f64, bool)>),
    Alternating(Vec<([f64; 3], f64, f64)>, [f64; 3], f64),
}

fn point(dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let mut p = [0.0; 3];
    for c in p.iter_mut().take(dim) {
        *c = rng.gen_range(-scale..scale);
    }
    p
}

fn bumps(dim: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<([f64; 3], f64, f64)> {
    let m = rng.gen_range(2..=5);
    (0..m)
        .map(|_| {
            let c = point(dim, 0.7 * radius, rng);
            let width = rng.gen_range(0.15..0.6) * radius;
            let amp = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (c, width, amp)
        })
        .collect()
}

fn dist2(x: &[f64], c: &[f64; 3]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl Profile {
    fn draw(kind: FamilyKind, dim: usize, radius: f64, rng: &mut ChaCha8Rng) -> Self {
        match kind {
            FamilyKind::SmoothBumps | FamilyKind::AnnulusSupported => Profile::Bumps(bumps(dim, radius, rng)),
            FamilyKind::IndicatorStacks => {
                let m = rng.gen_range(1..=4);
                Profile::Indicators(
                    (0..m)
                        .map(|_| {
                            let c = point(dim, 0.5 * radius, rng);
                            let size = rng.gen_range(0.2..0.8) * radius;
                            let amp = rng.gen_range(-2.0..2.0);
                            (c, size, amp, rng.gen_bool(0.5))
                        })
                        .collect(),
                )
            }
            FamilyKind::SignAlternating => {
                let b = bumps(dim, radius, rng);
                let mut dir = point(dim, 1.0, rng);
                if dir.iter().all(|&d| d == 0.0) {
                    dir[0] = 1.0;
                }
                let freq = rng.gen_range(2.0..8.0) / radius;
                Profile::Alternating(b, dir, freq)
            }
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let bump_sum = |b: &[([f64; 3], f64, f64)]| {
            b.iter().map(|(c, w, a)| a * (-dist2(x, c) / (w * w)).exp()).sum::<f64>()
        };
        match self {
            Profile::Bumps(b) => 1.0 + bump_sum(b),
            Profile::Indicators(items) => items
                .iter()
                .map(|(c, size, amp, ball)| {
                    let inside = if *ball {
                        dist2(x, c) < size * size
                    } else {
                        x.iter().zip(c).all(|(a, b)| (a - b).abs() < *size)
                    };
                    if inside {
                        *amp
                    } else {
                        0.0
                    }
                })
                .sum(),
            Profile::Alternating(b, dir, freq) => {
                let phase: f64 = x.iter().zip(dir).map(|(a, d)| a * d).sum::<f64>() * freq;
                let sign = if phase.sin() >= 0.0 { 1.0 } else { -1.0 };
                sign * (0.5 + bump_sum(b).abs())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GridSpec {
        GridSpec::uniform(2, 33, 0.25).unwrap()
    }

    #[test]
    fn trials_are_reproducible_and_distinct() {
        let fam = FieldFamily::new(FamilyKind::SmoothBumps, 7, 4, Support::Radius(3.0));
        let a = fam.generate(&spec(), 2).unwrap();
        let b = fam.generate(&spec(), 2).unwrap();
        let c = fam.generate(&spec(), 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn support_is_respected() {
        for kind in [FamilyKind::SmoothBumps, FamilyKind::IndicatorStacks, FamilyKind::SignAlternating, FamilyKind::AnnulusSupported] {
            let fam = FieldFamily::new(kind, 1, 8, Support::Shell(1));
            for i in 0..8 {
                let f = fam.generate(&spec(), i).unwrap();
                assert!(!f.is_zero());
                for (j, &v) in f.values().iter().enumerate() {
                    let r = f.spec().radius(j);
                    if v != 0.0 {
                        assert!((1.0..2.0).contains(&r));
                    }
                }
            }
        }
    }

    #[test]
    fn unresolvable_support_is_an_error() {
        let fam = FieldFamily::new(FamilyKind::SmoothBumps, 1, 1, Support::Shell(-6));
        assert!(fam.generate(&spec(), 0).is_err());
    }

    #[test]
    fn kind_names() {
        assert_eq!("bumps".parse::<FamilyKind>().unwrap(), FamilyKind::SmoothBumps);
        assert!("noise".parse::<FamilyKind>().is_err());
    }
}
