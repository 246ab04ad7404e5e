//! Named, seeded property suites with JSON reports.
//!
//! A suite evaluates one family of inequalities or identities over a field
//! family and a single parameter configuration. Trials run in parallel; the
//! report is assembled in trial order, so a given `(seed, config)` always yields
//! the same bytes.

mod family;
mod report;
mod suites;

use serde::{Deserialize, Serialize};

pub use family::{FamilyKind, FieldFamily, Support};
pub use report::{Check, Status, VerificationReport};
pub use suites::{maximal_boundedness_study, thm_window, StudyRow};

use crate::error::{Error, Result};
use crate::grid::{AnnulusMode, Exponent, ExponentVector, GridSpec};
use crate::herz::HerzSliceParams;
use crate::maximal::Geometry;
use crate::slice::SliceParams;

pub const SUITES: [&str; 12] = [
    "holder",
    "duality_pairing",
    "embeddings",
    "char_bounds",
    "power_identity",
    "reduction",
    "lattice_fatou",
    "blocks_roundtrip",
    "blocks_equality",
    "blocks_sufficiency",
    "maximal_bounded",
    "maximal_decay",
];

fn default_geometry() -> Geometry {
    Geometry::Ball
}

fn default_refinement() -> usize {
    4
}

/// Grid and parameters shared by every trial of a suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub grid: GridSpec,
    pub params: HerzSliceParams,
    /// Window shape for the maximal suites.
    #[serde(default = "default_geometry")]
    pub geometry: Geometry,
    /// Resolution factor of the refinement study in the reduction suite.
    #[serde(default = "default_refinement")]
    pub refinement: usize,
}

impl SuiteConfig {
    pub fn new(grid: GridSpec, params: HerzSliceParams) -> Result<Self> {
        if params.slice.u.dim() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: params.slice.u.dim() });
        }
        params.slice.validate(grid.dim())?;
        Ok(Self { grid, params, geometry: Geometry::Ball, refinement: 4 })
    }

    /// `[-4, 4]^n` with 257, 129 or 33 samples per axis in 1, 2 or 3 dimensions,
    /// `t = 0.25`,
    /// `beta = 0.25`, `s = 2`, `u = (2, 3, ...)`, `v = 2`.
    pub fn default_for(dim: usize) -> Result<Self> {
        let n = match dim {
            1 => 257,
            2 => 129,
            _ => 33,
        };
        let grid = GridSpec::spanning(dim, -4.0, 4.0, n)?;
        let u: Vec<f64> = (0..dim).map(|i| 2.0 + i as f64).collect();
        let slice = SliceParams::new(0.25, ExponentVector::finite(&u)?, ExponentVector::isotropic(2.0, dim)?)?;
        let params = HerzSliceParams::new(0.25, Exponent::Finite(2.0), slice, AnnulusMode::Homogeneous)?;
        Self::new(grid, params)
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Self {
        self.geometry = geometry;
        self
    }

    /// Largest radius `R` such that fields supported in `|x| < R` stay a full
    /// ball radius (plus two cells) away from the grid boundary.
    pub fn interior_radius(&self) -> f64 {
        let g = &self.grid;
        (0..g.dim())
            .map(|a| {
                let half = (g.samples()[a] - 1) as f64 / 2.0 * g.spacing()[a];
                half - g.center()[a].abs() - self.params.slice.t - 2.0 * g.spacing()[a]
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Smooth bumps supported in the interior ball.
    pub fn default_family(&self, seed: u64, count: usize) -> FieldFamily {
        FieldFamily::new(FamilyKind::SmoothBumps, seed, count, Support::Radius(self.interior_radius()))
    }
}

/// Runs the suite `name` for one configuration over `family`.
pub fn run_suite(name: &str, config: &SuiteConfig, family: &FieldFamily) -> Result<VerificationReport> {
    if !SUITES.contains(&name) {
        return Err(Error::UnknownSuite(name.to_string()));
    }
    config.params.slice.validate(config.grid.dim())?;
    if name != "char_bounds" {
        config.params.require_ball_window()?;
    }
    let checks = suites::dispatch(name, config, family)?;
    Ok(VerificationReport {
        suite: name.to_string(),
        config: config.clone(),
        seed: family.seed,
        trials: family.count,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        let cfg = SuiteConfig::default_for(1).unwrap();
        let fam = cfg.default_family(1, 1);
        assert!(matches!(run_suite("nope", &cfg, &fam), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn beta_window_is_enforced() {
        let mut cfg = SuiteConfig::default_for(1).unwrap();
        cfg.params.beta = -0.6;
        let fam = cfg.default_family(1, 2);
        let err = run_suite("holder", &cfg, &fam).unwrap_err().to_string();
        assert!(err.contains("β ∈ (−Σ1/u_i, ∞)"), "{err}");
    }

    #[test]
    fn default_config_shape() {
        let cfg = SuiteConfig::default_for(2).unwrap();
        assert_eq!(cfg.grid.samples(), &[129, 129]);
        assert_eq!(cfg.grid.spacing(), &[0.0625, 0.0625]);
        assert!((cfg.interior_radius() - 3.625).abs() < 1e-12);
    }
}
