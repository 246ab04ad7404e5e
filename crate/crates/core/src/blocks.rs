//! Dyadic central-block decompositions `f = sum_l eta_l mu_l`.
//!
//! The canonical decomposition cuts `f` along the dyadic shells: the block at
//! level `l` is `f 1_{S_l}` rescaled so that its slice norm equals the block
//! normalization `|B_l|^{-beta/n}`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{hsf, AnnulusMode, Exponent, GridSpec, SampledField};
use crate::herz::{herz_slice_report, HerzSliceParams};
use crate::reduce::pairwise_sum;
use crate::slice::SliceKernel;

/// How `|B_l|^{beta/n}` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeConvention {
    /// `2^{l beta}`: the Herz weight itself, so `||eta||_{l^s}` equals the norm.
    #[default]
    Dyadic,
    /// `(omega_n 2^{l n})^{beta/n}` with the Euclidean unit-ball volume `omega_n`.
    Euclidean,
}

/// Volume of the Euclidean unit ball in dimension 1, 2 or 3.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}

impl VolumeConvention {
    /// `|B_l|^{beta/n}`.
    pub fn scale(self, level: i32, beta: f64, dim: usize) -> f64 {
        let dyadic = (level as f64 * beta).exp2();
        match self {
            VolumeConvention::Dyadic => dyadic,
            VolumeConvention::Euclidean => unit_ball_volume(dim).powf(beta / dim as f64) * dyadic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// Any dyadic level.
    Plain,
    /// Restrict type: level `l >= 0`.
    Restricted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CentralBlock {
    pub level: i32,
    pub field: SampledField,
    pub kind: BlockKind,
}

impl CentralBlock {
    pub fn new(level: i32, field: SampledField, kind: BlockKind) -> Result<Self> {
        if kind == BlockKind::Restricted && level < 0 {
            return Err(Error::InvalidParam(format!("restricted block at negative level {level}")));
        }
        Ok(Self { level, field, kind })
    }

    /// Samples that are nonzero but lie outside `B(0, 2^level)`.
    pub fn support_violations(&self) -> Vec<usize> {
        let radius = (self.level as f64).exp2();
        let spec = self.field.spec();
        self.field
            .values()
            .iter()
            .enumerate()
            .filter(|&(i, &v)| v != 0.0 && spec.radius(i) >= radius)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockEntry {
    pub level: i32,
    pub eta: f64,
    pub block: CentralBlock,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub params: HerzSliceParams,
    pub convention: VolumeConvention,
    pub spec: GridSpec,
    pub entries: Vec<BlockEntry>,
}

impl BlockDecomposition {
    /// Assembles a decomposition from arbitrary blocks, checking the structural
    /// invariants: one grid, strictly increasing levels, nonnegative finite `eta`.
    pub fn from_parts(
        params: HerzSliceParams,
        convention: VolumeConvention,
        spec: GridSpec,
        entries: Vec<BlockEntry>,
    ) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.block.field.spec() != &spec {
                return Err(Error::SpecMismatch);
            }
            if e.level != e.block.level {
                return Err(Error::InvalidParam(format!("entry {i}: level differs from block level")));
            }
            if !(e.eta >= 0.0 && e.eta.is_finite()) {
                return Err(Error::InvalidParam(format!("entry {i}: eta must be finite and nonnegative")));
            }
            if i > 0 && entries[i - 1].level >= e.level {
                return Err(Error::InvalidParam("levels must be strictly increasing".into()));
            }
        }
        Ok(Self { params, convention, spec, entries })
    }

    pub fn levels(&self) -> Vec<i32> {
        self.entries.iter().map(|e| e.level).collect()
    }

    pub fn etas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.eta).collect()
    }
}

/// `(sum_l |eta_l|^s)^{1/s}`, or the maximum for `s = inf`.
pub fn coefficient_norm(etas: &[f64], s: Exponent) -> f64 {
    match s {
        Exponent::Inf => etas.iter().fold(0.0f64, |m, e| m.max(e.abs())),
        Exponent::Finite(s) => {
            let powers: Vec<f64> = etas.iter().map(|e| if *e == 0.0 { 0.0 } else { e.abs().powf(s) }).collect();
            let sum = pairwise_sum(&powers);
            if sum == 0.0 {
                0.0
            } else {
                sum.powf(1.0 / s)
            }
        }
    }
}

/// Canonical decomposition along the dyadic shells. Shells where `f` vanishes are
/// omitted.
pub fn decompose(f: &SampledField, p: &HerzSliceParams, convention: VolumeConvention) -> Result<BlockDecomposition> {
    if f.is_zero() {
        return Err(Error::NothingToDecompose);
    }
    let report = herz_slice_report(f, p)?;
    if !(report.value.is_finite() && report.value > 0.0) {
        return Err(Error::NothingToDecompose);
    }
    let spec = f.spec();
    let dim = spec.dim();
    let kind = match p.mode {
        AnnulusMode::Homogeneous => BlockKind::Plain,
        AnnulusMode::NonHomogeneous => BlockKind::Restricted,
    };
    let annuli = crate::grid::build_annuli(spec, p.mode, p.k_max)?;
    let entries: Vec<BlockEntry> = annuli
        .shells
        .par_iter()
        .zip(report.terms.par_iter())
        .filter(|(_, term)| term.norm > 0.0)
        .map(|(shell, term)| {
            let eta = convention.scale(shell.k, p.beta, dim) * term.norm;
            let mut values = vec![0.0; spec.len()];
            for &i in &shell.indices {
                values[i] = f.values()[i] / eta;
            }
            let field = SampledField::new(spec.clone(), values)?;
            Ok(BlockEntry { level: shell.k, eta, block: CentralBlock::new(shell.k, field, kind)? })
        })
        .collect::<Result<Vec<_>>>()?;
    BlockDecomposition::from_parts(p.clone(), convention, spec.clone(), entries)
}

/// `sum_l eta_l mu_l`, sample by sample in level order.
pub fn reconstruct(d: &BlockDecomposition) -> Result<SampledField> {
    let mut values = vec![0.0; d.spec.len()];
    for e in &d.entries {
        if e.block.field.spec() != &d.spec {
            return Err(Error::SpecMismatch);
        }
        for (acc, &m) in values.iter_mut().zip(e.block.field.values()) {
            if m != 0.0 {
                *acc += e.eta * m;
            }
        }
    }
    SampledField::new(d.spec.clone(), values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub level: i32,
    pub kind: BlockKind,
    pub kind_ok: bool,
    pub support_ok: bool,
    /// Up to the first few offending sample indices.
    pub support_violations: Vec<usize>,
    pub norm: f64,
    /// `|B_l|^{-beta/n}`.
    pub bound: f64,
    /// `norm / bound`.
    pub ratio: f64,
}

/// Checks support containment and the normalization of one block.
pub fn validate_block(b: &CentralBlock, p: &HerzSliceParams, convention: VolumeConvention) -> Result<BlockReport> {
    let spec = b.field.spec();
    let kernel = SliceKernel::new(spec, &p.slice)?;
    let norm = kernel.norm(&b.field)?;
    let bound = 1.0 / convention.scale(b.level, p.beta, spec.dim());
    let violations = b.support_violations();
    Ok(BlockReport {
        level: b.level,
        kind: b.kind,
        kind_ok: b.kind == BlockKind::Plain || b.level >= 0,
        support_ok: violations.is_empty(),
        support_violations: violations.into_iter().take(8).collect(),
        norm,
        bound,
        ratio: norm / bound,
    })
}

/// Upper bound on `||sum eta_l mu_l|| / ||eta||_{l^s}` for blocks normalized to
/// `|B_l|^{-beta/n}`, valid for `beta > 0`: each shell sees only the blocks at
/// its level and above, so the coefficients meet a geometric kernel.
pub fn sufficiency_constant(beta: f64, s: Exponent, convention: VolumeConvention, dim: usize) -> Option<f64> {
    if beta <= 0.0 {
        return None;
    }
    let kernel = match s {
        Exponent::Finite(s) if s < 1.0 => (1.0 - (-beta * s).exp2()).powf(-1.0 / s),
        _ => 1.0 / (1.0 - (-beta).exp2()),
    };
    Some(kernel / convention.scale(0, beta, dim))
}

#[derive(Serialize, Deserialize)]
struct ManifestBlock {
    level: i32,
    eta: f64,
    kind: BlockKind,
    file: String,
    norm_ratio: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    params: HerzSliceParams,
    convention: VolumeConvention,
    grid: GridSpec,
    coefficient_norm: f64,
    blocks: Vec<ManifestBlock>,
}

fn block_file(level: i32) -> String {
    format!("block_{level}.hsf")
}

/// Writes `manifest.json` and one `block_<l>.hsf` per block into `dir`.
pub fn export(d: &BlockDecomposition, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let ratios = d
        .entries
        .par_iter()
        .map(|e| validate_block(&e.block, &d.params, d.convention).map(|r| r.ratio))
        .collect::<Result<Vec<f64>>>()?;
    let mut blocks = Vec::new();
    for (e, ratio) in d.entries.iter().zip(ratios) {
        let file = block_file(e.level);
        hsf::save(&e.block.field, dir.join(&file))?;
        blocks.push(ManifestBlock {
            level: e.level,
            eta: e.eta,
            kind: e.block.kind,
            file,
            norm_ratio: ratio.is_finite().then_some(ratio),
        });
    }
    let manifest = Manifest {
        params: d.params.clone(),
        convention: d.convention,
        grid: d.spec.clone(),
        coefficient_norm: coefficient_norm(&d.etas(), d.params.s),
        blocks,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, crate::fmt::to_json(&manifest)?)?;
    Ok(path)
}

/// Reads a decomposition written by [`export`].
pub fn load(dir: impl AsRef<Path>) -> Result<BlockDecomposition> {
    let dir = dir.as_ref();
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
    let entries = manifest
        .blocks
        .iter()
        .map(|b| {
            let field = hsf::load(dir.join(&b.file))?;
            Ok(BlockEntry { level: b.level, eta: b.eta, block: CentralBlock::new(b.level, field, b.kind)? })
        })
        .collect::<Result<Vec<_>>>()?;
    BlockDecomposition::from_parts(manifest.params, manifest.convention, manifest.grid, entries)
}
