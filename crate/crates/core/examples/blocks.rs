//! Canonical central-block decomposition, export, reload and reconstruction.

use hsk::blocks::{self, coefficient_norm, validate_block, VolumeConvention};
use hsk::grid::{sample_expression, AnnulusMode, Exponent, ExponentVector, GridSpec};
use hsk::herz::{herz_slice_norm, HerzSliceParams};
use hsk::slice::SliceParams;

fn main() -> hsk::Result<()> {
    let spec = GridSpec::spanning(2, -4.0, 4.0, 97)?;
    let f = sample_expression("gaussian(1.2) * (1 + x) * ball_indicator(0, 3.5)", &spec)?;
    let slice = SliceParams::new(0.25, ExponentVector::finite(&[2.0, 4.0])?, ExponentVector::isotropic(2.0, 2)?)?;
    let p = HerzSliceParams::new(0.25, Exponent::Finite(1.5), slice, AnnulusMode::Homogeneous)?;

    let d = blocks::decompose(&f, &p, VolumeConvention::Dyadic)?;
    println!("levels {:?}", d.levels());
    println!("l^s(eta) = {:.15}", coefficient_norm(&d.etas(), p.s));
    println!("norm     = {:.15}", herz_slice_norm(&f, &p)?);
    for e in &d.entries {
        let r = validate_block(&e.block, &p, d.convention)?;
        println!("  l = {:>2}  eta = {:.6e}  support ok {}  ratio {:.15}", e.level, e.eta, r.support_ok, r.ratio);
    }

    let dir = std::env::temp_dir().join("hsk-blocks-example");
    let manifest = blocks::export(&d, &dir)?;
    let back = blocks::reconstruct(&blocks::load(&dir)?)?;
    let err = back.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("wrote {}, roundtrip max abs error {err:e}", manifest.display());
    Ok(())
}
