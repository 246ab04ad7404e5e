//! Slice norms: local L^v averages on balls of radius t, measured in L^u.

use hsk::grid::{sample_expression, Exponent, ExponentVector, GridSpec};
use hsk::mixed_norm::flat_lebesgue_norm;
use hsk::slice::{slice_norm, SliceKernel, SliceParams};

fn main() -> hsk::Result<()> {
    let spec = GridSpec::spanning(1, -4.0, 4.0, 257)?;
    let f = sample_expression("box_indicator(-1, 1)", &spec)?;

    // u = v collapses to L^u
    let p = SliceParams::new(0.25, ExponentVector::finite(&[2.0])?, ExponentVector::finite(&[2.0])?)?;
    println!("slice norm {:.12}  vs L^2 {:.12}  (sqrt 2 = {:.12})", slice_norm(&f, &p)?, flat_lebesgue_norm(&f, Exponent::Finite(2.0))?, 2f64.sqrt());

    // anisotropic 2-D exponents, several radii
    let spec = GridSpec::spanning(2, -4.0, 4.0, 129)?;
    let g = sample_expression("gaussian(1) * (2 + cos(4 * y))", &spec)?;
    let u = ExponentVector::finite(&[2.0, 3.0])?;
    let v = ExponentVector::isotropic(1.5, 2)?;
    for t in [0.0625, 0.25, 1.0] {
        let kernel = SliceKernel::new(&spec, &SliceParams::new(t, u.clone(), v.clone())?)?;
        println!("t = {t:<6} stencil {:>5} samples  norm {:.12}", kernel.stencil().count(), kernel.norm(&g)?);
    }
    Ok(())
}
