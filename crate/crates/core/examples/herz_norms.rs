//! Herz and Herz-slice norms with their per-shell breakdown.

use hsk::grid::{sample_expression, AnnulusMode, Exponent, ExponentVector, GridSpec};
use hsk::herz::{herz_report, herz_slice_report, HerzSliceParams};
use hsk::slice::SliceParams;

fn main() -> hsk::Result<()> {
    let spec = GridSpec::spanning(2, -4.0, 4.0, 129)?;
    let f = sample_expression("ball_indicator(0, 3) * (1 + r)", &spec)?;

    let slice = SliceParams::new(0.25, ExponentVector::finite(&[2.0, 3.0])?, ExponentVector::isotropic(2.0, 2)?)?;
    for mode in [AnnulusMode::Homogeneous, AnnulusMode::NonHomogeneous] {
        let p = HerzSliceParams::new(0.5, Exponent::Finite(2.0), slice.clone(), mode)?;
        let h = herz_slice_report(&f, &p)?;
        println!("{mode:?}: value {:.12}, shells {}..={} (residual {})", h.value, h.k_min, h.k_max, h.residual_shell);
        for t in &h.terms {
            println!("  k = {:>3}  2^(k beta) = {:<10.6} norm = {:.6}", t.k, t.weight, t.norm);
        }
    }

    let classical = herz_report(&f, 0.5, Exponent::Inf, Exponent::Finite(2.0), AnnulusMode::Homogeneous, None)?;
    println!("classical Herz, s = inf: {:.12}", classical.value);
    Ok(())
}
