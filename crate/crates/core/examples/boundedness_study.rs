//! Ratios ||Mf|| / ||f|| across parameter configurations.

use hsk::grid::{AnnulusMode, Exponent, ExponentVector, GridSpec};
use hsk::herz::HerzSliceParams;
use hsk::slice::SliceParams;
use hsk::verify::{maximal_boundedness_study, SuiteConfig, Support};

fn config(u: &[f64], beta: f64, s: f64) -> hsk::Result<SuiteConfig> {
    let grid = GridSpec::spanning(2, -4.0, 4.0, 65)?;
    let slice = SliceParams::new(0.25, ExponentVector::finite(u)?, ExponentVector::isotropic(2.0, 2)?)?;
    SuiteConfig::new(grid, HerzSliceParams::new(beta, Exponent::Finite(s), slice, AnnulusMode::Homogeneous)?)
}

fn main() -> hsk::Result<()> {
    let configs = vec![
        config(&[2.0, 2.0], 0.0, 2.0)?,
        config(&[2.0, 4.0], 0.25, 1.0)?,
        config(&[3.0, 3.0], -0.25, 4.0)?,
        config(&[2.0, 2.0], 1.5, 2.0)?,
    ];
    // small supports keep most of the tail of Mf on the grid
    let mut family = configs[0].default_family(11, 12);
    family.support = Support::Radius(configs[0].interior_radius() / 3.0);
    for row in maximal_boundedness_study(&configs, &family)? {
        let w = row.window;
        print!("beta {:>5} window ({:.3}, {:.3} | {:.3}) ", row.beta, w.0 .0, w.1 .0, w.2 .0);
        if row.ran {
            println!(
                "max {:.4} median {:.4} spread {:.4} dilation {:.2e} shells {:?}",
                row.max_ratio.0,
                row.median_ratio.0,
                row.spread.0,
                row.dilation_deviation.0,
                row.shell_ratios.iter().map(|(k, r)| (*k, (r.0 * 1e4).round() / 1e4)).collect::<Vec<_>>()
            );
        } else {
            println!("{}", row.note.as_deref().unwrap_or("skipped"));
        }
        if let Some(n) = row.note.as_deref().filter(|_| row.ran) {
            println!("  note: {n}");
        }
    }
    Ok(())
}
