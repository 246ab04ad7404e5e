//! The Hardy-Littlewood maximal operator and its decay away from a shell.

use hsk::grid::{sample_expression, GridSpec};
use hsk::maximal::{decay_check, hl_maximal, Geometry, MaximalConfig};

fn main() -> hsk::Result<()> {
    let spec = GridSpec::spanning(2, -4.0, 4.0, 65)?;
    let f = sample_expression("ball_indicator(0, 1) - ball_indicator(0, 0.5)", &spec)?;

    for geometry in [Geometry::Ball, Geometry::Cube] {
        let cfg = MaximalConfig::dyadic(&spec, geometry);
        let m = hl_maximal(&f, &cfg)?;
        let far = spec.ravel(&[64, 32]);
        println!("{geometry:?}: {} radii, max {:.6}, Mf at (4, 0) = {:.6}", cfg.radii.len(), m.max_abs(), m.values()[far]);
    }

    // f lives in shell S_0 = {1/2 <= |x| < 1}
    let report = decay_check(&f, 0, &MaximalConfig::dyadic(&spec, Geometry::Ball))?;
    println!("||f||_1 = {:.6}", report.l1_norm);
    println!("far-field constant  {:?}", report.far);
    println!("near-field constant {:?}", report.near);
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}
