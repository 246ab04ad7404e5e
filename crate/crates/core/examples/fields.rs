//! Grids, expression sampling and HSF1 round trips.

use hsk::grid::{hsf, sample_expression, GridSpec};

fn main() -> hsk::Result<()> {
    // 129 x 129 samples over [-4, 4]^2, endpoints included
    let spec = GridSpec::spanning(2, -4.0, 4.0, 129)?;
    let f = sample_expression("gaussian(1.5) * (1 + 0.5 * sin(3 * x)) * ball_indicator([0.5, 0], 3)", &spec)?;
    println!("samples {:?}, spacing {:?}, cell volume {}", spec.samples(), spec.spacing(), spec.cell_volume());
    println!("max |f| = {}", f.max_abs());
    if let Some(b) = f.support_bounds() {
        println!("support index bounds per axis {:?}", &b[..spec.dim()]);
    }

    let bytes = hsf::to_bytes(&f);
    let back = hsf::from_bytes(&bytes)?;
    assert_eq!(back, f);
    println!("HSF1 round trip: {} bytes, identical", bytes.len());

    // midpoint tiling: 16 cells on [0, 1], quadrature of 1 is exact
    let unit = GridSpec::tiling(1, 0.0, 1.0, 16)?;
    let one = sample_expression("1", &unit)?;
    println!("integral of 1 over [0, 1]: {}", one.values().iter().sum::<f64>() * unit.cell_volume());
    Ok(())
}
