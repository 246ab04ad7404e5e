//! Mixed Lebesgue norms: axis order matters when the exponents differ.

use hsk::grid::{sample_expression, Exponent, ExponentVector, GridSpec};
use hsk::mixed_norm::{flat_lebesgue_norm, mixed_lebesgue_norm};

fn main() -> hsk::Result<()> {
    let spec = GridSpec::spanning(2, -3.0, 3.0, 121)?;
    let f = sample_expression("exp(-abs(x) - 2 * y * y) * (1 + x * y)", &spec)?;

    for u in [[2.0, 2.0], [1.5, 4.0], [4.0, 1.5]] {
        let uv = ExponentVector::finite(&u)?;
        println!("||f||_L^({}, {}) = {:.12}", u[0], u[1], mixed_lebesgue_norm(&f, &uv)?);
    }
    let mixed_inf = ExponentVector::new(vec![Exponent::Finite(2.0), Exponent::Inf])?;
    println!("||f||_L^(2, inf) = {:.12}", mixed_lebesgue_norm(&f, &mixed_inf)?);
    println!("||f||_L^2 (flat) = {:.12}", flat_lebesgue_norm(&f, Exponent::Finite(2.0))?);
    Ok(())
}
