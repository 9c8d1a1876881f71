//! Grids, discrete Fourier transforms and the Fourier-multiplier / bilinear
//! operators (`J^s`, `I^s`, `I_-^s`, `Lambda^b`, `I_N`).
//!
//! Transform convention: the forward sum carries the factor `dx` and the
//! inverse the factor `1/L`, so lattice sums approximate continuum integrals.

mod bilinear;
mod field;
mod grid;
mod spacetime;
mod symbol;

pub use bilinear::{bilinear_minus, bilinear_minus_coeffs};
pub use field::{inverse_transform_complex, transform, Field};
pub use grid::{make_grid, Grid1D};
pub use spacetime::{apply_st_multiplier, apply_st_symbol, SpaceTimeField};
pub use symbol::{apply_multiplier, apply_multiplier_complex, bracket, SymbolSpec};

/// Inverse transform returning a real [`Field`] (imaginary residue dropped).
pub fn inverse_transform(
    coeffs: &[num_complex::Complex64],
    grid: &Grid1D,
) -> crate::error::Result<Field> {
    let samples = inverse_transform_complex(grid, coeffs)?
        .into_iter()
        .map(|c| c.re)
        .collect();
    Field::from_samples(*grid, samples)
}
