use num_complex::Complex64;

use super::field::Field;
use super::grid::Grid1D;
use crate::error::{Error, Result};
use crate::fft::{signed_index, slot};

/// Coefficients of `I_-^s(f, g)` on the lattice of `out_grid` (same box as the
/// inputs, `out_grid.n() >= f.grid().n()`):
///
/// `sum_{xi1 + xi2 = xi} |xi1 - xi2|^s f_hat(xi1) g_hat(xi2) * (2 pi / L)`,
///
/// evaluated by direct summation. Sums landing outside the output lattice are
/// discarded (never wrapped); with `out_grid.n() = 2 n` nothing is lost.
pub fn bilinear_minus_coeffs(
    f: &Field,
    g: &Field,
    s: f64,
    out_grid: &Grid1D,
) -> Result<Vec<Complex64>> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    if out_grid.box_length() != grid.box_length() || out_grid.n() < grid.n() {
        return Err(Error::GridMismatch);
    }
    let n = grid.n();
    let m = out_grid.n();
    let half_out = (m / 2) as i64;
    let dxi = grid.dxi();
    let nyq = grid.nyquist_slot();

    let nz = |c: &[Complex64]| -> Vec<(i64, Complex64)> {
        c.iter()
            .enumerate()
            .filter(|&(i, c)| i != nyq && *c != Complex64::new(0.0, 0.0))
            .map(|(i, &c)| (signed_index(i, n), c))
            .collect()
    };
    let fs = nz(f.coeffs());
    let gs = nz(g.coeffs());

    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for &(k1, a) in &fs {
        for &(k2, b) in &gs {
            let k = k1 + k2;
            if k < -half_out || k >= half_out {
                continue;
            }
            let w = ((k1 - k2).abs() as f64 * dxi).powf(s);
            if w != 0.0 {
                out[slot(k, m)] += a * b * w;
            }
        }
    }
    for c in &mut out {
        *c *= dxi;
    }
    Ok(out)
}

/// `I_-^s(f, g)` on the input grid. Output modes beyond the lattice are
/// dropped; for band-limited inputs (`|k| < n/4`) the result is exact.
pub fn bilinear_minus(f: &Field, g: &Field, s: f64) -> Result<Field> {
    let grid = *f.grid();
    let coeffs = bilinear_minus_coeffs(f, g, s, &grid)?;
    Field::from_coeffs(grid, coeffs)
}
