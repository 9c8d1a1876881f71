//! Exact travelling wave for `sign = +1`:
//! `u(x, t) = (5c/2)^{1/3} sech^{2/3}((3 sqrt(c) / 2)(x - ct))`.

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid1D};

/// Largest admissible profile value at the box edge.
pub const EDGE_TOLERANCE: f64 = 1e-10;

/// `(amplitude, inverse width)` of the speed-`c` soliton.
pub fn soliton_speed_amplitude(c: f64) -> (f64, f64) {
    ((2.5 * c).cbrt(), 1.5 * c.sqrt())
}

fn sech_two_thirds(z: f64) -> f64 {
    let z = z.abs();
    // sech z = 2 e^{-z} / (1 + e^{-2z}), stable for large z
    let e = (-z).exp();
    (2.0 * e / (1.0 + e * e)).powf(2.0 / 3.0)
}

/// Soliton centred at `x = 0`.
pub fn soliton(c: f64, grid: &Grid1D) -> Result<Field> {
    soliton_at(c, grid, 0.0)
}

/// Soliton at time `t`, i.e. centred at `ct` and wrapped into the periodic box.
pub fn soliton_at(c: f64, grid: &Grid1D, t: f64) -> Result<Field> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Precondition(format!("soliton speed must be positive, got {c}")));
    }
    let (amp, k) = soliton_speed_amplitude(c);
    let half = 0.5 * grid.box_length();
    let edge = amp * sech_two_thirds(k * half);
    if edge > EDGE_TOLERANCE {
        return Err(Error::Config(format!(
            "box length {} too small for soliton speed {c}: edge value {edge:.3e}",
            grid.box_length()
        )));
    }
    let l = grid.box_length();
    let centre = c * t;
    Ok(Field::from_fn(*grid, |x| {
        let r = (x - centre + half).rem_euclid(l) - half;
        amp * sech_two_thirds(k * r)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_speed_peak() {
        let g = Grid1D::new(512, 100.0).unwrap();
        let u = soliton(1.0, &g).unwrap();
        assert!((u.max_abs() - 2.5f64.cbrt()).abs() < 1e-12);
        assert!((u.max_abs() - 1.3572).abs() < 1e-4);
    }

    #[test]
    fn faster_is_narrower() {
        let g = Grid1D::new(512, 100.0).unwrap();
        let width = |c: f64| {
            let u = soliton(c, &g).unwrap();
            let peak = u.max_abs();
            u.samples().iter().filter(|&&v| v > 0.5 * peak).count()
        };
        assert!(width(4.0) < width(1.0));
    }

    #[test]
    fn small_box_rejected() {
        let g = Grid1D::new(64, 10.0).unwrap();
        assert!(soliton(1.0, &g).is_err());
        assert!(soliton(-1.0, &Grid1D::new(64, 100.0).unwrap()).is_err());
    }
}
