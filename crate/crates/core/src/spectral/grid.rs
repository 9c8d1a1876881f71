use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::signed_index;

/// Uniform periodic grid on `[-L/2, L/2)` with `n` collocation points.
///
/// Frequencies live on the lattice `xi_k = 2 pi k / L`, `k = -n/2 .. n/2-1`,
/// stored in FFT order (`0, 1, .., n/2-1, -n/2, .., -1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
    box_length: f64,
}

impl Grid1D {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Config(format!(
                "grid point count must be even and >= 8, got {n}"
            )));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::Config(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        Ok(Self { n, box_length })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Lattice spacing `2 pi / L` in frequency.
    #[inline]
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.box_length + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Signed mode index of FFT slot `i`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        signed_index(i, self.n)
    }

    /// Frequency of FFT slot `i`.
    #[inline]
    pub fn xi(&self, i: usize) -> f64 {
        self.mode(i) as f64 * self.dxi()
    }

    /// Frequencies in FFT order.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.xi(i)).collect()
    }

    /// FFT slot of the Nyquist mode `k = -n/2`.
    #[inline]
    pub fn nyquist_slot(&self) -> usize {
        self.n / 2
    }

    /// Largest representable |xi| excluding the Nyquist mode.
    pub fn max_frequency(&self) -> f64 {
        (self.n / 2 - 1) as f64 * self.dxi()
    }

    /// Same box, different point count.
    pub fn with_points(&self, n: usize) -> Result<Self> {
        Self::new(n, self.box_length)
    }
}

/// Convenience constructor mirroring [`Grid1D::new`].
pub fn make_grid(n: usize, box_length: f64) -> Result<Grid1D> {
    Grid1D::new(n, box_length)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_with_two_pi_box_is_integer() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let mut f = g.frequencies();
        f.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
        for (a, b) in f.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn spacing() {
        let g = make_grid(256, 100.0).unwrap();
        assert_eq!(g.dx(), 0.390625);
        assert_eq!(g.dx() * g.n() as f64, 100.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(make_grid(7, 1.0).is_err());
        assert!(make_grid(6, 1.0).is_err());
        assert!(make_grid(8, 0.0).is_err());
        assert!(make_grid(8, -1.0).is_err());
        assert!(make_grid(8, f64::NAN).is_err());
    }
}
