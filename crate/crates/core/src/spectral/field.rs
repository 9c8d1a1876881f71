use num_complex::Complex64;

use super::grid::Grid1D;
use crate::error::{Error, Result};
use crate::fft;

/// Sign `(-1)^k` produced by the box offset `x_0 = -L/2`.
#[inline]
pub(crate) fn parity(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Forward transform of real samples:
/// `u_hat(xi_k) = dx * sum_j u(x_j) exp(-i xi_k x_j)`.
pub fn transform(grid: &Grid1D, samples: &[f64]) -> Result<Vec<Complex64>> {
    if samples.len() != grid.n() {
        return Err(Error::SizeMismatch {
            expected: grid.n(),
            got: samples.len(),
        });
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut buf);
    let dx = grid.dx();
    for (i, c) in buf.iter_mut().enumerate() {
        *c *= dx * parity(i);
    }
    Ok(buf)
}

/// Inverse transform, `u(x_j) = (1/L) sum_k u_hat(xi_k) exp(i xi_k x_j)`.
/// Returns complex samples; callers decide how to treat the imaginary part.
pub fn inverse_transform_complex(grid: &Grid1D, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    if coeffs.len() != grid.n() {
        return Err(Error::SizeMismatch {
            expected: grid.n(),
            got: coeffs.len(),
        });
    }
    let inv_l = 1.0 / grid.box_length();
    let mut buf: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (parity(i) * inv_l))
        .collect();
    fft::inverse(&mut buf);
    Ok(buf)
}

/// Real-valued function on a [`Grid1D`], stored both as samples and as
/// Hermitian-symmetric spectral coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    samples: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.n()],
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn from_samples(grid: Grid1D, samples: Vec<f64>) -> Result<Self> {
        let coeffs = transform(&grid, &samples)?;
        Ok(Self {
            grid,
            samples,
            coeffs,
        })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let samples = grid.points().into_iter().map(f).collect();
        Self::from_samples(grid, samples).expect("sizes agree by construction")
    }

    /// Build from spectral coefficients. The input is projected onto the
    /// Hermitian-symmetric subspace and the Nyquist mode is dropped, so the
    /// result is exactly real.
    pub fn from_coeffs(grid: Grid1D, coeffs: Vec<Complex64>) -> Result<Self> {
        let n = grid.n();
        if coeffs.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: coeffs.len(),
            });
        }
        let mut sym = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            if i == grid.nyquist_slot() {
                continue;
            }
            let j = (n - i) % n;
            sym[i] = 0.5 * (coeffs[i] + coeffs[j].conj());
        }
        let samples = inverse_transform_complex(&grid, &sym)?
            .into_iter()
            .map(|c| c.re)
            .collect();
        Ok(Self {
            grid,
            samples,
            coeffs: sym,
        })
    }

    /// Assemble without re-symmetrising. Caller guarantees consistency.
    #[cfg(test)]
    pub(crate) fn from_parts(grid: Grid1D, samples: Vec<f64>, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), grid.n());
        debug_assert_eq!(coeffs.len(), grid.n());
        Self {
            grid,
            samples,
            coeffs,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|v| v * alpha).collect(),
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Largest violation of `u_hat(-xi) = conj(u_hat(xi))`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        (0..n)
            .map(|i| (self.coeffs[i] - self.coeffs[(n - i) % n].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Exact translation by `shift` (spectral phase ramp).
    pub fn translate(&self, shift: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * Complex64::from_polar(1.0, -self.grid.xi(i) * shift))
            .collect();
        Self::from_coeffs(self.grid, coeffs).expect("sizes agree")
    }

    /// `u(-x)` on the same grid; exact because `-x_j = x_{n-j}` (mod L).
    pub fn reflect(&self) -> Self {
        let n = self.grid.n();
        let samples = (0..n).map(|j| self.samples[(n - j) % n]).collect();
        Self::from_samples(self.grid, samples).expect("sizes agree")
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
