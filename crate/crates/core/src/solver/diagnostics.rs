//! Mass, energy and PDE residual.

use num_complex::Complex64;

use super::{to_internal, FluxOperator, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::fft::{self, fft_friendly, signed_index, slot};
use crate::spectral::Field;

/// `(mass, energy)` with `mass = int u^2` and
/// `energy = int u_x^2 / 2 - sign u^5 / 5`.
///
/// The quintic term is integrated on a grid large enough to be exact for the
/// band-limited interpolant.
pub fn conserved_quantities(u: &Field, sign: f64) -> (f64, f64) {
    let g = u.grid();
    let n = g.n();
    let l = g.box_length();
    let nyq = g.nyquist_slot();
    let mass = u
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != nyq)
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        / l;
    let m = fft_friendly(5 * n / 2 + 2);
    let mut uu = vec![Complex64::new(0.0, 0.0); m];
    let mut ux = uu.clone();
    for (i, &c) in to_internal(u).iter().enumerate() {
        let k = signed_index(i, n);
        uu[slot(k, m)] = c / l;
        ux[slot(k, m)] = Complex64::new(0.0, g.xi(i)) * c / l;
    }
    fft::inverse(&mut uu);
    fft::inverse(&mut ux);
    let dxm = l / m as f64;
    let energy = uu
        .iter()
        .zip(&ux)
        .map(|(a, b)| 0.5 * b.re * b.re - sign * a.re.powi(5) / 5.0)
        .sum::<f64>()
        * dxm;
    (mass, energy)
}

/// `||D_t u - (i xi^3 u_hat + N(u_hat))||_{L^2}` for one state given its time
/// derivative coefficients.
pub fn residual_norm(u: &Field, dudt: &[Complex64], cfg: &SolverConfig) -> Result<f64> {
    let g = u.grid();
    if dudt.len() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            got: dudt.len(),
        });
    }
    let a = to_internal(u);
    let mut flux = FluxOperator::new(cfg);
    let mut nl = vec![Complex64::new(0.0, 0.0); g.n()];
    flux.nonlinear(&a, &mut nl);
    let nyq = g.nyquist_slot();
    let mut acc = 0.0;
    for i in 0..g.n() {
        if i == nyq {
            continue;
        }
        let xi = g.xi(i);
        let par = if i % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = Complex64::new(0.0, xi * xi * xi) * u.coeffs()[i] + nl[i] * par;
        acc += (dudt[i] - rhs).norm_sqr();
    }
    Ok((acc / g.box_length()).sqrt())
}

/// Max over interior snapshots of the residual `||u_t + u_xxx + sign (u^4)_x||`,
/// with time derivatives from centred finite differences (fourth order when at
/// least five snapshots are available, second order otherwise). Snapshots must
/// be uniformly spaced.
pub fn pde_residual(traj: &Trajectory) -> Result<f64> {
    let snaps = &traj.snapshots;
    if snaps.len() < 3 {
        return Err(Error::Precondition(format!(
            "pde_residual needs at least 3 snapshots, got {}",
            snaps.len()
        )));
    }
    let h = snaps[1].t - snaps[0].t;
    for w in snaps.windows(2) {
        if ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Precondition("snapshots must be uniformly spaced".into()));
        }
    }
    let n = traj.config.grid.n();
    let (lo, hi, weights): (usize, usize, &[(isize, f64)]) = if snaps.len() >= 5 {
        (
            2,
            snaps.len() - 2,
            &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        )
    } else {
        (1, snaps.len() - 1, &[(-1, -0.5), (1, 0.5)])
    };
    let mut worst: f64 = 0.0;
    for j in lo..hi {
        let mut dudt = vec![Complex64::new(0.0, 0.0); n];
        for &(off, w) in weights {
            let c = snaps[(j as isize + off) as usize].field.coeffs();
            for i in 0..n {
                dudt[i] += c[i] * (w / h);
            }
        }
        worst = worst.max(residual_norm(&snaps[j].field, &dudt, &traj.config)?);
    }
    Ok(worst)
}
