use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::{parity, Field};
use super::grid::Grid1D;
use super::symbol::SymbolSpec;
use crate::error::{Error, Result};
use crate::fft::{self, signed_index, slot};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major 2-D transform over `rows x cols` (rows = time, cols = space).
fn fft2(buf: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let (row_plan, col_plan) = if inverse {
        (fft::inverse_plan(cols), fft::inverse_plan(rows))
    } else {
        (fft::forward_plan(cols), fft::forward_plan(rows))
    };
    row_plan.process(buf);
    let mut col = vec![ZERO; rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = buf[r * cols + c];
        }
        col_plan.process(&mut col);
        for r in 0..rows {
            buf[r * cols + c] = col[r];
        }
    }
}

/// A real trajectory sampled on a uniform `(x, t)` lattice over the time window
/// `[t0, t0 + T_win)`, together with its space-time Fourier coefficients on the
/// `(xi_k, tau_m)` lattice, `tau_m = 2 pi m / T_win`.
///
/// Storage is row-major with one row per time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid1D,
    t0: f64,
    t_win: f64,
    n_t: usize,
    values: Vec<f64>,
    st_coeffs: Vec<Complex64>,
}

impl SpaceTimeField {
    fn check_time(t_win: f64, n_t: usize) -> Result<()> {
        if n_t < 2 || n_t % 2 != 0 {
            return Err(Error::Config(format!(
                "time sample count must be even and >= 2, got {n_t}"
            )));
        }
        if !(t_win > 0.0 && t_win.is_finite()) {
            return Err(Error::Config(format!(
                "time window must be positive, got {t_win}"
            )));
        }
        Ok(())
    }

    pub fn from_values(
        grid: Grid1D,
        t0: f64,
        t_win: f64,
        n_t: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        Self::check_time(t_win, n_t)?;
        let n = grid.n();
        if values.len() != n * n_t {
            return Err(Error::SizeMismatch {
                expected: n * n_t,
                got: values.len(),
            });
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut buf, n_t, n, false);
        let dt = t_win / n_t as f64;
        let scale = grid.dx() * dt;
        for m in 0..n_t {
            let tau = tau_of(m, n_t, t_win);
            let phase = Complex64::from_polar(scale, -tau * t0);
            for i in 0..n {
                buf[m * n + i] *= phase * parity(i);
            }
        }
        Ok(Self {
            grid,
            t0,
            t_win,
            n_t,
            values,
            st_coeffs: buf,
        })
    }

    pub fn from_fn(
        grid: Grid1D,
        t0: f64,
        t_win: f64,
        n_t: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        Self::check_time(t_win, n_t)?;
        let dt = t_win / n_t as f64;
        let xs = grid.points();
        let mut values = Vec::with_capacity(n_t * grid.n());
        for l in 0..n_t {
            let t = t0 + l as f64 * dt;
            values.extend(xs.iter().map(|&x| f(x, t)));
        }
        Self::from_values(grid, t0, t_win, n_t, values)
    }

    /// Stack spatial slices taken at `t0 + l * T_win / n_t`.
    pub fn from_slices(t0: f64, t_win: f64, slices: &[Field]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::Precondition("no time slices".into()))?;
        let grid = *first.grid();
        let mut values = Vec::with_capacity(grid.n() * slices.len());
        for s in slices {
            if *s.grid() != grid {
                return Err(Error::GridMismatch);
            }
            values.extend_from_slice(s.samples());
        }
        Self::from_values(grid, t0, t_win, slices.len(), values)
    }

    /// Build from space-time coefficients, projecting onto the jointly
    /// Hermitian subspace and dropping both Nyquist lines.
    pub fn from_coeffs(
        grid: Grid1D,
        t0: f64,
        t_win: f64,
        n_t: usize,
        coeffs: Vec<Complex64>,
    ) -> Result<Self> {
        Self::check_time(t_win, n_t)?;
        let n = grid.n();
        if coeffs.len() != n * n_t {
            return Err(Error::SizeMismatch {
                expected: n * n_t,
                got: coeffs.len(),
            });
        }
        let mut sym = vec![ZERO; n * n_t];
        for m in 0..n_t {
            if m == n_t / 2 {
                continue;
            }
            let mm = (n_t - m) % n_t;
            for i in 0..n {
                if i == n / 2 {
                    continue;
                }
                let ii = (n - i) % n;
                sym[m * n + i] = 0.5 * (coeffs[m * n + i] + coeffs[mm * n + ii].conj());
            }
        }
        let values = inverse_st(&grid, t0, t_win, n_t, &sym);
        Ok(Self {
            grid,
            t0,
            t_win,
            n_t,
            values,
            st_coeffs: sym,
        })
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    #[inline]
    pub fn t0(&self) -> f64 {
        self.t0
    }
    #[inline]
    pub fn t_win(&self) -> f64 {
        self.t_win
    }
    #[inline]
    pub fn n_t(&self) -> usize {
        self.n_t
    }
    #[inline]
    pub fn dt(&self) -> f64 {
        self.t_win / self.n_t as f64
    }
    #[inline]
    pub fn t(&self, l: usize) -> f64 {
        self.t0 + l as f64 * self.dt()
    }
    pub fn times(&self) -> Vec<f64> {
        (0..self.n_t).map(|l| self.t(l)).collect()
    }
    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    #[inline]
    pub fn st_coeffs(&self) -> &[Complex64] {
        &self.st_coeffs
    }
    /// Frequency `tau` of time slot `m`.
    #[inline]
    pub fn tau(&self, m: usize) -> f64 {
        tau_of(m, self.n_t, self.t_win)
    }

    pub fn row(&self, l: usize) -> &[f64] {
        let n = self.grid.n();
        &self.values[l * n..(l + 1) * n]
    }

    pub fn slice(&self, l: usize) -> Field {
        Field::from_samples(self.grid, self.row(l).to_vec()).expect("row length matches grid")
    }

    /// True when both operands share grid and time lattice.
    pub fn same_lattice(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.n_t == other.n_t
            && self.t0 == other.t0
            && self.t_win == other.t_win
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * alpha).collect(),
            st_coeffs: self.st_coeffs.iter().map(|c| c * alpha).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.same_lattice(other) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            st_coeffs: self
                .st_coeffs
                .iter()
                .zip(&other.st_coeffs)
                .map(|(a, b)| a - b)
                .collect(),
            ..self.clone()
        })
    }

    /// Fourier interpolation onto a lattice `space_factor` times finer in `x`
    /// and `time_factor` times finer in `t`. Both Nyquist lines are dropped.
    pub fn refine(&self, space_factor: usize, time_factor: usize) -> Result<Self> {
        if space_factor == 0 || time_factor == 0 {
            return Err(Error::Config("refinement factors must be >= 1".into()));
        }
        let n = self.grid.n();
        let nn = n * space_factor;
        let nt = self.n_t * time_factor;
        let grid = Grid1D::new(nn, self.grid.box_length())?;
        let mut c = vec![ZERO; nn * nt];
        let half_x = (n / 2) as i64;
        let half_t = (self.n_t / 2) as i64;
        for m in 0..self.n_t {
            let km = signed_index(m, self.n_t);
            if km == -half_t {
                continue;
            }
            for i in 0..n {
                let k = signed_index(i, n);
                if k == -half_x {
                    continue;
                }
                c[slot(km, nt) * nn + slot(k, nn)] = self.st_coeffs[m * n + i];
            }
        }
        // tau lattice is unchanged, so no extra phase is needed for t0.
        let values = inverse_st(&grid, self.t0, self.t_win, nt, &c);
        Ok(Self {
            grid,
            t0: self.t0,
            t_win: self.t_win,
            n_t: nt,
            values,
            st_coeffs: c,
        })
    }

    /// Pointwise product of several fields sharing a lattice. Each factor is
    /// first interpolated onto a lattice `pad` times finer in both variables so
    /// that, for `pad >= factors.len()`, the product spectrum is alias-free.
    pub fn product(factors: &[&SpaceTimeField], pad: usize) -> Result<Self> {
        let first = *factors
            .first()
            .ok_or_else(|| Error::Precondition("empty product".into()))?;
        if factors.iter().any(|f| !f.same_lattice(first)) {
            return Err(Error::GridMismatch);
        }
        let fine: Vec<SpaceTimeField> = factors
            .iter()
            .map(|f| f.refine(pad, pad))
            .collect::<Result<_>>()?;
        let mut values = fine[0].values.clone();
        for f in &fine[1..] {
            for (v, w) in values.iter_mut().zip(&f.values) {
                *v *= w;
            }
        }
        let g = fine[0].grid;
        Self::from_values(g, first.t0, first.t_win, fine[0].n_t, values)
    }

    /// Sum of `w(xi, tau) |F u|^2` with the lattice measure
    /// `(2 pi / L)(2 pi / T_win) / (2 pi)^2`, so that `w = 1` gives the
    /// space-time `L^2` norm squared.
    pub fn weighted_energy(&self, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let n = self.grid.n();
        let xis = self.grid.frequencies();
        let mut acc = 0.0;
        for m in 0..self.n_t {
            let tau = self.tau(m);
            let row = &self.st_coeffs[m * n..(m + 1) * n];
            let mut racc = 0.0;
            for (c, &xi) in row.iter().zip(&xis) {
                let a = c.norm_sqr();
                if a != 0.0 {
                    racc += weight(xi, tau) * a;
                }
            }
            acc += racc;
        }
        acc / (self.grid.box_length() * self.t_win)
    }
}

#[inline]
fn tau_of(m: usize, n_t: usize, t_win: f64) -> f64 {
    2.0 * PI * signed_index(m, n_t) as f64 / t_win
}

fn inverse_st(grid: &Grid1D, t0: f64, t_win: f64, n_t: usize, coeffs: &[Complex64]) -> Vec<f64> {
    let n = grid.n();
    let scale = 1.0 / (grid.box_length() * t_win);
    let mut buf = coeffs.to_vec();
    for m in 0..n_t {
        let tau = tau_of(m, n_t, t_win);
        let phase = Complex64::from_polar(scale, tau * t0);
        for i in 0..n {
            buf[m * n + i] *= phase * parity(i);
        }
    }
    fft2(&mut buf, n_t, n, true);
    buf.into_iter().map(|c| c.re).collect()
}

/// Pointwise multiplication in the joint Fourier variables. Both Nyquist lines
/// are zeroed and the result is projected onto real-valued fields.
pub fn apply_st_multiplier(
    field: &SpaceTimeField,
    sym: impl Fn(f64, f64) -> Result<Complex64>,
) -> Result<SpaceTimeField> {
    let g = field.grid();
    let n = g.n();
    let xis = g.frequencies();
    let mut out = vec![ZERO; n * field.n_t()];
    for m in 0..field.n_t() {
        let tau = field.tau(m);
        for i in 0..n {
            let w = sym(xis[i], tau)?;
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::Singularity { xi: xis[i] });
            }
            out[m * n + i] = w * field.st_coeffs()[m * n + i];
        }
    }
    SpaceTimeField::from_coeffs(*g, field.t0(), field.t_win(), field.n_t(), out)
}

/// [`apply_st_multiplier`] for a [`SymbolSpec`].
pub fn apply_st_symbol(field: &SpaceTimeField, sym: &SymbolSpec) -> Result<SpaceTimeField> {
    apply_st_multiplier(field, |xi, tau| sym.eval_st(xi, tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::new(16, 2.0 * PI).unwrap()
    }

    #[test]
    fn plane_wave_is_one_coefficient() {
        let g = grid();
        let (k1, m1) = (2.0, 3.0);
        let t_win = 2.0;
        let tau1 = 2.0 * PI * m1 / t_win;
        let f = SpaceTimeField::from_fn(g, 0.5, t_win, 8, |x, t| (k1 * x + tau1 * t).cos()).unwrap();
        let n = g.n();
        let mut peaks = 0;
        for m in 0..8 {
            for i in 0..n {
                let c = f.st_coeffs()[m * n + i];
                if c.norm() > 1e-9 {
                    peaks += 1;
                    assert!((c.norm() - 0.5 * g.box_length() * t_win).abs() < 1e-10);
                    assert!((g.xi(i).abs() - k1).abs() < 1e-12);
                    assert!((f.tau(m).abs() - tau1).abs() < 1e-12);
                }
            }
        }
        assert_eq!(peaks, 2);
    }

    #[test]
    fn round_trip_through_coefficients() {
        let g = grid();
        let f = SpaceTimeField::from_fn(g, -0.3, 1.5, 8, |x, t| {
            (x.sin() * (2.0 * t).cos() + 0.3 * (2.0 * x - t).cos()).exp()
        })
        .unwrap();
        let back = SpaceTimeField::from_values(
            g,
            f.t0(),
            f.t_win(),
            f.n_t(),
            inverse_st(&g, f.t0(), f.t_win(), f.n_t(), f.st_coeffs()),
        )
        .unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn refine_interpolates_band_limited_data() {
        let g = grid();
        let fun = |x: f64, t: f64| (x + 2.0 * PI * t).cos() + 0.5 * (3.0 * x).sin() * (4.0 * PI * t).cos();
        let coarse = SpaceTimeField::from_fn(g, 0.0, 1.0, 8, fun).unwrap();
        let fine = coarse.refine(2, 4).unwrap();
        let direct = SpaceTimeField::from_fn(*fine.grid(), 0.0, 1.0, 32, fun).unwrap();
        for (a, b) in fine.values().iter().zip(direct.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_energy_unit_weight_is_l2() {
        let g = grid();
        let f = SpaceTimeField::from_fn(g, 0.0, 1.0, 8, |x, t| x.cos() + (2.0 * PI * t).sin()).unwrap();
        let direct: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * g.dx() * f.dt();
        assert!((f.weighted_energy(|_, _| 1.0) - direct).abs() < 1e-12 * direct);
    }
}
