//! The smoothing operator `I_N`, the scaling map and the almost-conserved
//! quantity `||I_N u||_{L^2}^2`.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{signed_index, slot};
use crate::norms::{lebesgue_norm, smoothstep};
use crate::solver::{step_plan, SolverConfig, Stepper};
use crate::spectral::{bracket, Field, Grid1D};

/// `(s, N)` defining `m(|xi| / N)`; the transition on `[1, 2]` is
/// `x^{s sigma(log2 x)}` with the quintic smoothstep `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub s: f64,
    pub n_cut: f64,
}

impl MultiplierSpec {
    pub fn new(s: f64, n_cut: f64) -> Result<Self> {
        if !(s.is_finite() && s <= 0.0) {
            return Err(Error::Config(format!("multiplier order must satisfy s <= 0, got {s}")));
        }
        if !(n_cut >= 1.0 && n_cut.is_finite()) {
            return Err(Error::Config(format!("multiplier cut-off must satisfy N >= 1, got {n_cut}")));
        }
        Ok(Self { s, n_cut })
    }

    /// `m(x)` for `x >= 0` (negative input is treated as `|x|`).
    pub fn m(&self, x: f64) -> f64 {
        let x = x.abs();
        if x <= 1.0 {
            1.0
        } else if x >= 2.0 {
            x.powf(self.s)
        } else {
            x.powf(self.s * smoothstep(x.log2()))
        }
    }

    /// `m(|xi| / N)`.
    pub fn symbol(&self, xi: f64) -> f64 {
        self.m(xi.abs() / self.n_cut)
    }
}

pub fn m_eval(x: f64, spec: &MultiplierSpec) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Precondition(format!("m is defined for x >= 0, got {x}")));
    }
    Ok(spec.m(x))
}

pub fn i_operator(f: &Field, spec: &MultiplierSpec) -> Field {
    let g = *f.grid();
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| c * spec.symbol(g.xi(i)))
        .collect();
    Field::from_coeffs(g, coeffs).expect("coefficient count matches grid")
}

/// `||I_N f||_{L^2}` with the lattice equivalence constants
/// `c1 ||f||_{H^s} <= value <= c2 ||f||_{H^s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalentNorm {
    pub value: f64,
    pub c1: f64,
    pub c2: f64,
}

pub fn equivalent_norm(f: &Field, spec: &MultiplierSpec) -> EquivalentNorm {
    let g = f.grid();
    let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
    for i in 0..g.n() {
        if i == g.nyquist_slot() {
            continue;
        }
        let xi = g.xi(i);
        let r = spec.symbol(xi) / bracket(xi).powf(spec.s);
        c1 = c1.min(r);
        c2 = c2.max(r);
    }
    EquivalentNorm {
        value: lebesgue_norm(&i_operator(f, spec), 2.0),
        c1,
        c2,
    }
}

/// Grid for `u0^lambda`: box `lambda L` with the same spacing class.
pub fn rescaled_grid(grid: &Grid1D, lambda: f64) -> Result<Grid1D> {
    let n = crate::fft::fft_friendly((lambda * grid.n() as f64 - 1e-9).ceil() as usize);
    Grid1D::new(n, lambda * grid.box_length())
}

/// `u0^lambda(x) = lambda^{-2/3} u0(x / lambda)` on the enlarged box.
///
/// On the lattices this is exact: the coefficient with index `k` of the new
/// grid equals `lambda^{1/3}` times index `k` of the old one.
pub fn rescale_data(u0: &Field, lambda: f64) -> Result<Field> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::Precondition(format!("rescaling needs lambda >= 1, got {lambda}")));
    }
    let g = u0.grid();
    let target = rescaled_grid(g, lambda)?;
    let factor = lambda.cbrt();
    let (n, m) = (g.n(), target.n());
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
    for (i, &c) in u0.coeffs().iter().enumerate() {
        if i != g.nyquist_slot() {
            coeffs[slot(signed_index(i, n), m)] = c * factor;
        }
    }
    Field::from_coeffs(target, coeffs)
}

/// Inverse of [`rescale_data`]: `u(x) = lambda^{2/3} v(lambda x)` sampled on
/// `target` (whose box must be `1 / lambda` of `v`'s). Modes not representable
/// on `target` are dropped.
pub fn unscale_data(v: &Field, lambda: f64, target: &Grid1D) -> Result<Field> {
    let src = v.grid();
    let expect = lambda * target.box_length();
    if (src.box_length() - expect).abs() > 1e-9 * expect {
        return Err(Error::GridMismatch);
    }
    let factor = lambda.cbrt().recip();
    let (n, m) = (target.n(), src.n());
    let half = (n.min(m) / 2) as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let k = signed_index(i, n);
        if k.abs() < half {
            coeffs[i] = v.coeffs()[slot(k, m)] * factor;
        }
    }
    Field::from_coeffs(*target, coeffs)
}

/// `||I_N u0^lambda||_{L^2}` without re-gridding, through the identity
/// `||I_N u0^lambda|| = lambda^{-1/6} ||I_{lambda N} u0||`.
pub fn rescaled_i_norm(u0: &Field, lambda: f64, spec: &MultiplierSpec) -> Result<f64> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::Precondition(format!("rescaling needs lambda >= 1, got {lambda}")));
    }
    let wide = MultiplierSpec::new(spec.s, spec.n_cut * lambda)?;
    Ok(lambda.powf(-1.0 / 6.0) * lebesgue_norm(&i_operator(u0, &wide), 2.0))
}

/// Change of `||I_N u||_{L^2}^2` across one solve.
///
/// `before` and `after` are measured on the endpoint states. `increment` is
/// obtained by integrating `d/dt ||I_N u||^2 = 2 <I_N u, I_N N(u)>` with the
/// solver's own stages: the Airy part drops out exactly and the `m = 1` part
/// of the flux vanishes identically, so the value carries no contribution
/// from the integrator's small violation of `L^2` conservation (which
/// `after - before` does).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Increment {
    pub before: f64,
    pub after: f64,
    pub increment: f64,
}

impl Increment {
    /// `after - before`, including integrator drift.
    pub fn direct_difference(&self) -> f64 {
        self.after - self.before
    }

    /// Change of the unsquared norm.
    pub fn unsquared(&self) -> f64 {
        (self.before + self.increment).max(0.0).sqrt() - self.before.sqrt()
    }
}

fn squared_weights(grid: &Grid1D, spec: &MultiplierSpec) -> Vec<f64> {
    grid.frequencies()
        .iter()
        .map(|&xi| spec.symbol(xi).powi(2))
        .collect()
}

/// Evolve `u0` over `[0, delta]` and measure the increment for every spec.
pub fn measure_increments(
    u0: &Field,
    specs: &[MultiplierSpec],
    delta: f64,
    cfg: &SolverConfig,
) -> Result<Vec<Increment>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
    }
    if *u0.grid() != cfg.grid {
        return Err(Error::GridMismatch);
    }
    let g = cfg.grid;
    let weights: Vec<Vec<f64>> = specs.iter().map(|sp| squared_weights(&g, sp)).collect();
    let (steps, dt) = step_plan(delta, cfg.dt);
    let mut stepper = Stepper::with_dt(cfg, dt)?;
    let mut acc = vec![0.0; specs.len()];
    let u1 = stepper.run_monitored(u0, steps, 0.0, &weights, &mut acc)?;
    Ok(specs
        .iter()
        .zip(acc)
        .map(|(sp, inc)| Increment {
            before: lebesgue_norm(&i_operator(u0, sp), 2.0).powi(2),
            after: lebesgue_norm(&i_operator(&u1, sp), 2.0).powi(2),
            increment: inc,
        })
        .collect())
}

pub fn almost_conservation_increment(
    u0: &Field,
    spec: &MultiplierSpec,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<Increment> {
    Ok(measure_increments(u0, std::slice::from_ref(spec), delta, cfg)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_cut: f64,
    pub before: f64,
    pub after: f64,
    pub increment: f64,
    /// Least-squares slope of `log|increment|` against `log N` over this and
    /// all earlier rows; `None` for the first row.
    pub fitted_slope_so_far: Option<f64>,
}

/// Increments for several cut-offs from a single solve of length `delta`.
pub fn increment_sweep(
    u0: &Field,
    s: f64,
    cutoffs: &[f64],
    delta: f64,
    cfg: &SolverConfig,
) -> Result<Vec<SweepRow>> {
    let specs = cutoffs
        .iter()
        .map(|&nc| MultiplierSpec::new(s, nc))
        .collect::<Result<Vec<_>>>()?;
    let incs = measure_increments(u0, &specs, delta, cfg)?;
    let mut rows: Vec<SweepRow> = Vec::with_capacity(cutoffs.len());
    for (&nc, inc) in cutoffs.iter().zip(incs) {
        rows.push(SweepRow {
            n_cut: nc,
            before: inc.before,
            after: inc.after,
            increment: inc.increment,
            fitted_slope_so_far: None,
        });
        if rows.len() >= 2 {
            let xs: Vec<f64> = rows.iter().map(|r| r.n_cut).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.increment.abs()).collect();
            rows.last_mut().unwrap().fitted_slope_so_far = loglog_slope(&xs, &ys);
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], preamble: &[String], mut w: W) -> std::io::Result<()> {
    for line in preamble {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "N,before,after,increment,fitted_slope_so_far")?;
    for r in rows {
        let slope = r.fitted_slope_so_far.map(|v| v.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", r.n_cut, r.before, r.after, r.increment, slope)?;
    }
    Ok(())
}

/// Least-squares slope of `log y` against `log x`; `None` if fewer than two
/// usable (positive, finite) points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Real field with random phases and `|u_hat(xi_k)| ~ <xi_k>^{slope}` for
/// `1 <= |k| <= k_max`, normalised to `||u||_{L^2} = l2`.
pub fn rough_data(grid: &Grid1D, slope: f64, k_max: usize, l2: f64, seed: u64) -> Result<Field> {
    let n = grid.n();
    if k_max == 0 || k_max >= n / 2 {
        return Err(Error::Precondition(format!(
            "rough data needs 1 <= k_max < n/2, got {k_max}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..=k_max as i64 {
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let amp = bracket(grid.xi(slot(k, n))).powf(slope);
        let c = Complex64::from_polar(amp, phase);
        coeffs[slot(k, n)] = c;
        coeffs[slot(-k, n)] = c.conj();
    }
    let f = Field::from_coeffs(*grid, coeffs)?;
    Ok(f.scale(l2 / lebesgue_norm(&f, 2.0)))
}
