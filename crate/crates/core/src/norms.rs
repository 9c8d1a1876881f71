//! Norms on fields and space-time fields: `H^s`, `L^p`, mixed
//! `L^p_x(L^q_t)`, Bourgain `X_{s,b}` and a windowed restriction-norm surrogate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{bracket, Field, SpaceTimeField};

/// Quintic smoothstep on `[0, 1]`, clamped outside.
#[inline]
pub fn smoothstep(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        y * y * y * (10.0 + y * (-15.0 + 6.0 * y))
    }
}

/// Canonical temporal cutoff: 1 on `[0, delta]`, supported in
/// `[-delta/2, 3 delta/2]`, quintic-smoothstep ramps in between.
#[inline]
pub fn canonical_cutoff(t: f64, delta: f64) -> f64 {
    let h = 0.5 * delta;
    if t <= 0.0 {
        smoothstep((t + h) / h)
    } else if t >= delta {
        smoothstep((delta + h - t) / h)
    } else {
        1.0
    }
}

/// Temporal profile used by [`xsb_restriction_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowProfile {
    /// [`canonical_cutoff`].
    Smoothstep,
    /// Cutoff identically 1 on the whole sampled window.
    FullWindow,
}

/// Norm selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormSpec {
    Sobolev { s: f64 },
    Lebesgue { p: f64 },
    Mixed { p: f64, q: f64 },
    Xsb { s: f64, b: f64 },
    XsbRestricted {
        s: f64,
        b: f64,
        delta: f64,
        profile: WindowProfile,
    },
}

fn check_exponent(p: f64, name: &str) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in [1, inf], got {p}")))
    }
}

fn check_finite(v: f64, name: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite, got {v}")))
    }
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NormSpec::Sobolev { s } => check_finite(s, "s"),
            NormSpec::Lebesgue { p } => check_exponent(p, "p"),
            NormSpec::Mixed { p, q } => {
                check_exponent(p, "p")?;
                check_exponent(q, "q")
            }
            NormSpec::Xsb { s, b } => {
                check_finite(s, "s")?;
                check_finite(b, "b")
            }
            NormSpec::XsbRestricted { s, b, delta, .. } => {
                check_finite(s, "s")?;
                check_finite(b, "b")?;
                if delta > 0.0 && delta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!("delta must be positive, got {delta}")))
                }
            }
        }
    }

    /// Evaluate on a space-time field. `Sobolev` is applied jointly in `x`
    /// (i.e. `L^2_t H^s_x`).
    pub fn eval(&self, field: &SpaceTimeField) -> Result<f64> {
        self.validate()?;
        match *self {
            NormSpec::Sobolev { s } => Ok(xsb_norm(field, s, 0.0)),
            NormSpec::Lebesgue { p } => Ok(st_lebesgue_norm(field, p)),
            NormSpec::Mixed { p, q } => mixed_norm(field, p, q),
            NormSpec::Xsb { s, b } => Ok(xsb_norm(field, s, b)),
            NormSpec::XsbRestricted {
                s,
                b,
                delta,
                profile,
            } => xsb_restriction_norm(field, s, b, delta, profile),
        }
    }
}

/// `(sum_k <xi_k>^{2s} |u_hat(xi_k)|^2 / L)^{1/2}`; equals the `L^2` norm at `s = 0`.
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    let g = f.grid();
    let mut acc = 0.0;
    for (i, c) in f.coeffs().iter().enumerate() {
        let a = c.norm_sqr();
        if a != 0.0 {
            acc += bracket(g.xi(i)).powf(2.0 * s) * a;
        }
    }
    (acc / g.box_length()).sqrt()
}

fn lp_sum(values: impl Iterator<Item = f64>, p: f64, measure: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 2.0 {
        (values.map(|v| v * v).sum::<f64>() * measure).sqrt()
    } else {
        (values.map(|v| v.abs().powf(p)).sum::<f64>() * measure).powf(1.0 / p)
    }
}

/// Spatial `L^p` norm by the rectangle rule (spectrally accurate for smooth
/// periodic data).
pub fn lebesgue_norm(f: &Field, p: f64) -> f64 {
    lp_sum(f.samples().iter().copied(), p, f.grid().dx())
}

/// Space-time `L^p_{xt}` norm.
pub fn st_lebesgue_norm(field: &SpaceTimeField, p: f64) -> f64 {
    lp_sum(
        field.values().iter().copied(),
        p,
        field.grid().dx() * field.dt(),
    )
}

/// `|| || u(x, .) ||_{L^q_t} ||_{L^p_x}`.
pub fn mixed_norm(field: &SpaceTimeField, p: f64, q: f64) -> Result<f64> {
    check_exponent(p, "p")?;
    check_exponent(q, "q")?;
    let n = field.grid().n();
    let dt = field.dt();
    let inner: Vec<f64> = (0..n)
        .map(|j| lp_sum((0..field.n_t()).map(|l| field.values()[l * n + j]), q, dt))
        .collect();
    Ok(lp_sum(inner.into_iter(), p, field.grid().dx()))
}

/// `|| <tau - xi^3>^b <xi>^s F u ||_{L^2}` on the `(xi, tau)` lattice.
pub fn xsb_norm(field: &SpaceTimeField, s: f64, b: f64) -> f64 {
    field
        .weighted_energy(|xi, tau| {
            let ws = if s == 0.0 { 1.0 } else { bracket(xi).powf(2.0 * s) };
            let wb = if b == 0.0 {
                1.0
            } else {
                bracket(tau - xi * xi * xi).powf(2.0 * b)
            };
            ws * wb
        })
        .sqrt()
}

/// Multiply a space-time field by a temporal profile.
pub fn apply_time_window(field: &SpaceTimeField, w: impl Fn(f64) -> f64) -> Result<SpaceTimeField> {
    let n = field.grid().n();
    let mut values = field.values().to_vec();
    for l in 0..field.n_t() {
        let c = w(field.t(l));
        for v in &mut values[l * n..(l + 1) * n] {
            *v *= c;
        }
    }
    SpaceTimeField::from_values(*field.grid(), field.t0(), field.t_win(), field.n_t(), values)
}

fn window_admissible(field: &SpaceTimeField, delta: f64) -> bool {
    let t_end = field.t0() + field.t_win();
    let eps = 1e-12 * field.t_win();
    field.t0() <= -0.5 * delta + eps && 1.5 * delta <= t_end + eps
}

/// Upper surrogate for the restriction norm `X_{s,b}(delta)`.
///
/// The trajectory (which must be sampled on a window containing
/// `[-delta/2, 3 delta/2]`) is multiplied by [`canonical_cutoff`] and measured in
/// `X_{s,b}`. Every cutoff equal to 1 on `[0, delta']` with `delta' >= delta`
/// yields an admissible extension, so the value reported is the minimum over
/// the dyadic ladder `delta, 2 delta, 4 delta, ..` of admissible windows. In
/// particular halving `delta` never increases the result.
pub fn xsb_restriction_norm(
    traj: &SpaceTimeField,
    s: f64,
    b: f64,
    delta: f64,
    profile: WindowProfile,
) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    match profile {
        WindowProfile::FullWindow => {
            if traj.t0() > 1e-12 * traj.t_win() || traj.t0() + traj.t_win() < delta {
                return Err(Error::Precondition(format!(
                    "trajectory window [{}, {}) does not cover [0, {delta}]",
                    traj.t0(),
                    traj.t0() + traj.t_win()
                )));
            }
            Ok(xsb_norm(traj, s, b))
        }
        WindowProfile::Smoothstep => {
            if !window_admissible(traj, delta) {
                return Err(Error::Precondition(format!(
                    "trajectory window [{}, {}) shorter than [-delta/2, 3 delta/2] for delta = {delta}",
                    traj.t0(),
                    traj.t0() + traj.t_win()
                )));
            }
            let mut best = f64::INFINITY;
            let mut d = delta;
            while window_admissible(traj, d) {
                let cut = apply_time_window(traj, |t| canonical_cutoff(t, d))?;
                best = best.min(xsb_norm(&cut, s, b));
                d *= 2.0;
            }
            Ok(best)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid1D;
    use std::f64::consts::PI;

    #[test]
    fn smoothstep_endpoints() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert!((smoothstep(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(canonical_cutoff(0.3, 1.0), 1.0);
        assert_eq!(canonical_cutoff(-0.5, 1.0), 0.0);
        assert_eq!(canonical_cutoff(1.5, 1.0), 0.0);
    }

    #[test]
    fn sobolev_of_single_mode() {
        let g = Grid1D::new(32, 2.0 * PI).unwrap();
        let amp = 0.7;
        let f = Field::from_fn(g, |x| amp * (3.0 * x).cos());
        // two modes of weight (amp L / 2)^2 each, divided by L
        let s = -0.4;
        let expect = (2.0 * (amp * PI).powi(2) / (2.0 * PI)).sqrt() * bracket(3.0).powf(s);
        assert!((sobolev_norm(&f, s) - expect).abs() < 1e-12);
    }

    #[test]
    fn sobolev_zero_matches_l2() {
        let g = Grid1D::new(64, 12.0).unwrap();
        let f = Field::from_fn(g, |x| (-x * x).exp() * (2.0 * x).sin() + 0.1);
        assert!((sobolev_norm(&f, 0.0) - lebesgue_norm(&f, 2.0)).abs() < 1e-12);
        assert_eq!(sobolev_norm(&Field::zeros(g), 1.0), 0.0);
    }

    #[test]
    fn mixed_norm_of_constant() {
        let g = Grid1D::new(16, 3.0).unwrap();
        let f = SpaceTimeField::from_fn(g, 0.0, 2.0, 8, |_, _| 1.5).unwrap();
        for (p, q) in [(1.0, 1.0), (5.0, 10.0), (2.0, f64::INFINITY)] {
            let expect = 1.5 * 3f64.powf(1.0 / p) * 2f64.powf(if q.is_infinite() { 0.0 } else { 1.0 / q });
            assert!((mixed_norm(&f, p, q).unwrap() - expect).abs() < 1e-12);
        }
        assert!(mixed_norm(&f, 0.5, 2.0).is_err());
    }

    #[test]
    fn xsb_of_plane_wave() {
        let g = Grid1D::new(16, 2.0 * PI).unwrap();
        let t_win = 1.0;
        let (k1, tau1) = (2.0, 2.0 * PI * 3.0);
        let amp = 0.8;
        let f = SpaceTimeField::from_fn(g, 0.0, t_win, 16, |x, t| amp * (k1 * x + tau1 * t).cos()).unwrap();
        let (s, b) = (0.3, 0.55);
        let w = |xi: f64, tau: f64| bracket(xi).powf(s) * bracket(tau - xi * xi * xi).powf(b);
        // |cos|^2 averages to 1/2; the two modes carry (xi, tau) = +-(k1, tau1)
        let l2sq = amp * amp * 0.5 * g.box_length() * t_win;
        let expect = (0.5 * l2sq * (w(k1, tau1).powi(2) + w(-k1, -tau1).powi(2))).sqrt();
        assert!((xsb_norm(&f, s, b) - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn xsb_restricted_full_window_is_xsb() {
        let g = Grid1D::new(16, 2.0 * PI).unwrap();
        let f = SpaceTimeField::from_fn(g, 0.0, 1.0, 16, |x, t| (x - t).sin()).unwrap();
        let a = xsb_restriction_norm(&f, 0.0, 0.6, 0.5, WindowProfile::FullWindow).unwrap();
        assert_eq!(a, xsb_norm(&f, 0.0, 0.6));
    }

    #[test]
    fn xsb_restricted_needs_enough_window() {
        let g = Grid1D::new(16, 2.0 * PI).unwrap();
        let f = SpaceTimeField::from_fn(g, 0.0, 1.0, 16, |x, t| (x - t).sin()).unwrap();
        assert!(xsb_restriction_norm(&f, 0.0, 0.6, 0.5, WindowProfile::Smoothstep).is_err());
        let z = SpaceTimeField::from_fn(g, -1.0, 4.0, 16, |_, _| 0.0).unwrap();
        assert_eq!(
            xsb_restriction_norm(&z, 0.0, 0.6, 0.5, WindowProfile::Smoothstep).unwrap(),
            0.0
        );
    }
}
