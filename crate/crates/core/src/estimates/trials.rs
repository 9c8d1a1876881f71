//! Trial inputs: Gaussian wave packets, evolved by the free Airy group and
//! multiplied by the canonical temporal cutoff.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::canonical_cutoff;
use crate::spectral::{inverse_transform_complex, Field, Grid1D, SpaceTimeField};

/// Space-time lattice on which trials are sampled: box `[-L/2, L/2)` with `n`
/// points, window `[-delta/2, 3 delta/2)` with `n_t` slices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lab {
    pub box_length: f64,
    pub n: usize,
    pub n_t: usize,
    pub delta: f64,
}

impl Default for Lab {
    fn default() -> Self {
        Self {
            box_length: 8.0 * std::f64::consts::PI,
            n: 64,
            n_t: 64,
            delta: 0.5,
        }
    }
}

impl Lab {
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.n, self.box_length)
    }

    pub fn t0(&self) -> f64 {
        -0.5 * self.delta
    }

    pub fn t_win(&self) -> f64 {
        2.0 * self.delta
    }

    /// Same box and window, twice the points in both variables.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n,
            n_t: 2 * self.n_t,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.n_t < 8 || self.n_t % 2 != 0 {
            return Err(Error::Config(format!("n_t must be even and >= 8, got {}", self.n_t)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }
}

/// `amplitude * exp(-(x - x0)^2 / width^2) * cos(xi0 x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub x0: f64,
    pub width: f64,
    pub xi0: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn sample(&self, grid: &Grid1D) -> Field {
        Field::from_fn(*grid, |x| {
            let y = (x - self.x0) / self.width;
            self.amplitude * (-y * y).exp() * (self.xi0 * x).cos()
        })
    }
}

/// `psi(t) e^{-t d^3/dx^3} u0` sampled on the lab lattice, where `psi` is
/// the canonical cutoff of the lab window.
pub fn windowed_free_wave(u0: &Field, lab: &Lab) -> Result<SpaceTimeField> {
    lab.validate()?;
    let grid = *u0.grid();
    if grid.n() != lab.n || grid.box_length() != lab.box_length {
        return Err(Error::GridMismatch);
    }
    let n = grid.n();
    let dt = lab.t_win() / lab.n_t as f64;
    let xis = grid.frequencies();
    let mut values = Vec::with_capacity(n * lab.n_t);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for l in 0..lab.n_t {
        let t = lab.t0() + l as f64 * dt;
        let w = canonical_cutoff(t, lab.delta);
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = u0.coeffs()[i] * Complex64::from_polar(w, xis[i].powi(3) * t);
        }
        values.extend(inverse_transform_complex(&grid, &coeffs)?.iter().map(|z| z.re));
    }
    SpaceTimeField::from_values(grid, lab.t0(), lab.t_win(), lab.n_t, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialKind {
    /// Independent packets with centre frequency drawn from `xi0_range`.
    GaussianBumps,
    /// Packets with nearly equal `|xi0|` and sign patterns pushing the
    /// frequency tuple towards the non-resonant corner (region C).
    NearResonantPackets,
    /// Alternates between the two kinds trial by trial.
    Mixed,
}

/// Deterministic family of trial inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialEnsemble {
    pub kind: TrialKind,
    pub count: usize,
    pub seed: u64,
    pub xi0_range: (f64, f64),
    pub width_range: (f64, f64),
    pub x0_range: (f64, f64),
}

impl TrialEnsemble {
    pub fn gaussian(count: usize, seed: u64) -> Self {
        Self {
            kind: TrialKind::GaussianBumps,
            count,
            seed,
            xi0_range: (-2.0, 2.0),
            width_range: (3.0, 5.0),
            x0_range: (-2.0, 2.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.0 <= r.1;
        if !(ok(self.xi0_range) && ok(self.width_range) && ok(self.x0_range)) || self.width_range.0 <= 0.0 {
            return Err(Error::Config("trial ranges must be finite, ordered, widths positive".into()));
        }
        Ok(())
    }

    fn rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }

    /// The `arity` packets of one trial.
    pub fn bumps(&self, trial: usize, arity: usize) -> Vec<Bump> {
        let mut rng = self.rng(trial);
        let draw = |rng: &mut ChaCha8Rng, r: (f64, f64)| {
            if r.0 == r.1 {
                r.0
            } else {
                rng.random_range(r.0..=r.1)
            }
        };
        let near = match self.kind {
            TrialKind::GaussianBumps => false,
            TrialKind::NearResonantPackets => true,
            TrialKind::Mixed => trial % 2 == 1,
        };
        let common = draw(&mut rng, self.xi0_range).abs();
        let positives = [0usize, 1, 3, 4][rng.random_range(0..4)];
        (0..arity)
            .map(|i| {
                let xi0 = if near {
                    let mag = common * rng.random_range(0.995..=1.0);
                    if i < positives {
                        mag
                    } else {
                        -mag
                    }
                } else {
                    draw(&mut rng, self.xi0_range)
                };
                Bump {
                    x0: draw(&mut rng, self.x0_range),
                    width: draw(&mut rng, self.width_range),
                    xi0,
                    amplitude: 1.0,
                }
            })
            .collect()
    }

    /// Windowed free waves for one trial.
    pub fn inputs(&self, trial: usize, arity: usize, lab: &Lab) -> Result<Vec<SpaceTimeField>> {
        let grid = lab.grid()?;
        self.bumps(trial, arity)
            .iter()
            .map(|b| windowed_free_wave(&b.sample(&grid), lab))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::xsb_norm;

    #[test]
    fn free_wave_sits_on_the_cubic() {
        // a free wave has X_{0,b} norm nearly independent of the modulation
        // weight centre: compare b = 0 and b = 1 on a slow packet
        let lab = Lab::default();
        let grid = lab.grid().unwrap();
        let u0 = Bump { x0: 0.0, width: 4.0, xi0: 0.5, amplitude: 1.0 }.sample(&grid);
        let f = windowed_free_wave(&u0, &lab).unwrap();
        let n0 = xsb_norm(&f, 0.0, 0.0);
        let n1 = xsb_norm(&f, 0.0, 1.0);
        assert!(n1 > n0 && n1 < 20.0 * n0);
    }

    #[test]
    fn ensembles_are_deterministic() {
        let e = TrialEnsemble::gaussian(4, 11);
        assert_eq!(e.bumps(2, 4), e.bumps(2, 4));
        assert_ne!(e.bumps(1, 4), e.bumps(2, 4));
    }

    #[test]
    fn near_resonant_magnitudes_are_close() {
        let e = TrialEnsemble {
            kind: TrialKind::NearResonantPackets,
            xi0_range: (3.0, 4.0),
            ..TrialEnsemble::gaussian(4, 5)
        };
        let b = e.bumps(0, 4);
        let mags: Vec<f64> = b.iter().map(|p| p.xi0.abs()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= 0.99 * max);
    }
}
