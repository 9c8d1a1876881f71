//! Empirical harness for the linear, bilinear and multilinear space-time
//! estimates and for the `I_N` commutator bounds.
//!
//! An inequality `lhs <~ rhs` is exercised by evaluating both sides on trial
//! inputs; it counts as verified at desk scale when the ensemble maximum of
//! `lhs / rhs` is finite and changes by less than 10% under one doubling of
//! the lattice in both `x` and `t`.

mod commutator;
mod regions;
mod report;
mod trials;

pub use commutator::{commutator_decay_ratio, commutator_term, frequency_localization_check, CommutatorRatio, Localization};
pub use regions::{
    classify_region, region_c_lower_bound_probe, region_c_ratio, resonance, sample_region_c, Region,
    MAGNITUDE_RATIO,
};
pub use report::{run_ensemble, EstimateReport, TrialRecord, REFINEMENT_TOLERANCE};
pub use trials::{windowed_free_wave, Bump, Lab, TrialEnsemble, TrialKind};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imethod::MultiplierSpec;
use crate::norms::{mixed_norm, st_lebesgue_norm, xsb_norm};
use crate::spectral::{bilinear_minus_coeffs, bracket, Field, SpaceTimeField};

/// Refinement applied to each factor before forming a product of up to four
/// space-time fields, so the product spectrum is alias-free.
pub const PRODUCT_PAD: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateId {
    /// `||d_x prod u_i||_{X_{s,b'}}` against `prod ||u_i||_{X_{s,b}}`.
    Quartic,
    /// The same with `I_N` applied to the product and the factors.
    IQuartic,
    Lin1,
    Lin2,
    Lin3,
    Lin4,
    Bil,
    Qual,
}

impl EstimateId {
    pub const ALL: [EstimateId; 8] = [
        EstimateId::Quartic,
        EstimateId::IQuartic,
        EstimateId::Lin1,
        EstimateId::Lin2,
        EstimateId::Lin3,
        EstimateId::Lin4,
        EstimateId::Bil,
        EstimateId::Qual,
    ];

    /// Number of input fields.
    pub fn arity(self) -> usize {
        match self {
            EstimateId::Lin1 | EstimateId::Lin2 | EstimateId::Lin3 | EstimateId::Lin4 => 1,
            EstimateId::Bil => 2,
            EstimateId::Quartic | EstimateId::IQuartic | EstimateId::Qual => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimateId::Quartic => "quartic",
            EstimateId::IQuartic => "iquartic",
            EstimateId::Lin1 => "lin1",
            EstimateId::Lin2 => "lin2",
            EstimateId::Lin3 => "lin3",
            EstimateId::Lin4 => "lin4",
            EstimateId::Bil => "bil",
            EstimateId::Qual => "qual",
        }
    }
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimateId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown estimate id {s:?}")))
    }
}

/// Exponents of the tested inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateParams {
    /// Regularity `s` (used by quartic, iquartic and lin1).
    pub s: f64,
    /// Per-factor regularities of the four-linear estimate.
    pub s_i: [f64; 4],
    pub b: f64,
    pub b_prime: f64,
    /// Cut-off of `I_N` (iquartic and commutator runs).
    pub n_cut: f64,
}

impl Default for EstimateParams {
    fn default() -> Self {
        Self::with_s(0.0)
    }
}

impl EstimateParams {
    /// Defaults: `s_i = -1/8`, `b = 0.55`, `b'` at the midpoint of
    /// `(-1/2, s - 1/3)`, `N = 1`.
    pub fn with_s(s: f64) -> Self {
        Self {
            s,
            s_i: [-0.125; 4],
            b: 0.55,
            b_prime: 0.5 * (-0.5 + s - 1.0 / 3.0),
            n_cut: 1.0,
        }
    }

    /// Checks common to every estimate.
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.5 && self.b.is_finite()) {
            return Err(Error::Config(format!("b must satisfy b > 1/2, got {}", self.b)));
        }
        if !self.s.is_finite() || !self.b_prime.is_finite() {
            return Err(Error::Config("s and b' must be finite".into()));
        }
        if self.s_i.iter().any(|&v| !(v <= 0.0)) {
            return Err(Error::Config(format!("every s_i must be <= 0, got {:?}", self.s_i)));
        }
        let sum: f64 = self.s_i.iter().sum();
        if (sum + 0.5).abs() > 1e-12 {
            return Err(Error::Config(format!("s_1 + .. + s_4 must equal -1/2, got {sum}")));
        }
        MultiplierSpec::new(self.s.min(0.0), self.n_cut)?;
        Ok(())
    }

    /// Checks specific to `id`.
    pub fn validate_for(&self, id: EstimateId) -> Result<()> {
        self.validate()?;
        match id {
            EstimateId::Quartic | EstimateId::IQuartic => {
                if !(self.s <= 0.0 && self.s > -1.0 / 6.0) {
                    return Err(Error::Config(format!("{id} needs 0 >= s > -1/6, got {}", self.s)));
                }
                if !(self.b_prime > -0.5 && self.b_prime < self.s - 1.0 / 3.0) {
                    return Err(Error::Config(format!(
                        "{id} needs -1/2 < b' < s - 1/3 = {}, got {}",
                        self.s - 1.0 / 3.0,
                        self.b_prime
                    )));
                }
            }
            EstimateId::Lin1 => {
                if !(-0.25..=1.0).contains(&self.s) {
                    return Err(Error::Config(format!("lin1 needs -1/4 <= s <= 1, got {}", self.s)));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Both sides of one tested inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl Ratio {
    fn new(lhs: f64, rhs: f64) -> Result<Self> {
        if !(rhs > 0.0) || !rhs.is_finite() || !lhs.is_finite() {
            return Err(Error::DegenerateTrial);
        }
        Ok(Self {
            lhs,
            rhs,
            ratio: lhs / rhs,
        })
    }
}

/// `sqrt(sum |extra(xi)|^2 <xi>^{2s} <tau - xi^3>^{2b} |F u|^2)`.
fn weighted_xsb(field: &SpaceTimeField, s: f64, b: f64, extra: impl Fn(f64) -> f64) -> f64 {
    field
        .weighted_energy(|xi, tau| {
            let e = extra(xi);
            e * e * bracket(xi).powf(2.0 * s) * bracket(tau - xi * xi * xi).powf(2.0 * b)
        })
        .sqrt()
}

fn product(inputs: &[SpaceTimeField]) -> Result<SpaceTimeField> {
    let refs: Vec<&SpaceTimeField> = inputs.iter().collect();
    SpaceTimeField::product(&refs, PRODUCT_PAD)
}

/// `I^{1/2} I_-^{1/2}(u, v)` slice by slice, on a lattice twice as fine in
/// both variables (alias-free for the bilinear output).
pub fn bilinear_smoothing(u: &SpaceTimeField, v: &SpaceTimeField) -> Result<SpaceTimeField> {
    if !u.same_lattice(v) {
        return Err(Error::GridMismatch);
    }
    let uf = u.refine(1, 2)?;
    let vf = v.refine(1, 2)?;
    let out_grid = u.grid().with_points(2 * u.grid().n())?;
    let mut slices = Vec::with_capacity(uf.n_t());
    for l in 0..uf.n_t() {
        let mut c = bilinear_minus_coeffs(&uf.slice(l), &vf.slice(l), 0.5, &out_grid)?;
        for (i, z) in c.iter_mut().enumerate() {
            *z *= out_grid.xi(i).abs().sqrt();
        }
        slices.push(Field::from_coeffs(out_grid, c)?);
    }
    SpaceTimeField::from_slices(u.t0(), u.t_win(), &slices)
}

fn check_arity(id: EstimateId, inputs: &[SpaceTimeField]) -> Result<()> {
    if inputs.len() != id.arity() {
        return Err(Error::SizeMismatch {
            expected: id.arity(),
            got: inputs.len(),
        });
    }
    if inputs.iter().any(|f| !f.same_lattice(&inputs[0])) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Evaluate both sides of estimate `id` on `inputs`.
pub fn estimate_ratio(id: EstimateId, inputs: &[SpaceTimeField], params: &EstimateParams) -> Result<Ratio> {
    params.validate_for(id)?;
    check_arity(id, inputs)?;
    let p = params;
    match id {
        EstimateId::Lin1 => {
            let u = &inputs[0];
            let (pp, qq) = (5.0 / (1.0 - p.s), 10.0 / (1.0 + 4.0 * p.s));
            let js = crate::spectral::apply_st_symbol(u, &crate::spectral::SymbolSpec::Bessel(p.s))?;
            Ratio::new(mixed_norm(&js, pp, qq)?, xsb_norm(u, 0.0, p.b))
        }
        EstimateId::Lin2 => {
            let u = &inputs[0];
            Ratio::new(mixed_norm(u, 5.0, 10.0)?, xsb_norm(u, 0.0, p.b))
        }
        EstimateId::Lin3 => {
            let u = &inputs[0];
            Ratio::new(xsb_norm(u, 0.5, -p.b), mixed_norm(u, 10.0 / 9.0, 10.0 / 7.0)?)
        }
        EstimateId::Lin4 => {
            let u = &inputs[0];
            Ratio::new(st_lebesgue_norm(u, 8.0), xsb_norm(u, 0.0, p.b))
        }
        EstimateId::Bil => {
            let w = bilinear_smoothing(&inputs[0], &inputs[1])?;
            let rhs = xsb_norm(&inputs[0], 0.0, p.b) * xsb_norm(&inputs[1], 0.0, p.b);
            Ratio::new(st_lebesgue_norm(&w, 2.0), rhs)
        }
        EstimateId::Qual => {
            let prod = product(inputs)?;
            let lhs = weighted_xsb(&prod, 0.0, -p.b, |xi| xi);
            let rhs = inputs
                .iter()
                .zip(p.s_i)
                .map(|(u, si)| xsb_norm(u, si, p.b))
                .product();
            Ratio::new(lhs, rhs)
        }
        EstimateId::Quartic => {
            let prod = product(inputs)?;
            let lhs = weighted_xsb(&prod, p.s, p.b_prime, |xi| xi);
            let rhs = inputs.iter().map(|u| xsb_norm(u, p.s, p.b)).product();
            Ratio::new(lhs, rhs)
        }
        EstimateId::IQuartic => {
            let spec = MultiplierSpec::new(p.s, p.n_cut)?;
            let prod = product(inputs)?;
            let lhs = weighted_xsb(&prod, 0.0, p.b_prime, |xi| xi * spec.symbol(xi));
            let rhs = inputs
                .iter()
                .map(|u| weighted_xsb(u, 0.0, p.b, |xi| spec.symbol(xi)))
                .product();
            Ratio::new(lhs, rhs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_round_trip() {
        for id in EstimateId::ALL {
            assert_eq!(id.name().parse::<EstimateId>().unwrap(), id);
        }
        assert!("lin9".parse::<EstimateId>().is_err());
    }

    #[test]
    fn parameter_windows() {
        assert!(EstimateParams::default().validate().is_ok());
        let bad_b = EstimateParams { b: 0.5, ..Default::default() };
        let err = bad_b.validate().unwrap_err().to_string();
        assert!(err.contains("b > 1/2"), "{err}");
        let bad_si = EstimateParams { s_i: [-0.1; 4], ..Default::default() };
        assert!(bad_si.validate().is_err());
        let p = EstimateParams::with_s(-0.1);
        assert!(p.validate_for(EstimateId::Quartic).is_ok());
        let bad_bp = EstimateParams { b_prime: -0.4, ..p };
        assert!(bad_bp.validate_for(EstimateId::Quartic).is_err());
        assert!(EstimateParams::with_s(-0.3).validate_for(EstimateId::Lin1).is_err());
    }

    #[test]
    fn zero_inputs_are_rejected() {
        let lab = Lab::default();
        let z = windowed_free_wave(&Field::zeros(lab.grid().unwrap()), &lab).unwrap();
        for id in EstimateId::ALL {
            let inputs = vec![z.clone(); id.arity()];
            let p = EstimateParams::with_s(-0.05);
            assert_eq!(estimate_ratio(id, &inputs, &p), Err(Error::DegenerateTrial), "{id}");
        }
    }

    #[test]
    fn multilinear_ratios_are_scale_invariant() {
        let lab = Lab { n: 32, n_t: 32, ..Lab::default() };
        let ens = TrialEnsemble::gaussian(1, 9);
        let p = EstimateParams::with_s(-0.05);
        for id in EstimateId::ALL {
            let inputs = ens.inputs(0, id.arity(), &lab).unwrap();
            let scaled: Vec<SpaceTimeField> = inputs.iter().map(|f| f.scale(3.7)).collect();
            let a = estimate_ratio(id, &inputs, &p).unwrap().ratio;
            let b = estimate_ratio(id, &scaled, &p).unwrap().ratio;
            assert!((a - b).abs() <= 1e-10 * a, "{id}: {a} vs {b}");
        }
    }
}
