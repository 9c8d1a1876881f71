//! The `I_N` commutator `d/dx (I_N(u_1 u_2 u_3 u_4) - I_N u_1 .. I_N u_4)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{product, weighted_xsb};
use crate::error::{Error, Result};
use crate::imethod::{i_operator, MultiplierSpec};
use crate::norms::{sobolev_norm, xsb_norm};
use crate::spectral::{apply_st_multiplier, apply_st_symbol, Field, SpaceTimeField, SymbolSpec};

fn check_four(u: &[SpaceTimeField]) -> Result<()> {
    if u.len() != 4 {
        return Err(Error::SizeMismatch { expected: 4, got: u.len() });
    }
    if u.iter().any(|f| !f.same_lattice(&u[0])) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// The commutator on the alias-free product lattice.
pub fn commutator_term(u: &[SpaceTimeField], spec: &MultiplierSpec) -> Result<SpaceTimeField> {
    check_four(u)?;
    let sym = SymbolSpec::IOperator(*spec);
    let smoothed = u
        .iter()
        .map(|f| apply_st_symbol(f, &sym))
        .collect::<Result<Vec<_>>>()?;
    let full = product(u)?;
    let split = product(&smoothed)?;
    let i_full = apply_st_multiplier(&full, |xi, _| Ok(Complex64::new(spec.symbol(xi), 0.0)))?;
    apply_st_symbol(&i_full.sub(&split)?, &SymbolSpec::Derivative)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorRatio {
    /// `||commutator||_{X_{0,-b}}`.
    pub numerator: f64,
    /// `N^{-1/2} prod ||I_N u_i||_{X_{0,b}}`.
    pub denominator: f64,
    pub ratio: f64,
}

pub fn commutator_decay_ratio(u: &[SpaceTimeField], spec: &MultiplierSpec, b: f64) -> Result<CommutatorRatio> {
    let numerator = xsb_norm(&commutator_term(u, spec)?, 0.0, -b);
    let denominator = spec.n_cut.powf(-0.5)
        * u.iter()
            .map(|f| weighted_xsb(f, 0.0, b, |xi| spec.symbol(xi)))
            .product::<f64>();
    if !(denominator > 0.0 && denominator.is_finite()) {
        return Err(Error::DegenerateTrial);
    }
    Ok(CommutatorRatio {
        numerator,
        denominator,
        ratio: numerator / denominator,
    })
}

/// Spatial form of `||v||_{s_1} <~ N^{s_1 - s} ||v||_s ~ N^{s_1} ||I_N v||_0`
/// for `v` supported in `|xi| >= N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// `||v||_{H^{s_1}}`.
    pub lhs: f64,
    /// `N^{s_1 - s} ||v||_{H^s}`.
    pub rhs: f64,
    /// `N^{s_1} ||I_N v||_{L^2}` with `I_N` of order `s`.
    pub i_form: f64,
}

/// `v` is first projected onto `|xi| >= N`.
pub fn frequency_localization_check(v: &Field, s: f64, s1: f64, n_cut: f64) -> Result<Localization> {
    if s1 > s {
        return Err(Error::Precondition(format!("need s_1 <= s, got s_1 = {s1}, s = {s}")));
    }
    let spec = MultiplierSpec::new(s, n_cut)?;
    let g = *v.grid();
    let coeffs = v
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| if g.xi(i).abs() >= n_cut { c } else { Complex64::new(0.0, 0.0) })
        .collect();
    let high = Field::from_coeffs(g, coeffs)?;
    if sobolev_norm(&high, 0.0) <= 1e-12 * sobolev_norm(v, 0.0) {
        return Err(Error::Precondition("projection onto |xi| >= N leaves the zero field".into()));
    }
    Ok(Localization {
        lhs: sobolev_norm(&high, s1),
        rhs: n_cut.powf(s1 - s) * sobolev_norm(&high, s),
        i_form: n_cut.powf(s1) * sobolev_norm(&i_operator(&high, &spec), 0.0),
    })
}
