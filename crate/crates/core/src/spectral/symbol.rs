use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::field::{inverse_transform_complex, Field};
use crate::error::{Error, Result};
use crate::imethod::MultiplierSpec;

/// Japanese bracket `<x> = (1 + x^2)^{1/2}`.
#[inline]
pub fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Fourier symbols used by the operators of the I-method analysis.
#[derive(Clone)]
pub enum SymbolSpec {
    /// `J^s`: `<xi>^s`.
    Bessel(f64),
    /// `I^s`: `|xi|^s`; the zero mode is mapped to 0 whenever `s != 0`.
    Riesz(f64),
    /// `d/dx`: `i xi`.
    Derivative,
    /// `I_N`: `m(|xi| / N)`.
    IOperator(MultiplierSpec),
    /// `Lambda^b`: `<tau - xi^3>^b`; space-time only.
    LambdaWeight(f64),
    /// Any spatial symbol.
    Custom(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl fmt::Debug for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolSpec::Bessel(s) => write!(f, "Bessel({s})"),
            SymbolSpec::Riesz(s) => write!(f, "Riesz({s})"),
            SymbolSpec::Derivative => write!(f, "Derivative"),
            SymbolSpec::IOperator(m) => write!(f, "IOperator({m:?})"),
            SymbolSpec::LambdaWeight(b) => write!(f, "LambdaWeight({b})"),
            SymbolSpec::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl SymbolSpec {
    /// Value at spatial frequency `xi`. Fails for the space-time weight.
    pub fn eval(&self, xi: f64) -> Result<Complex64> {
        let v = match self {
            SymbolSpec::Bessel(s) => Complex64::new(bracket(xi).powf(*s), 0.0),
            SymbolSpec::Riesz(s) => {
                if *s == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else if xi == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(xi.abs().powf(*s), 0.0)
                }
            }
            SymbolSpec::Derivative => Complex64::new(0.0, xi),
            SymbolSpec::IOperator(spec) => Complex64::new(spec.symbol(xi), 0.0),
            SymbolSpec::LambdaWeight(_) => {
                return Err(Error::Precondition(
                    "lambda_weight is a space-time symbol; use apply_st_multiplier".into(),
                ))
            }
            SymbolSpec::Custom(f) => f(xi),
        };
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Singularity { xi });
        }
        Ok(v)
    }

    /// Value at `(xi, tau)`; spatial symbols ignore `tau`.
    pub fn eval_st(&self, xi: f64, tau: f64) -> Result<Complex64> {
        match self {
            SymbolSpec::LambdaWeight(b) => {
                let v = bracket(tau - xi * xi * xi).powf(*b);
                if v.is_finite() {
                    Ok(Complex64::new(v, 0.0))
                } else {
                    Err(Error::Singularity { xi })
                }
            }
            other => other.eval(xi),
        }
    }
}

fn multiplied_coeffs(f: &Field, sym: &SymbolSpec) -> Result<Vec<Complex64>> {
    let g = f.grid();
    let mut out = Vec::with_capacity(g.n());
    for (i, &c) in f.coeffs().iter().enumerate() {
        if i == g.nyquist_slot() {
            out.push(Complex64::new(0.0, 0.0));
        } else {
            out.push(sym.eval(g.xi(i))? * c);
        }
    }
    Ok(out)
}

/// Apply a Fourier multiplier and return the (real) result. The Nyquist mode is
/// zeroed; non-Hermitian symbols are projected onto their real part.
pub fn apply_multiplier(f: &Field, sym: &SymbolSpec) -> Result<Field> {
    Field::from_coeffs(*f.grid(), multiplied_coeffs(f, sym)?)
}

/// Apply a Fourier multiplier and return complex samples without projection.
pub fn apply_multiplier_complex(f: &Field, sym: &SymbolSpec) -> Result<Vec<Complex64>> {
    inverse_transform_complex(f.grid(), &multiplied_coeffs(f, sym)?)
}
