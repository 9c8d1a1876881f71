//! Numerical laboratory for the I-method applied to
//! `u_t + u_xxx ± (u^4)_x = 0`: a dealiased pseudospectral solver, Bourgain
//! space norms, a multilinear-estimate harness and the rescaled continuation
//! iteration.

mod error;
mod fft;

pub mod continuation;
pub mod estimates;
pub mod imethod;
pub mod norms;
pub mod solver;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};
pub use fft::fft_friendly;
