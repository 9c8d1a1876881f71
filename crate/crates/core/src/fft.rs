//! Thread-local FFT plan cache plus the raw (unnormalised) transforms used
//! everywhere else.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// In-place unnormalised forward DFT, `X_k = sum_j x_j e^{-2 pi i jk/n}`.
pub(crate) fn forward(buf: &mut [Complex64]) {
    forward_plan(buf.len()).process(buf);
}

/// In-place unnormalised inverse DFT.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    inverse_plan(buf.len()).process(buf);
}

/// Signed lattice index of FFT slot `i` for a length-`n` transform.
#[inline]
pub(crate) fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT slot holding signed lattice index `k` in a length-`n` transform.
#[inline]
pub(crate) fn slot(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Smallest even integer >= `n` whose only prime factors are 2, 3 and 5.
pub fn fft_friendly(n: usize) -> usize {
    let mut m = n.max(2);
    if m % 2 == 1 {
        m += 1;
    }
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 2;
    }
}
