//! Frequency-space bookkeeping for the four-linear estimate: the resonance
//! function and the A/B/C partition of `(xi_1, .., xi_4)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::bracket;

/// Ratio separating "comparable" magnitudes in region B.
pub const MAGNITUDE_RATIO: f64 = 0.99;

/// `|(sum xi_i)^3 - sum xi_i^3|`.
pub fn resonance(xi: [f64; 4]) -> f64 {
    let total: f64 = xi.iter().sum();
    (total.powi(3) - xi.iter().map(|x| x.powi(3)).sum::<f64>()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
}

pub fn classify_region(xi: [f64; 4]) -> Region {
    let max = xi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let min = xi.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if max <= 1.0 {
        return Region::A;
    }
    let positives = xi.iter().filter(|&&x| x > 0.0).count();
    if min <= MAGNITUDE_RATIO * max || positives == 2 {
        Region::B
    } else {
        Region::C
    }
}

/// `c.q. / sum <xi_i>^3` for a single tuple.
pub fn region_c_ratio(xi: [f64; 4]) -> f64 {
    resonance(xi) / xi.iter().map(|&x| bracket(x).powi(3)).sum::<f64>()
}

/// Minimum of [`region_c_ratio`] over tuples that must all lie in region C.
pub fn region_c_lower_bound_probe(samples: &[[f64; 4]]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Precondition("empty region-C sample".into()));
    }
    let mut worst = f64::INFINITY;
    for &xi in samples {
        let r = classify_region(xi);
        if r != Region::C {
            return Err(Error::Precondition(format!("tuple {xi:?} lies in region {r:?}, not C")));
        }
        worst = worst.min(region_c_ratio(xi));
    }
    Ok(worst)
}

/// Random region-C tuples: a log-uniform magnitude `M` in `[m_lo, m_hi]`,
/// every `|xi_i|` within `[0.995 M, M]` and a sign pattern with 0, 1, 3 or 4
/// positive entries.
pub fn sample_region_c(count: usize, m_lo: f64, m_hi: f64, seed: u64) -> Result<Vec<[f64; 4]>> {
    if !(m_lo >= 1.0 && m_hi > 1.0 && m_hi >= m_lo && m_hi.is_finite()) {
        return Err(Error::Precondition(format!(
            "region-C magnitudes need 1 <= m_lo <= m_hi, m_hi > 1, got [{m_lo}, {m_hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (m_lo.ln(), m_hi.ln());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = if a == b { m_lo } else { rng.random_range(a..=b).exp() };
        let positives = [0usize, 1, 3, 4][rng.random_range(0..4)];
        let mut xi = [0.0; 4];
        for (i, x) in xi.iter_mut().enumerate() {
            let mag = m * rng.random_range(0.995..=1.0);
            *x = if i < positives { mag } else { -mag };
        }
        // shuffle positions so the sign pattern is not ordered
        for i in (1..4).rev() {
            let j = rng.random_range(0..=i);
            xi.swap(i, j);
        }
        if classify_region(xi) == Region::C {
            out.push(xi);
        }
    }
    Ok(out)
}
