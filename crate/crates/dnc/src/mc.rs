//! Seeded Monte-Carlo plumbing.
//!
//! All stochastic paths in the crate draw from ChaCha12 with explicit
//! `(seed, stream)` addressing, so concurrent callers never share RNG state
//! and identical configs reproduce bit-identical output on any platform.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Configuration for Monte-Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub samples: u32,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            seed: 0x6d63_646e_6331,
            samples: 65_536,
        }
    }
}

/// A value plus its standard error (zero for exact computations).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            std_error: 0.0,
        }
    }
}

/// An independent substream of the given seed. Stream 0 with trial index k
/// never collides with stream 0 of trial j != k.
pub fn substream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
