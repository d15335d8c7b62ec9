//! Monte Carlo checks of the closed-form escape fraction and scatter count.

use rand::Rng;

use crate::error::{Error, Result};
use crate::physics::StripGeometry;
use crate::rng::{chunked_moments, Moments};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    n_samples: u64,
    seed: u64,
    chunk_size: u64,
}

impl McConfig {
    pub const DEFAULT_CHUNK: u64 = 65_536;

    pub fn new(n_samples: u64, seed: u64, chunk_size: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be >= 1"));
        }
        if chunk_size == 0 {
            return Err(Error::invalid("chunk_size", "must be >= 1"));
        }
        Ok(Self {
            n_samples,
            seed,
            chunk_size,
        })
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chunk_size(&self) -> u64 {
        self.chunk_size
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl From<Moments> for McEstimate {
    fn from(m: Moments) -> Self {
        Self {
            mean: m.mean(),
            std_error: (m.variance() / m.n as f64).sqrt(),
            n_samples: m.n,
        }
    }
}

/// Escape probability for photons emitted at a uniform depth in the strip.
///
/// Each sample contributes its survival weight exp(−depth/λ) rather than a
/// 0/1 outcome.
pub fn simulate_escape(strip: &StripGeometry, lambda: f64, mc: &McConfig) -> Result<McEstimate> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    let z = strip.thickness_z();
    let m = chunked_moments(mc.n_samples, mc.chunk_size, mc.seed, |rng| {
        let depth = z * rng.random::<f64>();
        (-depth / lambda).exp()
    });
    Ok(m.into())
}

/// Scatterings along a straight path of length D with exponential free paths
/// of mean μ.
pub fn simulate_scatter_count(strip: &StripGeometry, mc: &McConfig) -> McEstimate {
    let window = strip.window_d();
    let mu = strip.mean_free_path_mu();
    let m = chunked_moments(mc.n_samples, mc.chunk_size, mc.seed, |rng| {
        let mut travelled = 0.0;
        let mut count = 0u64;
        loop {
            // 1 - u lies in (0, 1], so the log is finite
            let u: f64 = rng.random();
            travelled += -mu * (1.0 - u).ln();
            if travelled > window {
                break;
            }
            count += 1;
        }
        count as f64
    });
    m.into()
}
