//! Inverse-CDF sampling of per-pulse photon/pair numbers.

use crate::chain::PairStatistics;
use crate::error::{invalid, Result};

/// Largest mean accepted by the table sampler.
pub const MAX_MEAN: f64 = 200.0;

/// Tabulated cumulative distribution of a count variable; one uniform per draw.
#[derive(Debug, Clone)]
pub struct CountSampler {
    cdf: Vec<f64>,
}

impl CountSampler {
    pub fn new(stats: PairStatistics, mean: f64) -> Result<Self> {
        if !(mean >= 0.0 && mean.is_finite()) {
            return invalid(format!("mean count must be finite and non-negative, got {mean}"));
        }
        if mean > MAX_MEAN {
            return invalid(format!("mean count {mean} per pulse exceeds {MAX_MEAN}"));
        }
        if mean == 0.0 {
            return Ok(Self { cdf: vec![1.0] });
        }
        // pmf recursion p_k = p_{k-1} · ratio(k)
        let (p0, ratio): (f64, Box<dyn Fn(f64) -> f64>) = match stats {
            PairStatistics::Poisson => ((-mean).exp(), Box::new(move |k| mean / k)),
            PairStatistics::ThermalMultimode { modes } => {
                let q = (mean / modes) / (1.0 + mean / modes);
                ((-modes * (mean / modes).ln_1p()).exp(), Box::new(move |k| q * (modes + k - 1.0) / k))
            }
        };
        let mut cdf = Vec::with_capacity(16);
        let mut p = p0;
        let mut acc = p0;
        cdf.push(acc);
        let mut k = 1.0;
        // stop once past the mode and the remaining tail is negligible
        while !(k > mean + 1.0 && p < 1e-18) {
            p *= ratio(k);
            acc += p;
            cdf.push(acc);
            k += 1.0;
            if k > 100_000.0 {
                break;
            }
        }
        Ok(Self { cdf })
    }

    #[inline]
    pub fn sample(&self, u: f64) -> u32 {
        // Almost all draws land in the first bin.
        for (k, c) in self.cdf.iter().enumerate() {
            if u < *c {
                return k as u32;
            }
        }
        self.cdf.len() as u32
    }

    pub fn mean_of_table(&self) -> f64 {
        let mut prev = 0.0;
        let mut m = 0.0;
        for (k, c) in self.cdf.iter().enumerate() {
            m += k as f64 * (c - prev);
            prev = *c;
        }
        m
    }
}
