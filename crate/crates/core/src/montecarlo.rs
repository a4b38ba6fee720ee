//! Seeded, batch-parallel Monte Carlo over i.i.d. Rayleigh link gains.
//!
//! Work is cut into batches of [`BATCH_SIZE`] samples. Batch `i` draws from
//! stream `i` of the seeded generator and results are merged in batch order,
//! so output depends on `(seed, samples)` only and not on the worker count.
//!
//! Every RNSNR threshold in this crate is at most `1 / z13` (sending
//! everything over the direct link is always possible). An outage at RNSNR
//! `S` therefore requires `z13 <= 1 / S`, and when only RNSNRs above `s_min`
//! matter the sampler can draw `z13` conditioned on `z13 <= 1 / s_min` and
//! reweight by `p0 = Pr(z13 <= 1 / s_min)`. This is exact and cuts the
//! variance by roughly `1 / p0`.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::fading::{exp_unit, exp_unit_below, stream_rng, LinkGains};

pub const BATCH_SIZE: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    /// Number of gain realizations actually drawn.
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; `None` uses rayon's default pool.
    pub workers: Option<usize>,
    /// Condition `z13` on the region where outages can occur.
    pub stratify: bool,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig {
            samples,
            seed,
            workers: None,
            stratify: true,
        }
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_stratify(mut self, stratify: bool) -> Self {
        self.stratify = stratify;
        self
    }
}

/// How gains are drawn: unconditionally, or with `z13 <= cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sampler {
    pub cap: Option<f64>,
}

impl Sampler {
    pub fn unconditional() -> Self {
        Sampler { cap: None }
    }

    /// Sampler for outage events at RNSNRs of at least `s_min` (linear).
    pub fn for_min_rnsnr(s_min: f64, stratify: bool) -> Self {
        if stratify && s_min > 0.0 && s_min.is_finite() {
            Sampler {
                cap: Some(1.0 / s_min),
            }
        } else {
            Sampler::unconditional()
        }
    }

    /// Probability mass of the sampled region.
    pub fn weight(&self) -> f64 {
        match self.cap {
            Some(c) => -(-c).exp_m1(),
            None => 1.0,
        }
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<LinkGains> {
        let z13 = match self.cap {
            Some(c) => exp_unit_below(rng, c)?,
            None => exp_unit(rng)?,
        };
        Ok(LinkGains {
            z13,
            z12: exp_unit(rng)?,
            z23: exp_unit(rng)?,
        })
    }
}

/// Runs `per_batch(rng, count)` over all batches and returns the results in
/// batch order.
pub fn run_batches<A, F>(cfg: &McConfig, per_batch: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Result<A> + Sync,
{
    if cfg.samples == 0 {
        return Err(domain("sample count must be >= 1"));
    }
    let batches = cfg.samples.div_ceil(BATCH_SIZE);
    let job = || {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let count = BATCH_SIZE.min(cfg.samples - b * BATCH_SIZE);
                per_batch(&mut stream_rng(cfg.seed, b), count)
            })
            .collect::<Result<Vec<A>>>()
    };
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| domain(format!("cannot start {n} workers: {e}")))?
            .install(job),
        None => job(),
    }
}

/// Draws `cfg.samples` gains and maps each one through `f`, preserving order.
pub fn map_samples<T, F>(cfg: &McConfig, sampler: Sampler, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&LinkGains) -> T + Sync,
{
    let parts = run_batches(cfg, |rng, count| {
        let mut out = Vec::with_capacity(count as usize);
        for _ in 0..count {
            out.push(f(&sampler.draw(rng)?));
        }
        Ok(out)
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Binomial proportion with a 95% interval: Wald when at least 30 events were
/// seen, Wilson below that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
}

pub const Z95: f64 = 1.959_963_984_540_054;
pub const WALD_MIN_EVENTS: u64 = 30;

pub fn proportion(events: u64, n: u64) -> Proportion {
    let nf = n as f64;
    let p = events as f64 / nf;
    if events >= WALD_MIN_EVENTS {
        let h = Z95 * (p * (1.0 - p) / nf).sqrt();
        Proportion {
            p,
            lo: (p - h).max(0.0),
            hi: (p + h).min(1.0),
        }
    } else {
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / nf;
        let centre = (p + z2 / (2.0 * nf)) / denom;
        let h = Z95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        let lo = if events == 0 {
            0.0
        } else {
            (centre - h).max(0.0)
        };
        Proportion {
            p,
            lo,
            hi: (centre + h).min(1.0),
        }
    }
}
