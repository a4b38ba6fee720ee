//! Diversity-multiplexing view: rates that grow with SNR and the empirical
//! slope of the outage curve.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fading::{db_to_linear, RateNats, Rnsnr};
use crate::montecarlo::{proportion, run_batches};
use crate::montecarlo::{McConfig, Sampler};
use crate::protocol::{threshold, threshold_bracket, Protocol, RateTag};

/// Fewest outage events accepted at any grid point.
pub const MIN_EVENTS: u64 = 100;

/// RNSNR seen at plain SNR `snr_tilde` when the rate is `mux * ln(1 + snr)`,
/// together with that rate.
pub fn rnsnr_from_snr(snr_tilde: f64, mux: f64) -> Result<(Rnsnr, RateNats)> {
    if !(snr_tilde > 0.0) || !snr_tilde.is_finite() {
        return Err(domain(format!(
            "SNR must be finite and > 0, got {snr_tilde}"
        )));
    }
    if !(mux > 0.0 && mux <= 1.0) {
        return Err(domain(format!(
            "multiplexing gain must be in (0, 1], got {mux}"
        )));
    }
    let k = mux * snr_tilde.ln_1p();
    let s = snr_tilde / k.exp_m1();
    Ok((Rnsnr::new(s)?, RateNats::new(k)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmtPoint {
    pub protocol: Protocol,
    pub multiplexing_gain: f64,
    pub snr_db_grid: Vec<f64>,
    /// Estimated outage at each grid point.
    pub outage: Vec<f64>,
    pub events: Vec<u64>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
}

/// Outage at plain SNR `snr_db` with the rate tied to it by `mux`.
fn outage_at(protocol: Protocol, mux: f64, snr_db: f64, cfg: &McConfig) -> Result<(f64, f64, u64)> {
    let (s, k) = rnsnr_from_snr(db_to_linear(snr_db), mux)?;
    let s = s.linear();
    let rate = RateTag::Finite(k);
    let sampler = Sampler::for_min_rnsnr(s, cfg.stratify);
    let counts = run_batches(cfg, |rng, count| {
        let mut events = 0u64;
        for _ in 0..count {
            let g = sampler.draw(rng)?;
            let (lo, hi) = threshold_bracket(protocol, &g);
            let hit = if s <= lo {
                true
            } else if s > hi {
                false
            } else {
                s <= threshold(protocol, rate, &g)
            };
            events += hit as u64;
        }
        Ok(events)
    })?;
    let events: u64 = counts.iter().sum();
    let q = proportion(events, cfg.samples);
    Ok((q.p * sampler.weight(), q.p, events))
}

/// Fits the slope of `-ln P` against `ln snr` over `snr_db_grid`.
///
/// Each point is weighted by the inverse variance of `ln P`, which for a
/// binomial proportion is `(1 - q) / events`.
pub fn diversity_fit(
    protocol: Protocol,
    mux: f64,
    snr_db_grid: &[f64],
    cfg: &McConfig,
) -> Result<DmtPoint> {
    if !(mux > 0.0 && mux < 1.0) {
        return Err(domain(format!(
            "multiplexing gain must be in (0, 1), got {mux}"
        )));
    }
    if snr_db_grid.len() < 4 {
        return Err(domain("slope fit needs at least 4 grid points"));
    }
    if snr_db_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("SNR grid must be strictly increasing"));
    }
    let span = snr_db_grid[snr_db_grid.len() - 1] - snr_db_grid[0];
    if span < 15.0 {
        return Err(domain(format!(
            "SNR grid must span at least 15 dB, got {span}"
        )));
    }

    let mut outage = Vec::new();
    let mut events = Vec::new();
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &db) in snr_db_grid.iter().enumerate() {
        let (p, q, e) = outage_at(protocol, mux, db, cfg)?;
        if e < MIN_EVENTS {
            return Err(Error::InsufficientEvents {
                index: i,
                events: e,
                required: MIN_EVENTS,
            });
        }
        let w = e as f64 / (1.0 - q).max(1e-12);
        let x = db_to_linear(db).ln();
        let y = -p.ln();
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
        outage.push(p);
        events.push(e);
    }
    let det = sw * sxx - sx * sx;
    let slope = (sw * sxy - sx * sy) / det;
    let slope_stderr = (sw / det).sqrt();
    Ok(DmtPoint {
        protocol,
        multiplexing_gain: mux,
        snr_db_grid: snr_db_grid.to_vec(),
        outage,
        events,
        fitted_slope: slope,
        slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_examples() {
        let (s, k) = rnsnr_from_snr(std::f64::consts::E - 1.0, 1.0).unwrap();
        assert!((s.linear() - 1.0).abs() < 1e-14);
        assert!((k.nats() - 1.0).abs() < 1e-15);
        let (s, _) = rnsnr_from_snr(100.0, 0.5).unwrap();
        assert!((s.linear() - 100.0 / (101f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((s.linear() - 11.05).abs() < 1e-3);
        assert!(rnsnr_from_snr(100.0, 0.0).is_err());
        assert!(rnsnr_from_snr(100.0, 1.5).is_err());
        assert!(rnsnr_from_snr(-1.0, 0.5).is_err());
        // Small multiplexing gains push the RNSNR up without bound.
        let (a, _) = rnsnr_from_snr(100.0, 1e-3).unwrap();
        let (b, _) = rnsnr_from_snr(100.0, 1e-6).unwrap();
        assert!(b.linear() > 100.0 * a.linear());
    }

    #[test]
    fn direct_slope() {
        let grid: Vec<f64> = (0..6).map(|i| 20.0 + 5.0 * i as f64).collect();
        let cfg = McConfig::new(50_000, 3);
        let fit = diversity_fit(Protocol::Direct, 0.5, &grid, &cfg).unwrap();
        assert!((fit.fitted_slope - 0.5).abs() < 0.15, "{fit:?}");
    }

    #[test]
    fn validation() {
        let cfg = McConfig::new(20_000, 1);
        assert!(diversity_fit(Protocol::Direct, 1.5, &[20.0, 25.0, 30.0, 35.0], &cfg).is_err());
        assert!(diversity_fit(Protocol::Direct, 0.5, &[20.0, 25.0, 30.0], &cfg).is_err());
        assert!(diversity_fit(Protocol::Direct, 0.5, &[20.0, 22.0, 24.0, 26.0], &cfg).is_err());
    }
}
