//! Outage probabilities: closed-form bounds, the direct-link baseline and
//! Monte Carlo estimates over Rayleigh fading.
//!
//! An outage at RNSNR `S` happens when `S <= B(Z)`, with `B` the protocol's
//! per-realization threshold.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fading::{db_to_linear, Rnsnr};
use crate::montecarlo::{map_samples, proportion, run_batches, McConfig, Proportion, Sampler};
use crate::protocol::{threshold, threshold_bracket, Protocol, RateTag};
use crate::special::{integrate, one_minus_xk1_exp, xk1_exp};

/// Smallest sample budget accepted by [`mc_outage`].
pub const MIN_SAMPLES: u64 = 10_000;

/// `Pr(1/Z12 + 1/(Z23 + z) >= 1/x)` for unit-mean exponential `Z12, Z23`.
pub fn claim1(x: f64, z: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("claim1 needs x > 0, got {x}")));
    }
    if !(0.0..=x).contains(&z) {
        return Err(domain(format!(
            "claim1 needs 0 <= z <= x, got z = {z}, x = {x}"
        )));
    }
    // 1 - c e^z with c = 2x K1(2x) e^{-2x}. For small z the form below keeps
    // the small-x result accurate; for larger z it would lose e^z ulps, and
    // the result is then at least 1 - e^{-1/2} anyway.
    let v = if z <= 0.5 {
        one_minus_xk1_exp(2.0 * x) * z.exp() - z.exp_m1()
    } else if z < 700.0 {
        1.0 - xk1_exp(2.0 * x) * z.exp()
    } else {
        1.0
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Outage of direct transmission, `Pr(Z13 <= 1/S)`.
pub fn direct_outage(s: Rnsnr) -> f64 {
    -(-1.0 / s.linear()).exp_m1()
}

/// `∫_lo^hi f` in the variable `ln z`, which resolves the features near
/// `z = 0` that the bounds develop at high SNR.
fn log_integral<F: Fn(f64) -> f64>(f: F, hi: f64, scale: f64) -> Result<f64> {
    let lo = hi * 1e-18;
    let r = integrate(
        |v: f64| {
            let z = v.exp();
            f(z) * z
        },
        lo.ln(),
        hi.ln(),
        1e-13 * scale,
        1e-11,
    )?;
    Ok(r.value)
}

/// One of the six analytic outage bounds, indexed as follows.
///
/// 1. lower bound on the cut-set outage, `(1 - e^{-1/S})^2`
/// 2. lower bound on the DF outage
/// 3. upper bound on the HDP1 outage (any rate)
/// 4. lower bound on the HDP1 outage, tight as `K -> 0`
/// 5. upper bound on the HDP2 outage (any rate)
/// 6. lower bound on the HDP2 outage, tight as `K -> 0`
pub fn thm4_bound(part: u8, s: Rnsnr) -> Result<f64> {
    let u = 1.0 / s.linear();
    let one_minus_e = -(-u).exp_m1();
    let v = match part {
        1 => one_minus_e * one_minus_e,
        // The leading `u` terms cancel; `e^{-u} - 1 + u` is kept separate.
        2 => -((-u).exp_m1() + u) - u * (-2.0 * u).exp_m1(),
        4 => one_minus_xk1_exp(2.0 * u) * one_minus_e,
        6 => -((-u).exp_m1() + u) + u * one_minus_xk1_exp(2.0 * u),
        3 | 5 => {
            let coherent = part == 5;
            let scale = u * u;
            // Direct regime with z13 <= 1/S.
            let a = log_integral(
                |z| {
                    if coherent {
                        one_minus_xk1_exp(2.0 * z) + (-z).exp_m1()
                    } else {
                        one_minus_xk1_exp(2.0 * z) * (-z).exp()
                    }
                },
                u,
                scale,
            )?;
            // Relay regime with the envelope above S.
            let b = log_integral(
                |z| {
                    let core = one_minus_xk1_exp(4.0 * u * u / z) - one_minus_xk1_exp(2.0 * z);
                    if coherent {
                        core
                    } else {
                        core * (-z).exp()
                    }
                },
                std::f64::consts::SQRT_2 * u,
                scale,
            )?;
            a + b
        }
        _ => return Err(domain(format!("bound index must be 1..=6, got {part}"))),
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Protocol bounded by each analytic part, and whether it is a lower bound.
pub fn thm4_target(part: u8) -> Option<(Protocol, Estimator)> {
    Some(match part {
        1 => (Protocol::FullDuplexLb, Estimator::AnalyticLower),
        2 => (Protocol::FullDuplexDf, Estimator::AnalyticLower),
        3 => (Protocol::Hdp1, Estimator::AnalyticUpper),
        4 => (Protocol::Hdp1, Estimator::AnalyticLower),
        5 => (Protocol::Hdp2, Estimator::AnalyticUpper),
        6 => (Protocol::Hdp2, Estimator::AnalyticLower),
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Estimator {
    Mc,
    /// Exact closed form.
    Analytic,
    AnalyticLower,
    AnalyticUpper,
}

impl Estimator {
    pub fn label(self) -> &'static str {
        match self {
            Estimator::Mc => "mc",
            Estimator::Analytic => "analytic",
            Estimator::AnalyticLower => "analytic-lower",
            Estimator::AnalyticUpper => "analytic-upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutagePoint {
    pub rnsnr_db: f64,
    pub prob: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Largest distance from `prob` to an interval end.
    pub ci_halfwidth_95: f64,
    /// Samples drawn (zero for analytic points).
    pub n_samples: u64,
    /// Outage events among them.
    pub events: u64,
    pub estimator: Estimator,
}

impl OutagePoint {
    fn analytic(rnsnr_db: f64, prob: f64, estimator: Estimator) -> Self {
        OutagePoint {
            rnsnr_db,
            prob,
            ci_lo: prob,
            ci_hi: prob,
            ci_halfwidth_95: 0.0,
            n_samples: 0,
            events: 0,
            estimator,
        }
    }

    /// Point from `events` out of `n` conditional draws with region weight
    /// `weight`.
    fn monte_carlo(rnsnr_db: f64, events: u64, n: u64, weight: f64) -> Self {
        let Proportion { p, lo, hi } = proportion(events, n);
        let (p, lo, hi) = (p * weight, lo * weight, hi * weight);
        OutagePoint {
            rnsnr_db,
            prob: p,
            ci_lo: lo,
            ci_hi: hi,
            ci_halfwidth_95: (hi - p).max(p - lo),
            n_samples: n,
            events,
            estimator: Estimator::Mc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageCurve {
    pub rate: RateTag,
    pub protocol: Protocol,
    pub points: Vec<OutagePoint>,
}

fn check_grid(grid_db: &[f64]) -> Result<()> {
    if grid_db.is_empty() {
        return Err(domain("RNSNR grid is empty"));
    }
    if grid_db.iter().any(|x| !x.is_finite()) {
        return Err(domain("RNSNR grid has non-finite entries"));
    }
    if grid_db.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("RNSNR grid must be strictly increasing"));
    }
    Ok(())
}

/// Analytic curve for one of the six bounds, or the direct-link outage when
/// `part` is `None`.
pub fn analytic_curve(part: Option<u8>, grid_db: &[f64]) -> Result<OutageCurve> {
    check_grid(grid_db)?;
    let (protocol, estimator) = match part {
        Some(p) => thm4_target(p).ok_or_else(|| domain(format!("no bound with index {p}")))?,
        None => (Protocol::Direct, Estimator::Analytic),
    };
    let points = grid_db
        .iter()
        .map(|&db| {
            let s = Rnsnr::from_db(db)?;
            let p = match part {
                Some(k) => thm4_bound(k, s)?,
                None => direct_outage(s),
            };
            Ok(OutagePoint::analytic(db, p, estimator))
        })
        .collect::<Result<Vec<_>>>()?;
    let rate = if matches!(part, Some(4) | Some(6)) {
        RateTag::ZeroLimit
    } else {
        RateTag::InfLimit
    };
    Ok(OutageCurve {
        rate,
        protocol,
        points,
    })
}

/// Monte Carlo outage of one protocol. See [`mc_outage_many`].
pub fn mc_outage(
    protocol: Protocol,
    rate: RateTag,
    grid_db: &[f64],
    cfg: &McConfig,
) -> Result<OutageCurve> {
    Ok(mc_outage_many(&[(protocol, rate)], grid_db, cfg)?.remove(0))
}

/// Monte Carlo outage curves for several protocols on common gain samples.
///
/// Each realization is drawn once and compared against every RNSNR on the
/// grid, so the curves are monotone by construction. Exact thresholds of the
/// half-duplex protocols are only computed when a grid point falls between
/// their small- and large-rate limits.
pub fn mc_outage_many(
    specs: &[(Protocol, RateTag)],
    grid_db: &[f64],
    cfg: &McConfig,
) -> Result<Vec<OutageCurve>> {
    check_grid(grid_db)?;
    if cfg.samples < MIN_SAMPLES {
        return Err(domain(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            cfg.samples
        )));
    }
    let grid: Vec<f64> = grid_db.iter().map(|&d| db_to_linear(d)).collect();
    let sampler = Sampler::for_min_rnsnr(grid[0], cfg.stratify);
    let m = grid.len();

    // hist[c][j]: samples whose threshold is at or above exactly j grid points.
    let parts = run_batches(cfg, |rng, count| {
        let mut hist = vec![vec![0u64; m + 1]; specs.len()];
        for _ in 0..count {
            let g = sampler.draw(rng)?;
            for (c, &(protocol, rate)) in specs.iter().enumerate() {
                let at_or_below = |b: f64| grid.partition_point(|&s| s <= b);
                let hits = if let RateTag::Finite(_) = rate {
                    let (lo, hi) = threshold_bracket(protocol, &g);
                    let (a, b) = (at_or_below(lo), at_or_below(hi));
                    if a == b {
                        a
                    } else {
                        at_or_below(threshold(protocol, rate, &g))
                    }
                } else {
                    at_or_below(threshold(protocol, rate, &g))
                };
                hist[c][hits] += 1;
            }
        }
        Ok(hist)
    })?;

    let mut total = vec![vec![0u64; m + 1]; specs.len()];
    for part in parts {
        for (acc, h) in total.iter_mut().zip(part) {
            for (a, v) in acc.iter_mut().zip(h) {
                *a += v;
            }
        }
    }
    let weight = sampler.weight();
    Ok(specs
        .iter()
        .zip(total)
        .map(|(&(protocol, rate), hist)| {
            // Events at grid point j: thresholds reaching past j.
            let mut events = vec![0u64; m];
            let mut running = 0u64;
            for j in (0..m).rev() {
                running += hist[j + 1];
                events[j] = running;
            }
            let points = grid_db
                .iter()
                .zip(events)
                .map(|(&db, e)| OutagePoint::monte_carlo(db, e, cfg.samples, weight))
                .collect();
            OutageCurve {
                rate,
                protocol,
                points,
            }
        })
        .collect())
}

/// Stored thresholds from a (possibly conditioned) sample, for quantiles.
#[derive(Debug, Clone)]
pub struct ThresholdSample {
    /// Thresholds sorted in decreasing order.
    pub values: Vec<f64>,
    /// Probability mass of the sampled region.
    pub weight: f64,
}

impl ThresholdSample {
    /// Samples thresholds relevant to RNSNRs of at least `s_min_db`.
    pub fn draw(
        protocol: Protocol,
        rate: RateTag,
        s_min_db: f64,
        cfg: &McConfig,
    ) -> Result<ThresholdSample> {
        let sampler = Sampler::for_min_rnsnr(db_to_linear(s_min_db), cfg.stratify);
        let mut values = map_samples(cfg, sampler, |g| threshold(protocol, rate, g))?;
        values.sort_unstable_by(|a, b| b.total_cmp(a));
        Ok(ThresholdSample {
            values,
            weight: sampler.weight(),
        })
    }

    /// Estimated outage at linear RNSNR `s`.
    pub fn outage(&self, s: f64) -> Proportion {
        let events = self.values.partition_point(|&b| b >= s) as u64;
        let q = proportion(events, self.values.len() as u64);
        Proportion {
            p: q.p * self.weight,
            lo: q.lo * self.weight,
            hi: q.hi * self.weight,
        }
    }

    /// RNSNR in dB at which the estimated outage falls to `target`.
    pub fn crossing_db(&self, target: f64) -> Result<f64> {
        let n = self.values.len() as f64;
        let k = (target / self.weight * n).round() as usize;
        if k < 100 || k >= self.values.len() {
            return Err(Error::InsufficientEvents {
                index: 0,
                events: k as u64,
                required: 100,
            });
        }
        // Midpoint between the k-th and (k+1)-th largest thresholds.
        let s = 0.5 * (self.values[k - 1] + self.values[k]);
        Ok(10.0 * s.log10())
    }
}

/// RNSNR in dB where an analytic bound reaches `target`, by bisection on a
/// decreasing curve.
pub fn analytic_crossing_db<F: Fn(Rnsnr) -> Result<f64>>(f: F, target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (-20.0, 80.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(Rnsnr::from_db(mid)?)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_k1;

    fn s(x: f64) -> Rnsnr {
        Rnsnr::new(x).unwrap()
    }

    #[test]
    fn claim1_examples() {
        assert!(claim1(1e-12, 0.0).unwrap() < 1e-9);
        let k1 = bessel_k1(1.0).unwrap();
        assert!((claim1(0.5, 0.0).unwrap() - (1.0 - k1 * (-1.0f64).exp())).abs() < 1e-15);
        assert!((claim1(0.5, 0.0).unwrap() - 0.778_576).abs() < 1e-5);
        assert!((claim1(0.5, 0.25).unwrap() - (1.0 - k1 * (-0.75f64).exp())).abs() < 1e-15);
        assert!(claim1(0.5, 0.6).is_err());
        // Large z once lost e^z ulps.
        assert!((claim1(11.6916489097390865, 7.75134028209165038).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(claim1(800.0, 750.0).unwrap(), 1.0);
        assert!(claim1(0.0, 0.0).is_err());
    }

    #[test]
    fn direct_examples() {
        assert!((direct_outage(s(1.0)) - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert!((direct_outage(s(1e6)) * 1e6 - 1.0).abs() < 1e-5);
        assert!(direct_outage(s(1e-6)) > 1.0 - 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        let p1 = thm4_bound(1, s(100.0)).unwrap();
        assert!((p1 - 9.9007e-5).abs() < 1e-8, "{p1}");
        let p6 = thm4_bound(6, s(10.0)).unwrap();
        assert!((p6 - 1.696e-2).abs() < 5e-5, "{p6}");
        assert!(thm4_bound(7, s(1.0)).is_err());
    }

    #[test]
    fn bounds_are_ordered() {
        for db in [0.0, 10.0, 20.0, 30.0] {
            let x = Rnsnr::from_db(db).unwrap();
            let p: Vec<f64> = (1..=6).map(|k| thm4_bound(k, x).unwrap()).collect();
            assert!(p[0] <= p[1], "{db}: {p:?}");
            assert!(p[3] <= p[2] && p[5] <= p[4], "{db}: {p:?}");
            assert!(p[5] <= p[3], "{db}: {p:?}");
            assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn direct_protocol_matches_closed_form() {
        let cfg = McConfig::new(400_000, 42).with_stratify(false);
        let c = mc_outage(Protocol::Direct, RateTag::ZeroLimit, &[0.0, 5.0], &cfg).unwrap();
        let pt = c.points[0];
        assert!((pt.prob - direct_outage(s(1.0))).abs() < 3.0 * pt.ci_halfwidth_95);
        let strat = McConfig::new(400_000, 42);
        let c = mc_outage(Protocol::Direct, RateTag::ZeroLimit, &[20.0, 30.0], &strat).unwrap();
        for pt in c.points {
            let exact = direct_outage(Rnsnr::from_db(pt.rnsnr_db).unwrap());
            assert!(
                (pt.prob - exact).abs() <= 3.0 * pt.ci_halfwidth_95 + 1e-15,
                "{pt:?}"
            );
        }
    }

    #[test]
    fn grid_validation() {
        let cfg = McConfig::new(20_000, 1);
        let go = |g: &[f64]| mc_outage(Protocol::Direct, RateTag::ZeroLimit, g, &cfg);
        assert!(go(&[]).is_err());
        assert!(go(&[3.0, 1.0]).is_err());
        assert!(go(&[1.0, 1.0]).is_err());
        assert!(mc_outage(
            Protocol::Direct,
            RateTag::ZeroLimit,
            &[1.0],
            &McConfig::new(10, 1)
        )
        .is_err());
    }
}
