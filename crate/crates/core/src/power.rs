//! Long-term power control: expected thresholds, the truncated-inversion
//! policy and the delay-limited loss table.
//!
//! Under an average (not per-slot) power constraint the transmitter can
//! invert the channel, spending `B(Z)` whenever `B(Z) < s*` and staying
//! silent otherwise. Zero outage is possible when the budget covers `E[B]`.
//!
//! `B` is heavy tailed (`Pr(B > s)` decays like `1/s^2`, or `ln s / s^2` at
//! large rates), so `E[B]` is split at `s0` into a Monte Carlo estimate of
//! `E[min(B, s0)]` and an analytic tail fitted to a conditional estimate of
//! `Pr(B > s0)`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fading::RateNats;
use crate::fading::Rnsnr;
use crate::montecarlo::{map_samples, McConfig, Sampler};
use crate::outage::thm4_bound;
use crate::protocol::{threshold, Protocol, RateTag};
use crate::special::integrate;

/// Split point between the sampled body and the analytic tail.
pub const TAIL_START: f64 = 1e3;

/// Smallest sample budget accepted for Monte Carlo expectations.
pub const MIN_BUDGET: u64 = 1_000_000;

/// Tail contributions above this share of the mean raise an alarm.
const TAIL_ALARM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Integrate the exact outage curve. Only the small-rate limits of the
    /// half-duplex protocols have one.
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    pub mean: f64,
    pub stderr: f64,
    /// Part of `mean` contributed by the analytic tail.
    pub tail: f64,
}

impl Expectation {
    pub fn db(&self) -> f64 {
        10.0 * self.mean.log10()
    }

    pub fn stderr_db(&self) -> f64 {
        10.0 / std::f64::consts::LN_10 * self.stderr / self.mean
    }
}

/// Outage curve that is exact for the zero-rate limit, if there is one.
fn exact_outage_part(protocol: Protocol, rate: RateTag) -> Option<u8> {
    match (protocol, rate) {
        (Protocol::Hdp1, RateTag::ZeroLimit) => Some(4),
        (Protocol::Hdp2, RateTag::ZeroLimit) => Some(6),
        _ => None,
    }
}

/// `∫_0^inf Pr(B > s) ds`, split at 1 with `s = 1/u` on the far piece.
fn integrate_outage(part: u8) -> Result<f64> {
    let p = |s: f64| -> f64 {
        match Rnsnr::new(s) {
            Ok(r) => thm4_bound(part, r).unwrap_or(f64::NAN),
            Err(_) => 1.0,
        }
    };
    let near = integrate(p, 0.0, 1.0, 1e-12, 1e-12)?;
    let far = integrate(
        |u: f64| if u <= 0.0 { 0.0 } else { p(1.0 / u) / (u * u) },
        0.0,
        1.0,
        1e-12,
        1e-12,
    )?;
    Ok(near.value + far.value)
}

/// `∫_{s0}^inf Pr(B > s) ds` given `Pr(B > s0) = p`.
fn tail_integral(rate: RateTag, p: f64, s0: f64) -> f64 {
    match rate {
        // Pr(B > s) ~ c ln s / s^2
        RateTag::InfLimit => p * s0 * (s0.ln() + 1.0) / s0.ln(),
        // Pr(B > s) ~ c / s^2
        _ => p * s0,
    }
}

/// Estimates `E[B]` for a protocol and rate.
pub fn expected_bound(
    protocol: Protocol,
    rate: RateTag,
    method: Method,
    budget: &McConfig,
) -> Result<Expectation> {
    match method {
        Method::Quadrature => {
            let part = exact_outage_part(protocol, rate).ok_or_else(|| {
                domain(format!(
                    "no exact outage curve for {protocol} at {}",
                    rate.label()
                ))
            })?;
            let mean = integrate_outage(part)?;
            Ok(Expectation {
                mean,
                stderr: 0.0,
                tail: 0.0,
            })
        }
        Method::MonteCarlo => {
            if budget.samples < MIN_BUDGET {
                return Err(domain(format!(
                    "expectation needs at least {MIN_BUDGET} samples, got {}",
                    budget.samples
                )));
            }
            let s0 = TAIL_START;
            let body = map_samples(budget, Sampler::unconditional(), |g| {
                threshold(protocol, rate, g).min(s0)
            })?;
            let n = body.len() as f64;
            let mean_body = body.iter().sum::<f64>() / n;
            let var = body.iter().map(|b| (b - mean_body).powi(2)).sum::<f64>() / (n - 1.0);

            // Pr(B > s0) from a sample conditioned on z13 <= 1/s0, on its own streams.
            let tail_cfg = McConfig {
                seed: budget.seed ^ 0x7a11_5eed,
                ..*budget
            };
            let sampler = Sampler::for_min_rnsnr(s0, true);
            let over = map_samples(&tail_cfg, sampler, |g| threshold(protocol, rate, g) > s0)?;
            let q = over.iter().filter(|&&b| b).count() as f64 / over.len() as f64;
            let p_tail = q * sampler.weight();
            let tail = tail_integral(rate, p_tail, s0);
            let tail_se = tail_integral(
                rate,
                sampler.weight() * (q * (1.0 - q) / over.len() as f64).sqrt(),
                s0,
            );

            let mean = mean_body + tail;
            if tail > TAIL_ALARM * mean {
                return Err(Error::Divergence(format!(
                    "tail above {s0} carries {tail:.4} of E[B] = {mean:.4}"
                )));
            }
            Ok(Expectation {
                mean,
                stderr: (var / n + tail_se * tail_se).sqrt(),
                tail,
            })
        }
    }
}

/// Preferred method for a protocol and rate.
pub fn default_method(protocol: Protocol, rate: RateTag) -> Method {
    if exact_outage_part(protocol, rate).is_some() {
        Method::Quadrature
    } else {
        Method::MonteCarlo
    }
}

/// Discrete law of `B`: atoms with probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundLaw {
    values: Vec<f64>,
    /// `cum[i] = sum_{j < i} w_j v_j`
    cum: Vec<f64>,
    /// `mass[i] = sum_{j < i} w_j`
    mass: Vec<f64>,
}

impl BoundLaw {
    /// Law placing weight `w` on value `v`. Weights are normalized.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(domain("law needs at least one atom"));
        }
        if atoms
            .iter()
            .any(|&(v, w)| !(v >= 0.0) || !(w >= 0.0) || !w.is_finite())
        {
            return Err(domain("atoms need values >= 0 and finite weights >= 0"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return Err(domain("atom weights sum to zero"));
        }
        let mut atoms = atoms.to_vec();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values = Vec::with_capacity(atoms.len());
        let mut cum = vec![0.0];
        let mut mass = vec![0.0];
        let (mut c, mut m) = (0.0, 0.0);
        for (v, w) in atoms {
            let w = w / total;
            // Unsupportable realizations carry infinite cost but still count.
            c += if w == 0.0 { 0.0 } else { w * v };
            m += w;
            values.push(v);
            cum.push(c);
            mass.push(m);
        }
        Ok(BoundLaw { values, cum, mass })
    }

    /// Empirical law of equally weighted samples.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let atoms: Vec<(f64, f64)> = samples.iter().map(|&v| (v, 1.0)).collect();
        Self::from_atoms(&atoms)
    }

    pub fn mean(&self) -> f64 {
        self.cum[self.values.len()]
    }

    /// `E[B; B <= s]`.
    pub fn integrated(&self, s: f64) -> f64 {
        self.cum[self.values.partition_point(|&v| v <= s)]
    }

    /// `Pr(B >= s)`.
    pub fn prob_at_least(&self, s: f64) -> f64 {
        1.0 - self.mass[self.values.partition_point(|&v| v < s)]
    }

    /// `sup { s : E[B; B <= s] < target }`, infinite when the target covers
    /// the whole mean.
    pub fn threshold(&self, target: f64) -> f64 {
        if target >= self.mean() {
            return f64::INFINITY;
        }
        // First atom whose inclusion reaches the target.
        let k = self.cum[1..].partition_point(|&c| c < target);
        if k >= self.values.len() {
            f64::INFINITY
        } else {
            self.values[k]
        }
    }
}

/// Truncated channel inversion: spend `B(Z)` when `B(Z) < s*`, else stay
/// silent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPolicy {
    pub protocol: Protocol,
    pub rate: RateTag,
    pub threshold_s_star: f64,
    pub target_avg_rnsnr: f64,
    /// `Pr(B >= s*)`
    pub outage: f64,
}

impl PowerPolicy {
    /// RNSNR spent in a realization with threshold `b`; `None` means outage.
    pub fn allocate(&self, b: f64) -> Option<f64> {
        (b < self.threshold_s_star).then_some(b)
    }
}

/// Policy for `law` under average RNSNR budget `target`.
pub fn policy_for_law(
    protocol: Protocol,
    rate: RateTag,
    law: &BoundLaw,
    target: f64,
) -> Result<PowerPolicy> {
    if !(target > 0.0) {
        return Err(domain(format!(
            "average RNSNR target must be > 0, got {target}"
        )));
    }
    let s = law.threshold(target);
    let outage = if s.is_finite() {
        law.prob_at_least(s)
    } else {
        0.0
    };
    Ok(PowerPolicy {
        protocol,
        rate,
        threshold_s_star: s,
        target_avg_rnsnr: target,
        outage,
    })
}

/// Monte Carlo estimate of `E[B; B <= s]`.
pub fn integrated_bound(
    protocol: Protocol,
    rate: RateTag,
    s: f64,
    budget: &McConfig,
) -> Result<f64> {
    if !(s > 0.0) {
        return Err(domain(format!("truncation point must be > 0, got {s}")));
    }
    let values = map_samples(budget, Sampler::unconditional(), |g| {
        let b = threshold(protocol, rate, g);
        if b <= s {
            b
        } else {
            0.0
        }
    })?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Threshold policy for an average budget `target`.
///
/// When the budget covers `E[B]` (estimated with the tail correction) the
/// threshold is infinite and there is no outage. Otherwise `s*` comes from
/// the empirical law of `budget.samples` draws.
pub fn threshold_policy(
    protocol: Protocol,
    rate: RateTag,
    target: f64,
    budget: &McConfig,
) -> Result<PowerPolicy> {
    if !(target > 0.0) {
        return Err(domain(format!(
            "average RNSNR target must be > 0, got {target}"
        )));
    }
    let mean = expected_bound(protocol, rate, default_method(protocol, rate), budget)?;
    if target >= mean.mean {
        return Ok(PowerPolicy {
            protocol,
            rate,
            threshold_s_star: f64::INFINITY,
            target_avg_rnsnr: target,
            outage: 0.0,
        });
    }
    let values = map_samples(budget, Sampler::unconditional(), |g| {
        threshold(protocol, rate, g)
    })?;
    policy_for_law(protocol, rate, &BoundLaw::from_samples(&values)?, target)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayLimitedTable {
    pub e_b_lb_db: Expectation,
    pub e_b_df_db: Expectation,
    pub e_b1_zero_db: Expectation,
    pub e_b1_inf_db: Expectation,
    pub e_b2_zero_db: Expectation,
    pub e_b2_inf_db: Expectation,
}

impl DelayLimitedTable {
    /// Rows as `(quantity, expectation)` in display order.
    pub fn rows(&self) -> [(&'static str, Expectation); 6] {
        [
            ("e_b_lb", self.e_b_lb_db),
            ("e_b_df", self.e_b_df_db),
            ("e_b1_zero", self.e_b1_zero_db),
            ("e_b1_inf", self.e_b1_inf_db),
            ("e_b2_zero", self.e_b2_zero_db),
            ("e_b2_inf", self.e_b2_inf_db),
        ]
    }
}

/// Expected thresholds of all six protocol/limit pairs.
pub fn delay_limited_table(budget: &McConfig) -> Result<DelayLimitedTable> {
    let e = |p, r| expected_bound(p, r, default_method(p, r), budget);
    Ok(DelayLimitedTable {
        e_b_lb_db: e(Protocol::FullDuplexLb, RateTag::ZeroLimit)?,
        e_b_df_db: e(Protocol::FullDuplexDf, RateTag::ZeroLimit)?,
        e_b1_zero_db: e(Protocol::Hdp1, RateTag::ZeroLimit)?,
        e_b1_inf_db: e(Protocol::Hdp1, RateTag::InfLimit)?,
        e_b2_zero_db: e(Protocol::Hdp2, RateTag::ZeroLimit)?,
        e_b2_inf_db: e(Protocol::Hdp2, RateTag::InfLimit)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig5Row {
    pub rate_nats: f64,
    pub curve: &'static str,
    pub snr_linear: f64,
}

/// Average SNR needed for zero outage at each rate: `E[B] (e^K - 1)` for
/// every curve of `table`, plus the AWGN reference `e^K - 1`.
pub fn fig5_data(rates: &[RateNats], table: &DelayLimitedTable) -> Vec<Fig5Row> {
    let mut rows = Vec::with_capacity(rates.len() * 7);
    for &k in rates {
        let awgn = k.awgn_snr();
        rows.push(Fig5Row {
            rate_nats: k.nats(),
            curve: "awgn",
            snr_linear: awgn,
        });
        for (name, e) in table.rows() {
            rows.push(Fig5Row {
                rate_nats: k.nats(),
                curve: name,
                snr_linear: e.mean * awgn,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_law_examples() {
        let law = BoundLaw::from_atoms(&[(1.0, 0.5), (2.0, 0.5)]).unwrap();
        assert_eq!(law.integrated(1.5), 0.5);
        assert_eq!(law.integrated(0.5), 0.0);
        assert_eq!(law.integrated(2.0), 1.5);
        assert_eq!(law.threshold(1.2), 2.0);
        assert_eq!(law.prob_at_least(2.0), 0.5);
        assert_eq!(law.threshold(0.4), 1.0);
        assert_eq!(law.threshold(1.5), f64::INFINITY);
        let p = policy_for_law(Protocol::Hdp1, RateTag::ZeroLimit, &law, 1.2).unwrap();
        assert_eq!((p.threshold_s_star, p.outage), (2.0, 0.5));
        assert_eq!(p.allocate(1.0), Some(1.0));
        assert_eq!(p.allocate(2.0), None);
        assert!(BoundLaw::from_atoms(&[]).is_err());
        assert!(policy_for_law(Protocol::Hdp1, RateTag::ZeroLimit, &law, 0.0).is_err());
    }

    #[test]
    fn threshold_grows_with_budget() {
        let law = BoundLaw::from_atoms(&[(0.5, 1.0), (1.0, 2.0), (4.0, 1.0), (9.0, 0.5)]).unwrap();
        let mut last = 0.0;
        for i in 1..=10 {
            let s = law.threshold(0.4 * i as f64);
            assert!(s >= last);
            last = s;
        }
    }

    #[test]
    fn quadrature_zero_limits() {
        let cfg = McConfig::new(MIN_BUDGET, 1);
        // The coherent zero-rate limit has E[B] = 2 exactly.
        let e =
            expected_bound(Protocol::Hdp2, RateTag::ZeroLimit, Method::Quadrature, &cfg).unwrap();
        assert!((e.mean - 2.0).abs() < 1e-8, "{e:?}");
        let e =
            expected_bound(Protocol::Hdp1, RateTag::ZeroLimit, Method::Quadrature, &cfg).unwrap();
        assert!((e.db() - 3.33).abs() < 0.05, "{e:?}");
        assert!(
            expected_bound(Protocol::Hdp1, RateTag::InfLimit, Method::Quadrature, &cfg).is_err()
        );
    }

    #[test]
    fn fig5_awgn_column() {
        let e = Expectation {
            mean: 2.0,
            stderr: 0.0,
            tail: 0.0,
        };
        let t = DelayLimitedTable {
            e_b_lb_db: e,
            e_b_df_db: e,
            e_b1_zero_db: e,
            e_b1_inf_db: e,
            e_b2_zero_db: e,
            e_b2_inf_db: e,
        };
        let rows = fig5_data(&[RateNats::new(std::f64::consts::LN_2).unwrap()], &t);
        assert_eq!(rows.len(), 7);
        assert!((rows[0].snr_linear - 1.0).abs() < 1e-15);
        assert!((rows[1].snr_linear - 2.0).abs() < 1e-15);
    }
}
