//! Minimum SNR for the two half-duplex phases and the power splits that
//! achieve it.
//!
//! Rates are in nats per channel use of the whole slot, so a phase of
//! duration `t` carrying `x` nats runs at `x / t` nats per use. Returned SNRs
//! are average transmit power over the phase (energy is `t * snr`).

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fading::LinkGains;

/// `excess / gain` with `0 / 0 = 0`: no data needs no power even on a dead
/// link.
pub(crate) fn cost(excess: f64, gain: f64) -> f64 {
    if excess == 0.0 {
        0.0
    } else {
        excess / gain
    }
}

fn check_phase(a: f64, b: f64, t: f64, what: &str) -> Result<bool> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!(
            "{what} duration must be in [0, 1], got {t}"
        )));
    }
    if !(a >= 0.0) || !(b >= 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(domain(format!(
            "{what} rates must be finite and >= 0, got ({a}, {b})"
        )));
    }
    if t == 0.0 {
        if a > 0.0 || b > 0.0 {
            return Err(Error::Infeasible(format!(
                "{what} has zero duration but carries ({a}, {b}) nats"
            )));
        }
        return Ok(false);
    }
    Ok(true)
}

/// SNR for a degraded broadcast of `u` nats/use to a user with gain `zu`
/// (decoded with interference) and `v` nats/use to a user with gain `zv`
/// (interference cancelled), when `zv >= zu`.
fn broadcast(u: f64, zu: f64, v: f64, zv: f64) -> f64 {
    cost(u.exp_m1(), zu) + u.exp() * cost(v.exp_m1(), zv)
}

/// Source broadcasting `x1` nats to the destination and `x2` to the relay
/// within a phase of length `t1`.
pub fn s_cb(g: &LinkGains, x1: f64, x2: f64, t1: f64) -> Result<f64> {
    if !check_phase(x1, x2, t1, "broadcast phase")? {
        return Ok(0.0);
    }
    let (r1, r2) = (x1 / t1, x2 / t1);
    Ok(if g.z13 >= g.z12 {
        broadcast(r2, g.z12, r1, g.z13)
    } else {
        broadcast(r1, g.z13, r2, g.z12)
    })
}

/// Source (`x3` nats) and relay (`x2` nats) both sending to the destination
/// within a phase of length `t2`.
pub fn s_ma(g: &LinkGains, x2: f64, x3: f64, t2: f64) -> Result<f64> {
    if !check_phase(x2, x3, t2, "multiple-access phase")? {
        return Ok(0.0);
    }
    Ok(multiple_access(g.z13, g.z23, x2 / t2, x3 / t2))
}

fn multiple_access(z13: f64, z23: f64, r2: f64, r3: f64) -> f64 {
    // The stronger link is decoded last and sees no interference.
    if z13 >= z23 {
        cost(r2.exp_m1(), z23) + r2.exp() * cost(r3.exp_m1(), z13)
    } else {
        cost(r3.exp_m1(), z13) + r3.exp() * cost(r2.exp_m1(), z23)
    }
}

/// Multiple access where the source also beamforms the relay's flow, which
/// then sees the combined gain `z13 + z23`.
pub fn s_ma_coherent(g: &LinkGains, x2: f64, x3: f64, t2: f64) -> Result<f64> {
    if !check_phase(x2, x3, t2, "multiple-access phase")? {
        return Ok(0.0);
    }
    let (r2, r3) = (x2 / t2, x3 / t2);
    Ok(cost(r3.exp_m1(), g.z13) + r3.exp() * cost(r2.exp_m1(), g.z13 + g.z23))
}

/// Powers achieving the coherent multiple-access minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentPowers {
    /// Source power on the shared (relay) flow.
    pub p1: f64,
    /// Relay power on the shared flow.
    pub p2: f64,
    /// Source power on its own flow.
    pub p3: f64,
}

impl CoherentPowers {
    pub fn total(&self) -> f64 {
        self.p1 + self.p2 + self.p3
    }
}

/// Per-phase power split for a given flow split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerAllocation {
    /// Share of broadcast power on the flow addressed to the destination.
    pub cb_source_fraction: f64,
    /// Share of multiple-access power spent by the source.
    pub ma_source_fraction: f64,
    /// Coherent multiple-access powers, when that phase is active.
    pub coherent: Option<CoherentPowers>,
}

pub fn coherent_power_triple(g: &LinkGains, x2: f64, x3: f64, t2: f64) -> Result<CoherentPowers> {
    if !(t2 > 0.0) {
        return Err(Error::Precondition(format!(
            "coherent powers need t2 > 0, got {t2}"
        )));
    }
    check_phase(x2, x3, t2, "multiple-access phase")?;
    if g.z13 == 0.0 {
        return Err(domain("coherent powers are undefined when z13 = 0"));
    }
    let a = (x3 / t2).exp_m1();
    let c = ((x2 + x3) / t2).exp_m1();
    let sum = g.z13 + g.z23;
    // c - a = e^{r3} (e^{r2} - 1), formed directly to avoid cancellation.
    let shared = (x3 / t2).exp() * (x2 / t2).exp_m1();
    debug_assert!((shared - (c - a)).abs() <= 1e-9 * c.abs().max(1.0));
    Ok(CoherentPowers {
        p1: shared * g.z13 / (sum * sum),
        p2: shared * g.z23 / (sum * sum),
        p3: a / g.z13,
    })
}

/// Fraction of broadcast power addressed to the destination.
pub fn cb_source_fraction(g: &LinkGains, x1: f64, x2: f64, t1: f64) -> Result<f64> {
    let total = s_cb(g, x1, x2, t1)?;
    if total == 0.0 || !total.is_finite() {
        return Ok(0.0);
    }
    let (r1, r2) = (x1 / t1, x2 / t1);
    Ok(if g.z13 >= g.z12 {
        cost(r1.exp_m1(), g.z13) / total
    } else {
        1.0 - cost(r2.exp_m1(), g.z12) / total
    })
}

/// Fraction of multiple-access power spent by the source.
pub fn ma_source_fraction(g: &LinkGains, x2: f64, x3: f64, t2: f64) -> Result<f64> {
    let total = s_ma(g, x2, x3, t2)?;
    if total == 0.0 || !total.is_finite() {
        return Ok(0.0);
    }
    let (r2, r3) = (x2 / t2, x3 / t2);
    Ok(if g.z13 >= g.z23 {
        r2.exp() * cost(r3.exp_m1(), g.z13) / total
    } else {
        cost(r3.exp_m1(), g.z13) / total
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn g(z13: f64, z12: f64, z23: f64) -> LinkGains {
        LinkGains::new(z13, z12, z23).unwrap()
    }

    #[test]
    fn broadcast_examples() {
        let any = g(0.7, 1.3, 2.0);
        assert!((s_cb(&any, LN_2, 0.0, 1.0).unwrap() - 1.0 / 0.7).abs() < 1e-14);
        assert!((s_cb(&g(2.0, 1.0, 1.0), LN_2, LN_2, 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((s_cb(&g(1.0, 2.0, 1.0), LN_2, LN_2, 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(s_cb(&any, 0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            s_cb(&any, 0.1, 0.0, 0.0),
            Err(Error::Infeasible(_))
        ));
        assert!(s_cb(&any, 0.1, 0.0, 1.5).is_err());
        assert!(s_cb(&any, -0.1, 0.0, 0.5).is_err());
    }

    #[test]
    fn multiple_access_examples() {
        let any = g(0.7, 1.3, 2.0);
        assert!((s_ma(&any, 0.0, 3f64.ln(), 1.0).unwrap() - 2.0 / 0.7).abs() < 1e-14);
        assert!((s_ma(&g(1.0, 1.0, 1.0), LN_2, LN_2, 1.0).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(s_ma(&any, 0.0, 0.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn coherent_examples() {
        let gains = g(1.0, 5.0, 3.0);
        assert!((s_ma_coherent(&gains, LN_2, 0.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((s_ma_coherent(&gains, LN_2, LN_2, 1.0).unwrap() - 1.5).abs() < 1e-15);
        let p = coherent_power_triple(&gains, LN_2, LN_2, 1.0).unwrap();
        assert!((p.p1 - 0.125).abs() < 1e-15);
        assert!((p.p2 - 0.375).abs() < 1e-15);
        assert!((p.p3 - 1.0).abs() < 1e-15);
        let p = coherent_power_triple(&gains, 0.0, 0.4, 0.5).unwrap();
        assert_eq!((p.p1, p.p2), (0.0, 0.0));
        assert!(coherent_power_triple(&g(0.0, 1.0, 1.0), 0.1, 0.1, 1.0).is_err());
        assert!(coherent_power_triple(&gains, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn coherent_matches_substitution() {
        let gains = g(0.3, 0.8, 0.6);
        for (x2, x3, t2) in [(0.2, 0.5, 0.4), (1.0, 0.0, 0.9), (0.0, 2.0, 0.3)] {
            let a = s_ma_coherent(&gains, x2, x3, t2).unwrap();
            let b = s_ma(&gains.coherent(), x2, x3, t2).unwrap();
            assert!((a - b).abs() <= 1e-13 * a.max(1.0));
            assert!(a <= s_ma(&gains, x2, x3, t2).unwrap() * (1.0 + 1e-14));
            let p = coherent_power_triple(&gains, x2, x3, t2).unwrap();
            assert!((p.total() / a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fractions_reconstruct_rates() {
        // Destination stronger than relay.
        let gains = g(2.0, 0.5, 1.0);
        let (x1, x2) = (0.4, 0.7);
        let s = s_cb(&gains, x1, x2, 1.0).unwrap();
        let a = cb_source_fraction(&gains, x1, x2, 1.0).unwrap();
        let to_dest = a * s;
        assert!(((1.0 + gains.z13 * to_dest).ln() - x1).abs() < 1e-12);
        let to_relay = (1.0 - a) * s;
        let r = (1.0 + gains.z12 * to_relay / (1.0 + gains.z12 * to_dest)).ln();
        assert!((r - x2).abs() < 1e-12);

        // Source stronger at the destination than the relay.
        let gains = g(2.0, 0.5, 1.0);
        let (x2, x3) = (0.3, 0.6);
        let s = s_ma(&gains, x2, x3, 1.0).unwrap();
        let b = ma_source_fraction(&gains, x2, x3, 1.0).unwrap();
        let ps = b * s;
        let pr = (1.0 - b) * s;
        assert!(((1.0 + gains.z23 * pr).ln() - x2).abs() < 1e-12);
        assert!(((1.0 + gains.z13 * ps / (1.0 + gains.z23 * pr)).ln() - x3).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&b));
    }
}
