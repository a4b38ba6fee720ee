//! First-order optimality check for a returned flow split.
//!
//! With the phase durations fixed, the flow program is a smooth convex
//! problem over the simplex `x1 + x2 + x3 = K, x >= 0`. At an optimum every
//! active flow has the same marginal energy `nu`, and every idle flow has a
//! marginal energy at least `nu` (its multiplier `lambda_i = g_i - nu` is
//! nonnegative). When both phases are used, the derivative of the energy in
//! `t1` must vanish as well. All quantities are relative to `nu`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fading::{LinkGains, RateNats};

use super::FlowSolution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktReport {
    /// Common marginal energy of the active flows, divided by `e^K`.
    pub nu: f64,
    /// Largest relative spread of marginal energies across active flows.
    pub stationarity: f64,
    /// `(g_i - nu) / nu` per flow; zero for active flows.
    pub multipliers: [f64; 3],
    /// Relative derivative of the energy in `t1`, when `0 < t1 < 1`.
    pub time_derivative: Option<f64>,
}

impl KktReport {
    pub fn worst_residual(&self) -> f64 {
        self.stationarity
            .max(self.time_derivative.map_or(0.0, f64::abs))
    }

    pub fn min_multiplier(&self) -> f64 {
        self.multipliers
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Checks `sol` against the optimality system on gains `g`. For the coherent
/// protocol pass `g.coherent()`.
pub fn kkt_check(g: &LinkGains, k: RateNats, sol: &FlowSolution) -> Result<KktReport> {
    if g.direct_regime() || g.z13 == 0.0 {
        return Err(Error::Regime(format!(
            "optimality system needs the relay regime, got {g:?}"
        )));
    }
    let k = k.nats();
    let sp = &sol.split;
    let (z13, z12, z23) = (g.z13, g.z12, g.z23);

    // Broadcast phase: rates y = x / t1. Relay regime gives z13 < z12.
    let (g1, g2_cb, d_cb) = if sp.t1 > 0.0 {
        let (y1, y2) = (sp.x1 / sp.t1, sp.x2 / sp.t1);
        let e1 = (y1 - k).exp();
        let e12 = (y1 + y2 - k).exp();
        let g1 = e1 * (1.0 / z13 - 1.0 / z12) + e12 / z12;
        let g2 = e12 / z12;
        let phi = e1 * (1.0 / z13 - 1.0 / z12) + e12 / z12 - (-k).exp() / z13;
        (g1, g2, Some(phi - y1 * g1 - y2 * g2))
    } else {
        (f64::INFINITY, f64::INFINITY, None)
    };
    // Multiple-access phase: rates w = x / t2. Relay regime gives z13 < z23.
    let (g3, g2_ma, d_ma) = if sp.t2 > 0.0 {
        let (w2, w3) = (sp.x2 / sp.t2, sp.x3 / sp.t2);
        let e3 = (w3 - k).exp();
        let e23 = (w2 + w3 - k).exp();
        let g3 = e3 * (1.0 / z13 - 1.0 / z23) + e23 / z23;
        let g2 = e23 / z23;
        let phi = e3 * (1.0 / z13 - 1.0 / z23) + e23 / z23 - (-k).exp() / z13;
        (g3, g2, Some(phi - w2 * g2 - w3 * g3))
    } else {
        (f64::INFINITY, f64::INFINITY, None)
    };
    let grads = [g1, g2_cb + g2_ma, g3];
    let xs = [sp.x1, sp.x2, sp.x3];
    let active: Vec<usize> = (0..3).filter(|&i| xs[i] > 1e-12 * k).collect();
    if active.is_empty() {
        return Err(Error::Precondition("split carries no data".into()));
    }
    let nu = active.iter().map(|&i| grads[i]).sum::<f64>() / active.len() as f64;
    let stationarity = active
        .iter()
        .map(|&i| ((grads[i] - nu) / nu).abs())
        .fold(0.0, f64::max);
    let mut multipliers = [0.0; 3];
    for i in 0..3 {
        if !active.contains(&i) {
            multipliers[i] = (grads[i] - nu) / nu;
        }
    }
    let time_derivative = match (d_cb, d_ma) {
        (Some(a), Some(b)) => Some((a - b) / nu),
        _ => None,
    };
    Ok(KktReport {
        nu,
        stationarity,
        multipliers,
        time_derivative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::b1;

    #[test]
    fn symmetric_instance_is_stationary() {
        let g = LinkGains::new(0.1, 1.0, 1.0).unwrap();
        for kk in [0.05, 0.7, 2.0, 5.0] {
            let k = RateNats::new(kk).unwrap();
            let sol = b1(&g, k);
            let r = kkt_check(&g, k, &sol).unwrap();
            assert!(r.worst_residual() < 1e-6, "K = {kk}: {r:?}");
            assert!(r.min_multiplier() >= -1e-9, "K = {kk}: {r:?}");
        }
    }

    #[test]
    fn rejects_direct_regime() {
        let g = LinkGains::new(1.0, 1.0, 1.0).unwrap();
        let k = RateNats::new(1.0).unwrap();
        assert!(kkt_check(&g, k, &b1(&g, k)).is_err());
    }
}
