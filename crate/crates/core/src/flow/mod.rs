//! Half-duplex relaying with flow control.
//!
//! A slot is split into a broadcast phase of length `t1` and a
//! multiple-access phase of length `t2 = 1 - t1`. The message of `K` nats is
//! carried as three flows: `x1` straight to the destination during the
//! broadcast, `x2` through the relay, and `x3` straight to the destination
//! during multiple access. The flow program picks the split that minimizes
//! total energy `t1 * S_CB + t2 * S_MA`.

mod closed_form;
mod kkt;
mod oracle;
mod regions;

use serde::Serialize;

use crate::error::Result;
use crate::fading::LinkGains;
use crate::fullduplex::RnsnrBound;

pub use closed_form::{
    b1, b1_envelope, b1_limit_inf, b1_limit_zero, b2, b2_limit_inf, b2_limit_zero, case_constants,
    CaseConstants, T_TOL,
};
pub use kkt::{kkt_check, KktReport};
pub use oracle::{b1_oracle, b2_oracle};
pub use regions::{
    cb_source_fraction, coherent_power_triple, ma_source_fraction, s_cb, s_ma, s_ma_coherent,
    CoherentPowers, PowerAllocation,
};

/// Which piece of the case analysis produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    /// Everything on the direct link; the relay is idle.
    DirectLink,
    TildeS1,
    TildeS2,
    TildeS3,
    HatS1,
    HatS2,
    HatS3,
}

/// Flow amounts (nats) and phase durations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowSplit {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub t1: f64,
    pub t2: f64,
}

impl FlowSplit {
    /// Builds a split, flushing rounding noise below zero.
    pub fn clamped(x1: f64, x2: f64, x3: f64, t1: f64) -> Self {
        let flush = |v: f64| {
            debug_assert!(v >= -1e-9, "flow component {v} is negative");
            v.max(0.0)
        };
        let t1 = t1.clamp(0.0, 1.0);
        FlowSplit {
            x1: flush(x1),
            x2: flush(x2),
            x3: flush(x3),
            t1,
            t2: 1.0 - t1,
        }
    }

    pub fn total(&self) -> f64 {
        self.x1 + self.x2 + self.x3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowSolution {
    pub split: FlowSplit,
    /// Optimal energy divided by `e^K - 1`.
    pub bound: RnsnrBound,
    pub branch: Branch,
}

impl FlowSolution {
    /// Power splits realizing this solution on gains `g` (pass the original
    /// gains for both protocols; coherent powers are only reported when the
    /// multiple-access phase is active).
    pub fn power_allocation(&self, g: &LinkGains) -> Result<PowerAllocation> {
        let s = &self.split;
        let coherent = if s.t2 > 0.0 && g.z13 > 0.0 {
            Some(coherent_power_triple(g, s.x2, s.x3, s.t2)?)
        } else {
            None
        };
        Ok(PowerAllocation {
            cb_source_fraction: cb_source_fraction(g, s.x1, s.x2, s.t1)?,
            ma_source_fraction: ma_source_fraction(g, s.x2, s.x3, s.t2)?,
            coherent,
        })
    }
}

/// Total energy `t1 * S_CB + t2 * S_MA` of a split (not normalized).
pub fn objective(g: &LinkGains, split: &FlowSplit) -> Result<f64> {
    Ok(split.t1 * s_cb(g, split.x1, split.x2, split.t1)?
        + split.t2 * s_ma(g, split.x2, split.x3, split.t2)?)
}
