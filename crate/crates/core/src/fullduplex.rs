//! Full-duplex relaying: decode-and-forward sufficiency bound and the
//! cut-set necessity bound on the RNSNR.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fading::LinkGains;

/// Rate-normalized SNR threshold for one realization. `+inf` means the rate
/// cannot be supported at any power.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct RnsnrBound(f64);

impl RnsnrBound {
    pub const UNSUPPORTABLE: RnsnrBound = RnsnrBound(f64::INFINITY);

    /// Wraps `b`. NaN and nonpositive values are coerced to `+inf`, since they
    /// only arise from `0/0` on dead links.
    pub fn new(b: f64) -> Self {
        if b > 0.0 {
            RnsnrBound(b)
        } else {
            RnsnrBound(f64::INFINITY)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Outage indicator for an available RNSNR `s`.
    pub fn in_outage(self, s: f64) -> bool {
        s <= self.0
    }
}

fn ratio(num: f64, den: f64) -> RnsnrBound {
    if den > 0.0 {
        RnsnrBound::new(num / den)
    } else {
        RnsnrBound::UNSUPPORTABLE
    }
}

/// Decode-and-forward sufficiency bound. Ties `z12 == z13` take the direct
/// branch.
pub fn b_df(g: &LinkGains) -> RnsnrBound {
    if g.z12 > g.z13 {
        ratio(g.z12 + g.z23, g.z12 * (g.z13 + g.z23))
    } else {
        ratio(1.0, g.z13)
    }
}

/// Cut-set necessity bound.
pub fn b_lb(g: &LinkGains) -> RnsnrBound {
    ratio(g.z12 + g.z13 + g.z23, (g.z12 + g.z13) * (g.z13 + g.z23))
}

/// Brute-force maximum of the DF effective gain over an `(alpha, beta)` grid.
///
/// `alpha` is the share of energy the source spends, `beta` the share of it
/// that carries new information rather than beamforming with the relay.
/// The grid maximum never exceeds the true maximum.
pub fn z_df_oracle(g: &LinkGains, grid_n: usize) -> Result<f64> {
    if g.z12 <= g.z13 {
        return Err(Error::Precondition(format!(
            "oracle needs z12 > z13, got z12 = {}, z13 = {}",
            g.z12, g.z13
        )));
    }
    if grid_n < 100 {
        return Err(Error::Precondition(format!(
            "grid_n must be >= 100, got {grid_n}"
        )));
    }
    let n = grid_n as f64;
    let mut best = 0.0f64;
    for i in 0..=grid_n {
        let alpha = i as f64 / n;
        let direct = alpha * g.z13 + (1.0 - alpha) * g.z23;
        let cross = alpha * (1.0 - alpha) * g.z13 * g.z23;
        for j in 0..=grid_n {
            let beta = j as f64 / n;
            let to_dest = direct + 2.0 * ((1.0 - beta) * cross).sqrt();
            let to_relay = alpha * beta * g.z12;
            best = best.max(to_dest.min(to_relay));
        }
    }
    Ok(best)
}
