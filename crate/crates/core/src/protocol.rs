//! Protocol and rate selectors shared by the outage and power-control code.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{domain, Error};
use crate::fading::{LinkGains, RateNats};
use crate::flow::{b1, b1_limit_inf, b1_limit_zero, b2, b2_limit_inf, b2_limit_zero};
use crate::fullduplex::{b_df, b_lb};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Protocol {
    /// Full-duplex cut-set bound (necessary condition).
    FullDuplexLb,
    /// Full-duplex decode-and-forward (sufficient condition).
    FullDuplexDf,
    /// Half-duplex flow control.
    Hdp1,
    /// Half-duplex flow control with coherent combining.
    Hdp2,
    /// No relay.
    Direct,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [
        Protocol::FullDuplexLb,
        Protocol::FullDuplexDf,
        Protocol::Hdp1,
        Protocol::Hdp2,
        Protocol::Direct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::FullDuplexLb => "fd-lb",
            Protocol::FullDuplexDf => "fd-df",
            Protocol::Hdp1 => "hdp1",
            Protocol::Hdp2 => "hdp2",
            Protocol::Direct => "direct",
        }
    }

    /// True when the threshold depends on the rate.
    pub fn rate_dependent(self) -> bool {
        matches!(self, Protocol::Hdp1 | Protocol::Hdp2)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fd-lb" | "lb" | "fullduplexlb" => Ok(Protocol::FullDuplexLb),
            "fd-df" | "df" | "fullduplexdf" => Ok(Protocol::FullDuplexDf),
            "hdp1" => Ok(Protocol::Hdp1),
            "hdp2" => Ok(Protocol::Hdp2),
            "direct" | "dt" => Ok(Protocol::Direct),
            other => Err(domain(format!(
                "unknown protocol '{other}' (expected fd-lb, fd-df, hdp1, hdp2, direct)"
            ))),
        }
    }
}

/// Rate requirement: a finite rate or one of the two limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RateTag {
    ZeroLimit,
    InfLimit,
    Finite(RateNats),
}

impl RateTag {
    /// Label used in CSV output: `zero`, `inf`, or the rate in bits.
    pub fn label(self) -> String {
        match self {
            RateTag::ZeroLimit => "zero".into(),
            RateTag::InfLimit => "inf".into(),
            RateTag::Finite(k) => format!("{}", k.bits()),
        }
    }
}

/// Per-realization RNSNR threshold of `protocol` at `rate`. `+inf` when the
/// rate cannot be supported.
pub fn threshold(protocol: Protocol, rate: RateTag, g: &LinkGains) -> f64 {
    match (protocol, rate) {
        (Protocol::FullDuplexLb, _) => b_lb(g).value(),
        (Protocol::FullDuplexDf, _) => b_df(g).value(),
        (Protocol::Direct, _) => {
            if g.z13 > 0.0 {
                1.0 / g.z13
            } else {
                f64::INFINITY
            }
        }
        (Protocol::Hdp1, RateTag::ZeroLimit) => b1_limit_zero(g).value(),
        (Protocol::Hdp1, RateTag::InfLimit) => b1_limit_inf(g).value(),
        (Protocol::Hdp1, RateTag::Finite(k)) => b1(g, k).bound.value(),
        (Protocol::Hdp2, RateTag::ZeroLimit) => b2_limit_zero(g).value(),
        (Protocol::Hdp2, RateTag::InfLimit) => b2_limit_inf(g).value(),
        (Protocol::Hdp2, RateTag::Finite(k)) => b2(g, k).bound.value(),
    }
}

/// Cheap bracket `[lo, hi]` containing [`threshold`] for every rate.
pub fn threshold_bracket(protocol: Protocol, g: &LinkGains) -> (f64, f64) {
    match protocol {
        Protocol::Hdp1 => (b1_limit_zero(g).value(), b1_limit_inf(g).value()),
        Protocol::Hdp2 => (b2_limit_zero(g).value(), b2_limit_inf(g).value()),
        other => {
            let v = threshold(other, RateTag::ZeroLimit, g);
            (v, v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(p.name().parse::<Protocol>().unwrap(), p);
        }
        assert!("hdp3".parse::<Protocol>().is_err());
    }

    #[test]
    fn bracket_contains_threshold() {
        let g = LinkGains::new(0.05, 0.8, 1.7).unwrap();
        for p in [Protocol::Hdp1, Protocol::Hdp2] {
            let (lo, hi) = threshold_bracket(p, &g);
            for k in [0.01, 0.5, 2.0, 4.0] {
                let v = threshold(p, RateTag::Finite(RateNats::new(k).unwrap()), &g);
                assert!(lo <= v * (1.0 + 1e-12) && v <= hi * (1.0 + 1e-12));
            }
        }
        assert_eq!(RateTag::ZeroLimit.label(), "zero");
        assert_eq!(
            RateTag::Finite(RateNats::from_bits(3.0).unwrap()).label(),
            "3"
        );
    }
}
