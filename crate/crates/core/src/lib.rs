//! Outage and power analysis for the three-node relay channel under
//! Rayleigh fading.
//!
//! Every protocol is described by the RNSNR threshold `B(Z)` it needs in a
//! given fading realization `Z`: the full-duplex bounds in [`fullduplex`],
//! and the half-duplex flow-control protocols solved in closed form in
//! [`flow`]. The remaining modules turn thresholds into outage curves
//! ([`outage`]), diversity slopes ([`dmt`]) and power-control policies
//! ([`power`]).
//!
//! ```
//! use relaykit::{flow::b1, LinkGains, RateNats};
//!
//! let g = LinkGains::new(0.1, 1.0, 1.0).unwrap();
//! let sol = b1(&g, RateNats::new(1e-3).unwrap());
//! assert!((sol.bound.value() - 2.0).abs() < 1e-2);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Reference tables keep every digit the generator printed.
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod dmt;
pub mod error;
pub mod fading;
pub mod flow;
pub mod fullduplex;
pub mod montecarlo;
pub mod outage;
pub mod power;
pub mod protocol;
pub mod special;

/// Library version recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use fading::{LinkGains, RateNats, Rnsnr};
pub use flow::{Branch, FlowSolution, FlowSplit};
pub use fullduplex::RnsnrBound;
pub use montecarlo::McConfig;
pub use outage::{Estimator, OutageCurve, OutagePoint};
pub use protocol::{Protocol, RateTag};
