//! Link-gain realizations, unit conventions and Rayleigh-fading sampling.
//!
//! Everything downstream works in normalized units. A link power gain is a
//! dimensionless multiple of the unit average gain, and SNRs are linear
//! multiples of `N0 * W`. The rate-normalized SNR (RNSNR) divides the total
//! transmit SNR by `e^K - 1`, the SNR an AWGN channel with unit gain needs at
//! the same rate `K` (nats/s/Hz). Decibels only appear at the I/O boundary via
//! [`Rnsnr::from_db`] and [`Rnsnr::to_db`].
//!
//! # Random streams
//!
//! Sampling uses ChaCha8 keyed by a 64-bit seed. Parallel work is split into
//! fixed-size batches and batch `i` draws from stream `i` of the seeded
//! generator (see [`stream_rng`]), so a result depends only on the seed, the
//! batch size and the sample count, never on how many threads ran it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Maximum consecutive zero exponential draws before giving up.
pub const MAX_ZERO_RETRIES: usize = 100;

/// One realization of the three link power gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkGains {
    /// Source to destination.
    pub z13: f64,
    /// Source to relay.
    pub z12: f64,
    /// Relay to destination.
    pub z23: f64,
}

impl LinkGains {
    pub fn new(z13: f64, z12: f64, z23: f64) -> Result<Self> {
        for (name, z) in [("z13", z13), ("z12", z12), ("z23", z23)] {
            if !z.is_finite() || z < 0.0 {
                return Err(domain(format!("{name} must be finite and >= 0, got {z}")));
            }
        }
        Ok(LinkGains { z13, z12, z23 })
    }

    /// Gains with the relay-to-destination link replaced by the coherent
    /// combination `z13 + z23` seen when source and relay send in phase.
    pub fn coherent(&self) -> LinkGains {
        LinkGains {
            z23: self.z13 + self.z23,
            ..*self
        }
    }

    pub fn all_zero(&self) -> bool {
        self.z13 == 0.0 && self.z12 == 0.0 && self.z23 == 0.0
    }

    /// Gain of the two-hop path through the relay, `M_H(z12, z23)`.
    pub fn relay_path_gain(&self) -> f64 {
        harmonic_mean_or_zero(self.z12, self.z23)
    }

    /// True when the direct link beats the two-hop relay path and flow
    /// control sends everything over it.
    pub fn direct_regime(&self) -> bool {
        self.z13 >= self.relay_path_gain()
    }
}

/// Required rate in nats/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct RateNats(f64);

impl RateNats {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(domain(format!("rate must be finite and > 0 nats, got {k}")));
        }
        Ok(RateNats(k))
    }

    pub fn from_bits(bits: f64) -> Result<Self> {
        Self::new(bits * std::f64::consts::LN_2)
    }

    pub fn nats(self) -> f64 {
        self.0
    }

    pub fn bits(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }

    /// `e^K - 1`, the AWGN SNR needed at this rate.
    pub fn awgn_snr(self) -> f64 {
        self.0.exp_m1()
    }
}

/// Rate-normalized overall SNR on a linear scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Rnsnr(f64);

impl Rnsnr {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(domain(format!("RNSNR must be finite and > 0, got {s}")));
        }
        Ok(Rnsnr(s))
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(db_to_linear(db))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn to_db(self) -> f64 {
        linear_to_db(self.0)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `1 / (1/x + 1/y)`. Note this is half the textbook harmonic mean.
pub fn harmonic_mean(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) || !(y > 0.0) {
        return Err(domain(format!(
            "harmonic mean needs positive inputs, got ({x}, {y})"
        )));
    }
    Ok(harmonic_mean_or_zero(x, y))
}

/// Total version used on raw gains: a zero (or infinite-loss) link kills the
/// path.
pub(crate) fn harmonic_mean_or_zero(x: f64, y: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        0.0
    } else {
        x * y / (x + y)
    }
}

/// Generator for stream `stream` of the run keyed by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Unit-mean exponential draw via `-ln U` with `U` in `(0, 1]`.
///
/// `U = 1` would give an exact zero gain; those draws are rejected.
pub fn exp_unit<R: Rng + ?Sized>(rng: &mut R) -> Result<f64> {
    for _ in 0..MAX_ZERO_RETRIES {
        let u = 1.0 - rng.random::<f64>();
        let z = -u.ln();
        if z > 0.0 {
            return Ok(z);
        }
    }
    Err(Error::RngFault(MAX_ZERO_RETRIES))
}

/// Exponential draw conditioned on `Z <= cap`, by inverting the truncated CDF.
pub fn exp_unit_below<R: Rng + ?Sized>(rng: &mut R, cap: f64) -> Result<f64> {
    // P(Z <= cap) = -expm1(-cap); Z = -ln(1 - U * that).
    let mass = -(-cap).exp_m1();
    for _ in 0..MAX_ZERO_RETRIES {
        let u = 1.0 - rng.random::<f64>();
        let z = -(-u * mass).ln_1p();
        if z > 0.0 {
            return Ok(z.min(cap));
        }
    }
    Err(Error::RngFault(MAX_ZERO_RETRIES))
}

/// One i.i.d. Rayleigh realization: three unit-mean exponential gains.
pub fn sample_link<R: Rng + ?Sized>(rng: &mut R) -> Result<LinkGains> {
    Ok(LinkGains {
        z13: exp_unit(rng)?,
        z12: exp_unit(rng)?,
        z23: exp_unit(rng)?,
    })
}

pub fn sample_gains<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Result<Vec<LinkGains>> {
    if count == 0 {
        return Err(domain("sample count must be >= 1"));
    }
    (0..count).map(|_| sample_link(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn harmonic_mean_examples() {
        assert_eq!(harmonic_mean(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(harmonic_mean(1.0, 1.0).unwrap(), 0.5);
        assert!((harmonic_mean(1.0, 3.0).unwrap() - 0.75).abs() < 1e-15);
        assert!(harmonic_mean(0.0, 1.0).is_err());
        assert!(harmonic_mean(-1.0, 1.0).is_err());
    }

    #[test]
    fn db_round_trip() {
        for db in [-30.0, -3.0, 0.0, 0.5, 17.25, 45.0] {
            let s = Rnsnr::from_db(db).unwrap();
            let back = Rnsnr::from_db(s.to_db()).unwrap();
            assert!((back.linear() / s.linear() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_conversion() {
        let k = RateNats::from_bits(1.0).unwrap();
        assert!((k.nats() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((k.awgn_snr() - 1.0).abs() < 1e-15);
        assert!(RateNats::new(0.0).is_err());
        assert!(RateNats::new(f64::INFINITY).is_err());
    }

    #[test]
    fn gains_validation() {
        assert!(LinkGains::new(1.0, -0.1, 1.0).is_err());
        assert!(LinkGains::new(1.0, f64::NAN, 1.0).is_err());
        let g = LinkGains::new(0.1, 1.0, 0.9).unwrap();
        assert_eq!(g.coherent().z23, 1.0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_gains(&mut stream_rng(42, 0), 1000).unwrap();
        let b = sample_gains(&mut stream_rng(42, 0), 1000).unwrap();
        let c = sample_gains(&mut stream_rng(42, 1), 1000).unwrap();
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| x.z13.to_bits() == y.z13.to_bits()
                && x.z12.to_bits() == y.z12.to_bits()
                && x.z23.to_bits() == y.z23.to_bits()));
        assert_ne!(a, c);
        assert!(sample_gains(&mut stream_rng(42, 0), 0).is_err());
    }

    #[test]
    fn unit_mean_and_variance() {
        let n = 1_000_000;
        let gains = sample_gains(&mut stream_rng(42, 0), n).unwrap();
        for pick in [
            |g: &LinkGains| g.z13,
            |g: &LinkGains| g.z12,
            |g: &LinkGains| g.z23,
        ] {
            let xs: Vec<f64> = gains.iter().map(pick).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((0.997..=1.003).contains(&mean), "mean {mean}");
            assert!((0.99..=1.01).contains(&var), "variance {var}");
            assert!(xs.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn kolmogorov_smirnov_sanity() {
        let n = 100_000;
        let gains = sample_gains(&mut stream_rng(7, 3), n).unwrap();
        for pick in [
            |g: &LinkGains| g.z13,
            |g: &LinkGains| g.z12,
            |g: &LinkGains| g.z23,
        ] {
            let mut xs: Vec<f64> = gains.iter().map(pick).collect();
            xs.sort_by(f64::total_cmp);
            let d = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let cdf = -(-x).exp_m1();
                    let lo = i as f64 / n as f64;
                    let hi = (i + 1) as f64 / n as f64;
                    (cdf - lo).abs().max((hi - cdf).abs())
                })
                .fold(0.0, f64::max);
            assert!(d < 2.0 / (n as f64).sqrt(), "KS statistic {d}");
        }
    }

    #[test]
    fn truncated_draws_respect_cap() {
        let mut rng = stream_rng(1, 0);
        let cap = 0.01;
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let z = exp_unit_below(&mut rng, cap).unwrap();
            assert!(z > 0.0 && z <= cap);
            sum += z;
        }
        // E[Z | Z <= c] = 1 - c e^{-c} / (1 - e^{-c}), about c/2 for small c.
        let expect = 1.0 - cap * (-cap).exp() / (-(-cap).exp_m1());
        assert!((sum / n as f64 / expect - 1.0).abs() < 0.01);
    }

    /// Source that always returns zero, i.e. U = 1 every time.
    struct Stuck;
    impl RngCore for Stuck {
        fn next_u32(&mut self) -> u32 {
            0
        }
        fn next_u64(&mut self) -> u64 {
            0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0)
        }
    }

    #[test]
    fn stuck_source_is_reported() {
        assert_eq!(exp_unit(&mut Stuck), Err(Error::RngFault(MAX_ZERO_RETRIES)));
    }
}
