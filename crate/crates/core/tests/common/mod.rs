//! Independent reference computations shared by the integration tests and
//! the acceptance harness. Nothing here calls the closed forms it checks.

#![allow(dead_code)]

use rand::Rng;
use relaykit::fading::{sample_link, LinkGains, RateNats};
use relaykit::special::{integrate, integrate_to_infinity};

/// `K_nu(x) = ∫_0^inf exp(-x cosh t) cosh(nu t) dt`.
pub fn bessel_ref(nu: f64, x: f64) -> f64 {
    integrate_to_infinity(
        |t: f64| (-x * t.cosh()).exp() * (nu * t).cosh(),
        0.0,
        1e-300,
        1e-14,
    )
    .expect("integral representation converges")
    .value
}

/// `Pr(1/Z12 + 1/(Z23 + z) >= 1/x)` by nested quadrature over both gains.
///
/// `Z12 <= x` is an outage on its own. Otherwise `Z23` has to stay below
/// `a x / (a - x) - z` where `a` is the drawn `Z12`.
pub fn claim1_ref(x: f64, z: f64) -> f64 {
    let inner = |a: f64| {
        // Mass beyond b = 50 is below 1e-21; a longer range would let every
        // node miss the peak at zero.
        let c = (a * x / (a - x) - z).min(50.0);
        integrate(|b: f64| (-b).exp(), 0.0, c, 1e-16, 1e-14)
            .unwrap()
            .value
    };
    // Outer variable t = a - x mapped onto [0, 1) by t = w / (1 - w).
    let tail = integrate(
        |w: f64| {
            if w <= 0.0 || w >= 1.0 {
                return 0.0;
            }
            let t = w / (1.0 - w);
            (-(x + t)).exp() * inner(x + t) / ((1.0 - w) * (1.0 - w))
        },
        0.0,
        1.0,
        1e-16,
        1e-12,
    )
    .unwrap()
    .value;
    -(-x).exp_m1() + tail
}

/// Smallest `p` with `ok(p)`, for `ok` monotone in `p`; infinite when no
/// power works.
pub fn min_power(ok: impl Fn(f64) -> bool) -> f64 {
    let mut hi = 1.0;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Golden-section minimum of `f` on `[a, b]` after a coarse scan.
pub fn scan_min(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let best = (0..=n)
        .map(|i| a + h * i as f64)
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap();
    let (mut lo, mut hi) = ((best - h).max(a), (best + h).min(b));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = hi - r * (hi - lo);
        let d = lo + r * (hi - lo);
        if f(c) <= f(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    f(0.5 * (lo + hi)).min(f(a)).min(f(b)).min(f(best))
}

/// Random gains and rate; half of the draws are pushed toward the relay
/// regime and rates span roughly 0.02 to 9 nats.
pub fn instance(rng: &mut impl Rng) -> (LinkGains, RateNats) {
    let mut g = sample_link(rng).unwrap();
    if rng.random::<bool>() {
        g.z13 *= 0.1;
    }
    let k = rng.random_range(-4.0f64..2.2).exp();
    (g, RateNats::new(k).unwrap())
}
