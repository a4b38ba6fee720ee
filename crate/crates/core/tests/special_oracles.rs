//! Special functions and the two-hop outage formula against integral
//! references.

mod common;

use common::{bessel_ref, claim1_ref};
use rand::Rng;
use relaykit::fading::stream_rng;
use relaykit::outage::claim1;
use relaykit::special::{bessel_k0, bessel_k1};

#[test]
fn bessel_matches_integral_representation() {
    for i in 0..=200 {
        let x = 1e-6 * (50.0f64 / 1e-6).powf(i as f64 / 200.0);
        let k0 = bessel_k0(x).unwrap();
        let k1 = bessel_k1(x).unwrap();
        assert!((k0 - bessel_ref(0.0, x)).abs() <= 1e-12 * k0, "K0({x})");
        assert!((k1 - bessel_ref(1.0, x)).abs() <= 1e-12 * k1, "K1({x})");
    }
}

#[test]
fn claim1_matches_nested_quadrature() {
    let mut rng = stream_rng(5, 0);
    for _ in 0..50 {
        let x = 10f64.powf(rng.random_range(-3.0..1.5));
        let z = rng.random_range(0.0..=x);
        let (got, want) = (claim1(x, z).unwrap(), claim1_ref(x, z));
        assert!((got - want).abs() <= 1e-6, "x={x} z={z}: {got} vs {want}");
    }
}
