//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |value|)`. Nodes are never placed
//! on the endpoints, so integrable endpoint singularities such as `1/sqrt(x)`
//! or removable `0/0` forms are fine.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Largest number of subintervals before giving up.
pub const MAX_INTERVALS: usize = 4000;

/// Truncation level for semi-infinite integrals, relative to the peak.
pub const TAIL_CUTOFF: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(domain(format!(
            "integration bounds must be finite with a <= b, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 1,
        });
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });

    loop {
        if !total.is_finite() {
            return Err(Error::NonConvergence {
                estimate: total,
                abs_error: total_err,
                evaluations,
            });
        }
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::NonConvergence {
                estimate: total,
                abs_error: total_err,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap holds at least one piece");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point. Keep what we
            // have unless the estimate is clearly unusable.
            heap.push(worst);
            if total_err <= 1e3 * abs_tol.max(rel_tol * total.abs()) {
                break;
            }
            return Err(Error::NonConvergence {
                estimate: total,
                abs_error: total_err,
                evaluations,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        // Guard against drift in the running sums.
        if heap.len() % 256 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let total: f64 = heap.iter().map(|p| p.value).sum();
    let total_err: f64 = heap.iter().map(|p| p.error).sum();
    Ok(QuadratureResult {
        value: total,
        abs_error_estimate: total_err.max(0.0),
        evaluations,
    })
}

/// Integrates a decaying `f` over `[a, inf)` by truncating where `|f|` falls
/// below [`TAIL_CUTOFF`] times its observed peak.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    let b = truncation_point(&mut f, a)?;
    integrate(f, a, b, abs_tol, rel_tol)
}

fn truncation_point<F: FnMut(f64) -> f64>(f: &mut F, a: f64) -> Result<f64> {
    let mut peak = 0.0f64;
    let mut step = 1.0 / 64.0;
    let mut quiet = 0;
    let mut x = a;
    while step < 1e12 {
        x = a + step;
        let v = f(x).abs();
        if !v.is_finite() {
            return Err(domain(format!("integrand not finite at {x}")));
        }
        peak = peak.max(v);
        if v <= TAIL_CUTOFF * peak {
            quiet += 1;
            if quiet == 2 {
                return Ok(x);
            }
        } else {
            quiet = 0;
        }
        step *= 2.0;
    }
    Err(Error::Divergence(format!(
        "integrand still above cutoff at {x}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel::bessel_k1;

    #[test]
    fn exponential_on_truncated_range() {
        let r = integrate(|z: f64| (-z).exp(), 0.0, 40.0, 1e-12, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(r.abs_error_estimate >= 0.0 && r.evaluations >= 1);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|z: f64| (-z).exp(), 0.0, 1e-13, 1e-13).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn removable_endpoint() {
        let r = integrate(
            |z: f64| 2.0 * z * bessel_k1(2.0 * z).unwrap() * (-2.0 * z).exp(),
            0.0,
            0.1,
            1e-13,
            1e-12,
        )
        .unwrap();
        assert!(r.value.is_finite() && r.value > 0.08 && r.value < 0.1);
    }

    #[test]
    fn inverse_sqrt_singularity() {
        let r = integrate(|z: f64| 1.0 / z.sqrt(), 0.0, 1.0, 1e-10, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn bad_bounds_and_budget() {
        assert!(integrate(|x| x, 1.0, 0.0, 1e-9, 1e-9).is_err());
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-9, 1e-9).unwrap().value, 0.0);
        // Wildly oscillating integrand with an impossible tolerance.
        let err = integrate(|x: f64| (1.0 / x).sin() / x, 0.0, 1.0, 1e-15, 0.0).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }
}
