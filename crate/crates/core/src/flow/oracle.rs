//! Brute-force attack on the flow program, independent of the case analysis.
//!
//! For each broadcast duration `t1` on a grid the inner problem over the
//! simplex `x1 + x2 + x3 = K` is solved by nested golden-section searches
//! (it is convex), then the best grid cell is refined. Everything is built
//! on the per-phase SNR formulas only.

use crate::error::{Error, Result};
use crate::fading::{LinkGains, RateNats};

use super::closed_form::golden_min;
use super::regions::{s_cb, s_ma, s_ma_coherent};

/// Energy `t * snr` of one phase. Infeasible or overflowing phases cost
/// `+inf`; the product is formed here so that `inf * 0` never yields NaN.
fn phase_energy(t: f64, snr: Result<f64>) -> f64 {
    match snr {
        Ok(0.0) => 0.0,
        Ok(v) if v.is_finite() => t * v,
        _ => f64::INFINITY,
    }
}

fn solve<F>(k: f64, grid_n: usize, energy: F) -> Result<f64>
where
    F: Fn(f64, f64, f64, f64) -> f64,
{
    if grid_n < 200 {
        return Err(Error::Precondition(format!(
            "grid_n must be >= 200, got {grid_n}"
        )));
    }
    let tol = 1e-10 * k.max(1.0);
    let inner = |t1: f64| -> f64 {
        let by_x2 = |x2: f64| {
            let rest = (k - x2).max(0.0);
            golden_min(
                |x1| energy(x1, x2, (rest - x1).max(0.0), t1),
                0.0,
                rest,
                tol,
            )
            .1
        };
        golden_min(by_x2, 0.0, k, tol).1
    };

    let n = grid_n as f64;
    let values: Vec<f64> = (0..=grid_n).map(|i| inner(i as f64 / n)).collect();
    let best = (0..=grid_n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("grid is non-empty");
    let lo = best.saturating_sub(1) as f64 / n;
    let hi = (best + 1).min(grid_n) as f64 / n;
    let refined = golden_min(inner, lo, hi, 1e-10).1;
    Ok(refined.min(values[best]) / k.exp_m1())
}

/// Grid-and-refine minimum of the flow program without coherent combining,
/// divided by `e^K - 1`.
pub fn b1_oracle(g: &LinkGains, k: RateNats, grid_n: usize) -> Result<f64> {
    let g = *g;
    solve(k.nats(), grid_n, move |x1, x2, x3, t1| {
        let t2 = 1.0 - t1;
        phase_energy(t1, s_cb(&g, x1, x2, t1)) + phase_energy(t2, s_ma(&g, x2, x3, t2))
    })
}

/// Same as [`b1_oracle`] with the coherent multiple-access formula.
pub fn b2_oracle(g: &LinkGains, k: RateNats, grid_n: usize) -> Result<f64> {
    let g = *g;
    solve(k.nats(), grid_n, move |x1, x2, x3, t1| {
        let t2 = 1.0 - t1;
        phase_energy(t1, s_cb(&g, x1, x2, t1)) + phase_energy(t2, s_ma_coherent(&g, x2, x3, t2))
    })
}
