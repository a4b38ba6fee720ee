//! Closed-form solution of the half-duplex flow program.
//!
//! In the relay regime the program reduces to a one-dimensional search over
//! the broadcast-phase duration `t`. For each `t` the optimal flows follow one
//! of three patterns, depending on whether the direct flows `x1` and `x3`
//! are active, and the piecewise objectives below are the program's value
//! with that pattern substituted. All of them are written divided by
//! `e^K - 1`, so nothing overflows for large rates.

use crate::error::{Error, Result};
use crate::fading::{harmonic_mean_or_zero, LinkGains, RateNats};
use crate::fullduplex::RnsnrBound;

use super::{Branch, FlowSolution, FlowSplit};

/// Golden-section stopping width on `t`.
pub const T_TOL: f64 = 1e-10;

/// Constants of the relay regime.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CaseConstants {
    pub a1: f64,
    pub a2: f64,
    /// Minimizer of the large-rate objective `A1^t / z23 + A2^(1-t) / z12`.
    pub t_star: f64,
}

pub fn case_constants(g: &LinkGains) -> Result<CaseConstants> {
    if g.direct_regime() || g.z13 == 0.0 {
        return Err(Error::Regime(format!(
            "relay regime needs 0 < z13 < M_H(z12, z23); got {g:?}"
        )));
    }
    let a1 = g.z23 * (1.0 / g.z13 - 1.0 / g.z12);
    let a2 = g.z12 * (1.0 / g.z13 - 1.0 / g.z23);
    let (l1, l2) = (a1.ln(), a2.ln());
    let t_star = ((g.z23 * l2 / (g.z12 * l1)).ln() + l2) / (l1 + l2);
    // The minimizer provably lies in [0, 1]; allow only rounding slack.
    assert!(
        (-1e-9..=1.0 + 1e-9).contains(&t_star),
        "t* = {t_star} outside [0, 1] for {g:?}"
    );
    Ok(CaseConstants {
        a1,
        a2,
        t_star: t_star.clamp(0.0, 1.0),
    })
}

/// Shared state for the piecewise objectives.
struct Pieces {
    z13: f64,
    z12: f64,
    z23: f64,
    k: f64,
    l1: f64,
    l2: f64,
    /// `e^K / (e^K - 1)`
    r: f64,
    /// `1 / (e^K - 1)`
    q: f64,
}

/// `(e^a - 1) / (e^K - 1)` without overflow.
fn growth_ratio(a: f64, k: f64) -> f64 {
    (a - k).exp() * (-(-a).exp_m1()) / (-(-k).exp_m1())
}

impl Pieces {
    fn new(g: &LinkGains, k: f64, l1: f64, l2: f64) -> Self {
        Pieces {
            z13: g.z13,
            z12: g.z12,
            z23: g.z23,
            k,
            l1,
            l2,
            r: 1.0 / (-(-k).exp_m1()),
            q: 1.0 / k.exp_m1(),
        }
    }

    /// All three flows active.
    fn tilde1(&self, t: f64) -> f64 {
        self.r * ((t * self.l1).exp() / self.z23 + ((1.0 - t) * self.l2).exp() / self.z12)
            - self.q / self.z13
    }

    /// No direct flow in the second phase.
    fn tilde2(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::INFINITY;
        }
        let relay = t / self.z12 * (self.k / t - self.k).exp();
        self.r * (relay + (t * self.l1).exp() / self.z23)
            - self.q * (t / self.z13 + (1.0 - t) / self.z23)
    }

    /// No direct flow in the first phase.
    fn tilde3(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return f64::INFINITY;
        }
        let s = 1.0 - t;
        let relay = s / self.z23 * (self.k / s - self.k).exp();
        self.r * (relay + (s * self.l2).exp() / self.z12) - self.q * (s / self.z13 + t / self.z12)
    }

    /// Everything through the relay.
    fn hat1(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return f64::INFINITY;
        }
        t / self.z12 * growth_ratio(self.k / t, self.k)
            + (1.0 - t) / self.z23 * growth_ratio(self.k / (1.0 - t), self.k)
    }

    fn split(&self, branch: Branch, t: f64) -> FlowSplit {
        let (k, l1, l2) = (self.k, self.l1, self.l2);
        let w = t * (1.0 - t);
        let (x1, x2, x3) = match branch {
            Branch::TildeS1 => (k * t - w * l1, w * (l1 + l2), k * (1.0 - t) - w * l2),
            Branch::TildeS2 | Branch::HatS2 => (k * t - w * l1, k * (1.0 - t) + w * l1, 0.0),
            Branch::TildeS3 | Branch::HatS3 => (0.0, k * t + w * l2, k * (1.0 - t) - w * l2),
            Branch::HatS1 => (0.0, k, 0.0),
            Branch::DirectLink => (k, 0.0, 0.0),
        };
        FlowSplit::clamped(x1, x2, x3, t)
    }
}

/// Minimizes a unimodal `f` on `[a, b]`, also checking both endpoints.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let fa = f(a);
    if b <= a {
        return (a, fa);
    }
    let fb = f(b);
    let invphi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - invphi * (hi - lo);
    let mut d = lo + invphi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - invphi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + invphi * (hi - lo);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for cand in [(a, fa), (b, fb)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

fn direct_solution(g: &LinkGains, k: f64) -> FlowSolution {
    FlowSolution {
        split: FlowSplit::clamped(k, 0.0, 0.0, 1.0),
        bound: RnsnrBound::new(1.0 / g.z13),
        branch: Branch::DirectLink,
    }
}

/// Minimum RNSNR of the half-duplex protocol without coherent combining.
pub fn b1(g: &LinkGains, k: RateNats) -> FlowSolution {
    let k = k.nats();
    if g.direct_regime() {
        return direct_solution(g, k);
    }
    if g.z13 == 0.0 {
        // Only the relay path exists; L1 = L2 = inf.
        let p = Pieces::new(g, k, f64::INFINITY, f64::INFINITY);
        let (t, v) = golden_min(|t| p.hat1(t), 0.0, 1.0, T_TOL);
        return FlowSolution {
            split: p.split(Branch::HatS1, t),
            bound: RnsnrBound::new(v),
            branch: Branch::HatS1,
        };
    }
    let cc = case_constants(g).expect("relay regime checked above");
    let (l1, l2) = (cc.a1.ln(), cc.a2.ln());
    let p = Pieces::new(g, k, l1, l2);

    let mut candidates: Vec<(Branch, f64, f64)> = Vec::with_capacity(3);
    if k > harmonic_mean_or_zero(l1, l2) {
        let lo1 = (1.0 - k / l1).max(0.0);
        let hi1 = (k / l2).min(1.0);
        // The large-rate objective is convex with stationary point t*.
        let t1 = cc.t_star.clamp(lo1, hi1);
        candidates.push((Branch::TildeS1, t1, p.tilde1(t1)));
        let (t, v) = golden_min(|t| p.tilde2(t), hi1, 1.0, T_TOL);
        candidates.push((Branch::TildeS2, t, v));
        let (t, v) = golden_min(|t| p.tilde3(t), 0.0, lo1, T_TOL);
        candidates.push((Branch::TildeS3, t, v));
    } else {
        let lo = k / l2;
        let hi = 1.0 - k / l1;
        let (t, v) = golden_min(|t| p.hat1(t), lo, hi, T_TOL);
        candidates.push((Branch::HatS1, t, v));
        let (t, v) = golden_min(|t| p.tilde2(t), hi, 1.0, T_TOL);
        candidates.push((Branch::HatS2, t, v));
        let (t, v) = golden_min(|t| p.tilde3(t), 0.0, lo, T_TOL);
        candidates.push((Branch::HatS3, t, v));
    }
    let (branch, t, v) = candidates
        .into_iter()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("three candidates");
    FlowSolution {
        split: p.split(branch, t),
        bound: RnsnrBound::new(v),
        branch,
    }
}

/// Minimum RNSNR with coherent combining in the second phase.
pub fn b2(g: &LinkGains, k: RateNats) -> FlowSolution {
    b1(&g.coherent(), k)
}

/// Small-rate limit of [`b1`].
pub fn b1_limit_zero(g: &LinkGains) -> RnsnrBound {
    if g.direct_regime() {
        RnsnrBound::new(1.0 / g.z13)
    } else {
        RnsnrBound::new(1.0 / g.z23 + 1.0 / g.z12)
    }
}

/// Large-rate limit of [`b1`].
pub fn b1_limit_inf(g: &LinkGains) -> RnsnrBound {
    if g.direct_regime() {
        return RnsnrBound::new(1.0 / g.z13);
    }
    if g.z13 == 0.0 {
        return RnsnrBound::UNSUPPORTABLE;
    }
    let cc = case_constants(g).expect("relay regime checked above");
    RnsnrBound::new(cc.a1.powf(cc.t_star) / g.z23 + cc.a2.powf(1.0 - cc.t_star) / g.z12)
}

pub fn b2_limit_zero(g: &LinkGains) -> RnsnrBound {
    b1_limit_zero(&g.coherent())
}

pub fn b2_limit_inf(g: &LinkGains) -> RnsnrBound {
    b1_limit_inf(&g.coherent())
}

/// Majorant of [`b1`] over all rates in the relay regime, used to stratify
/// heavy-tailed expectations.
pub fn b1_envelope(g: &LinkGains) -> RnsnrBound {
    if g.direct_regime() {
        RnsnrBound::new(1.0 / g.z13)
    } else {
        RnsnrBound::new((2.0 / g.z13).sqrt() * (1.0 / g.z12 + 1.0 / g.z23).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::{sample_link, stream_rng};
    use crate::flow::objective;

    fn g(z13: f64, z12: f64, z23: f64) -> LinkGains {
        LinkGains::new(z13, z12, z23).unwrap()
    }

    fn k(n: f64) -> RateNats {
        RateNats::new(n).unwrap()
    }

    #[test]
    fn direct_regime_examples() {
        for kk in [1e-3, 1.0, 20.0] {
            let s = b1(&g(1.0, 1.0, 1.0), k(kk));
            assert_eq!(s.bound.value(), 1.0);
            assert_eq!(s.branch, Branch::DirectLink);
            assert_eq!((s.split.x1, s.split.t1), (kk, 1.0));
        }
        assert_eq!(b1_limit_zero(&g(1.0, 1.0, 1.0)).value(), 1.0);
        assert_eq!(b1_limit_inf(&g(1.0, 1.0, 1.0)).value(), 1.0);
        assert!(!b1(&g(0.0, 0.0, 0.0), k(1.0)).bound.is_finite());
    }

    #[test]
    fn case_constant_examples() {
        let c = case_constants(&g(0.1, 1.0, 1.0)).unwrap();
        assert!((c.a1 - 9.0).abs() < 1e-12 && (c.a2 - 9.0).abs() < 1e-12);
        assert!((c.t_star - 0.5).abs() < 1e-12);
        let c = case_constants(&g(0.2, 2.0, 1.0)).unwrap();
        assert!((c.a1 - 4.5).abs() < 1e-12 && (c.a2 - 8.0).abs() < 1e-12);
        assert!(matches!(
            case_constants(&g(1.0, 1.0, 1.0)),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn limit_examples() {
        let gains = g(0.1, 1.0, 1.0);
        assert!((b1_limit_zero(&gains).value() - 2.0).abs() < 1e-14);
        assert!((b1_limit_inf(&gains).value() - 6.0).abs() < 1e-12);
        assert!((b1(&gains, k(1e-3)).bound.value() - 2.0).abs() < 1e-2);
        assert!((b1(&gains, k(1e-4)).bound.value() - 2.0).abs() < 2e-3);
        assert!((b1(&gains, k(30.0)).bound.value() - 6.0).abs() < 1e-2);
        assert!((b2(&gains, k(1e-3)).bound.value() - (1.0 / 1.1 + 1.0)).abs() < 1e-2);
        let gate = g(0.1, 1.0, 0.9).coherent();
        assert!(!gate.direct_regime());
    }

    #[test]
    fn relay_only_link() {
        let gains = g(0.0, 1.0, 1.0);
        let s = b1(&gains, k(1.0));
        assert_eq!(s.branch, Branch::HatS1);
        // Symmetric relay path: half the slot each way at rate 2K.
        let expect = 0.5 * 2.0 * (2.0f64.exp_m1()) / 1f64.exp_m1();
        assert!((s.bound.value() - expect).abs() < 1e-9);
        assert!(!b1_limit_inf(&gains).is_finite());
    }

    #[test]
    fn bound_reproduced_by_split() {
        let mut rng = stream_rng(3, 0);
        for i in 0..2000 {
            let gains = sample_link(&mut rng).unwrap();
            let kk = 0.01 + 6.0 * (i as f64 / 2000.0);
            for (gg, sol) in [
                (gains, b1(&gains, k(kk))),
                (gains.coherent(), b2(&gains, k(kk))),
            ] {
                let sp = sol.split;
                assert!(((sp.x1 + sp.x2 + sp.x3) / kk - 1.0).abs() < 1e-9, "{sol:?}");
                assert!((sp.t1 + sp.t2 - 1.0).abs() < 1e-12);
                let v = objective(&gg, &sp).unwrap() / kk.exp_m1();
                assert!(
                    (v / sol.bound.value() - 1.0).abs() < 1e-9,
                    "{gains:?} K={kk}: objective {v} vs bound {}",
                    sol.bound.value()
                );
            }
        }
    }

    #[test]
    fn subcase_boundary_agrees() {
        let gains = g(0.1, 1.0, 2.0);
        let cc = case_constants(&gains).unwrap();
        let m = harmonic_mean_or_zero(cc.a1.ln(), cc.a2.ln());
        let below = b1(&gains, k(m * (1.0 - 1e-9))).bound.value();
        let at = b1(&gains, k(m)).bound.value();
        let above = b1(&gains, k(m * (1.0 + 1e-9))).bound.value();
        assert!((at - below).abs() <= 1e-7 * at);
        assert!((above - at).abs() <= 1e-7 * at);
    }

    #[test]
    fn envelope_dominates() {
        let mut rng = stream_rng(8, 0);
        let mut seen = 0;
        while seen < 100_000 {
            let gains = sample_link(&mut rng).unwrap();
            if gains.direct_regime() {
                continue;
            }
            seen += 1;
            let env = b1_envelope(&gains).value();
            assert!(b1_limit_inf(&gains).value() <= env * (1.0 + 1e-12));
        }
    }
}
