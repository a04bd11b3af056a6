//! Independent oracles for the reference instance: Burgers flux on [0, 2],
//! so g(v) = v (v - 2) / 2, g'(0) = -1 and g'(2) = 1.

#![allow(dead_code)]

use rosenau_waves::WaveProblem;

pub fn reference(alpha: f64) -> WaveProblem {
    WaveProblem::reference(alpha).unwrap()
}

pub fn g_ref(v: f64) -> f64 {
    0.5 * v * (v - 2.0)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

fn rhs(alpha: f64, delta: f64, eps: f64, v: f64, w: f64) -> (f64, f64) {
    (w, (-eps * w / (1.0 + w * w).powf(alpha) + g_ref(v)) / delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleOutcome {
    Crossed,
    Captured,
    Undecided,
}

/// Classical RK4 with a fixed step from the saddle along its unstable
/// direction. Crossing `v = 0` (or `w > 0` inside the strip) is
/// non-monotone; reaching a small ball around the origin with `w <= 0`
/// throughout, and staying out of `v < 0` for a further settling time, is
/// monotone.
pub fn rk4_shoot(alpha: f64, delta: f64, eps: f64) -> (OracleOutcome, f64) {
    let theta = (-eps + (eps * eps + 4.0 * delta).sqrt()) / (2.0 * delta);
    let norm = (1.0 + theta * theta).sqrt();
    let off = 2e-7;
    let (mut v, mut w) = (2.0 - off / norm, -off * theta / norm);
    let h = (0.02 * delta / eps.max(1e-3)).clamp(1e-6, 2e-3);
    let t_max = 200.0 * eps.max(1.0) + 50.0;
    let mut t = 0.0;
    let mut min_w: f64 = 0.0;
    let mut settled = None;
    while t < t_max {
        let k1 = rhs(alpha, delta, eps, v, w);
        let k2 = rhs(alpha, delta, eps, v + 0.5 * h * k1.0, w + 0.5 * h * k1.1);
        let k3 = rhs(alpha, delta, eps, v + 0.5 * h * k2.0, w + 0.5 * h * k2.1);
        let k4 = rhs(alpha, delta, eps, v + h * k3.0, w + h * k3.1);
        v += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        w += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        t += h;
        min_w = min_w.min(w);
        if v < 0.0 || (w > 0.0 && v > 1e-9 && v < 2.0) {
            return (OracleOutcome::Crossed, min_w);
        }
        if !v.is_finite() || !w.is_finite() || w.abs() > 1e6 {
            return (OracleOutcome::Undecided, min_w);
        }
        if settled.is_none() && v.hypot(w) < 1e-9 {
            settled = Some(t);
        }
        if let Some(ts) = settled {
            if t > ts + 20.0 * eps.max(1.0) {
                return (OracleOutcome::Captured, min_w);
            }
        }
    }
    (
        if settled.is_some() {
            OracleOutcome::Captured
        } else {
            OracleOutcome::Undecided
        },
        min_w,
    )
}

/// Bisection of the oracle indicator on `[lo, hi]` to absolute width `tol`.
pub fn oracle_eps_min(alpha: f64, delta: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    assert_eq!(
        rk4_shoot(alpha, delta, hi).0,
        OracleOutcome::Captured,
        "oracle upper bracket"
    );
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if rk4_shoot(alpha, delta, mid).0 == OracleOutcome::Captured {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
