//! The `delta = 0` problem and the `delta -> 0` profile at `alpha = 1/2`.
//!
//! At `delta = 0` a monotone wave solves `eps w / (1 + w^2)^alpha = g(v)`
//! for `w(v) <= 0`. For `alpha > 1/2` the response is bounded, so the
//! branch set can split into two components, and the threshold is the
//! Hadeler-Rothe min-max value.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{response_peak, WaveProblem, SEARCH_GRID};
use crate::optimize::{bisect_root, golden_max, grid_golden_max};

/// Residual bound that every returned branch root satisfies.
pub const ROOT_RESIDUAL: f64 = 1e-12;

/// Default profile resolution.
pub const DEFAULT_PROFILE_GRID: usize = 2048;

/// Roots `w <= 0` of `eps w / (1 + w^2)^alpha = g(v)` at one `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularBranches {
    pub v: f64,
    /// Root of smaller magnitude.
    pub w_plus: Option<f64>,
    /// Root of larger magnitude; only for `alpha > 1/2`.
    pub w_minus: Option<f64>,
}

/// `z / (1 + z^2)^alpha` for `z >= 0`, safe for huge `z`.
fn response(z: f64, alpha: f64) -> f64 {
    if z > 1.0 {
        z.powf(1.0 - 2.0 * alpha) * (1.0 + 1.0 / (z * z)).powf(-alpha)
    } else {
        z / (1.0 + z * z).powf(alpha)
    }
}

pub fn branch_solve(
    problem: &WaveProblem,
    alpha: f64,
    epsilon: f64,
    v: f64,
) -> Result<SingularBranches> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::NegativeAlpha(alpha));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    // Work with z = -w >= 0 and target q = -g(v) >= 0.
    let q = (-problem.g_eval(v)?).max(0.0);
    let mut out = SingularBranches {
        v,
        w_plus: None,
        w_minus: None,
    };
    let h = |z: f64| epsilon * response(z, alpha) - q;

    if q == 0.0 {
        out.w_plus = Some(0.0);
        return Ok(out);
    }

    if alpha <= 0.5 {
        // Increasing response; bounded by eps at alpha = 1/2.
        let mut hi = 1.0;
        while h(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Ok(out);
            }
        }
        out.w_plus = accept(bisect_root(h, 0.0, hi), h);
        return Ok(out);
    }

    let z_star = 1.0 / (2.0 * alpha - 1.0).sqrt();
    let top = epsilon * response_peak(alpha) - q;
    if top.abs() <= ROOT_RESIDUAL {
        out.w_plus = Some(-z_star);
        out.w_minus = Some(-z_star);
        return Ok(out);
    }
    if top < 0.0 {
        return Ok(out);
    }
    out.w_plus = accept(bisect_root(h, 0.0, z_star), h);
    let mut hi = 2.0 * z_star;
    while h(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(out);
        }
    }
    out.w_minus = accept(bisect_root(h, z_star, hi), h);
    Ok(out)
}

fn accept<F: Fn(f64) -> f64>(z: f64, h: F) -> Option<f64> {
    (h(z).abs() <= ROOT_RESIDUAL).then_some(-z)
}

/// Branches on a uniform `n`-point grid over `[u_+, u_-]`.
pub fn branch_sweep(
    problem: &WaveProblem,
    alpha: f64,
    epsilon: f64,
    n: usize,
) -> Result<Vec<SingularBranches>> {
    uniform_grid(problem.u_plus(), problem.u_minus(), n)
        .into_iter()
        .map(|v| branch_solve(problem, alpha, epsilon, v))
        .collect()
}

/// CSV with header `v,w_plus,w_minus`; missing roots are empty fields.
pub fn write_branch_csv<W: Write>(rows: &[SingularBranches], mut out: W) -> io::Result<()> {
    let field = |x: Option<f64>| x.map(|x| x.to_string()).unwrap_or_default();
    writeln!(out, "v,w_plus,w_minus")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.v, field(r.w_plus), field(r.w_minus))?;
    }
    Ok(())
}

/// `inf_A sup_v (1/A)(1 + A^2 g(v)^2)^alpha`, returned as `(A*, value)`.
///
/// The inner supremum is taken numerically over `v`; the outer infimum by
/// golden section on `log A`.
pub fn hadeler_rothe(problem: &WaveProblem, alpha: f64) -> Result<(f64, f64)> {
    if alpha.is_nan() || alpha <= 0.5 {
        return Err(Error::AlphaBelowHalf(alpha));
    }
    let (_, g_abs_max) = grid_golden_max(
        |v| problem.g(v).abs(),
        problem.u_plus(),
        problem.u_minus(),
        SEARCH_GRID,
    );
    let objective = |log_a: f64| {
        let a = log_a.exp();
        (1.0 + a * a * g_abs_max * g_abs_max).powf(alpha) / a
    };
    let (log_a, neg) = golden_max(|t| -objective(t), -40.0, 40.0, 1e-12);
    Ok((log_a.exp(), -neg))
}

/// `max_{v in (u_+, u_-]} |G(v)| / (v - u_+)` with its maximiser.
pub fn eps_star_point(problem: &WaveProblem) -> (f64, f64) {
    problem.averaged_integral_max()
}

pub fn eps_star(problem: &WaveProblem) -> f64 {
    eps_star_point(problem).1
}

/// `Z0(v) = sqrt(2) sqrt(G(v) + eps (v - u_+))` on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularProfile {
    pub epsilon: f64,
    pub eps_star: f64,
    pub v: Vec<f64>,
    pub big_g: Vec<f64>,
    pub z0: Vec<f64>,
    pub z0_max: f64,
    /// Leftmost maximiser (ties within 1e-12 go left).
    pub z0_argmax: f64,
}

impl SingularProfile {
    /// Leading-order depth `min w ~ -max Z0 / sqrt(delta)`.
    pub fn predicted_min_w(&self, delta: f64) -> f64 {
        -self.z0_max / delta.sqrt()
    }

    /// CSV with header `v,G,Z0`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "v,G,Z0")?;
        for ((v, g), z) in self.v.iter().zip(&self.big_g).zip(&self.z0) {
            writeln!(out, "{v},{g},{z}")?;
        }
        Ok(())
    }
}

pub fn z0_profile(problem: &WaveProblem, epsilon: f64, n_grid: usize) -> Result<SingularProfile> {
    if n_grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_grid must be at least 2, got {n_grid}"
        )));
    }
    let star = eps_star(problem);
    let slack = 1e-12 * star.max(1.0);
    if !(epsilon >= star - slack) || !epsilon.is_finite() {
        return Err(Error::RadicandNegative {
            epsilon,
            eps_star: star,
        });
    }
    let u_plus = problem.u_plus();
    let radicand = |v: f64| (problem.big_g(v) + epsilon * (v - u_plus)).max(0.0);
    let z0 = |v: f64| (2.0 * radicand(v)).sqrt();

    let v = uniform_grid(u_plus, problem.u_minus(), n_grid);
    let big_g: Vec<f64> = v.iter().map(|&x| problem.big_g(x)).collect();
    let z: Vec<f64> = v.iter().map(|&x| z0(x)).collect();

    let (z0_argmax, z0_max) = leftmost_max(&v, &z, z0);
    Ok(SingularProfile {
        epsilon,
        eps_star: star,
        v,
        big_g,
        z0: z,
        z0_max,
        z0_argmax,
    })
}

/// Refines every grid-local maximum (endpoints included) by golden
/// section and returns the leftmost global one.
fn leftmost_max<F: Fn(f64) -> f64>(v: &[f64], y: &[f64], f: F) -> (f64, f64) {
    let n = v.len();
    let mut candidates = Vec::new();
    for i in 0..n {
        let left = i == 0 || y[i] >= y[i - 1];
        let right = i == n - 1 || y[i] >= y[i + 1];
        if !(left && right) {
            continue;
        }
        let lo = v[i.saturating_sub(1)];
        let hi = v[(i + 1).min(n - 1)];
        let (x, fx) = golden_max(&f, lo, hi, 1e-14);
        candidates.push(if fx >= y[i] { (x, fx) } else { (v[i], y[i]) });
    }
    let best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    candidates
        .into_iter()
        .filter(|c| c.1 >= best - 1e-12)
        .fold((f64::INFINITY, best), |acc, c| {
            if c.0 < acc.0 {
                (c.0, best)
            } else {
                acc
            }
        })
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + h * i as f64 })
        .collect()
}
