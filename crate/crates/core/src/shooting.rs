//! Shooting along the unstable manifold of the saddle `(u_-, 0)`, orbit
//! classification, and bisection in epsilon for the existence boundary.
//!
//! The set of epsilon admitting a monotone wave is an upward ray, so the
//! monotone / non-monotone indicator of a single shot can be bisected.
//!
//! Classification at the stable rest point `(u_+, 0)` uses the linearised
//! flow once the orbit is inside the capture ball: in the node regime the
//! side eigenline is a separatrix, and a state on its steep side (`w <
//! chi_- (v - u_+)`) overshoots `v = u_+` later. Such orbits, and every
//! capture in the spiral regime, are counted as a (predicted) crossing.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::WaveProblem;
use crate::ode::{integrate, EventKind, IntegratorConfig, Orbit, PhaseState, Termination};

/// Relative launch distance from the saddle, in units of `u_- - u_+`.
pub const LAUNCH_OFFSET_REL: f64 = 1e-7;

/// An orbit counts as monotone while `max w <= MONOTONE_W_SLACK * abs_tol`.
pub const MONOTONE_W_SLACK: f64 = 10.0;

/// Upper-bracket search gives up after this many doublings.
pub const MAX_DOUBLINGS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnresolvedReason {
    /// Monotone capture at a (nearly) degenerate node: main and side
    /// directions cannot be told apart.
    DegenerateNode,
    Escaped,
    StepFloor,
    TimeLimit,
    StepLimit,
    NonFinite,
    BracketFailure,
}

impl UnresolvedReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            UnresolvedReason::DegenerateNode => "degenerate_node",
            UnresolvedReason::Escaped => "escaped",
            UnresolvedReason::StepFloor => "step_floor",
            UnresolvedReason::TimeLimit => "time_limit",
            UnresolvedReason::StepLimit => "step_limit",
            UnresolvedReason::NonFinite => "non_finite",
            UnresolvedReason::BracketFailure => "bracket_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    MonotoneViaMain,
    MonotoneViaSide,
    NonMonotone { crossings: u32 },
    Unresolved(UnresolvedReason),
}

impl Classification {
    pub fn is_monotone(&self) -> bool {
        matches!(
            self,
            Classification::MonotoneViaMain | Classification::MonotoneViaSide
        )
    }

    /// Indicator used by the bisection: a monotone capture whose entry
    /// direction is degenerate still counts as monotone; every other
    /// unresolved shot counts as non-monotone.
    pub fn counts_as_monotone(&self) -> bool {
        self.is_monotone()
            || matches!(
                self,
                Classification::Unresolved(UnresolvedReason::DegenerateNode)
            )
    }

    pub fn is_unresolved(&self) -> bool {
        matches!(self, Classification::Unresolved(_))
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::MonotoneViaMain => "monotone_via_main",
            Classification::MonotoneViaSide => "monotone_via_side",
            Classification::NonMonotone { .. } => "non_monotone",
            Classification::Unresolved(_) => "unresolved",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Unresolved(r) => write!(f, "unresolved_{}", r.as_str()),
            other => f.write_str(other.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootConfig {
    pub integrator: IntegratorConfig,
    /// Absolute launch distance from the saddle.
    pub launch_offset: f64,
    /// Entry is reported degenerate when `|eps - eps0| <= 10 tol max(1, eps)`.
    pub degeneracy_tol: f64,
}

impl ShootConfig {
    pub fn for_problem(problem: &WaveProblem) -> Self {
        Self {
            integrator: IntegratorConfig::for_problem(problem),
            launch_offset: LAUNCH_OFFSET_REL * problem.width(),
            degeneracy_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult {
    pub classification: Classification,
    pub orbit: Orbit,
    /// Terminal approach slope `w / (v - u_+)`; present iff monotone.
    pub entry_slope: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BisectionResult {
    pub eps_min: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
    pub entry_at_min: Classification,
    /// Shots that were unresolved for reasons other than degeneracy.
    pub unresolved_shots: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub delta: f64,
    pub eps_min: f64,
    pub eps0: f64,
    pub entry: Classification,
    pub iterations: u32,
}

/// Step of length `offset` from the saddle along its unstable eigenvector,
/// into the quadrant `v < u_-`, `w < 0`.
pub fn launch_state(problem: &WaveProblem, delta: f64, epsilon: f64, offset: f64) -> PhaseState {
    let theta = problem.eigen_data(delta, epsilon).theta_plus;
    let norm = theta.hypot(1.0);
    PhaseState::new(problem.u_minus() - offset / norm, -offset * theta / norm)
}

pub fn shoot(problem: &WaveProblem, delta: f64, epsilon: f64) -> Result<ShootResult> {
    shoot_with(problem, delta, epsilon, &ShootConfig::for_problem(problem))
}

pub fn shoot_with(
    problem: &WaveProblem,
    delta: f64,
    epsilon: f64,
    config: &ShootConfig,
) -> Result<ShootResult> {
    if !(delta > 0.0) {
        return Err(Error::ZeroDelta(delta));
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    let start = launch_state(problem, delta, epsilon, config.launch_offset);
    let orbit = match integrate(problem, delta, epsilon, start, &config.integrator) {
        Ok(o) => o,
        Err(Error::NonFiniteState { t, v, w }) => {
            return Ok(ShootResult {
                classification: Classification::Unresolved(UnresolvedReason::NonFinite),
                orbit: Orbit {
                    samples: vec![(0.0, start), (t, PhaseState::new(v, w))],
                    events: Vec::new(),
                    termination: Termination::StepLimit,
                },
                entry_slope: None,
            })
        }
        Err(e) => return Err(e),
    };
    let (classification, entry_slope) = classify(problem, delta, epsilon, &orbit, config);
    Ok(ShootResult {
        classification,
        orbit,
        entry_slope,
    })
}

fn classify(
    problem: &WaveProblem,
    delta: f64,
    epsilon: f64,
    orbit: &Orbit,
    config: &ShootConfig,
) -> (Classification, Option<f64>) {
    let crossings = orbit
        .events
        .iter()
        .filter(|e| e.kind == EventKind::CrossedVplus)
        .count() as u32;
    let kind = match orbit.termination {
        Termination::Event(k) => k,
        Termination::Equilibrium => {
            // launched with zero offset: never leaves the saddle
            return (
                Classification::Unresolved(UnresolvedReason::TimeLimit),
                None,
            );
        }
        Termination::TimeLimit => {
            return (
                Classification::Unresolved(UnresolvedReason::TimeLimit),
                None,
            )
        }
        Termination::StepLimit => {
            return (
                Classification::Unresolved(UnresolvedReason::StepLimit),
                None,
            )
        }
    };
    match kind {
        EventKind::CrossedVplus | EventKind::CrossedWzero => (
            Classification::NonMonotone {
                crossings: crossings.max(1),
            },
            None,
        ),
        EventKind::Escaped => (Classification::Unresolved(UnresolvedReason::Escaped), None),
        EventKind::StepFloor => (
            Classification::Unresolved(UnresolvedReason::StepFloor),
            None,
        ),
        EventKind::EnteredCaptureBall => {
            let cfg = &config.integrator;
            let predicted = Classification::NonMonotone {
                crossings: crossings + 1,
            };
            if orbit.max_w() > MONOTONE_W_SLACK * cfg.abs_tol {
                return (
                    Classification::NonMonotone {
                        crossings: crossings.max(1),
                    },
                    None,
                );
            }
            let eig = problem.eigen_data(delta, epsilon);
            let (chi_plus, chi_minus) = match (eig.chi_plus, eig.chi_minus) {
                (Some(p), Some(m)) => (p, m),
                _ => return (predicted, None),
            };
            let end = orbit.last();
            let x = end.v - problem.u_plus();
            if x <= 0.0 || end.w < chi_minus * x {
                return (predicted, None);
            }
            let eps0 = problem.eps0(delta);
            if (epsilon - eps0).abs() <= 10.0 * config.degeneracy_tol * epsilon.max(1.0) {
                return (
                    Classification::Unresolved(UnresolvedReason::DegenerateNode),
                    None,
                );
            }
            let slope = terminal_slope(orbit, problem.u_plus(), cfg.r_stop);
            let mid = 0.5 * (chi_plus + chi_minus);
            let c = if slope < mid {
                Classification::MonotoneViaSide
            } else {
                Classification::MonotoneViaMain
            };
            (c, Some(slope))
        }
    }
}

/// Mean of `w / (v - u_+)` over samples with `v - u_+` in
/// `[r_stop, 10 r_stop]`; falls back to the final state.
fn terminal_slope(orbit: &Orbit, u_plus: f64, r_stop: f64) -> f64 {
    let (sum, n) = orbit
        .samples
        .iter()
        .filter(|(_, s)| {
            let x = s.v - u_plus;
            (r_stop..=10.0 * r_stop).contains(&x)
        })
        .fold((0.0, 0usize), |(sum, n), (_, s)| {
            (sum + s.w / (s.v - u_plus), n + 1)
        });
    if n > 0 {
        sum / n as f64
    } else {
        let s = orbit.last();
        s.w / (s.v - u_plus)
    }
}

/// Lower bound for the bisection: the node threshold and every analytic
/// lower bound that applies to `alpha`.
pub fn lower_bound(problem: &WaveProblem, delta: f64) -> f64 {
    let alpha = problem.alpha();
    let b = problem.bounds_report(alpha, Some(delta));
    let mut lower = b.eps0.unwrap_or(0.0);
    if let Some(c) = b.c_alpha_bound {
        lower = lower.max(c);
    }
    if alpha >= 0.5 {
        lower = lower.max(b.half_alpha_bound);
    }
    if let Some(mu) = b.mu_alpha {
        lower = lower.max(mu);
    }
    lower
}

pub fn eps_min(problem: &WaveProblem, delta: f64, tol: f64) -> Result<BisectionResult> {
    let mut config = ShootConfig::for_problem(problem);
    config.degeneracy_tol = tol;
    eps_min_with(problem, delta, tol, &config, None)
}

/// Bisection on the monotone indicator. `hint`, if given, replaces the
/// default starting point of the upward bracket search.
pub fn eps_min_with(
    problem: &WaveProblem,
    delta: f64,
    tol: f64,
    config: &ShootConfig,
    hint: Option<f64>,
) -> Result<BisectionResult> {
    if !(delta > 0.0) {
        return Err(Error::ZeroDelta(delta));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let alpha = problem.alpha();
    let mut unresolved = 0u32;
    let mut probe = |eps: f64| -> Result<Classification> {
        let c = shoot_with(problem, delta, eps, config)?.classification;
        if c.is_unresolved() && !c.counts_as_monotone() {
            unresolved += 1;
        }
        Ok(c)
    };

    let mut lower = lower_bound(problem, delta);
    let start = match hint {
        Some(h) if h.is_finite() && h > 0.0 => lower.max(h),
        _ => {
            let h = if alpha > 0.5 {
                problem.h_closed_form(alpha)?
            } else {
                0.0
            };
            lower.max(h).max(1.0)
        }
    };

    let mut upper = start;
    let mut entry = probe(upper)?;
    let mut doublings = 0;
    while !entry.counts_as_monotone() {
        if doublings >= MAX_DOUBLINGS {
            return Err(Error::BracketFailure { delta, upper });
        }
        lower = upper;
        upper *= 2.0;
        doublings += 1;
        entry = probe(upper)?;
    }

    let mut iterations = 0u32;
    while upper - lower > tol * upper.max(1.0) {
        let mid = 0.5 * (lower + upper);
        if mid <= lower || mid >= upper {
            break;
        }
        let c = probe(mid)?;
        iterations += 1;
        if c.counts_as_monotone() {
            upper = mid;
            entry = c;
        } else {
            lower = mid;
        }
    }

    Ok(BisectionResult {
        eps_min: upper,
        bracket: (lower, upper),
        iterations,
        entry_at_min: entry,
        unresolved_shots: unresolved,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveOptions {
    pub workers: usize,
    /// Serial sweep seeding each bracket search with the previous result.
    pub warm_start: bool,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            warm_start: false,
        }
    }
}

/// Log- or linearly-spaced grid of `count` points on `[lo, hi]`.
pub fn delta_grid(lo: f64, hi: f64, count: usize, log: bool) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                if i == 0 {
                    lo
                } else if i == n - 1 {
                    hi
                } else if log {
                    (lo.ln() + s * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + s * (hi - lo)
                }
            })
            .collect(),
    }
}

pub fn boundary_curve(
    problem: &WaveProblem,
    delta_grid: &[f64],
    tol: f64,
) -> Result<Vec<CurvePoint>> {
    let mut config = ShootConfig::for_problem(problem);
    config.degeneracy_tol = tol;
    boundary_curve_with(problem, delta_grid, tol, &config, &CurveOptions::default())
}

pub fn boundary_curve_with(
    problem: &WaveProblem,
    delta_grid: &[f64],
    tol: f64,
    config: &ShootConfig,
    options: &CurveOptions,
) -> Result<Vec<CurvePoint>> {
    if delta_grid.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(Error::InvalidArgument("delta grid must be positive".into()));
    }
    if delta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "delta grid must be strictly increasing".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {tol}"
        )));
    }

    let point = |delta: f64, hint: Option<f64>| -> Result<CurvePoint> {
        let eps0 = problem.eps0(delta);
        match eps_min_with(problem, delta, tol, config, hint) {
            Ok(r) => Ok(CurvePoint {
                delta,
                eps_min: r.eps_min,
                eps0,
                entry: r.entry_at_min,
                iterations: r.iterations,
            }),
            Err(Error::BracketFailure { .. }) => Ok(CurvePoint {
                delta,
                eps_min: f64::NAN,
                eps0,
                entry: Classification::Unresolved(UnresolvedReason::BracketFailure),
                iterations: 0,
            }),
            Err(e) => Err(e),
        }
    };

    if options.warm_start {
        let mut out = Vec::with_capacity(delta_grid.len());
        let mut prev: Option<f64> = None;
        for &d in delta_grid {
            let p = point(d, prev)?;
            prev = p.eps_min.is_finite().then_some(p.eps_min);
            out.push(p);
        }
        return Ok(out);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| delta_grid.par_iter().map(|&d| point(d, None)).collect())
}

/// Indices of interior strict local minima of `eps_min` along the sweep.
pub fn local_minima(points: &[CurvePoint]) -> Vec<usize> {
    let finite: Vec<usize> = (0..points.len())
        .filter(|&i| points[i].eps_min.is_finite())
        .collect();
    finite
        .windows(3)
        .filter(|w| {
            let (a, b, c) = (
                points[w[0]].eps_min,
                points[w[1]].eps_min,
                points[w[2]].eps_min,
            );
            b < a && b < c
        })
        .map(|w| w[1])
        .collect()
}

/// CSV with header `delta,eps_min,eps0,entry,iterations`.
pub fn write_curve_csv<W: Write>(points: &[CurvePoint], mut out: W) -> io::Result<()> {
    writeln!(out, "delta,eps_min,eps0,entry,iterations")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.delta, p.eps_min, p.eps0, p.entry, p.iterations
        )?;
    }
    Ok(())
}
