//! Phase-plane integration of the travelling-wave system
//!
//! ```text
//! v' = w
//! w' = (1/delta) [ -epsilon w / (1 + w^2)^alpha + g(v) ]
//! ```
//!
//! using an adaptive Dormand-Prince 5(4) pair with its fourth-order
//! continuous extension. Events are located on the dense output by
//! bisection in time.

use std::fmt;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::WaveProblem;

/// Time resolution of event location.
pub const EVENT_TIME_TOL: f64 = 1e-12;

/// Escape radius, in units of `max(|u_-|, |u_+|, 1)`.
pub const ESCAPE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub v: f64,
    pub w: f64,
}

impl PhaseState {
    pub fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.w.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub t_max: f64,
    /// Capture radius around `(u_+, 0)`.
    pub r_stop: f64,
    pub min_step: f64,
}

impl IntegratorConfig {
    pub fn for_problem(problem: &WaveProblem) -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 2_000_000,
            t_max: 1e5,
            r_stop: 1e-6 * problem.width(),
            min_step: 1e-13,
        }
    }

    pub fn validate(&self, problem: &WaveProblem) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("t_max", self.t_max),
            ("r_stop", self.r_stop),
            ("min_step", self.min_step),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        if self.r_stop >= problem.width() / 100.0 {
            return Err(Error::InvalidConfig(format!(
                "r_stop = {} must be below (u_minus - u_plus)/100",
                self.r_stop
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    CrossedVplus,
    CrossedWzero,
    EnteredCaptureBall,
    Escaped,
    StepFloor,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::CrossedVplus => "crossed_vplus",
            EventKind::CrossedWzero => "crossed_wzero",
            EventKind::EnteredCaptureBall => "entered_capture_ball",
            EventKind::Escaped => "escaped",
            EventKind::StepFloor => "step_floor",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub state: PhaseState,
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Event(EventKind),
    /// Started on a rest point.
    Equilibrium,
    TimeLimit,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub samples: Vec<(f64, PhaseState)>,
    pub events: Vec<Event>,
    pub termination: Termination,
}

impl Orbit {
    pub fn last(&self) -> PhaseState {
        self.samples
            .last()
            .map(|s| s.1)
            .expect("orbit has at least one sample")
    }

    pub fn max_w(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.1.w)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_w(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.1.w)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn first_event(&self, kind: EventKind) -> Option<&Event> {
        self.events.iter().find(|e| e.kind == kind)
    }

    /// `w` as a function of `v` by linear interpolation, valid on the part of
    /// the orbit where `v` is decreasing. `None` outside the sampled range.
    pub fn w_at_v(&self, v: f64) -> Option<f64> {
        self.samples.windows(2).find_map(|pair| {
            let (a, b) = (pair[0].1, pair[1].1);
            if a.v >= v && v >= b.v && a.v > b.v {
                let s = (a.v - v) / (a.v - b.v);
                Some(a.w + s * (b.w - a.w))
            } else {
                None
            }
        })
    }

    /// CSV with header `t,v,w` and a commented event footer.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,v,w")?;
        for (t, s) in &self.samples {
            writeln!(out, "{},{},{}", t, s.v, s.w)?;
        }
        for e in &self.events {
            writeln!(
                out,
                "# event,{},{},{},{}",
                e.kind, e.t, e.state.v, e.state.w
            )?;
        }
        Ok(())
    }
}

/// Right-hand side of the first-order system.
pub fn vector_field(
    problem: &WaveProblem,
    delta: f64,
    epsilon: f64,
    state: PhaseState,
) -> Result<(f64, f64)> {
    if !(delta > 0.0) {
        return Err(Error::ZeroDelta(delta));
    }
    Ok(rhs(problem, delta, epsilon, state))
}

#[inline]
fn rhs(problem: &WaveProblem, delta: f64, epsilon: f64, s: PhaseState) -> (f64, f64) {
    let alpha = problem.alpha();
    let w2 = 1.0 + s.w * s.w;
    let response = if alpha == 0.0 {
        s.w
    } else if alpha == 0.5 {
        s.w / w2.sqrt()
    } else if alpha == 1.0 {
        s.w / w2
    } else {
        s.w / w2.powf(alpha)
    };
    (s.w, (-epsilon * response + problem.g(s.v)) / delta)
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type Vec2 = [f64; 2];

#[inline]
fn axpy(y: Vec2, terms: &[(f64, Vec2)], h: f64) -> Vec2 {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Continuous extension over one accepted step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DenseStep {
    t0: f64,
    h: f64,
    r: [Vec2; 5],
}

impl DenseStep {
    pub(crate) fn eval(&self, t: f64) -> PhaseState {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.r;
        let c =
            |i: usize| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        PhaseState::new(c(0), c(1))
    }
}

struct Stepper<'a> {
    problem: &'a WaveProblem,
    delta: f64,
    epsilon: f64,
    fevals: usize,
}

impl Stepper<'_> {
    fn f(&mut self, y: Vec2) -> Vec2 {
        self.fevals += 1;
        let (a, b) = rhs(
            self.problem,
            self.delta,
            self.epsilon,
            PhaseState::new(y[0], y[1]),
        );
        [a, b]
    }

    /// One trial step; returns `(y_new, k7, error_norm, dense)`.
    fn step(
        &mut self,
        t: f64,
        y: Vec2,
        k1: Vec2,
        h: f64,
        cfg: &IntegratorConfig,
    ) -> (Vec2, Vec2, f64, DenseStep) {
        let k2 = self.f(axpy(y, &[(A21, k1)], h));
        let k3 = self.f(axpy(y, &[(A31, k1), (A32, k2)], h));
        let k4 = self.f(axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
        let k5 = self.f(axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h));
        let k6 = self.f(axpy(
            y,
            &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
            h,
        ));
        let y_new = axpy(
            y,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
            h,
        );
        let k7 = self.f(y_new);

        let mut err = 0.0;
        for i in 0..2 {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / 2.0).sqrt();

        let mut r = [[0.0; 2]; 5];
        for i in 0..2 {
            let dy = y_new[i] - y[i];
            let bspl = h * k1[i] - dy;
            r[0][i] = y[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h * k7[i] - bspl;
            r[4][i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        (y_new, k7, err, DenseStep { t0: t, h, r })
    }
}

fn initial_step(stepper: &mut Stepper<'_>, y: Vec2, k1: Vec2, cfg: &IntegratorConfig) -> f64 {
    let sc = |i: usize| cfg.abs_tol + cfg.rel_tol * y[i].abs();
    let d0 = ((y[0] / sc(0)).powi(2) + (y[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
    let d1 = ((k1[0] / sc(0)).powi(2) + (k1[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = axpy(y, &[(1.0, k1)], h0);
    let k2 = stepper.f(y1);
    let d2 = (((k2[0] - k1[0]) / sc(0)).powi(2) + ((k2[1] - k1[1]) / sc(1)).powi(2)).sqrt()
        / 2f64.sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).max(cfg.min_step)
}

/// Event functions, each crossing zero from above to trigger.
struct Detector {
    u_plus: f64,
    abs_tol: f64,
    r_stop: f64,
    escape: f64,
}

impl Detector {
    fn value(&self, kind: EventKind, s: PhaseState) -> f64 {
        match kind {
            EventKind::CrossedVplus => s.v - self.u_plus,
            EventKind::CrossedWzero => -s.w,
            EventKind::EnteredCaptureBall => (s.v - self.u_plus).hypot(s.w) - self.r_stop,
            EventKind::Escaped => self.escape - s.v.abs().max(s.w.abs()),
            EventKind::StepFloor => 1.0,
        }
    }

    fn triggered(&self, kind: EventKind, before: PhaseState, after: PhaseState) -> bool {
        let armed = self.value(kind, before) > 0.0 && self.value(kind, after) <= 0.0;
        match kind {
            EventKind::CrossedWzero => armed && after.v > self.u_plus + self.abs_tol,
            _ => armed,
        }
    }
}

const WATCHED: [EventKind; 4] = [
    EventKind::CrossedVplus,
    EventKind::CrossedWzero,
    EventKind::EnteredCaptureBall,
    EventKind::Escaped,
];

fn locate(
    det: &Detector,
    kind: EventKind,
    dense: &DenseStep,
    t0: f64,
    t1: f64,
) -> Option<(f64, PhaseState)> {
    // Sign change may be internal to the step even if the endpoints do not
    // show it (e.g. a grazing capture); sample the dense output coarsely.
    const PROBES: usize = 8;
    let mut a = t0;
    let mut sa = dense.eval(t0);
    let mut bracket = None;
    for i in 1..=PROBES {
        let b = if i == PROBES {
            t1
        } else {
            t0 + (t1 - t0) * i as f64 / PROBES as f64
        };
        let sb = dense.eval(b);
        if det.value(kind, sa) > 0.0 && det.value(kind, sb) <= 0.0 {
            bracket = Some((a, b));
            break;
        }
        a = b;
        sa = sb;
    }
    let (mut lo, mut hi) = bracket?;
    for _ in 0..200 {
        if hi - lo <= EVENT_TIME_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if det.value(kind, dense.eval(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = dense.eval(hi);
    if kind == EventKind::CrossedWzero && s.v <= det.u_plus + det.abs_tol {
        return None;
    }
    Some((hi, s))
}

/// Integrates from `start` until the first terminal event.
pub fn integrate(
    problem: &WaveProblem,
    delta: f64,
    epsilon: f64,
    start: PhaseState,
    config: &IntegratorConfig,
) -> Result<Orbit> {
    if !(delta > 0.0) {
        return Err(Error::ZeroDelta(delta));
    }
    config.validate(problem)?;
    if !start.is_finite() {
        return Err(Error::NonFiniteState {
            t: 0.0,
            v: start.v,
            w: start.w,
        });
    }

    let mut stepper = Stepper {
        problem,
        delta,
        epsilon,
        fevals: 0,
    };
    let scale = problem.u_minus().abs().max(problem.u_plus().abs()).max(1.0);
    let det = Detector {
        u_plus: problem.u_plus(),
        abs_tol: config.abs_tol,
        r_stop: config.r_stop,
        escape: ESCAPE_FACTOR * scale,
    };

    let mut t = 0.0;
    let mut y = [start.v, start.w];
    let mut k1 = stepper.f(y);
    let mut samples = vec![(t, start)];
    if k1 == [0.0, 0.0] {
        return Ok(Orbit {
            samples,
            events: Vec::new(),
            termination: Termination::Equilibrium,
        });
    }

    let mut h = initial_step(&mut stepper, y, k1, config);
    let mut steps = 0usize;
    let mut rejected_last = false;

    loop {
        if steps >= config.max_steps {
            return Ok(Orbit {
                samples,
                events: Vec::new(),
                termination: Termination::StepLimit,
            });
        }
        if t >= config.t_max {
            return Ok(Orbit {
                samples,
                events: Vec::new(),
                termination: Termination::TimeLimit,
            });
        }
        if h < config.min_step {
            let s = PhaseState::new(y[0], y[1]);
            let ev = Event {
                kind: EventKind::StepFloor,
                t,
                state: s,
            };
            return Ok(Orbit {
                samples,
                events: vec![ev],
                termination: Termination::Event(EventKind::StepFloor),
            });
        }
        let h_try = h.min(config.t_max - t).max(config.min_step);
        steps += 1;
        let (y_new, k7, err, dense) = stepper.step(t, y, k1, h_try, config);
        if !(y_new[0].is_finite() && y_new[1].is_finite()) || !err.is_finite() {
            if h_try <= config.min_step {
                return Err(Error::NonFiniteState {
                    t: t + h_try,
                    v: y_new[0],
                    w: y_new[1],
                });
            }
            h = 0.25 * h_try;
            rejected_last = true;
            continue;
        }
        if err > 1.0 {
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h = h_try * factor;
            rejected_last = true;
            continue;
        }

        let t_new = t + h_try;
        let before = PhaseState::new(y[0], y[1]);
        let after = PhaseState::new(y_new[0], y_new[1]);

        // earliest event inside the step
        let mut hit: Option<Event> = None;
        for kind in WATCHED {
            let grazing = kind == EventKind::EnteredCaptureBall;
            if !grazing && !det.triggered(kind, before, after) {
                continue;
            }
            if let Some((te, se)) = locate(&det, kind, &dense, t, t_new) {
                if hit.is_none_or(|e| te < e.t) {
                    hit = Some(Event {
                        kind,
                        t: te,
                        state: se,
                    });
                }
            }
        }
        if let Some(ev) = hit {
            if ev.t > samples.last().map_or(f64::NEG_INFINITY, |s| s.0) {
                samples.push((ev.t, ev.state));
            }
            return Ok(Orbit {
                samples,
                events: vec![ev],
                termination: Termination::Event(ev.kind),
            });
        }

        t = t_new;
        y = y_new;
        k1 = k7;
        samples.push((t, after));

        let mut factor = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        if rejected_last {
            factor = factor.min(1.0);
        }
        rejected_last = false;
        h = h_try * factor;
    }
}

#[cfg(test)]
pub(crate) fn dense_step_for_test(t0: f64, h: f64, r: [[f64; 2]; 5]) -> DenseStep {
    DenseStep { t0, h, r }
}
