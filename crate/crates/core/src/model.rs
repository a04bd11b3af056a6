//! Problem definition and every closed-form quantity of the travelling-wave
//! problem: wave speed, the reaction term `g`, the node threshold, the
//! linearisation eigenvalues and the analytic lower bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::grid_golden_max;
use crate::poly::Polynomial;

/// Grid size used for convexity validation and for locating `S` and the
/// averaged-integral maximiser.
pub const SEARCH_GRID: usize = 4096;

/// Floor below which `f''` is treated as vanishing.
pub const CONVEXITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum FluxKind {
    /// `f(u) = u^2 / 2`
    Burgers,
    /// Ascending coefficients `c0 + c1 u + c2 u^2 + ...`
    Polynomial(Vec<f64>),
}

/// A strictly convex flux together with its first two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSpec {
    kind: FluxKind,
    f: Polynomial,
    df: Polynomial,
    d2f: Polynomial,
}

impl FluxSpec {
    pub fn burgers() -> Self {
        Self::from_poly(FluxKind::Burgers, Polynomial::new(vec![0.0, 0.0, 0.5]))
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        let f = Polynomial::new(coeffs.clone());
        if !f.is_finite() {
            return Err(Error::InvalidFlux("coefficients must be finite".into()));
        }
        if f.degree() < 2 {
            return Err(Error::InvalidFlux(format!(
                "polynomial flux needs degree >= 2, got degree {}",
                f.degree()
            )));
        }
        Ok(Self::from_poly(FluxKind::Polynomial(coeffs), f))
    }

    fn from_poly(kind: FluxKind, f: Polynomial) -> Self {
        let df = f.derivative();
        let d2f = df.derivative();
        Self { kind, f, df, d2f }
    }

    pub fn kind(&self) -> &FluxKind {
        &self.kind
    }

    pub fn f(&self, u: f64) -> f64 {
        self.f.eval(u)
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        self.df.eval(u)
    }

    pub fn f_second(&self, u: f64) -> f64 {
        self.d2f.eval(u)
    }

    pub(crate) fn poly(&self) -> &Polynomial {
        &self.f
    }
}

/// Validated problem `(f, u_-, u_+, alpha)` with its derived scalars.
///
/// `g` and its antiderivative `G` are stored as polynomials in the shifted
/// variable `x = v - u_+`, so that `g(u_+) = G(u_+) = 0` hold exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProblem {
    flux: FluxSpec,
    u_minus: f64,
    u_plus: f64,
    alpha: f64,
    lambda: f64,
    s: f64,
    g_argmin: f64,
    k: f64,
    g: Polynomial,
    dg: Polynomial,
    big_g: Polynomial,
}

/// Eigen-structure of the two rest points for given `(delta, epsilon)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenData {
    /// Main-direction eigenvalue at `(u_+, 0)`; `None` for a spiral.
    pub chi_plus: Option<f64>,
    /// Side-direction eigenvalue at `(u_+, 0)`; `None` for a spiral.
    pub chi_minus: Option<f64>,
    /// Unstable eigenvalue of the saddle `(u_-, 0)`.
    pub theta_plus: f64,
    pub is_node: bool,
}

/// Analytic bounds and thresholds for one `(alpha, delta)` query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub eps0: Option<f64>,
    pub h_alpha: Option<f64>,
    /// `delta^(1/2 - alpha) C_alpha`, populated for `alpha <= 1/2` with a delta.
    pub c_alpha_bound: Option<f64>,
    /// `max_v (v - u_+)^{-1} int_{u_+}^v |g|`
    pub half_alpha_bound: f64,
    /// `max_z z / (1 + z^2)^alpha`, for `alpha > 1/2`.
    pub a_alpha: Option<f64>,
    pub mu_alpha: Option<f64>,
    pub delta_alpha_lower: Option<f64>,
}

/// Checks the standing assumptions and precomputes `lambda`, `S` and `K`.
pub fn validate_problem(
    flux: FluxSpec,
    u_minus: f64,
    u_plus: f64,
    alpha: f64,
) -> Result<WaveProblem> {
    if !(u_minus.is_finite() && u_plus.is_finite()) || u_minus <= u_plus {
        return Err(Error::BadInterval { u_minus, u_plus });
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::NegativeAlpha(alpha));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "alpha must be finite, got {alpha}"
        )));
    }

    let (at, neg_min) = grid_golden_max(|u| -flux.f_second(u), u_plus, u_minus, SEARCH_GRID);
    if -neg_min <= CONVEXITY_FLOOR {
        return Err(Error::NonConvexFlux {
            lo: u_plus,
            hi: u_minus,
            at,
            value: -neg_min,
        });
    }

    let lambda = (flux.f(u_plus) - flux.f(u_minus)) / (u_plus - u_minus);

    // g(u_+ + x) = f(u_+ + x) - f(u_+) - lambda x
    let mut gc = flux.poly().taylor_shift(u_plus).coeffs().to_vec();
    gc[0] = 0.0;
    gc[1] -= lambda;
    let g = Polynomial::new(gc);
    let dg = g.derivative();
    let big_g = g.integral();

    let width = u_minus - u_plus;
    let (mut x_min, _) = grid_golden_max(|x| -g.eval(x), 0.0, width, SEARCH_GRID);
    // Newton polish on g'(x) = 0; golden section only pins x to sqrt(ulp)
    let ddg = dg.derivative();
    for _ in 0..8 {
        let curv = ddg.eval(x_min);
        if curv == 0.0 {
            break;
        }
        let next = x_min - dg.eval(x_min) / curv;
        if !(next > 0.0 && next < width) || next == x_min {
            break;
        }
        x_min = next;
    }
    let s = -g.eval(x_min);
    let k = -big_g.eval(width);

    if !(s > 0.0) || !(k > 0.0) {
        return Err(Error::NonConvexFlux {
            lo: u_plus,
            hi: u_minus,
            at: u_plus + x_min,
            value: s,
        });
    }

    Ok(WaveProblem {
        flux,
        u_minus,
        u_plus,
        alpha,
        lambda,
        s,
        g_argmin: u_plus + x_min,
        k,
        g,
        dg,
        big_g,
    })
}

impl WaveProblem {
    /// The reference instance: Burgers flux on `[0, 2]`.
    pub fn reference(alpha: f64) -> Result<Self> {
        validate_problem(FluxSpec::burgers(), 2.0, 0.0, alpha)
    }

    /// Same flux and interval with a different diffusion exponent.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::NegativeAlpha(alpha));
        }
        let mut p = self.clone();
        p.alpha = alpha;
        Ok(p)
    }

    pub fn flux(&self) -> &FluxSpec {
        &self.flux
    }
    pub fn u_minus(&self) -> f64 {
        self.u_minus
    }
    pub fn u_plus(&self) -> f64 {
        self.u_plus
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn width(&self) -> f64 {
        self.u_minus - self.u_plus
    }
    /// Rankine-Hugoniot wave speed.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    /// `max (-g)` over the interval.
    pub fn s(&self) -> f64 {
        self.s
    }
    /// Location of the minimum of `g`.
    pub fn g_argmin(&self) -> f64 {
        self.g_argmin
    }
    /// `int |g|` over the interval.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `g(v)` for `v` in `[u_+, u_-]`.
    pub fn g_eval(&self, v: f64) -> Result<f64> {
        if !(v >= self.u_plus && v <= self.u_minus) {
            return Err(Error::OutOfInterval {
                v,
                lo: self.u_plus,
                hi: self.u_minus,
            });
        }
        Ok(self.g(v))
    }

    /// `g(v)` evaluated on the whole real line (the flow can leave the
    /// interval). Exactly zero at both endpoints.
    pub fn g(&self, v: f64) -> f64 {
        if v == self.u_minus {
            return 0.0;
        }
        self.g.eval(v - self.u_plus)
    }

    pub fn g_prime(&self, v: f64) -> f64 {
        self.dg.eval(v - self.u_plus)
    }

    /// `G(v) = int_{u_+}^v g`.
    pub fn big_g(&self, v: f64) -> f64 {
        self.big_g.eval(v - self.u_plus)
    }

    /// Spiral/node threshold at `(u_+, 0)`; independent of alpha.
    pub fn eps0(&self, delta: f64) -> f64 {
        2.0 * delta.sqrt() * (-self.g_prime(self.u_plus)).sqrt()
    }

    pub fn eigen_data(&self, delta: f64, epsilon: f64) -> EigenData {
        let gp_plus = self.g_prime(self.u_plus);
        let gp_minus = self.g_prime(self.u_minus);
        let ratio = epsilon / delta;
        let disc = ratio * ratio + 4.0 * gp_plus / delta;
        let (chi_plus, chi_minus, is_node) = if disc >= 0.0 {
            let root = disc.sqrt();
            (
                Some(0.5 * (-ratio + root)),
                Some(0.5 * (-ratio - root)),
                true,
            )
        } else {
            (None, None, false)
        };
        let theta_plus =
            2.0 * gp_minus / (epsilon + (epsilon * epsilon + 4.0 * delta * gp_minus).sqrt());
        EigenData {
            chi_plus,
            chi_minus,
            theta_plus,
            is_node,
        }
    }

    /// Minimal epsilon for a smooth monotone wave at `delta = 0`,
    /// `alpha >= 1/2`. At `alpha = 1/2` this is the limit value `S`.
    pub fn h_closed_form(&self, alpha: f64) -> Result<f64> {
        if alpha.is_nan() || alpha < 0.5 {
            return Err(Error::AlphaBelowHalf(alpha));
        }
        if alpha == 0.5 {
            return Ok(self.s);
        }
        let m = 2.0 * alpha - 1.0;
        Ok(2f64.powf(alpha) * self.s * (alpha / m).powf(alpha) * m.sqrt())
    }

    /// `max_v (v - u_+)^{-1} int_{u_+}^v |g|`, with its maximiser.
    pub fn averaged_integral_max(&self) -> (f64, f64) {
        let width = self.width();
        // G has no constant term, so G(x) / x is the polynomial with shifted coefficients
        let avg = Polynomial::new(self.big_g.coeffs()[1..].to_vec());
        let f = |x: f64| -avg.eval(x);
        let (mut x, _) = grid_golden_max(f, 0.0, width, SEARCH_GRID);
        if x < width {
            // Newton polish on the stationarity condition x g(x) - G(x) = 0
            for _ in 0..8 {
                let slope = x * self.dg.eval(x);
                if slope == 0.0 {
                    break;
                }
                let step = (x * self.g.eval(x) - self.big_g.eval(x)) / slope;
                let next = x - step;
                if !(next > 0.0 && next < width) {
                    break;
                }
                x = next;
                if step.abs() <= f64::EPSILON * x {
                    break;
                }
            }
        }
        (self.u_plus + x, f(x))
    }

    pub fn bounds_report(&self, alpha: f64, delta: Option<f64>) -> BoundsReport {
        let (_, half_alpha_bound) = self.averaged_integral_max();
        let eps0 = delta.map(|d| self.eps0(d));
        let h_alpha = self.h_closed_form(alpha).ok();
        let c_alpha_bound = match delta {
            Some(d) if alpha <= 0.5 => Some(
                d.powf(0.5 - alpha) * 2f64.powf(alpha - 0.5) * self.k.powf(alpha + 0.5)
                    / self.width(),
            ),
            _ => None,
        };
        let (a_alpha, mu_alpha, delta_alpha_lower) = if alpha > 0.5 {
            let a = response_peak(alpha);
            let mu = half_alpha_bound / a;
            (Some(a), Some(mu), Some(mu * mu / 4.0))
        } else {
            (None, None, None)
        };
        BoundsReport {
            eps0,
            h_alpha,
            c_alpha_bound,
            half_alpha_bound,
            a_alpha,
            mu_alpha,
            delta_alpha_lower,
        }
    }
}

/// Double root `z = -1/sqrt(2 alpha - 1)` of the tangency system.
pub fn tangency_point(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.5 {
        return Err(Error::AlphaBelowHalf(alpha));
    }
    Ok(-1.0 / (2.0 * alpha - 1.0).sqrt())
}

/// `A(alpha) = max_{z > 0} z / (1 + z^2)^alpha` for `alpha > 1/2`.
pub fn response_peak(alpha: f64) -> f64 {
    (2.0 * alpha).powf(-alpha) * (2.0 * alpha - 1.0).powf(alpha - 0.5)
}
