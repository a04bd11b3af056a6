//! Command-line front end.
//!
//! Scalar results go to stdout as one JSON object; CSV artefacts are
//! written atomically. Exit status: 0 success, 1 domain error, 2 usage or
//! precondition error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::Error;
use crate::model::{tangency_point, validate_problem, FluxSpec, WaveProblem};
use crate::ode::Termination;
use crate::shooting::{
    boundary_curve_with, delta_grid, eps_min_with, local_minima, shoot_with, write_curve_csv,
    Classification, CurveOptions, ShootConfig,
};
use crate::singular::{
    branch_sweep, eps_star_point, hadeler_rothe, write_branch_csv, z0_profile, DEFAULT_PROFILE_GRID,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "rosenau",
    version,
    about = "Monotone travelling waves of the generalised Rosenau-KdV equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wave speed, thresholds, H(alpha), tangency point and analytic bounds
    ClosedForm {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
    },
    /// Single shot from the saddle
    Shoot {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, allow_hyphen_values = true)]
        epsilon: f64,
        /// Launch offset relative to u_minus - u_plus
        #[arg(long, default_value_t = crate::shooting::LAUNCH_OFFSET_REL, allow_hyphen_values = true)]
        offset: f64,
        /// Write the orbit as CSV
        #[arg(long)]
        orbit_csv: Option<PathBuf>,
    },
    /// Minimal epsilon at one delta
    Epsmin {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, default_value_t = 1e-6, allow_hyphen_values = true)]
        tol: f64,
    },
    /// Sweep of eps_min over a delta grid
    Curve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true)]
        delta_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta_max: f64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Linear rather than logarithmic spacing
        #[arg(long)]
        linear: bool,
        #[arg(long, default_value_t = 1e-6, allow_hyphen_values = true)]
        tol: f64,
        /// Serial sweep seeding each bracket with the previous point
        #[arg(long)]
        warm_start: bool,
        #[arg(long, env = "ROSENAU_WORKERS")]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Z0 profile, eps_star and the delta = 0 branch set
    Singular {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Defaults to eps_star
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_PROFILE_GRID)]
        n_grid: usize,
        #[arg(long)]
        profile_csv: Option<PathBuf>,
        #[arg(long)]
        branch_csv: Option<PathBuf>,
    },
    /// Hadeler-Rothe min-max value
    Hr {
        #[command(flatten)]
        problem: ProblemArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FluxArg {
    Burgers,
    Poly,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long, value_enum, default_value_t = FluxArg::Burgers)]
    pub flux: FluxArg,
    /// Ascending polynomial coefficients, for `--flux poly`
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Vec<f64>,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub u_minus: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub u_plus: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
}

/// Failure split by exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = std::result::Result<Value, Failure>;

fn usage(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("--{flag}: {msg}"))
}

fn require(ok: bool, flag: &str, msg: &str) -> std::result::Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(usage(flag, msg))
    }
}

fn positive(x: f64, flag: &str) -> std::result::Result<(), Failure> {
    require(
        x.is_finite() && x > 0.0,
        flag,
        "must be a finite positive number",
    )
}

impl ProblemArgs {
    fn build(&self) -> std::result::Result<WaveProblem, Failure> {
        require(
            self.alpha.is_finite() && self.alpha >= 0.0,
            "alpha",
            "must be non-negative",
        )?;
        require(self.u_minus.is_finite(), "u-minus", "must be finite")?;
        require(self.u_plus.is_finite(), "u-plus", "must be finite")?;
        require(
            self.u_minus > self.u_plus,
            "u-minus",
            "must exceed --u-plus",
        )?;
        let flux = match self.flux {
            FluxArg::Burgers => {
                require(
                    self.coeffs.is_empty(),
                    "coeffs",
                    "only valid with --flux poly",
                )?;
                FluxSpec::burgers()
            }
            FluxArg::Poly => {
                require(
                    !self.coeffs.is_empty(),
                    "coeffs",
                    "required with --flux poly",
                )?;
                FluxSpec::polynomial(self.coeffs.clone())?
            }
        };
        Ok(validate_problem(
            flux,
            self.u_minus,
            self.u_plus,
            self.alpha,
        )?)
    }
}

/// Parses `args` (including the program name), runs, and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(value) => {
            let text = serde_json::to_string_pretty(&value).expect("json values always serialise");
            let mut out = std::io::stdout().lock();
            if writeln!(out, "{text}").is_err() {
                return EXIT_DOMAIN;
            }
            EXIT_OK
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn execute(cmd: &Command) -> Outcome {
    match cmd {
        Command::ClosedForm { problem, delta } => closed_form(problem, *delta),
        Command::Shoot {
            problem,
            delta,
            epsilon,
            offset,
            orbit_csv,
        } => shoot_cmd(problem, *delta, *epsilon, *offset, orbit_csv.as_deref()),
        Command::Epsmin {
            problem,
            delta,
            tol,
        } => epsmin_cmd(problem, *delta, *tol),
        Command::Curve {
            problem,
            delta_min,
            delta_max,
            count,
            linear,
            tol,
            warm_start,
            workers,
            out,
        } => {
            let p = problem.build()?;
            positive(*delta_min, "delta-min")?;
            positive(*delta_max, "delta-max")?;
            require(
                delta_max > delta_min || (*count == 1 && delta_max == delta_min),
                "delta-max",
                "must exceed --delta-min",
            )?;
            require(*count >= 1, "count", "must be at least 1")?;
            positive(*tol, "tol")?;
            if let Some(w) = workers {
                require(*w >= 1, "workers", "must be at least 1")?;
            }
            let grid = delta_grid(*delta_min, *delta_max, *count, !linear);
            let mut cfg = ShootConfig::for_problem(&p);
            cfg.degeneracy_tol = *tol;
            let options = CurveOptions {
                workers: workers.unwrap_or_else(|| CurveOptions::default().workers),
                warm_start: *warm_start,
            };
            let points = boundary_curve_with(&p, &grid, *tol, &cfg, &options)?;
            let mut buf = Vec::new();
            write_curve_csv(&points, &mut buf).expect("writing to memory");
            write_atomic(out, &buf)?;
            let minima: Vec<Value> = local_minima(&points)
                .into_iter()
                .map(|i| json!({ "delta": points[i].delta, "eps_min": points[i].eps_min }))
                .collect();
            let failures = points.iter().filter(|p| !p.eps_min.is_finite()).count();
            let lowest = points
                .iter()
                .filter(|p| p.eps_min.is_finite())
                .min_by(|a, b| a.eps_min.total_cmp(&b.eps_min))
                .map(|p| json!({ "delta": p.delta, "eps_min": p.eps_min }));
            Ok(json!({
                "points": points.len(),
                "bracket_failures": failures,
                "minimum": lowest,
                "local_minima": minima,
                "out": out.display().to_string(),
            }))
        }
        Command::Singular {
            problem,
            epsilon,
            n_grid,
            profile_csv,
            branch_csv,
        } => singular_cmd(
            problem,
            *epsilon,
            *n_grid,
            profile_csv.as_deref(),
            branch_csv.as_deref(),
        ),
        Command::Hr { problem } => {
            let p = problem.build()?;
            require(p.alpha() > 0.5, "alpha", "must exceed 1/2")?;
            let (a_star, value) = hadeler_rothe(&p, p.alpha())?;
            let closed = p.h_closed_form(p.alpha())?;
            Ok(json!({
                "alpha": p.alpha(),
                "a_star": a_star,
                "value": value,
                "h_alpha": closed,
                "difference": (value - closed).abs(),
            }))
        }
    }
}

fn closed_form(args: &ProblemArgs, delta: Option<f64>) -> Outcome {
    let p = args.build()?;
    if let Some(d) = delta {
        positive(d, "delta")?;
    }
    let alpha = p.alpha();
    let (star_v, star) = eps_star_point(&p);
    let bounds = p.bounds_report(alpha, delta);
    let eigen = delta.map(|d| {
        let eps = bounds.eps0.unwrap_or(0.0);
        p.eigen_data(d, eps)
    });
    Ok(json!({
        "alpha": alpha,
        "lambda": p.lambda(),
        "s": p.s(),
        "g_argmin": p.g_argmin(),
        "k": p.k(),
        "eps0": bounds.eps0,
        "h_alpha": bounds.h_alpha,
        "tangency": tangency_point(alpha).ok(),
        "eps_star": star,
        "eps_star_v": star_v,
        "eigen_at_eps0": eigen,
        "bounds": bounds,
    }))
}

fn classification_json(c: &Classification) -> Value {
    let mut v = json!({ "classification": c.as_str() });
    match c {
        Classification::NonMonotone { crossings } => v["crossings"] = json!(crossings),
        Classification::Unresolved(r) => v["reason"] = json!(r.as_str()),
        _ => {}
    }
    v
}

fn termination_str(t: &Termination) -> String {
    match t {
        Termination::Event(k) => k.as_str().to_string(),
        Termination::Equilibrium => "equilibrium".into(),
        Termination::TimeLimit => "time_limit".into(),
        Termination::StepLimit => "step_limit".into(),
    }
}

fn shoot_cmd(
    args: &ProblemArgs,
    delta: f64,
    epsilon: f64,
    offset: f64,
    orbit_csv: Option<&Path>,
) -> Outcome {
    let p = args.build()?;
    positive(delta, "delta")?;
    require(
        epsilon.is_finite() && epsilon >= 0.0,
        "epsilon",
        "must be non-negative",
    )?;
    require(
        (0.0..0.01).contains(&offset),
        "offset",
        "must lie in [0, 0.01)",
    )?;
    let mut cfg = ShootConfig::for_problem(&p);
    cfg.launch_offset = offset * p.width();
    let r = shoot_with(&p, delta, epsilon, &cfg)?;
    if let Some(path) = orbit_csv {
        let mut buf = Vec::new();
        r.orbit.write_csv(&mut buf).expect("writing to memory");
        write_atomic(path, &buf)?;
    }
    let events: Vec<Value> = r
        .orbit
        .events
        .iter()
        .map(|e| json!({ "kind": e.kind.as_str(), "t": e.t, "v": e.state.v, "w": e.state.w }))
        .collect();
    let mut out = classification_json(&r.classification);
    out["alpha"] = json!(p.alpha());
    out["delta"] = json!(delta);
    out["epsilon"] = json!(epsilon);
    out["eps0"] = json!(p.eps0(delta));
    out["entry_slope"] = json!(r.entry_slope);
    out["termination"] = json!(termination_str(&r.orbit.termination));
    out["events"] = json!(events);
    out["samples"] = json!(r.orbit.samples.len());
    out["min_w"] = json!(r.orbit.min_w());
    out["max_w"] = json!(r.orbit.max_w());
    out["final_state"] = json!(r.orbit.last());
    Ok(out)
}

fn epsmin_cmd(args: &ProblemArgs, delta: f64, tol: f64) -> Outcome {
    let p = args.build()?;
    positive(delta, "delta")?;
    positive(tol, "tol")?;
    require(tol < 1.0, "tol", "must be below 1")?;
    let mut cfg = ShootConfig::for_problem(&p);
    cfg.degeneracy_tol = tol;
    let r = eps_min_with(&p, delta, tol, &cfg, None)?;
    let entry = classification_json(&r.entry_at_min);
    Ok(json!({
        "alpha": p.alpha(),
        "delta": delta,
        "tol": tol,
        "eps_min": r.eps_min,
        "bracket": [r.bracket.0, r.bracket.1],
        "iterations": r.iterations,
        "entry_at_min": entry,
        "unresolved_shots": r.unresolved_shots,
        "eps0": p.eps0(delta),
    }))
}

fn singular_cmd(
    args: &ProblemArgs,
    epsilon: Option<f64>,
    n_grid: usize,
    profile_csv: Option<&Path>,
    branch_csv: Option<&Path>,
) -> Outcome {
    let p = args.build()?;
    require(n_grid >= 2, "n-grid", "must be at least 2")?;
    let (star_v, star) = eps_star_point(&p);
    let eps = epsilon.unwrap_or(star);
    require(eps.is_finite() && eps > 0.0, "epsilon", "must be positive")?;
    if eps < star - 1e-12 * star.max(1.0) {
        return Err(usage(
            "epsilon",
            format!("must be at least eps_star = {star}"),
        ));
    }
    let prof = z0_profile(&p, eps, n_grid)?;
    let branches = branch_sweep(&p, p.alpha(), eps, n_grid)?;
    if let Some(path) = profile_csv {
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).expect("writing to memory");
        write_atomic(path, &buf)?;
    }
    if let Some(path) = branch_csv {
        let mut buf = Vec::new();
        write_branch_csv(&branches, &mut buf).expect("writing to memory");
        write_atomic(path, &buf)?;
    }
    let gaps = branches.iter().filter(|b| b.w_plus.is_none()).count();
    Ok(json!({
        "alpha": p.alpha(),
        "epsilon": eps,
        "eps_star": star,
        "eps_star_v": star_v,
        "z0_max": prof.z0_max,
        "z0_argmax": prof.z0_argmax,
        "z0_end": prof.z0.last(),
        "branch_points": branches.len(),
        "branch_points_without_root": gaps,
    }))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::result::Result<(), Failure> {
    let io_err = |e: std::io::Error| {
        Failure::Domain(Error::InvalidArgument(format!("{}: {e}", path.display())))
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
