//! Acceptance suite for the reference instance (Burgers flux on [0, 2]).
//!
//! Runs every criterion at its pinned tolerance and runtime budget, prints
//! one line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rosenau_waves::model::WaveProblem;
use rosenau_waves::shooting::{boundary_curve, delta_grid, eps_min, shoot, Classification};
use rosenau_waves::singular::{eps_star, hadeler_rothe, z0_profile};

const TOL: f64 = 1e-6;

type Check = Result<String, String>;

/// Id, name, runtime budget in seconds, check.
type Criterion = (u32, &'static str, u64, fn() -> Check);

fn problem(alpha: f64) -> WaveProblem {
    WaveProblem::reference(alpha).expect("reference instance")
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn eps_min_of(alpha: f64, delta: f64) -> Result<rosenau_waves::BisectionResult, String> {
    eps_min(&problem(alpha), delta, TOL).map_err(|e| e.to_string())
}

fn kpp_recovery() -> Check {
    let mut worst: f64 = 0.0;
    for delta in [0.1, 1.0, 10.0] {
        let r = eps_min_of(0.0, delta)?;
        worst = worst.max((r.eps_min / (2.0 * delta.sqrt()) - 1.0).abs());
    }
    ensure(worst <= 1e-3, format!("max relative error {worst:.3e}"))
}

fn closed_form_vs_min_max() -> Check {
    let mut worst: f64 = 0.0;
    for alpha in [0.6, 0.75, 1.0, 1.5, 3.0] {
        let p = problem(alpha);
        let (_, hr) = hadeler_rothe(&p, alpha).map_err(|e| e.to_string())?;
        let h = p.h_closed_form(alpha).map_err(|e| e.to_string())?;
        worst = worst.max((hr - h).abs());
    }
    ensure(worst < 1e-8, format!("max |difference| {worst:.3e}"))
}

fn small_delta_limit() -> Check {
    let e = eps_min_of(1.0, 1e-3)?.eps_min;
    ensure(
        (e - 1.0).abs() <= 0.03,
        format!("eps_min(1, 1e-3) = {e:.6}"),
    )
}

fn nonexistence_below_h() -> Check {
    let c = shoot(&problem(1.0), 1e-4, 0.9)
        .map_err(|e| e.to_string())?
        .classification;
    ensure(
        matches!(c, Classification::NonMonotone { .. }),
        format!("classification {c}"),
    )
}

fn dip_below_h() -> Check {
    let grid = delta_grid(1e-3, 5.0, 30, true);
    let pts = boundary_curve(&problem(1.0), &grid, TOL).map_err(|e| e.to_string())?;
    let best = pts
        .iter()
        .filter(|p| p.eps_min.is_finite())
        .min_by(|a, b| a.eps_min.total_cmp(&b.eps_min))
        .ok_or("no finite points")?;
    let failures = pts.iter().filter(|p| !p.eps_min.is_finite()).count();
    ensure(
        failures == 0 && (0.75..=0.85).contains(&best.eps_min),
        format!(
            "min eps_min {:.6} at delta {:.4e}, bracket failures {failures}",
            best.eps_min, best.delta
        ),
    )
}

fn half_alpha_boundary() -> Check {
    let grid = delta_grid(1e-4, 10.0, 20, true);
    let pts = boundary_curve(&problem(0.5), &grid, TOL).map_err(|e| e.to_string())?;
    let nondecreasing = pts
        .windows(2)
        .all(|w| w[1].eps_min >= w[0].eps_min - TOL * w[0].eps_min.max(1.0));
    let floor = pts.iter().all(|p| p.eps_min >= 0.375 - TOL);
    let first = pts[0].eps_min;
    let near = (first / 0.375 - 1.0).abs() <= 0.05;
    ensure(
        nondecreasing && floor && near,
        format!("nondecreasing {nondecreasing}, all >= 3/8 {floor}, eps_min(1e-4) = {first:.6}"),
    )
}

fn alpha_monotonicity() -> Check {
    let mut values = Vec::new();
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        values.push(eps_min_of(alpha, 0.05)?.eps_min);
    }
    let ok = values.windows(2).all(|w| w[0] <= w[1] + 2.0 * TOL);
    ensure(ok, format!("eps_min(alpha, 0.05) = {values:.6?}"))
}

fn large_delta_linear() -> Check {
    let p = problem(1.0);
    let e = eps_min_of(1.0, 50.0)?.eps_min;
    let e0 = p.eps0(50.0);
    let rel = (e - e0).abs() / e0;
    ensure(
        rel <= 1e-3,
        format!("eps_min {e:.9}, eps0 {e0:.9}, relative gap {rel:.3e}"),
    )
}

fn singular_profile() -> Check {
    let p = problem(0.5);
    let star = eps_star(&p);
    let prof = z0_profile(&p, 0.375, 2048).map_err(|e| e.to_string())?;
    let target = (1.0f64 / 6.0).sqrt();
    let delta = 1e-4;
    let e = eps_min_of(0.5, delta)?.eps_min;
    let orbit = shoot(&p, delta, e).map_err(|e| e.to_string())?.orbit;
    let predicted = -target / delta.sqrt();
    let rel = (orbit.min_w() / predicted - 1.0).abs();
    ensure(
        (star - 0.375).abs() <= 1e-10 && (prof.z0_max - target).abs() <= 1e-12 && rel <= 0.02,
        format!(
            "eps_star {star}, max Z0 {:.15}, min w {:.4} vs {predicted:.4} ({:.2}%)",
            prof.z0_max,
            orbit.min_w(),
            100.0 * rel
        ),
    )
}

fn entry_switch() -> Check {
    let p = problem(1.0);
    let r = eps_min_of(1.0, 0.5)?;
    let above = shoot(&p, 0.5, r.eps_min + 10.0 * TOL)
        .map_err(|e| e.to_string())?
        .classification;
    ensure(
        r.entry_at_min == Classification::MonotoneViaSide
            && above == Classification::MonotoneViaMain,
        format!(
            "eps_min {:.9} (eps0 {:.9}), entry_at_min {}, at +10 tol {above}",
            r.eps_min,
            p.eps0(0.5),
            r.entry_at_min
        ),
    )
}

fn lower_bounds() -> Check {
    for alpha in [0.1, 0.3, 0.5] {
        let p = problem(alpha);
        for delta in [0.01, 0.1] {
            let e = eps_min_of(alpha, delta)?.eps_min;
            let c = p
                .bounds_report(alpha, Some(delta))
                .c_alpha_bound
                .ok_or("missing C_alpha bound")?;
            if e < c {
                return Err(format!(
                    "alpha {alpha}, delta {delta}: eps_min {e} < bound {c}"
                ));
            }
        }
    }
    // smallest delta on a fine grid where the boundary has met eps0
    let p = problem(1.0);
    let lower = p
        .bounds_report(1.0, None)
        .delta_alpha_lower
        .ok_or("missing delta_alpha")?;
    let grid = delta_grid(1e-2, 5.0, 60, true);
    let pts = boundary_curve(&p, &grid, TOL).map_err(|e| e.to_string())?;
    let meet = pts
        .iter()
        .find(|q| (q.eps_min - q.eps0).abs() <= TOL * q.eps0.max(1.0))
        .ok_or("boundary never meets eps0 on the grid")?;
    ensure(
        lower <= meet.delta,
        format!(
            "C_alpha bounds hold; delta_1 lower {lower:.6} <= first linear point {:.6}",
            meet.delta
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "KPP recovery", 30, kpp_recovery),
        (
            2,
            "closed form vs min-max oracle",
            1,
            closed_form_vs_min_max,
        ),
        (3, "small-delta limit at alpha = 1", 60, small_delta_limit),
        (4, "nonexistence below H", 5, nonexistence_below_h),
        (5, "dip below H", 600, dip_below_h),
        (6, "alpha = 1/2 boundary", 600, half_alpha_boundary),
        (7, "alpha monotonicity", 300, alpha_monotonicity),
        (8, "large-delta linear determinacy", 120, large_delta_linear),
        (9, "singular-profile consistency", 120, singular_profile),
        (10, "entry-direction switch", 60, entry_switch),
        (11, "lower bounds never violated", 600, lower_bounds),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (pass, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name}: {detail} ({:.2} s of {budget} s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
