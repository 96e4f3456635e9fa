//! End-to-end verification suites behind `fbmin verify`.

use std::time::Instant;

use anyhow::Result;
use fbmin::capmetric::{fibonacci_sphere, metric_at, ricci_at, AnalyticField, CapMetric, ConformalMetric};
use fbmin::degree::{assemble_degree, morse_euler_oracle};
use fbmin::jacobi::{
    conformal_h_variation, kernel_bases, mode_bvp_determinant, normal_perturbation_fd_check, riccati_bound_at,
    surface_mean_curvature, CylinderGrid, Grid, KERNEL_DET_TOL,
};
use fbmin::rotprofile::{max_mean_curvature, solve_critical_catenoid, solve_t0, sweep, SolverOptions};
use fbmin::scalar::{Jet, Scalar};
use fbmin::spectrum::{nullity_and_index_with, semicontinuity_probe, ProbeOptions};
use fbmin::{Manifold, SurfaceKind, Topology, Vec3};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::Config;
use crate::manifest::Recorder;
use crate::{Suite, EXIT_FAILED, EXIT_OK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub suite: Suite,
    pub passed: bool,
    pub results: Vec<CheckResult>,
}

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

struct Ctx<'a> {
    cfg: &'a Config,
    full: bool,
    t0: f64,
    r0: f64,
}

fn constants_fixed_point(c: &Ctx) -> Outcome {
    let res = c.t0 - 1.0 / c.t0.tanh();
    ensure!(res.abs() < 1e-12, "t0 − coth t0 = {res:e}");
    ensure!(c.t0 > 1.19 && c.t0 < 1.21, "t0 = {} outside (1.19, 1.21)", c.t0);
    Ok(format!("t0 = {:.15}", c.t0))
}

fn constants_ordering(c: &Ctx) -> Outcome {
    let r0 = c.t0 * c.t0.cosh();
    ensure!((r0 - c.r0).abs() < 1e-12 * r0, "r0 = {} but t0 cosh t0 = {r0}", c.r0);
    ensure!(c.r0 > c.t0 && c.t0 > 1.0, "r0 > t0 > 1 fails");
    Ok(format!("r0 = {:.15}", c.r0))
}

fn constants_bisection(c: &Ctx) -> Outcome {
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.tanh() < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ensure!((lo - c.t0).abs() < 1e-12, "bisection gives {lo}, solver {}", c.t0);
    Ok("agrees to 1e-12".into())
}

fn riccati(c: &Ctx) -> Outcome {
    let b = riccati_bound_at(c.t0);
    ensure!(b.margin > 0.4, "margin {}", b.margin);
    Ok(format!("margin {:.6}", b.margin))
}

fn metric_einstein(_: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    for t in [0.2, 0.5, 0.8] {
        for (i, d) in fibonacci_sphere(100).iter().enumerate() {
            let x = d * (0.05 + 0.9 * i as f64 / 100.0);
            let g = metric_at(t, &x).map_err(e2s)?;
            let ric = ricci_at(t, &x).map_err(e2s)?;
            worst = worst.max((ric - 2.0 * t * t * g).abs().max());
        }
    }
    ensure!(worst < 1e-6, "|Ric − 2t²g| = {worst:e}");
    Ok(format!("max deviation {worst:.1e} over 300 points"))
}

fn catenoid_base(c: &Ctx) -> Outcome {
    let sol = solve_critical_catenoid(0.0).map_err(e2s)?;
    ensure!((sol.a - c.r0).abs() < 1e-8, "a(0) = {} vs r0 = {}", sol.a, c.r0);
    ensure!(sol.b.abs() < 1e-8, "b(0) = {:e}", sol.b);
    Ok(format!("a(0) − r0 = {:.1e}", sol.a - c.r0))
}

fn catenoid_deformed(c: &Ctx) -> Outcome {
    let ts: Vec<f64> = if c.full { (0..=6).map(|k| 0.05 * k as f64).collect() } else { vec![0.1] };
    let rows = sweep(&ts, &SolverOptions::default());
    let mut worst_h: f64 = 0.0;
    for row in &rows {
        ensure!(row.converged, "t = {}: {:?}", row.t, row.error);
        ensure!(row.b.abs() < 1e-8, "b({}) = {:e}", row.t, row.b);
        let sol = solve_critical_catenoid(row.t).map_err(e2s)?;
        let mirror = solve_critical_catenoid(-row.t).map_err(e2s)?;
        ensure!((sol.a - mirror.a).abs() < 1e-8, "a not even at t = {}", row.t);
        worst_h = worst_h.max(max_mean_curvature(&sol.profile).map_err(e2s)?);
    }
    ensure!(worst_h < 1e-7, "max |H| = {worst_h:e}");
    Ok(format!("{} values of t, max |H| {worst_h:.1e}", ts.len()))
}

fn mode_dichotomy(_: &Ctx) -> Outcome {
    for n in -8i64..=8 {
        let det = mode_bvp_determinant(n);
        ensure!((det.abs() < KERNEL_DET_TOL) == (n.abs() == 1), "mode {n}: det {det:e}");
    }
    let bases = kernel_bases();
    for k in bases.disk.iter().chain(&bases.catenoid) {
        ensure!(k.ode_residual() < 1e-8 && k.robin_residual() < 1e-10, "{k:?} residuals too large");
    }
    Ok("kernel only at n = ±1".into())
}

fn spectrum_counts(c: &Ctx, surface: SurfaceKind, index: usize) -> Outcome {
    let r = nullity_and_index_with(surface, &c.cfg.levels, c.cfg.zero_tol).map_err(e2s)?;
    ensure!(r.stable, "counts change under refinement");
    ensure!(r.nullity == 2, "nullity {}", r.nullity);
    ensure!(r.index == index, "index {} (expected {index})", r.index);
    Ok(format!("nullity {}, index {}", r.nullity, r.index))
}

fn degree_table(c: &Ctx) -> Outcome {
    let reports = [
        nullity_and_index_with(SurfaceKind::Disk, &c.cfg.levels, c.cfg.zero_tol).map_err(e2s)?,
        nullity_and_index_with(SurfaceKind::Catenoid, &c.cfg.levels, c.cfg.zero_tol).map_err(e2s)?,
    ];
    let mut totals = Vec::new();
    for (topo, want) in [(Topology::Disk, 2), (Topology::Annulus, 2), (Topology::Other, 0)] {
        let total = assemble_degree(topo, &reports).map_err(e2s)?.total;
        ensure!(total.abs() == want, "{topo:?}: degree {total}");
        totals.push(total);
    }
    Ok(format!("degrees {totals:?}"))
}

fn morse(c: &Ctx) -> Outcome {
    let trials = if c.full { c.cfg.morse_trials } else { c.cfg.morse_trials.min(5) };
    for m in [Manifold::S2, Manifold::RP2] {
        let out = morse_euler_oracle(m, trials, c.cfg.seed).map_err(e2s)?;
        ensure!(out.per_trial.iter().all(|&v| v == m.euler()), "{m}: {:?}", out.per_trial);
    }
    Ok(format!("χ(S2) = 2, χ(RP2) = 1 on {trials} trials each"))
}

fn variation(_: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    for surface in [SurfaceKind::Disk, SurfaceKind::Catenoid] {
        let r = normal_perturbation_fd_check(surface, &|u: Jet, v: Jet| u * u * u * v.scale(2.0).cos(), 1e-4)
            .map_err(e2s)?;
        ensure!(r.rel_error_h < 1e-3 && r.rel_error_theta < 1e-3, "{surface}: J residual too large");
        worst = worst.max(r.rel_error_h).max(r.rel_error_theta);
    }
    let field = AnalyticField::new(
        "x3 + |x|²",
        |x| x[2] + x.norm_squared(),
        |x| Vec3::z() + 2.0 * x,
        |_| 2.0 * fbmin::Mat3::identity(),
    );
    let grid = Grid::Cylinder(CylinderGrid::new(16, 16).map_err(e2s)?);
    let cf = conformal_h_variation(SurfaceKind::Catenoid, &field, &grid).map_err(e2s)?;
    let flat = CapMetric::euclidean();
    let s = 1e-3;
    for (i, &a) in grid.rows().iter().enumerate() {
        for j in 0..grid.n_theta() {
            let h = |s: f64| {
                let m = ConformalMetric { base: &flat, field: &field, s };
                surface_mean_curvature(SurfaceKind::Catenoid, &m, a, grid.theta(j))
            };
            let fd = (h(s).map_err(e2s)? - h(-s).map_err(e2s)?) / (2.0 * s);
            let rel = (fd - cf.at(i, j)).abs() / cf.max_abs();
            ensure!(rel < 1e-3, "conformal H variation off by {rel:e}");
            worst = worst.max(rel);
        }
    }
    Ok(format!("worst relative error {worst:.1e}"))
}

fn probe(_: &Ctx) -> Outcome {
    let rows = semicontinuity_probe(&[0.05, 0.1], &ProbeOptions::default());
    for r in &rows {
        ensure!(r.error.is_none(), "t = {}: {:?}", r.t, r.error);
        ensure!(r.near_zero == 2, "t = {}: {} near-zero singular values", r.t, r.near_zero);
    }
    Ok("2 near-zero singular values at t = 0.05, 0.1".into())
}

type CheckFn = fn(&Ctx) -> Outcome;

fn checks(full: bool) -> Vec<(&'static str, &'static str, CheckFn)> {
    let mut v: Vec<(&str, &str, CheckFn)> = vec![
        ("constants", "fixed_point", constants_fixed_point),
        ("constants", "ordering", constants_ordering),
        ("constants", "bisection_oracle", constants_bisection),
        ("constants", "riccati_margin", riccati),
        ("metric", "einstein", metric_einstein),
        ("catenoid", "euclidean", catenoid_base),
        ("catenoid", "deformed", catenoid_deformed),
        ("jacobi", "mode_dichotomy", mode_dichotomy),
        ("spectrum", "disk", |c| spectrum_counts(c, SurfaceKind::Disk, 1)),
        ("spectrum", "catenoid", |c| spectrum_counts(c, SurfaceKind::Catenoid, 4)),
        ("degree", "table", degree_table),
        ("degree", "morse", morse),
    ];
    if full {
        v.push(("jacobi", "variation", variation));
        v.push(("spectrum", "semicontinuity", probe));
    }
    v
}

pub fn verify(cfg: &Config, suite: Suite, perturb_t0: f64) -> Result<u8> {
    let params = json!({
        "suite": suite, "levels": cfg.levels, "zero_tol": cfg.zero_tol,
        "seed": cfg.seed, "morse_trials": cfg.morse_trials, "perturb_t0": perturb_t0,
    });
    let mut rec = Recorder::new("verify", params, &cfg.output_dir)?;
    let c = solve_t0();
    let t0 = c.t0 + perturb_t0;
    let ctx = Ctx { cfg, full: matches!(suite, Suite::All), t0, r0: c.r0 };
    let mut results = Vec::new();
    for (suite_name, check, f) in checks(ctx.full) {
        let start = Instant::now();
        let outcome = f(&ctx);
        let seconds = start.elapsed().as_secs_f64();
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        // timings go to the terminal only so that verify.json stays reproducible
        println!("{} {suite_name}/{check}: {detail} [{seconds:.2}s]", if passed { "PASS" } else { "FAIL" });
        results.push(CheckResult { suite: suite_name.into(), check: check.into(), passed, detail });
    }
    let passed = results.iter().all(|r| r.passed);
    let record = VerifyRecord { suite, passed, results };
    rec.write_json(&cfg.output_dir.join("verify.json"), &record)?;
    let code = if passed { EXIT_OK } else { EXIT_FAILED };
    rec.finish(code)?;
    Ok(code)
}
