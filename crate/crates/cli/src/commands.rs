use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fbmin::degree::{assemble_degree, morse_euler_oracle, MorseOutcome};
use fbmin::jacobi::riccati_bound_at;
use fbmin::rotprofile::{
    max_mean_curvature, solve_critical_catenoid_from, solve_t0, sweep, CatenoidSolution, ProfileSample,
    SolverOptions, SweepRow,
};
use fbmin::spectrum::nullity_and_index_with;
use fbmin::{DegreeLedger, SpectralReport, SurfaceKind, Topology};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::Config;
use crate::manifest::Recorder;
use crate::{Format, Usage, EXIT_INCONCLUSIVE, EXIT_NUMERICAL, EXIT_OK};

fn solver_options(cfg: &Config) -> SolverOptions {
    SolverOptions { tol: cfg.newton_tol, ode_step: cfg.ode_step, ..SolverOptions::default() }
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().context("flushing csv")?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsChecks {
    pub t0_fixed_point: bool,
    pub r0_gt_t0_gt_1: bool,
    pub margin_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRecord {
    pub t0: f64,
    pub r0: f64,
    /// `√2 tanh(√2 t0) − 1/t0`.
    pub margin: f64,
    pub checks: ConstantsChecks,
}

pub fn constants_record() -> ConstantsRecord {
    let c = solve_t0();
    let margin = riccati_bound_at(c.t0).margin;
    ConstantsRecord {
        t0: c.t0,
        r0: c.r0,
        margin,
        checks: ConstantsChecks {
            t0_fixed_point: (c.t0 - 1.0 / c.t0.tanh()).abs() < 1e-12,
            r0_gt_t0_gt_1: c.r0 > c.t0 && c.t0 > 1.0,
            margin_positive: margin > 0.0,
        },
    }
}

pub fn constants(cfg: &Config) -> Result<u8> {
    let mut rec = Recorder::new("constants", json!({}), &cfg.output_dir)?;
    let record = constants_record();
    rec.write_json(&cfg.output_dir.join("constants.json"), &record)?;
    println!("{}", serde_json::to_string_pretty(&record)?);
    rec.finish(EXIT_OK)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatenoidSummary {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub iterations: usize,
    pub max_abs_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CatenoidRecord {
    Converged {
        #[serde(flatten)]
        summary: CatenoidSummary,
        residual_path: Vec<f64>,
        ode_step: f64,
        samples: Vec<ProfileSample>,
    },
    Failed {
        t: f64,
        error: String,
        residual_path: Vec<f64>,
    },
}

fn summarize(sol: &CatenoidSolution) -> Result<CatenoidSummary> {
    Ok(CatenoidSummary {
        t: sol.t,
        a: sol.a,
        b: sol.b,
        theta_plus: sol.diagnostics.theta_plus,
        theta_minus: sol.diagnostics.theta_minus,
        iterations: sol.diagnostics.iterations,
        max_abs_h: max_mean_curvature(&sol.profile)?,
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("catenoid");
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn catenoid(cfg: &Config, t: f64, format: Format, out: Option<PathBuf>) -> Result<u8> {
    if !t.is_finite() {
        return Err(Usage(format!("--t must be finite, got {t}")).into());
    }
    let params = json!({ "t": t, "format": format, "newton_tol": cfg.newton_tol, "ode_step": cfg.ode_step });
    let mut rec = Recorder::new("catenoid", params, &cfg.output_dir)?;
    let ext = match format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let path = out.unwrap_or_else(|| cfg.output_dir.join(format!("catenoid.{ext}")));
    let r0 = solve_t0().r0;
    let (record, code) = match solve_critical_catenoid_from(t, (r0, 0.0), &solver_options(cfg)) {
        Ok(sol) => {
            let summary = summarize(&sol)?;
            eprintln!("t = {t}: a = {:.12}, b = {:.3e}, {} newton steps", sol.a, sol.b, summary.iterations);
            let record = CatenoidRecord::Converged {
                summary,
                residual_path: sol.diagnostics.residual_path.clone(),
                ode_step: sol.profile.step,
                samples: sol.profile.samples.clone(),
            };
            (record, EXIT_OK)
        }
        Err(e) => {
            let residual_path = match &e {
                fbmin::Error::NonConvergence { path, .. } => path.clone(),
                _ => Vec::new(),
            };
            let record = CatenoidRecord::Failed { t, error: e.to_string(), residual_path };
            eprintln!("{}", serde_json::to_string(&record)?);
            (record, EXIT_NUMERICAL)
        }
    };
    match (format, &record) {
        (Format::Json, _) | (Format::Csv, CatenoidRecord::Failed { .. }) => {
            let path = if matches!(format, Format::Csv) { path.with_extension("json") } else { path };
            rec.write_json(&path, &record)?
        }
        (Format::Csv, CatenoidRecord::Converged { summary, samples, .. }) => {
            rec.write(&path, &csv_bytes(std::slice::from_ref(summary))?)?;
            rec.write(&sibling(&path, "_profile.csv"), &csv_bytes(samples)?)?;
        }
    }
    rec.finish(code)?;
    Ok(code)
}

pub fn sweep_grid(t_min: f64, t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_min.is_finite() && t_max.is_finite()) || steps == 0 || t_min > t_max {
        return Err(Usage(format!("empty sweep range [{t_min}, {t_max}] with {steps} steps")).into());
    }
    if steps == 1 {
        return Ok(vec![t_min]);
    }
    // symmetric weights keep a symmetric range exactly symmetric
    let n = (steps - 1) as f64;
    Ok((0..steps).map(|i| (t_min * (n - i as f64) + t_max * i as f64) / n).collect())
}

pub fn sweep_cmd(cfg: &Config, t_min: Option<f64>, t_max: Option<f64>, steps: Option<usize>) -> Result<u8> {
    let t_min = t_min.unwrap_or(cfg.sweep.t_min);
    let t_max = t_max.unwrap_or(cfg.sweep.t_max);
    let steps = steps.unwrap_or(cfg.sweep.steps);
    let grid = sweep_grid(t_min, t_max, steps)?;
    let params = json!({
        "t_min": t_min, "t_max": t_max, "steps": steps,
        "newton_tol": cfg.newton_tol, "ode_step": cfg.ode_step,
    });
    let mut rec = Recorder::new("sweep", params, &cfg.output_dir)?;
    let rows: Vec<SweepRow> = sweep(&grid, &solver_options(cfg));
    let failed = rows.iter().filter(|r| !r.converged).count();
    rec.write(&cfg.output_dir.join("sweep.csv"), &csv_bytes(&rows)?)?;
    eprintln!("{} rows, {failed} failed", rows.len());
    let code = if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL };
    rec.finish(code)?;
    Ok(code)
}

fn report_path(dir: &Path, surface: SurfaceKind) -> PathBuf {
    dir.join(format!("spectrum_{surface}.json"))
}

pub fn spectrum(cfg: &Config, surface: SurfaceKind) -> Result<u8> {
    let params = json!({ "surface": surface, "levels": cfg.levels, "zero_tol": cfg.zero_tol });
    let mut rec = Recorder::new("spectrum", params, &cfg.output_dir)?;
    let report = nullity_and_index_with(surface, &cfg.levels, cfg.zero_tol)?;
    rec.write_json(&report_path(&cfg.output_dir, surface), &report)?;
    rec.write(
        &cfg.output_dir.join(format!("spectrum_{surface}_refinement.csv")),
        &csv_bytes(&report.refinement)?,
    )?;
    eprintln!(
        "{surface}: nullity {}, index {}{}",
        report.nullity,
        report.index,
        if report.inconclusive() { " (inconclusive: counts change under refinement)" } else { "" }
    );
    let code = if report.inconclusive() { EXIT_INCONCLUSIVE } else { EXIT_OK };
    rec.finish(code)?;
    Ok(code)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportUse {
    pub surface: SurfaceKind,
    /// `file` when read from the output directory, `inline` when computed.
    pub source: String,
    pub nullity: usize,
    pub index: usize,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub ledger: DegreeLedger,
    pub reports: Vec<ReportUse>,
    pub morse: Vec<MorseOutcome>,
    /// Every Morse trial reproduced the tabulated Euler characteristic.
    pub morse_consistent: bool,
}

fn load_or_compute(cfg: &Config, surface: SurfaceKind, require: bool) -> Result<(SpectralReport, String)> {
    let path = report_path(&cfg.output_dir, surface);
    if path.exists() {
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let report: SpectralReport =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        return Ok((report, "file".into()));
    }
    if require {
        return Err(fbmin::Error::MissingReport(path.display().to_string()).into());
    }
    Ok((nullity_and_index_with(surface, &cfg.levels, cfg.zero_tol)?, "inline".into()))
}

pub fn degree(cfg: &Config, topology: Topology, require_reports: bool) -> Result<u8> {
    let params = json!({
        "topology": topology, "require_reports": require_reports, "levels": cfg.levels,
        "zero_tol": cfg.zero_tol, "seed": cfg.seed, "morse_trials": cfg.morse_trials,
    });
    let mut rec = Recorder::new("degree", params, &cfg.output_dir)?;
    let needed: &[SurfaceKind] = match topology {
        Topology::Disk => &[SurfaceKind::Disk],
        Topology::Annulus => &[SurfaceKind::Catenoid],
        Topology::Other => &[],
    };
    let mut reports = Vec::new();
    let mut uses = Vec::new();
    for &s in needed {
        let (report, source) = load_or_compute(cfg, s, require_reports)?;
        uses.push(ReportUse { surface: s, source, nullity: report.nullity, index: report.index, stable: report.stable });
        reports.push(report);
    }
    let ledger = assemble_degree(topology, &reports)?;
    let mut morse = Vec::new();
    for r in &ledger.records {
        morse.push(morse_euler_oracle(r.manifold, cfg.morse_trials, cfg.seed)?);
    }
    let morse_consistent = morse.iter().all(|m| m.per_trial.iter().all(|&v| v == m.euler));
    let record = DegreeRecord { ledger, reports: uses, morse, morse_consistent };
    rec.write_json(&cfg.output_dir.join(format!("degree_{}.json", topology_tag(topology))), &record)?;
    eprintln!("{}: degree {}", topology_tag(topology), record.ledger.total);
    let code = if !record.morse_consistent {
        EXIT_NUMERICAL
    } else if reports.iter().any(SpectralReport::inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    rec.finish(code)?;
    Ok(code)
}

pub fn topology_tag(t: Topology) -> &'static str {
    match t {
        Topology::Disk => "disk",
        Topology::Annulus => "annulus",
        Topology::Other => "other",
    }
}
