//! Task execution and output files.
//!
//! Sweep points are evaluated concurrently; every file is written afterwards
//! by a single writer, in plan order, so identical configurations produce
//! byte-identical outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use casimir_core::energetics::{
    interaction_energy, interaction_pressure, matsubara_free_energy, matsubara_pressure,
    planar_limit_force, total_pressure, EnergyReport, PlanarLimit,
};
use casimir_core::harness::{replay_trial, run_monotonicity_suite, run_sign_suite, TheoremId, TheoremReport, TrialConfig};
use casimir_core::media::Sign;
use casimir_core::CasimirError;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{RunConfig, Task};
use crate::plan::PlanPoint;

/// Process exit classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitClass {
    Success,
    Config,
    UndefinedSign,
    Convergence,
    /// A theorem check found a counterexample.
    Counterexample,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        match self {
            ExitClass::Success => 0,
            ExitClass::Config => 1,
            ExitClass::UndefinedSign => 2,
            ExitClass::Convergence => 3,
            ExitClass::Counterexample => 4,
        }
    }

    pub fn of(e: &CasimirError) -> Self {
        match e {
            CasimirError::UndefinedSign => ExitClass::UndefinedSign,
            CasimirError::Domain { .. }
            | CasimirError::InvalidModel(_)
            | CasimirError::InvalidGeometry(_)
            | CasimirError::SelfEnergyUnavailable(_) => ExitClass::Config,
            CasimirError::Capability { .. }
            | CasimirError::Convergence { .. }
            | CasimirError::Integration { .. }
            | CasimirError::Contraction { .. }
            | CasimirError::CrossValidation { .. } => ExitClass::Convergence,
        }
    }

    /// The more important of two outcomes: the lowest non-zero code.
    fn merge(self, other: Self) -> Self {
        match (self, other) {
            (ExitClass::Success, x) | (x, ExitClass::Success) => x,
            (a, b) => a.min(b),
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("serialization: {0}")]
    Serialize(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit: ExitClass,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
    /// One human-readable line per point or theorem.
    pub summary: Vec<String>,
}

/// Column order of the results CSV.
pub const CSV_HEADER: [&str; 17] = [
    "task",
    "r1",
    "r2",
    "eps1_kind",
    "eps1_params",
    "eps2_kind",
    "eps2_params",
    "epsM_kind",
    "epsM_params",
    "mu2",
    "temperature",
    "value",
    "unit",
    "sign_class",
    "l_max_used",
    "n_kappa_used",
    "converged",
];

enum Computed {
    Report(EnergyReport),
    Planar(PlanarLimit),
}

struct PointOutcome {
    result: Result<Computed, CasimirError>,
}

pub fn run(cfg: &RunConfig, progress: bool) -> Result<RunOutcome, RunError> {
    match &cfg.task {
        Task::Check {
            theorems,
            trials,
            seed,
            replay,
        } => match replay {
            Some(trial) => run_replay(cfg, trial),
            None => run_check(cfg, theorems, *trials, *seed, progress),
        },
        _ => run_points(cfg, progress),
    }
}

fn evaluate(cfg: &RunConfig, p: &PlanPoint) -> Result<Computed, CasimirError> {
    let geo = p.geometry()?;
    let spec = cfg.spectrum.spec(p.temperature)?;
    let thermal = spec.temperature().is_some();
    let report = match &cfg.task {
        Task::Energy => interaction_energy(&geo, &spec)?,
        Task::FreeEnergy => matsubara_free_energy(&geo, &spec)?,
        Task::Pressure { method } if thermal => matsubara_pressure(&geo, &spec, *method)?,
        Task::Pressure { method } => interaction_pressure(&geo, &spec, *method)?,
        Task::TotalPressure => total_pressure(&geo, &spec)?,
        Task::PlanarLimit { ladder } => {
            let eps = |name: &str| p.media[name].constant_eps().unwrap_or(f64::NAN);
            let d = geo.gap();
            let radii: Vec<f64> = ladder.iter().map(|m| m * d).collect();
            let g = &p.geometry;
            return Ok(Computed::Planar(planar_limit_force(
                d,
                eps(&g.sphere),
                eps(&g.wall),
                eps(&g.medium),
                &radii,
                &spec,
            )?));
        }
        Task::Check { .. } => unreachable!("check runs through run_check"),
    };
    Ok(Computed::Report(report))
}

fn sign_label(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "+1",
        Sign::Minus => "-1",
        Sign::Undefined => "undefined",
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn run_points(cfg: &RunConfig, progress: bool) -> Result<RunOutcome, RunError> {
    let points = cfg.plan();
    let total = points.len();
    let done = AtomicUsize::new(0);
    let outcomes: Vec<PointOutcome> = points
        .par_iter()
        .map(|p| {
            let result = evaluate(cfg, p);
            if progress {
                let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                let status = if result.is_ok() { "ok" } else { "failed" };
                eprintln!("[{k}/{total}] point {} {status}", p.index);
            }
            PointOutcome { result }
        })
        .collect();

    let dir = &cfg.output.dir;
    create_dir(dir)?;
    let name = &cfg.output.name;
    let mut files = Vec::new();
    let mut summary = Vec::new();
    let mut exit = ExitClass::Success;

    let csv_path = dir.join(format!("{name}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(CSV_HEADER)?;
    let mut diag_points = Vec::with_capacity(total);
    let mut planar_rows: Vec<Vec<String>> = Vec::new();

    for (p, o) in points.iter().zip(&outcomes) {
        // geometry was validated while parsing
        let geo = p.geometry().expect("validated geometry");
        let pair_sign = geo.sign_class();
        let params: serde_json::Map<String, Value> =
            p.assignments.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let (value, unit, sign, l_max, n_kappa, converged) = match &o.result {
            Ok(Computed::Report(r)) => (
                num(r.value),
                r.unit.to_string(),
                sign_label(r.sign_class.value),
                r.l_max_used.to_string(),
                r.n_kappa_used.to_string(),
                r.converged,
            ),
            Ok(Computed::Planar(pl)) => (
                num(pl.force),
                "1/length^4".to_string(),
                sign_label(pair_sign.value),
                pl.table.iter().map(|r| r.l_max_used).max().unwrap_or(0).to_string(),
                pl.table.iter().map(|r| r.n_kappa_used).max().unwrap_or(0).to_string(),
                true,
            ),
            Err(_) => (
                String::new(),
                String::new(),
                sign_label(pair_sign.value),
                String::new(),
                String::new(),
                false,
            ),
        };
        w.write_record([
            cfg.task.name().to_string(),
            geo.r1.to_string(),
            geo.r2.to_string(),
            geo.sphere.kind_name().to_string(),
            geo.sphere.params(),
            geo.wall.kind_name().to_string(),
            geo.wall.params(),
            geo.medium.kind_name().to_string(),
            geo.medium.params(),
            geo.wall.permeability.to_string(),
            p.temperature.unwrap_or(0.0).to_string(),
            value.clone(),
            unit,
            sign.to_string(),
            l_max,
            n_kappa,
            converged.to_string(),
        ])?;

        let mut entry = json!({
            "index": p.index,
            "parameters": params,
            "sign_class": pair_sign,
        });
        let point_exit = match &o.result {
            Ok(Computed::Report(r)) => {
                entry["status"] = json!("ok");
                entry["report"] = json!(r);
                if r.converged {
                    ExitClass::Success
                } else {
                    ExitClass::Convergence
                }
            }
            Ok(Computed::Planar(pl)) => {
                entry["status"] = json!("ok");
                entry["planar"] = json!(pl);
                for (row, m) in pl.table.iter().zip(match &cfg.task {
                    Task::PlanarLimit { ladder } => ladder.as_slice(),
                    _ => &[],
                }) {
                    planar_rows.push(vec![
                        p.index.to_string(),
                        m.to_string(),
                        row.r1.to_string(),
                        num(row.pressure),
                        num(row.force_per_area),
                        row.l_max_used.to_string(),
                        row.n_kappa_used.to_string(),
                    ]);
                }
                ExitClass::Success
            }
            Err(e) => {
                let class = ExitClass::of(e);
                entry["status"] = json!("error");
                entry["error"] = json!(e.to_string());
                entry["exit_class"] = json!(class);
                class
            }
        };
        entry["exit_code"] = json!(point_exit.code());
        exit = exit.merge(point_exit);
        summary.push(match &o.result {
            Ok(_) => format!("point {}: {} = {value} (sign class {sign})", p.index, cfg.task.name()),
            Err(e) => format!("point {}: {e}", p.index),
        });
        diag_points.push(entry);
    }
    w.flush().map_err(|source| RunError::Io {
        path: csv_path.clone(),
        source,
    })?;
    files.push(csv_path);

    if let Task::PlanarLimit { .. } = cfg.task {
        let path = dir.join(format!("{name}.planar.csv"));
        let mut t = csv::Writer::from_path(&path)?;
        t.write_record(["point", "r1_over_gap", "r1", "pressure", "force_per_area", "l_max_used", "n_kappa_used"])?;
        for r in &planar_rows {
            t.write_record(r)?;
        }
        t.flush().map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        files.push(path);
    }

    let diag = json!({
        "task": cfg.task.name(),
        "points": diag_points,
        "exit_code": exit.code(),
    });
    files.push(write_json(dir, &format!("{name}.diagnostics.json"), &diag)?);
    Ok(RunOutcome { exit, files, summary })
}

fn run_check(
    cfg: &RunConfig,
    theorems: &[TheoremId],
    trials: usize,
    seed: u64,
    progress: bool,
) -> Result<RunOutcome, RunError> {
    let dir = &cfg.output.dir;
    create_dir(dir)?;
    let name = &cfg.output.name;
    let mut files = Vec::new();
    let mut summary = Vec::new();
    let mut exit = ExitClass::Success;
    let mut reports: Vec<Value> = Vec::new();

    for &id in theorems {
        if progress {
            eprintln!("checking {} ({trials} trials, seed {seed})", id.name());
        }
        let result = match id {
            TheoremId::TMonotonicity => run_monotonicity_suite(trials, seed),
            _ => run_sign_suite(id, trials, seed),
        };
        match result {
            Ok(report) => {
                summary.push(format!(
                    "{}: {} trials, {} failures",
                    id.name(),
                    report.trials,
                    report.failures.len()
                ));
                if !report.passed() {
                    exit = exit.merge(ExitClass::Counterexample);
                    for c in &report.failures {
                        files.push(write_replay(dir, name, &c.config)?);
                    }
                }
                reports.push(json!(report));
            }
            Err(e) => {
                let class = ExitClass::of(&e);
                exit = exit.merge(class);
                summary.push(format!("{}: {e}", id.name()));
                reports.push(json!({
                    "theorem_id": id,
                    "error": e.to_string(),
                    "exit_code": class.code(),
                }));
            }
        }
    }
    let passed = exit == ExitClass::Success;
    let doc = json!({
        "seed": seed,
        "trials": trials,
        "passed": passed,
        "reports": reports,
        "exit_code": exit.code(),
    });
    files.insert(0, write_json(dir, &format!("{name}.check.json"), &doc)?);
    Ok(RunOutcome { exit, files, summary })
}

fn run_replay(cfg: &RunConfig, trial: &TrialConfig) -> Result<RunOutcome, RunError> {
    let dir = &cfg.output.dir;
    create_dir(dir)?;
    let failure = replay_trial(trial);
    let exit = if failure.is_some() {
        ExitClass::Counterexample
    } else {
        ExitClass::Success
    };
    let report = TheoremReport {
        theorem_id: trial.theorem,
        trials: 1,
        seed: trial.seed,
        skipped: trial.skipped,
        failures: failure
            .iter()
            .map(|detail| casimir_core::harness::Counterexample {
                config: trial.clone(),
                detail: detail.clone(),
            })
            .collect(),
    };
    let summary = vec![match &failure {
        Some(d) => format!("{} trial {}: FAILED: {d}", trial.theorem.name(), trial.index),
        None => format!("{} trial {}: passed", trial.theorem.name(), trial.index),
    }];
    let doc = json!({
        "seed": trial.seed,
        "trials": 1,
        "passed": failure.is_none(),
        "reports": [report],
        "exit_code": exit.code(),
    });
    let path = write_json(dir, &format!("{}.check.json", cfg.output.name), &doc)?;
    Ok(RunOutcome {
        exit,
        files: vec![path],
        summary,
    })
}

#[derive(Serialize)]
struct ReplayTask<'a> {
    kind: &'static str,
    theorem: &'a str,
}

#[derive(Serialize)]
struct ReplayDocument<'a> {
    task: ReplayTask<'a>,
    replay: &'a TrialConfig,
}

/// A configuration that re-runs exactly one failed trial.
pub fn replay_document(trial: &TrialConfig) -> Result<String, RunError> {
    let doc = ReplayDocument {
        task: ReplayTask {
            kind: "check",
            theorem: trial.theorem.name(),
        },
        replay: trial,
    };
    let body = toml::to_string(&doc).map_err(|e| RunError::Serialize(e.to_string()))?;
    Ok(format!(
        "# Counterexample for {} (seed {}, trial {}).\n# Re-run with: casimir --config <this file>\n\n{body}",
        trial.theorem.name(),
        trial.seed,
        trial.index
    ))
}

fn write_replay(dir: &Path, name: &str, trial: &TrialConfig) -> Result<PathBuf, RunError> {
    let path = dir.join(format!(
        "{name}.counterexample.{}.{}.toml",
        trial.theorem.name(),
        trial.index
    ));
    let text = replay_document(trial)?;
    fs::write(&path, text).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn write_json(dir: &Path, file: &str, value: &Value) -> Result<PathBuf, RunError> {
    let path = dir.join(file);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::Serialize(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn create_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })
}
