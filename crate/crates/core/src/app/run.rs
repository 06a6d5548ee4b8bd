use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExampleConfig, RunConfig, TaskKind};
use crate::assembly::assemble_relaxed_energy;
use crate::cellformulas::estimate;
use crate::constructions::approximating_sequence;
use crate::densities::{check_hypotheses, DensitySpec, DensityTriple};
use crate::energy::{sequence_energies, total_energy};
use crate::error::{Error, Result};
use crate::example_tr::{random_competitor_energies, verify_example, Bilinear3};
use crate::fields::CellwiseField;
use crate::tensor::max_abs_diff;

/// Exit codes of the command line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OUTPUT: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const ESTIMATOR: i32 = 3;
    pub const HYPOTHESES: i32 = 4;
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoAdmissibleCompetitor { .. } | Error::Estimator { .. } => exit::ESTIMATOR,
        Error::Io(_) | Error::Csv(_) => exit::OUTPUT,
        _ => exit::VALIDATION,
    }
}

/// Machine-readable error, with the offending cell problem when there is
/// one.
pub fn error_json(e: &Error) -> Value {
    let problem = match e {
        Error::NoAdmissibleCompetitor { problem } | Error::Estimator { problem, .. } => {
            serde_json::from_str(problem).unwrap_or(Value::String(problem.clone()))
        }
        _ => Value::Null,
    };
    json!({ "exit_code": exit_code(e), "error": e.to_string(), "problem": problem })
}

/// What a task produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: Value,
    pub csv: Option<Vec<u8>>,
    /// Hard hypothesis failures, which fail the run under `--strict`.
    pub hard_failures: usize,
}

fn densities(cfg: &RunConfig, d: usize, n: usize) -> Result<DensityTriple> {
    cfg.densities.as_ref().unwrap_or(&DensitySpec::default()).build(d, n)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn units_csv(header: &[&str], units: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    w.write_record(units)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn example_tensors(ex: &ExampleConfig) -> Result<(Bilinear3, Bilinear3)> {
    let n = ex.a.len();
    match (&ex.slice, &ex.l, &ex.m) {
        (Some(b), None, None) => {
            if b.len() != n * n {
                return Err(Error::ShapeMismatch(format!("slice needs {} entries", n * n)));
            }
            let l = (0..n * n * n).map(|c| b[c / n] * ex.a[c % n]).collect();
            Ok((Bilinear3::new(n, l)?, Bilinear3::zero(n)))
        }
        (None, Some(l), Some(m)) => Ok((Bilinear3::new(n, l.clone())?, Bilinear3::new(n, m.clone())?)),
        _ => Err(Error::Config("example needs either `slice`, or both `l` and `m`".into())),
    }
}

/// Runs the task of a resolved config. Relative paths in the config
/// resolve against `base`.
pub fn execute(cfg: &RunConfig, base: &Path) -> Result<Outcome> {
    let missing = |k: &str| Error::Config(format!("task `{}` needs key `{k}`", cfg.task.name()));
    match cfg.task {
        TaskKind::CheckHypotheses => {
            let (d, n) = (cfg.d.ok_or_else(|| missing("d"))?, cfg.n.ok_or_else(|| missing("n"))?);
            let report = check_hypotheses(&densities(cfg, d, n)?, &cfg.sampler.clone().unwrap_or_default());
            let hard = report.hard_failures().len();
            Ok(Outcome {
                result: json!({ "all_pass": report.all_pass(), "report": report }),
                csv: None,
                hard_failures: hard,
            })
        }
        TaskKind::Energy => {
            let u = cfg.field.as_ref().ok_or_else(|| missing("field"))?.load(base)?;
            let e = total_energy(&u, &densities(cfg, u.components(), u.domain().dim())?)?;
            Ok(Outcome { result: to_value(&e), csv: None, hard_failures: 0 })
        }
        TaskKind::ApproxSequence => {
            let sd2 = cfg.sd2.as_ref().ok_or_else(|| missing("sd2"))?.build(base)?;
            let seq = cfg.sequence.clone().unwrap_or_default();
            let mut members = Vec::new();
            for &n in &seq.ns {
                let s = approximating_sequence(&sd2, n, seq.correction_grid)?;
                let gamma = sd2.gamma().refine(s.refinement);
                let hessian_error = max_abs_diff(s.u.second_gradient_field().values(), gamma.values());
                members.push(json!({
                    "n": n,
                    "refinement": s.refinement,
                    "l1_u": s.l1_u,
                    "l1_grad": s.l1_grad,
                    "rate_constant": s.rate_constant,
                    "hessian_error": hessian_error,
                }));
            }
            let ratio = |key: &str| -> Vec<f64> {
                members
                    .windows(2)
                    .map(|w| w[1][key].as_f64().unwrap_or(f64::NAN) / w[0][key].as_f64().unwrap_or(f64::NAN))
                    .collect()
            };
            let (ratios_u, ratios_grad) = (ratio("l1_u"), ratio("l1_grad"));
            let energies = match &cfg.densities {
                Some(_) => Some(to_value(&sequence_energies(
                    &sd2,
                    &densities(cfg, sd2.d(), sd2.n())?,
                    &seq.ns,
                    seq.correction_grid,
                )?)),
                None => None,
            };
            let rows = members.iter().map(|m| {
                ["n", "l1_u", "l1_grad", "rate_constant", "hessian_error"].iter().map(|k| m[*k].to_string()).collect()
            });
            let csv = units_csv(
                &["n", "l1_u", "l1_grad", "rate_constant", "hessian_error"],
                &["integer", "scalar (L1 error)", "scalar (L1 error)", "scalar (n times error)", "scalar (max abs)"],
                rows,
            )?;
            let result = json!({
                "members": members,
                "ratios_u": ratios_u,
                "ratios_grad": ratios_grad,
                "energies": energies,
            });
            Ok(Outcome { result, csv: Some(csv), hard_failures: 0 })
        }
        TaskKind::CellSweep => {
            let problem = cfg.problem.as_ref().ok_or_else(|| missing("problem"))?;
            let search = cfg.search.clone().unwrap_or_default();
            let sweep = estimate(problem, &densities(cfg, problem.d, problem.n)?, &search)?;
            let mut csv = Vec::new();
            sweep.write_csv(&mut csv)?;
            Ok(Outcome { result: to_value(&sweep.result), csv: Some(csv), hard_failures: 0 })
        }
        TaskKind::ExampleVerify => {
            let ex = cfg.example.as_ref().ok_or_else(|| missing("example"))?;
            let (l, m) = example_tensors(ex)?;
            let mut report = verify_example(&l, &m, &ex.a, ex.family, ex.tolerance)?;
            let random = random_competitor_energies(&l, &m, &ex.a, ex.random_competitors, cfg.seed)?;
            let random_min = random.iter().map(|(_, e)| *e).fold(f64::INFINITY, f64::min);
            let random_ok = random.iter().all(|(_, e)| *e >= report.closed_form - ex.tolerance);
            report.lower_bound_ok &= random_ok;
            let mut result = to_value(&report);
            result["random_competitors"] =
                json!({ "count": random.len(), "min": random_min, "lower_bound_ok": random_ok });
            Ok(Outcome { result, csv: None, hard_failures: 0 })
        }
        TaskKind::RelaxAssemble => {
            let sd2 = cfg.sd2.as_ref().ok_or_else(|| missing("sd2"))?.build(base)?;
            let report = assemble_relaxed_energy(
                &sd2,
                &densities(cfg, sd2.d(), sd2.n())?,
                &cfg.assembly.clone().unwrap_or_default(),
            )?;
            let mut csv = Vec::new();
            report.write_csv(&mut csv)?;
            Ok(Outcome { result: to_value(&report), csv: Some(csv), hard_failures: 0 })
        }
    }
}

/// The JSON report: task, resolved config, result, then the timestamp,
/// which is the only field that differs between identical runs.
pub fn report_json(cfg: &RunConfig, outcome: &Outcome, timestamp: Option<u64>) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("task".into(), Value::String(cfg.task.name().into()));
    doc.insert("config".into(), to_value(cfg));
    doc.insert("result".into(), outcome.result.clone());
    doc.insert("timestamp".into(), timestamp.map_or(Value::Null, Value::from));
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("reports serialize");
    text.push('\n');
    text
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strict: bool,
}

/// Where the artifacts of a run went.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub report: PathBuf,
    pub csv: Option<PathBuf>,
    pub exit_code: i32,
}

pub const OUT_DIR_ENV: &str = "SDRELAX_OUT_DIR";

/// Loads, resolves and runs a config file, writing the report (and the
/// CSV table where the task has one) into the output directory.
pub fn run_file(path: &Path, opts: &Options) -> Result<Artifacts> {
    let mut cfg = RunConfig::from_file(path)?;
    if let Some(seed) = opts.seed {
        cfg = cfg.with_seed(seed);
    }
    let cfg = cfg.resolved();
    let base = path.parent().unwrap_or(Path::new("."));
    let outcome = execute(&cfg, base)?;

    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).ok();
    let report = dir.join(cfg.output.report.as_deref().unwrap_or("report.json"));
    std::fs::write(&report, report_json(&cfg, &outcome, timestamp))?;
    let default_csv = (cfg.task == TaskKind::CellSweep).then_some("sweep.csv");
    let csv = match (&outcome.csv, cfg.output.csv.as_deref().or(default_csv)) {
        (Some(bytes), Some(name)) => {
            let p = dir.join(name);
            std::fs::write(&p, bytes)?;
            Some(p)
        }
        _ => None,
    };
    let exit_code = if opts.strict && outcome.hard_failures > 0 { exit::HYPOTHESES } else { exit::OK };
    Ok(Artifacts { report, csv, exit_code })
}
