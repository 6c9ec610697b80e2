use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use plap_core::analytic::{SubMargins, SubSolutionSpec};
use plap_core::harness::{
    comparison_experiment, heat_comparison_suite, lemma_suite, profile_suite, subsolution_suite,
    supersolution_suite, ExperimentReport, Verdict,
};
use plap_core::model::{validate_for_solver, RegimeTag};
use plap_core::solver::{run, Field, RunStatus, SolverConfig};
use plap_core::{classify_regime, validate, DomainSpec, Error, ProblemParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{initial_field, RunConfig};
use crate::output::{num, series_csv, snapshot_csv, write, write_json};
use crate::{CliError, Globals, Suite, EXIT_BLOWUP, EXIT_NUMERICAL, EXIT_OK, EXIT_VERIFY_FAILED};

fn load(g: &Globals) -> Result<(RunConfig, PathBuf), CliError> {
    let path = g
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("this command needs --config <path>".into()))?;
    let (mut cfg, base) = RunConfig::load(path)?;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    Ok((cfg, base))
}

fn out_dir(g: &Globals, cfg: Option<&RunConfig>) -> Option<PathBuf> {
    g.out.clone().or_else(|| cfg.map(|c| c.output.directory.clone()))
}

// A closed pipe on stdout is not an error for the run itself.
fn print_json(value: &impl Serialize) {
    let text = serde_json::to_string_pretty(value).expect("output serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

pub fn classify(g: &Globals) -> Result<u8, CliError> {
    let (cfg, _) = load(g)?;
    let verdict = classify_regime(&cfg.problem, &cfg.domain)?;
    print_json(&verdict);
    if let Some(dir) = &g.out {
        write_json(dir, "verdict.json", &verdict)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct GridInfo {
    nodes: usize,
    h: f64,
    start: f64,
}

#[derive(Serialize)]
struct Resolved<'a> {
    solver: SolverConfig,
    grid: GridInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    subsolution: Option<&'a SubSolutionSpec>,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    #[serde(flatten)]
    status: &'a RunStatus,
    steps: usize,
    final_t: f64,
    max_sup_norm: f64,
    dt_min: f64,
    dt_max: f64,
    dt_mean: f64,
}

#[derive(Serialize)]
struct Timings {
    wall_time_s: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: (&'static str, &'static str),
    config: &'a RunConfig,
    resolved: Resolved<'a>,
    result: RunSummary<'a>,
    files: Vec<String>,
    timings: Timings,
}

pub fn solve(g: &Globals) -> Result<u8, CliError> {
    let started = Instant::now();
    let (cfg, base) = load(g)?;
    let violations = validate_for_solver(&cfg.problem);
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations).into());
    }
    let solver = cfg.solver_config();
    solver.check()?;
    let (u0, sub) = initial_field(&cfg, &cfg.problem, &base)?;
    let grid = u0.grid;
    let outcome = run(&u0, &cfg.problem, &solver);

    let dir = out_dir(g, Some(&cfg)).expect("config supplies a directory");
    let mut files = vec!["series.csv".to_string()];
    write(&dir, "series.csv", &series_csv(&outcome.series))?;
    for (k, snap) in outcome.snapshots.iter().enumerate() {
        let name = format!("snapshot_{k}.csv");
        write(&dir, &name, &snapshot_csv(&grid, snap))?;
        files.push(name);
    }

    let steps: Vec<f64> = outcome.series.iter().skip(1).map(|r| r.dt).collect();
    let summary = RunSummary {
        status: &outcome.status,
        steps: steps.len(),
        final_t: outcome.series.last().map_or(0.0, |r| r.t),
        max_sup_norm: outcome.series.iter().fold(0.0, |m, r| m.max(r.sup_norm)),
        dt_min: steps.iter().cloned().fold(f64::INFINITY, f64::min),
        dt_max: steps.iter().cloned().fold(0.0, f64::max),
        dt_mean: if steps.is_empty() { 0.0 } else { steps.iter().sum::<f64>() / steps.len() as f64 },
    };
    let manifest = Manifest {
        tool: ("plap", env!("CARGO_PKG_VERSION")),
        config: &cfg,
        resolved: Resolved {
            solver,
            grid: GridInfo { nodes: grid.len(), h: grid.h, start: grid.start },
            subsolution: sub.as_ref(),
        },
        result: summary,
        files,
        timings: Timings { wall_time_s: started.elapsed().as_secs_f64() },
    };
    write_json(&dir, "manifest.json", &manifest)?;

    Ok(match &outcome.status {
        RunStatus::Completed => EXIT_OK,
        RunStatus::BlowUp { t_est, .. } => {
            eprintln!("blow-up detected, estimated time {t_est}");
            EXIT_BLOWUP
        }
        RunStatus::Failed { reason } => {
            eprintln!("numerical failure: {reason}");
            EXIT_NUMERICAL
        }
    })
}

fn worked_blowup() -> (ProblemParams, DomainSpec) {
    let params = ProblemParams {
        alpha: 1.0,
        beta: 0.0,
        gamma: 1.0,
        mu: 0.0,
        nu: 0.0,
        k: 1.0,
        s: 1.0,
        l: 0.5,
        q: 1.0,
        m: 2.0,
        r: 1.0,
        sigma: 0.5,
        p: 2.0,
    };
    (params, DomainSpec::ball(1.0, 1).expect("valid ball"))
}

fn worked_global() -> (ProblemParams, DomainSpec) {
    let params = ProblemParams {
        alpha: 1.0,
        beta: 1.0,
        gamma: 1.0,
        mu: 0.0,
        nu: 1.0,
        k: 1.0,
        s: 1.0,
        l: 1.0,
        q: 2.0,
        m: 2.0,
        r: 1.0,
        sigma: 3.0,
        p: 2.0,
    };
    (params, DomainSpec::interval(0.0, 1.0).expect("valid interval"))
}

pub fn verify(g: &Globals, suite: Suite) -> Result<u8, CliError> {
    let loaded = g.config.as_ref().map(|_| load(g)).transpose()?;
    let cfg = loaded.as_ref().map(|(c, _)| c);
    let seed = g.seed.or(cfg.map(|c| c.seed)).unwrap_or(42);

    let report: ExperimentReport = match suite {
        Suite::Lemma => lemma_suite(seed, 100_000),
        Suite::Profile => profile_suite(seed, 100, 1000),
        Suite::Subsolution => {
            let (params, domain) = cfg.map_or_else(worked_blowup, |c| (c.problem, c.domain));
            subsolution_suite(&params, &domain, SubMargins::default(), 201, 101)?.0
        }
        Suite::Supersolution => match loaded.as_ref() {
            Some((c, base)) => {
                let (u0, _) = initial_field(c, &c.problem, base)?;
                supersolution_suite(&c.problem, &c.domain, u0.sup_norm())?.0
            }
            None => {
                let (params, domain) = worked_global();
                supersolution_suite(&params, &domain, 1.0)?.0
            }
        },
        Suite::Comparison => match loaded.as_ref() {
            Some((c, base)) => {
                let (high, _) = initial_field(c, &c.problem, base)?;
                let mut low = high.clone();
                low.values.iter_mut().for_each(|v| *v *= 0.5);
                comparison_experiment(&c.problem, &low, &high, c.solver.t_max, &c.solver_config())?
            }
            None => heat_comparison_suite()?,
        },
    };
    print_json(&report);
    if let Some(dir) = out_dir(g, None) {
        write_json(&dir, &format!("report_{}.json", report.experiment), &report)?;
    }
    Ok(match report.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => {
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("failed: {} (measured {}, bound {})", c.name, c.measured, c.bound);
            }
            EXIT_VERIFY_FAILED
        }
        Verdict::Inconclusive => EXIT_NUMERICAL,
    })
}

const SWEEP_STATUS_SKIPPED: &str = "skipped";

struct SweepRow {
    params: ProblemParams,
    verdict: String,
    global_case: String,
    status: String,
    t_est: Option<f64>,
    max_sup: Option<f64>,
    note: String,
}

fn tag_name(tag: RegimeTag) -> &'static str {
    match tag {
        RegimeTag::BlowUpPredicted => "BlowUpPredicted",
        RegimeTag::GlobalPredicted => "GlobalPredicted",
        RegimeTag::Unknown => "Unknown",
    }
}

fn sweep_row(cfg: &RunConfig, base: &Path, params: ProblemParams, solve: bool) -> SweepRow {
    let mut row = SweepRow {
        params,
        verdict: String::new(),
        global_case: String::new(),
        status: SWEEP_STATUS_SKIPPED.into(),
        t_est: None,
        max_sup: None,
        note: String::new(),
    };
    let violations = validate(&params);
    if !violations.is_empty() {
        row.verdict = "Invalid".into();
        row.note = violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        return row;
    }
    match classify_regime(&params, &cfg.domain) {
        Ok(v) => {
            row.verdict = tag_name(v.tag).into();
            row.global_case = v.global_case.map(|c| format!("{c:?}")).unwrap_or_default();
        }
        Err(e) => {
            row.verdict = "Invalid".into();
            row.note = e.to_string();
            return row;
        }
    }
    if !solve {
        return row;
    }
    let field = initial_field(cfg, &params, base).map(|(f, _)| f);
    let u0: Field = match field {
        Ok(f) => f,
        Err(e) => {
            row.status = "error".into();
            row.note = e.to_string();
            return row;
        }
    };
    let outcome = run(&u0, &params, &cfg.solver_config());
    row.max_sup = Some(outcome.series.iter().fold(0.0, |m, r| m.max(r.sup_norm)));
    match outcome.status {
        RunStatus::Completed => row.status = "completed".into(),
        RunStatus::BlowUp { t_est, .. } => {
            row.status = "blow_up".into();
            row.t_est = Some(t_est);
        }
        RunStatus::Failed { reason } => {
            row.status = "failed".into();
            row.note = reason;
        }
    }
    row
}

pub fn sweep(g: &Globals) -> Result<u8, CliError> {
    let (cfg, base) = load(g)?;
    let section = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("sweep needs a `sweep` section".into()))?;
    for axis in &section.axes {
        let mut probe = cfg.problem;
        if !probe.set(&axis.name, 0.0) {
            return Err(CliError::Config(format!("unknown sweep axis `{}`", axis.name)));
        }
    }
    // Cartesian product, first axis outermost; no axes means an empty grid
    let mut tuples: Vec<ProblemParams> = if section.axes.is_empty() { Vec::new() } else { vec![cfg.problem] };
    for axis in &section.axes {
        tuples = tuples
            .iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = *p;
                    q.set(&axis.name, *v);
                    q
                })
            })
            .collect();
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", g.jobs)))?;
    let rows: Vec<SweepRow> =
        pool.install(|| tuples.par_iter().map(|p| sweep_row(&cfg, &base, *p, section.solve)).collect());

    let names: Vec<&str> = cfg.problem.fields().iter().map(|(n, _)| *n).collect();
    let mut csv = names.join(",");
    csv.push_str(",verdict,global_case,status,t_est,max_sup_norm,note\n");
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for r in &rows {
        let values: Vec<String> = r.params.fields().iter().map(|(_, v)| num(*v)).collect();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            values.join(","),
            r.verdict,
            r.global_case,
            r.status,
            opt(r.t_est),
            opt(r.max_sup),
            r.note.replace(',', ";")
        ));
    }
    let dir = out_dir(g, Some(&cfg)).expect("config supplies a directory");
    write(&dir, "sweep.csv", &csv)?;
    let _ = writeln!(std::io::stdout().lock(), "{} rows written to {}", rows.len(), dir.join("sweep.csv").display());
    Ok(EXIT_OK)
}
