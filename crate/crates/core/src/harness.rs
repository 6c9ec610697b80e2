//! Executable experiments: the algebraic monotonicity inequality, ordering
//! preservation between two runs, blow-up certification from below and
//! boundedness certification from above.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{
    anchor_exponential_integral, build_subsolution, build_supersolution, eval_profile,
    eval_subsolution, profile_curvature, residual_tolerance, subsolution_residual,
    supersolution_residual_with_integral, SubMargins, SubSolutionSpec, SuperSolutionSpec,
};
use crate::error::{Error, Result};
use crate::model::{validate, validate_for_solver, DomainSpec, ProblemParams};
use crate::solver::{
    propose_dt, run_observed, snap_to_end, try_step, Field, Grid, Observe, RunStatus, SeriesRow, SolverConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Passes when `measured <= bound`.
    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, bound, pass: measured <= bound }
    }

    /// Passes when `measured >= bound`.
    pub fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, bound, pass: measured >= bound }
    }

    /// A boolean outcome recorded as 1/0 against a bound of 1.
    pub fn flag(name: &str, ok: bool) -> Self {
        Self { name: name.into(), measured: if ok { 1.0 } else { 0.0 }, bound: 1.0, pass: ok }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The experiment could not reach a judgement (solver failure, or data
    /// the theorem says nothing about).
    Inconclusive,
}

/// Outcome of one experiment. Field order is fixed, so serialized reports
/// are deterministic apart from `wall_time_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub inputs_digest: String,
    pub checks: Vec<CheckRecord>,
    /// Values reported for context that do not gate the verdict.
    pub diagnostics: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    fn new(experiment: &str, inputs: &impl Serialize) -> Self {
        let bytes = serde_json::to_vec(inputs).expect("experiment inputs serialize");
        let digest = Sha256::digest(&bytes);
        Self {
            experiment: experiment.into(),
            inputs_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
            checks: Vec::new(),
            diagnostics: Vec::new(),
            notes: Vec::new(),
            verdict: Verdict::Inconclusive,
            wall_time_s: 0.0,
        }
    }

    fn finish(mut self, started: Instant, inconclusive: bool) -> Self {
        self.verdict = if inconclusive {
            Verdict::Inconclusive
        } else if self.checks.iter().all(|c| c.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self.wall_time_s = started.elapsed().as_secs_f64();
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// |a|^e a, with 0 mapped to 0 for negative e.
fn scaled(a: &[f64], e: f64) -> Vec<f64> {
    let n = norm(a);
    if n == 0.0 {
        return vec![0.0; a.len()];
    }
    let f = n.powf(e);
    a.iter().map(|x| f * x).collect()
}

/// Both sides of ⟨|a|^{σ-2}a - |b|^{σ-2}b, a-b⟩ ≥ (4/σ²)‖|a|^{(σ-2)/2}a - |b|^{(σ-2)/2}b‖².
pub fn lemma_gap(a: &[f64], b: &[f64], sigma_t: f64) -> Result<(f64, f64)> {
    if !(sigma_t > 1.0) {
        return Err(Error::InvalidArgument(format!("sigma~ must exceed 1, got {sigma_t}")));
    }
    if a.len() != b.len() {
        return Err(Error::InvalidArgument("vectors must have equal dimension".into()));
    }
    let fa = scaled(a, sigma_t - 2.0);
    let fb = scaled(b, sigma_t - 2.0);
    let lhs = fa
        .iter()
        .zip(&fb)
        .zip(a.iter().zip(b))
        .map(|((x, y), (ai, bi))| (x - y) * (ai - bi))
        .sum();
    let ha = scaled(a, 0.5 * (sigma_t - 2.0));
    let hb = scaled(b, 0.5 * (sigma_t - 2.0));
    let diff: f64 = ha.iter().zip(&hb).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((lhs, 4.0 / (sigma_t * sigma_t) * diff))
}

/// Smooth compactly supported bump `(1 - (d/w)²)²` for `d = |x - c| < w`.
pub fn bump(x: f64, center: f64, width: f64) -> f64 {
    let z = (x - center) / width;
    if z.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - z * z).powi(2)
    }
}

#[derive(Serialize)]
struct FieldDigest<'a> {
    grid: &'a Grid,
    values: &'a [f64],
}

/// Runs two ordered initial data in lockstep (shared step sizes) and records
/// the largest value of `u_low - u_high` seen.
pub fn comparison_experiment(
    params: &ProblemParams,
    u0_low: &Field,
    u0_high: &Field,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let violations = validate_for_solver(params);
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }
    if u0_low.grid != u0_high.grid {
        return Err(Error::InvalidArgument("initial data live on different grids".into()));
    }
    if u0_low.values.iter().zip(&u0_high.values).any(|(l, h)| l > h) {
        return Err(Error::Precondition("initial data are not ordered nodewise".into()));
    }
    cfg.check()?;

    #[derive(Serialize)]
    struct Inputs<'a> {
        params: &'a ProblemParams,
        low: FieldDigest<'a>,
        high: FieldDigest<'a>,
        t_end: f64,
        cfg: &'a SolverConfig,
    }
    let mut report = ExperimentReport::new(
        "comparison",
        &Inputs {
            params,
            low: FieldDigest { grid: &u0_low.grid, values: &u0_low.values },
            high: FieldDigest { grid: &u0_high.grid, values: &u0_high.values },
            t_end,
            cfg,
        },
    );

    let mut low = u0_low.clone();
    let mut high = u0_high.clone();
    low.apply_boundary();
    high.apply_boundary();
    let max_violation = |l: &Field, h: &Field| {
        l.values.iter().zip(&h.values).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max)
    };
    let mut worst = max_violation(&low, &high);
    let mut max_sup = low.sup_norm().max(high.sup_norm());
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut failure = None;

    while t < t_end {
        let mut dt = propose_dt(&low, params, cfg).min(propose_dt(&high, params, cfg)).min(t_end - t);
        let next = loop {
            if dt < cfg.dt_min {
                break None;
            }
            match (try_step(&low, params, cfg.eps_reg, dt), try_step(&high, params, cfg.eps_reg, dt)) {
                (Some(a), Some(b)) => break Some((a, b)),
                _ => dt *= 0.5,
            }
        };
        let Some((a, b)) = next else {
            failure = Some(format!("time step underflow at t = {t}"));
            break;
        };
        low = a;
        high = b;
        t = snap_to_end(t + dt, t_end);
        steps += 1;
        worst = worst.max(max_violation(&low, &high));
        max_sup = max_sup.max(low.sup_norm()).max(high.sup_norm());
        if low.sup_norm() >= cfg.blowup_threshold || high.sup_norm() >= cfg.blowup_threshold {
            report.notes.push(format!("a run reached the blow-up threshold; comparison window truncated at t = {t}"));
            break;
        }
    }

    let tol = 1e-6 * (1.0 + max_sup);
    report.checks.push(CheckRecord::at_most("max ordering violation", worst.max(0.0), tol));
    report.diagnostics.push(("raw max(u_low - u_high)".into(), worst));
    report.diagnostics.push(("common horizon".into(), t));
    report.diagnostics.push(("steps".into(), steps as f64));
    report.diagnostics.push(("max sup-norm".into(), max_sup));
    let inconclusive = failure.is_some();
    if let Some(reason) = failure {
        report.notes.push(reason);
    }
    Ok(report.finish(started, inconclusive))
}

/// Initial data for the blow-up experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum BlowupInitial {
    /// `multiplier · v(·, t₀)`.
    Subsolution { multiplier: f64 },
    /// Arbitrary data on the experiment grid.
    Custom(Field),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupOptions {
    pub n_grid: usize,
    pub initial: BlowupInitial,
    /// Allowed relative overshoot of the numerical blow-up time over 1/δ - t₀.
    pub time_tolerance: f64,
    pub solver: SolverConfig,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        Self {
            n_grid: 400,
            initial: BlowupInitial::Subsolution { multiplier: 1.0 },
            time_tolerance: 0.10,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupExperiment {
    pub report: ExperimentReport,
    pub spec: SubSolutionSpec,
    pub series: Vec<SeriesRow>,
    pub status: RunStatus,
}

/// Builds the sub-solution, starts the solver from data above it and checks
/// that the run blows up no later than 1/δ - t₀ and stays above v(·, t+t₀).
pub fn blowup_experiment(
    params: &ProblemParams,
    domain: &DomainSpec,
    margins: SubMargins,
    options: &BlowupOptions,
) -> Result<BlowupExperiment> {
    let started = Instant::now();
    let spec = build_subsolution(params, domain, margins)?;
    let grid = Grid::new(domain, options.n_grid)?;
    let sub_at = |t: f64| Field::from_fn(grid, |x| eval_subsolution(&spec, x, t).unwrap_or(f64::INFINITY));
    let v0 = sub_at(spec.t0);

    let (u0, dominates) = match &options.initial {
        BlowupInitial::Subsolution { multiplier } => {
            let mut f = v0.clone();
            f.values.iter_mut().for_each(|x| *x *= multiplier);
            (f, *multiplier >= 1.0)
        }
        BlowupInitial::Custom(field) => {
            if field.grid != grid {
                return Err(Error::InvalidArgument("custom initial data must use the experiment grid".into()));
            }
            let dom = field.values.iter().zip(&v0.values).all(|(u, v)| u >= v);
            (field.clone(), dom)
        }
    };

    #[derive(Serialize)]
    struct Inputs<'a> {
        params: &'a ProblemParams,
        domain: &'a DomainSpec,
        margins: SubMargins,
        n_grid: usize,
        u0: &'a [f64],
        time_tolerance: f64,
        solver: &'a SolverConfig,
    }
    let mut report = ExperimentReport::new(
        "blowup",
        &Inputs {
            params,
            domain,
            margins,
            n_grid: options.n_grid,
            u0: &u0.values,
            time_tolerance: options.time_tolerance,
            solver: &options.solver,
        },
    );

    let window = spec.blowup_time() - spec.t0;
    let bound = window * (1.0 + options.time_tolerance);
    let cfg = SolverConfig { t_max: 2.0 * bound, ..options.solver };

    let mut ordering_gap = f64::INFINITY;
    let mut last_compared = 0.0;
    let coords = grid.coords();
    let outcome = run_observed(&u0, params, &cfg, |t, u| {
        let tv = t + spec.t0;
        if tv >= spec.blowup_time() {
            return Observe::Continue;
        }
        let mut vmax = 0.0f64;
        let mut gap = f64::INFINITY;
        for (x, ui) in coords.iter().zip(&u.values) {
            let v = eval_subsolution(&spec, *x, tv).unwrap_or(f64::INFINITY);
            vmax = vmax.max(v);
            gap = gap.min(ui - v);
        }
        // relative to the local scale so the check is meaningful at any amplitude
        ordering_gap = ordering_gap.min(gap / (1.0 + vmax));
        last_compared = t;
        Observe::Continue
    });

    report.diagnostics.push(("t0".into(), spec.t0));
    report.diagnostics.push(("1/delta".into(), spec.blowup_time()));
    report.diagnostics.push(("k_tilde".into(), spec.k_tilde));
    report.diagnostics.push(("ordering window end".into(), last_compared));

    let mut inconclusive = false;
    match &outcome.status {
        RunStatus::BlowUp { t_est, fit } => {
            report.checks.push(CheckRecord::flag("status is blow-up", true));
            report.checks.push(CheckRecord::at_most("T_est <= (1/delta - t0)(1 + tol)", *t_est, bound));
            report.diagnostics.push(("kappa".into(), fit.kappa));
            report.diagnostics.push(("fit degenerate".into(), if fit.degenerate { 1.0 } else { 0.0 }));
            report.diagnostics.push(("time at threshold".into(), outcome.series.last().map_or(0.0, |r| r.t)));
        }
        RunStatus::Completed => {
            report.checks.push(CheckRecord::flag("status is blow-up", false));
        }
        RunStatus::Failed { reason } => {
            report.notes.push(format!("solver failed: {reason}"));
            inconclusive = true;
        }
    }
    if dominates {
        report.checks.push(CheckRecord::at_least("min (u - v(t+t0)) / (1 + sup v)", ordering_gap, -1e-6));
    } else {
        report.notes.push("small-data, theorem silent: initial data do not dominate v(., t0)".into());
        inconclusive = !matches!(outcome.status, RunStatus::BlowUp { .. });
    }

    Ok(BlowupExperiment {
        report: report.finish(started, inconclusive),
        spec,
        series: outcome.series,
        status: outcome.status,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalExperiment {
    pub report: ExperimentReport,
    pub spec: SuperSolutionSpec,
    pub series: Vec<SeriesRow>,
    pub status: RunStatus,
}

/// Number of axis points on which the super-solution residual is certified.
pub const SUPER_CERT_POINTS: usize = 1000;

/// Minimum of 𝓛_p v + tol over the certification grid, with the scale used.
pub fn supersolution_certificate(spec: &SuperSolutionSpec, params: &ProblemParams) -> Result<(f64, f64)> {
    let integral = anchor_exponential_integral(spec, params.s);
    let (lo, hi) = spec.axis_range();
    let mut worst = f64::INFINITY;
    let mut worst_scale = 1.0;
    for i in 0..SUPER_CERT_POINTS {
        let x = lo + (hi - lo) * i as f64 / (SUPER_CERT_POINTS - 1) as f64;
        let terms = supersolution_residual_with_integral(spec, params, x, integral)?;
        let slack = terms.value() + residual_tolerance(&terms);
        if slack < worst {
            worst = slack;
            worst_scale = terms.scale().max(1.0);
        }
    }
    Ok((worst, worst_scale))
}

/// Builds the super-solution for `u0`, runs to `t_end` and checks the
/// sup-norm never exceeds L e^{ρ(Ω)+1}.
pub fn global_experiment(
    params: &ProblemParams,
    domain: &DomainSpec,
    u0: &Field,
    t_end: f64,
    solver: &SolverConfig,
) -> Result<GlobalExperiment> {
    let started = Instant::now();
    let spec = build_supersolution(params, domain, u0.sup_norm())?;

    #[derive(Serialize)]
    struct Inputs<'a> {
        params: &'a ProblemParams,
        domain: &'a DomainSpec,
        u0: FieldDigest<'a>,
        t_end: f64,
        solver: &'a SolverConfig,
    }
    let mut report = ExperimentReport::new(
        "global",
        &Inputs { params, domain, u0: FieldDigest { grid: &u0.grid, values: &u0.values }, t_end, solver },
    );

    let (slack, scale) = supersolution_certificate(&spec, params)?;
    report.checks.push(CheckRecord::at_least("min (L_p v + tol) on axis grid", slack, 0.0));
    report.diagnostics.push(("residual scale at minimum".into(), scale));

    let cfg = SolverConfig { t_max: t_end, ..*solver };
    let outcome = run_observed(u0, params, &cfg, |_, _| Observe::Continue);
    let bound = spec.global_bound();
    let max_sup = outcome.series.iter().fold(0.0f64, |m, r| m.max(r.sup_norm));
    report.diagnostics.push(("L".into(), spec.l_const));
    report.diagnostics.push(("final t".into(), outcome.series.last().map_or(0.0, |r| r.t)));

    let mut inconclusive = false;
    match &outcome.status {
        RunStatus::Completed => report.checks.push(CheckRecord::flag("status is completed", true)),
        RunStatus::BlowUp { .. } => report.checks.push(CheckRecord::flag("status is completed", false)),
        RunStatus::Failed { reason } => {
            report.notes.push(format!("solver failed: {reason}"));
            inconclusive = true;
        }
    }
    report.checks.push(CheckRecord::at_most("max sup-norm", max_sup, bound * (1.0 + 1e-6)));

    Ok(GlobalExperiment {
        report: report.finish(started, inconclusive),
        spec,
        series: outcome.series,
        status: outcome.status,
    })
}

/// Randomized check of the monotonicity inequality. One sample in ten uses
/// σ̃ = 2, where both sides must agree.
pub fn lemma_suite(seed: u64, samples: usize) -> ExperimentReport {
    let started = Instant::now();
    let mut report = ExperimentReport::new("lemma", &(seed, samples));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_rel = f64::INFINITY;
    let mut worst_eq = 0.0f64;
    let mut worst_sym = 0.0f64;
    let mut worst_rel_ge2 = f64::INFINITY;
    let mut worst_rel_weak = f64::INFINITY;
    for i in 0..samples {
        let dim = rng.gen_range(1..=5);
        let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..=10.0)).collect();
        let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..=10.0)).collect();
        let sigma_t = if i % 10 == 0 {
            2.0
        } else {
            // (1, 6]
            6.0 - rng.gen_range(0.0..5.0)
        };
        let (lhs, rhs) = lemma_gap(&a, &b, sigma_t).expect("valid lemma inputs");
        let rel = (lhs - rhs) / (1.0 + lhs.abs());
        worst_rel = worst_rel.min(rel);
        if sigma_t >= 2.0 {
            worst_rel_ge2 = worst_rel_ge2.min(rel);
        }
        // same inequality with the constant 4(σ-1)/σ²
        let weak = rhs * (sigma_t - 1.0);
        worst_rel_weak = worst_rel_weak.min((lhs - weak) / (1.0 + lhs.abs()));
        if sigma_t == 2.0 {
            worst_eq = worst_eq.max((lhs - rhs).abs());
        }
        if i % 100 == 0 {
            let (l2, r2) = lemma_gap(&b, &a, sigma_t).expect("valid lemma inputs");
            worst_sym = worst_sym.max((l2 - lhs).abs() / (1.0 + lhs.abs())).max((r2 - rhs).abs() / (1.0 + rhs.abs()));
        }
    }
    report.checks.push(CheckRecord::at_least("min (lhs - rhs) / (1 + |lhs|)", worst_rel, -1e-12));
    report.checks.push(CheckRecord::at_most("max |lhs - rhs| at sigma~ = 2", worst_eq, 1e-12));
    report.checks.push(CheckRecord::at_most("max relative asymmetry under a <-> b", worst_sym, 1e-12));
    report.diagnostics.push(("samples".into(), samples as f64));
    report.diagnostics.push(("min relative gap, sigma~ >= 2".into(), worst_rel_ge2));
    report.diagnostics.push(("min relative gap, constant 4(sigma~-1)/sigma~^2".into(), worst_rel_weak));
    if worst_rel < -1e-12 && worst_rel_ge2 >= -1e-12 {
        report.notes.push("violations occur only for sigma~ in (1, 2)".into());
    }
    report.finish(started, false)
}

/// Randomized check that the profile flux is -y/A and the radial
/// p-Laplacian of V is the constant -N/A.
pub fn profile_suite(seed: u64, cases: usize, points: usize) -> ExperimentReport {
    let started = Instant::now();
    let mut report = ExperimentReport::new("profile", &(seed, cases, points));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flux_err = 0.0f64;
    let mut plap_err = 0.0f64;
    for _ in 0..cases {
        let p: f64 = rng.gen_range(2.0..=5.0);
        let lambda = p / (p - 1.0);
        let a: f64 = rng.gen_range(0.1..20.0);
        let n = rng.gen_range(1..=3) as f64;
        let root = crate::analytic::profile_root(a, lambda);
        for i in 1..=points {
            let y = root * i as f64 / (points + 1) as f64;
            let slope = eval_profile(y, a, lambda).slope;
            let flux = slope.abs().powf(p - 2.0) * slope;
            let exact = -y / a;
            flux_err = flux_err.max((flux - exact).abs() / exact.abs());
            let curv = profile_curvature(y, a, lambda);
            let plap = (p - 1.0) * slope.abs().powf(p - 2.0) * curv + (n - 1.0) / y * flux;
            let target = -n / a;
            plap_err = plap_err.max((plap - target).abs() / target.abs());
        }
    }
    report.checks.push(CheckRecord::at_most("max relative flux error", flux_err, 1e-12));
    report.checks.push(CheckRecord::at_most("max relative p-Laplacian error", plap_err, 1e-12));
    report.finish(started, false)
}

/// Certifies a built sub-solution: exponent positivity and P(v) <= tol on a
/// uniform space-time grid over the support and [t₀, 1/δ).
pub fn subsolution_suite(
    params: &ProblemParams,
    domain: &DomainSpec,
    margins: SubMargins,
    space_points: usize,
    time_points: usize,
) -> Result<(ExperimentReport, SubSolutionSpec)> {
    let started = Instant::now();
    let mut report = ExperimentReport::new("subsolution", &(params, domain, margins, space_points, time_points));
    let spec = build_subsolution(params, domain, margins)?;
    let names = [
        "1+k~-r~-(k~+r~)(p-1)",
        "k~+1-r(k~+r~)",
        "k~+1-k~ sigma",
        "k~+1-l k~-q(k~+r~)",
    ];
    for (name, value) in names.iter().zip(spec.exponent_margins(params)) {
        report.checks.push(CheckRecord { name: format!("{name} > 0"), measured: value, bound: 0.0, pass: value > 0.0 });
    }
    let mut worst = f64::NEG_INFINITY;
    for j in 0..time_points {
        let t = spec.t0 + (spec.blowup_time() - spec.t0) * j as f64 / time_points as f64;
        let radius = spec.support_radius_at(t);
        for i in 0..space_points {
            let x = spec.center - radius + 2.0 * radius * i as f64 / (space_points - 1) as f64;
            let terms = subsolution_residual(&spec, params, x, t)?;
            worst = worst.max(terms.value() - residual_tolerance(&terms));
        }
    }
    report.checks.push(CheckRecord::at_most("max (P(v) - tol) on space-time grid", worst, 0.0));
    report.diagnostics.push(("r_tilde".into(), spec.r_tilde));
    report.diagnostics.push(("k_tilde".into(), spec.k_tilde));
    report.diagnostics.push(("A".into(), spec.a));
    report.diagnostics.push(("delta".into(), spec.delta));
    report.diagnostics.push(("t0".into(), spec.t0));
    report.diagnostics.push(("K".into(), spec.profile_mass));
    Ok((report.finish(started, false), spec))
}

/// Certifies a built super-solution on the axis grid, including the ρ̃
/// bracket ε ≤ ρ̃ ≤ ρ(Ω)+1.
pub fn supersolution_suite(
    params: &ProblemParams,
    domain: &DomainSpec,
    u0_sup: f64,
) -> Result<(ExperimentReport, SuperSolutionSpec)> {
    let started = Instant::now();
    let mut report = ExperimentReport::new("supersolution", &(params, domain, u0_sup));
    let spec = build_supersolution(params, domain, u0_sup)?;
    let (slack, _) = supersolution_certificate(&spec, params)?;
    report.checks.push(CheckRecord::at_least("min (L_p v + tol) on axis grid", slack, 0.0));
    let (lo, hi) = spec.axis_range();
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    for i in 0..SUPER_CERT_POINTS {
        let x = lo + (hi - lo) * i as f64 / (SUPER_CERT_POINTS - 1) as f64;
        let r = spec.rho_tilde(x);
        rmin = rmin.min(r);
        rmax = rmax.max(r);
    }
    report.checks.push(CheckRecord::at_least("min rho~", rmin, spec.epsilon));
    report.checks.push(CheckRecord::at_most("max rho~", rmax, spec.rho_omega + 1.0));
    report.checks.push(CheckRecord::at_least("L", spec.l_const, u0_sup.max(1.0)));
    report.diagnostics.push(("L".into(), spec.l_const));
    report.diagnostics.push(("global bound".into(), spec.global_bound()));
    Ok((report.finish(started, false), spec))
}

/// Comparison of `0.5·bump` against `bump` under pure diffusion on (0, 1).
pub fn heat_comparison_suite() -> Result<ExperimentReport> {
    let domain = DomainSpec::interval(0.0, 1.0)?;
    let grid = Grid::new(&domain, 100)?;
    let high = Field::from_fn(grid, |x| bump(x, 0.5, 0.4));
    let low = Field::from_fn(grid, |x| 0.5 * bump(x, 0.5, 0.4));
    comparison_experiment(&ProblemParams::pure_diffusion(2.0), &low, &high, 0.1, &SolverConfig::default())
}

/// Draws a tuple satisfying the comparison-principle hypotheses. Exponents
/// on u are kept at or above 1 so the explicit scheme stays Lipschitz near
/// u = 0.
pub fn random_comparison_params(rng: &mut impl Rng) -> ProblemParams {
    let p = rng.gen_range(2.0..=3.0);
    let params = ProblemParams {
        alpha: rng.gen_range(0.05..=1.0),
        beta: rng.gen_range(0.0..=1.0),
        gamma: rng.gen_range(0.0..=1.0),
        mu: rng.gen_range(0.0..=0.5),
        nu: rng.gen_range(0.0..=1.0),
        k: rng.gen_range(1.0..=2.0),
        s: rng.gen_range(1.0..=2.0),
        l: rng.gen_range(1.0..=2.0),
        q: p / 2.0 + rng.gen_range(0.0..=1.0),
        m: rng.gen_range(1.0..=2.0),
        r: p - 1.0 + rng.gen_range(0.0..=1.0),
        sigma: rng.gen_range(1.0..=2.0),
        p,
    };
    debug_assert!(validate(&params).is_empty());
    params
}

/// Random ordered pair of smooth data on `grid`: `low` a bump and `high`
/// the same bump plus a second, nonnegative one.
pub fn random_ordered_pair(grid: Grid, rng: &mut impl Rng) -> (Field, Field) {
    let (lo, hi) = (grid.x(0), grid.x(grid.n));
    let pick = |rng: &mut dyn rand::RngCore| {
        let c = match grid.geometry {
            crate::solver::Geometry::Interval => rng.gen_range(lo + 0.3 * (hi - lo)..=lo + 0.7 * (hi - lo)),
            crate::solver::Geometry::Radial { .. } => 0.0,
        };
        let w = rng.gen_range(0.2..=0.45) * (hi - lo);
        let amp = rng.gen_range(0.1..=1.0);
        (c, w, amp)
    };
    let (c1, w1, a1) = pick(rng);
    let (c2, w2, a2) = pick(rng);
    let low = Field::from_fn(grid, |x| a1 * bump(x, c1, w1));
    let high = Field::from_fn(grid, |x| a1 * bump(x, c1, w1) + a2 * bump(x, c2, w2));
    (low, high)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_equal_vectors() {
        for s in [1.5, 2.0, 4.0] {
            let (l, r) = lemma_gap(&[1.0, -2.0], &[1.0, -2.0], s).unwrap();
            assert_eq!((l, r), (0.0, 0.0));
        }
    }

    #[test]
    fn lemma_sigma_two_is_equality() {
        let a = [1.5, -3.0, 0.25];
        let b = [-2.0, 4.0, 1.0];
        let (l, r) = lemma_gap(&a, &b, 2.0).unwrap();
        let direct: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        assert_eq!(l, r);
        assert!((l - direct).abs() < 1e-12);
    }

    #[test]
    fn lemma_sigma_three_scalar() {
        // lhs = (4 - 1)(2 - 1) = 3, rhs = (4/9)(2√2 - 1)²
        let (l, r) = lemma_gap(&[2.0], &[1.0], 3.0).unwrap();
        assert!((l - 3.0).abs() < 1e-14);
        let expected = 4.0 / 9.0 * (2.0 * 2f64.sqrt() - 1.0).powi(2);
        assert!((r - expected).abs() < 1e-14);
        assert!((r - 1.4858).abs() < 1e-4);
        assert!(l >= r);
    }

    #[test]
    fn lemma_rejects_small_sigma() {
        assert!(lemma_gap(&[1.0], &[0.0], 1.0).is_err());
        assert!(lemma_gap(&[1.0], &[0.0, 1.0], 2.0).is_err());
    }

    #[test]
    fn lemma_handles_zero_vector() {
        let (l, r) = lemma_gap(&[0.0, 0.0], &[1.0, 1.0], 2.5).unwrap();
        assert!(l.is_finite() && r.is_finite() && l >= r);
        let (l, r) = lemma_gap(&[0.0, 0.0], &[1.0, 1.0], 1.5).unwrap();
        assert!(l.is_finite() && r.is_finite());
    }

    #[test]
    fn lemma_constant_fails_below_two() {
        // b = 0 gives lhs = |a|^σ and rhs = (4/σ²)|a|^σ, and 4/σ² > 1 for σ < 2
        let (l, r) = lemma_gap(&[1.0], &[0.0], 1.5).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
        assert!((r - 4.0 / 2.25).abs() < 1e-15);
        assert!(l < r);
    }

    #[test]
    fn zero_versus_bump_has_no_violation() {
        let domain = DomainSpec::interval(0.0, 1.0).unwrap();
        let grid = Grid::new(&domain, 64).unwrap();
        let params = ProblemParams {
            alpha: 0.5,
            beta: 0.5,
            gamma: 0.5,
            mu: 0.0,
            nu: 0.5,
            k: 1.0,
            s: 1.0,
            l: 1.0,
            q: 1.0,
            m: 2.0,
            r: 1.0,
            sigma: 2.0,
            p: 2.0,
        };
        let high = Field::from_fn(grid, |x| bump(x, 0.5, 0.3));
        let report =
            comparison_experiment(&params, &Field::zeros(grid), &high, 0.05, &SolverConfig::default()).unwrap();
        assert!(report.passed());
        assert!(report.diagnostic("raw max(u_low - u_high)").unwrap() <= 0.0);
    }

    #[test]
    fn identical_data_is_bitwise_identical() {
        let domain = DomainSpec::ball(1.0, 2).unwrap();
        let grid = Grid::new(&domain, 48).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let params = random_comparison_params(&mut rng);
        let (u, _) = random_ordered_pair(grid, &mut rng);
        let report = comparison_experiment(&params, &u, &u, 0.02, &SolverConfig::default()).unwrap();
        assert_eq!(report.diagnostic("raw max(u_low - u_high)").unwrap(), 0.0);
        assert!(report.passed());
    }

    #[test]
    fn unordered_data_is_rejected() {
        let grid = Grid::new(&DomainSpec::interval(0.0, 1.0).unwrap(), 16).unwrap();
        let high = Field::from_fn(grid, |x| bump(x, 0.5, 0.3));
        assert!(matches!(
            comparison_experiment(&ProblemParams::pure_diffusion(2.0), &high, &Field::zeros(grid), 0.1, &SolverConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn heat_pair_passes() {
        assert!(heat_comparison_suite().unwrap().passed());
    }

    #[test]
    fn lemma_suite_fails_only_below_two() {
        let r = lemma_suite(42, 2000);
        assert!(!r.passed());
        assert!(r.diagnostic("min relative gap, sigma~ >= 2").unwrap() >= -1e-12);
        assert!(r.diagnostic("min relative gap, constant 4(sigma~-1)/sigma~^2").unwrap() >= -1e-12);
        assert!(r.check("max |lhs - rhs| at sigma~ = 2").unwrap().pass);
        assert!(r.check("max relative asymmetry under a <-> b").unwrap().pass);
    }

    #[test]
    fn profile_suite_passes() {
        let r = profile_suite(7, 10, 100);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn report_digest_is_deterministic() {
        let a = lemma_suite(1, 10);
        let b = lemma_suite(1, 10);
        assert_eq!(a.inputs_digest, b.inputs_digest);
        assert_eq!(a.checks, b.checks);
        assert_ne!(a.inputs_digest, lemma_suite(2, 10).inputs_digest);
    }
}
