//! Method-of-lines solver: flux-form finite differences in space, adaptive
//! forward Euler in time.

use serde::{Deserialize, Serialize};

use crate::blowup::{estimate_blowup_time, BlowupFit};
use crate::error::{Error, Result};
use crate::model::{sphere_measure, DomainSpec, ProblemParams};

/// Smallest admissible number of grid intervals.
pub const MIN_INTERVALS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Interval,
    /// Radial coordinate of an N-ball; node 0 is the origin.
    Radial { dimension: u32 },
}

/// Uniform grid with nodes x_0 < … < x_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub geometry: Geometry,
    pub start: f64,
    pub h: f64,
    /// Number of intervals; there are `n + 1` nodes.
    pub n: usize,
}

impl Grid {
    pub fn new(domain: &DomainSpec, n: usize) -> Result<Self> {
        domain.check()?;
        if n < MIN_INTERVALS {
            return Err(Error::InvalidArgument(format!("grid needs at least {MIN_INTERVALS} intervals, got {n}")));
        }
        Ok(match *domain {
            DomainSpec::Interval { a, b } => Grid {
                geometry: Geometry::Interval,
                start: a,
                h: (b - a) / n as f64,
                n,
            },
            DomainSpec::RadialBall { radius, dimension } => Grid {
                geometry: Geometry::Radial { dimension },
                start: 0.0,
                h: radius / n as f64,
                n,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + self.h * i as f64
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Indices carrying the Dirichlet condition.
    fn is_boundary(&self, i: usize) -> bool {
        match self.geometry {
            Geometry::Interval => i == 0 || i == self.n,
            Geometry::Radial { .. } => i == self.n,
        }
    }

    /// Trapezoidal quadrature weights including the radial measure.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![self.h; self.len()];
        w[0] *= 0.5;
        w[self.n] *= 0.5;
        if let Geometry::Radial { dimension } = self.geometry {
            let surf = sphere_measure(dimension);
            for (i, wi) in w.iter_mut().enumerate() {
                *wi *= surf * self.x(i).powi(dimension as i32 - 1);
            }
        }
        w
    }

    // Factor multiplying h^-2 in the worst-case stencil weight; the radial
    // origin row is 2N/h^2.
    fn stencil_factor(&self) -> f64 {
        match self.geometry {
            Geometry::Interval => 1.0,
            Geometry::Radial { dimension } => dimension as f64,
        }
    }
}

/// Nodal values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Samples `f` at the nodes and imposes the Dirichlet condition.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let mut field = Self { grid, values: grid.coords().into_iter().map(f).collect() };
        field.apply_boundary();
        field
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} nodal values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn apply_boundary(&mut self) {
        let n = self.grid.n;
        self.values[n] = 0.0;
        if self.grid.geometry == Geometry::Interval {
            self.values[0] = 0.0;
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, u)| w * u * u)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// ε in the regularized flux (g² + ε²)^{(p-2)/2} g.
    pub eps_reg: f64,
    /// Largest step the controller will take.
    pub dt_init: f64,
    pub dt_min: f64,
    pub safety: f64,
    pub t_max: f64,
    /// Sup-norm at which a run is declared to blow up.
    pub blowup_threshold: f64,
    /// Keep a snapshot every this many accepted steps; 0 disables snapshots.
    pub snapshot_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_reg: 1e-8,
            dt_init: 1e-2,
            dt_min: 1e-14,
            safety: 0.4,
            t_max: 1.0,
            blowup_threshold: 1e8,
            snapshot_every: 0,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("eps_reg", self.eps_reg),
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("safety", self.safety),
            ("t_max", self.t_max),
            ("blowup_threshold", self.blowup_threshold),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("solver.{name} must be positive, got {v}")));
            }
        }
        if self.dt_min >= self.dt_init {
            return Err(Error::InvalidArgument("solver.dt_min must be below solver.dt_init".into()));
        }
        Ok(())
    }
}

fn signed_pow(u: f64, e: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.signum() * u.abs().powf(e)
    }
}

fn flux_weight(g: f64, p: f64, eps: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else {
        (g * g + eps * eps).powf(0.5 * (p - 2.0))
    }
}

/// Discrete div(|∇u|^{p-2}∇u), zero at Dirichlet nodes.
pub fn plap_operator(u: &Field, p: f64, eps_reg: f64) -> Field {
    let grid = u.grid;
    let (n, h) = (grid.n, grid.h);
    let vals = &u.values;
    // flux[i] lives on the face between nodes i and i+1
    let flux: Vec<f64> = (0..n)
        .map(|i| {
            let d = (vals[i + 1] - vals[i]) / h;
            flux_weight(d, p, eps_reg) * d
        })
        .collect();

    let mut out = vec![0.0; grid.len()];
    match grid.geometry {
        Geometry::Interval => {
            for i in 1..n {
                out[i] = (flux[i] - flux[i - 1]) / h;
            }
        }
        Geometry::Radial { dimension } => {
            let e = dimension as i32 - 1;
            // symmetric limit N·dF/dρ at the origin with F(-h/2) = -F(h/2)
            out[0] = 2.0 * dimension as f64 * flux[0] / h;
            for i in 1..n {
                let right = (grid.x(i) + 0.5 * h).powi(e);
                let left = (grid.x(i) - 0.5 * h).powi(e);
                out[i] = (right * flux[i] - left * flux[i - 1]) / (h * grid.x(i).powi(e));
            }
        }
    }
    Field { grid, values: out }
}

/// ∫_Ω |u|^s dx by the trapezoidal rule.
pub fn nonlocal_integral(u: &Field, s: f64) -> f64 {
    u.grid
        .weights()
        .iter()
        .zip(&u.values)
        .map(|(w, v)| w * v.abs().powf(s))
        .sum()
}

/// |∇u| at each node: central differences inside, one-sided at the ends,
/// zero at the radial origin.
pub fn gradient_magnitude(u: &Field) -> Vec<f64> {
    let grid = u.grid;
    let (n, h) = (grid.n, grid.h);
    let v = &u.values;
    let mut g = vec![0.0; grid.len()];
    for i in 1..n {
        g[i] = ((v[i + 1] - v[i - 1]) / (2.0 * h)).abs();
    }
    g[n] = ((v[n] - v[n - 1]) / h).abs();
    g[0] = match grid.geometry {
        Geometry::Interval => ((v[1] - v[0]) / h).abs(),
        Geometry::Radial { .. } => 0.0,
    };
    g
}

/// Semi-discrete right-hand side du/dt, zero at Dirichlet nodes.
pub fn rhs(u: &Field, params: &ProblemParams, eps_reg: f64) -> Field {
    rhs_with_integral(u, params, eps_reg, nonlocal_integral(u, params.s))
}

fn rhs_with_integral(u: &Field, params: &ProblemParams, eps_reg: f64, integral: f64) -> Field {
    let mut out = plap_operator(u, params.p, eps_reg);
    let grad = gradient_magnitude(u);
    let ProblemParams { alpha, beta, gamma, mu, nu, k, l, q, m, r, sigma, .. } = *params;
    for (i, (o, &ui)) in out.values.iter_mut().zip(&u.values).enumerate() {
        if u.grid.is_boundary(i) {
            *o = 0.0;
            continue;
        }
        let g = grad[i];
        let mut src = 0.0;
        if alpha != 0.0 {
            src += alpha * signed_pow(ui, k) * integral;
        }
        if beta != 0.0 {
            src -= beta * signed_pow(ui, l) * g.powf(q);
        }
        if gamma != 0.0 {
            src += gamma * signed_pow(ui, m);
        }
        if mu != 0.0 {
            src += mu * g.powf(r);
        }
        if nu != 0.0 {
            src -= nu * signed_pow(ui, sigma);
        }
        *o += src;
    }
    out
}

// Lipschitz bound of the zeroth-order terms at amplitude `c`, by a one-sided
// difference of each term's magnitude (the nonlocal factor scales as c^s).
fn reaction_lipschitz(params: &ProblemParams, c: f64, integral: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let eta = 1e-6;
    let c2 = c * (1.0 + eta);
    let terms = |x: f64| {
        [
            params.alpha * x.powf(params.k) * integral * (x / c).powf(params.s),
            params.gamma * x.powf(params.m),
            params.nu * x.powf(params.sigma),
        ]
    };
    let (a, b) = (terms(c), terms(c2));
    a.iter().zip(b.iter()).map(|(lo, hi)| ((hi - lo) / (c2 - c)).abs()).sum()
}

/// Step size proposed by the controller for the current state, before
/// clipping to `t_max` and rejection.
pub fn propose_dt(u: &Field, params: &ProblemParams, cfg: &SolverConfig) -> f64 {
    let grid = u.grid;
    let h = grid.h;
    let p = params.p;
    let max_phi = u
        .values
        .windows(2)
        .map(|w| flux_weight((w[1] - w[0]) / h, p, cfg.eps_reg))
        .fold(0.0f64, f64::max);
    let diffusion_dt = h * h / (2.0 * grid.stencil_factor() * max_phi * (p - 1.0) * (1.0 + cfg.eps_reg));
    let integral = nonlocal_integral(u, params.s);
    let lambda = reaction_lipschitz(params, u.sup_norm(), integral);
    let dt = cfg.safety * diffusion_dt.min(1.0 / (1.0 + lambda));
    dt.min(cfg.dt_init)
}

/// One forward Euler step with a fixed `dt`; returns `None` if the result is
/// rejected (non-finite, or a nodal change above 0.5·(1+‖u‖∞)).
pub fn try_step(u: &Field, params: &ProblemParams, eps_reg: f64, dt: f64) -> Option<Field> {
    let f = rhs(u, params, eps_reg);
    let limit = 0.5 * (1.0 + u.sup_norm());
    let mut next = u.clone();
    for (x, df) in next.values.iter_mut().zip(&f.values) {
        let du = dt * df;
        if !du.is_finite() || du.abs() > limit {
            return None;
        }
        *x += du;
    }
    next.apply_boundary();
    Some(next)
}

/// Advances `u` from time `t` by one accepted step.
pub fn step(u: &Field, params: &ProblemParams, cfg: &SolverConfig, t: f64) -> Result<(Field, f64)> {
    let dt = propose_dt(u, params, cfg).min(cfg.t_max - t);
    step_from(u, params, cfg, t, dt)
}

/// Tries `dt`, halving on rejection until it drops below `dt_min`.
pub fn step_from(
    u: &Field,
    params: &ProblemParams,
    cfg: &SolverConfig,
    t: f64,
    mut dt: f64,
) -> Result<(Field, f64)> {
    loop {
        if dt < cfg.dt_min {
            return Err(Error::DtUnderflow { t, dt });
        }
        if let Some(next) = try_step(u, params, cfg.eps_reg, dt) {
            return Ok((next, dt));
        }
        dt *= 0.5;
    }
}

/// Rounds `t` to `end` when it falls within floating-point noise of it, so
/// a run never needs a final step shorter than `dt_min`.
pub fn snap_to_end(t: f64, end: f64) -> f64 {
    if t >= end || end - t <= 1e-12 * end.abs().max(1.0) {
        end
    } else {
        t
    }
}

/// One row of the run time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub nonlocal_integral: f64,
    /// Step that produced this row; 0 for the initial row.
    pub dt: f64,
}

impl SeriesRow {
    pub fn of(u: &Field, s: f64, t: f64, dt: f64) -> Self {
        Self {
            t,
            sup_norm: u.sup_norm(),
            l2_norm: u.l2_norm(),
            nonlocal_integral: nonlocal_integral(u, s),
            dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlowUp { t_est: f64, fit: BlowupFit },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<Snapshot>,
    pub final_field: Field,
}

/// Control returned by a run observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observe {
    Continue,
    Stop,
}

/// Integrates from `u0` until `t_max`, blow-up or failure.
pub fn run(u0: &Field, params: &ProblemParams, cfg: &SolverConfig) -> RunOutcome {
    run_observed(u0, params, cfg, |_, _| Observe::Continue)
}

/// As [`run`], calling `observe(t, u)` on the initial state and after every
/// accepted step. Returning [`Observe::Stop`] ends the run as `Completed`.
pub fn run_observed(
    u0: &Field,
    params: &ProblemParams,
    cfg: &SolverConfig,
    mut observe: impl FnMut(f64, &Field) -> Observe,
) -> RunOutcome {
    let mut u = u0.clone();
    u.apply_boundary();
    let mut t = 0.0;
    let mut series = vec![SeriesRow::of(&u, params.s, t, 0.0)];
    let mut snapshots = Vec::new();
    let mut steps = 0usize;
    let snap = |steps: usize, t: f64, u: &Field, out: &mut Vec<Snapshot>| {
        if cfg.snapshot_every > 0 && steps.is_multiple_of(cfg.snapshot_every) {
            out.push(Snapshot { step: steps, t, values: u.values.clone() });
        }
    };
    snap(0, t, &u, &mut snapshots);

    let finish = |status, series, snapshots, u| RunOutcome { status, series, snapshots, final_field: u };

    if let Err(e) = cfg.check() {
        return finish(RunStatus::Failed { reason: e.to_string() }, series, snapshots, u);
    }
    if !u.is_finite() {
        return finish(RunStatus::Failed { reason: "initial data not finite".into() }, series, snapshots, u);
    }
    if observe(t, &u) == Observe::Stop {
        return finish(RunStatus::Completed, series, snapshots, u);
    }

    while t < cfg.t_max {
        let (next, dt) = match step(&u, params, cfg, t) {
            Ok(x) => x,
            Err(e) => return finish(RunStatus::Failed { reason: e.to_string() }, series, snapshots, u),
        };
        let t_next = snap_to_end(t + dt, cfg.t_max);
        if t_next <= t {
            let reason = format!("time stalled at t = {t}");
            return finish(RunStatus::Failed { reason }, series, snapshots, u);
        }
        u = next;
        t = t_next;
        steps += 1;
        let row = SeriesRow::of(&u, params.s, t, dt);
        series.push(row);
        snap(steps, t, &u, &mut snapshots);

        let stop = observe(t, &u) == Observe::Stop;
        if row.sup_norm >= cfg.blowup_threshold {
            let fit = estimate_blowup_time(&series);
            return finish(RunStatus::BlowUp { t_est: fit.t_blowup, fit }, series, snapshots, u);
        }
        if stop {
            break;
        }
    }
    finish(RunStatus::Completed, series, snapshots, u)
}
