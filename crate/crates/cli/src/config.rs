use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use plap_core::analytic::{build_subsolution, eval_subsolution, SubMargins, SubSolutionSpec};
use plap_core::harness::bump;
use plap_core::solver::{Field, Grid, SolverConfig};
use plap_core::{DomainSpec, ProblemParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemParams,
    pub domain: DomainSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `amplitude · (1 - (d/width)²)²` centred in the domain.
    Bump { amplitude: f64, width: f64 },
    /// A multiple of the blow-up sub-solution at its starting time.
    AnalyticSub { multiplier: f64 },
    /// Nodal values read from a two-column `x,u` CSV with a header line.
    /// Relative paths are resolved against the config file's directory.
    Table { path: PathBuf },
    /// First Dirichlet mode scaled by `amplitude`.
    Sine { amplitude: f64 },
}

/// Solver settings plus the grid size. Snapshot cadence lives in `output`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub n_grid: usize,
    pub eps_reg: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub safety: f64,
    pub t_max: f64,
    pub blowup_threshold: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            n_grid: 200,
            eps_reg: d.eps_reg,
            dt_init: d.dt_init,
            dt_min: d.dt_min,
            safety: d.safety,
            t_max: d.t_max,
            blowup_threshold: d.blowup_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Snapshot every `cadence` accepted steps; 0 writes none.
    pub cadence: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), cadence: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<SweepAxis>,
    /// Also run the solver on each valid tuple.
    #[serde(default)]
    pub solve: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            eps_reg: s.eps_reg,
            dt_init: s.dt_init,
            dt_min: s.dt_min,
            safety: s.safety,
            t_max: s.t_max,
            blowup_threshold: s.blowup_threshold,
            snapshot_every: self.output.cadence,
        }
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(&self.domain, self.solver.n_grid)?)
    }
}

/// Initial field and, for analytic data, the sub-solution it came from.
pub fn initial_field(
    cfg: &RunConfig,
    params: &ProblemParams,
    base: &Path,
) -> Result<(Field, Option<SubSolutionSpec>), CliError> {
    let grid = cfg.grid()?;
    let domain = &cfg.domain;
    let field = match &cfg.initial {
        InitialSpec::Bump { amplitude, width } => {
            if !(*width > 0.0) {
                return Err(CliError::Config(format!("initial.width must be positive, got {width}")));
            }
            let c = domain.centroid();
            Field::from_fn(grid, |x| amplitude * bump(x, c, *width))
        }
        InitialSpec::Sine { amplitude } => match *domain {
            DomainSpec::Interval { a, b } => Field::from_fn(grid, |x| amplitude * (PI * (x - a) / (b - a)).sin()),
            DomainSpec::RadialBall { radius, .. } => {
                Field::from_fn(grid, |x| amplitude * (0.5 * PI * x / radius).cos())
            }
        },
        InitialSpec::AnalyticSub { multiplier } => {
            let spec = build_subsolution(params, domain, SubMargins::default())?;
            let field = Field::from_fn(grid, |x| multiplier * eval_subsolution(&spec, x, spec.t0).unwrap_or(0.0));
            return Ok((field, Some(spec)));
        }
        InitialSpec::Table { path } => {
            let full = if path.is_absolute() { path.clone() } else { base.join(path) };
            let values = read_table(&full)?;
            let mut field = Field::from_values(grid, values)?;
            field.apply_boundary();
            field
        }
    };
    Ok((field, None))
}

fn read_table(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read table {}: {e}", path.display())))?;
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .nth(1)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("{}: bad row {}", path.display(), i + 2)))
        })
        .collect()
}
