//! Problem parameters, domains and the regime classifier.
//!
//! The equation being modelled is
//!
//! ```text
//! u_t - div(|∇u|^{p-2} ∇u) = α|u|^{k-1}u ∫_Ω |u|^s dx - β|u|^{l-1}u|∇u|^q
//!                            + γ u^m + μ|∇u|^r - ν|u|^{σ-1}u
//! ```
//!
//! on a bounded domain with homogeneous Dirichlet data.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for the exact-equality exponent conditions of the
/// global-boundedness cases.
pub const EQUALITY_TOL: f64 = 1e-9;

/// Radius ε of the exterior anchor ball in the super-solution construction.
/// The classifier judges case (3) with this same ε.
pub const SUPERSOLUTION_EPSILON: f64 = 0.5;

/// Coefficients and exponents of the model equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemParams {
    /// Nonlocal source coefficient.
    pub alpha: f64,
    /// Gradient absorption coefficient.
    pub beta: f64,
    /// Reaction coefficient.
    pub gamma: f64,
    /// Gradient source coefficient.
    pub mu: f64,
    /// Absorption coefficient.
    pub nu: f64,
    pub k: f64,
    pub s: f64,
    pub l: f64,
    pub q: f64,
    pub m: f64,
    pub r: f64,
    pub sigma: f64,
    /// Diffusion exponent of the p-Laplacian.
    pub p: f64,
}

impl ProblemParams {
    /// Pure p-Laplacian diffusion with every source and absorption term off.
    ///
    /// `alpha = 0` falls outside the standing assumptions; such tuples are
    /// accepted by the solver (see [`validate_for_solver`]) but not by the
    /// classifier.
    pub fn pure_diffusion(p: f64) -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            mu: 0.0,
            nu: 0.0,
            k: 1.0,
            s: 1.0,
            l: 1.0,
            q: p / 2.0,
            m: 1.0,
            r: p - 1.0,
            sigma: 1.0,
            p,
        }
    }

    /// Names and values of every field, in declaration order.
    pub fn fields(&self) -> [(&'static str, f64); 13] {
        [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("mu", self.mu),
            ("nu", self.nu),
            ("k", self.k),
            ("s", self.s),
            ("l", self.l),
            ("q", self.q),
            ("m", self.m),
            ("r", self.r),
            ("sigma", self.sigma),
            ("p", self.p),
        ]
    }

    /// Sets a field by name. Returns `false` if the name is unknown.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "alpha" => &mut self.alpha,
            "beta" => &mut self.beta,
            "gamma" => &mut self.gamma,
            "mu" => &mut self.mu,
            "nu" => &mut self.nu,
            "k" => &mut self.k,
            "s" => &mut self.s,
            "l" => &mut self.l,
            "q" => &mut self.q,
            "m" => &mut self.m,
            "r" => &mut self.r,
            "sigma" => &mut self.sigma,
            "p" => &mut self.p,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// A violated standing assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Violation {
    NonFinite,
    AlphaPositive,
    LPositive,
    SigmaPositive,
    BetaNonNegative,
    NuNonNegative,
    KAtLeastOne,
    MAtLeastOne,
    SAtLeastOne,
    RAtLeastPMinusOne,
    PMinusOneAtLeastHalfP,
    QAtLeastHalfP,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Violation::NonFinite => "all fields finite violated",
            Violation::AlphaPositive => "alpha > 0 violated",
            Violation::LPositive => "l > 0 violated",
            Violation::SigmaPositive => "sigma > 0 violated",
            Violation::BetaNonNegative => "beta >= 0 violated",
            Violation::NuNonNegative => "nu >= 0 violated",
            Violation::KAtLeastOne => "k >= 1 violated",
            Violation::MAtLeastOne => "m >= 1 violated",
            Violation::SAtLeastOne => "s >= 1 violated",
            Violation::RAtLeastPMinusOne => "r >= p-1 violated",
            Violation::PMinusOneAtLeastHalfP => "p-1 >= p/2 violated",
            Violation::QAtLeastHalfP => "q >= p/2 violated",
        };
        f.write_str(s)
    }
}

/// Returns every violated standing assumption; empty means valid.
pub fn validate(params: &ProblemParams) -> Vec<Violation> {
    if params.fields().iter().any(|(_, v)| !v.is_finite()) {
        return vec![Violation::NonFinite];
    }
    let p = params.p;
    let checks = [
        (params.alpha > 0.0, Violation::AlphaPositive),
        (params.l > 0.0, Violation::LPositive),
        (params.sigma > 0.0, Violation::SigmaPositive),
        (params.beta >= 0.0, Violation::BetaNonNegative),
        (params.nu >= 0.0, Violation::NuNonNegative),
        (params.k >= 1.0, Violation::KAtLeastOne),
        (params.m >= 1.0, Violation::MAtLeastOne),
        (params.s >= 1.0, Violation::SAtLeastOne),
        (params.r >= p - 1.0, Violation::RAtLeastPMinusOne),
        (p - 1.0 >= p / 2.0, Violation::PMinusOneAtLeastHalfP),
        (params.q >= p / 2.0, Violation::QAtLeastHalfP),
    ];
    checks
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, v)| v)
        .collect()
}

/// Like [`validate`], but tolerates `alpha == 0` (nonlocal source switched
/// off), which the numerical benchmarks need.
pub fn validate_for_solver(params: &ProblemParams) -> Vec<Violation> {
    let mut v = validate(params);
    if params.alpha == 0.0 {
        v.retain(|x| *x != Violation::AlphaPositive);
    }
    v
}

/// Shape of the spatial domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// The interval (a, b).
    Interval { a: f64, b: f64 },
    /// The ball of the given radius in R^N, restricted to radial functions.
    RadialBall { radius: f64, dimension: u32 },
}

impl DomainSpec {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let d = DomainSpec::Interval { a, b };
        d.check()?;
        Ok(d)
    }

    pub fn ball(radius: f64, dimension: u32) -> Result<Self> {
        let d = DomainSpec::RadialBall { radius, dimension };
        d.check()?;
        Ok(d)
    }

    pub fn check(&self) -> Result<()> {
        match *self {
            DomainSpec::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::InvalidDomain(format!("interval requires a < b, got ({a}, {b})")));
                }
            }
            DomainSpec::RadialBall { radius, dimension } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::InvalidDomain(format!("ball radius must be positive, got {radius}")));
                }
                if dimension == 0 {
                    return Err(Error::InvalidDomain("ball dimension must be at least 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Spatial dimension N.
    pub fn dimension(&self) -> u32 {
        match *self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::RadialBall { dimension, .. } => dimension,
        }
    }

    /// Lebesgue measure |Ω|.
    pub fn measure(&self) -> f64 {
        match *self {
            DomainSpec::Interval { a, b } => b - a,
            DomainSpec::RadialBall { radius, dimension } => {
                sphere_measure(dimension) * radius.powi(dimension as i32) / dimension as f64
            }
        }
    }

    /// Diameter ρ(Ω).
    pub fn diameter(&self) -> f64 {
        match *self {
            DomainSpec::Interval { a, b } => b - a,
            DomainSpec::RadialBall { radius, .. } => 2.0 * radius,
        }
    }

    /// Centroid in the grid coordinate (x for intervals, the origin for balls).
    pub fn centroid(&self) -> f64 {
        match *self {
            DomainSpec::Interval { a, b } => 0.5 * (a + b),
            DomainSpec::RadialBall { .. } => 0.0,
        }
    }

    /// Radius of the largest ball centred at the centroid that fits in Ω.
    pub fn inradius(&self) -> f64 {
        match *self {
            DomainSpec::Interval { a, b } => 0.5 * (b - a),
            DomainSpec::RadialBall { radius, .. } => radius,
        }
    }
}

/// Surface measure of the unit sphere S^{N-1} in R^N, 2π^{N/2}/Γ(N/2).
///
/// For N = 1 this is 2 (the two endpoints), so radial integrals over a
/// one-dimensional "ball" cover the whole symmetric interval.
pub fn sphere_measure(n: u32) -> f64 {
    assert!(n >= 1, "sphere_measure needs N >= 1");
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

// Γ(n/2) for positive integers n.
fn gamma_half_integer(n: u32) -> f64 {
    let (mut g, mut x) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Which existence theorem a hypothesis belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    BlowUp,
    Global,
}

/// One evaluated hypothesis. `margin` is positive when it holds with room
/// to spare; for equality conditions it is the negated absolute gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub theorem: Theorem,
    pub name: String,
    pub holds: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeTag {
    BlowUpPredicted,
    GlobalPredicted,
    Unknown,
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegimeTag::BlowUpPredicted => "BlowUpPredicted",
            RegimeTag::GlobalPredicted => "GlobalPredicted",
            RegimeTag::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

/// Which of the three global-boundedness cases applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalCase {
    /// q+l > max{p-1, k+s}.
    DominantAbsorption,
    /// q+l = k+s > p-1 with |Ω| (or α) small.
    BalancedSmallDomain,
    /// q+l = p-1 > k+s with β large.
    BalancedLargeBeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub tag: RegimeTag,
    /// Set when `tag` is `GlobalPredicted`.
    pub global_case: Option<GlobalCase>,
    pub reasons: Vec<HypothesisCheck>,
}

impl RegimeVerdict {
    pub fn checks_for(&self, theorem: Theorem) -> impl Iterator<Item = &HypothesisCheck> {
        self.reasons.iter().filter(move |c| c.theorem == theorem)
    }
}

fn strict(theorem: Theorem, name: &str, lhs: f64, rhs: f64) -> HypothesisCheck {
    HypothesisCheck {
        theorem,
        name: name.to_string(),
        holds: lhs > rhs,
        margin: lhs - rhs,
    }
}

fn at_least(theorem: Theorem, name: &str, lhs: f64, rhs: f64) -> HypothesisCheck {
    HypothesisCheck {
        theorem,
        name: name.to_string(),
        holds: lhs >= rhs,
        margin: lhs - rhs,
    }
}

fn approx_eq(theorem: Theorem, name: &str, lhs: f64, rhs: f64) -> HypothesisCheck {
    let gap = (lhs - rhs).abs();
    HypothesisCheck {
        theorem,
        name: name.to_string(),
        holds: gap <= EQUALITY_TOL,
        margin: -gap,
    }
}

fn all_hold(checks: &[HypothesisCheck]) -> bool {
    checks.iter().all(|c| c.holds)
}

/// Hypotheses of the finite-time blow-up theorem.
pub fn blowup_hypotheses(params: &ProblemParams) -> Vec<HypothesisCheck> {
    let t = Theorem::BlowUp;
    let ProblemParams { gamma, k, s, l, q, m, r, sigma, p, .. } = *params;
    vec![
        strict(t, "gamma > 0", gamma, 0.0),
        strict(t, "m > max{p-1, r, sigma}", m, (p - 1.0).max(r).max(sigma)),
        strict(t, "q+l > 1", q + l, 1.0),
        strict(t, "k+s > max{p-1, q+l, r}", k + s, (p - 1.0).max(q + l).max(r)),
        at_least(t, "k >= 1", k, 1.0),
        at_least(t, "s >= 1", s, 1.0),
        at_least(t, "q >= p/2", q, p / 2.0),
    ]
}

/// The constant C = e^{s(ρ(Ω)+1)} bounding ∫_Ω e^{sρ̃} dx / |Ω|.
pub fn supersolution_c(params: &ProblemParams, domain: &DomainSpec) -> f64 {
    (params.s * (domain.diameter() + 1.0)).exp()
}

/// Hypotheses of the global-boundedness theorem. The three case records
/// come last; at least one of them must hold.
pub fn global_hypotheses(params: &ProblemParams, domain: &DomainSpec) -> Vec<HypothesisCheck> {
    let t = Theorem::Global;
    let ProblemParams { alpha, beta, gamma, mu, nu, k, s, l, q, m, sigma, p, .. } = *params;
    let n = domain.dimension() as f64;
    let measure = domain.measure();
    let c = supersolution_c(params, domain);

    let mut out = vec![
        HypothesisCheck { theorem: t, name: "mu = 0".into(), holds: mu == 0.0, margin: -mu.abs() },
        strict(t, "sigma > m", sigma, m),
        strict(t, "beta > 0", beta, 0.0),
        at_least(t, "k >= 1", k, 1.0),
        at_least(t, "s >= 1", s, 1.0),
        at_least(t, "q >= p/2", q, p / 2.0),
    ];
    if gamma > 0.0 {
        out.push(strict(t, "nu > 0 (gamma > 0)", nu, 0.0));
    }

    let ql = q + l;
    let ks = k + s;
    let case1 = strict(t, "case 1: q+l > max{p-1, k+s}", ql, (p - 1.0).max(ks));

    let eq2 = approx_eq(t, "", ql, ks);
    let gt2 = ks > p - 1.0;
    let small = beta / (2.0 * alpha * c) - measure;
    let case2 = HypothesisCheck {
        theorem: t,
        name: "case 2: q+l = k+s > p-1, |Omega| <= beta/(2 alpha C)".into(),
        holds: eq2.holds && gt2 && small >= 0.0,
        margin: if eq2.holds && gt2 { small } else { eq2.margin.min(ks - (p - 1.0)) },
    };

    let eq3 = approx_eq(t, "", ql, p - 1.0);
    let gt3 = p - 1.0 > ks;
    let beta_needed = 2.0 * ((n - 1.0) / SUPERSOLUTION_EPSILON + (p - 1.0));
    let large = beta - beta_needed;
    let case3 = HypothesisCheck {
        theorem: t,
        name: "case 3: q+l = p-1 > k+s, beta >= 2((N-1)/eps + p-1)".into(),
        holds: eq3.holds && gt3 && large >= 0.0,
        margin: if eq3.holds && gt3 { large } else { eq3.margin.min(p - 1.0 - ks) },
    };

    out.extend([case1, case2, case3]);
    out
}

/// Classifies a valid parameter tuple into its predicted regime.
///
/// The blow-up hypotheses are checked first; the two regimes cannot overlap
/// (they disagree on the ordering of m and σ) but the order keeps the
/// result deterministic.
pub fn classify_regime(params: &ProblemParams, domain: &DomainSpec) -> Result<RegimeVerdict> {
    let violations = validate(params);
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }
    domain.check()?;

    let blowup = blowup_hypotheses(params);
    let global = global_hypotheses(params, domain);

    let (tag, global_case) = if all_hold(&blowup) {
        (RegimeTag::BlowUpPredicted, None)
    } else {
        let n_cases = 3;
        let (mandatory, cases) = global.split_at(global.len() - n_cases);
        let chosen = cases.iter().position(|c| c.holds).map(|i| match i {
            0 => GlobalCase::DominantAbsorption,
            1 => GlobalCase::BalancedSmallDomain,
            _ => GlobalCase::BalancedLargeBeta,
        });
        match (all_hold(mandatory), chosen) {
            (true, Some(case)) => (RegimeTag::GlobalPredicted, Some(case)),
            _ => (RegimeTag::Unknown, None),
        }
    };

    let mut reasons = blowup;
    reasons.extend(global);
    Ok(RegimeVerdict { tag, global_case, reasons })
}
