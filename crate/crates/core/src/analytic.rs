//! Explicit comparison functions.
//!
//! The blow-up sub-solution is the self-similar function
//!
//! ```text
//! v(x, t) = (1-δt)^{-k̃} V(|x - x_c| (1-δt)^{-r̃}),
//! V(y)    = 1 + A/λ - y^λ / (λ A^{λ-1}),   λ = p/(p-1),
//! ```
//!
//! clamped to zero beyond the root R of V. The global super-solution is
//! `L e^{|x - x_a|}` with the anchor `x_a` outside the domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    classify_regime, sphere_measure, supersolution_c, DomainSpec, GlobalCase, ProblemParams,
    RegimeTag, SUPERSOLUTION_EPSILON,
};
use crate::quadrature::adaptive_simpson;

const QUAD_TOL: f64 = 1e-10;

/// Number of spatial samples (in the similarity variable) used by the t₀ search.
pub const T0_SPACE_POINTS: usize = 201;
/// Number of time samples used by the t₀ search.
pub const T0_TIME_POINTS: usize = 101;
/// The time samples cover 1-δt from 1-δt₀ down to this fraction of it.
pub const T0_TIME_SPAN: f64 = 1e-8;
/// Smallest 1-δt₀ the search will accept.
const MIN_TAU0: f64 = 1e-12;

/// Value and slope of the profile V at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub value: f64,
    pub slope: f64,
}

/// Root R of the profile, `(A^{λ-1}(A+λ))^{1/λ}`.
pub fn profile_root(a: f64, lambda: f64) -> f64 {
    (a.powf(lambda - 1.0) * (a + lambda)).powf(1.0 / lambda)
}

/// Evaluates V and V′ at `y`, both zero at and beyond the root.
pub fn eval_profile(y: f64, a: f64, lambda: f64) -> ProfilePoint {
    debug_assert!(a > 0.0 && lambda > 1.0 && y >= 0.0);
    let raw = 1.0 + a / lambda - y.powf(lambda) / (lambda * a.powf(lambda - 1.0));
    if raw <= 0.0 {
        return ProfilePoint { value: 0.0, slope: 0.0 };
    }
    ProfilePoint {
        value: raw,
        slope: -(y / a).powf(lambda - 1.0),
    }
}

/// V″ on the open support (0, R).
pub fn profile_curvature(y: f64, a: f64, lambda: f64) -> f64 {
    -(lambda - 1.0) / a * (y / a).powf(lambda - 2.0)
}

/// Outcome of the r̃ selection, with every candidate bound kept for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtildeSelection {
    pub bound_q: f64,
    /// `None` when p(k+s-1) + N(p-2) <= 0.
    pub bound_p: Option<f64>,
    /// `None` when r(k+s-1) + N(r-1) <= 0.
    pub bound_r: Option<f64>,
    pub r_tilde: f64,
    /// False when the chosen value sits on the bound instead of below it.
    pub strict: bool,
}

/// Picks r̃ as `margin` times the smallest applicable bound.
pub fn select_rtilde(params: &ProblemParams, dimension: u32, margin: f64) -> Result<RtildeSelection> {
    if !(margin > 0.0 && margin <= 1.0) {
        return Err(Error::InvalidArgument(format!("r~ margin must lie in (0, 1], got {margin}")));
    }
    let n = dimension as f64;
    let ProblemParams { k, s, l, q, r, p, .. } = *params;
    let ks1 = k + s - 1.0;

    let bound_q = (k + s - l - q) / (q * ks1 + n * (l + q - 1.0));
    let den_p = p * ks1 + n * (p - 2.0);
    let bound_p = (den_p > 0.0).then(|| (k + s + 1.0 - p) / den_p);
    let den_r = r * ks1 + n * (r - 1.0);
    let bound_r = (den_r > 0.0).then(|| (k + s - r) / den_r);

    let min_bound = [Some(bound_q), bound_p, bound_r]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min);
    let r_tilde = margin * min_bound;
    if !(r_tilde > 0.0 && r_tilde.is_finite()) {
        return Err(Error::Precondition(format!(
            "r~ = {r_tilde} is not positive; the blow-up exponent hypotheses do not hold"
        )));
    }
    Ok(RtildeSelection {
        bound_q,
        bound_p,
        bound_r,
        r_tilde,
        strict: margin < 1.0,
    })
}

/// Multipliers turning the strict inequalities of the construction into values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubMargins {
    /// r̃ as a fraction of its upper bound.
    pub r_tilde: f64,
    /// A as a multiple of its lower bound k̃/r̃.
    pub a: f64,
    /// δ as a fraction of its upper bound.
    pub delta: f64,
}

impl Default for SubMargins {
    fn default() -> Self {
        Self { r_tilde: 0.9, a: 2.0, delta: 0.5 }
    }
}

/// Constants of the self-similar blow-up sub-solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSolutionSpec {
    pub dimension: u32,
    pub lambda: f64,
    pub r_tilde: f64,
    pub k_tilde: f64,
    pub a: f64,
    pub delta: f64,
    /// Root of the profile.
    pub support_radius: f64,
    /// ∫_{B(0,R)} V^s.
    pub profile_mass: f64,
    pub t0: f64,
    /// Grid coordinate of the centre.
    pub center: f64,
    pub rtilde_selection: RtildeSelection,
}

impl SubSolutionSpec {
    /// 1/δ, the blow-up time of v.
    pub fn blowup_time(&self) -> f64 {
        1.0 / self.delta
    }

    /// Radius of supp v(·, t).
    pub fn support_radius_at(&self, t: f64) -> f64 {
        self.support_radius * (1.0 - self.delta * t).powf(self.r_tilde)
    }

    /// The four exponents that must be positive for the residual bound to
    /// improve as t → 1/δ:
    /// 1+k̃-r̃-(k̃+r̃)(p-1), k̃+1-r(k̃+r̃), k̃+1-k̃σ, k̃+1-lk̃-q(k̃+r̃).
    pub fn exponent_margins(&self, params: &ProblemParams) -> [f64; 4] {
        let (kt, rt) = (self.k_tilde, self.r_tilde);
        [
            1.0 + kt - rt - (kt + rt) * (params.p - 1.0),
            kt + 1.0 - params.r * (kt + rt),
            kt + 1.0 - kt * params.sigma,
            kt + 1.0 - params.l * kt - params.q * (kt + rt),
        ]
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let tau = 1.0 - self.delta * t;
        if !(tau > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "t = {t} is not below the blow-up time {}",
                self.blowup_time()
            )));
        }
        Ok(tau)
    }
}

/// v(x, t), zero outside the support ball.
pub fn eval_subsolution(spec: &SubSolutionSpec, x: f64, t: f64) -> Result<f64> {
    let tau = spec.check_time(t)?;
    let y = (x - spec.center).abs() * tau.powf(-spec.r_tilde);
    Ok(tau.powf(-spec.k_tilde) * eval_profile(y, spec.a, spec.lambda).value)
}

/// Signed contributions to a residual, kept separate so a tolerance can be
/// scaled by the largest of them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualTerms {
    /// v_t.
    pub time_derivative: f64,
    /// -Δ_p v.
    pub diffusion: f64,
    /// -α v^k ∫ v^s.
    pub nonlocal_source: f64,
    /// +β v^l |∇v|^q.
    pub gradient_absorption: f64,
    /// -γ v^m.
    pub reaction: f64,
    /// -μ |∇v|^r.
    pub gradient_source: f64,
    /// +ν v^σ.
    pub absorption: f64,
}

impl ResidualTerms {
    fn parts(&self) -> [f64; 7] {
        [
            self.time_derivative,
            self.diffusion,
            self.nonlocal_source,
            self.gradient_absorption,
            self.reaction,
            self.gradient_source,
            self.absorption,
        ]
    }

    pub fn value(&self) -> f64 {
        self.parts().iter().sum()
    }

    /// Largest magnitude among the individual terms.
    pub fn scale(&self) -> f64 {
        self.parts().iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Closed-form sub-solution constants that do not depend on t₀.
#[derive(Debug, Clone, Copy)]
struct SelfSimilar {
    n: f64,
    lambda: f64,
    r_tilde: f64,
    k_tilde: f64,
    a: f64,
    delta: f64,
    root: f64,
    mass: f64,
}

impl SelfSimilar {
    fn from_spec(spec: &SubSolutionSpec) -> Self {
        Self {
            n: spec.dimension as f64,
            lambda: spec.lambda,
            r_tilde: spec.r_tilde,
            k_tilde: spec.k_tilde,
            a: spec.a,
            delta: spec.delta,
            root: spec.support_radius,
            mass: spec.profile_mass,
        }
    }

    /// Residual at similarity variable `y` and τ = 1-δt, valid while the
    /// support ball lies inside the domain.
    fn residual(&self, params: &ProblemParams, y: f64, tau: f64) -> ResidualTerms {
        if y >= self.root {
            return ResidualTerms::default();
        }
        let ProfilePoint { value, slope } = eval_profile(y, self.a, self.lambda);
        let (kt, rt) = (self.k_tilde, self.r_tilde);
        let p = params.p;

        let v = tau.powf(-kt) * value;
        let grad = tau.powf(-kt - rt) * slope.abs();
        let v_t = self.delta * tau.powf(-kt - 1.0) * (kt * value + rt * y * slope);
        // radial p-Laplacian of the profile is the constant -N/A
        let plap = -self.n / self.a * tau.powf(-(kt + rt) * (p - 1.0) - rt);
        let integral = self.mass * tau.powf(self.n * rt - kt * params.s);

        ResidualTerms {
            time_derivative: v_t,
            diffusion: -plap,
            nonlocal_source: -params.alpha * v.powf(params.k) * integral,
            gradient_absorption: params.beta * v.powf(params.l) * grad.powf(params.q),
            reaction: -params.gamma * v.powf(params.m),
            gradient_source: -params.mu * grad.powf(params.r),
            absorption: params.nu * v.powf(params.sigma),
        }
    }

    /// True when the residual is nonpositive (to relative tolerance) on the
    /// full certification grid starting at τ₀.
    fn certified_from(&self, params: &ProblemParams, tau0: f64) -> bool {
        for j in 0..T0_TIME_POINTS {
            let frac = j as f64 / (T0_TIME_POINTS - 1) as f64;
            let tau = tau0 * T0_TIME_SPAN.powf(frac);
            for i in 0..T0_SPACE_POINTS {
                let y = self.root * i as f64 / T0_SPACE_POINTS as f64;
                let terms = self.residual(params, y, tau);
                if terms.value() > residual_tolerance(&terms) {
                    return false;
                }
            }
        }
        true
    }
}

/// Tolerance applied to a residual certificate, 1e-9·max(1, scale).
pub fn residual_tolerance(terms: &ResidualTerms) -> f64 {
    1e-9 * terms.scale().max(1.0)
}

/// P(v)(x, t), the pointwise residual of the sub-solution. Zero outside the
/// support; `t` must be below 1/δ.
pub fn subsolution_residual(
    spec: &SubSolutionSpec,
    params: &ProblemParams,
    x: f64,
    t: f64,
) -> Result<ResidualTerms> {
    let tau = spec.check_time(t)?;
    let y = (x - spec.center).abs() * tau.powf(-spec.r_tilde);
    Ok(SelfSimilar::from_spec(spec).residual(params, y, tau))
}

/// ∫_{B(0,R)} V^s over the N-dimensional ball.
pub fn profile_mass(a: f64, lambda: f64, s: f64, dimension: u32) -> f64 {
    let root = profile_root(a, lambda);
    let n = dimension as i32;
    let radial = adaptive_simpson(
        &|y: f64| eval_profile(y, a, lambda).value.powf(s) * y.powi(n - 1),
        0.0,
        root,
        QUAD_TOL,
    );
    sphere_measure(dimension) * radial
}

/// Builds the blow-up sub-solution for a tuple in the blow-up regime.
pub fn build_subsolution(
    params: &ProblemParams,
    domain: &DomainSpec,
    margins: SubMargins,
) -> Result<SubSolutionSpec> {
    let verdict = classify_regime(params, domain)?;
    if verdict.tag != RegimeTag::BlowUpPredicted {
        let failing: Vec<_> = verdict
            .reasons
            .iter()
            .filter(|c| c.theorem == crate::model::Theorem::BlowUp && !c.holds)
            .map(|c| c.name.clone())
            .collect();
        return Err(Error::Precondition(format!(
            "parameters are not in the blow-up regime (failing: {})",
            failing.join("; ")
        )));
    }
    if !(margins.a > 1.0) || !(margins.delta > 0.0 && margins.delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "margins must satisfy a > 1 and 0 < delta < 1, got {margins:?}"
        )));
    }

    let dimension = domain.dimension();
    let n = dimension as f64;
    let lambda = params.p / (params.p - 1.0);
    let selection = select_rtilde(params, dimension, margins.r_tilde)?;
    let r_tilde = selection.r_tilde;
    let k_tilde = (n * r_tilde + 1.0) / (params.k + params.s - 1.0);
    let a = margins.a * k_tilde / r_tilde;
    let delta = margins.delta * params.gamma / (k_tilde * (1.0 + a / lambda));
    let root = profile_root(a, lambda);
    let mass = profile_mass(a, lambda, params.s, dimension);

    let shape = SelfSimilar { n, lambda, r_tilde, k_tilde, a, delta, root, mass };
    let tau0 = search_tau0(&shape, params, domain.inradius())?;

    Ok(SubSolutionSpec {
        dimension,
        lambda,
        r_tilde,
        k_tilde,
        a,
        delta,
        support_radius: root,
        profile_mass: mass,
        t0: (1.0 - tau0) / delta,
        center: domain.centroid(),
        rtilde_selection: selection,
    })
}

// Largest τ₀ = 1-δt₀ (smallest t₀) for which the support fits strictly inside
// the domain and the residual certificate passes. Bisection runs on log τ₀.
fn search_tau0(shape: &SelfSimilar, params: &ProblemParams, inradius: f64) -> Result<f64> {
    let good = |tau0: f64| {
        // the relative margin absorbs the round trip τ₀ -> t₀ -> τ₀
        shape.root * tau0.powf(shape.r_tilde) < inradius * (1.0 - 1e-9)
            && shape.certified_from(params, tau0)
    };
    if good(1.0) {
        return Ok(1.0);
    }
    if !good(MIN_TAU0) {
        let contained = shape.root * MIN_TAU0.powf(shape.r_tilde) < inradius;
        return Err(Error::Construction(if contained {
            format!("residual certificate fails even at 1-δt0 = {MIN_TAU0:e}")
        } else {
            format!(
                "support radius {} cannot be shrunk inside the domain (inradius {inradius}) before 1-δt0 = {MIN_TAU0:e}",
                shape.root
            )
        }));
    }
    let (mut lo, mut hi) = (MIN_TAU0.ln(), 0.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if good(mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.exp())
}

/// Constants of the global super-solution `L e^{|x - x_a|}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperSolutionSpec {
    pub l_const: f64,
    /// Anchor coordinate along the grid axis; outside the closed domain.
    pub anchor: f64,
    pub epsilon: f64,
    pub rho_omega: f64,
    /// e^{s(ρ(Ω)+1)}.
    pub c_const: f64,
    pub case: GlobalCase,
    /// Every candidate that entered the maximum defining L.
    pub l_candidates: Vec<(String, f64)>,
    pub domain: DomainSpec,
}

impl SuperSolutionSpec {
    /// ρ̃ = |x - x_a| for a point on the axis through the centroid.
    pub fn rho_tilde(&self, x: f64) -> f64 {
        (x - self.anchor).abs()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.l_const * self.rho_tilde(x).exp()
    }

    /// L e^{ρ(Ω)+1}, the uniform bound on the solution.
    pub fn global_bound(&self) -> f64 {
        self.l_const * (self.rho_omega + 1.0).exp()
    }

    /// Axis segment covering the domain; every value of ρ̃ attained on Ω is
    /// attained on it.
    pub fn axis_range(&self) -> (f64, f64) {
        match self.domain {
            DomainSpec::Interval { a, b } => (a, b),
            DomainSpec::RadialBall { radius, .. } => (-radius, radius),
        }
    }
}

/// Builds the global super-solution for a tuple in the global regime.
pub fn build_supersolution(
    params: &ProblemParams,
    domain: &DomainSpec,
    u0_sup: f64,
) -> Result<SuperSolutionSpec> {
    let verdict = classify_regime(params, domain)?;
    let case = match (verdict.tag, verdict.global_case) {
        (RegimeTag::GlobalPredicted, Some(case)) => case,
        _ => {
            let failing: Vec<_> = verdict
                .reasons
                .iter()
                .filter(|c| c.theorem == crate::model::Theorem::Global && !c.holds)
                .map(|c| c.name.clone())
                .collect();
            return Err(Error::Precondition(format!(
                "parameters are not in the global regime (failing: {})",
                failing.join("; ")
            )));
        }
    };
    if !(u0_sup.is_finite() && u0_sup >= 0.0) {
        return Err(Error::InvalidArgument(format!("sup of initial data must be finite and nonnegative, got {u0_sup}")));
    }

    let ProblemParams { alpha, beta, gamma, nu, k, s, l, q, m, sigma, p, .. } = *params;
    let n = domain.dimension() as f64;
    let epsilon = SUPERSOLUTION_EPSILON;
    let rho_omega = domain.diameter();
    let c_const = supersolution_c(params, domain);
    let measure = domain.measure();

    let mut candidates: Vec<(String, f64)> = Vec::new();
    if case != GlobalCase::BalancedLargeBeta {
        let base = 2.0 / beta * ((n - 1.0) / epsilon + (p - 1.0));
        candidates.push(("diffusion".into(), base.powf(1.0 / (l + q - p + 1.0))));
    }
    if case != GlobalCase::BalancedSmallDomain {
        let base = 2.0 * alpha * c_const * measure / beta;
        candidates.push(("nonlocal".into(), base.powf(1.0 / (l + q - k - s))));
    }
    if gamma > 0.0 {
        candidates.push(("reaction".into(), (gamma / nu).powf(1.0 / (sigma - m))));
    }
    candidates.push(("one".into(), 1.0));
    candidates.push(("initial".into(), u0_sup));
    let l_const = candidates.iter().fold(1.0f64, |acc, (_, v)| acc.max(*v));

    let anchor = domain.centroid() + domain.inradius() + epsilon;

    Ok(SuperSolutionSpec {
        l_const,
        anchor,
        epsilon,
        rho_omega,
        c_const,
        case,
        l_candidates: candidates,
        domain: *domain,
    })
}

/// ∫_Ω e^{s|x - x_a|} dx.
pub fn anchor_exponential_integral(spec: &SuperSolutionSpec, s: f64) -> f64 {
    let f = |rho: f64| (s * rho).exp();
    match spec.domain {
        DomainSpec::Interval { a, b } => adaptive_simpson(&|x| f(spec.rho_tilde(x)), a, b, QUAD_TOL),
        DomainSpec::RadialBall { radius, dimension: 1 } => {
            adaptive_simpson(&|x| f(spec.rho_tilde(x)), -radius, radius, QUAD_TOL)
        }
        DomainSpec::RadialBall { radius, dimension } => {
            // axial symmetry about the line through the centre and x_a:
            // dx = |S^{N-2}| w^{N-2} dw dz
            let d = spec.anchor;
            let shell = sphere_measure(dimension - 1);
            let pow = dimension as i32 - 2;
            let outer = |z: f64| {
                let w_max = (radius * radius - z * z).max(0.0).sqrt();
                adaptive_simpson(
                    &|w: f64| w.powi(pow) * f(((z - d).powi(2) + w * w).sqrt()),
                    0.0,
                    w_max,
                    QUAD_TOL,
                )
            };
            shell * adaptive_simpson(&outer, -radius, radius, QUAD_TOL)
        }
    }
}

/// 𝓛_p v at the axis point `x`, using the lower bound (N-1)/ε for the
/// curvature term of the p-Laplacian. Requires μ = 0.
pub fn supersolution_residual(
    spec: &SuperSolutionSpec,
    params: &ProblemParams,
    x: f64,
) -> Result<ResidualTerms> {
    let integral = anchor_exponential_integral(spec, params.s);
    supersolution_residual_with_integral(spec, params, x, integral)
}

/// As [`supersolution_residual`] with ∫_Ω e^{sρ̃} supplied, for grid sweeps.
pub fn supersolution_residual_with_integral(
    spec: &SuperSolutionSpec,
    params: &ProblemParams,
    x: f64,
    exp_integral: f64,
) -> Result<ResidualTerms> {
    if params.mu != 0.0 {
        return Err(Error::Precondition("super-solution residual requires mu = 0".into()));
    }
    let (lo, hi) = spec.axis_range();
    if !(x >= lo && x <= hi) {
        return Err(Error::InvalidArgument(format!("x = {x} is outside the domain [{lo}, {hi}]")));
    }
    let n = spec.domain.dimension() as f64;
    let ProblemParams { alpha, beta, gamma, nu, k, s, l, q, m, sigma, p, .. } = *params;
    let lc = spec.l_const;
    let rho = spec.rho_tilde(x);
    let v = lc * rho.exp();
    Ok(ResidualTerms {
        time_derivative: 0.0,
        diffusion: -v.powf(p - 1.0) * ((n - 1.0) / spec.epsilon + (p - 1.0)),
        nonlocal_source: -alpha * v.powf(k) * lc.powf(s) * exp_integral,
        gradient_absorption: beta * v.powf(l + q),
        reaction: -gamma * v.powf(m),
        gradient_source: 0.0,
        absorption: nu * v.powf(sigma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blowup_tuple() -> ProblemParams {
        ProblemParams {
            alpha: 1.0,
            beta: 0.1,
            gamma: 1.0,
            mu: 0.1,
            nu: 0.1,
            k: 1.0,
            s: 1.0,
            l: 0.5,
            q: 1.0,
            m: 2.0,
            r: 1.0,
            sigma: 0.5,
            p: 2.0,
        }
    }

    fn global_tuple() -> ProblemParams {
        ProblemParams {
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
        }
    }

    #[test]
    fn profile_at_origin_and_at_a() {
        let (a, lambda) = (3.0, 1.6);
        let origin = eval_profile(0.0, a, lambda);
        assert!((origin.value - (1.0 + a / lambda)).abs() < 1e-15);
        assert_eq!(origin.slope, 0.0);
        let at_a = eval_profile(a, a, lambda);
        assert!((at_a.value - 1.0).abs() < 1e-14);
        assert!((at_a.slope + 1.0).abs() < 1e-15);
    }

    #[test]
    fn profile_root_for_a2_lambda2() {
        let root = profile_root(2.0, 2.0);
        assert!((root - 8f64.sqrt()).abs() < 1e-14);
        assert!((root - 2.828427).abs() < 1e-6);
        let inside = 1.0 + 2.0 / 2.0 - root * root / (2.0 * 2.0);
        assert!(inside.abs() < 1e-14);
        assert_eq!(eval_profile(root, 2.0, 2.0).value, 0.0);
        assert_eq!(eval_profile(root + 1.0, 2.0, 2.0), ProfilePoint { value: 0.0, slope: 0.0 });
    }

    #[test]
    fn rtilde_worked_tuple() {
        let sel = select_rtilde(&blowup_tuple(), 1, 0.9).unwrap();
        assert!((sel.bound_q - 1.0 / 3.0).abs() < 1e-15);
        assert!((sel.bound_p.unwrap() - 0.5).abs() < 1e-15);
        assert!((sel.bound_r.unwrap() - 1.0).abs() < 1e-15);
        assert!((sel.r_tilde - 0.3).abs() < 1e-15);
        assert!(sel.strict);

        let on_bound = select_rtilde(&blowup_tuple(), 1, 1.0).unwrap();
        assert!((on_bound.r_tilde - 1.0 / 3.0).abs() < 1e-15);
        assert!(!on_bound.strict);
    }

    #[test]
    fn rtilde_only_q_bound_when_dispatch_terms_vanish() {
        // k+s = 1 with p = 2, r = 1 zeroes both dispatch denominators; the
        // remaining q bound is then negative, which is reported upstream
        let mut params = blowup_tuple();
        params.k = 0.5;
        params.s = 0.5;
        let err = select_rtilde(&params, 1, 0.9).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        // valid tuples always keep all three bounds
        let sel = select_rtilde(&blowup_tuple(), 3, 0.9).unwrap();
        assert!(sel.bound_p.is_some() && sel.bound_r.is_some());
    }

    #[test]
    fn worked_subsolution_constants() {
        let domain = DomainSpec::ball(1.0, 1).unwrap();
        let spec = build_subsolution(&blowup_tuple(), &domain, SubMargins::default()).unwrap();
        assert!((spec.r_tilde - 0.3).abs() < 1e-12);
        assert!((spec.k_tilde - 1.3).abs() < 1e-12);
        assert!((spec.a - 26.0 / 3.0).abs() < 1e-12);
        assert_eq!(spec.lambda, 2.0);
        let delta_hand = 0.5 / (1.3 * (1.0 + 13.0 / 3.0));
        assert!((spec.delta - delta_hand).abs() < 1e-12);
        assert!((spec.delta - 0.07212).abs() < 1e-5);
        assert!(spec.delta < 1.0 / (spec.k_tilde * (1.0 + spec.a / spec.lambda)));
        assert!(spec.t0 > 0.0 && spec.t0 < spec.blowup_time());
        assert!(spec.support_radius_at(spec.t0) < domain.inradius());
        for e in spec.exponent_margins(&blowup_tuple()) {
            assert!(e > 0.0, "{e}");
        }
    }

    #[test]
    fn profile_mass_matches_midpoint_rule() {
        // N = 1, A = 2, λ = 2, s = 1: K = 2 ∫_0^R V with R = √8
        let root = 8f64.sqrt();
        let n = 1_000_000;
        let h = root / n as f64;
        let midpoint: f64 = (0..n)
            .map(|i| {
                let y = (i as f64 + 0.5) * h;
                (2.0 - y * y / 4.0).max(0.0)
            })
            .sum::<f64>()
            * h
            * 2.0;
        let k = profile_mass(2.0, 2.0, 1.0, 1);
        assert!((k - midpoint).abs() < 1e-9, "{k} vs {midpoint}");
    }

    #[test]
    fn subsolution_scaling_and_support() {
        let domain = DomainSpec::ball(1.0, 1).unwrap();
        let spec = build_subsolution(&blowup_tuple(), &domain, SubMargins::default()).unwrap();
        let t = spec.t0;
        let tau: f64 = 1.0 - spec.delta * t;
        let center = eval_subsolution(&spec, spec.center, t).unwrap();
        assert!((center - tau.powf(-spec.k_tilde) * (1.0 + spec.a / spec.lambda)).abs() <= 1e-12 * center);
        let edge = spec.support_radius_at(t);
        assert_eq!(eval_subsolution(&spec, edge * (1.0 + 1e-12), t).unwrap(), 0.0);
        assert!(eval_subsolution(&spec, spec.blowup_time(), spec.blowup_time()).is_err());

        let mut prev = center;
        for j in 1..20 {
            let tj = t + (spec.blowup_time() - t) * (1.0 - 0.5f64.powi(j));
            let v = eval_subsolution(&spec, spec.center, tj).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn residual_matches_finite_differences() {
        let domain = DomainSpec::ball(1.0, 1).unwrap();
        let params = blowup_tuple();
        let spec = build_subsolution(&params, &domain, SubMargins::default()).unwrap();
        let t = spec.t0 + 0.3 * (spec.blowup_time() - spec.t0);
        let radius = spec.support_radius_at(t);
        let v = |x: f64, t: f64| eval_subsolution(&spec, x, t).unwrap();
        for frac in [0.1, 0.4, 0.7] {
            let x = frac * radius;
            let terms = subsolution_residual(&spec, &params, x, t).unwrap();
            let ht = 1e-5 * (spec.blowup_time() - t);
            let fd_t = (v(x, t + ht) - v(x, t - ht)) / (2.0 * ht);
            assert!((fd_t - terms.time_derivative).abs() <= 1e-4 * terms.time_derivative.abs(), "v_t {fd_t} vs {}", terms.time_derivative);
            // p = 2, N = 1: Δ_p v = v_xx
            let hx = 1e-5 * radius;
            let fd_xx = (v(x + hx, t) - 2.0 * v(x, t) + v(x - hx, t)) / (hx * hx);
            assert!((-fd_xx - terms.diffusion).abs() <= 1e-4 * terms.diffusion.abs(), "{fd_xx} vs {}", terms.diffusion);
        }
    }

    #[test]
    fn residual_is_zero_outside_support() {
        let domain = DomainSpec::ball(1.0, 1).unwrap();
        let params = blowup_tuple();
        let spec = build_subsolution(&params, &domain, SubMargins::default()).unwrap();
        let out = spec.support_radius_at(spec.t0) * 1.01;
        assert_eq!(subsolution_residual(&spec, &params, out, spec.t0).unwrap().value(), 0.0);
    }

    #[test]
    fn gamma_zero_is_rejected() {
        let mut params = blowup_tuple();
        params.gamma = 0.0;
        let domain = DomainSpec::ball(1.0, 1).unwrap();
        assert!(matches!(
            build_subsolution(&params, &domain, SubMargins::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn worked_supersolution_case_one() {
        let domain = DomainSpec::interval(0.0, 1.0).unwrap();
        let params = global_tuple();
        let spec = build_supersolution(&params, &domain, 1.0).unwrap();
        assert_eq!(spec.case, GlobalCase::DominantAbsorption);
        assert_eq!(spec.rho_omega, 1.0);
        assert!((spec.c_const - 2f64.exp()).abs() < 1e-14);
        // candidates: √2, 2e², (γ/ν)^1 = 1, 1, 1
        let e2 = 2f64.exp();
        assert!((spec.l_const - 2.0 * e2).abs() < 1e-12);
        for (_, c) in &spec.l_candidates {
            assert!(spec.l_const >= *c);
        }
        let reaction = spec.l_candidates.iter().find(|(n, _)| n == "reaction").unwrap();
        assert_eq!(reaction.1, 1.0);
        let (lo, hi) = spec.axis_range();
        for i in 0..=1000 {
            let x = lo + (hi - lo) * i as f64 / 1000.0;
            let rho = spec.rho_tilde(x);
            assert!(rho >= spec.epsilon - 1e-15 && rho <= spec.rho_omega + 1.0 + 1e-15);
            assert!(spec.eval(x) <= spec.global_bound() * (1.0 + 1e-15));
        }
    }

    #[test]
    fn supersolution_residual_is_nonnegative_case_one() {
        let domain = DomainSpec::interval(0.0, 1.0).unwrap();
        let params = global_tuple();
        let spec = build_supersolution(&params, &domain, 1.0).unwrap();
        let integral = anchor_exponential_integral(&spec, params.s);
        // ρ̃ runs over [0.5, 1.5]
        let exact = 1.5f64.exp() - 0.5f64.exp();
        assert!((integral - exact).abs() < 1e-10);
        for i in 0..1000 {
            let x = (i as f64 + 0.5) / 1000.0;
            let terms = supersolution_residual_with_integral(&spec, &params, x, integral).unwrap();
            assert!(terms.value() >= 0.0);
        }
        assert!(supersolution_residual(&spec, &params, 1.5).is_err());
    }

    #[test]
    fn case_three_threshold_in_one_dimension() {
        // N = 1: β >= 2(p-1) regardless of ε
        let params = ProblemParams {
            alpha: 1.0,
            beta: 6.0,
            gamma: 0.0,
            mu: 0.0,
            nu: 1.0,
            k: 1.0,
            s: 1.0,
            l: 0.5,
            q: 2.5,
            m: 4.0,
            r: 3.0,
            sigma: 5.0,
            p: 4.0,
        };
        let domain = DomainSpec::interval(0.0, 1.0).unwrap();
        let spec = build_supersolution(&params, &domain, 0.5).unwrap();
        assert_eq!(spec.case, GlobalCase::BalancedLargeBeta);
        let mut weak = params;
        weak.beta = 5.99;
        assert!(matches!(build_supersolution(&weak, &domain, 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn ball_exponential_integral_matches_polar_sum() {
        // N = 2 disc of radius 1, anchor at distance 1.5 from the centre
        let params = ProblemParams { s: 1.0, ..global_tuple() };
        let domain = DomainSpec::ball(1.0, 2).unwrap();
        let spec = build_supersolution(&params, &domain, 0.0).unwrap();
        let quad = anchor_exponential_integral(&spec, 1.0);
        let (nr, nt) = (800, 800);
        let mut sum = 0.0;
        for i in 0..nr {
            let r = (i as f64 + 0.5) / nr as f64;
            for j in 0..nt {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / nt as f64;
                let (x, y) = (r * th.cos(), r * th.sin());
                sum += ((x - spec.anchor).hypot(y)).exp() * r;
            }
        }
        sum *= (1.0 / nr as f64) * (2.0 * std::f64::consts::PI / nt as f64);
        assert!((quad - sum).abs() < 1e-5 * sum, "{quad} vs {sum}");
    }
}
