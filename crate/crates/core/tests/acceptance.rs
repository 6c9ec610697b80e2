//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Built with `harness = false` so every criterion reports even when an
//! earlier one fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use plap_core::analytic::SubMargins;
use plap_core::harness::{
    blowup_experiment, bump, comparison_experiment, global_experiment, lemma_suite, profile_suite,
    random_comparison_params, random_ordered_pair, subsolution_suite, BlowupOptions,
};
use plap_core::model::{RegimeTag, SUPERSOLUTION_EPSILON};
use plap_core::solver::{run, Field, Grid, RunStatus, SolverConfig};
use plap_core::{classify_regime, DomainSpec, ProblemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn blowup_tuple() -> ProblemParams {
    ProblemParams {
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

// The sub-solution needs room for its support, so the blow-up runs use the
// symmetric interval (-1, 1) as a one-dimensional ball.
fn blowup_domain() -> DomainSpec {
    DomainSpec::ball(1.0, 1).unwrap()
}

fn lemma() -> Outcome {
    let r = lemma_suite(42, 100_000);
    let worst = r.check("min (lhs - rhs) / (1 + |lhs|)").unwrap();
    let eq = r.check("max |lhs - rhs| at sigma~ = 2").unwrap();
    Outcome {
        pass: r.passed(),
        detail: format!(
            "min slack {:.3e} (need >= -1e-12), sigma~=2 gap {:.1e}, min slack for sigma~>=2 {:.3e}, \
             with constant 4(sigma~-1)/sigma~^2 {:.3e}",
            worst.measured,
            eq.measured,
            r.diagnostic("min relative gap, sigma~ >= 2").unwrap(),
            r.diagnostic("min relative gap, constant 4(sigma~-1)/sigma~^2").unwrap(),
        ),
    }
}

fn profile() -> Outcome {
    let r = profile_suite(7, 100, 1000);
    Outcome {
        pass: r.passed(),
        detail: format!(
            "flux error {:.2e}, p-Laplacian error {:.2e}",
            r.check("max relative flux error").unwrap().measured,
            r.check("max relative p-Laplacian error").unwrap().measured
        ),
    }
}

fn heat_error(n: usize) -> f64 {
    let domain = DomainSpec::interval(0.0, 1.0).unwrap();
    let grid = Grid::new(&domain, n).unwrap();
    let u0 = Field::from_fn(grid, |x| (PI * x).sin());
    let t_end = 0.1;
    let cfg = SolverConfig { t_max: t_end, ..SolverConfig::default() };
    let out = run(&u0, &ProblemParams::pure_diffusion(2.0), &cfg);
    assert_eq!(out.status, RunStatus::Completed);
    assert_eq!(out.series.last().unwrap().t, t_end);
    let decay = (-PI * PI * t_end).exp();
    grid.coords()
        .iter()
        .zip(&out.final_field.values)
        .map(|(x, u)| (u - decay * (PI * x).sin()).abs())
        .fold(0.0, f64::max)
}

fn heat() -> Outcome {
    let errs: Vec<f64> = [50, 100, 200].into_iter().map(heat_error).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let pass = orders.iter().all(|o| (1.7..=2.3).contains(o)) && errs[2] <= 1e-3;
    Outcome {
        pass,
        detail: format!(
            "errors {:.3e} {:.3e} {:.3e}, orders {:.3} {:.3}",
            errs[0], errs[1], errs[2], orders[0], orders[1]
        ),
    }
}

fn six_digits(got: f64, want: f64) -> bool {
    (got - want).abs() <= 5e-7 * want.abs()
}

fn subsolution() -> Outcome {
    let params = blowup_tuple();
    let (report, spec) = match subsolution_suite(&params, &blowup_domain(), SubMargins::default(), 201, 101) {
        Ok(x) => x,
        Err(e) => return Outcome { pass: false, detail: format!("construction failed: {e}") },
    };
    let a = 26.0 / 3.0;
    let delta = 0.5 / (1.3 * (1.0 + a / 2.0));
    let constants = six_digits(spec.r_tilde, 0.3)
        && six_digits(spec.k_tilde, 1.3)
        && six_digits(spec.a, a)
        && six_digits(spec.delta, delta);
    let margins = spec.exponent_margins(&params);
    let worst = report.check("max (P(v) - tol) on space-time grid").unwrap().measured;
    Outcome {
        pass: constants && report.passed(),
        detail: format!(
            "r~ {:.7} k~ {:.7} A {:.7} delta {:.7} t0 {:.6} exponents {:.3?} max(P-tol) {:.3e}",
            spec.r_tilde, spec.k_tilde, spec.a, spec.delta, spec.t0, margins, worst
        ),
    }
}

fn blowup() -> Outcome {
    let exp = match blowup_experiment(&blowup_tuple(), &blowup_domain(), SubMargins::default(), &BlowupOptions::default()) {
        Ok(x) => x,
        Err(e) => return Outcome { pass: false, detail: format!("experiment failed: {e}") },
    };
    let r = &exp.report;
    let bound = exp.spec.blowup_time() - exp.spec.t0;
    let t_est = match exp.status {
        RunStatus::BlowUp { t_est, .. } => format!("{t_est:.6e}"),
        ref other => format!("{other:?}"),
    };
    let kappa = r.diagnostic("kappa").unwrap_or(f64::NAN);
    Outcome {
        pass: r.passed(),
        detail: format!(
            "T_est {t_est} vs 1.10*(1/delta - t0) = {:.6e}, min ordering gap {:.3e}, kappa {:.3} (k~ {:.3})",
            1.1 * bound,
            r.check("min (u - v(t+t0)) / (1 + sup v)").map_or(f64::NAN, |c| c.measured),
            kappa,
            exp.spec.k_tilde
        ),
    }
}

fn global() -> Outcome {
    let domain = DomainSpec::interval(0.0, 1.0).unwrap();
    let grid = Grid::new(&domain, 100).unwrap();
    let u0 = Field::from_fn(grid, |x| bump(x, 0.5, 0.4));
    let exp = match global_experiment(&global_tuple(), &domain, &u0, 10.0, &SolverConfig::default()) {
        Ok(x) => x,
        Err(e) => return Outcome { pass: false, detail: format!("experiment failed: {e}") },
    };
    let r = &exp.report;
    Outcome {
        pass: r.passed(),
        detail: format!(
            "status {:?}, final t {}, max sup {:.4e} <= bound {:.4e}, min(L_p v + tol) {:.3e}",
            exp.status,
            r.diagnostic("final t").unwrap(),
            r.check("max sup-norm").unwrap().measured,
            exp.spec.global_bound(),
            r.check("min (L_p v + tol) on axis grid").unwrap().measured
        ),
    }
}

fn comparison() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let domains = [
        DomainSpec::interval(0.0, 1.0).unwrap(),
        DomainSpec::ball(1.0, 1).unwrap(),
        DomainSpec::ball(1.0, 2).unwrap(),
        DomainSpec::ball(1.0, 3).unwrap(),
    ];
    let cfg = SolverConfig::default();
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut failures = 0;
    for i in 0..20 {
        let params = random_comparison_params(&mut rng);
        let grid = Grid::new(&domains[i % domains.len()], 64).unwrap();
        let (low, high) = random_ordered_pair(grid, &mut rng);
        match comparison_experiment(&params, &low, &high, 0.05, &cfg) {
            Ok(r) => {
                let raw = r.diagnostic("raw max(u_low - u_high)").unwrap_or(f64::INFINITY);
                let sup = r.diagnostic("max sup-norm").unwrap_or(0.0);
                worst = worst.max(raw.max(0.0) / (1.0 + sup));
                if !r.passed() {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let params = random_comparison_params(&mut rng);
    let grid = Grid::new(&domains[0], 64).unwrap();
    let (u, _) = random_ordered_pair(grid, &mut rng);
    let control = comparison_experiment(&params, &u, &u, 0.05, &cfg)
        .ok()
        .and_then(|r| r.diagnostic("raw max(u_low - u_high)"));
    Outcome {
        pass: failures == 0 && worst <= 1e-6 && control == Some(0.0),
        detail: format!("{failures} failed runs, worst relative violation {worst:.3e}, control {control:?}"),
    }
}

// Independent evaluation of both theorems' hypothesis lists.
fn expected_tag(p: &ProblemParams, measure: f64, diameter: f64, n: f64) -> RegimeTag {
    let blowup = p.gamma > 0.0
        && p.m > (p.p - 1.0).max(p.r).max(p.sigma)
        && p.q + p.l > 1.0
        && p.k + p.s > (p.p - 1.0).max(p.q + p.l).max(p.r);
    if blowup {
        return RegimeTag::BlowUpPredicted;
    }
    let base = p.mu == 0.0 && p.sigma > p.m && p.beta > 0.0 && (p.gamma == 0.0 || p.nu > 0.0);
    let (ql, ks, pm1) = (p.q + p.l, p.k + p.s, p.p - 1.0);
    let c = (p.s * (diameter + 1.0)).exp();
    let case1 = ql > pm1.max(ks);
    let case2 = (ql - ks).abs() <= 1e-9 && ks > pm1 && measure <= p.beta / (2.0 * p.alpha * c);
    let case3 = (ql - pm1).abs() <= 1e-9 && pm1 > ks && p.beta >= 2.0 * ((n - 1.0) / SUPERSOLUTION_EPSILON + pm1);
    if base && (case1 || case2 || case3) {
        RegimeTag::GlobalPredicted
    } else {
        RegimeTag::Unknown
    }
}

fn sweep() -> Outcome {
    let domain = DomainSpec::interval(0.0, 1.0).unwrap();
    let values = [1.0, 1.5, 2.0, 2.5, 3.0];
    let mut mismatches = Vec::new();
    let mut counts = [0usize; 3];
    // σ = 3 puts the tuples on the boundedness side, σ = 0.5 on the blow-up side
    for sigma in [3.0, 0.5] {
        for &q in &values {
            for &s in &values {
                let params = ProblemParams { q, s, sigma, beta: 50.0, ..global_tuple() };
                let want = expected_tag(&params, domain.measure(), domain.diameter(), 1.0);
                let got = classify_regime(&params, &domain).map(|v| v.tag);
                match got {
                    Ok(tag) if tag == want => {
                        counts[match tag {
                            RegimeTag::BlowUpPredicted => 0,
                            RegimeTag::GlobalPredicted => 1,
                            RegimeTag::Unknown => 2,
                        }] += 1
                    }
                    other => mismatches.push(format!("q={q} s={s} sigma={sigma}: {other:?} vs {want:?}")),
                }
            }
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!(
            "50 tuples, blow-up {} global {} unknown {}, mismatches {:?}",
            counts[0], counts[1], counts[2], mismatches
        ),
    }
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 monotonicity inequality", lemma, Duration::from_secs(5)),
        ("2 profile identity", profile, Duration::from_secs(2)),
        ("3 heat convergence", heat, Duration::from_secs(30)),
        ("4 sub-solution certificate", subsolution, Duration::from_secs(10)),
        ("5 blow-up end-to-end", blowup, Duration::from_secs(300)),
        ("6 global end-to-end", global, Duration::from_secs(300)),
        ("7 comparison preservation", comparison, Duration::from_secs(600)),
        ("8 regime sweep", sweep, Duration::from_secs(5)),
    ];
    let mut all = true;
    for (name, f, budget) in criteria {
        let started = Instant::now();
        let out = f();
        let elapsed = started.elapsed();
        let pass = out.pass && elapsed <= budget;
        all &= pass;
        println!(
            "{} criterion {name}: {} [{:.2}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
