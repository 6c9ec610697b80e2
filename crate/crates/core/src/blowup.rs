//! Blow-up time extrapolation from a sup-norm history.

use serde::{Deserialize, Serialize};

use crate::solver::SeriesRow;

/// Fewest samples the fit will use.
pub const MIN_FIT_SAMPLES: usize = 10;
/// Fraction of the series (counted from the end) used by the fit.
pub const FIT_WINDOW_FRACTION: f64 = 0.25;

/// Result of fitting log‖u‖∞ ≈ c - κ log(T - t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub t_blowup: f64,
    pub kappa: f64,
    pub log_c: f64,
    /// Residual sum of squares in log space.
    pub rss: f64,
    pub samples: usize,
    /// Set when the window cannot support a fit; `t_blowup` is then the last
    /// sample time.
    pub degenerate: bool,
}

// Ordinary least squares of y on x; returns (intercept, slope, rss).
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - intercept - slope * xi).powi(2))
        .sum();
    (intercept, slope, rss)
}

/// Fits the trailing window of `(t, sup)` samples.
pub fn fit_power_law(times: &[f64], sups: &[f64]) -> BlowupFit {
    let total = times.len().min(sups.len());
    let t_last = times.get(total.wrapping_sub(1)).copied().unwrap_or(0.0);
    let degenerate = |samples| BlowupFit {
        t_blowup: t_last,
        kappa: 0.0,
        log_c: 0.0,
        rss: f64::NAN,
        samples,
        degenerate: true,
    };
    if total < MIN_FIT_SAMPLES {
        return degenerate(total);
    }
    let window = ((total as f64 * FIT_WINDOW_FRACTION).ceil() as usize).clamp(MIN_FIT_SAMPLES, total);
    let (t, m) = (&times[total - window..total], &sups[total - window..total]);
    if m.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return degenerate(window);
    }
    let y: Vec<f64> = m.iter().map(|v| v.ln()).collect();
    let span = t_last - t[0];
    let y_spread = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - y.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(span > 0.0) || y_spread <= 1e-12 * (1.0 + y[0].abs()) {
        return degenerate(window);
    }

    let mut xbuf = vec![0.0; window];
    let mut eval = |gap: f64| {
        let big_t = t_last + gap;
        for (xi, ti) in xbuf.iter_mut().zip(t) {
            *xi = (big_t - ti).ln();
        }
        let (c, slope, rss) = linear_fit(&xbuf, &y);
        (rss, c, -slope)
    };

    // scan log(T - t_last), then golden-section refinement around the best
    let (lo, hi) = ((span * 1e-9).ln(), (span * 1e3).ln());
    let scan = 400;
    let at = |i: usize| lo + (hi - lo) * i as f64 / scan as f64;
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..=scan {
        let (rss, _, _) = eval(at(i).exp());
        if rss < best.0 {
            best = (rss, i);
        }
    }
    let (mut a, mut b) = (at(best.1.saturating_sub(1)), at((best.1 + 1).min(scan)));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c1 = b - g * (b - a);
        let c2 = a + g * (b - a);
        if eval(c1.exp()).0 <= eval(c2.exp()).0 {
            b = c2;
        } else {
            a = c1;
        }
    }
    let gap = (0.5 * (a + b)).exp();
    let (rss, log_c, kappa) = eval(gap);
    if !(kappa > 0.0 && kappa.is_finite()) {
        return degenerate(window);
    }
    BlowupFit {
        t_blowup: t_last + gap,
        kappa,
        log_c,
        rss,
        samples: window,
        degenerate: false,
    }
}

/// Extrapolated blow-up time from a run series.
pub fn estimate_blowup_time(series: &[SeriesRow]) -> BlowupFit {
    let t: Vec<f64> = series.iter().map(|r| r.t).collect();
    let m: Vec<f64> = series.iter().map(|r| r.sup_norm).collect();
    fit_power_law(&t, &m)
}
