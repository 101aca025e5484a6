//! Coefficient-ratio and root-test estimates of the dominant singularity.

use std::ops::Range;

use num_complex::Complex64;

use super::{EstimateFlag, Method, ScopeError, SingularityEstimate};
use crate::germ::TruncatedGerm;

/// Number of trailing estimates whose spread is reported as the residual.
pub const SPREAD_WINDOW: usize = 10;
/// Relative spread beyond which the ratios count as oscillatory.
pub const OSCILLATION_TOL: f64 = 1e-2;

fn checked_window(f: &TruncatedGerm, window: &Range<usize>) -> Result<Range<usize>, ScopeError> {
    let end = window.end.min(f.order());
    if window.start + 3 > end {
        return Err(ScopeError::Window { start: window.start, end: window.end, order: f.order() });
    }
    for n in window.start..end {
        if f.coeff(n).norm() == 0.0 {
            return Err(ScopeError::ZeroCoefficient(n));
        }
    }
    Ok(window.start..end)
}

fn spread_estimate(method: Method, estimates: &[Complex64]) -> SingularityEstimate {
    let last = *estimates.last().expect("window holds at least two estimates");
    let tail = &estimates[estimates.len().saturating_sub(SPREAD_WINDOW)..];
    let spread = tail.iter().map(|e| (e - last).norm()).fold(0.0, f64::max);
    let mut flags = Vec::new();
    if !(spread <= OSCILLATION_TOL * last.norm()) {
        flags.push(EstimateFlag::Oscillatory);
    }
    SingularityEstimate { method, locations: vec![last], residuals: vec![spread], boundary_score: 0.0, flags }
}

/// `σ_n = f_n/f_{n+1}` with one Richardson step `nσ_n − (n−1)σ_{n−1}`.
pub fn ratio_estimate(f: &TruncatedGerm, window: Range<usize>) -> Result<SingularityEstimate, ScopeError> {
    let w = checked_window(f, &window)?;
    let sigma: Vec<(usize, Complex64)> = (w.start..w.end - 1).map(|n| (n, f.coeff(n) / f.coeff(n + 1))).collect();
    let richardson: Vec<Complex64> = sigma
        .windows(2)
        .map(|p| {
            let ((n0, s0), (n1, s1)) = (p[0], p[1]);
            s1 * n1 as f64 - s0 * n0 as f64
        })
        .collect();
    Ok(spread_estimate(Method::RatioTest, &richardson))
}

/// Domb–Sykes: `f_n/f_{n−1}` is linear in `1/n` with intercept `1/ω`.
pub fn domb_sykes(f: &TruncatedGerm, window: Range<usize>) -> Result<SingularityEstimate, ScopeError> {
    let w = checked_window(f, &window)?;
    let start = w.start.max(1);
    let r: Vec<(usize, Complex64)> = (start..w.end).map(|n| (n, f.coeff(n) / f.coeff(n - 1))).collect();
    let locations: Vec<Complex64> = r
        .windows(2)
        .map(|p| {
            let ((n0, r0), (n1, r1)) = (p[0], p[1]);
            // intercept of the line through (1/n0, r0), (1/n1, r1)
            (r1 * n1 as f64 - r0 * n0 as f64).inv()
        })
        .collect();
    Ok(spread_estimate(Method::DombSykes, &locations))
}

/// Radius of convergence from a least-squares fit of `log|f_n|` against `n`
/// over the window; infinite when the coefficients vanish there.
pub fn root_test_radius(f: &TruncatedGerm, window: Range<usize>) -> f64 {
    let end = window.end.min(f.order());
    let points: Vec<(f64, f64)> = (window.start..end)
        .filter(|&n| f.coeff(n).norm() > 0.0)
        .map(|n| (n as f64, f.coeff(n).norm().ln()))
        .collect();
    if points.is_empty() {
        return f64::INFINITY;
    }
    if points.len() == 1 {
        let (n, l) = points[0];
        return if n == 0.0 { f64::INFINITY } else { (-l / n).exp() };
    }
    let len = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
    let my = points.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (-sxy / sxx).exp()
}

pub fn root_test(f: &TruncatedGerm, window: Range<usize>) -> SingularityEstimate {
    let r = root_test_radius(f, window);
    SingularityEstimate {
        method: Method::RootTest,
        locations: vec![Complex64::new(r, 0.0)],
        residuals: vec![0.0],
        boundary_score: 0.0,
        flags: Vec::new(),
    }
}
