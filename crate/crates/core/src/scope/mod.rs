//! Locating singularities from Taylor coefficients.
//!
//! Everything here sees only the principal sheet: a clean scan shows the
//! nearest singular set seen from 0, not the behaviour on other sheets.

mod pade;
mod ratio;
mod roots;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::germ::TruncatedGerm;

pub use pade::{pade, pade_poles, PadeApproximant, Pole, DEFECT_TOL, FROISSART_TOL};
pub use ratio::{domb_sykes, ratio_estimate, root_test, root_test_radius, OSCILLATION_TOL};
pub use roots::{certificate_residual, polynomial_roots, CERTIFICATE_TOL, MAX_ITERATIONS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScopeError {
    #[error("singularity_scope: coefficient {0} is zero")]
    ZeroCoefficient(usize),
    #[error("singularity_scope: window {start}..{end} does not fit a germ of order {order}")]
    Window { start: usize, end: usize, order: usize },
    #[error("singularity_scope: [{l}/{m}] needs {} coefficients, germ has {order}", l + m + 1)]
    InsufficientOrder { l: usize, m: usize, order: usize },
    #[error("singularity_scope: [{l}/{m}] system is singular (relative defect {defect:e})")]
    SingularSystem { l: usize, m: usize, defect: f64 },
    #[error("singularity_scope: approximant has a constant denominator")]
    NoDenominator,
    #[error("singularity_scope: root finder failed on degree {degree} after {iterations} iterations")]
    NonConvergence { degree: usize, iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    RatioTest,
    DombSykes,
    PadePoles,
    RootTest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimateFlag {
    /// Successive estimates fail the Cauchy criterion.
    Oscillatory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityEstimate {
    pub method: Method,
    pub locations: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub boundary_score: f64,
    pub flags: Vec<EstimateFlag>,
}

pub const DEFAULT_ANNULUS: (f64, f64) = (0.9, 1.1);

fn default_root_window(f: &TruncatedGerm) -> std::ops::Range<usize> {
    f.order() / 2..f.order()
}

/// Fraction of non-spurious Padé poles, over all `orders`, whose modulus
/// relative to the root-test radius lies in `annulus`. Degenerate table
/// entries contribute no poles.
pub fn natural_boundary_score(f: &TruncatedGerm, orders: &[(usize, usize)], annulus: (f64, f64)) -> Result<f64, ScopeError> {
    let radius = root_test_radius(f, default_root_window(f));
    let radius = if radius.is_finite() && radius > 0.0 { radius } else { 1.0 };
    let (mut inside, mut total) = (0usize, 0usize);
    for &(l, m) in orders {
        let approximant = match pade(f, l, m) {
            Err(ScopeError::SingularSystem { .. }) => continue,
            other => other?,
        };
        for pole in pade_poles(&approximant)?.into_iter().filter(|p| !p.spurious) {
            total += 1;
            let r = pole.z.norm() / radius;
            if r > annulus.0 && r < annulus.1 {
                inside += 1;
            }
        }
    }
    Ok(if total == 0 { 0.0 } else { inside as f64 / total as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    /// Padé sweep, lowest order first.
    pub orders: Vec<(usize, usize)>,
    /// Stable poles are reported inside `|z| ≤ window`.
    pub window: f64,
    /// Singularities the theory allows; anything else stable is an outlier.
    pub expected: Vec<Complex64>,
    pub neighborhood: f64,
    /// Relative agreement across the sweep for a pole to count as stable.
    pub stability_tol: f64,
    pub annulus: (f64, f64),
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            orders: vec![(10, 10), (14, 14), (18, 18), (22, 22)],
            window: 2.0,
            expected: Vec::new(),
            neighborhood: 1e-2,
            stability_tol: 1e-3,
            annulus: DEFAULT_ANNULUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleRecord {
    pub z: Complex64,
    pub order_l: usize,
    pub order_m: usize,
    pub spurious: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub estimates: Vec<SingularityEstimate>,
    /// Every Padé pole of the sweep.
    pub pole_cloud: Vec<PoleRecord>,
    /// Poles of the highest order that recur in every other order.
    pub stable_poles: Vec<Complex64>,
    /// Stable poles away from every expected singularity.
    pub outliers: Vec<Complex64>,
    pub boundary_score: Option<f64>,
    /// Component failures, as messages.
    pub failures: Vec<String>,
}

impl ScanReport {
    pub fn confined(&self) -> bool {
        self.outliers.is_empty()
    }

    /// Stable pole closest to `target`.
    pub fn nearest_stable(&self, target: Complex64) -> Option<Complex64> {
        self.stable_poles
            .iter()
            .copied()
            .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
    }

    /// `re,im,order_L,order_M,spurious_flag` rows.
    pub fn pole_cloud_csv(&self) -> String {
        let mut out = String::from("re,im,order_L,order_M,spurious_flag\n");
        for p in &self.pole_cloud {
            out.push_str(&format!("{:e},{:e},{},{},{}\n", p.z.re, p.z.im, p.order_l, p.order_m, u8::from(p.spurious)));
        }
        out
    }
}

fn stable_set(sweep: &[Vec<Complex64>], window: f64, tol: f64) -> Vec<Complex64> {
    let Some((top, rest)) = sweep.split_last() else {
        return Vec::new();
    };
    top.iter()
        .copied()
        .filter(|z| z.norm() <= window)
        .filter(|z| {
            rest.iter().all(|set| set.iter().any(|w| (w - z).norm() < tol * z.norm().max(1.0)))
        })
        .collect()
}

/// Ratio test, root test, Padé sweep and boundary score in one report.
pub fn scan_report(f: &TruncatedGerm, config: &ScanConfig) -> ScanReport {
    let mut failures = Vec::new();
    let mut estimates = Vec::new();
    let window = default_root_window(f);
    match ratio_estimate(f, window.clone()) {
        Ok(e) => estimates.push(e),
        Err(e) => failures.push(e.to_string()),
    }
    estimates.push(root_test(f, window));

    let mut pole_cloud = Vec::new();
    let mut sweep = Vec::new();
    for &(l, m) in &config.orders {
        match pade(f, l, m).and_then(|p| pade_poles(&p)) {
            Ok(poles) => {
                sweep.push(poles.iter().filter(|p| !p.spurious).map(|p| p.z).collect::<Vec<_>>());
                pole_cloud.extend(poles.iter().map(|p| PoleRecord { z: p.z, order_l: l, order_m: m, spurious: p.spurious }));
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    let stable_poles = stable_set(&sweep, config.window, config.stability_tol);
    let outliers = stable_poles
        .iter()
        .copied()
        .filter(|z| !config.expected.iter().any(|e| (z - e).norm() < config.neighborhood))
        .collect();
    let boundary_score = match natural_boundary_score(f, &config.orders, config.annulus) {
        Ok(s) => Some(s),
        Err(e) => {
            failures.push(e.to_string());
            None
        }
    };
    if !sweep.is_empty() {
        estimates.push(SingularityEstimate {
            method: Method::PadePoles,
            residuals: stable_poles.iter().map(|z| top_spread(&sweep, *z)).collect(),
            locations: stable_poles.clone(),
            boundary_score: boundary_score.unwrap_or(0.0),
            flags: Vec::new(),
        });
    }
    ScanReport { estimates, pole_cloud, stable_poles, outliers, boundary_score, failures }
}

/// Largest distance from `z` to its match in each sweep order.
fn top_spread(sweep: &[Vec<Complex64>], z: Complex64) -> f64 {
    sweep
        .iter()
        .map(|set| set.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}
