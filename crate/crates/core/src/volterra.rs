//! Simple-singularity calculus at a point ω.
//!
//! With `F = A/(ω−ζ) + f₁·log(ω−ζ)/2πi + f₂` and `G` of the same shape,
//! `F ⊙ G` is regular at ω exactly when
//!
//! ```text
//! A·B = 1,    A·g₁ + B·f₁ + h₁[g₁] = 0,    A·g₂ = −h₂
//! h₁(ζ) = −1/(2πi) ∫_ω^ζ f₁(ζ/u) g₁(u) du/u
//! ```
//!
//! All jets live in the local variable `x = ζ − ω`. Putting `u = ω + τx`
//! and expanding `f₁` about 1, the coefficient of `xⁿ` in `h₁` is
//! `Σ_{k<n} W_{n−1−k,k} γ_k` with
//!
//! ```text
//! W_{d,k} = −ω^{−d−1}/(2πi) Σ_{m≤d} φ_m (−1)^{d−m} C(d,m) B(m+1, k+d−m+1)
//! ```
//!
//! where `φ` is the Taylor jet of `f₁` at 1 and `γ` the jet of `g₁`.
//! The kernel is strictly lower triangular, so the Volterra equation for
//! `g₁` is solved by forward substitution.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{taylor_shift, EntireFactor, LogTypeGerm};
use crate::contour::{limit_probe, ProbeSample, ProbeSource, QuadratureError, RaySchedule};
use crate::germ::{CoefficientSource, GermError, HadamardSource, TruncatedGerm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `|A|` below this multiple of `‖f₁‖` is reported as ill-conditioned.
pub const CONDITIONING_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VolterraError {
    #[error("volterra_engine: residue A is zero; the inverse has no simple singularity")]
    ZeroResidue,
    #[error("volterra_engine: jets are based at {0} and {1}")]
    BaseMismatch(Complex64, Complex64),
    #[error("volterra_engine: singular point must be nonzero")]
    ZeroBase,
    #[error("volterra_engine: jets have orders {0} and {1}")]
    OrderMismatch(usize, usize),
    #[error("volterra_engine: h2 jet has order {0}, expected {1}")]
    H2Order(usize, usize),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Probe(#[from] QuadratureError),
}

#[derive(Serialize, Deserialize)]
struct RawJet {
    base: Complex64,
    residue: Complex64,
    log_jet: TruncatedGerm,
    regular_jet: TruncatedGerm,
}

/// `c/(ω−ζ) + V(ζ)·log(ω−ζ)/2πi + R(ζ)` near ω, with `V`, `R` as jets in `ζ − ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJet", into = "RawJet")]
pub struct SingularJet {
    base: Complex64,
    residue: Complex64,
    log_jet: TruncatedGerm,
    regular_jet: TruncatedGerm,
}

impl TryFrom<RawJet> for SingularJet {
    type Error = VolterraError;
    fn try_from(r: RawJet) -> Result<Self, Self::Error> {
        SingularJet::new(r.base, r.residue, r.log_jet, r.regular_jet)
    }
}

impl From<SingularJet> for RawJet {
    fn from(j: SingularJet) -> Self {
        RawJet { base: j.base, residue: j.residue, log_jet: j.log_jet, regular_jet: j.regular_jet }
    }
}

impl SingularJet {
    pub fn new(
        base: Complex64,
        residue: Complex64,
        log_jet: TruncatedGerm,
        regular_jet: TruncatedGerm,
    ) -> Result<Self, VolterraError> {
        if base.norm() == 0.0 {
            return Err(VolterraError::ZeroBase);
        }
        if log_jet.order() != regular_jet.order() {
            return Err(VolterraError::OrderMismatch(log_jet.order(), regular_jet.order()));
        }
        Ok(Self { base, residue, log_jet, regular_jet })
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }

    pub fn residue(&self) -> Complex64 {
        self.residue
    }

    pub fn log_jet(&self) -> &TruncatedGerm {
        &self.log_jet
    }

    pub fn regular_jet(&self) -> &TruncatedGerm {
        &self.regular_jet
    }

    pub fn order(&self) -> usize {
        self.log_jet.order()
    }
}

/// Taylor data of the entire variation `f₁`, centred at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntireFunctionJet {
    pub taylor_at_1: TruncatedGerm,
}

impl EntireFunctionJet {
    pub fn new(taylor_at_1: TruncatedGerm) -> Self {
        Self { taylor_at_1 }
    }

    pub fn from_entire(f: &EntireFactor, order: usize) -> Self {
        Self { taylor_at_1: f.taylor_at(Complex64::new(1.0, 0.0), order.max(1)) }
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        Self::from_entire(&EntireFactor::constant(c), order)
    }

    pub fn zero(order: usize) -> Self {
        Self { taylor_at_1: TruncatedGerm::zero(order.max(1)) }
    }

    /// Jet of `f₁` at ω in `x = ζ − ω`, to `order` terms.
    pub fn recentred(&self, omega: Complex64, order: usize) -> TruncatedGerm {
        let shifted = taylor_shift(self.taylor_at_1.coeffs(), omega - 1.0);
        TruncatedGerm::from_fn(order.max(1), |n| shifted.get(n).copied().unwrap_or(ZERO))
    }

    fn phi(&self, m: usize) -> Complex64 {
        self.taylor_at_1.coeffs().get(m).copied().unwrap_or(ZERO)
    }

    fn sup_norm(&self) -> f64 {
        self.taylor_at_1.sup_norm()
    }
}

/// The strictly lower-triangular kernel of `g₁ ↦ h₁[g₁]` up to `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraKernel {
    rows: Vec<Vec<Complex64>>,
}

impl VolterraKernel {
    pub fn new(f1: &EntireFunctionJet, omega: Complex64, order: usize) -> Self {
        let scale = -(TAU * Complex64::i()).inv();
        let inv_omega = omega.inv();
        let rows = (0..order)
            .map(|n| {
                (0..n)
                    .map(|k| {
                        let d = n - 1 - k;
                        let mut r = 1.0 / (d + k + 1) as f64;
                        let mut acc = ZERO;
                        for m in 0..=d {
                            let sign = if (d - m) % 2 == 0 { 1.0 } else { -1.0 };
                            acc += f1.phi(m) * (sign * r);
                            if m < d {
                                r *= (d - m) as f64 / (d - m + k) as f64;
                            }
                        }
                        scale * inv_omega.powu(d as u32 + 1) * acc
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    /// `W_{n,k}` for `k < n`, zero otherwise.
    pub fn entry(&self, n: usize, k: usize) -> Complex64 {
        self.rows.get(n).and_then(|row| row.get(k)).copied().unwrap_or(ZERO)
    }

    fn apply(&self, g: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(g).map(|(w, x)| w * x).sum())
            .collect()
    }

    fn max_entry(&self) -> f64 {
        self.rows.iter().flatten().map(|w| w.norm()).fold(0.0, f64::max)
    }
}

/// Jet of `h₁` at ω to `order` terms; `g1_jet` is zero-padded or truncated to match.
pub fn compute_h1(f1: &EntireFunctionJet, g1_jet: &TruncatedGerm, omega: Complex64, order: usize) -> TruncatedGerm {
    let order = order.max(1);
    let kernel = VolterraKernel::new(f1, omega, order);
    let g: Vec<Complex64> = (0..order).map(|k| g1_jet.coeffs().get(k).copied().unwrap_or(ZERO)).collect();
    let h = kernel.apply(&g);
    TruncatedGerm::from_fn(order, |n| h[n])
}

/// Solves `A·g₁ + B·f₁ + h₁[g₁] = 0` for the jet of `g₁` at ω.
pub fn solve_g1(
    a: Complex64,
    b: Complex64,
    f1: &EntireFunctionJet,
    omega: Complex64,
    order: usize,
) -> Result<TruncatedGerm, VolterraError> {
    if a.norm() == 0.0 {
        return Err(VolterraError::ZeroResidue);
    }
    let order = order.max(1);
    let kernel = VolterraKernel::new(f1, omega, order);
    let f1_local = f1.recentred(omega, order);
    let mut g = Vec::with_capacity(order);
    for n in 0..order {
        let h: Complex64 = kernel.rows[n].iter().zip(&g).map(|(w, x)| w * x).sum();
        g.push(-(b * f1_local.coeff(n) + h) / a);
    }
    Ok(TruncatedGerm::new(g)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `|A·B − 1|`.
    pub product_residual: f64,
    /// `‖A·g₁ + B·f₁ + h₁[g₁]‖∞`.
    pub log_residual: f64,
    /// `‖A·g₂ + h₂‖∞`, when an h₂ jet was supplied.
    pub regular_residual: Option<f64>,
    pub tol: f64,
    pub satisfied: bool,
}

/// Residuals of the three regularity conditions for `F ⊙ G` at ω.
/// `f1` supplies the kernel; the `B·f₁` term uses `F.log_jet`.
pub fn check_inverse_conditions(
    f: &SingularJet,
    g: &SingularJet,
    f1: &EntireFunctionJet,
    h2: Option<&TruncatedGerm>,
    tol: f64,
) -> Result<ConditionReport, VolterraError> {
    if f.base != g.base {
        return Err(VolterraError::BaseMismatch(f.base, g.base));
    }
    if f.order() != g.order() {
        return Err(VolterraError::OrderMismatch(f.order(), g.order()));
    }
    let order = f.order();
    let (a, b) = (f.residue, g.residue);
    let product_residual = (a * b - 1.0).norm();
    let h1 = compute_h1(f1, &g.log_jet, f.base, order);
    let log_residual = g.log_jet.scale(a).add(&f.log_jet.scale(b)).add(&h1).sup_norm();
    let regular_residual = match h2 {
        Some(h2) if h2.order() != order => return Err(VolterraError::H2Order(h2.order(), order)),
        Some(h2) => Some(g.regular_jet.scale(a).add(h2).sup_norm()),
        None => None,
    };
    let satisfied = product_residual <= tol && log_residual <= tol && regular_residual.map_or(true, |r| r <= tol);
    Ok(ConditionReport { product_residual, log_residual, regular_residual, tol, satisfied })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCertificate {
    /// Diagonal of the triangular system, every entry `A`.
    pub diagonal: Vec<Complex64>,
    /// Forward-substitution solution with zero data.
    pub solution: TruncatedGerm,
    /// Largest strictly-lower kernel entry.
    pub max_off_diagonal: f64,
    /// `1/|A|`, the growth per elimination step.
    pub conditioning: f64,
    pub ill_conditioned: bool,
}

impl UniquenessCertificate {
    pub fn is_trivial(&self) -> bool {
        self.solution.coeffs().iter().all(|c| *c == ZERO)
    }
}

/// Forward elimination of `A·φ + h₁[φ] = 0`.
pub fn homogeneous_uniqueness(
    a: Complex64,
    f1: &EntireFunctionJet,
    omega: Complex64,
    order: usize,
) -> Result<UniquenessCertificate, VolterraError> {
    if a.norm() == 0.0 {
        return Err(VolterraError::ZeroResidue);
    }
    let order = order.max(1);
    let kernel = VolterraKernel::new(f1, omega, order);
    let mut phi = Vec::with_capacity(order);
    for n in 0..order {
        let h: Complex64 = kernel.rows[n].iter().zip(&phi).map(|(w, x)| w * x).sum();
        phi.push(-h / a);
    }
    Ok(UniquenessCertificate {
        diagonal: vec![a; order],
        solution: TruncatedGerm::new(phi)?,
        max_off_diagonal: kernel.max_entry(),
        conditioning: a.norm().recip(),
        ill_conditioned: a.norm() < CONDITIONING_THRESHOLD * f1.sup_norm(),
    })
}

/// Singular type of `g` at ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GSingularity {
    /// Pole of order `M` plus logarithmic and regular parts.
    Polar { order: u32 },
    /// Only logarithmic and regular parts.
    Logarithmic,
}

impl GSingularity {
    pub fn power(self) -> u32 {
        match self {
            Self::Polar { order } => order.max(1),
            Self::Logarithmic => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub power: u32,
    pub samples: Vec<ProbeSample>,
    /// `|(ζ−ω)^M (F⊙g)(ζ)|` at the smallest offset.
    pub final_abs: f64,
    pub decays: bool,
}

/// Probes `(ζ−ω)^M (F⊙g)` on the principal sheet for `F = f₁·log(1−ζ)/2πi`;
/// `decays` holds when the last sample is below `tol`. This samples the
/// limit numerically and proves nothing about other sheets.
pub fn polar_order_bound_check(
    f: &dyn CoefficientSource,
    g: &dyn CoefficientSource,
    kind: GSingularity,
    omega: Complex64,
    ray: &RaySchedule,
    tol: f64,
) -> Result<BoundReport, VolterraError> {
    let product = HadamardSource { left: f, right: g };
    let power = kind.power();
    let samples = limit_probe(&ProbeSource::Coefficients(&product), omega, power, ray)?;
    let final_abs = samples.last().map_or(f64::INFINITY, |s| s.scaled.norm());
    Ok(BoundReport { power, samples, final_abs, decays: final_abs < tol })
}

/// `F = f₁·log(1−ζ)/2πi` as a coefficient source.
pub fn log_type(f1: EntireFactor) -> LogTypeGerm {
    LogTypeGerm { variation: f1 }
}
