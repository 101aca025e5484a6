//! Closed-form germs: single-pole rational germs, logarithmic germs, the
//! two-pole ladder and its inverse, the Borel–Mayer natural-boundary series,
//! and germs with one simple singularity at 1.
//!
//! Every catalog germ has an exact coefficient rule and a principal-sheet
//! point evaluator. Logarithms use the principal branch of `log(1-ζ)`, whose
//! cut is the ray `[1, +∞)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::germ::{binomial, CoefficientSource, TruncatedGerm};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `|pᵏ − 1|` below this for some `k ≤ ROOT_OF_UNITY_HORIZON` rejects `p`.
pub const ROOT_OF_UNITY_TOL: f64 = 1e-9;
pub const ROOT_OF_UNITY_HORIZON: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("germ_catalog: invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("germ_catalog: 1 + h_n b_n vanishes at n = {0}, perturbed germ has no Hadamard inverse")]
    ResonantCoefficient(usize),
    #[error("germ_catalog: evaluation at singular point {0}")]
    SingularPoint(Complex64),
    #[error("germ_catalog: {0} lies outside the evaluator's domain")]
    OutsideDomain(Complex64),
    #[error("germ_catalog: cannot parse germ name `{0}`: {1}")]
    Parse(String, String),
}

/// Where a principal-sheet evaluator may be called.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// The plane minus declared singular points and branch cuts.
    Plane,
    /// The open disk `|ζ| < radius` (series of finite radius, e.g. a natural boundary).
    Disk { radius: f64 },
}

/// A straight branch cut `{start + t·direction : t ≥ 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCut {
    pub start: Complex64,
    pub direction: Complex64,
}

impl BranchCut {
    fn log_one_minus() -> Self {
        Self { start: ONE, direction: ONE }
    }
}

/// `Σ_{j=1}^M a_j/(ω−ζ)^j + poly(ζ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalGerm {
    pole: Complex64,
    pole_coeffs: Vec<Complex64>,
    poly_part: Vec<Complex64>,
}

impl RationalGerm {
    pub fn new(
        pole: Complex64,
        pole_coeffs: Vec<Complex64>,
        poly_part: Vec<Complex64>,
    ) -> Result<Self, CatalogError> {
        if pole.norm() == 0.0 {
            return Err(CatalogError::InvalidParameters("pole must be nonzero".into()));
        }
        match pole_coeffs.last() {
            None => return Err(CatalogError::InvalidParameters("need at least one pole coefficient".into())),
            Some(a) if a.norm() == 0.0 => {
                return Err(CatalogError::InvalidParameters("top pole coefficient a_M vanishes".into()))
            }
            _ => {}
        }
        Ok(Self { pole, pole_coeffs, poly_part })
    }

    pub fn pure(pole: Complex64, pole_coeffs: Vec<Complex64>) -> Result<Self, CatalogError> {
        Self::new(pole, pole_coeffs, Vec::new())
    }

    /// `1/(1−ζ)²`.
    pub fn example1() -> Self {
        Self::pure(ONE, vec![ZERO, ONE]).unwrap()
    }

    /// `2/(1−ζ)³ + 1/(1−ζ)²`.
    pub fn example2() -> Self {
        Self::pure(ONE, vec![ZERO, ONE, Complex64::new(2.0, 0.0)]).unwrap()
    }

    pub fn pole(&self) -> Complex64 {
        self.pole
    }

    pub fn pole_coeffs(&self) -> &[Complex64] {
        &self.pole_coeffs
    }

    pub fn poly_part(&self) -> &[Complex64] {
        &self.poly_part
    }

    /// Pole order `M`.
    pub fn pole_order(&self) -> usize {
        self.pole_coeffs.len()
    }

    pub fn has_poly_part(&self) -> bool {
        self.poly_part.iter().any(|c| c.norm() != 0.0)
    }

    /// Taylor coefficients at 0.
    pub fn expand(&self, count: usize) -> TruncatedGerm {
        let mut acc = vec![ZERO; count.max(1)];
        for (idx, &a) in self.pole_coeffs.iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            for (slot, c) in acc.iter_mut().zip(pole_coefficient_iter(self.pole, idx + 1)) {
                *slot += a * c;
            }
        }
        for (slot, &p) in acc.iter_mut().zip(&self.poly_part) {
            *slot += p;
        }
        TruncatedGerm::new(acc).expect("finite rational expansion")
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, CatalogError> {
        let u = self.pole - z;
        if u.norm() == 0.0 {
            return Err(CatalogError::SingularPoint(z));
        }
        let inv = u.inv();
        let polar = self.pole_coeffs.iter().rev().fold(ZERO, |acc, &a| (acc + a) * inv);
        Ok(polar + horner(&self.poly_part, z))
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

fn pole_coefficient_iter(omega: Complex64, j: usize) -> impl Iterator<Item = Complex64> {
    let inv = omega.inv();
    (0usize..).map(move |n| inv.powu((n + j) as u32) * binomial_rising(n, j - 1))
}

/// `C(n+k, k)`, exact while it fits in 53 bits.
fn binomial_rising(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |b, i| b * (n + i) as f64 / i as f64)
}

/// Taylor coefficients of `(ω−ζ)^{−j}`: `C(n+j−1, j−1)·ω^{−n−j}`.
pub fn pole_coefficients(omega: Complex64, j: usize, count: usize) -> Result<TruncatedGerm, CatalogError> {
    if omega.norm() == 0.0 || j == 0 {
        return Err(CatalogError::InvalidParameters("pole needs ω ≠ 0 and j ≥ 1".into()));
    }
    Ok(TruncatedGerm::new(pole_coefficient_iter(omega, j).take(count.max(1)).collect())
        .expect("finite pole coefficients"))
}

/// Coefficients `1/(n+1)` of `−log(1−ζ)/ζ`.
pub fn log_over_zeta_coefficients(count: usize) -> TruncatedGerm {
    shifted_log_coefficients(0, count)
}

/// Coefficients `1/(n+k+1)` of `(−log(1−ζ) − Σ_{m≤k} ζ^m/m)/ζ^{k+1}`.
pub fn shifted_log_coefficients(k: usize, count: usize) -> TruncatedGerm {
    TruncatedGerm::from_fn(count.max(1), |n| Complex64::new(1.0 / (n + k + 1) as f64, 0.0))
}

/// Coefficients `{1; 1/(1−2^{−n})}` of `1 + Σ_{m≥0} ζ/(2^m−ζ)`.
pub fn geometric_ladder_inverse(count: usize) -> TruncatedGerm {
    TruncatedGerm::from_fn(count.max(1), |n| {
        if n == 0 {
            ONE
        } else {
            Complex64::new(1.0 / (1.0 - 0.5f64.powi(n as i32)), 0.0)
        }
    })
}

/// Coefficients `{1; 1−2^{−n}}` of `1 + 1/(1−ζ) − 2/(2−ζ)`.
pub fn geometric_ladder_f(count: usize) -> TruncatedGerm {
    TruncatedGerm::from_fn(count.max(1), |n| {
        if n == 0 {
            ONE
        } else {
            Complex64::new(1.0 - 0.5f64.powi(n as i32), 0.0)
        }
    })
}

/// Validated Borel–Mayer parameters: `|q| < 1`, `|p| = 1`, `p` not a root of unity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BorelMayer {
    q: Complex64,
    phase: f64,
}

impl BorelMayer {
    /// `p = exp(2πi·phase)`.
    pub fn new(q: Complex64, phase: f64) -> Result<Self, CatalogError> {
        if !(q.norm() < 1.0) {
            return Err(CatalogError::InvalidParameters(format!("|q| = {} must be < 1", q.norm())));
        }
        for k in 1..=ROOT_OF_UNITY_HORIZON {
            let frac = (k as f64 * phase).fract();
            let dist = frac.abs().min(1.0 - frac.abs());
            // |p^k − 1| = 2 sin(π·dist)
            if 2.0 * (PI * dist).sin() < ROOT_OF_UNITY_TOL {
                return Err(CatalogError::InvalidParameters(format!(
                    "p is a root of unity of order {k} (to tolerance {ROOT_OF_UNITY_TOL})"
                )));
            }
        }
        Ok(Self { q, phase })
    }

    /// Accepts `p` directly; requires `| |p| − 1 | ≤ 1e−12`.
    pub fn from_p(q: Complex64, p: Complex64) -> Result<Self, CatalogError> {
        if (p.norm() - 1.0).abs() > 1e-12 {
            return Err(CatalogError::InvalidParameters(format!("|p| = {} must be 1", p.norm())));
        }
        Self::new(q, p.arg() / TAU)
    }

    /// `q = 1/2`, `p = exp(2πi(√5−1)/2)`.
    pub fn golden(q: f64) -> Result<Self, CatalogError> {
        Self::new(Complex64::new(q, 0.0), golden_phase())
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn p(&self) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.phase)
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    fn p_pow(&self, n: usize) -> Complex64 {
        Complex64::from_polar(1.0, TAU * (n as f64 * self.phase).fract())
    }

    pub fn coefficient(&self, n: usize) -> Complex64 {
        (ONE - self.q * self.p_pow(n)).inv()
    }

    /// `Σ_k q^k/(1 − p^k ζ)`, the same series resummed; valid for `|ζ| < 1`.
    pub fn eval_inverse(&self, z: Complex64) -> Result<Complex64, CatalogError> {
        if !(z.norm() < 1.0) {
            return Err(CatalogError::OutsideDomain(z));
        }
        let qn = self.q.norm();
        let gap = 1.0 - z.norm();
        let terms = if qn == 0.0 { 1 } else { ((1e-18 * gap).ln() / qn.ln()).ceil().max(1.0) as usize + 1 };
        let mut qk = ONE;
        let mut acc = ZERO;
        for k in 0..terms {
            acc += qk / (ONE - self.p_pow(k) * z);
            qk *= self.q;
        }
        Ok(acc)
    }
}

pub fn golden_phase() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// `1/(1 − q pⁿ)`, the Hadamard inverse of `1/(1−ζ) − q/(1−pζ)`.
pub fn borel_mayer_coefficients(q: Complex64, p: Complex64, count: usize) -> Result<TruncatedGerm, CatalogError> {
    let bm = BorelMayer::from_p(q, p)?;
    Ok(TruncatedGerm::from_fn(count.max(1), |n| bm.coefficient(n)))
}

/// An entire function used as the variation `f₁` of a logarithmic singularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EntireFactor {
    /// `Σ c_i ζ^i`.
    Polynomial(Vec<Complex64>),
    /// `amplitude · exp(rate·ζ)`.
    Exponential { amplitude: Complex64, rate: Complex64 },
}

impl EntireFactor {
    pub fn constant(c: Complex64) -> Self {
        Self::Polynomial(vec![c])
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Polynomial(c) => horner(c, z),
            Self::Exponential { amplitude, rate } => amplitude * (rate * z).exp(),
        }
    }

    /// First `order` Taylor coefficients at `center`.
    pub fn taylor_at(&self, center: Complex64, order: usize) -> TruncatedGerm {
        let order = order.max(1);
        match self {
            Self::Polynomial(c) => {
                let shifted = taylor_shift(c, center);
                TruncatedGerm::from_fn(order, |m| shifted.get(m).copied().unwrap_or(ZERO))
            }
            Self::Exponential { amplitude, rate } => {
                let mut term = amplitude * (rate * center).exp();
                TruncatedGerm::from_fn(order, |m| {
                    let out = term;
                    term = term * rate / (m + 1) as f64;
                    out
                })
            }
        }
    }

    /// Taylor coefficients at 0 of `f(ζ)·(−log(1−ζ))`, generated sequentially.
    fn times_minus_log(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        match self {
            Self::Polynomial(c) => Box::new((0usize..).map(move |n| {
                c.iter()
                    .enumerate()
                    .filter(|&(i, _)| i < n)
                    .map(|(i, &ci)| ci / (n - i) as f64)
                    .sum()
            })),
            Self::Exponential { amplitude, rate } => {
                // H = e^{rζ}(−log(1−ζ)) obeys H' = rH + e^{rζ}/(1−ζ), so
                // (n+1) u_{n+1} = r u_n + Σ_{k≤n} r^k/k!.
                let (amplitude, rate) = (*amplitude, *rate);
                let mut u = ZERO;
                let mut partial = ZERO;
                let mut term = ONE;
                Box::new((0usize..).map(move |n| {
                    let out = amplitude * u;
                    partial += term;
                    u = (rate * u + partial) / (n + 1) as f64;
                    term = term * rate / (n + 1) as f64;
                    out
                }))
            }
        }
    }
}

/// Coefficients of `p(center + x)` in powers of `x`.
pub(crate) fn taylor_shift(coeffs: &[Complex64], center: Complex64) -> Vec<Complex64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    // repeated synthetic division by (x − center)
    for start in 0..n {
        for i in (start..n - 1).rev() {
            let carry = out[i + 1] * center;
            out[i] += carry;
        }
    }
    out
}

/// `A/(1−ζ) + f₁(ζ)·log(1−ζ)/(2πi)`: one simple singularity at 1 on the principal sheet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleSingularGerm {
    pub residue: Complex64,
    pub variation: EntireFactor,
}

impl SimpleSingularGerm {
    pub fn new(residue: Complex64, variation: EntireFactor) -> Self {
        Self { residue, variation }
    }

    pub fn coefficients(&self, count: usize) -> TruncatedGerm {
        TruncatedGerm::new(self.stream().take(count.max(1)).collect()).expect("finite coefficients")
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, CatalogError> {
        if (ONE - z).norm() == 0.0 {
            return Err(CatalogError::SingularPoint(z));
        }
        let log = (ONE - z).ln();
        Ok(self.residue / (ONE - z) + self.variation.eval(z) * log / (TAU * I))
    }
}

impl CoefficientSource for SimpleSingularGerm {
    fn stream(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        let scale = -(TAU * I).inv();
        Box::new(self.variation.times_minus_log().map(move |u| self.residue + scale * u))
    }
}

/// `f₁(ζ)·log(1−ζ)/(2πi)` with `f₁` entire: a pure logarithmic germ.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTypeGerm {
    pub variation: EntireFactor,
}

impl LogTypeGerm {
    pub fn eval(&self, z: Complex64) -> Result<Complex64, CatalogError> {
        if (ONE - z).norm() == 0.0 {
            return Err(CatalogError::SingularPoint(z));
        }
        Ok(self.variation.eval(z) * (ONE - z).ln() / (TAU * I))
    }
}

impl CoefficientSource for LogTypeGerm {
    fn stream(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        let scale = -(TAU * I).inv();
        Box::new(self.variation.times_minus_log().map(move |u| scale * u))
    }
}

/// The catalog of closed-form germs.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogGerm {
    /// `(ω−ζ)^{−j}`.
    PoleGerm { omega: Complex64, order: usize },
    /// `−log(1−ζ)/ζ`.
    LogOverZeta,
    /// coefficients `1/(n+k+1)`.
    ShiftedLog(usize),
    /// `1 + Σ_m ζ/(2^m−ζ)`.
    GeometricLadder,
    /// `1 + 1/(1−ζ) − 2/(2−ζ)`, whose inverse is the ladder.
    LadderF,
    /// `Σ ζⁿ/(1−qpⁿ)`.
    BorelMayer(BorelMayer),
    /// `1/(1−ζ) − q/(1−pζ)`, whose inverse is the Borel–Mayer series.
    BorelMayerF(BorelMayer),
    EntirePolynomial(Vec<Complex64>),
    Rational(RationalGerm),
    SimpleSingular(SimpleSingularGerm),
}

/// Number of ladder poles `2^m` declared as singular points.
const LADDER_DECLARED_POLES: i32 = 64;

impl CatalogGerm {
    pub fn delta() -> Self {
        Self::PoleGerm { omega: ONE, order: 1 }
    }

    pub fn coefficients(&self, count: usize) -> TruncatedGerm {
        let count = count.max(1);
        match self {
            Self::PoleGerm { omega, order } => pole_coefficients(*omega, *order, count).expect("validated pole"),
            Self::LogOverZeta => log_over_zeta_coefficients(count),
            Self::ShiftedLog(k) => shifted_log_coefficients(*k, count),
            Self::GeometricLadder => geometric_ladder_inverse(count),
            Self::LadderF => geometric_ladder_f(count),
            Self::BorelMayer(bm) => TruncatedGerm::from_fn(count, |n| bm.coefficient(n)),
            Self::BorelMayerF(bm) => TruncatedGerm::from_fn(count, |n| ONE - bm.q() * bm.p_pow(n)),
            Self::EntirePolynomial(c) => TruncatedGerm::from_fn(count, |n| c.get(n).copied().unwrap_or(ZERO)),
            Self::Rational(r) => r.expand(count),
            Self::SimpleSingular(s) => s.coefficients(count),
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, CatalogError> {
        match self {
            Self::PoleGerm { omega, order } => {
                let u = omega - z;
                if u.norm() == 0.0 {
                    return Err(CatalogError::SingularPoint(z));
                }
                Ok(u.powi(-(*order as i32)))
            }
            Self::LogOverZeta => shifted_log_eval(0, z),
            Self::ShiftedLog(k) => shifted_log_eval(*k, z),
            Self::GeometricLadder => ladder_eval(z),
            Self::LadderF => {
                if (ONE - z).norm() == 0.0 || (2.0 - z).norm() == 0.0 {
                    return Err(CatalogError::SingularPoint(z));
                }
                Ok(ONE + (ONE - z).inv() - 2.0 / (2.0 - z))
            }
            Self::BorelMayer(bm) => bm.eval_inverse(z),
            Self::BorelMayerF(bm) => {
                let (a, b) = (ONE - z, ONE - bm.p() * z);
                if a.norm() == 0.0 || b.norm() == 0.0 {
                    return Err(CatalogError::SingularPoint(z));
                }
                Ok(a.inv() - bm.q() / b)
            }
            Self::EntirePolynomial(c) => Ok(horner(c, z)),
            Self::Rational(r) => r.eval(z),
            Self::SimpleSingular(s) => s.eval(z),
        }
    }

    /// Declared singular points of the principal-sheet evaluator.
    pub fn singular_points(&self) -> Vec<Complex64> {
        match self {
            Self::PoleGerm { omega, .. } => vec![*omega],
            Self::LogOverZeta | Self::ShiftedLog(_) | Self::SimpleSingular(_) => vec![ONE],
            Self::GeometricLadder => (0..LADDER_DECLARED_POLES).map(|m| Complex64::new(2f64.powi(m), 0.0)).collect(),
            Self::LadderF => vec![ONE, Complex64::new(2.0, 0.0)],
            Self::BorelMayer(_) => Vec::new(),
            Self::BorelMayerF(bm) => vec![ONE, bm.p().inv()],
            Self::EntirePolynomial(_) => Vec::new(),
            Self::Rational(r) => vec![r.pole()],
        }
    }

    pub fn branch_cuts(&self) -> Vec<BranchCut> {
        match self {
            Self::LogOverZeta | Self::ShiftedLog(_) | Self::SimpleSingular(_) => vec![BranchCut::log_one_minus()],
            _ => Vec::new(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Self::BorelMayer(_) => Domain::Disk { radius: 1.0 },
            _ => Domain::Plane,
        }
    }
}

fn shifted_log_eval(k: usize, z: Complex64) -> Result<Complex64, CatalogError> {
    if (ONE - z).norm() == 0.0 {
        return Err(CatalogError::SingularPoint(z));
    }
    if z.norm() < 0.5 {
        let mut acc = ZERO;
        let mut zn = ONE;
        for n in 0..100usize {
            acc += zn / (n + k + 1) as f64;
            zn *= z;
        }
        return Ok(acc);
    }
    let mut head = ZERO;
    let mut zm = ONE;
    for m in 1..=k {
        zm *= z;
        head += zm / m as f64;
    }
    Ok((-(ONE - z).ln() - head) / z.powu(k as u32 + 1))
}

fn ladder_eval(z: Complex64) -> Result<Complex64, CatalogError> {
    let mut acc = ONE;
    for m in 0..1100 {
        let denom = 2f64.powi(m) - z;
        if denom.norm() == 0.0 {
            return Err(CatalogError::SingularPoint(z));
        }
        let term = z / denom;
        acc += term;
        if term.norm() < 1e-16 * acc.norm() && 2f64.powi(m) > 2.0 * z.norm() {
            break;
        }
    }
    Ok(acc)
}

impl CoefficientSource for RationalGerm {
    fn stream(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        let mut poles: Vec<_> = self
            .pole_coeffs
            .iter()
            .enumerate()
            .map(|(i, &a)| (a, pole_coefficient_iter(self.pole, i + 1)))
            .collect();
        Box::new((0usize..).map(move |n| {
            let polar: Complex64 = poles.iter_mut().map(|(a, it)| *a * it.next().unwrap()).sum();
            polar + self.poly_part.get(n).copied().unwrap_or(ZERO)
        }))
    }
}

impl CoefficientSource for CatalogGerm {
    fn stream(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        match self {
            Self::PoleGerm { omega, order } => Box::new(pole_coefficient_iter(*omega, *order)),
            Self::Rational(r) => r.stream(),
            Self::SimpleSingular(s) => s.stream(),
            Self::LogOverZeta => Box::new((0usize..).map(|n| Complex64::new(1.0 / (n + 1) as f64, 0.0))),
            Self::ShiftedLog(k) => {
                let k = *k;
                Box::new((0usize..).map(move |n| Complex64::new(1.0 / (n + k + 1) as f64, 0.0)))
            }
            Self::GeometricLadder => Box::new((0usize..).map(|n| {
                if n == 0 {
                    ONE
                } else {
                    Complex64::new(1.0 / (1.0 - 0.5f64.powi(n.min(2000) as i32)), 0.0)
                }
            })),
            Self::LadderF => Box::new((0usize..).map(|n| {
                if n == 0 {
                    ONE
                } else {
                    Complex64::new(1.0 - 0.5f64.powi(n.min(2000) as i32), 0.0)
                }
            })),
            Self::BorelMayer(bm) => Box::new((0usize..).map(move |n| bm.coefficient(n))),
            Self::BorelMayerF(bm) => Box::new((0usize..).map(move |n| ONE - bm.q() * bm.p_pow(n))),
            Self::EntirePolynomial(c) => Box::new((0usize..).map(move |n| c.get(n).copied().unwrap_or(ZERO))),
        }
    }
}

/// Correction series `h_n b_n²/(1 + h_n b_n)`; the inverse of `F + h`
/// is `b − correction` when `b` is the inverse of `F`.
pub fn entire_correction(b: &TruncatedGerm, h: &TruncatedGerm) -> Result<TruncatedGerm, CatalogError> {
    let order = b.order().min(h.order());
    let mut out = Vec::with_capacity(order);
    for n in 0..order {
        let (bn, hn) = (b.coeff(n), h.coeff(n));
        let denom = ONE + hn * bn;
        if denom.norm() == 0.0 {
            return Err(CatalogError::ResonantCoefficient(n));
        }
        out.push(hn * bn * bn / denom);
    }
    Ok(TruncatedGerm::new(out).expect("finite correction"))
}

/// Closed form of `f0 ⊙ g0` for `f0 = Σ A_j/(1−ζ)^j` and `g0 = Σ B_k/(ω−ζ)^k`.
///
/// Each term is `A_j B_k/(j−1)! · ∂^{j−1}(ζ^{j−1}(ω−ζ)^{−k})`; writing
/// `ζ = ω − u` and differentiating in `u` gives integer binomial weights,
/// a pure pole part of order `M+N−1` at ω.
pub fn pole_hadamard_pole(f0: &RationalGerm, g0: &RationalGerm) -> Result<RationalGerm, CatalogError> {
    if (f0.pole() - ONE).norm() != 0.0 {
        return Err(CatalogError::InvalidParameters("f0 must have its pole at 1".into()));
    }
    if f0.has_poly_part() || g0.has_poly_part() {
        return Err(CatalogError::InvalidParameters("pole_hadamard_pole needs empty polynomial parts".into()));
    }
    let omega = g0.pole();
    let (m, n) = (f0.pole_order(), g0.pole_order());
    let mut c = vec![ZERO; m + n - 1];
    for (jm1, &a) in f0.pole_coeffs().iter().enumerate() {
        let s = jm1;
        for (km1, &b) in g0.pole_coeffs().iter().enumerate() {
            let k = km1 + 1;
            for i in 0..=s.min(k - 1) {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let weight = sign * binomial(s, i) * binomial(k - i + s - 1, s);
                let power = k + s - i;
                c[power - 1] += a * b * omega.powu((s - i) as u32) * weight;
            }
        }
    }
    RationalGerm::pure(omega, c)
}

/// A germ named in the CLI mini-language, e.g. `bm92:q=0.5,phi=golden`.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedGerm {
    pub name: String,
    pub germ: CatalogGerm,
}

impl fmt::Display for NamedGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn parse_params(spec: &str, body: &str, allowed: &[&str]) -> Result<Vec<(String, String)>, CatalogError> {
    let mut out = Vec::new();
    if body.is_empty() {
        return Ok(out);
    }
    for kv in body.split(',') {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CatalogError::Parse(spec.into(), format!("expected key=value, got `{kv}`")))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(CatalogError::Parse(spec.into(), format!("unknown key `{k}`")));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(CatalogError::Parse(spec.into(), format!("duplicate key `{k}`")));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn get<'a>(params: &'a [(String, String)], key: &str) -> Option<&'a str> {
    params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn num(spec: &str, key: &str, v: &str) -> Result<f64, CatalogError> {
    v.parse::<f64>()
        .map_err(|_| CatalogError::Parse(spec.into(), format!("`{key}` is not a number: `{v}`")))
}

fn num_or(spec: &str, params: &[(String, String)], key: &str, default: f64) -> Result<f64, CatalogError> {
    get(params, key).map_or(Ok(default), |v| num(spec, key, v))
}

impl FromStr for NamedGerm {
    type Err = CatalogError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let (head, body) = spec.split_once(':').unwrap_or((spec, ""));
        let germ = match head {
            "delta" => {
                parse_params(spec, body, &[])?;
                CatalogGerm::delta()
            }
            "example1" => {
                parse_params(spec, body, &[])?;
                CatalogGerm::Rational(RationalGerm::example1())
            }
            "example2" => {
                parse_params(spec, body, &[])?;
                CatalogGerm::Rational(RationalGerm::example2())
            }
            "log" => {
                parse_params(spec, body, &[])?;
                CatalogGerm::LogOverZeta
            }
            "shifted-log" => {
                let p = parse_params(spec, body, &["k"])?;
                let k = num_or(spec, &p, "k", 0.0)?;
                if k < 0.0 || k.fract() != 0.0 {
                    return Err(CatalogError::Parse(spec.into(), "k must be a nonnegative integer".into()));
                }
                CatalogGerm::ShiftedLog(k as usize)
            }
            "ladder" => {
                parse_params(spec, body, &[])?;
                CatalogGerm::GeometricLadder
            }
            "ladder-F" => {
                parse_params(spec, body, &[])?;
                CatalogGerm::LadderF
            }
            "bm92" | "bm92-F" => {
                let p = parse_params(spec, body, &["q", "q_im", "phi"])?;
                let q = Complex64::new(num_or(spec, &p, "q", 0.5)?, num_or(spec, &p, "q_im", 0.0)?);
                let phase = match get(&p, "phi") {
                    None | Some("golden") => golden_phase(),
                    Some(v) => num(spec, "phi", v)?,
                };
                let bm = BorelMayer::new(q, phase)?;
                if head == "bm92" {
                    CatalogGerm::BorelMayer(bm)
                } else {
                    CatalogGerm::BorelMayerF(bm)
                }
            }
            "pole" => {
                let p = parse_params(spec, body, &["omega", "omega_im", "j"])?;
                let omega = Complex64::new(num_or(spec, &p, "omega", 1.0)?, num_or(spec, &p, "omega_im", 0.0)?);
                let j = num_or(spec, &p, "j", 1.0)?;
                if j < 1.0 || j.fract() != 0.0 || omega.norm() == 0.0 {
                    return Err(CatalogError::Parse(spec.into(), "need integer j ≥ 1 and ω ≠ 0".into()));
                }
                CatalogGerm::PoleGerm { omega, order: j as usize }
            }
            "simple" => {
                let p = parse_params(spec, body, &["A", "c", "f1"])?;
                let a = num_or(spec, &p, "A", 1.0)?;
                let c = num_or(spec, &p, "c", 1.0)?;
                let c = Complex64::new(c, 0.0);
                let variation = match get(&p, "f1").unwrap_or("const") {
                    "const" => EntireFactor::constant(c),
                    "exp" => EntireFactor::Exponential { amplitude: c, rate: ONE },
                    other => return Err(CatalogError::Parse(spec.into(), format!("unknown f1 `{other}`"))),
                };
                CatalogGerm::SimpleSingular(SimpleSingularGerm::new(Complex64::new(a, 0.0), variation))
            }
            _ => return Err(CatalogError::Parse(spec.into(), format!("unknown catalog germ `{head}`"))),
        };
        Ok(NamedGerm { name: spec.to_string(), germ })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn pole_coefficient_examples() {
        let d = pole_coefficients(ONE, 1, 10).unwrap();
        assert_eq!(d, TruncatedGerm::delta(10));
        let p2 = pole_coefficients(ONE, 2, 10).unwrap();
        for n in 0..10 {
            assert!((p2.coeff(n) - c((n + 1) as f64)).norm() < 1e-13);
        }
        let half = pole_coefficients(c(2.0), 1, 30).unwrap();
        for n in 0..30 {
            assert!((half.coeff(n) - c(0.5f64.powi(n as i32 + 1))).norm() < 1e-16);
        }
        assert!(pole_coefficients(ZERO, 1, 3).is_err());
    }

    #[test]
    fn log_over_zeta_examples() {
        let g = log_over_zeta_coefficients(64);
        assert_eq!(g.coeff(0), ONE);
        let prod = g.hadamard_product(&pole_coefficients(ONE, 2, 64).unwrap());
        for x in prod.coeffs() {
            assert!((x - ONE).norm() < 1e-14);
        }
        let s = g.eval(c(0.5));
        assert!((s.re - 1.386_294_361_119_890_6).abs() < 1e-10);
        let e = CatalogGerm::LogOverZeta.eval(c(0.5)).unwrap();
        assert!((e.re - 1.386_294_361_119_890_6).abs() < 1e-14);
    }

    #[test]
    fn ladder_examples() {
        let g = geometric_ladder_inverse(40);
        assert_eq!(g.coeff(1), c(2.0));
        let inv = geometric_ladder_f(40).hadamard_inverse().unwrap();
        for n in 0..40 {
            assert!((inv.coeff(n) - g.coeff(n)).norm() < 1e-15 * g.coeff(n).norm());
        }
        // Two independent summations at ζ = 0.5: the m-sum up to 60 and the Taylor partial sum.
        let z = c(0.5);
        let msum: Complex64 = ONE + (0..=60).map(|m| z / (2f64.powi(m) - z)).sum::<Complex64>();
        let taylor = geometric_ladder_inverse(80).eval(z);
        assert!((msum - taylor).norm() < 1e-10);
        assert!((CatalogGerm::GeometricLadder.eval(z).unwrap() - msum).norm() < 1e-13);
    }

    #[test]
    fn ladder_f_is_rational_expansion() {
        let r = RationalGerm::new(c(2.0), vec![c(-2.0)], vec![ONE]).unwrap();
        let f = r.expand(30).add(&TruncatedGerm::delta(30));
        assert_eq!(f.coeff(0), ONE);
        for n in 1..30 {
            assert!((f.coeff(n) - c(1.0 - 0.5f64.powi(n as i32))).norm() < 1e-15);
        }
    }

    #[test]
    fn borel_mayer_examples() {
        let p = Complex64::from_polar(1.0, TAU * golden_phase());
        let g = borel_mayer_coefficients(ZERO, p, 20).unwrap();
        assert_eq!(g, TruncatedGerm::delta(20));
        let g = borel_mayer_coefficients(c(0.5), p, 200).unwrap();
        assert!((g.coeff(0) - c(2.0)).norm() < 1e-15);
        let bound = 1.0 / (1.0 - 0.5) + 1e-12;
        assert!(g.coeffs().iter().all(|x| x.norm() <= bound));
    }

    #[test]
    fn borel_mayer_rejects_bad_parameters() {
        let p = Complex64::from_polar(1.0, TAU * golden_phase());
        assert!(matches!(borel_mayer_coefficients(c(1.0), p, 4), Err(CatalogError::InvalidParameters(_))));
        assert!(matches!(borel_mayer_coefficients(c(0.5), p * 1.01, 4), Err(CatalogError::InvalidParameters(_))));
        let root = Complex64::from_polar(1.0, TAU / 7.0);
        assert!(matches!(borel_mayer_coefficients(c(0.5), root, 4), Err(CatalogError::InvalidParameters(_))));
        assert!(BorelMayer::new(c(0.5), 0.25).is_err());
    }

    #[test]
    fn expand_examples() {
        let e1 = RationalGerm::example1().expand(50);
        let e2 = RationalGerm::example2().expand(50);
        for n in 0..50 {
            assert!((e1.coeff(n) - c((n + 1) as f64)).norm() < 1e-12);
            assert!((e2.coeff(n) - c(((n + 1) * (n + 3)) as f64)).norm() < 1e-10);
        }
    }

    #[test]
    fn expand_is_linear() {
        let a = RationalGerm::new(c(1.5), vec![c(1.0), Complex64::new(0.0, 2.0)], vec![c(3.0)]).unwrap();
        let b = RationalGerm::new(c(1.5), vec![c(-0.5), c(1.0)], vec![c(1.0), c(1.0)]).unwrap();
        let sum = RationalGerm::new(c(1.5), vec![c(0.5), Complex64::new(1.0, 2.0)], vec![c(4.0), c(1.0)]).unwrap();
        let lhs = a.expand(40).add(&b.expand(40));
        let rhs = sum.expand(40);
        for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            assert!((x - y).norm() < 1e-12 * x.norm().max(1.0));
        }
    }

    #[test]
    fn rational_germ_invariants() {
        assert!(RationalGerm::new(ZERO, vec![ONE], vec![]).is_err());
        assert!(RationalGerm::new(ONE, vec![ONE, ZERO], vec![]).is_err());
        assert!(RationalGerm::new(ONE, vec![], vec![]).is_err());
    }

    #[test]
    fn entire_correction_examples() {
        let zero = TruncatedGerm::zero(10);
        let b = TruncatedGerm::delta(10);
        assert_eq!(entire_correction(&b, &zero).unwrap(), zero);

        let h = TruncatedGerm::from_fn(30, |n| c(0.5f64.powi(n as i32)));
        let corr = entire_correction(&TruncatedGerm::delta(30), &h).unwrap();
        for n in 0..30 {
            let x = 0.5f64.powi(n as i32);
            assert!((corr.coeff(n) - c(x / (1.0 + x))).norm() < 1e-16);
        }

        let b = log_over_zeta_coefficients(256);
        let mut fact = 1.0;
        let h = TruncatedGerm::from_fn(256, |n| {
            if n > 0 {
                fact *= n as f64;
            }
            c(1.0 / fact)
        });
        let corr = entire_correction(&b, &h).unwrap();
        let limsup = (128..256)
            .map(|n| corr.coeff(n).norm().powf(1.0 / n as f64))
            .fold(0.0, f64::max);
        assert!(limsup < 0.51, "root test {limsup}");

        // the perturbed inverse really inverts F + h
        let f = b.hadamard_inverse().unwrap();
        let g1 = b.sub(&corr);
        let prod = f.add(&h).hadamard_product(&g1);
        for x in prod.coeffs() {
            assert!((x - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn entire_correction_resonance() {
        let b = TruncatedGerm::delta(4);
        let h = TruncatedGerm::from_real(&[0.0, 0.0, -1.0, 0.0]).unwrap();
        assert_eq!(entire_correction(&b, &h), Err(CatalogError::ResonantCoefficient(2)));
    }

    fn termwise_check(f0: &RationalGerm, g0: &RationalGerm) {
        let r = pole_hadamard_pole(f0, g0).unwrap();
        assert_eq!(r.pole_order(), f0.pole_order() + g0.pole_order() - 1);
        let lhs = r.expand(200);
        let rhs = f0.expand(200).hadamard_product(&g0.expand(200));
        for n in 0..200 {
            let (a, b) = (lhs.coeff(n), rhs.coeff(n));
            assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-300), "n={n}: {a} vs {b}");
        }
        let top = *r.pole_coeffs().last().unwrap();
        let scale = f0.pole_coeffs().last().unwrap().norm() * g0.pole_coeffs().last().unwrap().norm();
        assert!(top.norm() > 1e-12 * scale);
    }

    #[test]
    fn pole_hadamard_pole_small_cases() {
        let a1 = c(3.0);
        let b1 = Complex64::new(0.5, -1.0);
        let r = pole_hadamard_pole(&RationalGerm::pure(ONE, vec![a1]).unwrap(), &RationalGerm::pure(ONE, vec![b1]).unwrap())
            .unwrap();
        assert_eq!(r.pole_coeffs(), &[a1 * b1]);

        termwise_check(
            &RationalGerm::pure(ONE, vec![c(1.0), c(2.0)]).unwrap(),
            &RationalGerm::pure(ONE, vec![c(1.0)]).unwrap(),
        );
    }

    #[test]
    fn pole_hadamard_pole_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let m = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=4);
            let rc = |rng: &mut ChaCha8Rng| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let a: Vec<_> = (0..m).map(|_| rc(&mut rng)).collect();
            let b: Vec<_> = (0..n).map(|_| rc(&mut rng)).collect();
            let omega = Complex64::from_polar(rng.gen_range(1.2..2.0), rng.gen_range(0.0..TAU));
            termwise_check(&RationalGerm::pure(ONE, a).unwrap(), &RationalGerm::pure(omega, b).unwrap());
        }
    }

    #[test]
    fn evaluators_match_coefficient_rules() {
        let bm = BorelMayer::golden(0.5).unwrap();
        let germs = vec![
            CatalogGerm::delta(),
            CatalogGerm::PoleGerm { omega: Complex64::new(0.0, 2.0), order: 3 },
            CatalogGerm::LogOverZeta,
            CatalogGerm::ShiftedLog(2),
            CatalogGerm::GeometricLadder,
            CatalogGerm::LadderF,
            CatalogGerm::BorelMayer(bm),
            CatalogGerm::BorelMayerF(bm),
            CatalogGerm::EntirePolynomial(vec![ONE, c(-2.0), Complex64::new(0.0, 1.0)]),
            CatalogGerm::Rational(RationalGerm::example2()),
            CatalogGerm::SimpleSingular(SimpleSingularGerm::new(ONE, EntireFactor::constant(c(0.7)))),
            CatalogGerm::SimpleSingular(SimpleSingularGerm::new(
                c(2.0),
                EntireFactor::Exponential { amplitude: c(1.0), rate: c(1.0) },
            )),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in &germs {
            let series = g.coefficients(128);
            for _ in 0..20 {
                let z = Complex64::from_polar(rng.gen_range(0.0..0.3), rng.gen_range(0.0..TAU));
                let diff = (series.eval(z) - g.eval(z).unwrap()).norm();
                assert!(diff < 1e-9, "{g:?} at {z}: {diff}");
            }
        }
    }

    #[test]
    fn exponential_log_recurrence_matches_convolution() {
        let s = SimpleSingularGerm::new(c(0.0), EntireFactor::Exponential { amplitude: ONE, rate: c(1.0) });
        let got = s.coefficients(40);
        let mut fact = vec![1.0; 40];
        for k in 1..40 {
            fact[k] = fact[k - 1] * k as f64;
        }
        for n in 0..40 {
            let conv: f64 = (1..=n).map(|m| -1.0 / (m as f64 * fact[n - m])).sum();
            let want = c(conv) / (TAU * I);
            assert!((got.coeff(n) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn taylor_shift_of_polynomial() {
        let f = EntireFactor::Polynomial(vec![ONE, c(2.0), c(3.0)]);
        let t = f.taylor_at(c(1.0), 4);
        // 1 + 2(1+x) + 3(1+x)² = 6 + 8x + 3x²
        assert_eq!(t.coeffs(), &[c(6.0), c(8.0), c(3.0), ZERO]);
        let e = EntireFactor::Exponential { amplitude: c(2.0), rate: c(1.0) };
        let t = e.taylor_at(ONE, 3);
        assert!((t.coeff(2) - c(std::f64::consts::E)).norm() < 1e-15);
    }

    #[test]
    fn parse_names() {
        let g: NamedGerm = "bm92:q=0.5,phi=golden".parse().unwrap();
        assert!(matches!(g.germ, CatalogGerm::BorelMayer(_)));
        assert!("example2".parse::<NamedGerm>().is_ok());
        assert!("ladder-F".parse::<NamedGerm>().is_ok());
        assert!("pole:omega=2,j=3".parse::<NamedGerm>().is_ok());
        assert!(matches!("bm92:q=0.5,r=1".parse::<NamedGerm>(), Err(CatalogError::Parse(..))));
        assert!(matches!("nope".parse::<NamedGerm>(), Err(CatalogError::Parse(..))));
        assert!(matches!("bm92:q=2".parse::<NamedGerm>(), Err(CatalogError::InvalidParameters(_))));
        assert!("simple:A=1,c=0.1".parse::<NamedGerm>().is_ok());
    }
}
