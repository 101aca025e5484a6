//! Hadamard products as circle integrals, and limit probes near a singular point.
//!
//! ```text
//! (F ⊙ G)(ζ) = 1/(2πi) ∮_I F(ζ/z) G(z) dz/z        I encloses 0 and ζ
//!            = 1/(2πi) ∮_C F(z) G(ζ/z) dz/z        roles exchanged
//!            = ∮_K … + ∮_J …                        F meromorphic: K large, J around the pole (clockwise)
//! ```
//!
//! Integrals use the trapezoid rule on circles, which converges
//! geometrically for analytic periodic integrands. Contours must keep a
//! margin of `0.05·radius` from every singular point of the integrand.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{BranchCut, CatalogError, CatalogGerm, Domain, LogTypeGerm, RationalGerm, SimpleSingularGerm};
use crate::germ::CoefficientSource;

pub const DEFAULT_NODES: usize = 256;
pub const MAX_NODES: usize = 8192;
pub const CAUCHY_TOL: f64 = 1e-10;
/// Minimum distance between a contour and a singular point, relative to the radius.
pub const SAFETY_MARGIN: f64 = 0.05;
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("contour_quadrature: invalid contour: {0}")]
    InvalidSpec(String),
    #[error("contour_quadrature: contour does not separate the singularities: {0}")]
    NonEnclosing(String),
    #[error("contour_quadrature: domain violation: {0}")]
    DomainViolation(String),
    #[error("contour_quadrature: partial sums did not settle after {0} terms")]
    SeriesDiverges(usize),
}

impl From<CatalogError> for QuadratureError {
    fn from(e: CatalogError) -> Self {
        QuadratureError::DomainViolation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Anticlockwise,
    Clockwise,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Self::Anticlockwise => 1.0,
            Self::Clockwise => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    center: Complex64,
    radius: f64,
    nodes: usize,
    orientation: Orientation,
}

impl QuadratureSpec {
    pub fn new(center: Complex64, radius: f64, nodes: usize, orientation: Orientation) -> Result<Self, QuadratureError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(QuadratureError::InvalidSpec(format!("radius {radius} must be positive")));
        }
        if nodes < MIN_NODES {
            return Err(QuadratureError::InvalidSpec(format!("{nodes} nodes, need at least {MIN_NODES}")));
        }
        Ok(Self { center, radius, nodes, orientation })
    }

    /// Anticlockwise circle about 0 with the default node count.
    pub fn circle(radius: f64) -> Result<Self, QuadratureError> {
        Self::new(Complex64::new(0.0, 0.0), radius, DEFAULT_NODES, Orientation::Anticlockwise)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Result<Self, QuadratureError> {
        if nodes < MIN_NODES {
            return Err(QuadratureError::InvalidSpec(format!("{nodes} nodes, need at least {MIN_NODES}")));
        }
        self.nodes = nodes;
        Ok(self)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    fn node(&self, k: usize, n: usize) -> (Complex64, Complex64) {
        let e = Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
        (self.center + self.radius * e, self.radius * e)
    }

    fn encloses(&self, p: Complex64) -> bool {
        (p - self.center).norm() < self.radius
    }

    fn clearance(&self, p: Complex64) -> f64 {
        ((p - self.center).norm() - self.radius).abs()
    }

    fn min_modulus(&self) -> f64 {
        (self.radius - self.center.norm()).abs()
    }

    fn max_modulus(&self) -> f64 {
        self.radius + self.center.norm()
    }
}

/// A single-valued principal-sheet function with declared singularities.
pub trait PointEvaluator: Sync {
    fn eval(&self, z: Complex64) -> Result<Complex64, QuadratureError>;
    fn singular_points(&self) -> Vec<Complex64>;
    fn branch_cuts(&self) -> Vec<BranchCut> {
        Vec::new()
    }
    fn domain(&self) -> Domain {
        Domain::Plane
    }
}

impl PointEvaluator for CatalogGerm {
    fn eval(&self, z: Complex64) -> Result<Complex64, QuadratureError> {
        Ok(CatalogGerm::eval(self, z)?)
    }
    fn singular_points(&self) -> Vec<Complex64> {
        CatalogGerm::singular_points(self)
    }
    fn branch_cuts(&self) -> Vec<BranchCut> {
        CatalogGerm::branch_cuts(self)
    }
    fn domain(&self) -> Domain {
        CatalogGerm::domain(self)
    }
}

impl PointEvaluator for RationalGerm {
    fn eval(&self, z: Complex64) -> Result<Complex64, QuadratureError> {
        Ok(RationalGerm::eval(self, z)?)
    }
    fn singular_points(&self) -> Vec<Complex64> {
        vec![self.pole()]
    }
}

impl PointEvaluator for SimpleSingularGerm {
    fn eval(&self, z: Complex64) -> Result<Complex64, QuadratureError> {
        Ok(SimpleSingularGerm::eval(self, z)?)
    }
    fn singular_points(&self) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0)]
    }
    fn branch_cuts(&self) -> Vec<BranchCut> {
        CatalogGerm::LogOverZeta.branch_cuts()
    }
}

impl PointEvaluator for LogTypeGerm {
    fn eval(&self, z: Complex64) -> Result<Complex64, QuadratureError> {
        Ok(LogTypeGerm::eval(self, z)?)
    }
    fn singular_points(&self) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0)]
    }
    fn branch_cuts(&self) -> Vec<BranchCut> {
        CatalogGerm::LogOverZeta.branch_cuts()
    }
}

/// Value of a circle integral together with its refinement history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureOutcome {
    pub value: Complex64,
    pub nodes: usize,
    /// `|I_n − I_{n/2}|` at the final node count.
    pub cauchy_diff: f64,
    /// `(nodes, value)` for every level computed, starting at the requested count.
    pub history: Vec<(usize, Complex64)>,
}

impl QuadratureOutcome {
    /// Value at the node count the spec asked for.
    pub fn initial(&self) -> Complex64 {
        self.history[0].1
    }
}

/// `1/(2πi) ∮ φ(z) dz`, doubling the node count until successive values
/// differ by less than [`CAUCHY_TOL`] or [`MAX_NODES`] is reached.
pub fn circle_integral(
    spec: &QuadratureSpec,
    phi: impl Fn(Complex64) -> Result<Complex64, QuadratureError>,
) -> Result<QuadratureOutcome, QuadratureError> {
    let sign = spec.orientation.sign();
    // (1/2πi) dz = (1/2π) r e^{iθ} dθ
    let level_sum = |n: usize, ks: &mut dyn Iterator<Item = usize>| -> Result<Complex64, QuadratureError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in ks {
            let (z, dz) = spec.node(k, n);
            acc += phi(z)? * dz;
        }
        Ok(acc)
    };
    let mut n = spec.nodes;
    let mut sum = level_sum(n, &mut (0..n))?;
    let mut value = sign * sum / n as f64;
    let mut history = vec![(n, value)];
    let mut diff = f64::INFINITY;
    while n < MAX_NODES.max(spec.nodes) {
        let odd = level_sum(2 * n, &mut (0..n).map(|k| 2 * k + 1))?;
        sum += odd;
        n *= 2;
        let next = sign * sum / n as f64;
        diff = (next - value).norm();
        value = next;
        history.push((n, value));
        if diff < CAUCHY_TOL {
            break;
        }
    }
    Ok(QuadratureOutcome { value, nodes: n, cauchy_diff: diff, history })
}

fn segment_hits_ray(a: Complex64, b: Complex64, cut: &BranchCut) -> bool {
    // solve a + s(b−a) = start + t·dir, s ∈ [0,1], t ≥ 0
    let d = b - a;
    let dir = cut.direction;
    let cross = |u: Complex64, v: Complex64| u.re * v.im - u.im * v.re;
    let denom = cross(d, dir);
    let w = cut.start - a;
    if denom.abs() < 1e-300 {
        return false;
    }
    let s = cross(w, dir) / denom;
    let t = cross(w, d) / denom;
    (0.0..=1.0).contains(&s) && t >= 0.0
}

/// Which argument an evaluator receives on the contour.
#[derive(Clone, Copy)]
enum Argument {
    Direct,
    Quotient(Complex64),
}

impl Argument {
    fn map(self, z: Complex64) -> Complex64 {
        match self {
            Self::Direct => z,
            Self::Quotient(zeta) => zeta / z,
        }
    }
}

fn check_factor(
    name: &str,
    f: &dyn PointEvaluator,
    arg: Argument,
    spec: &QuadratureSpec,
    inside: bool,
) -> Result<(), QuadratureError> {
    let margin = SAFETY_MARGIN * spec.radius;
    for s in f.singular_points() {
        let p = match arg {
            Argument::Direct => s,
            Argument::Quotient(zeta) => {
                if s.norm() == 0.0 {
                    continue;
                }
                zeta / s
            }
        };
        if spec.clearance(p) < margin {
            return Err(QuadratureError::DomainViolation(format!(
                "{name} singularity maps to {p}, closer than {margin:.3e} to the contour"
            )));
        }
        if spec.encloses(p) != inside {
            let want = if inside { "inside" } else { "outside" };
            return Err(QuadratureError::NonEnclosing(format!("{name} singularity image {p} must lie {want}")));
        }
    }
    if let Domain::Disk { radius } = f.domain() {
        let reach = match arg {
            Argument::Direct => spec.max_modulus(),
            Argument::Quotient(zeta) => {
                let m = spec.min_modulus();
                if m == 0.0 {
                    f64::INFINITY
                } else {
                    zeta.norm() / m
                }
            }
        };
        if reach > radius * (1.0 - SAFETY_MARGIN) {
            return Err(QuadratureError::DomainViolation(format!(
                "{name} is evaluated out to |w| = {reach:.4}, its domain is |w| < {radius}"
            )));
        }
    }
    let cuts = f.branch_cuts();
    if !cuts.is_empty() {
        let n = spec.nodes.max(DEFAULT_NODES);
        for k in 0..n {
            let a = arg.map(spec.node(k, n).0);
            let b = arg.map(spec.node(k + 1, n).0);
            if let Some(cut) = cuts.iter().find(|c| segment_hits_ray(a, b, c)) {
                return Err(QuadratureError::DomainViolation(format!(
                    "{name} is evaluated across its branch cut from {}",
                    cut.start
                )));
            }
        }
    }
    Ok(())
}

fn product_integral(
    outer: &dyn PointEvaluator,
    inner: &dyn PointEvaluator,
    zeta: Complex64,
    spec: &QuadratureSpec,
) -> Result<QuadratureOutcome, QuadratureError> {
    // ∮ outer(ζ/z) inner(z) dz/z
    if !spec.encloses(Complex64::new(0.0, 0.0)) || !spec.encloses(zeta) {
        return Err(QuadratureError::NonEnclosing(format!(
            "circle |z − {}| = {} must enclose 0 and ζ = {zeta}",
            spec.center, spec.radius
        )));
    }
    check_factor("quotient factor", outer, Argument::Quotient(zeta), spec, true)?;
    check_factor("direct factor", inner, Argument::Direct, spec, false)?;
    circle_integral(spec, |z| Ok(outer.eval(zeta / z)? * inner.eval(z)? / z))
}

/// `1/(2πi) ∮ F(ζ/z) G(z) dz/z` on a circle enclosing 0 and ζ.
pub fn hadamard_on_i(
    f: &dyn PointEvaluator,
    g: &dyn PointEvaluator,
    zeta: Complex64,
    spec: &QuadratureSpec,
) -> Result<QuadratureOutcome, QuadratureError> {
    product_integral(f, g, zeta, spec)
}

/// `1/(2πi) ∮ F(z) G(ζ/z) dz/z`; the caller declares G's singular set,
/// whose images `ζ/s` must lie inside the circle.
pub fn hadamard_on_c(
    f: &dyn PointEvaluator,
    g: &dyn PointEvaluator,
    zeta: Complex64,
    spec: &QuadratureSpec,
) -> Result<QuadratureOutcome, QuadratureError> {
    product_integral(g, f, zeta, spec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KjOutcome {
    pub k_part: QuadratureOutcome,
    pub j_part: QuadratureOutcome,
}

impl KjOutcome {
    pub fn total(&self) -> Complex64 {
        self.k_part.value + self.j_part.value
    }
}

fn check_kj(f: &RationalGerm, g: &dyn PointEvaluator, zeta: Complex64, k: &QuadratureSpec, j: &QuadratureSpec) -> Result<(), QuadratureError> {
    if k.orientation != Orientation::Anticlockwise || j.orientation != Orientation::Clockwise {
        return Err(QuadratureError::InvalidSpec("K must run anticlockwise and J clockwise".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    if !j.encloses(f.pole()) || j.clearance(f.pole()) < SAFETY_MARGIN * j.radius {
        return Err(QuadratureError::NonEnclosing(format!("J must enclose the pole {} with margin", f.pole())));
    }
    if j.encloses(zero) {
        return Err(QuadratureError::NonEnclosing("J must not enclose 0".into()));
    }
    if (j.center - k.center).norm() + j.radius >= k.radius * (1.0 - SAFETY_MARGIN) || !k.encloses(zero) {
        return Err(QuadratureError::NonEnclosing("K must enclose 0 and J".into()));
    }
    for s in g.singular_points() {
        if s.norm() == 0.0 {
            continue;
        }
        let p = zeta / s;
        if j.encloses(p) || j.clearance(p) < SAFETY_MARGIN * j.radius {
            return Err(QuadratureError::NonEnclosing(format!("J must keep ζ/s = {p} outside")));
        }
    }
    check_factor("G", g, Argument::Quotient(zeta), k, true)?;
    // J lies outside every image ζ/s, so only domain and cuts matter there.
    if let Domain::Disk { radius } = g.domain() {
        let m = j.min_modulus();
        if zeta.norm() / m > radius * (1.0 - SAFETY_MARGIN) {
            return Err(QuadratureError::DomainViolation("G(ζ/z) on J leaves G's disk".into()));
        }
    }
    Ok(())
}

/// Default K and J circles for a pole at `pole`: K of radius `|pole| + 1`
/// about 0, J of radius `0.2·|pole|` about the pole.
pub fn kj_contours(pole: Complex64, nodes: usize) -> Result<(QuadratureSpec, QuadratureSpec), QuadratureError> {
    let k = QuadratureSpec::new(Complex64::new(0.0, 0.0), pole.norm() + 1.0, nodes, Orientation::Anticlockwise)?;
    let j = QuadratureSpec::new(pole, 0.2 * pole.norm(), nodes, Orientation::Clockwise)?;
    Ok((k, j))
}

/// Splits the C-integral into a large anticlockwise circle K and a small
/// clockwise circle J around the pole of F.
pub fn hadamard_on_kj(
    f: &RationalGerm,
    g: &dyn PointEvaluator,
    zeta: Complex64,
    k: &QuadratureSpec,
    j: &QuadratureSpec,
) -> Result<KjOutcome, QuadratureError> {
    check_kj(f, g, zeta, k, j)?;
    let integrand = |z: Complex64| Ok(f.eval(z)? * g.eval(zeta / z)? / z);
    let k_part = circle_integral(k, integrand)?;
    let j_part = circle_integral(j, integrand)?;
    Ok(KjOutcome { k_part, j_part })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntiretyProbe {
    /// Taylor coefficients of the K-part about ζ = 0, from samples on `|ζ| = sample_radius`.
    pub coefficients: Vec<Complex64>,
    /// Root-test radius over the upper half of the coefficients; infinite when those are all negligible.
    pub radius_estimate: f64,
    pub sample_radius: f64,
}

impl EntiretyProbe {
    pub fn exceeds(&self, radius: f64) -> bool {
        self.radius_estimate > radius
    }
}

/// Samples the K-part on a circle of ζ-values and estimates the radius of
/// convergence of its Taylor series by the root test.
pub fn k_part_entirety_probe(
    f: &RationalGerm,
    g: &dyn PointEvaluator,
    k: &QuadratureSpec,
    j: &QuadratureSpec,
    sample_radius: f64,
    samples: usize,
) -> Result<EntiretyProbe, QuadratureError> {
    let mut values = Vec::with_capacity(samples);
    for m in 0..samples {
        let zeta = Complex64::from_polar(sample_radius, TAU * m as f64 / samples as f64);
        check_kj(f, g, zeta, k, j)?;
        let integrand = |z: Complex64| Ok(f.eval(z)? * g.eval(zeta / z)? / z);
        values.push(circle_integral(k, integrand)?.value);
    }
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let coefficients: Vec<Complex64> = (0..samples / 2)
        .map(|n| {
            let s: Complex64 = values
                .iter()
                .enumerate()
                .map(|(m, v)| v * Complex64::from_polar(1.0, -TAU * (n * m) as f64 / samples as f64))
                .sum();
            s / samples as f64 / sample_radius.powi(n as i32)
        })
        .collect();
    let noise = 1e-12 * scale;
    let tail: Vec<f64> = coefficients
        .iter()
        .enumerate()
        .skip(coefficients.len() / 2)
        .filter(|(n, c)| c.norm() * sample_radius.powi(*n as i32) > noise)
        .map(|(n, c)| c.norm().powf(-1.0 / n as f64))
        .collect();
    let radius_estimate = tail.into_iter().fold(f64::INFINITY, f64::min);
    Ok(EntiretyProbe { coefficients, radius_estimate, sample_radius })
}

/// What a limit probe evaluates.
pub enum ProbeSource<'a> {
    Evaluator(&'a dyn PointEvaluator),
    /// Abel partial sums of a coefficient stream.
    Coefficients(&'a dyn CoefficientSource),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaySchedule {
    pub direction: Complex64,
    pub offsets: Vec<f64>,
}

impl RaySchedule {
    /// Real ray from below: offsets `2^{−k}` for `k` in `ks`.
    pub fn dyadic(ks: std::ops::RangeInclusive<i32>) -> Self {
        Self { direction: Complex64::new(1.0, 0.0), offsets: ks.map(|k| 2f64.powi(-k)).collect() }
    }
}

impl Default for RaySchedule {
    fn default() -> Self {
        Self::dyadic(1..=20)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeSample {
    pub offset: f64,
    pub zeta: Complex64,
    pub value: Complex64,
    /// `(ζ − ω)^M · value`.
    pub scaled: Complex64,
}

/// Hard cap on terms in one Abel partial sum.
pub const MAX_SERIES_TERMS: usize = 400_000_000;

/// Sums `Σ c_n ζⁿ` until the terms are negligible.
pub fn abel_sum(source: &dyn CoefficientSource, zeta: Complex64) -> Result<Complex64, QuadratureError> {
    const WINDOW: usize = 64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut zn = Complex64::new(1.0, 0.0);
    let mut window_max = 0.0f64;
    for (n, c) in source.stream().enumerate() {
        let term = c * zn;
        // Kahan compensation
        let y = term - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        window_max = window_max.max(term.norm());
        zn *= zeta;
        if (n + 1) % WINDOW == 0 {
            if window_max <= 1e-18 * acc.norm() || (window_max == 0.0 && zn.norm() < 1e-300) {
                return Ok(acc);
            }
            window_max = 0.0;
        }
        if n >= MAX_SERIES_TERMS {
            return Err(QuadratureError::SeriesDiverges(n));
        }
    }
    Ok(acc)
}

/// Samples `(ζ−ω)^M · value(ζ)` at `ζ = ω(1 − offset·direction)`.
pub fn limit_probe(
    product: &ProbeSource<'_>,
    omega: Complex64,
    power: u32,
    ray: &RaySchedule,
) -> Result<Vec<ProbeSample>, QuadratureError> {
    ray.offsets
        .iter()
        .map(|&offset| {
            let zeta = omega * (Complex64::new(1.0, 0.0) - ray.direction * offset);
            let value = match product {
                ProbeSource::Evaluator(f) => f.eval(zeta)?,
                ProbeSource::Coefficients(c) => abel_sum(*c, zeta)?,
            };
            Ok(ProbeSample { offset, zeta, value, scaled: (zeta - omega).powu(power) * value })
        })
        .collect()
}

/// Mean of `a_n b_n` over `window`; tends to `A·B` when both germs carry
/// simple poles `A/(1−ζ)`, `B/(1−ζ)` plus logarithmic parts.
pub fn polar_coefficient_limit(
    a: &dyn CoefficientSource,
    b: &dyn CoefficientSource,
    window: std::ops::Range<usize>,
) -> Complex64 {
    let len = window.len().max(1) as f64;
    let total: Complex64 = a
        .stream()
        .zip(b.stream())
        .enumerate()
        .skip(window.start)
        .take(window.len())
        .map(|(_, (x, y))| x * y)
        .sum();
    total / len
}

/// Probe rows as CSV: `offset,re,im,abs_scaled` (value columns are the scaled value).
pub fn probe_csv(samples: &[ProbeSample]) -> String {
    let mut out = String::from("offset,re,im,abs_scaled\n");
    for s in samples {
        out.push_str(&format!("{:e},{:e},{:e},{:e}\n", s.offset, s.scaled.re, s.scaled.im, s.scaled.norm()));
    }
    out
}
