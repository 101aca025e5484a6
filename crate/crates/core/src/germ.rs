//! Truncated power series at the origin and the Hadamard algebra on them.
//!
//! A [`TruncatedGerm`] stores the first `order` Taylor coefficients
//! `c_0, .., c_{order-1}` of a germ. Binary operations on germs of different
//! orders truncate to the shorter operand.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coefficients with modulus below this are treated as vanishing by
/// [`TruncatedGerm::hadamard_inverse`].
pub const ZERO_COEFFICIENT_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GermError {
    #[error("germ_core: a germ needs at least one coefficient")]
    EmptyGerm,
    #[error("germ_core: coefficient {0} is not finite")]
    NonFinite(usize),
    #[error("germ_core: coefficient {0} vanishes, no Hadamard inverse")]
    ZeroCoefficient(usize),
    #[error("germ_core: shift {shift} needs order > {shift}, germ has order {order}")]
    OrderUnderflow { shift: usize, order: usize },
}

/// `1/c` via polar form, which stays finite where `|c|²` would underflow.
fn reciprocal(c: Complex64) -> Complex64 {
    if c.im == 0.0 {
        return Complex64::new(c.re.recip(), 0.0);
    }
    let (r, theta) = c.to_polar();
    Complex64::from_polar(r.recip(), -theta)
}

/// A germ at 0 known to `order` coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct TruncatedGerm {
    coeffs: Vec<Complex64>,
}

impl TryFrom<Vec<Complex64>> for TruncatedGerm {
    type Error = GermError;

    fn try_from(coeffs: Vec<Complex64>) -> Result<Self, Self::Error> {
        Self::new(coeffs)
    }
}

impl From<TruncatedGerm> for Vec<Complex64> {
    fn from(g: TruncatedGerm) -> Self {
        g.coeffs
    }
}

impl TruncatedGerm {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, GermError> {
        if coeffs.is_empty() {
            return Err(GermError::EmptyGerm);
        }
        if let Some(n) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(GermError::NonFinite(n));
        }
        Ok(Self { coeffs })
    }

    /// Builds a germ from a coefficient rule. Panics if `order == 0`.
    pub fn from_fn(order: usize, f: impl FnMut(usize) -> Complex64) -> Self {
        assert!(order >= 1, "germ order must be positive");
        Self { coeffs: (0..order).map(f).collect() }
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, GermError> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::from_fn(order, |_| Complex64::new(0.0, 0.0))
    }

    /// The unit `δ = 1/(1-ζ)` of the Hadamard algebra.
    pub fn delta(order: usize) -> Self {
        Self::from_fn(order, |_| Complex64::new(1.0, 0.0))
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs[n]
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Keeps the first `order` coefficients (or all of them if fewer).
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.clamp(1, self.order());
        Self { coeffs: self.coeffs[..order].to_vec() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect();
        Self { coeffs }
    }

    /// Termwise product `Σ a_n b_n ζ^n`.
    pub fn hadamard_product(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn hadamard_inverse(&self) -> Result<Self, GermError> {
        self.hadamard_inverse_with(ZERO_COEFFICIENT_THRESHOLD)
    }

    /// Hadamard inverse, treating `|c_n| < threshold` as a vanishing coefficient.
    pub fn hadamard_inverse_with(&self, threshold: f64) -> Result<Self, GermError> {
        if let Some(n) = self.coeffs.iter().position(|c| c.norm() < threshold) {
            return Err(GermError::ZeroCoefficient(n));
        }
        Ok(Self { coeffs: self.coeffs.iter().map(|&c| reciprocal(c)).collect() })
    }

    /// Ordinary (Cauchy) product truncated to the shorter order.
    pub fn cauchy_product(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..order)
            .map(|n| (0..=n).map(|k| self.coeffs[k] * other.coeffs[n - k]).sum())
            .collect();
        Self { coeffs }
    }

    /// `∂^s f`: coefficient n is `(n+s)!/n! · f_{n+s}`.
    pub fn derivative(&self, s: usize) -> Result<Self, GermError> {
        let shifted = self.coefficient_shift(s)?;
        Ok(Self::from_fn(shifted.order(), |n| shifted.coeffs[n] * rising(n + 1, s)))
    }

    /// `Σ f_{n+s} ζ^n`.
    pub fn coefficient_shift(&self, s: usize) -> Result<Self, GermError> {
        if s >= self.order() {
            return Err(GermError::OrderUnderflow { shift: s, order: self.order() });
        }
        Ok(Self { coeffs: self.coeffs[s..].to_vec() })
    }

    /// `∂^s(ζ^s g)`, acting diagonally: coefficient n is `(n+s)!/n! · g_n`.
    pub fn theta_power(&self, s: usize) -> Self {
        Self::from_fn(self.order(), |n| self.coeffs[n] * rising(n + 1, s))
    }

    /// Horner evaluation of the truncated series.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Largest coefficient modulus.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Rising product `a (a+1) ... (a+s-1)` as a float; 1 for `s = 0`.
pub(crate) fn rising(a: usize, s: usize) -> f64 {
    (0..s).map(|i| (a + i) as f64).product()
}

/// Falling product `n (n-1) ... (n-k+1)`; zero when `k > n`.
pub(crate) fn falling(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| (n - i) as f64).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A possibly unbounded stream of Taylor coefficients at 0.
///
/// Limit probes sum tens of millions of terms, so sources are consumed
/// sequentially rather than indexed.
pub trait CoefficientSource: Sync {
    fn stream(&self) -> Box<dyn Iterator<Item = Complex64> + '_>;
}

impl CoefficientSource for TruncatedGerm {
    fn stream(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        Box::new(self.coeffs.iter().copied())
    }
}

/// Termwise product of two coefficient sources.
pub struct HadamardSource<'a> {
    pub left: &'a dyn CoefficientSource,
    pub right: &'a dyn CoefficientSource,
}

impl CoefficientSource for HadamardSource<'_> {
    fn stream(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        Box::new(self.left.stream().zip(self.right.stream()).map(|(a, b)| a * b))
    }
}

/// Coefficients given by an index rule `n ↦ c_n`.
pub struct FnSource<F>(pub F);

impl<F: Fn(usize) -> Complex64 + Sync> CoefficientSource for FnSource<F> {
    fn stream(&self) -> Box<dyn Iterator<Item = Complex64> + '_> {
        Box::new((0..).map(&self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn germ_strategy(max_order: usize) -> impl Strategy<Value = TruncatedGerm> {
        prop::collection::vec((0.0f64..1.0, 0.0f64..std::f64::consts::TAU), 1..=max_order)
            .prop_map(|v| {
                TruncatedGerm::new(v.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect())
                    .unwrap()
            })
    }

    #[test]
    fn delta_is_all_ones() {
        assert_eq!(TruncatedGerm::delta(1).coeffs(), &[c(1.0)]);
        assert_eq!(TruncatedGerm::delta(4).coeffs(), &[c(1.0); 4]);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert_eq!(TruncatedGerm::new(vec![]), Err(GermError::EmptyGerm));
        let bad = vec![c(1.0), Complex64::new(f64::NAN, 0.0)];
        assert_eq!(TruncatedGerm::new(bad), Err(GermError::NonFinite(1)));
    }

    #[test]
    fn example_one_pair_multiplies_to_delta() {
        let f = TruncatedGerm::from_fn(64, |n| c((n + 1) as f64));
        let g = TruncatedGerm::from_fn(64, |n| c(1.0 / (n + 1) as f64));
        let p = f.hadamard_product(&g);
        for x in p.coeffs() {
            assert!((x - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn example_two_inverse() {
        let f = TruncatedGerm::from_fn(50, |n| c(((n + 1) * (n + 3)) as f64));
        let g = f.hadamard_inverse().unwrap();
        for n in 0..50 {
            let want = 1.0 / ((n + 1) * (n + 3)) as f64;
            assert!((g.coeff(n).re - want).abs() <= 1e-15 * want);
        }
        let d = TruncatedGerm::delta(8);
        assert_eq!(d.hadamard_inverse().unwrap(), d);
    }

    #[test]
    fn inverse_reports_vanishing_index() {
        let f = TruncatedGerm::from_real(&[1.0, 0.5, 0.0, 2.0]).unwrap();
        assert_eq!(f.hadamard_inverse(), Err(GermError::ZeroCoefficient(2)));
        let tiny = TruncatedGerm::from_real(&[1.0, 1e-301]).unwrap();
        assert_eq!(tiny.hadamard_inverse(), Err(GermError::ZeroCoefficient(1)));
        assert!(tiny.hadamard_inverse_with(0.0).is_ok());
    }

    #[test]
    fn mixed_orders_truncate() {
        let f = TruncatedGerm::delta(5);
        let g = TruncatedGerm::delta(3);
        assert_eq!(f.hadamard_product(&g).order(), 3);
        assert_eq!(f.cauchy_product(&g).order(), 3);
    }

    #[test]
    fn cauchy_square_of_delta() {
        let d = TruncatedGerm::delta(10);
        let sq = d.cauchy_product(&d);
        for n in 0..10 {
            assert_eq!(sq.coeff(n), c((n + 1) as f64));
        }
        let mut one = vec![c(0.0); 10];
        one[0] = c(1.0);
        let one = TruncatedGerm::new(one).unwrap();
        let f = TruncatedGerm::from_fn(10, |n| Complex64::new(n as f64, -1.0));
        assert_eq!(f.cauchy_product(&one), f);
    }

    #[test]
    fn derivative_and_shift() {
        let d = TruncatedGerm::delta(6);
        let d1 = d.derivative(1).unwrap();
        assert_eq!(d1.order(), 5);
        for n in 0..5 {
            assert_eq!(d1.coeff(n), c((n + 1) as f64));
        }
        assert_eq!(d.derivative(0).unwrap(), d);
        assert_eq!(d.derivative(6), Err(GermError::OrderUnderflow { shift: 6, order: 6 }));

        let f = TruncatedGerm::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(f.coefficient_shift(2).unwrap().coeffs(), &[c(3.0), c(4.0)]);
        assert_eq!(f.coefficient_shift(0).unwrap(), f);
        assert!(f.coefficient_shift(4).is_err());
    }

    #[test]
    fn theta_power_basics() {
        let d = TruncatedGerm::delta(7);
        let t = d.theta_power(1);
        for n in 0..7 {
            assert_eq!(t.coeff(n), c((n + 1) as f64));
        }
        assert_eq!(d.theta_power(0), d);
    }

    #[test]
    fn derivative_matches_index_oracle() {
        // ∂² of Σ f_k ζ^k, term by term: k(k-1) f_k ζ^{k-2}.
        let f = TruncatedGerm::from_fn(12, |n| Complex64::new((n as f64).sin(), (n * n) as f64 * 0.01));
        let d2 = f.derivative(2).unwrap();
        for k in 2..12 {
            let want = f.coeff(k) * (k * (k - 1)) as f64;
            assert!((d2.coeff(k - 2) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn helpers() {
        assert_eq!(falling(5, 2), 20.0);
        assert_eq!(falling(2, 3), 0.0);
        assert_eq!(binomial(6, 2), 15.0);
        assert_eq!(rising(3, 3), 60.0);
    }

    proptest! {
        #[test]
        fn product_laws(f in germ_strategy(40), g in germ_strategy(40), h in germ_strategy(40)) {
            prop_assert_eq!(f.hadamard_product(&g), g.hadamard_product(&f));
            let d = TruncatedGerm::delta(f.order());
            prop_assert_eq!(d.hadamard_product(&f), f.clone());
            let l = f.hadamard_product(&g).hadamard_product(&h);
            let r = f.hadamard_product(&g.hadamard_product(&h));
            for (a, b) in l.coeffs().iter().zip(r.coeffs()) {
                prop_assert!((a - b).norm() <= 4.0 * f64::EPSILON * a.norm().max(1e-300));
            }
        }

        #[test]
        fn inverse_law(f in germ_strategy(64)) {
            prop_assume!(f.coeffs().iter().all(|c| c.norm() > 1e-6));
            let p = f.hadamard_product(&f.hadamard_inverse().unwrap());
            for x in p.coeffs() {
                prop_assert!((x - Complex64::new(1.0, 0.0)).norm() <= 4.0 * f64::EPSILON);
            }
        }

        #[test]
        fn shift_composes(f in germ_strategy(30), s1 in 0usize..10, s2 in 0usize..10) {
            prop_assume!(s1 + s2 < f.order());
            let a = f.coefficient_shift(s1).unwrap().coefficient_shift(s2).unwrap();
            prop_assert_eq!(a, f.coefficient_shift(s1 + s2).unwrap());
        }

        #[test]
        fn derivative_hadamard_identity(f in germ_strategy(256), g in germ_strategy(256), s in 0usize..=5) {
            prop_assume!(s < f.order());
            let lhs = f.derivative(s).unwrap().hadamard_product(&g);
            let rhs = f.coefficient_shift(s).unwrap().hadamard_product(&g.theta_power(s));
            prop_assert_eq!(lhs.order(), rhs.order());
            for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((a - b).norm() <= 1e-13 * a.norm().max(b.norm()).max(1e-300));
            }
        }
    }
}
