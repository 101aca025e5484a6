//! Euler-type operator annihilating the Hadamard inverse of a single-pole germ.
//!
//! For `F = Σ_{j=1}^M a_j/(ω−ζ)^j` the inverse `G = Σ b_n Xⁿ` satisfies
//!
//! ```text
//! Σ_{k<M} c_k X^k ∂_X^k G = 1/(1 − ωX),    c_k = Σ_{j>k} a_j ω^{−j} C(j−1,k)/k!
//! ```
//!
//! which is the coefficient identity `P(n)·b_n = ωⁿ` with
//! `P(n) = Σ_k c_k n!/(n−k)!`. By Vandermonde, `P(n) = ωⁿ F_n`.
//! The operator is singular only at `X = 0` (when `M ≥ 2`) and `X = ω⁻¹`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::RationalGerm;
use crate::germ::{binomial, falling, GermError, TruncatedGerm, ZERO_COEFFICIENT_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("ode_builder: germ has a polynomial part; remove it first with entire_correction")]
    PolynomialPart,
    #[error("ode_builder: characteristic value P({0}) vanishes, coefficient {0} of F is zero")]
    CharacteristicRoot(usize),
    #[error(transparent)]
    Germ(#[from] GermError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerOperator {
    pub omega: Complex64,
    pub coeffs: Vec<Complex64>,
}

/// Beyond this index `verify_recurrence` compares in log-magnitude form.
const LOG_FORM_THRESHOLD: usize = 10_000;

impl EulerOperator {
    /// Order of the operator, `M − 1`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `P(n) = Σ_k c_k n(n−1)…(n−k+1)`.
    pub fn characteristic_value(&self, n: usize) -> Complex64 {
        self.coeffs.iter().enumerate().map(|(k, &c)| c * falling(n, k)).sum()
    }

    /// `{ω⁻¹}` for a first-order germ, `{0, ω⁻¹}` otherwise.
    pub fn singular_points(&self) -> Vec<Complex64> {
        let pole = self.omega.inv();
        if self.order() == 0 {
            vec![pole]
        } else {
            vec![Complex64::new(0.0, 0.0), pole]
        }
    }

    /// `b_n = ωⁿ/P(n)`.
    pub fn solve_series(&self, count: usize) -> Result<TruncatedGerm, OdeError> {
        let mut out = Vec::with_capacity(count.max(1));
        let mut wn = Complex64::new(1.0, 0.0);
        for n in 0..count.max(1) {
            let p = self.characteristic_value(n);
            if p.norm() == 0.0 {
                return Err(OdeError::CharacteristicRoot(n));
            }
            out.push(wn / p);
            wn *= self.omega;
        }
        Ok(TruncatedGerm::new(out)?)
    }
}

pub fn build_euler_operator(f: &RationalGerm) -> Result<EulerOperator, OdeError> {
    if f.has_poly_part() {
        return Err(OdeError::PolynomialPart);
    }
    let omega = f.pole();
    let a = f.pole_coeffs();
    let m = a.len();
    let inv = omega.inv();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
    let mut kfact = 1.0;
    for (k, ck) in coeffs.iter_mut().enumerate() {
        if k > 0 {
            kfact *= k as f64;
        }
        for j in (k + 1)..=m {
            *ck += a[j - 1] * inv.powu(j as u32) * (binomial(j - 1, k) / kfact);
        }
    }
    Ok(EulerOperator { omega, coeffs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceReport {
    /// `max_n |P(n)·b_n − ωⁿ| / |ωⁿ|`.
    pub max_residual: f64,
    pub worst_index: usize,
    pub checked: usize,
}

/// Checks `P(n)·b_n = ωⁿ` against `b = hadamard_inverse(expand(F))` for `n < count`.
/// For `|ω| > 1` the coefficients of F eventually underflow; only the
/// representable prefix is checked and `checked` says how far that went.
pub fn verify_recurrence(op: &EulerOperator, f: &RationalGerm, count: usize) -> Result<RecurrenceReport, OdeError> {
    let expanded = f.expand(count);
    let usable = expanded
        .coeffs()
        .iter()
        .position(|c| c.norm() < ZERO_COEFFICIENT_THRESHOLD)
        .unwrap_or(expanded.order());
    if usable == 0 {
        return Err(GermError::ZeroCoefficient(0).into());
    }
    let b = expanded.truncate(usable).hadamard_inverse()?;
    let log_omega = op.omega.ln();
    let mut report = RecurrenceReport { max_residual: 0.0, worst_index: 0, checked: b.order() };
    let mut wn = Complex64::new(1.0, 0.0);
    for n in 0..b.order() {
        let p = op.characteristic_value(n);
        let r = if n > LOG_FORM_THRESHOLD || !wn.is_finite() || wn.norm() == 0.0 {
            let log_ratio = p.ln() + b.coeff(n).ln() - log_omega * n as f64;
            (log_ratio.exp() - 1.0).norm()
        } else {
            (p * b.coeff(n) - wn).norm() / wn.norm()
        };
        if !(r <= report.max_residual) {
            report.max_residual = r;
            report.worst_index = n;
        }
        wn *= op.omega;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::RationalGerm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn first_order_pole() {
        let f = RationalGerm::pure(c(3.0), vec![c(2.0)]).unwrap();
        let op = build_euler_operator(&f).unwrap();
        assert_eq!(op.order(), 0);
        assert!((op.coeffs[0] - c(2.0 / 3.0)).norm() < 1e-15);
        let g = op.solve_series(20).unwrap();
        for n in 0..20 {
            let want = 3f64.powi(n as i32 + 1) / 2.0;
            assert!((g.coeff(n) - c(want)).norm() < 1e-13 * want);
        }
        assert_eq!(op.singular_points(), vec![c(1.0 / 3.0)]);
    }

    #[test]
    fn example_operators() {
        let op1 = build_euler_operator(&RationalGerm::example1()).unwrap();
        assert_eq!(op1.coeffs, vec![c(1.0), c(1.0)]);
        assert_eq!(op1.characteristic_value(5), c(6.0));
        assert_eq!(op1.characteristic_value(0), op1.coeffs[0]);

        let op2 = build_euler_operator(&RationalGerm::example2()).unwrap();
        assert_eq!(op2.coeffs, vec![c(3.0), c(5.0), c(1.0)]);
        assert_eq!(op2.characteristic_value(2), c(15.0));
        for n in 0..50 {
            assert_eq!(op2.characteristic_value(n), c(((n + 1) * (n + 3)) as f64));
        }
        let g1 = op1.solve_series(30).unwrap();
        let g2 = op2.solve_series(30).unwrap();
        for n in 0..30 {
            assert!((g1.coeff(n) - c(1.0 / (n + 1) as f64)).norm() < 1e-16);
            assert!((g2.coeff(n) - c(1.0 / ((n + 1) * (n + 3)) as f64)).norm() < 1e-17);
        }
        assert_eq!(op1.singular_points(), vec![c(0.0), c(1.0)]);
    }

    #[test]
    fn singular_points_rule() {
        let op = EulerOperator { omega: Complex64::new(0.0, 2.0), coeffs: vec![c(1.0), c(1.0), c(1.0)] };
        let pts = op.singular_points();
        assert_eq!(pts[0], c(0.0));
        assert!((pts[1] - Complex64::new(0.0, -0.5)).norm() < 1e-16);
        let op = EulerOperator { omega: c(2.0), coeffs: vec![c(1.0)] };
        assert_eq!(op.singular_points(), vec![c(0.5)]);
    }

    #[test]
    fn recurrence_on_examples() {
        for f in [RationalGerm::example1(), RationalGerm::example2()] {
            let op = build_euler_operator(&f).unwrap();
            let rep = verify_recurrence(&op, &f, 1000).unwrap();
            assert_eq!(rep.checked, 1000);
            assert!(rep.max_residual < 1e-12, "{rep:?}");
        }
    }

    #[test]
    fn refuses_polynomial_part() {
        let f = RationalGerm::new(c(2.0), vec![c(-2.0)], vec![c(1.0)]).unwrap();
        assert_eq!(build_euler_operator(&f), Err(OdeError::PolynomialPart));
    }

    #[test]
    fn characteristic_root_is_reported() {
        // P(n) = 2 − n vanishes at n = 2
        let op = EulerOperator { omega: c(1.0), coeffs: vec![c(2.0), c(-1.0)] };
        assert_eq!(op.solve_series(5), Err(OdeError::CharacteristicRoot(2)));
    }

    fn random_germ(rng: &mut ChaCha8Rng) -> RationalGerm {
        let m = rng.gen_range(1..=5);
        let a: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5)))
            .collect();
        let omega = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
        RationalGerm::pure(omega, a).unwrap()
    }

    #[test]
    fn randomized_recurrence_and_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let f = random_germ(&mut rng);
            let op = build_euler_operator(&f).unwrap();
            let rep = verify_recurrence(&op, &f, 200).unwrap();
            assert!(rep.max_residual < 1e-9, "{f:?}: {rep:?}");

            let direct = f.expand(200).hadamard_inverse().unwrap();
            let solved = op.solve_series(200).unwrap();
            for n in 0..200 {
                let (a, b) = (direct.coeff(n), solved.coeff(n));
                assert!((a - b).norm() <= 1e-9 * a.norm());
            }

            let m = f.pole_order();
            let mut fact = 1.0;
            for k in 1..m {
                fact *= k as f64;
            }
            let lead = f.pole_coeffs()[m - 1] * f.pole().inv().powu(m as u32) / fact;
            assert!((op.coeffs[m - 1] - lead).norm() <= 1e-13 * lead.norm());
        }
    }

    #[test]
    fn scaling_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_germ(&mut rng);
        let lambda = Complex64::new(-0.7, 1.3);
        let scaled = RationalGerm::pure(f.pole(), f.pole_coeffs().iter().map(|a| a * lambda).collect()).unwrap();
        let (op, ops) = (build_euler_operator(&f).unwrap(), build_euler_operator(&scaled).unwrap());
        for (a, b) in op.coeffs.iter().zip(&ops.coeffs) {
            assert!((a * lambda - b).norm() < 1e-13 * b.norm());
        }
        let (g, gs) = (op.solve_series(40).unwrap(), ops.solve_series(40).unwrap());
        for n in 0..40 {
            assert!((g.coeff(n) / lambda - gs.coeff(n)).norm() < 1e-12 * gs.coeff(n).norm());
        }
    }

    #[test]
    fn underflowing_coefficients_shorten_the_check() {
        let f = RationalGerm::pure(c(3.0), vec![c(1.0)]).unwrap();
        let op = build_euler_operator(&f).unwrap();
        let rep = verify_recurrence(&op, &f, 1000).unwrap();
        assert!(rep.checked > 600 && rep.checked < 1000);
        assert!(rep.max_residual < 1e-12, "{rep:?}");
    }

    #[test]
    fn log_form_residual_far_out() {
        let f = RationalGerm::example2();
        let op = build_euler_operator(&f).unwrap();
        let rep = verify_recurrence(&op, &f, 12_000).unwrap();
        assert!(rep.max_residual < 1e-12);
    }

    #[test]
    fn operator_json_shape() {
        let op = build_euler_operator(&RationalGerm::example1()).unwrap();
        let v = serde_json::to_value(&op).unwrap();
        assert_eq!(v["omega"], serde_json::json!([1.0, 0.0]));
        assert_eq!(v["coeffs"], serde_json::json!([[1.0, 0.0], [1.0, 0.0]]));
    }
}
