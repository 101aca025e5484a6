//! Padé approximants from the linear (Toeplitz) system.

use num_complex::Complex64;
use serde::Serialize;

use super::roots::polynomial_roots;
use super::ScopeError;
use crate::germ::TruncatedGerm;

/// Relative defect above which a Padé system counts as singular.
pub const DEFECT_TOL: f64 = 1e-10;
/// A pole within this relative distance of a numerator root is a Froissart doublet.
pub const FROISSART_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PadeApproximant {
    /// `p_0 … p_L`.
    pub numerator: Vec<Complex64>,
    /// `q_0 … q_M` with `q_0 = 1`.
    pub denominator: Vec<Complex64>,
    /// Relative residual of the solved denominator system.
    pub defect: f64,
}

impl PadeApproximant {
    pub fn degrees(&self) -> (usize, usize) {
        (self.numerator.len() - 1, self.denominator.len() - 1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.numerator, z) / horner(&self.denominator, z)
    }
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * z + x)
}

/// Dense solve with full pivoting. `None` on an exactly zero or non-finite pivot.
pub(crate) fn solve_full_pivot(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, x) in row.iter().enumerate().skip(k) {
                if x.norm() > best {
                    (pi, pj, best) = (i, j, x.norm());
                }
            }
        }
        if !(best > 0.0) || !best.is_finite() {
            return None;
        }
        a.swap(k, pi);
        b.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        perm.swap(k, pj);
        let pivot = a[k][k];
        for i in k + 1..n {
            let m = a[i][k] / pivot;
            if m.norm() == 0.0 {
                continue;
            }
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= m * t;
            }
            let t = b[k];
            b[i] -= m * t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let s: Complex64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, &p) in perm.iter().enumerate() {
        out[p] = x[k];
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// The `[L/M]` approximant of `f`.
pub fn pade(f: &TruncatedGerm, l: usize, m: usize) -> Result<PadeApproximant, ScopeError> {
    if l + m + 1 > f.order() {
        return Err(ScopeError::InsufficientOrder { l, m, order: f.order() });
    }
    let c = |k: isize| if k < 0 { Complex64::new(0.0, 0.0) } else { f.coeff(k as usize) };
    let system: Vec<Vec<Complex64>> = (0..m)
        .map(|i| (1..=m).map(|j| c((l + 1 + i) as isize - j as isize)).collect())
        .collect();
    let rhs: Vec<Complex64> = (0..m).map(|i| -c((l + 1 + i) as isize)).collect();
    let q_tail = if m == 0 {
        Vec::new()
    } else {
        solve_full_pivot(system.clone(), rhs.clone()).ok_or(ScopeError::SingularSystem { l, m, defect: f64::INFINITY })?
    };
    let max_abs = |v: &[Complex64]| v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut defect = 0.0f64;
    for (row, r) in system.iter().zip(&rhs) {
        let s: Complex64 = row.iter().zip(&q_tail).map(|(a, x)| a * x).sum();
        defect = defect.max((s - r).norm());
    }
    let scale = max_abs(&system.concat()) * max_abs(&q_tail).max(1.0) + max_abs(&rhs);
    let defect = if scale > 0.0 { defect / scale } else { 0.0 };
    if !(defect <= DEFECT_TOL) {
        return Err(ScopeError::SingularSystem { l, m, defect });
    }
    let mut denominator = vec![Complex64::new(1.0, 0.0)];
    denominator.extend(q_tail);
    let numerator = (0..=l)
        .map(|k| (0..=k.min(m)).map(|j| denominator[j] * f.coeff(k - j)).sum())
        .collect();
    Ok(PadeApproximant { numerator, denominator, defect })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pole {
    pub z: Complex64,
    /// Paired with a numerator root (Froissart doublet).
    pub spurious: bool,
}

/// Denominator roots with doublet flags.
pub fn pade_poles(p: &PadeApproximant) -> Result<Vec<Pole>, ScopeError> {
    if p.denominator.len() < 2 {
        return Err(ScopeError::NoDenominator);
    }
    let poles = polynomial_roots(&p.denominator)?;
    let zeros = polynomial_roots(&p.numerator)?;
    Ok(poles
        .into_iter()
        .map(|z| {
            let spurious = zeros.iter().any(|w| (w - z).norm() < FROISSART_TOL * z.norm().max(1.0));
            Pole { z, spurious }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{geometric_ladder_inverse, log_over_zeta_coefficients};
    use crate::scope::roots::{certificate_residual, CERTIFICATE_TOL};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn nearest(poles: &[Pole], target: Complex64) -> Complex64 {
        poles
            .iter()
            .filter(|p| !p.spurious)
            .map(|p| p.z)
            .min_by(|a, b| (a - target).norm().partial_cmp(&(b - target).norm()).unwrap())
            .unwrap()
    }

    #[test]
    fn delta_is_geometric() {
        let p = pade(&TruncatedGerm::delta(4), 0, 1).unwrap();
        assert_eq!(p.numerator, vec![c(1.0)]);
        assert_eq!(p.denominator, vec![c(1.0), c(-1.0)]);
        let poles = pade_poles(&p).unwrap();
        assert_eq!(poles.len(), 1);
        assert!((poles[0].z - c(1.0)).norm() < 1e-15 && !poles[0].spurious);
    }

    #[test]
    fn rational_reproduction() {
        // (1 + z) / ((1 − z/2)(1 − z/3))
        let f = TruncatedGerm::from_fn(30, |n| {
            let g = |k: usize| (0..=k).map(|i| 0.5f64.powi(i as i32) * (1.0 / 3.0f64).powi((k - i) as i32)).sum::<f64>();
            c(g(n) + if n > 0 { g(n - 1) } else { 0.0 })
        });
        let p = pade(&f, 1, 2).unwrap();
        assert!(p.defect < 1e-12);
        let mut poles: Vec<f64> = pade_poles(&p).unwrap().iter().map(|p| p.z.re).collect();
        poles.sort_by(f64::total_cmp);
        assert!((poles[0] - 2.0).abs() < 1e-10 && (poles[1] - 3.0).abs() < 1e-10);
        assert!((p.eval(c(0.7)) - c(1.7 / ((1.0 - 0.35) * (1.0 - 0.7 / 3.0)))).norm() < 1e-12);
    }

    #[test]
    fn log_germ_poles_sit_on_the_cut() {
        let f = log_over_zeta_coefficients(40);
        let p = pade(&f, 8, 8).unwrap();
        let poles = pade_poles(&p).unwrap();
        let near = nearest(&poles, c(1.0));
        assert!(near.im.abs() < 1e-8 && near.re > 1.0 && near.re < 1.03, "{near}");
        let good: Vec<_> = poles.iter().filter(|p| !p.spurious).collect();
        let on_cut = good.iter().filter(|p| (p.z - 1.0).arg().abs() < 0.2).count();
        assert!(2 * on_cut >= good.len());
        let far = nearest(&pade_poles(&pade(&f, 16, 16).unwrap()).unwrap(), c(1.0));
        assert!((far - 1.0).norm() < (near - 1.0).norm());
    }

    #[test]
    fn ladder_poles() {
        let f = geometric_ladder_inverse(40);
        let poles = pade_poles(&pade(&f, 12, 12).unwrap()).unwrap();
        for (target, tol) in [(1.0, 1e-3), (2.0, 1e-2), (4.0, 1e-1)] {
            assert!((nearest(&poles, c(target)) - target).norm() < tol);
        }
        let p = pade(&f, 12, 12).unwrap();
        for pole in &poles {
            assert!(certificate_residual(&p.denominator, pole.z) < CERTIFICATE_TOL);
        }
    }

    #[test]
    fn order_checks() {
        assert!(matches!(pade(&TruncatedGerm::delta(4), 2, 2), Err(ScopeError::InsufficientOrder { .. })));
        let p = pade(&TruncatedGerm::delta(4), 2, 0).unwrap();
        assert!(matches!(pade_poles(&p), Err(ScopeError::NoDenominator)));
    }

    #[test]
    fn degenerate_table_entry() {
        // f = 1 + z²: the [1/1] system reads 0·q₁ = −1
        let f = TruncatedGerm::from_real(&[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(pade(&f, 1, 1), Err(ScopeError::SingularSystem { .. })));
    }

    #[test]
    fn froissart_doublet_is_flagged() {
        // exact rational of type [1/1] fitted as [2/2] with a planted common factor
        let q = [c(1.0), c(-1.0)];
        let extra = Complex64::new(0.2, 3.0);
        let num = [c(1.0), -extra.inv()];
        let den = [q[0], q[1] - extra.inv(), extra.inv()];
        let p = PadeApproximant { numerator: num.to_vec(), denominator: den.to_vec(), defect: 0.0 };
        let poles = pade_poles(&p).unwrap();
        assert_eq!(poles.iter().filter(|p| p.spurious).count(), 1);
        assert!(poles.iter().any(|p| !p.spurious && (p.z - 1.0).norm() < 1e-12));
    }
}
