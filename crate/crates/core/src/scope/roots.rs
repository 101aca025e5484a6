//! Simultaneous polynomial root finding (Aberth–Ehrlich).

use num_complex::Complex64;

use super::ScopeError;

pub const MAX_ITERATIONS: usize = 500;
/// Roots must satisfy `|q(r)| < CERTIFICATE_TOL·max|q_k|`.
pub const CERTIFICATE_TOL: f64 = 1e-10;

/// Horner evaluation of `Σ c_k z^k` and its derivative.
fn eval_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// `|q(r)| / max|q_k|`, measured on the reversed polynomial at `1/r` when `|r| > 1`.
pub fn certificate_residual(c: &[Complex64], r: Complex64) -> f64 {
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return f64::INFINITY;
    }
    let value = if r.norm() > 1.0 {
        let rev: Vec<Complex64> = c.iter().rev().copied().collect();
        eval_with_derivative(&rev, r.inv()).0
    } else {
        eval_with_derivative(c, r).0
    };
    value.norm() / scale
}

fn trimmed(c: &[Complex64]) -> &[Complex64] {
    let end = c.iter().rposition(|x| x.norm() != 0.0).map_or(0, |i| i + 1);
    &c[..end]
}

/// All roots of `Σ c_k z^k` (ascending coefficients, exact trailing zeros dropped).
pub fn polynomial_roots(c: &[Complex64]) -> Result<Vec<Complex64>, ScopeError> {
    let c = trimmed(c);
    if c.len() <= 1 {
        return Ok(Vec::new());
    }
    let deg = c.len() - 1;
    // zeros at the origin split off exactly
    let lead_zeros = c.iter().position(|x| x.norm() != 0.0).unwrap_or(0);
    let c = &c[lead_zeros..];
    let mut roots = vec![Complex64::new(0.0, 0.0); lead_zeros];
    let n = c.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(-c[0] / c[1]);
        return Ok(roots);
    }
    let radius = (c[0].norm() / c[n].norm()).powf(1.0 / n as f64);
    let rev: Vec<Complex64> = c.iter().rev().copied().collect();
    // Newton quotient p/p', through the reversed polynomial outside the unit disk
    let newton = |z: Complex64| -> Option<Complex64> {
        if z.norm() <= 1.0 {
            let (p, dp) = eval_with_derivative(c, z);
            (p.norm() != 0.0).then(|| p / dp)
        } else {
            let w = z.inv();
            let (p, dp) = eval_with_derivative(&rev, w);
            (p.norm() != 0.0).then(|| z / (n as f64 - w * dp / p))
        }
    };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..MAX_ITERATIONS {
        let mut worst = 0.0f64;
        for k in 0..n {
            let Some(w) = newton(z[k]) else {
                continue;
            };
            let s: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let delta = w / (Complex64::new(1.0, 0.0) - w * s);
            if delta.is_finite() {
                z[k] -= delta;
                worst = worst.max(delta.norm() / z[k].norm().max(1.0));
            } else {
                worst = f64::INFINITY;
            }
        }
        if worst < 4.0 * f64::EPSILON {
            break;
        }
    }
    let certified = z.iter().all(|&r| certificate_residual(c, r) < CERTIFICATE_TOL);
    if !certified {
        return Err(ScopeError::NonConvergence { degree: deg, iterations: MAX_ITERATIONS });
    }
    roots.extend(z);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        v
    }

    #[test]
    fn linear_and_quadratic() {
        assert_eq!(polynomial_roots(&[c(1.0), c(-1.0)]).unwrap(), vec![c(1.0)]);
        // (1 − z/2)(1 − z/3) = 1 − 5z/6 + z²/6
        let r = sorted(polynomial_roots(&[c(1.0), c(-5.0 / 6.0), c(1.0 / 6.0)]).unwrap());
        assert!((r[0] - c(2.0)).norm() < 1e-12 && (r[1] - c(3.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_and_constant_polynomials() {
        assert!(polynomial_roots(&[c(2.0)]).unwrap().is_empty());
        assert!(polynomial_roots(&[c(2.0), c(0.0)]).unwrap().is_empty());
        let r = polynomial_roots(&[c(0.0), c(0.0), c(1.0)]).unwrap();
        assert_eq!(r, vec![c(0.0), c(0.0)]);
    }

    #[test]
    fn roots_of_unity_and_spread_roots() {
        let mut p = vec![c(-1.0)];
        p.extend(std::iter::repeat(c(0.0)).take(11));
        p.push(c(1.0));
        for r in polynomial_roots(&p).unwrap() {
            assert!((r.powu(12) - 1.0).norm() < 1e-12);
        }
        // Π (1 − z/2^m), m = 0..10
        let mut q = vec![c(1.0)];
        for m in 0..11 {
            let a = 2f64.powi(m);
            let mut next = vec![c(0.0); q.len() + 1];
            for (i, &x) in q.iter().enumerate() {
                next[i] += x;
                next[i + 1] -= x / a;
            }
            q = next;
        }
        let r = sorted(polynomial_roots(&q).unwrap());
        for (m, x) in r.iter().enumerate() {
            let want = 2f64.powi(m as i32);
            assert!((x - c(want)).norm() < 1e-6 * want, "{m}: {x}");
            assert!(certificate_residual(&q, *x) < CERTIFICATE_TOL);
        }
    }

    #[test]
    fn double_root_is_certified() {
        // (1 − z)²
        let r = polynomial_roots(&[c(1.0), c(-2.0), c(1.0)]).unwrap();
        for x in r {
            assert!((x - c(1.0)).norm() < 1e-6);
        }
    }
}
