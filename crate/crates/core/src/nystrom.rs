//! Nyström discretization of the Fredholm determinant `Det(I - K̃)` on an
//! interval `[a1, a2]` containing the conditioned eigenvalue at 0.
//!
//! The operator is replaced by the matrix `δᵢⱼ - √wᵢ K̃(xᵢ, xⱼ) √wⱼ` over a
//! Gauss–Legendre rule and its determinant is taken by LU factorization.
//! The determinant is accumulated in log space so deep tails do not
//! underflow.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::kernel_ktilde;
use crate::quadrature::gauss_legendre;

/// Default quadrature order.
pub const DEFAULT_ORDER: usize = 200;
const CONVERGENCE_START: usize = 50;
const CONVERGENCE_MAX: usize = 3200;

/// A gap `[a1, a2]` around the conditioned eigenvalue at the origin.
///
/// `a1 <= 0 <= a2`; either endpoint may sit on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a1: f64,
    a2: f64,
}

impl Interval {
    /// Largest admissible `|a1|` or `a2`, in kernel units.
    pub const MAX_ENDPOINT: f64 = 40.0;

    pub fn new(a1: f64, a2: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite()) {
            return Err(Error::InvalidArgument(format!("interval [{a1}, {a2}] is not finite")));
        }
        if a1 > 0.0 || a2 < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "interval [{a1}, {a2}] must satisfy a1 <= 0 <= a2"
            )));
        }
        if a1.abs() > Self::MAX_ENDPOINT || a2 > Self::MAX_ENDPOINT {
            return Err(Error::Domain(format!(
                "interval [{a1}, {a2}] beyond |a| <= {}",
                Self::MAX_ENDPOINT
            )));
        }
        Ok(Self { a1, a2 })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn is_empty(&self) -> bool {
        self.a1 == self.a2
    }

    /// The mirror image `[-a2, -a1]`.
    pub fn reflected(&self) -> Self {
        Self { a1: -self.a2, a2: -self.a1 }
    }
}

/// A determinant held as `sign · exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub ln_abs: f64,
    pub sign: f64,
    /// Quadrature order used.
    pub order: usize,
}

impl LogDet {
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }

    /// True when the determinant is not representable as a normal `f64`
    /// (or the matrix was numerically singular). The log value stays
    /// meaningful unless `ln_abs` is `-inf`.
    pub fn underflowed(&self) -> bool {
        self.ln_abs < f64::MIN_POSITIVE.ln()
    }
}

/// Nyström approximation of `J₁(0; [a1, a2])` with an `m`-point rule, in log form.
pub fn fredholm_log_det(iv: Interval, m: usize) -> Result<LogDet> {
    if m < 2 {
        return Err(Error::InvalidArgument("Nyström order must be >= 2".into()));
    }
    if iv.is_empty() {
        return Ok(LogDet { ln_abs: 0.0, sign: 1.0, order: m });
    }
    let rule = gauss_legendre(m, iv.a1, iv.a2)?;
    let nodes = rule.nodes();
    let roots: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
    let mut a = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = -roots[i] * kernel_ktilde(nodes[i], nodes[j]) * roots[j];
            a[i * m + j] = v;
            a[j * m + i] = v;
        }
        a[i * m + i] += 1.0;
    }
    let (ln_abs, sign) = lu_log_det(&mut a, m);
    Ok(LogDet { ln_abs, sign, order: m })
}

/// Nyström approximation of `J₁(0; [a1, a2])` with an `m`-point rule.
///
/// Values below the smallest normal `f64` come back as 0; use
/// [`fredholm_log_det`] in deep tails.
pub fn fredholm_det(iv: Interval, m: usize) -> Result<f64> {
    Ok(fredholm_log_det(iv, m)?.value())
}

/// Doubles the order from 50 until successive determinants agree to `rel_tol`.
///
/// Returns the last value and the order that produced it.
pub fn fredholm_det_converged(iv: Interval, rel_tol: f64) -> Result<(f64, usize)> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!("rel_tol {rel_tol} not in (0, 1)")));
    }
    let mut m = CONVERGENCE_START;
    let mut previous = fredholm_log_det(iv, m)?;
    if iv.is_empty() {
        return Ok((1.0, m));
    }
    loop {
        m *= 2;
        let current = fredholm_log_det(iv, m)?;
        // relative change of the determinant, computed in log space
        let change = (current.ln_abs - previous.ln_abs).exp_m1().abs();
        if change < rel_tol && current.sign == previous.sign {
            return Ok((current.value(), m));
        }
        if m >= CONVERGENCE_MAX {
            return Err(Error::Convergence { m, last: current.value(), previous: previous.value() });
        }
        previous = current;
    }
}

/// Evaluates [`fredholm_log_det`] over many intervals in parallel.
pub fn fredholm_grid(intervals: &[Interval], m: usize) -> Result<Vec<LogDet>> {
    intervals.par_iter().map(|&iv| fredholm_log_det(iv, m)).collect()
}

/// In-place LU with partial pivoting on a row-major `n × n` matrix;
/// returns `(ln |det|, sign)`.
fn lu_log_det(a: &mut [f64], n: usize) -> (f64, f64) {
    let mut ln_abs = 0.0;
    let mut sign = 1.0;
    for k in 0..n {
        let (pivot_row, pivot_abs) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if pivot_row != k {
            for j in 0..n {
                a.swap(k * n + j, pivot_row * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        if pivot < 0.0 {
            sign = -sign;
        }
        ln_abs += pivot.abs().ln();
        let (upper, lower) = a.split_at_mut((k + 1) * n);
        let pivot_tail = &upper[k * n + k + 1..k * n + n];
        for row in lower.chunks_exact_mut(n) {
            let factor = row[k] / pivot;
            if factor != 0.0 {
                for (x, &p) in row[k + 1..].iter_mut().zip(pivot_tail) {
                    *x -= factor * p;
                }
            }
        }
    }
    (ln_abs, sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;
    use std::f64::consts::PI;

    fn iv(a1: f64, a2: f64) -> Interval {
        Interval::new(a1, a2).unwrap()
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(0.5, 1.0).is_err());
        assert!(Interval::new(-1.0, -0.5).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(matches!(Interval::new(-50.0, 1.0), Err(Error::Domain(_))));
        assert!(Interval::new(0.0, 0.0).unwrap().is_empty());
    }

    #[test]
    fn lu_matches_closed_form() {
        let mut a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        // det = 0*(1-0) - 2*(1-0) + 1*(0-3) = -5
        let (ln_abs, sign) = lu_log_det(&mut a, 3);
        assert!((sign * ln_abs.exp() + 5.0).abs() < 1e-14);
    }

    #[test]
    fn empty_interval_is_one() {
        for m in [2, 50, 200] {
            assert_eq!(fredholm_det(iv(0.0, 0.0), m).unwrap(), 1.0);
        }
        assert_eq!(fredholm_det_converged(iv(0.0, 0.0), 1e-10).unwrap(), (1.0, 50));
    }

    #[test]
    fn small_interval_matches_series() {
        // ln J = (a1³ - a2³)/9π - 2(a1⁵ - a2⁵)/225π + O(a⁷)
        let (a1, a2): (f64, f64) = (-0.1, 0.1);
        let series = (a1.powi(3) - a2.powi(3)) / (9.0 * PI) - 2.0 * (a1.powi(5) - a2.powi(5)) / (225.0 * PI);
        let ln = fredholm_log_det(iv(a1, a2), 50).unwrap().ln_abs;
        assert!((ln - series).abs() < 5e-9, "{ln} vs {series}");
        // 30-digit reference determinant
        assert!((ln + 7.068_146_657_949_654e-5).abs() < 1e-14, "{ln}");
    }

    #[test]
    fn converges_quickly() {
        let (v, m) = fredholm_det_converged(iv(-1.0, 1.0), 1e-10).unwrap();
        assert!(m <= 200);
        assert!(v > 0.0 && v < 1.0);
        assert!(fredholm_det(iv(-1.0, 1.0), 1).is_err());
        assert!(fredholm_det_converged(iv(-1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn reflection_symmetry() {
        for (a, b) in [(0.3, 1.7), (2.0, 5.5), (0.0, 3.0), (4.0, 9.0)] {
            let left = fredholm_log_det(iv(-b, a), 120).unwrap().ln_abs;
            let right = fredholm_log_det(iv(-a, b), 120).unwrap().ln_abs;
            assert!(((left - right).exp_m1()).abs() < 1e-12, "({a}, {b})");
        }
    }

    #[test]
    fn monotone_in_right_endpoint() {
        for a1 in [0.0, -0.7, -3.0] {
            let mut prev = f64::INFINITY;
            for k in 0..=24 {
                let a2 = 0.25 * k as f64;
                let v = fredholm_det(iv(a1, a2), 80).unwrap();
                assert!(v <= prev + 1e-12, "a1={a1} a2={a2}");
                prev = v;
            }
        }
    }

    #[test]
    fn log_det_matches_trace_expansion() {
        // ln Det(I - K) = -Tr K - Tr K²/2 - Tr K³/3 - ...
        for (a1, a2) in [(-0.3, 0.3), (-0.1, 0.25), (0.0, 0.3)] {
            let rule = gauss_legendre(40, a1, a2).unwrap();
            let (x, w) = (rule.nodes(), rule.weights());
            let n = x.len();
            let k = |i: usize, j: usize| kernel_ktilde(x[i], x[j]) * (w[i] * w[j]).sqrt();
            let tr1: f64 = (0..n).map(|i| k(i, i)).sum();
            let mut tr2 = 0.0;
            let mut tr3 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    tr2 += k(i, j) * k(j, i);
                    for l in 0..n {
                        tr3 += k(i, j) * k(j, l) * k(l, i);
                    }
                }
            }
            let ln = fredholm_log_det(iv(a1, a2), 40).unwrap().ln_abs;
            let two_terms = -tr1 - 0.5 * tr2;
            assert!((ln - two_terms).abs() <= (tr3 / 3.0).abs() * 1.5 + 1e-16, "[{a1},{a2}]");
        }
    }

    #[test]
    fn deep_tail_stays_in_log_space() {
        let d = fredholm_log_det(iv(-20.0, 20.0), 200).unwrap();
        assert!(d.ln_abs < -150.0 && d.ln_abs.is_finite());
        assert_eq!(d.sign, 1.0);
    }
}
