//! Gauss–Legendre quadrature.
//!
//! Nodes are the roots of the Legendre polynomial `P_m`, found by Newton
//! iteration from Chebyshev-angle initial guesses; weights follow from
//! `w = 2 / ((1 - x^2) P_m'(x)^2)`. Reference rules on `[-1, 1]` are cached
//! per order and mapped affinely onto the requested interval.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

const MAX_NEWTON_ITERATIONS: usize = 100;
const NEWTON_ULPS: f64 = 4.0;

/// An `m`-point Gauss–Legendre rule on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Nodes in strictly increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(node, weight)` pairs in node order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Returns `Σ wᵢ f(xᵢ)`, failing on the first non-finite `f(xᵢ)`.
    pub fn integrate<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        let mut sum = 0.0;
        for (x, w) in self.iter() {
            let value = f(x);
            if !value.is_finite() {
                return Err(Error::NonFinite { node: x, value });
            }
            sum += w * value;
        }
        Ok(sum)
    }
}

/// Free-function form of [`QuadratureRule::integrate`].
pub fn integrate<F>(rule: &QuadratureRule, f: F) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    rule.integrate(f)
}

/// Builds the `m`-point Gauss–Legendre rule on `[lo, hi]`.
pub fn gauss_legendre(m: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::InvalidArgument("quadrature order must be >= 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::InvalidArgument(format!(
            "quadrature interval [{lo}, {hi}] must be finite with lo < hi"
        )));
    }
    let reference = reference_rule(m);
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let nodes = reference.nodes.iter().map(|&t| center + half * t).collect();
    let weights = reference.weights.iter().map(|&w| half * w).collect();
    Ok(QuadratureRule { lo, hi, nodes, weights })
}

#[derive(Debug)]
struct ReferenceRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn reference_rule(m: usize) -> Arc<ReferenceRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ReferenceRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&m) {
        return Arc::clone(rule);
    }
    // Built outside the lock; a concurrent duplicate build is harmless.
    let rule = Arc::new(build_reference(m));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    Arc::clone(guard.entry(m).or_insert(rule))
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=m {
        let k = k as f64;
        let next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = next;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let m = m as f64;
    let dp = m * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

fn build_reference(m: usize) -> ReferenceRule {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m / 2;
    let mf = m as f64;
    // Positive roots, largest first; the negative half mirrors them exactly.
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..MAX_NEWTON_ITERATIONS {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= NEWTON_ULPS * f64::EPSILON * x.abs() {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[m - 1 - i] = w;
        weights[i] = w;
    }
    if m % 2 == 1 {
        let (_, dp) = legendre_with_derivative(m, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    ReferenceRule { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rule_is_midpoint() {
        let rule = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert_eq!(rule.weights(), &[2.0]);
    }

    #[test]
    fn two_point_rule() {
        let rule = gauss_legendre(2, -1.0, 1.0).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((rule.nodes()[0] + r).abs() < 4e-16);
        assert!((rule.nodes()[1] - r).abs() < 4e-16);
        assert!((rule.weights()[0] - 1.0).abs() < 1e-15);
        assert!((rule.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        let rule = gauss_legendre(5, 0.0, 1.0).unwrap();
        let v = rule.integrate(|x| x * x).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
        // degree 2m - 1 = 9
        let v = rule.integrate(|x| x.powi(9)).unwrap();
        assert!((v - 0.1).abs() < 1e-13 * 0.1);
    }

    #[test]
    fn sine_integral_and_plateau() {
        for m in [10, 20, 50, 200] {
            let rule = gauss_legendre(m, 0.0, PI).unwrap();
            let v = rule.integrate(f64::sin).unwrap();
            assert!((v - 2.0).abs() < 1e-12, "m = {m}: {v}");
        }
        for m in [20, 40, 100] {
            let a = gauss_legendre(m, 0.0, PI).unwrap().integrate(f64::sin).unwrap();
            let b = gauss_legendre(2 * m, 0.0, PI).unwrap().integrate(f64::sin).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_and_odd_integrands() {
        let rule = gauss_legendre(17, 0.0, 1.0).unwrap();
        assert!((rule.integrate(|_| 1.0).unwrap() - 1.0).abs() < 4.0 * f64::EPSILON);
        let rule = gauss_legendre(16, -1.0, 1.0).unwrap();
        let v = rule.integrate(|x| x.powi(3) + x.sin()).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn symmetric_nodes_and_weights() {
        for m in [3, 10, 101, 200] {
            let rule = gauss_legendre(m, -2.5, 2.5).unwrap();
            for i in 0..m {
                assert_eq!(rule.nodes()[i], -rule.nodes()[m - 1 - i]);
                assert_eq!(rule.weights()[i], rule.weights()[m - 1 - i]);
            }
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(matches!(gauss_legendre(0, 0.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(gauss_legendre(4, 1.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(gauss_legendre(4, 2.0, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn non_finite_integrand_reports_node() {
        let rule = gauss_legendre(3, -1.0, 1.0).unwrap();
        let err = rule.integrate(|x| if x == 0.0 { f64::NAN } else { 1.0 }).unwrap_err();
        match err {
            Error::NonFinite { node, .. } => assert_eq!(node, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn large_orders_are_accurate() {
        for m in [800, 3200] {
            let rule = gauss_legendre(m, -1.0, 1.0).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            assert!((sum - 2.0).abs() < 2e-14 * 2.0, "m = {m}: {sum}");
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(rule.nodes()[0] > -1.0 && rule.nodes()[m - 1] < 1.0);
            let v = rule.integrate(|x| x.powi(6)).unwrap();
            assert!((v - 2.0 / 7.0).abs() < 1e-13);
        }
    }
}
