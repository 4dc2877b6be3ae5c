//! Radial integration of the Tracy–Widom system for `J₁(0; [a1, a2])`.
//!
//! Along a ray `(a1, a2) = (s·a, s·b)` the dynamical variables
//! `(q1, p1, q2, p2, U, V, ln J)` obey a closed system of ODEs in `s`. We
//! integrate it in `τ = ln s`, where the right-hand sides lose their `1/s`
//! factor, starting from the small-interval series at `s = eps`.
//!
//! At every output sample the resolvent kernel values at the endpoints are
//! recovered algebraically from the state:
//!
//! * `R12 = (q1 p2 - p1 q2) / (a1 - a2)`
//! * `a_j R_jj = 2U q_j p_j + V (p_j² - q_j²) + a_j (q_j² + p_j²) + (-1)^k a_k (a_j - a_k) R12²`
//!
//! with `∂ ln J/∂a1 = R11`, `∂ ln J/∂a2 = -R22`, and the joint density of two
//! consecutive spacings `P_c = -∂²J/∂a1∂a2 = J (R11 R22 - R12²)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ode::{Dopri5, OdeFailure, Stats};

/// Half-width of the region where the boundary series is trusted.
pub const SERIES_LIMIT: f64 = 0.01;
/// Default integration tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default starting radius in endpoint units: the ray starts where
/// `max(|a1|, a2) = 1e-6`.
pub const DEFAULT_START: f64 = 1e-6;
/// Default number of uniformly spaced samples in `(0, 1]`.
pub const DEFAULT_SAMPLES: usize = 200;
/// Rays are abandoned once `ln J` drops below this value (`J < 1.8e-35`).
///
/// Deeper in the tail the `(q, p)` flow develops an exponentially growing
/// mode that amplifies integration error without bound; nothing there is
/// numerically visible in any density.
pub const LN_J_FLOOR: f64 = -80.0;

/// The Tracy–Widom variables at one point of a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwState {
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
    /// `1 + u - w`
    pub u: f64,
    /// `2 v`
    pub v: f64,
    pub ln_j: f64,
}

impl TwState {
    fn to_array(self) -> [f64; 7] {
        [self.q1, self.p1, self.q2, self.p2, self.u, self.v, self.ln_j]
    }

    fn from_array(y: [f64; 7]) -> Self {
        Self { q1: y[0], p1: y[1], q2: y[2], p2: y[3], u: y[4], v: y[5], ln_j: y[6] }
    }

    /// Right-hand side of the `ln J` flow, `s d(ln J)/ds`, at endpoints `(a1, a2)`.
    pub fn ln_j_flow(&self, a1: f64, a2: f64) -> f64 {
        let Self { q1, p1, q2, p2, u, v, .. } = *self;
        let w = q1 * p2 - p1 * q2;
        a1 * (q1 * q1 + p1 * p1) - a2 * (q2 * q2 + p2 * p2) - w * w + 2.0 * u * (q1 * p1 - q2 * p2)
            - v * (q1 * q1 - p1 * p1 - q2 * q2 + p2 * p2)
    }
}

/// `s d/ds` of the state at endpoints `(a1, a2)`.
fn flow(a1: f64, a2: f64, y: &[f64; 7]) -> [f64; 7] {
    let [q1, p1, q2, p2, u, v, _] = *y;
    let state = TwState::from_array(*y);
    [
        u * q1 + (v + a1) * p1,
        (v - a1) * q1 - u * p1,
        u * q2 + (v + a2) * p2,
        (v - a2) * q2 - u * p2,
        -a1 * (q1 * q1 - p1 * p1) + a2 * (q2 * q2 - p2 * p2),
        -2.0 * a1 * q1 * p1 + 2.0 * a2 * q2 * p2,
        state.ln_j_flow(a1, a2),
    ]
}

/// Small-interval expansion of the state, accurate through fifth order.
pub fn boundary_state(a1: f64, a2: f64) -> Result<TwState> {
    if !(a1.is_finite() && a2.is_finite()) || a1.abs() > SERIES_LIMIT || a2.abs() > SERIES_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "boundary series needs |a1|, |a2| <= {SERIES_LIMIT}, got ({a1}, {a2})"
        )));
    }
    let sqrt_pi = PI.sqrt();
    let pi32 = PI * sqrt_pi;
    let d3 = a1.powi(3) - a2.powi(3);
    let d4 = a1.powi(4) - a2.powi(4);
    let d5 = a1.powi(5) - a2.powi(5);
    let q = |a: f64| a / sqrt_pi - a.powi(3) / (6.0 * sqrt_pi) - d3 * a / (9.0 * pi32) + a.powi(5) / (120.0 * sqrt_pi);
    let p = |a: f64| -a * a / (3.0 * sqrt_pi) + a.powi(4) / (30.0 * sqrt_pi) + d4 * a / (36.0 * pi32);
    let u = -d3 / (3.0 * PI) + d5 / (15.0 * PI);
    let v = d4 / (12.0 * PI);
    let w = -d5 / (45.0 * PI);
    Ok(TwState {
        q1: q(a1),
        p1: p(a1),
        q2: q(a2),
        p2: p(a2),
        u: 1.0 + u - w,
        v: 2.0 * v,
        ln_j: d3 / (9.0 * PI) - 2.0 * d5 / (225.0 * PI),
    })
}

/// One dense-output record of a ray solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySample {
    pub s: f64,
    pub a1: f64,
    pub a2: f64,
    pub state: TwState,
    pub r11: f64,
    pub r12: f64,
    pub r22: f64,
    /// Joint density of the two spacings, `J (R11 R22 - R12²)`.
    pub pc: f64,
}

impl RaySample {
    /// Placeholder for samples past [`LN_J_FLOOR`]: `J`, its derivatives and
    /// the joint density are reported as exactly zero.
    fn negligible(s: f64, a1: f64, a2: f64) -> Self {
        let state = TwState { q1: f64::NAN, p1: f64::NAN, q2: f64::NAN, p2: f64::NAN, u: f64::NAN, v: f64::NAN, ln_j: f64::NEG_INFINITY };
        Self { s, a1, a2, state, r11: 0.0, r12: 0.0, r22: 0.0, pc: 0.0 }
    }

    /// True for samples past the `ln J` floor, which carry no state.
    pub fn is_negligible(&self) -> bool {
        self.state.ln_j == f64::NEG_INFINITY
    }

    fn from_state(s: f64, a1: f64, a2: f64, state: TwState) -> Self {
        let TwState { q1, p1, q2, p2, u, v, ln_j } = state;
        let r12 = (q1 * p2 - p1 * q2) / (a1 - a2);
        let r12_sq = r12 * r12;
        let r11 = if a1 == 0.0 {
            0.0
        } else {
            (2.0 * u * q1 * p1 + v * (p1 * p1 - q1 * q1) + a1 * (q1 * q1 + p1 * p1) + a2 * (a1 - a2) * r12_sq) / a1
        };
        let r22 = if a2 == 0.0 {
            0.0
        } else {
            (2.0 * u * q2 * p2 + v * (p2 * p2 - q2 * q2) + a2 * (q2 * q2 + p2 * p2) - a1 * (a2 - a1) * r12_sq) / a2
        };
        let j = ln_j.exp();
        Self { s, a1, a2, state, r11, r12, r22, pc: j * (r11 * r22 - r12_sq) }
    }

    /// `J₁(0; [a1, a2])`.
    pub fn j(&self) -> f64 {
        self.state.ln_j.exp()
    }

    /// `∂J/∂a1 = J R11`.
    pub fn dj_da1(&self) -> f64 {
        self.j() * self.r11
    }

    /// `∂J/∂a2 = -J R22`.
    pub fn dj_da2(&self) -> f64 {
        -self.j() * self.r22
    }
}

/// Dense output of a single ray solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RayProfile {
    /// Endpoints `(a, b)` at `s = 1`.
    pub direction: (f64, f64),
    pub samples: Vec<RaySample>,
    pub steps: usize,
    /// First `s` past the `ln J` floor, when the ray was cut short.
    pub truncated_at: Option<f64>,
}

impl RayProfile {
    pub fn last(&self) -> &RaySample {
        self.samples.last().expect("a ray profile always has samples")
    }

    /// Largest `|V|` over the computed samples; zero on symmetric rays.
    pub fn max_abs_v(&self) -> f64 {
        self.computed().map(|r| r.state.v.abs()).fold(0.0, f64::max)
    }

    /// Samples that carry an integrated state.
    pub fn computed(&self) -> impl Iterator<Item = &RaySample> {
        self.samples.iter().filter(|r| !r.is_negligible())
    }
}

/// Configured integrator for Tracy–Widom rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySolver {
    tol: f64,
    start: f64,
}

impl Default for RaySolver {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, start: DEFAULT_START }
    }
}

impl RaySolver {
    /// Solver with local error tolerance `tol ∈ [1e-14, 1e-6]`.
    pub fn new(tol: f64) -> Result<Self> {
        if !(1e-14..=1e-6).contains(&tol) {
            return Err(Error::InvalidArgument(format!("tolerance {tol} outside [1e-14, 1e-6]")));
        }
        Ok(Self { tol, start: DEFAULT_START })
    }

    /// Sets the starting radius: the ray starts at `s = start / max(|a|, b)`.
    pub fn with_start(mut self, start: f64) -> Result<Self> {
        if !(start > 0.0 && start <= SERIES_LIMIT) {
            return Err(Error::InvalidArgument(format!("start radius {start} outside (0, {SERIES_LIMIT}]")));
        }
        self.start = start;
        Ok(self)
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Default `eps` for the ray with endpoints `(a, b)`.
    pub fn eps_for(&self, a: f64, b: f64) -> f64 {
        self.start / a.abs().max(b)
    }

    /// Integrates the ray through `(a, b)` and records the listed `s` values,
    /// which must be strictly increasing in `(0, 1]`.
    pub fn solve(&self, a: f64, b: f64, s_values: &[f64]) -> Result<RayProfile> {
        self.solve_with_eps(a, b, self.eps_for(a, b), s_values)
    }

    pub fn solve_with_eps(&self, a: f64, b: f64, eps: f64, s_values: &[f64]) -> Result<RayProfile> {
        check_direction(a, b)?;
        let scale = a.abs().max(b);
        if !(eps > 0.0 && eps * scale <= SERIES_LIMIT * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "eps {eps} must lie in (0, {SERIES_LIMIT}/max(|a|, b)]"
            )));
        }
        if s_values.is_empty() {
            return Err(Error::InvalidArgument("no output samples requested".into()));
        }
        if s_values.iter().any(|&s| !(s > 0.0 && s <= 1.0)) || s_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("samples must be strictly increasing in (0, 1]".into()));
        }

        // Samples at or below eps come straight from the series.
        let split = s_values.partition_point(|&s| s <= eps);
        let mut samples = Vec::with_capacity(s_values.len());
        for &s in &s_values[..split] {
            let (a1, a2) = (s * a, s * b);
            samples.push(RaySample::from_state(s, a1, a2, boundary_state(a1, a2)?));
        }

        let y0 = boundary_state(eps * a, eps * b)?.to_array();
        let tau0 = eps.ln();
        let outputs: Vec<f64> = s_values[split..].iter().map(|s| s.ln()).collect();
        let integrator = Dopri5 { rtol: self.tol, atol: self.tol, running_scale: true, ..Default::default() };
        let mut stats = Stats::default();
        let states = integrator
            .solve_until(
                |tau, y| {
                    let s = tau.exp();
                    flow(s * a, s * b, y)
                },
                |y| y[6] < LN_J_FLOOR,
                tau0,
                y0,
                &outputs,
                &mut stats,
            )
            .map_err(|f| match f {
                OdeFailure::StepUnderflow { t, h } => Error::Stiffness { s: t.exp(), h },
                OdeFailure::MaxSteps { t } => Error::Accuracy { s: t.exp(), reason: "step budget exhausted".into() },
                OdeFailure::NonFinite { t } => Error::Accuracy { s: t.exp(), reason: "non-finite state".into() },
            })?;
        let reached = states.len();
        for (&s, y) in s_values[split..].iter().zip(states) {
            let (a1, a2) = (s * a, s * b);
            let record = RaySample::from_state(s, a1, a2, TwState::from_array(y));
            if !record.state.ln_j.is_finite() {
                return Err(Error::Accuracy { s, reason: "non-finite ln J".into() });
            }
            samples.push(record);
        }
        let rest = &s_values[split + reached..];
        let truncated_at = rest.first().copied();
        samples.extend(rest.iter().map(|&s| RaySample::negligible(s, s * a, s * b)));
        Ok(RayProfile { direction: (a, b), samples, steps: stats.accepted, truncated_at })
    }

    /// The state at `s = 1` only.
    pub fn endpoint(&self, a1: f64, a2: f64) -> Result<RaySample> {
        Ok(*self.solve(a1, a2, &[1.0])?.last())
    }

    /// `ln J₁(0; [a1, a2])`; zero for the empty interval.
    pub fn ln_janossy(&self, a1: f64, a2: f64) -> Result<f64> {
        if a1 == 0.0 && a2 == 0.0 {
            return Ok(0.0);
        }
        Ok(self.endpoint(a1, a2)?.state.ln_j)
    }

    /// `J₁(0; [a1, a2])`.
    pub fn janossy(&self, a1: f64, a2: f64) -> Result<f64> {
        Ok(self.ln_janossy(a1, a2)?.exp())
    }
}

fn check_direction(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a > 0.0 || b < 0.0 {
        return Err(Error::InvalidArgument(format!("ray direction ({a}, {b}) needs a <= 0 <= b")));
    }
    if a == 0.0 && b == 0.0 {
        return Err(Error::InvalidArgument("ray direction (0, 0) is degenerate".into()));
    }
    Ok(())
}

/// Uniform samples `k / n`, `k = 1..=n`.
pub fn uniform_samples(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / n as f64).collect()
}

/// Integrates the ray through `(a, b)` with start parameter `eps` and local
/// tolerance `tol`, sampling 200 uniformly spaced points of `(0, 1]`.
pub fn integrate_ray(a: f64, b: f64, eps: f64, tol: f64) -> Result<RayProfile> {
    RaySolver::new(tol)?.solve_with_eps(a, b, eps, &uniform_samples(DEFAULT_SAMPLES))
}

/// `J₁(0; [a1, a2])` with the default solver.
pub fn janossy(a1: f64, a2: f64) -> Result<f64> {
    RaySolver::default().janossy(a1, a2)
}
