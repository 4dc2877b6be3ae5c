//! Spacing, nearest-neighbour, joint and ratio densities of the GUE bulk.
//!
//! Everything here is read off Tracy–Widom ray solves:
//!
//! * `P(s) = -dJ(0; [0, s])/ds = J R22` on the ray `(0, s)`;
//! * `P_nn(t) = -dJ(0; [-t, t])/dt = J (R11 + R22)` on the ray `(-t, t)`;
//! * `P_c(a1, a2) = J (R11 R22 - R12²)` anywhere;
//! * `P_r(r) = ∫₀^∞ a P_c(-r a, a) da`, one ray per ratio `r`.
//!
//! The folded ratio `r̃ = min(r, 1/r)` has density `2 P_r(r̃)` on `[0, 1]`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::tw_solver::{RayProfile, RaySolver};

/// Default support cutoff, six mean spacings in kernel units.
pub const DEFAULT_A_MAX: f64 = 6.0 * PI;
/// Default Gauss–Legendre order along each ray.
pub const DEFAULT_RAY_ORDER: usize = 128;
/// Default Gauss–Legendre order over `r̃ ∈ [0, 1]`.
pub const DEFAULT_RATIO_ORDER: usize = 100;
/// Largest ratio accepted by the ratio density.
pub const R_MAX: f64 = 20.0;

/// Length units of a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Units {
    /// Mean spacing `π`.
    Kernel,
    /// Mean spacing 1.
    UnitMean,
}

impl Units {
    pub fn name(self) -> &'static str {
        match self {
            Units::Kernel => "kernel",
            Units::UnitMean => "unit-mean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityKind {
    Spacing,
    NearestNeighbor,
    Joint,
    Ratio,
    RatioTilde,
}

impl DensityKind {
    pub fn name(self) -> &'static str {
        match self {
            DensityKind::Spacing => "spacing",
            DensityKind::NearestNeighbor => "nearest_neighbor",
            DensityKind::Joint => "joint",
            DensityKind::Ratio => "ratio",
            DensityKind::RatioTilde => "ratio_tilde",
        }
    }

    /// Number of length dimensions in the abscissa; ratios have none.
    fn length_dims(self) -> i32 {
        match self {
            DensityKind::Spacing | DensityKind::NearestNeighbor => 1,
            DensityKind::Joint => 2,
            DensityKind::Ratio | DensityKind::RatioTilde => 0,
        }
    }
}

/// Abscissae of a table.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    OneD(Vec<f64>),
    /// Explicit `(a1, a2)` pairs, row-major when they come from a tensor grid.
    TwoD(Vec<(f64, f64)>),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::OneD(v) => v.len(),
            Grid::TwoD(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A tabulated density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    pub kind: DensityKind,
    pub units: Units,
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Solver-side diagnostics, e.g. the largest `|V|` seen on symmetric rays.
    pub diagnostics: Vec<(&'static str, f64)>,
}

impl DensityTable {
    /// The abscissae of a 1D table.
    pub fn abscissae(&self) -> Option<&[f64]> {
        match &self.grid {
            Grid::OneD(v) => Some(v),
            Grid::TwoD(_) => None,
        }
    }

    /// Trapezoidal `∫ x^k f(x) dx` over the tabulated support of a 1D table.
    pub fn trapezoid_moment(&self, k: i32) -> Option<f64> {
        let x = self.abscissae()?;
        let mut sum = 0.0;
        for i in 1..x.len() {
            let left = x[i - 1].powi(k) * self.values[i - 1];
            let right = x[i].powi(k) * self.values[i];
            sum += 0.5 * (x[i] - x[i - 1]) * (left + right);
        }
        Some(sum)
    }

    /// Trapezoidal normalization of a 1D table.
    pub fn trapezoid_normalization(&self) -> Option<f64> {
        self.trapezoid_moment(0)
    }

    /// Re-expresses the table in `units`: lengths scale by `1/π` going to
    /// unit-mean units and densities by `π` per length dimension. Ratio
    /// tables are unchanged.
    pub fn to_units(&self, units: Units) -> DensityTable {
        if units == self.units {
            return self.clone();
        }
        let length = if units == Units::UnitMean { 1.0 / PI } else { PI };
        let density = (1.0 / length).powi(self.kind.length_dims());
        let dims = self.kind.length_dims();
        let grid = match &self.grid {
            Grid::OneD(v) if dims > 0 => Grid::OneD(v.iter().map(|x| x * length).collect()),
            Grid::TwoD(v) => Grid::TwoD(v.iter().map(|&(a, b)| (a * length, b * length)).collect()),
            other => other.clone(),
        };
        DensityTable {
            kind: self.kind,
            units,
            grid,
            values: self.values.iter().map(|v| v * density).collect(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// Moments `E[x^k]`, `k = 1..=k_max`, with per-moment error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub k_max: usize,
    pub values: Vec<f64>,
    /// Numerical error bound for computed moments, standard error for
    /// sampled ones.
    pub est_error: Vec<f64>,
    /// `E[x^0]`, which should be 1.
    pub normalization: f64,
}

impl MomentSet {
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }
}

/// Shared configuration for density computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityConfig {
    pub solver: RaySolver,
    /// Support cutoff in kernel units.
    pub a_max: f64,
    /// Gauss–Legendre order along each ray.
    pub ray_order: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self { solver: RaySolver::default(), a_max: DEFAULT_A_MAX, ray_order: DEFAULT_RAY_ORDER }
    }
}

impl DensityConfig {
    pub fn with_a_max(mut self, a_max: f64) -> Result<Self> {
        if !(a_max > 0.0 && a_max <= 40.0) {
            return Err(Error::InvalidArgument(format!("a_max {a_max} outside (0, 40]")));
        }
        self.a_max = a_max;
        Ok(self)
    }

    fn check_grid(&self, grid: &[f64]) -> Result<()> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        if grid.iter().any(|&x| !(x >= 0.0 && x <= self.a_max * (1.0 + 1e-12))) {
            return Err(Error::Domain(format!("grid point outside [0, a_max = {}]", self.a_max)));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
        if grid.len() == 1 && grid[0] == 0.0 {
            return Err(Error::InvalidArgument("grid must reach beyond 0".into()));
        }
        Ok(())
    }

    /// Solves the ray through `(a, b)` at the given positions along it,
    /// expressed as fractions of the endpoint.
    fn ray(&self, a: f64, b: f64, s: &[f64]) -> Result<RayProfile> {
        self.solver.solve(a, b, s)
    }
}

/// Drops a leading 0, where every density here vanishes.
fn nonzero(grid: &[f64]) -> &[f64] {
    match grid.first().copied() {
        Some(0.0) => &grid[1..],
        _ => grid,
    }
}

fn pad_origin(grid: &[f64], values: impl Iterator<Item = f64>) -> Vec<f64> {
    let lead = grid.len() - nonzero(grid).len();
    std::iter::repeat_n(0.0, lead).chain(values).collect()
}

/// `P(s)` on `s_grid` (which may start at 0), from a single ray `(0, max s)`.
pub fn spacing_density(cfg: &DensityConfig, s_grid: &[f64]) -> Result<DensityTable> {
    cfg.check_grid(s_grid)?;
    let top = *s_grid.last().unwrap();
    let fractions: Vec<f64> = s_grid.iter().map(|s| s / top).collect();
    let ray = cfg.ray(0.0, top, nonzero(&fractions))?;
    let values = pad_origin(&fractions, ray.samples.iter().map(|r| r.j() * r.r22));
    Ok(DensityTable {
        kind: DensityKind::Spacing,
        units: Units::Kernel,
        grid: Grid::OneD(s_grid.to_vec()),
        values,
        diagnostics: Vec::new(),
    })
}

/// `P_nn(t)` on `t_grid` (which may start at 0), from a single symmetric ray `(-max t, max t)`.
pub fn nearest_neighbor_density(cfg: &DensityConfig, t_grid: &[f64]) -> Result<DensityTable> {
    cfg.check_grid(t_grid)?;
    let top = *t_grid.last().unwrap();
    let fractions: Vec<f64> = t_grid.iter().map(|t| t / top).collect();
    let ray = cfg.ray(-top, top, nonzero(&fractions))?;
    let values = pad_origin(&fractions, ray.samples.iter().map(|r| r.j() * (r.r11 + r.r22)));
    Ok(DensityTable {
        kind: DensityKind::NearestNeighbor,
        units: Units::Kernel,
        grid: Grid::OneD(t_grid.to_vec()),
        values,
        diagnostics: vec![("max_abs_v", ray.max_abs_v())],
    })
}

/// `P_c(a1, a2)` at arbitrary points; points sharing a direction share one ray.
pub fn joint_density(cfg: &DensityConfig, points: &[(f64, f64)]) -> Result<DensityTable> {
    let mut groups: HashMap<(u64, u64), Vec<(usize, f64)>> = HashMap::new();
    let mut values = vec![0.0; points.len()];
    for (i, &(a1, a2)) in points.iter().enumerate() {
        if !(a1.is_finite() && a2.is_finite()) || a1 > 0.0 || a2 < 0.0 {
            return Err(Error::InvalidArgument(format!("({a1}, {a2}) is not a valid interval")));
        }
        let scale = a1.abs().max(a2);
        if scale > cfg.a_max * (1.0 + 1e-12) && scale > 40.0 {
            return Err(Error::Domain(format!("({a1}, {a2}) beyond the supported range")));
        }
        if scale == 0.0 {
            continue;
        }
        let key = ((a1 / scale).to_bits(), (a2 / scale).to_bits());
        groups.entry(key).or_default().push((i, scale));
    }
    // (ray direction, [(point index, position along the ray)])
    type Job = ((f64, f64), Vec<(usize, f64)>);
    let mut jobs: Vec<Job> = groups
        .into_iter()
        .map(|((x, y), mut members)| {
            members.sort_by(|p, q| p.1.total_cmp(&q.1));
            ((f64::from_bits(x), f64::from_bits(y)), members)
        })
        .collect();
    jobs.sort_by(|p, q| p.0 .0.total_cmp(&q.0 .0).then(p.0 .1.total_cmp(&q.0 .1)));

    let solved: Vec<Vec<(usize, f64)>> = jobs
        .par_iter()
        .map(|((da, db), members)| {
            let top = members.last().unwrap().1;
            let mut fractions: Vec<f64> = members.iter().map(|m| m.1 / top).collect();
            fractions.dedup();
            let ray = cfg.ray(da * top, db * top, &fractions)?;
            Ok(members
                .iter()
                .map(|&(i, scale)| {
                    let f = scale / top;
                    let at = fractions.partition_point(|&x| x < f);
                    (i, ray.samples[at].pc)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    for (i, v) in solved.into_iter().flatten() {
        values[i] = v;
    }
    Ok(DensityTable {
        kind: DensityKind::Joint,
        units: Units::Kernel,
        grid: Grid::TwoD(points.to_vec()),
        values,
        diagnostics: Vec::new(),
    })
}

/// `P_r(r)` evaluated directly: one ray along the direction of ratio `r`,
/// integrated over the radial coordinate with Gauss–Legendre.
pub fn ratio_pdf(cfg: &DensityConfig, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("ratio {r} must be >= 0")));
    }
    if r > R_MAX {
        return Err(Error::Domain(format!("ratio {r} > r_max = {R_MAX}")));
    }
    ratio_pdf_any(cfg, r)
}

fn ratio_pdf_any(cfg: &DensityConfig, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    // Scale the ray so its longer side reaches a_max.
    let c = cfg.a_max / r.max(1.0);
    let rule = gauss_legendre(cfg.ray_order, 0.0, 1.0)?;
    let ray = cfg.ray(-r * c, c, rule.nodes())?;
    let sum: f64 = rule.iter().zip(&ray.samples).map(|((s, w), rec)| w * s * rec.pc).sum();
    Ok(c * c * sum)
}

/// `P_r` on a non-negative grid. Points with `r > 1` are obtained from
/// `P_r(r) = P_r(1/r) / r²`.
pub fn ratio_density(cfg: &DensityConfig, r_grid: &[f64]) -> Result<DensityTable> {
    if r_grid.iter().any(|&r| r.is_nan() || r < 0.0) {
        return Err(Error::InvalidArgument("ratio grid must be non-negative".into()));
    }
    if let Some(&r) = r_grid.iter().find(|&&r| r > R_MAX) {
        return Err(Error::Domain(format!("ratio {r} > r_max = {R_MAX}")));
    }
    let values = r_grid
        .par_iter()
        .map(|&r| if r <= 1.0 { ratio_pdf(cfg, r) } else { Ok(ratio_pdf(cfg, 1.0 / r)? / (r * r)) })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DensityTable {
        kind: DensityKind::Ratio,
        units: Units::Kernel,
        grid: Grid::OneD(r_grid.to_vec()),
        values,
        diagnostics: Vec::new(),
    })
}

/// Density `2 P_r(r̃)` of the folded ratio on a grid inside `[0, 1]`.
pub fn ratio_tilde_density(cfg: &DensityConfig, grid: &[f64]) -> Result<DensityTable> {
    if grid.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
        return Err(Error::Domain("folded ratio grid must lie in [0, 1]".into()));
    }
    let values = grid.par_iter().map(|&r| Ok(2.0 * ratio_pdf(cfg, r)?)).collect::<Result<Vec<f64>>>()?;
    Ok(DensityTable {
        kind: DensityKind::RatioTilde,
        units: Units::Kernel,
        grid: Grid::OneD(grid.to_vec()),
        values,
        diagnostics: Vec::new(),
    })
}

/// Log-spaced grid of `n` ratios in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n).map(|i| (l + (h - l) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn folded_moments(cfg: &DensityConfig, k_max: usize, order: usize) -> Result<(f64, Vec<f64>)> {
    let rule = gauss_legendre(order, 0.0, 1.0)?;
    let density: Vec<f64> = rule.nodes().par_iter().map(|&r| Ok(2.0 * ratio_pdf(cfg, r)?)).collect::<Result<_>>()?;
    let norm = rule.iter().zip(&density).map(|((_, w), d)| w * d).sum();
    let moments = (1..=k_max)
        .map(|k| rule.iter().zip(&density).map(|((r, w), d)| w * r.powi(k as i32) * d).sum())
        .collect();
    Ok((norm, moments))
}

/// `E[r̃^k]` for `k = 1..=k_max` with an outer rule of `order` nodes; the
/// error estimate is the change when the order is doubled.
pub fn ratio_moments_with_order(cfg: &DensityConfig, k_max: usize, order: usize) -> Result<MomentSet> {
    if !(1..=8).contains(&k_max) {
        return Err(Error::InvalidArgument(format!("k_max {k_max} outside 1..=8")));
    }
    let (_, coarse) = folded_moments(cfg, k_max, order)?;
    let (normalization, fine) = folded_moments(cfg, k_max, 2 * order)?;
    let est_error = coarse.iter().zip(&fine).map(|(c, f)| (c - f).abs()).collect();
    Ok(MomentSet { k_max, values: fine, est_error, normalization })
}

/// `E[r̃^k]` with the default outer order.
pub fn ratio_moments(cfg: &DensityConfig, k_max: usize) -> Result<MomentSet> {
    ratio_moments_with_order(cfg, k_max, DEFAULT_RATIO_ORDER)
}

/// Gauss–Legendre `(∫ P, ∫ s P)` over `[0, a_max]`.
pub fn spacing_normalization(cfg: &DensityConfig, order: usize) -> Result<(f64, f64)> {
    let rule = gauss_legendre(order, 0.0, cfg.a_max)?;
    let table = spacing_density(cfg, rule.nodes())?;
    let mass = rule.iter().zip(&table.values).map(|((_, w), p)| w * p).sum();
    let mean = rule.iter().zip(&table.values).map(|((s, w), p)| w * s * p).sum();
    Ok((mass, mean))
}

/// Gauss–Legendre `∫ P_nn` over `[0, a_max]`.
pub fn nearest_neighbor_normalization(cfg: &DensityConfig, order: usize) -> Result<f64> {
    let rule = gauss_legendre(order, 0.0, cfg.a_max)?;
    let table = nearest_neighbor_density(cfg, rule.nodes())?;
    Ok(rule.iter().zip(&table.values).map(|((_, w), p)| w * p).sum())
}

/// `∬ P_c` over the quarter disc of radius `a_max` in `a1 <= 0 <= a2`, by
/// polar Gauss–Legendre: `angle_order` rays, `radial_order` nodes per ray.
pub fn joint_normalization(cfg: &DensityConfig, angle_order: usize, radial_order: usize) -> Result<f64> {
    let angles = gauss_legendre(angle_order, 0.0, 0.5 * PI)?;
    let radii = gauss_legendre(radial_order, 0.0, cfg.a_max)?;
    let mut points = Vec::with_capacity(angle_order * radial_order);
    for &theta in angles.nodes() {
        for &rho in radii.nodes() {
            points.push((-rho * theta.cos(), rho * theta.sin()));
        }
    }
    let table = joint_density(cfg, &points)?;
    let mut total = 0.0;
    for (i, (_, wt)) in angles.iter().enumerate() {
        for (j, (rho, wr)) in radii.iter().enumerate() {
            total += wt * wr * rho * table.values[i * radial_order + j];
        }
    }
    Ok(total)
}

/// `(∫₀^∞ P_r dr, ∫₀¹ 2 P_r dr̃)`. The first integral evaluates `r > 1`
/// directly (as `∫₀¹ P_r(1/u) u⁻² du`) rather than through the swap symmetry.
pub fn ratio_normalization(cfg: &DensityConfig, order: usize) -> Result<(f64, f64)> {
    let rule = gauss_legendre(order, 0.0, 1.0)?;
    let (below, above) = rule
        .nodes()
        .par_iter()
        .map(|&u| Ok((ratio_pdf(cfg, u)?, ratio_pdf_any(cfg, 1.0 / u)? / (u * u))))
        .collect::<Result<Vec<(f64, f64)>>>()?
        .into_iter()
        .zip(rule.weights())
        .fold((0.0, 0.0), |acc, ((lo, hi), w)| (acc.0 + w * lo, acc.1 + w * hi));
    Ok((below + above, 2.0 * below))
}

/// Symmetry classes for the small-matrix surmise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Beta {
    Orthogonal = 1,
    Unitary = 2,
    Symplectic = 4,
}

impl Beta {
    pub fn from_index(beta: u32) -> Result<Self> {
        match beta {
            1 => Ok(Beta::Orthogonal),
            2 => Ok(Beta::Unitary),
            4 => Ok(Beta::Symplectic),
            other => Err(Error::InvalidArgument(format!("beta must be 1, 2 or 4, got {other}"))),
        }
    }

    fn value(self) -> f64 {
        self as u32 as f64
    }
}

fn surmise_shape(r: f64, beta: f64) -> f64 {
    (r + r * r).powf(beta) / (1.0 + r + r * r).powf(1.0 + 1.5 * beta)
}

fn surmise_constant(beta: Beta) -> f64 {
    static CONSTANTS: OnceLock<[f64; 3]> = OnceLock::new();
    let consts = CONSTANTS.get_or_init(|| {
        // ∫₀^∞ = 2 ∫₀¹ by the r -> 1/r symmetry of the shape.
        let rule = gauss_legendre(200, 0.0, 1.0).expect("valid rule");
        [Beta::Orthogonal, Beta::Unitary, Beta::Symplectic].map(|b| {
            let half: f64 = rule.iter().map(|(r, w)| w * surmise_shape(r, b.value())).sum();
            1.0 / (2.0 * half)
        })
    });
    match beta {
        Beta::Orthogonal => consts[0],
        Beta::Unitary => consts[1],
        Beta::Symplectic => consts[2],
    }
}

/// Small-matrix surmise for the ratio density,
/// `C_β (r + r²)^β / (1 + r + r²)^(1 + 3β/2)`, normalized numerically.
pub fn surmise_ratio(r: f64, beta: Beta) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    surmise_constant(beta) * surmise_shape(r, beta.value())
}

/// `E[r̃^k]` under the surmise, for `k = 1..=k_max`.
pub fn surmise_moments(beta: Beta, k_max: usize) -> Result<MomentSet> {
    if !(1..=8).contains(&k_max) {
        return Err(Error::InvalidArgument(format!("k_max {k_max} outside 1..=8")));
    }
    let rule = |n| gauss_legendre(n, 0.0, 1.0);
    let moments = |n: usize| -> Result<Vec<f64>> {
        let rule = rule(n)?;
        Ok((0..=k_max)
            .map(|k| rule.iter().map(|(r, w)| w * r.powi(k as i32) * 2.0 * surmise_ratio(r, beta)).sum())
            .collect())
    };
    let coarse = moments(64)?;
    let fine = moments(128)?;
    Ok(MomentSet {
        k_max,
        values: fine[1..].to_vec(),
        est_error: coarse[1..].iter().zip(&fine[1..]).map(|(c, f)| (c - f).abs()).collect(),
        normalization: fine[0],
    })
}
