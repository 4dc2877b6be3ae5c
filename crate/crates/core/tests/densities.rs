use std::f64::consts::PI;

use janossy_core::densities::{
    joint_density, joint_normalization, nearest_neighbor_density, nearest_neighbor_normalization, ratio_density,
    ratio_moments, ratio_normalization, ratio_pdf, ratio_tilde_density, spacing_density, spacing_normalization,
    DensityConfig, Grid, Units,
};
use janossy_core::nystrom::{fredholm_det, Interval};
use janossy_core::RaySolver;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn spacing_density_starts_quadratically() {
    let cfg = DensityConfig::default();
    let table = spacing_density(&cfg, &[1e-3, 1e-2]).unwrap();
    for (s, p) in [1e-3, 1e-2].iter().zip(&table.values) {
        assert!(rel(p / (s * s), 1.0 / (3.0 * PI)) < 1e-3, "s={s}: P/s² = {}", p / (s * s));
    }
}

#[test]
fn spacing_density_at_mode_matches_nystrom_difference() {
    let cfg = DensityConfig::default();
    let grid = linspace(0.0, 2.0 * PI, 401);
    let table = spacing_density(&cfg, &grid).unwrap();
    let (i, _) = table.values.iter().enumerate().fold((0, 0.0), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let s = grid[i];
    let h = 1e-4;
    let j = |s: f64| fredholm_det(Interval::new(0.0, s).unwrap(), 200).unwrap();
    let fd = -(j(s + h) - j(s - h)) / (2.0 * h);
    assert!(rel(table.values[i], fd) < 1e-5, "mode s={s}: {} vs {fd}", table.values[i]);
}

#[test]
fn nearest_neighbor_density_matches_symmetric_gap_difference() {
    let cfg = DensityConfig::default();
    let solver = RaySolver::default();
    let grid = [0.5, 1.0, 2.0, 3.0, 4.5];
    let table = nearest_neighbor_density(&cfg, &grid).unwrap();
    let h = 1e-4;
    for (&t, &p) in grid.iter().zip(&table.values) {
        let fd = -(solver.janossy(-(t + h), t + h).unwrap() - solver.janossy(-(t - h), t - h).unwrap()) / (2.0 * h);
        assert!(rel(p, fd) < 1e-5, "t={t}: {p} vs {fd}");
    }
}

#[test]
fn joint_density_is_reflection_symmetric() {
    let cfg = DensityConfig::default();
    let points = [(-0.5, 2.0), (-3.0, 1.0), (-2.2, 4.1), (-6.0, 0.3)];
    let mirrored: Vec<(f64, f64)> = points.iter().map(|&(a, b)| (-b, -a)).collect();
    let p = joint_density(&cfg, &points).unwrap().values;
    let q = joint_density(&cfg, &mirrored).unwrap().values;
    for (x, y) in p.iter().zip(&q) {
        assert!(rel(*x, *y) < 1e-8, "{x} vs {y}");
    }
}

#[test]
fn joint_density_is_independent_of_batching() {
    let cfg = DensityConfig::default();
    // (−1,2) and (−2,4) share a ray.
    let points = vec![(-1.0, 2.0), (-2.5, 0.7), (-2.0, 4.0), (0.0, 3.0), (-1.5, 1.5)];
    let batch = joint_density(&cfg, &points).unwrap().values;
    for (pt, v) in points.iter().zip(&batch) {
        let single = joint_density(&cfg, &[*pt]).unwrap().values[0];
        assert!(rel(single, *v) < 1e-12 || (single - v).abs() < 1e-300, "{pt:?}: {single} vs {v}");
    }
}

#[test]
fn ratio_density_inversion_symmetry() {
    let cfg = DensityConfig::default();
    for r in [0.05, 0.3, 0.7, 1.0, 1.6, 4.0, 12.0] {
        let lhs = ratio_pdf(&cfg, 1.0 / r).unwrap();
        let rhs = r * r * ratio_pdf(&cfg, r).unwrap();
        assert!(rel(lhs, rhs) < 1e-6, "r={r}: {lhs} vs {rhs}");
    }
}

#[test]
fn densities_are_normalized() {
    let cfg = DensityConfig::default();
    let (mass, mean) = spacing_normalization(&cfg, 200).unwrap();
    assert!((mass - 1.0).abs() < 1e-6, "spacing mass {mass}");
    assert!(rel(mean, PI) < 1e-6, "mean spacing {mean}");
    let nn = nearest_neighbor_normalization(&cfg, 200).unwrap();
    assert!((nn - 1.0).abs() < 1e-6, "nearest neighbour {nn}");
    let joint = joint_normalization(&cfg, 64, 128).unwrap();
    assert!((joint - 1.0).abs() < 1e-6, "joint {joint}");
    let (full, folded) = ratio_normalization(&cfg, 100).unwrap();
    assert!((full - 1.0).abs() < 1e-6, "ratio {full}");
    assert!((folded - 1.0).abs() < 1e-6, "folded ratio {folded}");
    assert!((ratio_moments(&cfg, 1).unwrap().normalization - 1.0).abs() < 1e-6);
}

#[test]
fn grid_doubling_leaves_trapezoid_moments_stable() {
    let cfg = DensityConfig::default();
    let coarse = linspace(0.0, cfg.a_max, 241);
    let fine = linspace(0.0, cfg.a_max, 481);
    for density in [spacing_density, nearest_neighbor_density] {
        let a = density(&cfg, &coarse).unwrap();
        let b = density(&cfg, &fine).unwrap();
        for k in 0..=2 {
            let (ma, mb) = (a.trapezoid_moment(k).unwrap(), b.trapezoid_moment(k).unwrap());
            assert!((ma - mb).abs() < 1e-6, "{:?} k={k}: {ma} vs {mb}", a.kind);
        }
    }
    let a = ratio_tilde_density(&cfg, &linspace(0.0, 1.0, 801)).unwrap();
    let b = ratio_tilde_density(&cfg, &linspace(0.0, 1.0, 1601)).unwrap();
    for k in 0..=4 {
        let (ma, mb) = (a.trapezoid_moment(k).unwrap(), b.trapezoid_moment(k).unwrap());
        assert!((ma - mb).abs() < 1e-6, "ratio tilde k={k}: {ma} vs {mb}");
    }
}

#[test]
fn ratio_tables_do_not_depend_on_units() {
    let cfg = DensityConfig::default();
    let table = ratio_density(&cfg, &linspace(0.0, 5.0, 51)).unwrap();
    let converted = table.to_units(Units::UnitMean);
    assert_eq!(converted.grid, table.grid);
    for k in 0..=3 {
        let (a, b) = (table.trapezoid_moment(k).unwrap(), converted.trapezoid_moment(k).unwrap());
        assert!((a - b).abs() <= 1e-12 * a.abs(), "k={k}: {a} vs {b}");
    }
}

#[test]
fn unit_mean_spacing_has_unit_mean() {
    let cfg = DensityConfig::default();
    let table = spacing_density(&cfg, &linspace(0.0, cfg.a_max, 481)).unwrap().to_units(Units::UnitMean);
    assert!((table.trapezoid_normalization().unwrap() - 1.0).abs() < 1e-6);
    assert!((table.trapezoid_moment(1).unwrap() - 1.0).abs() < 1e-6);
    let round_trip = table.to_units(Units::Kernel);
    let Grid::OneD(x) = &round_trip.grid else { panic!() };
    assert!((x[480] - cfg.a_max).abs() < 1e-12);
}

#[test]
fn every_density_vanishes_at_the_origin() {
    let cfg = DensityConfig::default();
    assert_eq!(spacing_density(&cfg, &[0.0, 1.0]).unwrap().values[0], 0.0);
    assert_eq!(nearest_neighbor_density(&cfg, &[0.0, 1.0]).unwrap().values[0], 0.0);
    assert_eq!(ratio_density(&cfg, &[0.0, 1.0]).unwrap().values[0], 0.0);
    assert_eq!(ratio_tilde_density(&cfg, &[0.0, 1.0]).unwrap().values[0], 0.0);
}
