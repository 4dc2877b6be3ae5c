use janossy_core::nystrom::{fredholm_det, fredholm_det_converged, fredholm_log_det, Interval};
use janossy_core::RaySolver;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn symmetric_intervals_match_nystrom() {
    let solver = RaySolver::default();
    for t in [1.0, 5.0] {
        let tw = solver.janossy(-t, t).unwrap();
        let ny = fredholm_det(Interval::new(-t, t).unwrap(), 200).unwrap();
        assert!(rel(tw, ny) < 1e-8, "t={t}: {tw} vs {ny}");
    }
}

#[test]
fn converged_determinant_matches_flow_on_wide_interval() {
    let iv = Interval::new(-10.0, 10.0).unwrap();
    let (det, order) = fredholm_det_converged(iv, 1e-10).unwrap();
    let tw = RaySolver::default().janossy(-10.0, 10.0).unwrap();
    assert!(rel(tw, det) < 1e-6, "{tw} vs {det} (m = {order})");
}

#[test]
fn asymmetric_intervals_match_nystrom() {
    let solver = RaySolver::default();
    for (a1, a2) in [(-0.3, 2.0), (-4.0, 1.5), (0.0, 6.0), (-7.0, 0.0), (-2.5, 8.0)] {
        let tw = solver.ln_janossy(a1, a2).unwrap();
        let ny = fredholm_log_det(Interval::new(a1, a2).unwrap(), 200).unwrap().ln_abs;
        assert!((tw - ny).abs() < 1e-8 * ny.abs().max(1.0), "({a1},{a2}): {tw} vs {ny}");
    }
}

#[test]
fn reflection_is_exact_to_solver_accuracy() {
    let solver = RaySolver::default();
    for (a, b) in [(-1.0, 3.0), (-0.2, 5.0), (-6.0, 2.0), (-9.0, 4.0), (0.0, 7.0)] {
        let j1 = solver.janossy(a, b).unwrap();
        let j2 = solver.janossy(-b, -a).unwrap();
        assert!(rel(j1, j2) < 1e-9, "({a},{b}): {j1} vs {j2}");
    }
}

#[test]
fn start_point_does_not_matter_on_moderate_rays() {
    let solver = RaySolver::default();
    for (a, b) in [(-1.0, 1.0), (-5.0, 5.0), (-3.0, 7.0), (0.0, 8.0), (-8.0, 0.5)] {
        let scale = f64::max(-a, b);
        let l1 = solver.solve_with_eps(a, b, 1e-6 / scale, &[1.0]).unwrap().last().state.ln_j;
        let l2 = solver.solve_with_eps(a, b, 5e-7 / scale, &[1.0]).unwrap().last().state.ln_j;
        assert!((l1 - l2).abs() < 1e-11, "({a},{b}): {l1} vs {l2}");
    }
}

#[test]
fn start_point_effect_stays_within_oracle_bound_on_long_rays() {
    let solver = RaySolver::default();
    for (a, b) in [(-10.0, 10.0), (-2.0, 20.0), (0.0, 20.0)] {
        let scale = f64::max(-a, b);
        let l1 = solver.solve_with_eps(a, b, 1e-6 / scale, &[1.0]).unwrap().last().state.ln_j;
        let l2 = solver.solve_with_eps(a, b, 5e-7 / scale, &[1.0]).unwrap().last().state.ln_j;
        assert!((l1 - l2).abs() < 1e-6 * l1.abs(), "({a},{b}): {l1} vs {l2}");
    }
}

#[test]
fn empty_interval_has_unit_probability() {
    assert_eq!(fredholm_det(Interval::new(0.0, 0.0).unwrap(), 50).unwrap(), 1.0);
    assert_eq!(RaySolver::default().janossy(0.0, 0.0).unwrap(), 1.0);
}

#[test]
fn gap_probability_decreases_along_rays() {
    let s: Vec<f64> = (1..=50).map(|i| i as f64 / 50.0).collect();
    let profile = RaySolver::default().solve(-3.0, 5.0, &s).unwrap();
    let lnj: Vec<f64> = profile.computed().map(|r| r.state.ln_j).collect();
    assert!(lnj.windows(2).all(|w| w[1] < w[0]));
}
