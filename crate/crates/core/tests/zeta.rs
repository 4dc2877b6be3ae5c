use std::f64::consts::{E, PI};
use std::io::Write;
use std::path::PathBuf;

use janossy_core::densities::{ratio_moments, DensityConfig};
use janossy_core::zeta_stats::{
    convert_indexed, load_zeros, rho_bar, scaling_fit, stream_window_moments, unfold, weighted_fit, window_moments,
    ZeroWindow,
};
use janossy_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use tempfile::NamedTempFile;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/zeros_1e5.txt")
}

fn text_file(body: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

fn poisson_window(n: usize, seed: u64) -> ZeroWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = 100.0;
    let ordinates = (0..n)
        .map(|_| {
            let gap: f64 = Exp1.sample(&mut rng);
            g += gap;
            g
        })
        .collect();
    ZeroWindow::new(ordinates, None, "poisson").unwrap()
}

#[test]
fn loads_first_three_zeros() {
    let f = text_file("# first zeros\n14.134725\n21.022040\n\n25.010858\n");
    let win = load_zeros(f.path(), 0, 3).unwrap();
    assert_eq!(win.ordinates(), &[14.134725, 21.022040, 25.010858]);
    assert_eq!(win.start_index, Some(1));
    let err = load_zeros(f.path(), 1, 2).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)), "take below 3 is rejected: {err}");
}

#[test]
fn skip_offsets_the_window() {
    let f = text_file("14.134725\n21.022040\n25.010858\n30.424876\n");
    let win = load_zeros(f.path(), 1, 3).unwrap();
    assert_eq!(win.ordinates()[0], 21.022040);
    assert_eq!(win.start_index, Some(2));
}

#[test]
fn decreasing_pair_names_its_line() {
    let f = text_file("# header\n14.134725\n25.010858\n21.022040\n");
    match load_zeros(f.path(), 0, 3).unwrap_err() {
        Error::DataIntegrity { line, .. } => assert_eq!(line, 4),
        other => panic!("unexpected {other}"),
    }
    let f = text_file("14.134725\nabc\n25.010858\n");
    match load_zeros(f.path(), 0, 3).unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 2),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn density_at_two_pi_e_is_one_over_two_pi() {
    assert!((rho_bar(2.0 * PI * E) - 1.0 / (2.0 * PI)).abs() < 1e-15);
}

#[test]
fn constant_unfolded_gaps_give_unit_spacings() {
    let mut g = 1.0e7;
    let mut ordinates = vec![g];
    for _ in 0..200 {
        g += 1.0 / rho_bar(g);
        ordinates.push(g);
    }
    let win = ZeroWindow::new(ordinates, None, "constant").unwrap();
    for pair in unfold(&win).unwrap() {
        assert!((pair.plus - 1.0).abs() < 1e-6, "δ₊ = {}", pair.plus);
        assert!((pair.minus - 1.0).abs() < 1e-6, "δ₋ = {}", pair.minus);
    }
}

#[test]
fn real_zeros_unfold_to_unit_mean_spacing() {
    let win = load_zeros(&fixture(), 0, 100_000).unwrap();
    let pairs = unfold(&win).unwrap();
    let mean = pairs.iter().map(|p| p.plus).sum::<f64>() / pairs.len() as f64;
    assert!((mean - 1.0).abs() < 2e-3, "mean δ₊ = {mean}");
}

#[test]
fn ratios_cancel_the_unfolding_density() {
    let win = load_zeros(&fixture(), 50_000, 10_000).unwrap();
    let g = win.ordinates();
    for (i, pair) in unfold(&win).unwrap().iter().enumerate() {
        let raw = (g[i + 2] - g[i + 1]) / (g[i + 1] - g[i]);
        let unfolded = pair.plus / pair.minus;
        assert!((raw - unfolded).abs() <= 1e-9 * raw, "n={}: {raw} vs {unfolded}", i + 1);
    }
}

#[test]
fn moments_are_reversal_invariant() {
    let win = poisson_window(5000, 7);
    let top = win.ordinates()[win.len() - 1] + win.ordinates()[0];
    let mirrored: Vec<f64> = win.ordinates().iter().rev().map(|g| top - g).collect();
    let a = window_moments(&win, 10).unwrap();
    let b = window_moments(&ZeroWindow::new(mirrored, None, "mirrored").unwrap(), 10).unwrap();
    for k in 0..4 {
        assert!((a.moments[k] - b.moments[k]).abs() < 1e-12, "k={}: {} vs {}", k + 1, a.moments[k], b.moments[k]);
    }
    assert_eq!(a.n_ratios, b.n_ratios);
}

#[test]
fn poisson_gaps_reproduce_the_poisson_mean_ratio() {
    let stats = window_moments(&poisson_window(200_000, 11), 10).unwrap();
    let target = 2.0 * 2f64.ln() - 1.0;
    let z = (stats.moments[0] - target) / stats.jackknife_errors[0];
    // Ten jackknife bins: z follows Student's t with 9 degrees of freedom,
    // whose two-sided 99.9% quantile is 4.78.
    assert!(z.abs() < 4.78, "⟨r̃⟩ = {} ± {}", stats.moments[0], stats.jackknife_errors[0]);
    assert_eq!(stats.n_ratios, 200_000 - 2);
}

#[test]
fn streaming_matches_in_memory() {
    let (skip, take) = (20_000, 30_000);
    let win = load_zeros(&fixture(), skip, take).unwrap();
    let a = window_moments(&win, 10).unwrap();
    let b = stream_window_moments(&fixture(), skip, take, 10, "stream").unwrap();
    assert_eq!(a.moments, b.moments);
    assert_eq!(a.jackknife_errors, b.jackknife_errors);
    assert_eq!(a.gamma_n, b.gamma_n);
}

#[test]
fn real_zero_windows_sit_above_gue() {
    let gue = ratio_moments(&DensityConfig::default(), 4).unwrap();
    let windows: Vec<_> = [(0, 20_000), (80_000, 20_000)]
        .iter()
        .map(|&(skip, take)| stream_window_moments(&fixture(), skip, take, 10, format!("{skip}")).unwrap())
        .collect();
    for w in &windows {
        let dev = w.deviations(&gue).unwrap();
        assert!(dev.iter().all(|&d| d > 0.0), "window {}: {dev:?}", w.label);
    }
    let fit = scaling_fit(&windows, &gue).unwrap();
    for row in fit {
        assert!(row.chi2.abs() < 1e-18, "two windows interpolate exactly: χ² = {}", row.chi2);
    }
}

#[test]
fn fit_recovers_an_exact_line() {
    let x = [0.5, 1.0, 2.0, 3.5, 7.0];
    let y: Vec<f64> = x.iter().map(|x| 0.25 + 1.5 * x).collect();
    let w = [1.0, 2.0, 0.5, 4.0, 1.0];
    let row = weighted_fit(1, &x, &y, &w).unwrap();
    assert!((row.slope - 1.5).abs() < 1e-12);
    assert!((row.intercept - 0.25).abs() < 1e-12);
    assert!(row.chi2 < 1e-24);
    let y: Vec<f64> = x.iter().map(|x| -0.75 * x).collect();
    let row = weighted_fit(2, &x, &y, &w).unwrap();
    assert!((row.slope_proportional + 0.75).abs() < 1e-12);
    assert!(row.chi2_proportional < 1e-24);
    assert!(matches!(weighted_fit(1, &[2.0, 2.0], &[1.0, 3.0], &[1.0, 1.0]), Err(Error::Fit(_))));
}

#[test]
fn converts_indexed_tables() {
    let input = text_file("# n gamma\n1 14.134725142\n2 21.022039639\n3 25.010857580\n");
    let output = NamedTempFile::new().unwrap();
    assert_eq!(convert_indexed(input.path(), output.path()).unwrap(), 3);
    let win = load_zeros(output.path(), 0, 3).unwrap();
    assert_eq!(win.ordinates(), &[14.134725142, 21.022039639, 25.010857580]);
    let gap = text_file("1 14.134725142\n3 25.010857580\n");
    assert!(matches!(convert_indexed(gap.path(), output.path()), Err(Error::DataIntegrity { line: 2, .. })));
}
