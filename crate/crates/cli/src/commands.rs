//! Subcommand bodies: each builds a [`Document`] from core computations.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use janossy_core::densities::{
    joint_density, log_grid, nearest_neighbor_density, ratio_density, ratio_tilde_density, spacing_density,
    surmise_moments, Beta, DensityKind, DensityTable, Grid, DEFAULT_RATIO_ORDER, R_MAX,
};
use janossy_core::mc_oracle::{empirical_ratio_stats, expected_bin_probabilities, histogram_chi2, HISTOGRAM_BINS};
use janossy_core::nystrom::fredholm_log_det;
use janossy_core::zeta_stats::{scaling_fit, stream_window_moments, table_window, ZeroReader, FIT_CSV_HEADER, WINDOW_CSV_HEADER};
use janossy_core::{Error, Interval, Units};
use rayon::prelude::*;

use crate::cache;
use crate::grid::{IndexWindow, Range};
use crate::output::{Cell, Document, Table};
use crate::{CliResult, Failure, KindArg, Settings};

fn length_scale(units: Units) -> f64 {
    match units {
        Units::Kernel => 1.0,
        Units::UnitMean => 1.0 / PI,
    }
}

/// `J₁(0; [a1, a2])` over the tensor grid, TW rows then optional Nyström rows.
pub fn janossy(s: &Settings, a1: Range, a2: Range, nystrom_order: Option<usize>) -> CliResult<Document> {
    let points: Vec<(f64, f64)> =
        a1.points().into_iter().flat_map(|x| a2.points().into_iter().map(move |y| (x, y))).collect();
    let intervals: Vec<Interval> = points.iter().map(|&(x, y)| Interval::new(x, y)).collect::<Result<_, _>>()?;
    let solver = s.cfg.solver;
    let tw: Vec<f64> = intervals.par_iter().map(|iv| solver.ln_janossy(iv.a1(), iv.a2())).collect::<Result<_, _>>()?;
    let nystrom: Option<Vec<f64>> = match nystrom_order {
        Some(m) => Some(intervals.par_iter().map(|&iv| fredholm_log_det(iv, m).map(|d| d.ln_abs)).collect::<Result<_, _>>()?),
        None => None,
    };

    let mut doc = Document::new("janossy");
    s.describe(&mut doc);
    doc.config("a1", format!("{}:{}:{}", a1.lo, a1.hi, a1.n)).config("a2", format!("{}:{}:{}", a2.lo, a2.hi, a2.n));
    if let Some(m) = nystrom_order {
        doc.config("nystrom_order", m);
    }
    let scale = length_scale(s.units);
    let mut table = Table::new("janossy", &["a1", "a2", "lnJ", "J", "method"]);
    let mut push = |ln: &[f64], method: &str| {
        for (&(x, y), &l) in points.iter().zip(ln) {
            table.push(vec![(x * scale).into(), (y * scale).into(), l.into(), l.exp().into(), method.into()]);
        }
    };
    push(&tw, "tw");
    if let Some(ny) = &nystrom {
        push(ny, "nystrom");
        let mut worst: f64 = 0.0;
        let mut compared = 0usize;
        for (t, n) in tw.iter().zip(ny) {
            if t.is_finite() && n.is_finite() {
                worst = worst.max((t - n).exp_m1().abs());
                compared += 1;
            }
        }
        doc.diagnostic("max_rel_dev", worst).diagnostic("compared_points", compared);
        eprintln!("max |dJ/J| = {worst:.3e} over {compared} points");
    }
    doc.tables.push(table);
    Ok(doc)
}

fn default_grid(kind: KindArg, a_max: f64) -> Range {
    match kind {
        KindArg::Spacing | KindArg::Nn => Range { lo: 0.0, hi: a_max, n: 241 },
        KindArg::Joint => Range { lo: -a_max, hi: 0.0, n: 41 },
        KindArg::Ratio => Range { lo: 1e-3, hi: R_MAX, n: 200 },
        KindArg::RatioTilde => Range { lo: 0.0, hi: 1.0, n: 801 },
    }
}

fn density_table(s: &Settings, kind: KindArg, grid: Option<Range>, grid2: Option<Range>, log: bool) -> CliResult<DensityTable> {
    let range = grid.unwrap_or_else(|| default_grid(kind, s.cfg.a_max));
    let logarithmic = log || (kind == KindArg::Ratio && grid.is_none());
    let points = if logarithmic {
        if range.lo <= 0.0 {
            return Err(Failure::Usage("a logarithmic grid needs lo > 0".into()));
        }
        log_grid(range.lo, range.hi, range.n)
    } else {
        range.points()
    };
    let table = match kind {
        KindArg::Spacing => spacing_density(&s.cfg, &points)?,
        KindArg::Nn => nearest_neighbor_density(&s.cfg, &points)?,
        KindArg::Ratio => ratio_density(&s.cfg, &points)?,
        KindArg::RatioTilde => ratio_tilde_density(&s.cfg, &points)?,
        KindArg::Joint => {
            let a2 = grid2.unwrap_or(Range { lo: 0.0, hi: s.cfg.a_max, n: 41 }).points();
            let pairs: Vec<(f64, f64)> = points.iter().flat_map(|&x| a2.iter().map(move |&y| (x, y))).collect();
            joint_density(&s.cfg, &pairs)?
        }
    };
    Ok(table)
}

fn density_document(s: &Settings, table: &DensityTable, label: &str) -> Document {
    let mut doc = Document::new("densities");
    s.describe(&mut doc);
    doc.config("kind", table.kind.name()).config("grid", label);
    let kernel_norm = table.trapezoid_normalization();
    let kernel_mean = table.trapezoid_moment(1);
    let table = table.to_units(s.units);
    if let Some(norm) = kernel_norm {
        doc.diagnostic("trapezoid_normalization", norm);
    }
    if table.kind == DensityKind::Spacing {
        if let Some(mean) = kernel_mean {
            doc.diagnostic("trapezoid_mean_kernel_units", mean);
        }
    }
    for (k, v) in &table.diagnostics {
        doc.diagnostic(k, *v);
    }
    let columns: &[&str] = match table.kind {
        DensityKind::Spacing => &["s", "P"],
        DensityKind::NearestNeighbor => &["t", "P_nn"],
        DensityKind::Joint => &["a1", "a2", "P_c"],
        DensityKind::Ratio => &["r", "P_r"],
        DensityKind::RatioTilde => &["r_tilde", "density"],
    };
    let mut out = Table::new(table.kind.name(), columns);
    match &table.grid {
        Grid::OneD(x) => x.iter().zip(&table.values).for_each(|(&x, &v)| out.push(vec![x.into(), v.into()])),
        Grid::TwoD(p) => p.iter().zip(&table.values).for_each(|(&(a, b), &v)| out.push(vec![a.into(), b.into(), v.into()])),
    }
    doc.tables.push(out);
    doc
}

pub fn densities(s: &Settings, kind: KindArg, grid: Option<Range>, grid2: Option<Range>, log: bool) -> CliResult<Document> {
    if grid2.is_some() && kind != KindArg::Joint {
        return Err(Failure::Usage("--grid2 applies to --kind joint only".into()));
    }
    let table = density_table(s, kind, grid, grid2, log)?;
    let range = grid.unwrap_or_else(|| default_grid(kind, s.cfg.a_max));
    let mut label = format!("{}:{}:{}{}", range.lo, range.hi, range.n, if log { ":log" } else { "" });
    if let Some(g2) = grid2 {
        label.push_str(&format!("x{}:{}:{}", g2.lo, g2.hi, g2.n));
    }
    Ok(density_document(s, &table, &label))
}

pub fn moments(s: &Settings, kmax: usize, order: usize, beta: u32) -> CliResult<Document> {
    if !(1..=8).contains(&kmax) {
        return Err(Failure::Usage(format!("--kmax {kmax} outside 1..=8")));
    }
    if order < 10 {
        return Err(Failure::Usage(format!("--order {order} is too small (minimum 10)")));
    }
    let beta = Beta::from_index(beta)?;
    let exact = cache::ratio_moments(&s.cfg, kmax, order, s.cache_dir.as_deref())?;
    let surmise = surmise_moments(beta, kmax)?;
    let mut doc = Document::new("moments");
    s.describe(&mut doc);
    doc.config("kmax", kmax).config("order", order).config("beta", beta as u32);
    doc.diagnostic("normalization", exact.normalization);
    let mut table = Table::new("moments", &["k", "moment", "est_error", "surmise", "surmise_gap"]);
    for k in 0..kmax {
        let gap = surmise.values[k] - exact.values[k];
        table.push(vec![(k + 1).into(), exact.values[k].into(), exact.est_error[k].into(), surmise.values[k].into(), gap.into()]);
    }
    doc.tables.push(table);
    Ok(doc)
}

pub fn monte_carlo(s: &Settings, n: usize, dim: usize, bulk: f64, seed: u64) -> CliResult<Document> {
    let stats = empirical_ratio_stats(n, dim, bulk, seed)?;
    let exact = cache::ratio_moments(&s.cfg, stats.moments.k_max, DEFAULT_RATIO_ORDER, s.cache_dir.as_deref())?;
    let probabilities = expected_bin_probabilities(&s.cfg)?;
    let (chi2, per_bin) = histogram_chi2(&stats, &probabilities)?;

    let mut doc = Document::new("mc");
    s.describe(&mut doc);
    doc.config("n", n).config("dim", dim).config("bulk", janossy_core::fmt::real(bulk));
    doc.seed = Some(seed);
    doc.diagnostic("n_ratios", stats.n_ratios).diagnostic("chi2", chi2).diagnostic("chi2_per_bin", per_bin);

    let mut moments = Table::new("moments", &["k", "moment", "std_err", "exact", "z"]);
    for k in 0..stats.moments.k_max {
        let (m, e, x) = (stats.moments.values[k], stats.moments.est_error[k], exact.values[k]);
        moments.push(vec![(k + 1).into(), m.into(), e.into(), x.into(), ((m - x) / e).into()]);
    }
    let width = 1.0 / HISTOGRAM_BINS as f64;
    let mut histogram = Table::new("histogram", &["bin_lo", "bin_hi", "count", "density", "expected_density"]);
    for (b, (&count, &p)) in stats.counts.iter().zip(&probabilities).enumerate() {
        let lo = b as f64 * width;
        histogram.push(vec![
            lo.into(),
            (lo + width).into(),
            Cell::Int(count as i64),
            stats.histogram.values[b].into(),
            (p / width).into(),
        ]);
    }
    doc.tables.push(moments);
    doc.tables.push(histogram);
    Ok(doc)
}

fn count_zeros(path: &Path) -> CliResult<u64> {
    let mut n = 0;
    for item in ZeroReader::open(path)? {
        item?;
        n += 1;
    }
    Ok(n)
}

/// Window moments for every (file, window) pair, plus the fit when asked.
pub fn zeta(
    s: &Settings,
    files: &[PathBuf],
    windows: &[IndexWindow],
    tables: &[u64],
    bins: usize,
    fit: bool,
) -> CliResult<(Document, Option<Document>)> {
    let mut jobs: Vec<(PathBuf, IndexWindow)> = Vec::new();
    for file in files {
        let mut ranges: Vec<IndexWindow> = windows.to_vec();
        for &n in tables {
            let (skip, take) = table_window(n)?;
            ranges.push(IndexWindow { first: skip as u64 + 1, last: (skip + take) as u64 });
        }
        if ranges.is_empty() {
            ranges.push(IndexWindow { first: 1, last: count_zeros(file)? });
        }
        jobs.extend(ranges.into_iter().map(|w| (file.clone(), w)));
    }
    let stats = jobs
        .par_iter()
        .map(|(file, w)| {
            let stem = file.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_default();
            let label = format!("{stem}:{}-{}", w.first, w.last);
            let take = (w.last - w.first + 1) as usize;
            stream_window_moments(file, (w.first - 1) as usize, take, bins, label)
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut doc = Document::new("zeta");
    s.describe(&mut doc);
    let names: Vec<String> = files.iter().map(|f| f.display().to_string()).collect();
    doc.config("files", names.join(";")).config("bins", bins);
    let mut table = Table::new("windows", &WINDOW_CSV_HEADER.split(',').collect::<Vec<_>>());
    for w in &stats {
        doc.diagnostic(&format!("n_ratios[{}]", w.label), w.n_ratios);
        for k in 0..w.moments.len() {
            table.push(vec![
                w.label.as_str().into(),
                Cell::Int(w.start_index.unwrap_or(0) as i64),
                w.gamma_n.into(),
                w.mean_density.into(),
                (k + 1).into(),
                w.moments[k].into(),
                w.jackknife_errors[k].into(),
            ]);
        }
    }
    doc.tables.push(table);

    if !fit {
        return Ok((doc, None));
    }
    if stats.len() < 2 {
        return Err(Failure::Usage("the scaling fit needs at least two windows".into()));
    }
    let gue = cache::ratio_moments(&s.cfg, 4, DEFAULT_RATIO_ORDER, s.cache_dir.as_deref())?;
    let rows = scaling_fit(&stats, &gue).map_err(|e| Failure::Numeric(e.to_string()))?;
    let mut fit_doc = Document::new("zeta-fit");
    s.describe(&mut fit_doc);
    fit_doc.config("files", names.join(";")).config("bins", bins);
    let mut fit_table = Table::new("fit", &FIT_CSV_HEADER.split(',').collect::<Vec<_>>());
    for r in rows {
        fit_table.push(vec![
            r.k.into(),
            r.slope.into(),
            r.intercept.into(),
            r.chi2.into(),
            r.slope_proportional.into(),
            r.chi2_proportional.into(),
        ]);
    }
    fit_doc.tables.push(fit_table);
    Ok((doc, Some(fit_doc)))
}

/// Figure grids and the moment table.
pub fn repro(s: &Settings) -> CliResult<Vec<(&'static str, Document)>> {
    let side = 3.0 * PI;
    let a1 = Range { lo: -side, hi: 0.0, n: 31 };
    let a2 = Range { lo: 0.0, hi: side, n: 31 };
    let mut out = vec![("fig1_janossy", janossy(s, a1, a2, None)?)];
    out.push(("fig1_joint", densities(s, KindArg::Joint, Some(a1), Some(a2), false)?));
    out.push(("fig2_ratio_tilde", densities(s, KindArg::RatioTilde, None, None, false)?));
    out.push(("spacing", densities(s, KindArg::Spacing, None, None, false)?));
    out.push(("nearest_neighbor", densities(s, KindArg::Nn, None, None, false)?));
    out.push(("moments", moments(s, 4, DEFAULT_RATIO_ORDER, 2)?));
    Ok(out)
}
