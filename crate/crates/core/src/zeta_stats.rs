//! Gap-ratio statistics of Riemann ζ zeros.
//!
//! Ordinates are read from plain text (one per line, `#` comments). Ratios
//! `rₙ = (γₙ₊₁ - γₙ)/(γₙ - γₙ₋₁)` need no unfolding; the smooth density
//! `ρ̄(γ) = log(γ/2π)/2π` enters only the spacing unfolding and the
//! finite-height scaling variable `ρ̄⁻³`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::densities::MomentSet;
use crate::error::{Error, Result};
use crate::fmt::real;
use crate::mc_oracle::folded_ratio;

/// Moments tracked per window.
pub const K_MAX: usize = 4;
/// Default number of jackknife bins.
pub const DEFAULT_BINS: usize = 10;
/// Every ζ zero ordinate exceeds this.
pub const FIRST_ZERO_BOUND: f64 = 14.0;

/// Header of the per-window moment CSV.
pub const WINDOW_CSV_HEADER: &str = "window_label,N,gamma_N,rho_bar,k,moment,jackknife_err";
/// Header of the scaling-fit CSV.
pub const FIT_CSV_HEADER: &str = "k,slope,intercept,chi2,slope_proportional,chi2_proportional";

/// Mean zero density `ρ̄(γ) = log(γ/2π) / 2π`.
pub fn rho_bar(gamma: f64) -> f64 {
    (gamma / (2.0 * PI)).ln() / (2.0 * PI)
}

/// A run of consecutive zero ordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroWindow {
    ordinates: Vec<f64>,
    /// 1-based index of the first ordinate, when known.
    pub start_index: Option<u64>,
    pub label: String,
}

impl ZeroWindow {
    /// Validates that ordinates are strictly increasing and above 14.
    pub fn new(ordinates: Vec<f64>, start_index: Option<u64>, label: impl Into<String>) -> Result<Self> {
        for (i, &g) in ordinates.iter().enumerate() {
            if !(g.is_finite() && g > FIRST_ZERO_BOUND) {
                return Err(Error::DataIntegrity { line: i + 1, msg: format!("ordinate {g} is not above {FIRST_ZERO_BOUND}") });
            }
            if i > 0 && g <= ordinates[i - 1] {
                return Err(Error::DataIntegrity { line: i + 1, msg: format!("ordinate {g} does not exceed its predecessor") });
            }
        }
        Ok(Self { ordinates, start_index, label: label.into() })
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }
}

/// Streams `(line number, ordinate)` pairs from a one-column zero file.
pub struct ZeroReader<R> {
    lines: std::io::Lines<R>,
    line: usize,
    path: std::path::PathBuf,
}

impl ZeroReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        Ok(Self::new(BufReader::new(File::open(path)?), path))
    }
}

impl<R: BufRead> ZeroReader<R> {
    pub fn new(reader: R, path: &Path) -> Self {
        Self { lines: reader.lines(), line: 0, path: path.to_path_buf() }
    }
}

impl<R: BufRead> Iterator for ZeroReader<R> {
    type Item = Result<(usize, f64)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(e.into())),
            };
            self.line += 1;
            let trimmed = text.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Some(trimmed.parse::<f64>().map(|g| (self.line, g)).map_err(|e| Error::Parse {
                path: self.path.clone(),
                line: self.line,
                msg: format!("{trimmed:?}: {e}"),
            }));
        }
    }
}

/// Reads `take` ordinates after skipping `skip` from a one-column file.
pub fn load_zeros(path: &Path, skip: usize, take: usize) -> Result<ZeroWindow> {
    if take < 3 {
        return Err(Error::InvalidArgument(format!("take {take} < 3")));
    }
    let mut ordinates = Vec::with_capacity(take);
    let mut previous: Option<f64> = None;
    for item in ZeroReader::open(path)?.skip(skip).take(take) {
        let (line, g) = item?;
        check_ordinate(line, g, previous)?;
        previous = Some(g);
        ordinates.push(g);
    }
    if ordinates.len() < take {
        return Err(Error::InsufficientStatistics { have: ordinates.len(), need: take });
    }
    let label = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    ZeroWindow::new(ordinates, Some(skip as u64 + 1), label)
}

fn check_ordinate(line: usize, g: f64, previous: Option<f64>) -> Result<()> {
    if !(g.is_finite() && g > FIRST_ZERO_BOUND) {
        return Err(Error::DataIntegrity { line, msg: format!("ordinate {g} is not above {FIRST_ZERO_BOUND}") });
    }
    if let Some(p) = previous {
        if g < p {
            return Err(Error::DataIntegrity { line, msg: format!("ordinate {g} is below its predecessor {p}") });
        }
        if g == p {
            return Err(Error::DataIntegrity { line, msg: format!("duplicate ordinate {g}") });
        }
    }
    Ok(())
}

/// Converts an index-prefixed two-column zero file (`n γₙ`) to the
/// one-column format, returning the number of ordinates written.
pub fn convert_indexed(input: &Path, output: &Path) -> Result<usize> {
    let reader = BufReader::new(File::open(input)?);
    let mut out = BufWriter::new(File::create(output)?);
    let mut previous: Option<(u64, f64)> = None;
    let mut count = 0;
    for (i, text) in reader.lines().enumerate() {
        let text = text?;
        let line = i + 1;
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { path: input.to_path_buf(), line, msg };
        let mut fields = trimmed.split_whitespace();
        let (Some(index), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(format!("expected two columns, got {trimmed:?}")));
        };
        let index: u64 = index.parse().map_err(|e| parse_err(format!("index {index:?}: {e}")))?;
        let gamma: f64 = value.parse().map_err(|e| parse_err(format!("ordinate {value:?}: {e}")))?;
        check_ordinate(line, gamma, previous.map(|p| p.1))?;
        if let Some((prev_index, _)) = previous {
            if index != prev_index + 1 {
                return Err(Error::DataIntegrity { line, msg: format!("index {index} does not follow {prev_index}") });
            }
        }
        previous = Some((index, gamma));
        writeln!(out, "{value}")?;
        count += 1;
    }
    out.flush()?;
    Ok(count)
}

/// Unfolded spacings around one interior zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnfoldedPair {
    /// `ρ̄(γₙ)(γₙ - γₙ₋₁)`
    pub minus: f64,
    /// `ρ̄(γₙ)(γₙ₊₁ - γₙ)`
    pub plus: f64,
}

/// Unfolds every interior zero with the density at that zero.
pub fn unfold(win: &ZeroWindow) -> Result<Vec<UnfoldedPair>> {
    if win.len() < 3 {
        return Err(Error::InvalidArgument("unfolding needs at least 3 ordinates".into()));
    }
    Ok(win
        .ordinates
        .windows(3)
        .map(|w| {
            let rho = rho_bar(w[1]);
            UnfoldedPair { minus: rho * (w[1] - w[0]), plus: rho * (w[2] - w[1]) }
        })
        .collect())
}

/// Moments of `r̃` over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    pub label: String,
    /// 1-based index of the first zero, when known.
    pub start_index: Option<u64>,
    /// First ordinate of the window.
    pub gamma_n: f64,
    /// `ρ̄` at the window start.
    pub mean_density: f64,
    pub moments: [f64; K_MAX],
    pub jackknife_errors: [f64; K_MAX],
    pub n_ratios: usize,
}

impl WindowStats {
    /// `⟨r̃ᵏ⟩ / E[r̃ᵏ] - 1` against reference moments.
    pub fn deviations(&self, reference: &MomentSet) -> Result<[f64; K_MAX]> {
        let mut out = [0.0; K_MAX];
        for (k, slot) in out.iter_mut().enumerate() {
            let e = reference.get(k + 1).ok_or_else(|| Error::InvalidArgument(format!("reference lacks moment {}", k + 1)))?;
            *slot = self.moments[k] / e - 1.0;
        }
        Ok(out)
    }
}

/// Single-pass accumulator: a three-ordinate ring buffer for the ratios and
/// per-bin power sums for the jackknife. Memory is independent of window
/// length.
#[derive(Debug, Clone)]
pub struct WindowAccumulator {
    expected_ratios: usize,
    bins: Vec<BinSums>,
    last: [f64; 3],
    seen: usize,
    first: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct BinSums {
    sums: [f64; K_MAX],
    count: usize,
}

impl WindowAccumulator {
    /// Accumulator for a window of `n_ordinates` zeros split into `n_bins`
    /// contiguous jackknife bins.
    pub fn new(n_ordinates: usize, n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 jackknife bins, got {n_bins}")));
        }
        if n_ordinates < 10 * n_bins {
            return Err(Error::InsufficientStatistics { have: n_ordinates, need: 10 * n_bins });
        }
        Ok(Self { expected_ratios: n_ordinates - 2, bins: vec![BinSums::default(); n_bins], last: [0.0; 3], seen: 0, first: 0.0 })
    }

    /// Adds the next ordinate; `line` labels integrity errors.
    pub fn push(&mut self, line: usize, gamma: f64) -> Result<()> {
        if self.seen > 0 {
            check_ordinate(line, gamma, Some(self.last[2]))?;
        } else {
            check_ordinate(line, gamma, None)?;
            self.first = gamma;
        }
        self.last = [self.last[1], self.last[2], gamma];
        self.seen += 1;
        if self.seen >= 3 {
            let index = self.seen - 3;
            if index >= self.expected_ratios {
                return Err(Error::InvalidArgument("more ordinates than the window declared".into()));
            }
            let r = folded_ratio(self.last[2] - self.last[1], self.last[1] - self.last[0]);
            let bin = index * self.bins.len() / self.expected_ratios;
            let sums = &mut self.bins[bin];
            let mut p = 1.0;
            for s in sums.sums.iter_mut() {
                p *= r;
                *s += p;
            }
            sums.count += 1;
        }
        Ok(())
    }

    pub fn finish(self, label: impl Into<String>, start_index: Option<u64>) -> Result<WindowStats> {
        let n_ratios = self.seen.saturating_sub(2);
        if n_ratios != self.expected_ratios {
            return Err(Error::InsufficientStatistics { have: self.seen, need: self.expected_ratios + 2 });
        }
        let mut total = BinSums::default();
        for b in &self.bins {
            for k in 0..K_MAX {
                total.sums[k] += b.sums[k];
            }
            total.count += b.count;
        }
        let n = total.count as f64;
        let nb = self.bins.len() as f64;
        let mut moments = [0.0; K_MAX];
        let mut jackknife_errors = [0.0; K_MAX];
        for k in 0..K_MAX {
            moments[k] = total.sums[k] / n;
            let leave_out: Vec<f64> =
                self.bins.iter().map(|b| (total.sums[k] - b.sums[k]) / (n - b.count as f64)).collect();
            let mean = leave_out.iter().sum::<f64>() / nb;
            let spread: f64 = leave_out.iter().map(|t| (t - mean).powi(2)).sum();
            jackknife_errors[k] = ((nb - 1.0) / nb * spread).sqrt();
        }
        Ok(WindowStats {
            label: label.into(),
            start_index,
            gamma_n: self.first,
            mean_density: rho_bar(self.first),
            moments,
            jackknife_errors,
            n_ratios,
        })
    }
}

/// Windowed `r̃` moments with contiguous-bin jackknife errors.
pub fn window_moments(win: &ZeroWindow, n_bins: usize) -> Result<WindowStats> {
    let mut acc = WindowAccumulator::new(win.len(), n_bins)?;
    for (i, &g) in win.ordinates.iter().enumerate() {
        acc.push(i + 1, g)?;
    }
    acc.finish(win.label.clone(), win.start_index)
}

/// Like [`window_moments`] but streams the window straight from a file.
pub fn stream_window_moments(path: &Path, skip: usize, take: usize, n_bins: usize, label: impl Into<String>) -> Result<WindowStats> {
    let mut acc = WindowAccumulator::new(take, n_bins)?;
    let mut taken = 0;
    for item in ZeroReader::open(path)?.skip(skip).take(take) {
        let (line, g) = item?;
        acc.push(line, g)?;
        taken += 1;
    }
    if taken < take {
        return Err(Error::InsufficientStatistics { have: taken, need: take });
    }
    acc.finish(label, Some(skip as u64 + 1))
}

/// `(skip, take)` of the index window `[N, ⌊1.001 N⌋ + 1]`.
pub fn table_window(n: u64) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::InvalidArgument("zero indices start at 1".into()));
    }
    let last = n + n / 1000 + 1;
    Ok(((n - 1) as usize, (last - n + 1) as usize))
}

/// Weighted least-squares fit of one moment's deviations against `ρ̄⁻³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitRow {
    pub k: usize,
    pub slope: f64,
    pub intercept: f64,
    pub chi2: f64,
    /// Slope of the intercept-free fit `y = c x`.
    pub slope_proportional: f64,
    pub chi2_proportional: f64,
}

/// Fits `y = ⟨r̃ᵏ⟩/E[r̃ᵏ] - 1` against `x = ρ̄⁻³` with weights `1/σ²` from
/// the jackknife errors, with and without an intercept.
pub fn scaling_fit(stats: &[WindowStats], gue: &MomentSet) -> Result<Vec<FitRow>> {
    if stats.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 windows, got {}", stats.len())));
    }
    let x: Vec<f64> = stats.iter().map(|s| s.mean_density.powi(-3)).collect();
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::Fit("all windows share the same ρ̄".into()));
    }
    let mut rows = Vec::with_capacity(K_MAX);
    for k in 0..K_MAX {
        let e = gue.get(k + 1).ok_or_else(|| Error::Fit(format!("reference lacks moment {}", k + 1)))?;
        let y: Vec<f64> = stats.iter().map(|s| s.moments[k] / e - 1.0).collect();
        let w: Vec<f64> = stats
            .iter()
            .map(|s| {
                let sigma = s.jackknife_errors[k] / e;
                if sigma > 0.0 {
                    Ok(1.0 / (sigma * sigma))
                } else {
                    Err(Error::Fit(format!("window {:?} has a zero error for k = {}", s.label, k + 1)))
                }
            })
            .collect::<Result<_>>()?;
        rows.push(weighted_fit(k + 1, &x, &y, &w)?);
    }
    Ok(rows)
}

/// Weighted straight-line and proportional fits of `y` against `x`.
pub fn weighted_fit(k: usize, x: &[f64], y: &[f64], w: &[f64]) -> Result<FitRow> {
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(w).map(|(x, w)| w * x).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * (x - xm).powi(2)).sum();
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (y - intercept - slope * x).powi(2)).sum();
    let wxx: f64 = x.iter().zip(w).map(|(x, w)| w * x * x).sum();
    let wxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * x * y).sum();
    let slope_proportional = wxy / wxx;
    let chi2_proportional = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (y - slope_proportional * x).powi(2)).sum();
    Ok(FitRow { k, slope, intercept, chi2, slope_proportional, chi2_proportional })
}

/// Writes one CSV row per window and moment order.
pub fn write_window_csv<W: Write>(out: &mut W, stats: &[WindowStats]) -> Result<()> {
    writeln!(out, "{WINDOW_CSV_HEADER}")?;
    for s in stats {
        let n = s.start_index.map(|i| i.to_string()).unwrap_or_default();
        for k in 0..K_MAX {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.label,
                n,
                real(s.gamma_n),
                real(s.mean_density),
                k + 1,
                real(s.moments[k]),
                real(s.jackknife_errors[k])
            )?;
        }
    }
    Ok(())
}

/// Writes the fit report CSV.
pub fn write_fit_csv<W: Write>(out: &mut W, rows: &[FitRow]) -> Result<()> {
    writeln!(out, "{FIT_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            real(r.slope),
            real(r.intercept),
            real(r.chi2),
            real(r.slope_proportional),
            real(r.chi2_proportional)
        )?;
    }
    Ok(())
}
