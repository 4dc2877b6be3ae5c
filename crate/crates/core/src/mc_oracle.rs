//! Monte Carlo GUE spectra from the β = 2 Hermite tridiagonal model, used as
//! a statistical check on the analytic ratio distribution.
//!
//! The model matrix has `N(0, 1)` on the diagonal and `χ_{2(N-i)}/√2` on the
//! off-diagonal, `i = 1..N-1`. Its eigenvalues follow the GUE law with
//! `E|H_ij|² = 1`, whose semicircle has radius `2√N`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::densities::{ratio_pdf, DensityConfig, DensityKind, DensityTable, Grid, MomentSet, Units};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Pooled ratios below this count are rejected.
pub const MIN_RATIOS: usize = 1000;
/// Histogram bins over `r̃ ∈ [0, 1]`.
pub const HISTOGRAM_BINS: usize = 50;
/// Largest moment order tracked.
pub const K_MAX: usize = 4;
const QL_MAX_SWEEPS: usize = 60;

/// Sorted eigenvalues of one sampled matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub matrix_dim: usize,
    pub eigenvalues: Vec<f64>,
    /// Fraction of central eigenvalues [`SpectrumSample::bulk`] keeps.
    pub bulk_fraction: f64,
    /// Sum of the sampled diagonal, equal to the eigenvalue sum.
    pub trace: f64,
}

impl SpectrumSample {
    /// Index range of the central `bulk_fraction` of the spectrum.
    pub fn bulk_range(&self) -> std::ops::Range<usize> {
        let n = self.eigenvalues.len();
        let count = ((self.bulk_fraction * n as f64).round() as usize).clamp(1, n);
        let start = (n - count) / 2;
        start..start + count
    }

    pub fn bulk(&self) -> &[f64] {
        &self.eigenvalues[self.bulk_range()]
    }

    /// Folded ratios `r̃ₙ` centred on each bulk eigenvalue. Neighbours may
    /// lie just outside the bulk; the spectrum edges are never used.
    pub fn folded_ratios(&self) -> impl Iterator<Item = f64> + '_ {
        let range = self.bulk_range();
        let lo = range.start.max(1);
        let hi = range.end.min(self.eigenvalues.len() - 1);
        let e = &self.eigenvalues;
        (lo..hi).map(move |n| folded_ratio(e[n + 1] - e[n], e[n] - e[n - 1]))
    }
}

/// `min(r, 1/r)` for `r = upper/lower`, without dividing by a zero gap.
pub fn folded_ratio(upper: f64, lower: f64) -> f64 {
    if upper <= lower {
        upper / lower
    } else {
        lower / upper
    }
}

/// Samples one β = 2 Hermite tridiagonal matrix and diagonalizes it.
pub fn sample_gue_spectrum(n: usize, seed: u64) -> Result<SpectrumSample> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("matrix dimension {n} < 4")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diag: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut off = vec![0.0; n];
    for (i, slot) in off.iter_mut().take(n - 1).enumerate() {
        let dof = 2.0 * (n - 1 - i) as f64;
        let chi2 = ChiSquared::new(dof).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        *slot = (chi2.sample(&mut rng) * 0.5).sqrt();
    }
    let trace = diag.iter().sum();
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(f64::total_cmp);
    Ok(SpectrumSample { matrix_dim: n, eigenvalues: diag, bulk_fraction: 1.0, trace })
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e[0..n-1]`, by QL with implicit Wilkinson shifts.
/// Overwrites `d` with the (unsorted) eigenvalues and destroys `e`.
pub fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if e.len() != n {
        return Err(Error::InvalidArgument("off-diagonal buffer must match the diagonal length".into()));
    }
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut total = 0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find a negligible off-diagonal element to split at.
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(Error::EigenNonConvergence { iterations: total });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                // Entries are O(√N), far from overflow; libm hypot is slow.
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Pooled folded-ratio statistics over many sampled spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRatioStats {
    /// `⟨r̃ᵏ⟩`, `k = 1..=4`, with standard errors.
    pub moments: MomentSet,
    /// Normalized histogram over [`HISTOGRAM_BINS`] equal bins of `[0, 1]`.
    pub histogram: DensityTable,
    pub counts: Vec<u64>,
    pub n_ratios: usize,
    pub n_matrices: usize,
    pub matrix_dim: usize,
    pub bulk_fraction: f64,
    pub seed: u64,
}

#[derive(Clone)]
struct Accumulator {
    counts: Vec<u64>,
    power_sums: [f64; K_MAX],
    square_sums: [f64; K_MAX],
    n: usize,
}

impl Accumulator {
    fn new() -> Self {
        Self { counts: vec![0; HISTOGRAM_BINS], power_sums: [0.0; K_MAX], square_sums: [0.0; K_MAX], n: 0 }
    }

    fn push(&mut self, r: f64) {
        let bin = ((r * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        self.counts[bin] += 1;
        let mut p = 1.0;
        for k in 0..K_MAX {
            p *= r;
            self.power_sums[k] += p;
            self.square_sums[k] += p * p;
        }
        self.n += 1;
    }

    fn merge(mut self, other: &Accumulator) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for k in 0..K_MAX {
            self.power_sums[k] += other.power_sums[k];
            self.square_sums[k] += other.square_sums[k];
        }
        self.n += other.n;
        self
    }
}

/// Samples `n_matrices` spectra of dimension `dim` and pools `r̃` over the
/// central `bulk_fraction` of each. Task `i` is seeded with `seed ^ i`.
pub fn empirical_ratio_stats(n_matrices: usize, dim: usize, bulk_fraction: f64, seed: u64) -> Result<EmpiricalRatioStats> {
    if n_matrices < 1 {
        return Err(Error::InvalidArgument("need at least one matrix".into()));
    }
    if dim < 100 {
        return Err(Error::InvalidArgument(format!("matrix dimension {dim} < 100")));
    }
    if !(bulk_fraction > 0.0 && bulk_fraction <= 0.5) {
        return Err(Error::InvalidArgument(format!("bulk fraction {bulk_fraction} outside (0, 0.5]")));
    }
    let partials: Vec<Accumulator> = (0..n_matrices)
        .into_par_iter()
        .map(|task| {
            let mut spectrum = sample_gue_spectrum(dim, seed ^ task as u64)?;
            spectrum.bulk_fraction = bulk_fraction;
            let mut acc = Accumulator::new();
            spectrum.folded_ratios().for_each(|r| acc.push(r));
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    // Sequential merge in task order keeps the sums bit-reproducible.
    let total = partials.iter().fold(Accumulator::new(), Accumulator::merge);
    if total.n < MIN_RATIOS {
        return Err(Error::InsufficientStatistics { have: total.n, need: MIN_RATIOS });
    }
    let n = total.n as f64;
    let values: Vec<f64> = total.power_sums.iter().map(|s| s / n).collect();
    let est_error = values
        .iter()
        .zip(&total.square_sums)
        .map(|(mean, sq)| ((sq / n - mean * mean).max(0.0) / (n - 1.0)).sqrt())
        .collect();
    let width = 1.0 / HISTOGRAM_BINS as f64;
    let histogram = DensityTable {
        kind: DensityKind::RatioTilde,
        units: Units::Kernel,
        grid: Grid::OneD((0..HISTOGRAM_BINS).map(|b| (b as f64 + 0.5) * width).collect()),
        values: total.counts.iter().map(|&c| c as f64 / (n * width)).collect(),
        diagnostics: Vec::new(),
    };
    Ok(EmpiricalRatioStats {
        moments: MomentSet { k_max: K_MAX, values, est_error, normalization: 1.0 },
        histogram,
        counts: total.counts,
        n_ratios: total.n,
        n_matrices,
        matrix_dim: dim,
        bulk_fraction,
        seed,
    })
}

/// Probability of each histogram bin under the exact density `2 P_r`.
pub fn expected_bin_probabilities(cfg: &DensityConfig) -> Result<Vec<f64>> {
    let width = 1.0 / HISTOGRAM_BINS as f64;
    (0..HISTOGRAM_BINS)
        .into_par_iter()
        .map(|b| {
            let lo = b as f64 * width;
            let rule = gauss_legendre(6, lo, lo + width)?;
            let mut p = 0.0;
            for (r, w) in rule.iter() {
                p += w * 2.0 * ratio_pdf(cfg, r)?;
            }
            Ok(p)
        })
        .collect()
}

/// Pearson `χ²` of the histogram counts against bin probabilities; returns
/// `(χ², χ² per bin)`.
pub fn histogram_chi2(stats: &EmpiricalRatioStats, probabilities: &[f64]) -> Result<(f64, f64)> {
    if probabilities.len() != stats.counts.len() {
        return Err(Error::InvalidArgument("bin count mismatch".into()));
    }
    let n = stats.n_ratios as f64;
    let chi2: f64 = stats
        .counts
        .iter()
        .zip(probabilities)
        .map(|(&c, &p)| {
            let expected = n * p;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    Ok((chi2, chi2 / probabilities.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ql_matches_closed_form() {
        // Path-graph Laplacian-like matrix: 2 on the diagonal, -1 off it,
        // eigenvalues 2 - 2 cos(kπ/(n+1)).
        let n = 12;
        let mut d = vec![2.0; n];
        let mut e = vec![-1.0; n];
        tridiagonal_eigenvalues(&mut d, &mut e).unwrap();
        d.sort_by(f64::total_cmp);
        for (k, lambda) in d.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((lambda - exact).abs() < 1e-13, "{k}: {lambda} vs {exact}");
        }
    }

    #[test]
    fn ql_handles_split_blocks() {
        let mut d = vec![1.0, 5.0, 3.0, -2.0];
        let mut e = vec![0.0, 0.0, 0.0, 0.0];
        tridiagonal_eigenvalues(&mut d, &mut e).unwrap();
        assert_eq!(d, vec![1.0, 5.0, 3.0, -2.0]);
        assert!(tridiagonal_eigenvalues(&mut [1.0, 2.0], &mut [0.0]).is_err());
    }

    #[test]
    fn small_spectrum_is_sorted_and_deterministic() {
        let a = sample_gue_spectrum(4, 11).unwrap();
        let b = sample_gue_spectrum(4, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.eigenvalues.len(), 4);
        assert!(a.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.eigenvalues.iter().all(|x| x.is_finite()));
        assert!(sample_gue_spectrum(3, 0).is_err());
    }

    #[test]
    fn trace_is_preserved() {
        let s = sample_gue_spectrum(300, 5).unwrap();
        let sum: f64 = s.eigenvalues.iter().sum();
        let scale = s.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!((sum - s.trace).abs() <= 1e-10 * 300.0 * scale);
    }

    #[test]
    fn folded_ratios_are_in_unit_interval() {
        let mut s = sample_gue_spectrum(200, 3).unwrap();
        s.bulk_fraction = 0.5;
        let ratios: Vec<f64> = s.folded_ratios().collect();
        assert_eq!(ratios.len(), 100);
        assert!(ratios.iter().all(|r| (0.0..=1.0).contains(r)));
        assert_eq!(folded_ratio(2.0, 1.0), 0.5);
        assert_eq!(folded_ratio(1.0, 4.0), 0.25);
    }

    #[test]
    fn too_few_ratios_is_an_error() {
        assert!(matches!(
            empirical_ratio_stats(2, 100, 0.1, 1),
            Err(Error::InsufficientStatistics { have: 20, need: MIN_RATIOS })
        ));
        assert!(empirical_ratio_stats(1, 100, 0.6, 1).is_err());
        assert!(empirical_ratio_stats(0, 100, 0.1, 1).is_err());
        assert!(empirical_ratio_stats(1, 50, 0.1, 1).is_err());
    }
}
