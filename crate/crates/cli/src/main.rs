//! `janossy`: command-line front end for janossy-core.
//!
//! Exit codes: 0 on success, 1 on numeric or data failure, 2 on usage errors.

mod cache;
mod commands;
mod grid;
mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use janossy_core::densities::DensityConfig;
use janossy_core::{Error, RaySolver, Units};

use crate::grid::{parse_real, IndexWindow, Range};
use crate::output::{Document, Format};

#[derive(Parser, Debug)]
#[command(name = "janossy", version, about = "Sine-kernel Jánossy densities, GUE gap ratios and zeta-zero statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// ODE tolerance, in [1e-14, 1e-6].
    #[arg(long, default_value_t = 1e-12, global = true)]
    tol: f64,
    /// Support cutoff in kernel units, in (0, 40]; accepts forms like `6pi`.
    #[arg(long, value_parser = parse_real, default_value = "6pi", global = true)]
    a_max: f64,
    /// Length units of the output.
    #[arg(long, value_enum, default_value_t = UnitsArg::Kernel, global = true)]
    units: UnitsArg,
    /// Output file; standard output when omitted.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Worker threads; 0 means one per core.
    #[arg(long, env = "JANOSSY_THREADS", default_value_t = 0, global = true)]
    threads: usize,
    /// Directory for cached ratio moments.
    #[arg(long, env = "JANOSSY_CACHE_DIR", global = true)]
    cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnitsArg {
    Kernel,
    UnitMean,
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Kernel => Units::Kernel,
            UnitsArg::UnitMean => Units::UnitMean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Spacing,
    Nn,
    Joint,
    Ratio,
    RatioTilde,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// J₁(0; [a1, a2]) on a grid, optionally cross-checked by Nyström.
    Janossy {
        /// Left endpoints, `lo:hi:n` with hi <= 0.
        #[arg(long, allow_hyphen_values = true)]
        a1: Range,
        /// Right endpoints, `lo:hi:n` with lo >= 0.
        #[arg(long, allow_hyphen_values = true)]
        a2: Range,
        /// Also evaluate the Nyström determinant and report the largest deviation.
        #[arg(long)]
        cross_check: bool,
        /// Nyström quadrature order.
        #[arg(long, default_value_t = janossy_core::nystrom::DEFAULT_ORDER)]
        nystrom_order: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate a spacing, nearest-neighbour, joint or ratio density.
    Densities {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Abscissae `lo:hi:n` (kernel units; `a1` for the joint density).
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<Range>,
        /// `a2` abscissae for the joint density.
        #[arg(long)]
        grid2: Option<Range>,
        /// Space the ratio grid logarithmically.
        #[arg(long)]
        log: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Moments E[r̃ᵏ] of the folded gap ratio, with the surmise for comparison.
    Moments {
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        /// Outer Gauss–Legendre order over r̃.
        #[arg(long, default_value_t = janossy_core::densities::DEFAULT_RATIO_ORDER)]
        order: usize,
        /// Symmetry index of the surmise (1, 2 or 4).
        #[arg(long, default_value_t = 2)]
        beta: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo gap-ratio statistics from sampled GUE spectra.
    Mc {
        /// Number of matrices.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Matrix dimension.
        #[arg(long, default_value_t = 1000)]
        dim: usize,
        /// Central fraction of each spectrum to pool.
        #[arg(long, default_value_t = 0.1)]
        bulk: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Gap-ratio moments of zeta zeros in index windows, with the scaling fit.
    Zeta {
        /// One-column zero files.
        #[arg(long = "file", required = true)]
        files: Vec<PathBuf>,
        /// 1-based inclusive index windows `first:last`.
        #[arg(long = "window")]
        windows: Vec<IndexWindow>,
        /// Table-style windows [N, 1.001 N + 1].
        #[arg(long = "table")]
        tables: Vec<u64>,
        /// Jackknife bins.
        #[arg(long, default_value_t = janossy_core::zeta_stats::DEFAULT_BINS)]
        bins: usize,
        /// Fit the deviations against ρ̄⁻³ (needs at least 2 windows).
        #[arg(long)]
        fit: bool,
        /// Separate file for the fit report.
        #[arg(long)]
        fit_output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Convert an index-prefixed two-column zero file to one column.
    ZetaConvert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "to")]
        to: PathBuf,
    },
    /// Regenerate the figure grids and the moment table in one run.
    Repro {
        /// Output directory.
        #[arg(long, default_value = "repro")]
        out_dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
    /// The reader went away (e.g. `| head`); not an error.
    ClosedPipe,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Domain(_) => Failure::Usage(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            Failure::ClosedPipe
        } else {
            Failure::Numeric(format!("i/o error: {e}"))
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Resolved settings shared by every computation.
pub struct Settings {
    pub cfg: DensityConfig,
    pub units: Units,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
}

impl Settings {
    fn new(common: &Common) -> CliResult<Self> {
        let solver = RaySolver::new(common.tol)?;
        let cfg = DensityConfig { solver, ..DensityConfig::default() }.with_a_max(common.a_max)?;
        if common.threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(common.threads)
                .build_global()
                .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
        }
        Ok(Self { cfg, units: common.units.into(), format: common.format, cache_dir: common.cache_dir.clone() })
    }

    /// Stamps the shared configuration onto a document header.
    pub fn describe(&self, doc: &mut Document) {
        doc.config("tol", format!("{:e}", self.cfg.solver.tol()))
            .config("a_max", janossy_core::fmt::real(self.cfg.a_max))
            .config("units", self.units.name());
    }
}

fn write_document(doc: &Document, path: Option<&PathBuf>, format: Format) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut out = BufWriter::new(File::create(p)?);
            doc.write(&mut out, format)?;
            out.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            doc.write(&mut out, format)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Janossy { a1, a2, cross_check, nystrom_order, common } => {
            let s = Settings::new(&common)?;
            let doc = commands::janossy(&s, a1, a2, cross_check.then_some(nystrom_order))?;
            write_document(&doc, common.output.as_ref(), s.format)
        }
        Command::Densities { kind, grid, grid2, log, common } => {
            let s = Settings::new(&common)?;
            let doc = commands::densities(&s, kind, grid, grid2, log)?;
            write_document(&doc, common.output.as_ref(), s.format)
        }
        Command::Moments { kmax, order, beta, common } => {
            let s = Settings::new(&common)?;
            let doc = commands::moments(&s, kmax, order, beta)?;
            write_document(&doc, common.output.as_ref(), s.format)
        }
        Command::Mc { n, dim, bulk, seed, common } => {
            let s = Settings::new(&common)?;
            let doc = commands::monte_carlo(&s, n, dim, bulk, seed)?;
            write_document(&doc, common.output.as_ref(), s.format)
        }
        Command::Zeta { files, windows, tables, bins, fit, fit_output, common } => {
            let s = Settings::new(&common)?;
            let (doc, fit_doc) = commands::zeta(&s, &files, &windows, &tables, bins, fit || fit_output.is_some())?;
            match (fit_doc, fit_output.as_ref()) {
                (Some(f), Some(path)) => {
                    write_document(&doc, common.output.as_ref(), s.format)?;
                    write_document(&f, Some(path), s.format)
                }
                (Some(f), None) => {
                    let mut merged = doc;
                    merged.tables.extend(f.tables);
                    write_document(&merged, common.output.as_ref(), s.format)
                }
                (None, _) => write_document(&doc, common.output.as_ref(), s.format),
            }
        }
        Command::ZetaConvert { input, to } => {
            let count = janossy_core::zeta_stats::convert_indexed(&input, &to)?;
            eprintln!("wrote {count} ordinates to {}", to.display());
            Ok(())
        }
        Command::Repro { out_dir, common } => {
            let s = Settings::new(&common)?;
            std::fs::create_dir_all(&out_dir)?;
            let ext = match s.format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            for (name, doc) in commands::repro(&s)? {
                let path = out_dir.join(format!("{name}.{ext}"));
                write_document(&doc, Some(&path), s.format)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) | Err(Failure::ClosedPipe) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn default_a_max_is_six_pi() {
        let cli = Cli::try_parse_from(["janossy", "moments"]).unwrap();
        let Command::Moments { common, .. } = cli.command else { panic!() };
        assert_eq!(common.a_max, janossy_core::densities::DEFAULT_A_MAX);
    }
}
