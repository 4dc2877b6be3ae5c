//! Sine-kernel Jánossy densities and GUE spacing statistics.
//!
//! The probability `J₁(0; [a1, a2])` that a bulk GUE eigenvalue at the origin
//! has no neighbour in `[a1, a2]` is computed two independent ways: by
//! integrating the Tracy–Widom system along rays ([`tw_solver`]) and by a
//! Nyström discretization of the Fredholm determinant ([`nystrom`]). The
//! densities of one spacing, of the nearest-neighbour spacing, of two
//! consecutive spacings and of their ratio follow in [`densities`].
//! [`mc_oracle`] samples GUE spectra for a statistical cross-check and
//! [`zeta_stats`] applies the gap-ratio statistics to Riemann zeta zeros.
//!
//! Lengths are in kernel units (mean spacing `π`) unless stated otherwise.

pub mod densities;
pub mod error;
pub mod fmt;
pub mod kernel;
pub mod mc_oracle;
pub mod nystrom;
pub mod ode;
pub mod quadrature;
pub mod tw_solver;
pub mod zeta_stats;

pub use densities::{DensityConfig, DensityKind, DensityTable, MomentSet, Units};
pub use error::{Error, Result};
pub use nystrom::{Interval, LogDet};
pub use quadrature::QuadratureRule;
pub use tw_solver::{RayProfile, RaySample, RaySolver, TwState};
pub use zeta_stats::{WindowStats, ZeroWindow};

