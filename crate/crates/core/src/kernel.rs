//! The sine kernel and the kernel conditioned on an eigenvalue at the origin.
//!
//! Coordinates are in kernel units, where the mean eigenvalue spacing is `π`.

use std::f64::consts::PI;

const SINC_SERIES_CUTOFF: f64 = 1e-4;
const PSI_SERIES_CUTOFF: f64 = 0.1;
/// Below this separation the divided-difference form of `K̃` loses accuracy.
pub const DIVIDED_DIFFERENCE_CUTOFF: f64 = 1e-3;

fn inv_sqrt_pi() -> f64 {
    1.0 / PI.sqrt()
}

/// `sin(x) / x`, with the removable singularity at 0 filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// The sine kernel `K(x, y) = sin(x - y) / (π (x - y))`.
pub fn kernel_k(x: f64, y: f64) -> f64 {
    sinc((x - y).abs()) / PI
}

/// `φ(x) = sin(x) / √π`.
pub fn phi(x: f64) -> f64 {
    x.sin() * inv_sqrt_pi()
}

/// `ψ(x) = (cos x - sin(x)/x) / √π`; Taylor series near the origin.
pub fn psi(x: f64) -> f64 {
    if x.abs() < PSI_SERIES_CUTOFF {
        let x2 = x * x;
        // -x²/3 + x⁴/30 - x⁶/840 + x⁸/45360 - x¹⁰/3991680
        let series = x2
            * (-1.0 / 3.0 + x2 * (1.0 / 30.0 + x2 * (-1.0 / 840.0 + x2 * (1.0 / 45360.0 - x2 / 3_991_680.0))));
        series * inv_sqrt_pi()
    } else {
        (x.cos() - x.sin() / x) * inv_sqrt_pi()
    }
}

/// The conditional kernel `K̃(x, y) = (sinc(x - y) - sinc(x) sinc(y)) / π`.
///
/// Evaluated in the manifestly symmetric difference-of-sincs form, so
/// `kernel_ktilde(x, y) == kernel_ktilde(y, x)` bit for bit.
pub fn kernel_ktilde(x: f64, y: f64) -> f64 {
    (sinc((x - y).abs()) - sinc(x) * sinc(y)) / PI
}

/// `K̃` through the integrable form `(φ(x)ψ(y) - ψ(x)φ(y)) / (x - y)`.
///
/// Falls back to [`kernel_ktilde`] when `|x - y| <= 1e-3`. Used to
/// cross-check the canonical evaluation.
pub fn kernel_ktilde_divided(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d.abs() <= DIVIDED_DIFFERENCE_CUTOFF {
        return kernel_ktilde(x, y);
    }
    (phi(x) * psi(y) - psi(x) * phi(y)) / d
}
