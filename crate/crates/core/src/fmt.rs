//! Round-trip number formatting shared by the CSV and JSON writers.

/// Formats `x` with 17 significant digits, enough to round-trip any `f64`.
/// Exponents carry an explicit sign (`1.0000000000000000e+0`), the form JSON
/// writers normalize to.
pub fn real(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
        _ => s,
    }
}
