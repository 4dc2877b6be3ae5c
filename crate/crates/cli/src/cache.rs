//! On-disk cache of the exact ratio moments, keyed by the numerical settings.

use std::fs;
use std::path::Path;

use janossy_core::densities::{ratio_moments_with_order, DensityConfig, MomentSet};
use janossy_core::fmt::real;
use serde_json::{json, Value};

use crate::CliResult;

/// Highest moment order the cache stores.
const CACHED_K_MAX: usize = 8;

fn key(cfg: &DensityConfig, order: usize) -> String {
    format!("ratio_moments-tol{:e}-amax{}-ray{}-order{}.json", cfg.solver.tol(), real(cfg.a_max), cfg.ray_order, order)
}

fn decode(text: &str) -> Option<MomentSet> {
    let v: Value = serde_json::from_str(text).ok()?;
    let reals = |field: &str| -> Option<Vec<f64>> {
        v.get(field)?.as_array()?.iter().map(|x| x.as_str()?.parse().ok()).collect()
    };
    let values = reals("values")?;
    let est_error = reals("est_error")?;
    let normalization = v.get("normalization")?.as_str()?.parse().ok()?;
    (values.len() == CACHED_K_MAX && est_error.len() == CACHED_K_MAX)
        .then_some(MomentSet { k_max: CACHED_K_MAX, values, est_error, normalization })
}

/// `E[r̃ᵏ]` for `k = 1..=k_max`, read from `dir` when present and stored
/// there after computing otherwise. Cache failures fall back to computing.
pub fn ratio_moments(cfg: &DensityConfig, k_max: usize, order: usize, dir: Option<&Path>) -> CliResult<MomentSet> {
    if !(1..=CACHED_K_MAX).contains(&k_max) {
        return Err(janossy_core::Error::InvalidArgument(format!("k_max {k_max} outside 1..=8")).into());
    }
    let path = dir.map(|d| d.join(key(cfg, order)));
    let cached = path.as_ref().and_then(|p| fs::read_to_string(p).ok()).and_then(|t| decode(&t));
    let full = match cached {
        Some(m) => m,
        None => {
            let m = ratio_moments_with_order(cfg, CACHED_K_MAX, order)?;
            if let (Some(d), Some(p)) = (dir, path.as_ref()) {
                let body = json!({
                    "values": m.values.iter().map(|x| real(*x)).collect::<Vec<_>>(),
                    "est_error": m.est_error.iter().map(|x| real(*x)).collect::<Vec<_>>(),
                    "normalization": real(m.normalization),
                });
                if fs::create_dir_all(d).is_ok() {
                    let _ = fs::write(p, body.to_string());
                }
            }
            m
        }
    };
    Ok(MomentSet {
        k_max,
        values: full.values[..k_max].to_vec(),
        est_error: full.est_error[..k_max].to_vec(),
        normalization: full.normalization,
    })
}
