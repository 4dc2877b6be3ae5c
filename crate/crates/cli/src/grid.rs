//! `lo:hi:n` range specifications.

use std::f64::consts::PI;
use std::str::FromStr;

/// `n` evenly spaced points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.hi } else { self.lo + step * i as f64 }).collect()
    }
}

/// Parses a real, accepting `pi` multiples such as `6pi` or `-pi`.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let value = if let Some(prefix) = t.strip_suffix("pi") {
        let factor = match prefix {
            "" | "+" => 1.0,
            "-" => -1.0,
            p => p.parse::<f64>().map_err(|e| format!("{text:?}: {e}"))?,
        };
        factor * PI
    } else {
        t.parse::<f64>().map_err(|e| format!("{text:?}: {e}"))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("{text:?} is not finite"))
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("expected lo:hi:n, got {s:?}"));
        };
        let lo = parse_real(lo)?;
        let hi = parse_real(hi)?;
        let n: usize = n.trim().parse().map_err(|e| format!("point count {n:?}: {e}"))?;
        if n == 0 {
            return Err("point count must be positive".into());
        }
        if hi < lo || (n > 1 && hi == lo) {
            return Err(format!("range {s:?} must have lo < hi (or lo = hi with n = 1)"));
        }
        Ok(Range { lo, hi, n })
    }
}

/// A 1-based inclusive index window `first:last`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexWindow {
    pub first: u64,
    pub last: u64,
}

impl FromStr for IndexWindow {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected first:last, got {s:?}"))?;
        let first: u64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let last: u64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if first == 0 || last < first + 2 {
            return Err(format!("window {s:?} needs 1 <= first and at least 3 zeros"));
        }
        Ok(IndexWindow { first, last })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse() {
        let r: Range = "-10:0:21".parse().unwrap();
        assert_eq!(r.points().len(), 21);
        assert_eq!(r.points()[20], 0.0);
        assert_eq!(r.points()[1], -9.5);
        let single: Range = "0:0:1".parse().unwrap();
        assert_eq!(single.points(), vec![0.0]);
        let p: Range = "0:6pi:3".parse().unwrap();
        assert_eq!(p.points()[2], 6.0 * PI);
        for bad in ["1:0:5", "0:1", "0:1:0", "a:1:3", "0:1:x", "0:0:3", "0:inf:2"] {
            assert!(bad.parse::<Range>().is_err(), "{bad}");
        }
    }

    #[test]
    fn windows_parse() {
        assert_eq!("1:100000".parse::<IndexWindow>().unwrap(), IndexWindow { first: 1, last: 100000 });
        assert!("0:10".parse::<IndexWindow>().is_err());
        assert!("5:6".parse::<IndexWindow>().is_err());
        assert!("5".parse::<IndexWindow>().is_err());
    }
}
