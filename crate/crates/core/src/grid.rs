//! Sampling grids, threshold bisection and band sampling shared by all
//! certificate builders.

use crate::error::{Error, Result};

/// Distance kept from the open endpoints of (0, 1) for grid values.
pub const ENDPOINT_CLAMP: f64 = 1e-6;
/// Iterations of every threshold bisection (rho, delta, N searches).
pub const BISECTION_STEPS: usize = 40;
/// Default resolution of tau / s sampling inside a band.
pub const TAU_RESOLUTION: f64 = 1e-4;
/// Narrowest band searched. Keeps every sampled band wider than the comparison
/// slack, so a failing condition cannot pass on a band the tolerance swallows.
pub const MIN_BAND: f64 = 1e-9;

/// 40 logarithmically spaced values in [1e-2, 1e2].
pub fn default_t_grid() -> Vec<f64> {
    log_grid(1e-2, 1e2, 40)
}

/// {0.05, 0.10, ..., 0.95}.
pub fn default_r_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

/// 20 logarithmically spaced epsilon values in [1e-2, 1e1].
pub fn default_eps_grid() -> Vec<f64> {
    log_grid(1e-2, 1e1, 20)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Clamp an r value into [clamp, 1 - clamp].
pub fn clamp_open_unit(r: f64) -> f64 {
    r.clamp(ENDPOINT_CLAMP, 1.0 - ENDPOINT_CLAMP)
}

/// Parse a number that may be written as a fraction such as `5/7`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = if let Some((n, d)) = s.split_once('/') {
        let n: f64 = n.trim().parse().map_err(|_| bad_num(s))?;
        let d: f64 = d.trim().parse().map_err(|_| bad_num(s))?;
        n / d
    } else {
        s.parse().map_err(|_| bad_num(s))?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad_num(s))
    }
}

fn bad_num(s: &str) -> Error {
    Error::Invalid(format!("not a number: `{s}`"))
}

/// Grid spec: `log:<lo>:<hi>:<n>`, `lin:<lo>:<hi>:<n>`, or a comma list.
pub fn parse_grid_spec(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [kind @ ("log" | "lin"), lo, hi, n] => {
            let lo = parse_number(lo)?;
            let hi = parse_number(hi)?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad grid size in `{spec}`")))?;
            if n == 0 || hi < lo || (*kind == "log" && lo <= 0.0) {
                return Err(Error::Invalid(format!("bad grid spec `{spec}`")));
            }
            Ok(if *kind == "log" {
                log_grid(lo, hi, n)
            } else {
                lin_grid(lo, hi, n)
            })
        }
        [_] => {
            let v = spec
                .split(',')
                .map(parse_number)
                .collect::<Result<Vec<_>>>()?;
            if v.is_empty() {
                return Err(Error::Invalid("empty grid".into()));
            }
            Ok(v)
        }
        _ => Err(Error::Invalid(format!("bad grid spec `{spec}`"))),
    }
}

/// Points strictly inside the open band (a, b): a uniform layer at the given
/// resolution plus geometric layers approaching both endpoints.
pub fn band_samples(a: f64, b: f64, resolution: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(b > a) {
        return out;
    }
    let w = b - a;
    let k = ((w / resolution).ceil() as usize).clamp(1, 10_000);
    for i in 0..k {
        out.push(a + w * (i as f64 + 0.5) / k as f64);
    }
    let mut h = w;
    for _ in 0..52 {
        h *= 0.5;
        out.push(a + h);
        out.push(b - h);
    }
    out.retain(|&v| v > a && v < b);
    out
}

/// Deterministic equidistributed points in (0, 1) (golden-ratio Weyl sequence).
pub fn weyl(n: usize) -> Vec<f64> {
    const G: f64 = 0.618_033_988_749_894_9;
    (1..=n).map(|k| (0.5 + k as f64 * G).fract()).collect()
}

/// Largest parameter in (lo, hi] accepted by a monotone predicate
/// (valid near `lo`, possibly invalid near `hi`). Tries `hi` first, then
/// bisects. Returns `None` if no tested point was valid.
pub fn search_upper(lo: f64, hi: f64, valid: impl Fn(f64) -> bool) -> Option<f64> {
    if !(hi > lo) {
        return None;
    }
    if valid(hi) {
        return Some(hi);
    }
    let (mut a, mut b) = (lo, hi);
    let mut found = None;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (a + b);
        if valid(mid) {
            a = mid;
            found = Some(mid);
        } else {
            b = mid;
        }
    }
    found
}

/// Band bound in [lo + MIN_BAND, hi] accepted by a monotone predicate.
pub fn search_band(lo: f64, hi: f64, valid: impl Fn(f64) -> bool) -> Option<f64> {
    let lo = lo + MIN_BAND;
    search_upper(lo, hi, &valid).or_else(|| valid(lo).then_some(lo))
}

/// rho search on [r + MIN_BAND, 1 - clamp].
pub fn search_rho(r: f64, valid: impl Fn(f64) -> bool) -> Option<f64> {
    search_band(r, 1.0 - ENDPOINT_CLAMP, valid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids_shape() {
        let t = default_t_grid();
        assert_eq!(t.len(), 40);
        assert!((t[0] - 1e-2).abs() < 1e-15 && (t[39] - 1e2).abs() < 1e-10);
        let r = default_r_grid();
        assert_eq!(r.len(), 19);
        assert!((r[0] - 0.05).abs() < 1e-15 && (r[18] - 0.95).abs() < 1e-12);
    }

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid_spec("0.5, 1/4").unwrap(), vec![0.5, 0.25]);
        assert_eq!(parse_grid_spec("lin:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid_spec("log:1:100:3").unwrap().len(), 3);
        assert!(parse_grid_spec("log:0:1:3").is_err());
        assert!(parse_grid_spec("a,b").is_err());
    }

    #[test]
    fn band_is_open() {
        let s = band_samples(0.5, 2.0 / 3.0, 1e-3);
        assert!(s.iter().all(|&v| v > 0.5 && v < 2.0 / 3.0));
        assert!(s.iter().any(|&v| v - 0.5 < 1e-12));
        assert!(band_samples(0.5, 0.5, 1e-3).is_empty());
    }

    #[test]
    fn search_finds_threshold() {
        let rho = search_rho(0.2, |p| p <= 0.5).unwrap();
        assert!((rho - 0.5).abs() < 1e-9);
        assert_eq!(search_rho(0.2, |_| true), Some(1.0 - ENDPOINT_CLAMP));
        assert_eq!(search_rho(0.2, |_| false), None);
    }
}
