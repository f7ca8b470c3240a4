//! Chi-squared uniformity testing and the Terrell-Scott sub-bin rule.
//!
//! Bins are tested for uniformity by slicing them into `s` equal-width
//! sub-bins, where `s = ceil((2u)^(1/3))` for `u` distinct values, and
//! comparing the occupancy statistic against the upper critical value of the
//! chi-squared distribution with `s - 1` degrees of freedom. Critical values
//! are obtained by inverting the regularized incomplete gamma function and
//! memoized, since construction asks for the same handful of quantiles
//! thousands of times.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use statrs::function::gamma::gamma_lr;

use crate::model::{PwhError, Result};

/// Sub-bin count for a bin with `u` distinct values: the smallest integer
/// `s` with `s^3 >= 2u`.
pub fn terrell_scott_subbins(u: u64) -> Result<u32> {
    if u < 2 {
        return Err(PwhError::Invalid("uniformity test undefined".into()));
    }
    let target = 2 * u as u128;
    let mut s = (2.0 * u as f64).cbrt().round().max(2.0) as u128;
    while s.pow(3) < target {
        s += 1;
    }
    while s > 2 && (s - 1).pow(3) >= target {
        s -= 1;
    }
    Ok(s as u32)
}

fn chi_squared_cdf(dof: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_lr(f64::from(dof) / 2.0, x / 2.0)
}

/// Upper critical value: the (1 - alpha) quantile of the chi-squared
/// distribution with `s - 1` degrees of freedom, found by bisection on the
/// CDF to an absolute tolerance of 1e-9.
pub fn chi_squared_critical(s: u32, alpha: f64) -> f64 {
    debug_assert!(s >= 2, "need at least two sub-bins");
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    static CACHE: OnceLock<Mutex<HashMap<(u32, u64), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (s, alpha.to_bits());
    if let Some(&v) = cache.lock().unwrap().get(&key) {
        return v;
    }

    let dof = s - 1;
    let target = 1.0 - alpha;
    let mut lo = 0.0_f64;
    let mut hi = f64::from(dof) + 10.0 * (2.0 * f64::from(dof)).sqrt() + 50.0;
    while chi_squared_cdf(dof, hi) < target {
        hi *= 2.0;
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if chi_squared_cdf(dof, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crit = 0.5 * (lo + hi);
    cache.lock().unwrap().insert(key, crit);
    crit
}

/// Sub-bin index of `x` within `[e_l, e_r)` sliced into `s` equal widths,
/// computed in integer arithmetic; the last sub-bin is closed above so the
/// final (closed) bin of a histogram tests cleanly.
fn subbin_of(x: u64, e_l: u64, e_r: u64, s: u32) -> usize {
    let idx = ((x - e_l) as u128 * s as u128) / (e_r - e_l) as u128;
    (idx as usize).min(s as usize - 1)
}

/// Occupancy counts of `s` equal-width sub-bins over `[e_l, e_r)`.
pub fn subbin_counts(values: &[u64], e_l: u64, e_r: u64, s: u32) -> Vec<u64> {
    let mut counts = vec![0u64; s as usize];
    for &x in values {
        counts[subbin_of(x, e_l, e_r, s)] += 1;
    }
    counts
}

/// The goodness-of-fit statistic `sum((observed - h/s)^2 / (h/s))`.
pub fn chi_squared_statistic(counts: &[u64]) -> f64 {
    let h: u64 = counts.iter().sum();
    if h == 0 {
        return 0.0;
    }
    let expected = h as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Tests whether the values in `[e_l, e_r)` are plausibly uniform: slices the
/// interval into `s = terrell_scott_subbins(u)` sub-bins and accepts when the
/// occupancy statistic stays at or below the critical value.
pub fn is_uniform(values: &[u64], e_l: u64, e_r: u64, u: u64, alpha: f64) -> Result<bool> {
    if e_l >= e_r {
        return Err(PwhError::Invalid("degenerate bin".into()));
    }
    let s = terrell_scott_subbins(u)?;
    if values.is_empty() {
        return Ok(true);
    }
    let stat = chi_squared_statistic(&subbin_counts(values, e_l, e_r, s));
    Ok(stat <= chi_squared_critical(s, alpha))
}
