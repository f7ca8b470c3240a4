//! Aggregate estimators over the weight tracks.
//!
//! Every estimator consumes the three weight vectors and the anchor column's
//! bin metadata, produces an estimate in the encoded domain, and decodes it
//! to raw units at the end. Bounds come from evaluating the same functional
//! at the extreme weights and the extreme per-bin representatives.

use crate::chi2::terrell_scott_subbins;
use crate::model::{
    Aggregation, AggregationWork, BinMeta, ColumnSpec, Estimate, Result, Synopsis,
    WeightingsVector,
};

pub(super) fn estimate(
    syn: &Synopsis,
    agg: Aggregation,
    anchor: usize,
    wv: &WeightingsVector,
    single_column: bool,
) -> Result<Option<Estimate>> {
    let rho = syn.params.rho;
    if agg == Aggregation::Count {
        return Ok(Some(count(wv, rho)));
    }
    // Value aggregates over an empty selection are NULL.
    if wv.total() == 0.0 {
        return Ok(None);
    }
    let spec = &syn.columns[anchor];
    let bins = &syn.hists_1d[anchor].bins;
    let mut work = AggregationWork::default();
    let est = match agg {
        Aggregation::Count => unreachable!(),
        Aggregation::Sum => sum(wv, bins, spec, rho),
        Aggregation::Avg => avg(wv, bins, spec),
        Aggregation::Var => var(wv, bins, spec, &mut work),
        Aggregation::Min => extremum(syn, anchor, wv, single_column, false, &mut work)?,
        Aggregation::Max => extremum(syn, anchor, wv, single_column, true, &mut work)?,
        Aggregation::Median => median(wv, bins, spec, &mut work),
    };
    Ok(Some(est))
}

fn count(wv: &WeightingsVector, rho: f64) -> Estimate {
    let lo: f64 = wv.w_lo.iter().sum();
    let hi: f64 = wv.w_hi.iter().sum();
    Estimate::new(wv.total() / rho, lo / rho, hi / rho)
}

fn sum(wv: &WeightingsVector, bins: &[BinMeta], spec: &ColumnSpec, rho: f64) -> Estimate {
    let scale = spec.scale as f64;
    let offset = spec.offset as f64;
    let mut value = 0.0;
    let mut lower = 0.0;
    let mut upper = 0.0;
    for (t, b) in bins.iter().enumerate() {
        value += wv.w[t] * (b.c + offset);
        // A negative representative flips which weight extreme is extreme.
        let y_lo = b.c_lo + offset;
        let y_hi = b.c_hi + offset;
        lower += if y_lo >= 0.0 {
            wv.w_lo[t] * y_lo
        } else {
            wv.w_hi[t] * y_lo
        };
        upper += if y_hi >= 0.0 {
            wv.w_hi[t] * y_hi
        } else {
            wv.w_lo[t] * y_hi
        };
    }
    let denom = rho * scale;
    Estimate::new(value / denom, lower / denom, upper / denom)
}

fn avg(wv: &WeightingsVector, bins: &[BinMeta], spec: &ColumnSpec) -> Estimate {
    let total = wv.total();
    let dot = |w: &[f64], f: &dyn Fn(&BinMeta) -> f64| -> f64 {
        w.iter().zip(bins).map(|(w, b)| w * f(b)).sum()
    };
    let mean = dot(&wv.w, &|b| b.c) / total;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for w in [&wv.w_lo, &wv.w_hi] {
        let norm: f64 = w.iter().sum();
        if norm == 0.0 {
            continue;
        }
        lo = lo.min(dot(w, &|b| b.c_lo) / norm);
        hi = hi.max(dot(w, &|b| b.c_hi) / norm);
    }
    if !lo.is_finite() {
        lo = mean;
        hi = mean;
    }
    Estimate::new(
        spec.decode_numeric(mean),
        spec.decode_numeric(lo),
        spec.decode_numeric(hi),
    )
}

fn var(
    wv: &WeightingsVector,
    bins: &[BinMeta],
    spec: &ColumnSpec,
    work: &mut AggregationWork,
) -> Estimate {
    let total = wv.total();
    let scale2 = (spec.scale as f64) * (spec.scale as f64);
    let mean = wv
        .w
        .iter()
        .zip(bins)
        .map(|(w, b)| w * b.c)
        .sum::<f64>()
        / total;
    let second = wv
        .w
        .iter()
        .zip(bins)
        .map(|(w, b)| w * b.c * b.c)
        .sum::<f64>()
        / total;
    let value = (second - mean * mean).max(0.0) / scale2;

    // Per-bin representatives: nearest to the mean for the smallest spread,
    // the farther bin end for the largest.
    work.xi_lo = bins
        .iter()
        .map(|b| mean.clamp(b.v_min as f64, b.v_max as f64))
        .collect();
    work.xi_hi = bins
        .iter()
        .map(|b| {
            let (lo, hi) = (b.v_min as f64, b.v_max as f64);
            if (mean - lo).abs() >= (hi - mean).abs() {
                lo
            } else {
                hi
            }
        })
        .collect();

    let var_with = |xi: &[f64], w: &[f64]| -> Option<f64> {
        let norm: f64 = w.iter().sum();
        if norm == 0.0 {
            return None;
        }
        let m1: f64 = w.iter().zip(xi).map(|(w, x)| w * x).sum::<f64>() / norm;
        let m2: f64 = w.iter().zip(xi).map(|(w, x)| w * x * x).sum::<f64>() / norm;
        Some(m2 - m1 * m1)
    };
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for w in [&wv.w_lo, &wv.w_hi] {
        if let Some(v) = var_with(&work.xi_lo, w) {
            lower = lower.min(v);
        }
        if let Some(v) = var_with(&work.xi_hi, w) {
            upper = upper.max(v);
        }
    }
    if !lower.is_finite() {
        lower = value * scale2;
        upper = value * scale2;
    }
    Estimate::new(value, lower.max(0.0) / scale2, upper / scale2)
}

fn extremum(
    syn: &Synopsis,
    anchor: usize,
    wv: &WeightingsVector,
    single_column: bool,
    maximize: bool,
    work: &mut AggregationWork,
) -> Result<Estimate> {
    let bins = &syn.hists_1d[anchor].bins;
    let spec = &syn.columns[anchor];
    let min_points = u64::from(syn.params.min_points);
    let k = bins.len();
    let scan = |w: &[f64], threshold: f64| -> Option<usize> {
        if maximize {
            (0..k).rev().find(|&t| w[t] > threshold)
        } else {
            (0..k).find(|&t| w[t] > threshold)
        }
    };
    // The bin edge an extremum naturally sits at, and the opposite one.
    let near = |b: &BinMeta| if maximize { b.v_max } else { b.v_min };
    let far = |b: &BinMeta| if maximize { b.v_min } else { b.v_max };

    let t0 = scan(&wv.w, 0.0).expect("nonzero selection");
    work.t_star = Some(t0);
    let b0 = &bins[t0];
    let value = if single_column && b0.unique == 2 && wv.w[t0] < b0.count as f64 / 2.0 {
        far(b0)
    } else {
        near(b0)
    } as f64;

    // Outward bound: the first bin the upper weights allow.
    let to = scan(&wv.w_hi, 0.0).unwrap_or(t0);
    let bo = &bins[to];
    let outward = if single_column && bo.unique == 2 && wv.w_hi[to] < bo.count as f64 / 5.0 {
        far(bo)
    } else {
        near(bo)
    } as f64;

    // Inward bound: the first bin certain to hold a satisfying tuple.
    let inward = match scan(&wv.w_lo, 0.5) {
        Some(ti) => {
            let bi = &bins[ti];
            if single_column && bi.unique > 2 && bi.count > min_points {
                let s = terrell_scott_subbins(u64::from(bi.unique))?;
                let delta = (bi.v_max - bi.v_min) as f64 / f64::from(s);
                let a = ((f64::from(s) * wv.w_lo[ti] / bi.count as f64).floor())
                    .min(f64::from(s));
                work.s = s;
                work.delta = delta;
                work.a = a as u32;
                if maximize {
                    bi.v_min as f64 + a * delta
                } else {
                    bi.v_max as f64 - a * delta
                }
            } else {
                far(bi) as f64
            }
        }
        // Nothing is certain: fall back to the far end of the column.
        None => {
            let occupied = bins.iter().filter(|b| b.count > 0);
            if maximize {
                occupied.map(|b| b.v_min).min().unwrap_or(b0.v_min) as f64
            } else {
                occupied.map(|b| b.v_max).max().unwrap_or(b0.v_max) as f64
            }
        }
    };

    let (lower, upper) = if maximize {
        (inward, outward)
    } else {
        (outward, inward)
    };
    Ok(Estimate::new(
        spec.decode_numeric(value),
        spec.decode_numeric(lower),
        spec.decode_numeric(upper),
    ))
}

/// First bin where the running total reaches half the weight, and the
/// position of that half-point inside the bin.
fn median_bin(w: &[f64]) -> Option<(usize, f64)> {
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return None;
    }
    let half = total / 2.0;
    let mut cum = 0.0;
    for (t, &x) in w.iter().enumerate() {
        if x > 0.0 && cum + x >= half {
            return Some((t, (half - cum) / x));
        }
        cum += x;
    }
    Some((w.len() - 1, 1.0))
}

fn median(
    wv: &WeightingsVector,
    bins: &[BinMeta],
    spec: &ColumnSpec,
    work: &mut AggregationWork,
) -> Estimate {
    let (t0, f) = median_bin(&wv.w).expect("nonzero selection");
    work.t_star = Some(t0);
    work.f_key = Some(f);
    let b0 = &bins[t0];
    work.big_delta = (b0.v_max - b0.v_min) as f64;
    let value = if b0.unique == 2 {
        if f < 0.5 {
            b0.v_min as f64
        } else {
            b0.v_max as f64
        }
    } else {
        b0.v_min as f64 + work.big_delta * f
    };

    // The half-point may land in a different bin at the weight extremes.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for w in [&wv.w, &wv.w_lo, &wv.w_hi] {
        if let Some((t, _)) = median_bin(w) {
            lo = lo.min(bins[t].v_min as f64);
            hi = hi.max(bins[t].v_max as f64);
        }
    }
    Estimate::new(
        spec.decode_numeric(value),
        spec.decode_numeric(lo),
        spec.decode_numeric(hi),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_pairwise_hist;
    use crate::model::{AqpResult, ColumnKind, EncodedTable, Params};
    use crate::query::{execute, parse_query, ExecOptions};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        syn: Synopsis,
        raw: Vec<(f64, f64)>,
    }

    /// `amount` is decimal with scale 10 and a negative minimum; `size` is a
    /// plain integer. 12000 rows, full-scan synopsis.
    fn fixture() -> Fixture {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let raw: Vec<(f64, f64)> = (0..12_000)
            .map(|_| {
                let amount = (rng.gen_range(-500..=1500i64) as f64) / 10.0;
                let size = rng.gen_range(0..2000i64) as f64;
                (amount, size)
            })
            .collect();
        let amount_spec = ColumnSpec {
            column_id: 0,
            name: "amount".into(),
            kind: ColumnKind::Decimal,
            offset: -500,
            scale: 10,
            category_ranks: vec![],
            null_code: None,
            byte_depth: 2,
        };
        let size_spec = ColumnSpec {
            column_id: 1,
            name: "size".into(),
            kind: ColumnKind::Integer,
            offset: 0,
            scale: 1,
            category_ranks: vec![],
            null_code: None,
            byte_depth: 2,
        };
        let columns = vec![
            raw.iter()
                .map(|r| ((r.0 * 10.0).round() as i64 + 500) as u64)
                .collect(),
            raw.iter().map(|r| r.1 as u64).collect(),
        ];
        let table = EncodedTable {
            specs: vec![amount_spec, size_spec],
            columns,
        };
        let params = Params::new(12_000, 12_000, 120, 0.001, 2).unwrap();
        let syn = build_pairwise_hist(&table, &params, None, 7).unwrap();
        Fixture { syn, raw }
    }

    fn run(f: &Fixture, sql: &str) -> Option<Estimate> {
        let plan = parse_query(sql, &f.syn).unwrap();
        match execute(&f.syn, &plan, &ExecOptions::default()).unwrap() {
            AqpResult {
                scalar, groups: None,
            } => scalar,
            _ => panic!("expected a scalar result"),
        }
    }

    #[test]
    fn count_tracks_the_exact_answer_with_bracketing_bounds() {
        let f = fixture();
        let est = run(&f, "SELECT COUNT(*) FROM t WHERE amount > 50.7").unwrap();
        let exact = f.raw.iter().filter(|r| r.0 > 50.7).count() as f64;
        assert!((est.value - exact).abs() / exact < 0.05, "{} vs {exact}", est.value);
        assert!(est.lower <= exact && exact <= est.upper);
    }

    #[test]
    fn count_of_an_empty_selection_is_zero_not_null() {
        let f = fixture();
        let est = run(&f, "SELECT COUNT(*) FROM t WHERE amount > 99999").unwrap();
        assert_abs_diff_eq!(est.value, 0.0);
        assert_abs_diff_eq!(est.lower, 0.0);
    }

    #[test]
    fn value_aggregates_of_an_empty_selection_are_null() {
        let f = fixture();
        for agg in ["SUM", "AVG", "MIN", "MAX", "MEDIAN", "VAR"] {
            let est = run(&f, &format!("SELECT {agg}(amount) FROM t WHERE amount > 99999"));
            assert!(est.is_none(), "{agg}");
        }
    }

    #[test]
    fn sum_handles_negative_values_with_correct_bounds() {
        let f = fixture();
        let est = run(&f, "SELECT SUM(amount) FROM t WHERE size < 1000").unwrap();
        let exact: f64 = f.raw.iter().filter(|r| r.1 < 1000.0).map(|r| r.0).sum();
        assert!(
            (est.value - exact).abs() / exact.abs().max(1.0) < 0.1,
            "{} vs {exact}",
            est.value
        );
        assert!(est.lower <= exact && exact <= est.upper, "{est:?} vs {exact}");
    }

    #[test]
    fn avg_lands_near_the_true_mean() {
        let f = fixture();
        let est = run(&f, "SELECT AVG(amount) FROM t WHERE size >= 500").unwrap();
        let sel: Vec<f64> = f.raw.iter().filter(|r| r.1 >= 500.0).map(|r| r.0).collect();
        let exact = sel.iter().sum::<f64>() / sel.len() as f64;
        assert!((est.value - exact).abs() < 5.0, "{} vs {exact}", est.value);
        assert!(est.lower <= exact && exact <= est.upper);
    }

    #[test]
    fn min_and_max_respect_a_range_predicate() {
        let f = fixture();
        let est = run(&f, "SELECT MIN(amount) FROM t WHERE amount >= 20.5").unwrap();
        let exact = f
            .raw
            .iter()
            .map(|r| r.0)
            .filter(|&a| a >= 20.5)
            .fold(f64::INFINITY, f64::min);
        assert!((est.value - exact).abs() < 5.0, "{} vs {exact}", est.value);
        assert!(est.lower <= exact + 1e-9 && exact <= est.upper + 1e-9);

        let est = run(&f, "SELECT MAX(amount) FROM t WHERE amount < 100").unwrap();
        let exact = f
            .raw
            .iter()
            .map(|r| r.0)
            .filter(|&a| a < 100.0)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((est.value - exact).abs() < 5.0, "{} vs {exact}", est.value);
    }

    #[test]
    fn median_of_a_uniform_selection_sits_at_the_middle() {
        let f = fixture();
        let est = run(&f, "SELECT MEDIAN(size) FROM t").unwrap();
        let mut sorted: Vec<f64> = f.raw.iter().map(|r| r.1).collect();
        sorted.sort_by(f64::total_cmp);
        let exact = sorted[(sorted.len() - 1) / 2];
        assert!((est.value - exact).abs() < 60.0, "{} vs {exact}", est.value);
        assert!(est.lower <= exact && exact <= est.upper);
    }

    #[test]
    fn var_of_a_uniform_selection_matches_the_population_variance() {
        let f = fixture();
        let est = run(&f, "SELECT VAR(size) FROM t").unwrap();
        let vals: Vec<f64> = f.raw.iter().map(|r| r.1).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let exact = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        assert!(
            (est.value - exact).abs() / exact < 0.1,
            "{} vs {exact}",
            est.value
        );
        assert!(est.lower <= exact && exact <= est.upper);
    }

    #[test]
    fn scaled_decimal_columns_decode_back_to_raw_units() {
        let f = fixture();
        let est = run(&f, "SELECT MAX(amount) FROM t").unwrap();
        assert!((est.value - 150.0).abs() < 1.0, "{}", est.value);
        let est = run(&f, "SELECT MIN(amount) FROM t").unwrap();
        assert!((est.value + 50.0).abs() < 1.0, "{}", est.value);
    }

    #[test]
    fn count_scales_by_the_sampling_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let x: Vec<u64> = (0..10_000).map(|_| rng.gen_range(0..100u64)).collect();
        let spec = ColumnSpec {
            column_id: 0,
            name: "x".into(),
            kind: ColumnKind::Integer,
            offset: 0,
            scale: 1,
            category_ranks: vec![],
            null_code: None,
            byte_depth: 1,
        };
        let table = EncodedTable {
            specs: vec![spec],
            columns: vec![x],
        };
        let params = Params::new(10_000, 1000, 50, 0.001, 1).unwrap();
        let syn = build_pairwise_hist(&table, &params, None, 2).unwrap();
        let plan = parse_query("SELECT COUNT(*) FROM t", &syn).unwrap();
        let est = execute(&syn, &plan, &ExecOptions::default())
            .unwrap()
            .scalar
            .unwrap();
        // One tenth of the rows were sampled, so the estimate scales back up.
        assert_abs_diff_eq!(est.value, 10_000.0, epsilon = 1e-6);
    }
}
