//! Benchmark run: build, serialize, execute every generated query through
//! both the engine and the exact oracle, and summarize the error metrics.
//!
//! The machine-readable report is line-delimited tab-separated `key=value`
//! records. Latencies stay out of it so reruns with the same seed produce
//! byte-identical files; the plain-text table carries the timing columns.

use anyhow::Result;
use pwh_core::construct::build_pairwise_hist;
use pwh_core::query::{execute, parse_query, ExecOptions};
use pwh_core::storage::serialize;
use pwh_core::{Aggregation, EncodedTable, Estimate, Params, Synopsis};
use std::fmt::Write as _;
use std::time::Instant;

use crate::gen::{generate_queries, GenConfig};
use crate::oracle;

const EPS: f64 = 1e-12;

pub struct QueryOutcome {
    pub sql: String,
    pub aggregation: Aggregation,
    pub estimate: Option<Estimate>,
    pub exact: Option<f64>,
    /// |estimate - exact| / max(|exact|, 1e-12); needs both sides present.
    pub rel_error: Option<f64>,
    pub bound_correct: bool,
    /// (upper - lower) / max(|exact|, 1e-12), as a percentage.
    pub bound_width_pct: Option<f64>,
    pub parse_incl: f64,
    pub parse_excl: f64,
}

pub struct BenchReport {
    pub per_query: Vec<QueryOutcome>,
    pub synopsis_bytes: usize,
    pub build_seconds: f64,
}

fn median(sorted: &mut Vec<f64>) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(sorted[(sorted.len() - 1) / 2])
}

impl BenchReport {
    pub fn bound_correct_rate(&self) -> f64 {
        if self.per_query.is_empty() {
            return 1.0;
        }
        let ok = self.per_query.iter().filter(|q| q.bound_correct).count();
        ok as f64 / self.per_query.len() as f64
    }

    pub fn median_rel_error(&self, agg: Option<Aggregation>) -> Option<f64> {
        let mut errors: Vec<f64> = self
            .per_query
            .iter()
            .filter(|q| agg.is_none_or(|a| q.aggregation == a))
            .filter_map(|q| q.rel_error)
            .collect();
        median(&mut errors)
    }

    pub fn mean_rel_error(&self, agg: Option<Aggregation>) -> Option<f64> {
        let errors: Vec<f64> = self
            .per_query
            .iter()
            .filter(|q| agg.is_none_or(|a| q.aggregation == a))
            .filter_map(|q| q.rel_error)
            .collect();
        if errors.is_empty() {
            None
        } else {
            Some(errors.iter().sum::<f64>() / errors.len() as f64)
        }
    }

    pub fn median_bound_width_pct(&self) -> Option<f64> {
        let mut widths: Vec<f64> = self
            .per_query
            .iter()
            .filter_map(|q| q.bound_width_pct)
            .collect();
        median(&mut widths)
    }

    pub fn median_latency(&self, parse_inclusive: bool) -> Option<f64> {
        let mut lat: Vec<f64> = self
            .per_query
            .iter()
            .map(|q| if parse_inclusive { q.parse_incl } else { q.parse_excl })
            .collect();
        median(&mut lat)
    }

    fn aggregates_present(&self) -> Vec<Aggregation> {
        let mut seen = Vec::new();
        for q in &self.per_query {
            if !seen.contains(&q.aggregation) {
                seen.push(q.aggregation);
            }
        }
        seen
    }

    /// The deterministic record file: per-query lines, then summary lines.
    pub fn records(&self) -> String {
        fn opt(x: Option<f64>) -> String {
            x.map_or_else(|| "none".to_string(), |v| v.to_string())
        }
        let mut out = String::new();
        for q in &self.per_query {
            let _ = writeln!(
                out,
                "query={}\testimate={}\tlower={}\tupper={}\texact={}\trel_error={}\tbound_correct={}",
                q.sql,
                opt(q.estimate.map(|e| e.value)),
                opt(q.estimate.map(|e| e.lower)),
                opt(q.estimate.map(|e| e.upper)),
                opt(q.exact),
                opt(q.rel_error),
                q.bound_correct,
            );
        }
        for agg in self.aggregates_present() {
            let n = self
                .per_query
                .iter()
                .filter(|q| q.aggregation == agg)
                .count();
            let _ = writeln!(
                out,
                "summary\taggregate={}\tqueries={}\tmedian_rel_error={}\tmean_rel_error={}",
                agg.name().to_lowercase(),
                n,
                opt(self.median_rel_error(Some(agg))),
                opt(self.mean_rel_error(Some(agg))),
            );
        }
        let _ = writeln!(
            out,
            "summary\tqueries={}\tbound_correct_rate={}\tmedian_bound_width_pct={}\tsynopsis_bytes={}",
            self.per_query.len(),
            self.bound_correct_rate(),
            opt(self.median_bound_width_pct()),
            self.synopsis_bytes,
        );
        out
    }

    /// The human-readable table, timing columns included.
    pub fn table(&self) -> String {
        fn opt(x: Option<f64>, width: usize) -> String {
            match x {
                Some(v) => format!("{v:>width$.4}"),
                None => format!("{:>width$}", "-"),
            }
        }
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<52} {:>12} {:>12} {:>8} {:>6} {:>9} {:>9}",
            "query", "estimate", "exact", "err%", "ok", "lat(us)", "exec(us)"
        );
        for q in &self.per_query {
            let sql = if q.sql.len() > 50 {
                format!("{}..", &q.sql[..48])
            } else {
                q.sql.clone()
            };
            let _ = writeln!(
                out,
                "{:<52} {} {} {} {:>6} {:>9.1} {:>9.1}",
                sql,
                opt(q.estimate.map(|e| e.value), 12),
                opt(q.exact, 12),
                opt(q.rel_error.map(|e| e * 100.0), 8),
                if q.bound_correct { "yes" } else { "NO" },
                q.parse_incl * 1e6,
                q.parse_excl * 1e6,
            );
        }
        let _ = writeln!(out);
        for agg in self.aggregates_present() {
            let _ = writeln!(
                out,
                "{:<8} median rel err {}  mean rel err {}",
                agg.name(),
                opt(self.median_rel_error(Some(agg)), 9),
                opt(self.mean_rel_error(Some(agg)), 9),
            );
        }
        let _ = writeln!(
            out,
            "bounds correct {:.1}%  median width {}% of exact",
            self.bound_correct_rate() * 100.0,
            opt(self.median_bound_width_pct(), 9).trim_start(),
        );
        let _ = writeln!(
            out,
            "median latency {:.1}us parse-inclusive, {:.1}us parse-exclusive",
            self.median_latency(true).unwrap_or(0.0) * 1e6,
            self.median_latency(false).unwrap_or(0.0) * 1e6,
        );
        let _ = writeln!(
            out,
            "synopsis {} bytes, built in {:.2}s",
            self.synopsis_bytes, self.build_seconds
        );
        out
    }
}

fn outcome(
    syn: &Synopsis,
    table: &EncodedTable,
    sql: &str,
    expected: Option<&pwh_core::QueryPlan>,
    opts: &ExecOptions,
) -> Result<QueryOutcome> {
    let t0 = Instant::now();
    let plan = parse_query(sql, syn)?;
    if let Some(expected) = expected {
        debug_assert_eq!(&plan, expected, "generated text and plan diverged");
    }
    let t1 = Instant::now();
    let result = execute(syn, &plan, opts)?;
    let t2 = Instant::now();
    let estimate = result.scalar;
    let exact = oracle::exact_scalar(table, &plan);
    let (rel_error, bound_correct, bound_width_pct) = match (estimate, exact) {
        (Some(e), Some(x)) => {
            let denom = x.abs().max(EPS);
            (
                Some((e.value - x).abs() / denom),
                e.lower <= x && x <= e.upper,
                Some((e.upper - e.lower) / denom * 100.0),
            )
        }
        // Both sides agree the selection is empty.
        (None, None) => (None, true, None),
        _ => (None, false, None),
    };
    Ok(QueryOutcome {
        sql: sql.to_string(),
        aggregation: plan.aggregation,
        estimate,
        exact,
        rel_error,
        bound_correct,
        bound_width_pct,
        parse_incl: (t2 - t0).as_secs_f64(),
        parse_excl: (t2 - t1).as_secs_f64(),
    })
}

pub fn run_benchmark(
    table: &EncodedTable,
    params: &Params,
    build_seed: u64,
    gen: &GenConfig,
) -> Result<BenchReport> {
    let t0 = Instant::now();
    let syn = build_pairwise_hist(table, params, None, build_seed)?;
    let build_seconds = t0.elapsed().as_secs_f64();
    let synopsis_bytes = serialize(&syn)?.len();

    let queries = generate_queries(table, gen)?;
    let opts = ExecOptions::default();
    let mut per_query = Vec::with_capacity(queries.len());
    for q in &queries {
        per_query.push(outcome(&syn, table, &q.sql, Some(&q.plan), &opts)?);
    }
    Ok(BenchReport {
        per_query,
        synopsis_bytes,
        build_seconds,
    })
}
