//! `pwh`: build, query, benchmark, and inspect PairwiseHist synopses.
//!
//! Exit codes: 0 on success, 2 when a query is malformed or references an
//! unknown column, 3 on I/O and data errors.

use anyhow::{bail, Context, Result};
use pwh_cli::{bench, gen, ingest, store};
use clap::{Parser, Subcommand};
use pwh_core::query::{execute, parse_query, ExecOptions};
use pwh_core::storage::{serialize_with_layout, size_bound};
use pwh_core::{Aggregation, Estimate, Params, PwhError};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "pwh", version, about = "Approximate query processing over pairwise histogram synopses")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ingest a CSV file and write a synopsis (plus its schema sidecar).
    Build {
        csv: PathBuf,
        /// Output synopsis path.
        #[arg(short, long)]
        output: PathBuf,
        /// Rows to sample during construction (default: every row).
        #[arg(long)]
        samples: Option<u64>,
        /// Minimum bin population considered for splitting (default: 1% of samples).
        #[arg(long)]
        min_points: Option<u32>,
        /// Significance level of the uniformity test.
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
        /// Sampling seed.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Estimate one SQL query against a synopsis.
    Query {
        synopsis: PathBuf,
        sql: String,
        /// Also print the deterministic lower and upper bounds.
        #[arg(long)]
        bounds: bool,
    },
    /// Generate seeded queries over a CSV and compare estimates with an
    /// exact full scan.
    Bench {
        csv: PathBuf,
        /// Number of queries to generate.
        #[arg(long, default_value_t = 100)]
        queries: usize,
        /// Generation and sampling seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Reject generated queries selecting less than this fraction of rows.
        #[arg(long, default_value_t = 1e-6)]
        min_selectivity: f64,
        /// Write the machine-readable record file here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Comma-separated aggregates to draw from.
        #[arg(long, default_value = "count,sum,avg")]
        aggregates: String,
        /// Most conditions per WHERE clause.
        #[arg(long, default_value_t = 5)]
        max_conditions: usize,
        /// Rows to sample during construction (default: every row).
        #[arg(long)]
        samples: Option<u64>,
        /// Minimum bin population considered for splitting (default: 1% of samples).
        #[arg(long)]
        min_points: Option<u32>,
        /// Significance level of the uniformity test.
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
    },
    /// Print the parameters, per-column bin counts, and section sizes of a
    /// synopsis file.
    Inspect { synopsis: PathBuf },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.cmd) {
        eprintln!("error: {e:#}");
        let code = e
            .chain()
            .find_map(|c| c.downcast_ref::<PwhError>())
            .map_or(3, |p| match p {
                PwhError::QueryShape(_) | PwhError::UnknownColumn(_) => 2,
                _ => 3,
            });
        std::process::exit(code);
    }
}

fn derive_params(
    n_rows: u64,
    n_columns: usize,
    samples: Option<u64>,
    min_points: Option<u32>,
    alpha: f64,
) -> Result<Params> {
    let n_sample = samples.unwrap_or(n_rows).min(n_rows).max(1);
    let m = min_points.unwrap_or_else(|| (n_sample / 100).max(1).min(u64::from(u32::MAX)) as u32);
    Ok(Params::new(n_rows, n_sample, m, alpha, n_columns)?)
}

fn parse_aggregates(text: &str) -> Result<Vec<Aggregation>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.to_ascii_lowercase().as_str() {
            "count" => Ok(Aggregation::Count),
            "sum" => Ok(Aggregation::Sum),
            "avg" => Ok(Aggregation::Avg),
            "min" => Ok(Aggregation::Min),
            "max" => Ok(Aggregation::Max),
            "median" => Ok(Aggregation::Median),
            "var" => Ok(Aggregation::Var),
            other => bail!("unknown aggregate {other:?}"),
        })
        .collect()
}

fn print_estimate(est: &Option<Estimate>, bounds: bool) {
    match est {
        None => println!("none"),
        Some(e) if bounds => println!("{}\t{}\t{}", e.value, e.lower, e.upper),
        Some(e) => println!("{}", e.value),
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Build {
            csv,
            output,
            samples,
            min_points,
            alpha,
            seed,
        } => {
            let table = ingest::ingest(&csv)?;
            let params = derive_params(
                table.n_rows() as u64,
                table.n_columns(),
                samples,
                min_points,
                alpha,
            )?;
            let t0 = Instant::now();
            let syn = pwh_core::construct::build_pairwise_hist(&table, &params, None, seed)?;
            let built = t0.elapsed().as_secs_f64();
            store::save(&output, &syn)?;
            let bytes = std::fs::metadata(&output)?.len();
            println!(
                "{} rows, {} columns -> {} ({} bytes) in {:.2}s",
                params.n_rows,
                table.n_columns(),
                output.display(),
                bytes,
                built
            );
            Ok(())
        }
        Cmd::Query {
            synopsis,
            sql,
            bounds,
        } => {
            let syn = store::load(&synopsis)?;
            let plan = parse_query(&sql, &syn)?;
            let result = execute(&syn, &plan, &ExecOptions::default())?;
            match result.groups {
                Some(groups) => {
                    for (label, est) in groups {
                        print!("{label}\t");
                        print_estimate(&est, bounds);
                    }
                }
                None => print_estimate(&result.scalar, bounds),
            }
            Ok(())
        }
        Cmd::Bench {
            csv,
            queries,
            seed,
            min_selectivity,
            report,
            aggregates,
            max_conditions,
            samples,
            min_points,
            alpha,
        } => {
            let table = ingest::ingest(&csv)?;
            let params = derive_params(
                table.n_rows() as u64,
                table.n_columns(),
                samples,
                min_points,
                alpha,
            )?;
            let gen = gen::GenConfig {
                count: queries,
                seed,
                min_selectivity,
                aggregates: parse_aggregates(&aggregates)?,
                max_conditions,
            };
            let result = bench::run_benchmark(&table, &params, seed, &gen)?;
            print!("{}", result.table());
            if let Some(path) = report {
                std::fs::write(&path, result.records())
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("report -> {}", path.display());
            }
            Ok(())
        }
        Cmd::Inspect { synopsis } => {
            let syn = store::load(&synopsis)?;
            let (bytes, layout) = serialize_with_layout(&syn)?;
            let p = &syn.params;
            println!(
                "rows {}  samples {}  min-points {}  alpha {}  columns {}",
                p.n_rows, p.n_sample, p.min_points, p.alpha, syn.n_columns()
            );
            for (i, spec) in syn.columns.iter().enumerate() {
                println!(
                    "column {}: kind {:?}, {} bins, byte depth {}, structure {}B, counts {}B",
                    spec.name,
                    spec.kind,
                    syn.hists_1d[i].k(),
                    spec.byte_depth,
                    layout.structure_1d[i],
                    layout.counts_1d[i],
                );
            }
            for (p_idx, h2) in syn.hists_2d.iter().enumerate() {
                println!(
                    "pair ({}, {}): {}x{} cells, structure {}B, counts {}B",
                    syn.columns[h2.col_row].name,
                    syn.columns[h2.col_col].name,
                    h2.k_rows(),
                    h2.k_cols(),
                    layout.structure_2d[p_idx],
                    layout.counts_2d[p_idx],
                );
            }
            println!("header {}B", layout.header);
            println!("total {} bytes (bound {})", bytes.len(), size_bound(&syn));
            Ok(())
        }
    }
}
