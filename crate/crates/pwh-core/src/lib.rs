//! PairwiseHist: histogram synopses for approximate query processing.
//!
//! The synopsis keeps one refined histogram per column and one per column
//! pair, each bin carrying its actual min/max, unique count, and count.
//! Construction drives bin refinement with a chi-squared uniformity test;
//! querying turns WHERE predicates into per-bin coverage fractions, maps
//! them onto the aggregation column through the pairwise histograms, and
//! returns estimates with deterministic lower/upper bounds for COUNT, SUM,
//! AVG, MIN, MAX, MEDIAN, and VAR.
//!
//! Modules:
//! - [`preprocess`]: reversible column encoding into non-negative integers
//! - [`construct`]: sampling, bin refinement, and centre-bound computation
//! - [`query`]: SQL subset parsing, coverage, weightings, aggregation
//! - [`storage`]: compact binary serialization with Rice-coded sparse counts
//!
//! The `parallel` feature (on by default) runs per-column and per-pair
//! construction work on rayon; disabling it yields a dependency-free
//! sequential build with identical output.

pub mod chi2;
pub mod construct;
pub mod model;
mod par;
pub mod preprocess;
pub mod query;
pub mod storage;

pub use model::{
    AqpResult, Aggregation, BinMeta, ColumnKind, ColumnSpec, Condition, CoverageVector,
    EncodedTable, Estimate, Histogram1D, Histogram2D, Literal, Params, PredNode, PwhError,
    QueryPlan, Result, Synopsis, WeightingsVector,
};
