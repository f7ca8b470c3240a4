//! Shared domain types: column encodings, histograms, query plans, results.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Error type shared by every stage of the engine.
#[derive(Debug, Error)]
pub enum PwhError {
    /// The query text is outside the supported SQL subset.
    #[error("unsupported query shape: {0}")]
    QueryShape(String),
    /// A query referenced a column that is not in the schema.
    #[error("unknown column: {0}")]
    UnknownColumn(String),
    /// Serialized synopsis bytes are malformed.
    #[error("synopsis format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// Contract violation: bad parameters or degenerate input.
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, PwhError>;

/// Standard-normal quantile bounding a two-sided 98% interval; used to widen
/// weighting bounds for finite-population sampling error.
pub const Z98: f64 = 2.326;

/// Construction parameters, carried with the synopsis and in its file header.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Rows in the full dataset.
    pub n_rows: u64,
    /// Rows sampled for construction.
    pub n_sample: u64,
    /// Minimum bin population for the uniformity test to consider a split.
    pub min_points: u32,
    /// Significance level of the uniformity test, in (0, 1).
    pub alpha: f64,
    /// Sampling ratio `n_sample / n_rows`.
    pub rho: f64,
    /// Column count.
    pub n_columns: usize,
}

impl Params {
    pub fn new(
        n_rows: u64,
        n_sample: u64,
        min_points: u32,
        alpha: f64,
        n_columns: usize,
    ) -> Result<Self> {
        if n_sample == 0 || n_sample > n_rows {
            return Err(PwhError::Invalid(format!(
                "sample size {n_sample} must be in 1..={n_rows}"
            )));
        }
        if min_points < 2 || u64::from(min_points) > n_sample {
            return Err(PwhError::Invalid(format!(
                "min points {min_points} must be in 2..={n_sample}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(PwhError::Invalid(format!(
                "significance level {alpha} must be in (0, 1)"
            )));
        }
        if n_columns == 0 {
            return Err(PwhError::Invalid("table has no columns".into()));
        }
        Ok(Params {
            n_rows,
            n_sample,
            min_points,
            alpha,
            rho: n_sample as f64 / n_rows as f64,
            n_columns,
        })
    }
}

/// Column data type after ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Integer,
    Decimal,
    Categorical,
    Datetime,
}

/// Reversible per-column transform into the non-negative integer domain.
///
/// Numeric cells map as `round(x * scale) - offset`, categorical cells map to
/// their frequency rank, datetimes to epoch seconds before the same offset
/// subtraction, and missing cells to `null_code`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub column_id: usize,
    pub name: String,
    pub kind: ColumnKind,
    /// Minimum pre-offset encoded value, subtracted so codes start at 0.
    pub offset: i64,
    /// Power-of-ten multiplier that makes decimal cells integral (1 otherwise).
    pub scale: i64,
    /// Labels ordered by code: most frequent first, ties lexicographic.
    /// Empty unless the column is categorical.
    pub category_ranks: Vec<String>,
    /// Code reserved for missing values, present iff any cell was missing.
    pub null_code: Option<u64>,
    /// Bytes per encoded value in the serialized synopsis: 1, 2, 4, or 8.
    pub byte_depth: u8,
}

impl ColumnSpec {
    /// Smallest spacing between representable encoded values.
    pub fn quantum(&self) -> f64 {
        1.0
    }

    /// Maps an encoded value back to raw numeric units.
    pub fn decode_numeric(&self, encoded: f64) -> f64 {
        (encoded + self.offset as f64) / self.scale as f64
    }

    /// Label behind an encoded categorical value, if any.
    pub fn label_of(&self, encoded: u64) -> Option<&str> {
        self.category_ranks.get(encoded as usize).map(|s| s.as_str())
    }

    pub fn is_numeric(&self) -> bool {
        matches!(
            self.kind,
            ColumnKind::Integer | ColumnKind::Decimal | ColumnKind::Datetime
        )
    }
}

/// Per-bin metadata. `v_min`/`v_max` are actual attained values (encoded),
/// not bin edges; `c` and the centre bounds are derived, never serialized.
#[derive(Debug, Clone, PartialEq)]
pub struct BinMeta {
    pub v_min: u64,
    pub v_max: u64,
    /// Distinct values in the bin.
    pub unique: u32,
    /// Tuples in the bin.
    pub count: u64,
    /// Midpoint (v_min + v_max) / 2.
    pub c: f64,
    /// Lower bound on the bin's weighted centre.
    pub c_lo: f64,
    /// Upper bound on the bin's weighted centre.
    pub c_hi: f64,
}

/// Exact midpoint of a non-empty bin.
pub fn derive_bin_midpoint(meta: &BinMeta) -> Result<f64> {
    if meta.count == 0 {
        return Err(PwhError::Invalid("empty bin has no midpoint".into()));
    }
    Ok((meta.v_min as f64 + meta.v_max as f64) / 2.0)
}

/// One column's histogram: `edges.len() - 1` bins, interval `[e_t, e_{t+1})`
/// with the final bin closed above.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    pub column: usize,
    /// Strictly increasing; `edges[0]` is always 0 in the encoded domain.
    pub edges: Vec<u64>,
    pub bins: Vec<BinMeta>,
}

impl Histogram1D {
    pub fn k(&self) -> usize {
        self.bins.len()
    }

    /// Total tuples, i.e. non-null sampled values for the column.
    pub fn total_count(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }
}

/// A column pair's histogram. Edges refine the two 1-d edge lists; counts are
/// row-major with `col_row` varying along rows. Per-dimension metadata carries
/// each refined bin's min/max/unique with the marginal count.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2D {
    pub col_row: usize,
    pub col_col: usize,
    pub edges_row: Vec<u64>,
    pub edges_col: Vec<u64>,
    /// Row-major `k_rows x k_cols` bin counts.
    pub counts: Vec<u64>,
    pub meta_row: Vec<BinMeta>,
    pub meta_col: Vec<BinMeta>,
}

impl Histogram2D {
    pub fn k_rows(&self) -> usize {
        self.edges_row.len() - 1
    }

    pub fn k_cols(&self) -> usize {
        self.edges_col.len() - 1
    }

    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.k_cols() + col]
    }

    pub fn row_marginal(&self, row: usize) -> u64 {
        let k = self.k_cols();
        self.counts[row * k..(row + 1) * k].iter().sum()
    }

    pub fn col_marginal(&self, col: usize) -> u64 {
        (0..self.k_rows()).map(|r| self.count(r, col)).sum()
    }
}

/// The complete synopsis: parameters, column specs, all 1-d histograms, and
/// one 2-d histogram per unordered column pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Synopsis {
    pub params: Params,
    pub columns: Vec<ColumnSpec>,
    pub hists_1d: Vec<Histogram1D>,
    /// Keyed by pair (i, j) with i < j, lexicographic.
    pub hists_2d: Vec<Histogram2D>,
}

impl Synopsis {
    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Index of the (i, j) pair histogram; arguments in either order.
    pub fn pair_index(&self, a: usize, b: usize) -> Option<usize> {
        let d = self.n_columns();
        if a == b || a >= d || b >= d {
            return None;
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        Some(i * d - i * (i + 1) / 2 + (j - i - 1))
    }

    pub fn hist2d(&self, a: usize, b: usize) -> Option<&Histogram2D> {
        self.pair_index(a, b).map(|p| &self.hists_2d[p])
    }

    pub fn column_by_name(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }
}

/// Per-bin probability that a tuple satisfies one predicate condition,
/// with lower/upper bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageVector {
    pub column: usize,
    pub beta: Vec<f64>,
    pub beta_lo: Vec<f64>,
    pub beta_hi: Vec<f64>,
}

/// Estimated satisfying tuples per bin of the aggregation column, with bounds
/// after sampling widening.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightingsVector {
    pub column: usize,
    pub w: Vec<f64>,
    pub w_lo: Vec<f64>,
    pub w_hi: Vec<f64>,
}

impl WeightingsVector {
    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }
}

/// Supported aggregation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Count,
    Sum,
    Avg,
    Min,
    Max,
    Median,
    Var,
}

impl Aggregation {
    pub fn name(&self) -> &'static str {
        match self {
            Aggregation::Count => "COUNT",
            Aggregation::Sum => "SUM",
            Aggregation::Avg => "AVG",
            Aggregation::Min => "MIN",
            Aggregation::Max => "MAX",
            Aggregation::Median => "MEDIAN",
            Aggregation::Var => "VAR",
        }
    }
}

/// Comparison operators allowed in predicate conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

/// A literal already transformed into the encoded domain. Values may fall
/// outside the column's observed range (including below zero), which simply
/// makes the condition degenerate; `Null` marks `= NULL` / `<> NULL` checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Literal {
    Value(i128),
    Null,
}

/// One predicate condition: `column OP literal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Condition {
    pub column: usize,
    pub op: CmpOp,
    pub literal: Literal,
}

/// Predicate tree. Internal nodes hold two or more children; AND binds
/// tighter than OR when parsed from text.
#[derive(Debug, Clone, PartialEq)]
pub enum PredNode {
    Leaf(Condition),
    And(Vec<PredNode>),
    Or(Vec<PredNode>),
}

impl PredNode {
    /// Every column referenced by any leaf below this node.
    pub fn columns(&self, out: &mut Vec<usize>) {
        match self {
            PredNode::Leaf(c) => {
                if !out.contains(&c.column) {
                    out.push(c.column);
                }
            }
            PredNode::And(ch) | PredNode::Or(ch) => {
                for c in ch {
                    c.columns(out);
                }
            }
        }
    }
}

/// A parsed query: aggregation, optional aggregation column (absent for
/// COUNT(*)), optional predicate tree, optional categorical GROUP BY column.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPlan {
    pub aggregation: Aggregation,
    pub agg_column: Option<usize>,
    pub predicate: Option<PredNode>,
    pub group_by: Option<usize>,
}

/// An estimate with its deterministic bounds, in raw (decoded) units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    /// Builds an estimate, nudging bounds outward if floating-point rounding
    /// left them on the wrong side of the value.
    pub fn new(value: f64, lower: f64, upper: f64) -> Self {
        Estimate {
            value,
            lower: lower.min(value),
            upper: upper.max(value),
        }
    }
}

/// Query output. `scalar` is `None` exactly when the selection is empty and
/// the aggregate has no defined value (SQL NULL); GROUP BY queries fill
/// `groups` with one entry per category instead.
#[derive(Debug, Clone, PartialEq)]
pub struct AqpResult {
    pub scalar: Option<Estimate>,
    pub groups: Option<Vec<(String, Option<Estimate>)>>,
}

impl AqpResult {
    pub fn scalar(est: Option<Estimate>) -> Self {
        AqpResult {
            scalar: est,
            groups: None,
        }
    }
}

/// Scratch values shared by the aggregate estimators: the selected bin for
/// MIN/MAX/MEDIAN, the median's in-bin fraction, VAR's per-bin representative
/// vectors, and the sub-bin quantities behind the bound formulas.
#[derive(Debug, Clone, Default)]
pub struct AggregationWork {
    pub t_star: Option<usize>,
    pub f_key: Option<f64>,
    pub xi_lo: Vec<f64>,
    pub xi_hi: Vec<f64>,
    /// Sub-bins fully covered by a condition.
    pub a: u32,
    /// Sub-bins fully or partially covered.
    pub b: u32,
    /// Sub-bin count.
    pub s: u32,
    /// Sub-bin width.
    pub delta: f64,
    /// Bin width `v_max - v_min`.
    pub big_delta: f64,
    pub chi_crit: f64,
}

/// An encoded dataset in column-major order, paired with its column specs.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedTable {
    pub specs: Vec<ColumnSpec>,
    pub columns: Vec<Vec<u64>>,
}

impl EncodedTable {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn is_null(&self, row: usize, col: usize) -> bool {
        self.specs[col].null_code == Some(self.columns[col][row])
    }
}
