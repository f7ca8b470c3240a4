//! Seeded random query generation for the benchmark harness.
//!
//! Each draw picks an aggregate, a compatible aggregation column, and one to
//! `max_conditions` comparisons with literals from the observed value ranges,
//! joined by AND/OR. Draws below the selectivity floor (measured exactly) are
//! rejected and redrawn. Queries are emitted as SQL text together with the
//! plan that text parses to, so generation does not require a synopsis.

use anyhow::{bail, Result};
use pwh_core::model::CmpOp;
use pwh_core::{
    Aggregation, ColumnKind, ColumnSpec, Condition, EncodedTable, Literal, PredNode, QueryPlan,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle;

#[derive(Debug)]
pub struct GeneratedQuery {
    pub sql: String,
    pub plan: QueryPlan,
}

pub struct GenConfig {
    pub count: usize,
    pub seed: u64,
    pub min_selectivity: f64,
    pub aggregates: Vec<Aggregation>,
    pub max_conditions: usize,
}

fn ident_safe(name: &str) -> bool {
    let mut chars = name.chars();
    chars
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_alphanumeric() || c == '_')
}

/// Observed non-null code range of a column, `None` when every cell is null.
fn code_range(table: &EncodedTable, col: usize) -> Option<(u64, u64)> {
    let null = table.specs[col].null_code;
    let mut range: Option<(u64, u64)> = None;
    for &code in &table.columns[col] {
        if Some(code) == null {
            continue;
        }
        range = Some(range.map_or((code, code), |(lo, hi)| (lo.min(code), hi.max(code))));
    }
    range
}

/// Renders the raw literal whose encoding is `code`, in a form the query
/// parser transforms back to exactly `code`.
fn literal_text(spec: &ColumnSpec, code: u64) -> String {
    match spec.kind {
        ColumnKind::Categorical => {
            let label = &spec.category_ranks[code as usize];
            format!("'{}'", label.replace('\'', "''"))
        }
        ColumnKind::Integer | ColumnKind::Datetime => {
            (code as i128 + i128::from(spec.offset)).to_string()
        }
        ColumnKind::Decimal => {
            let scaled = code as i128 + i128::from(spec.offset);
            let digits = spec.scale.ilog10() as usize;
            let magnitude = scaled.unsigned_abs();
            let whole = magnitude / spec.scale as u128;
            let frac = magnitude % spec.scale as u128;
            let sign = if scaled < 0 { "-" } else { "" };
            if digits == 0 {
                format!("{sign}{whole}")
            } else {
                format!("{sign}{whole}.{frac:0digits$}")
            }
        }
    }
}

fn draw_condition(table: &EncodedTable, cols: &[usize], rng: &mut ChaCha8Rng) -> (String, PredNode) {
    let col = cols[rng.gen_range(0..cols.len())];
    let spec = &table.specs[col];
    let (lo, hi) = code_range(table, col).expect("candidate columns have data");
    let code = rng.gen_range(lo..=hi);
    let op = if spec.kind == ColumnKind::Categorical {
        [CmpOp::Eq, CmpOp::Ne][rng.gen_range(0..2)]
    } else {
        [CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne][rng.gen_range(0..6)]
    };
    let op_text = match op {
        CmpOp::Lt => "<",
        CmpOp::Gt => ">",
        CmpOp::Le => "<=",
        CmpOp::Ge => ">=",
        CmpOp::Eq => "=",
        CmpOp::Ne => "<>",
    };
    let text = format!("{} {} {}", spec.name, op_text, literal_text(spec, code));
    let node = PredNode::Leaf(Condition {
        column: col,
        op,
        literal: Literal::Value(i128::from(code)),
    });
    (text, node)
}

pub fn generate_queries(table: &EncodedTable, cfg: &GenConfig) -> Result<Vec<GeneratedQuery>> {
    if cfg.count == 0 {
        bail!("query count must be at least 1");
    }
    if cfg.aggregates.is_empty() {
        bail!("no aggregates to draw from");
    }
    let usable: Vec<usize> = (0..table.n_columns())
        .filter(|&c| ident_safe(&table.specs[c].name) && code_range(table, c).is_some())
        .collect();
    let numeric: Vec<usize> = usable
        .iter()
        .copied()
        .filter(|&c| table.specs[c].is_numeric())
        .collect();
    if usable.is_empty() {
        bail!("no column is usable in generated queries");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.count);
    let budget = 1000 * cfg.count;
    let mut draws = 0usize;
    while out.len() < cfg.count {
        if draws >= budget {
            bail!(
                "{} draws could not find {} queries above selectivity {}",
                budget,
                cfg.count,
                cfg.min_selectivity
            );
        }
        draws += 1;

        let agg = cfg.aggregates[rng.gen_range(0..cfg.aggregates.len())];
        let (head, agg_column) = if agg == Aggregation::Count {
            ("COUNT(*)".to_string(), None)
        } else {
            if numeric.is_empty() {
                bail!("{} needs a numeric column", agg.name());
            }
            let col = numeric[rng.gen_range(0..numeric.len())];
            (
                format!("{}({})", agg.name(), table.specs[col].name),
                Some(col),
            )
        };

        let n_conditions = rng.gen_range(1..=cfg.max_conditions.max(1));
        let mut where_text = String::new();
        let mut nodes: Vec<(PredNode, bool)> = Vec::new();
        for i in 0..n_conditions {
            let (text, node) = draw_condition(table, &usable, &mut rng);
            let and_join = i > 0 && rng.gen_bool(0.5);
            if i > 0 {
                where_text.push_str(if and_join { " AND " } else { " OR " });
            }
            where_text.push_str(&text);
            nodes.push((node, and_join));
        }
        // AND binds tighter than OR, so fold runs of AND first.
        let mut or_terms: Vec<PredNode> = Vec::new();
        let mut run: Vec<PredNode> = Vec::new();
        for (node, and_join) in nodes {
            if !and_join && !run.is_empty() {
                or_terms.push(collapse(PredNode::And, std::mem::take(&mut run)));
            }
            run.push(node);
        }
        or_terms.push(collapse(PredNode::And, run));
        let predicate = Some(collapse(PredNode::Or, or_terms));

        if oracle::selectivity(table, predicate.as_ref()) < cfg.min_selectivity {
            continue;
        }
        out.push(GeneratedQuery {
            sql: format!("SELECT {head} FROM t WHERE {where_text}"),
            plan: QueryPlan {
                aggregation: agg,
                agg_column,
                predicate,
                group_by: None,
            },
        });
    }
    Ok(out)
}

fn collapse(ctor: fn(Vec<PredNode>) -> PredNode, mut children: Vec<PredNode>) -> PredNode {
    if children.len() == 1 {
        children.pop().unwrap()
    } else {
        ctor(children)
    }
}
