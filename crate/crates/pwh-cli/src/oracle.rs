//! Exact full-scan evaluation, the ground truth for benchmark comparisons.
//!
//! Semantics follow SQL: predicates are false on null cells (`= NULL` and
//! `<> NULL` are the nullness tests), rows with a null aggregation column are
//! excluded, MEDIAN is the lower median, VAR is the population variance.

use pwh_core::model::CmpOp;
use pwh_core::{Aggregation, ColumnSpec, EncodedTable, Literal, PredNode, QueryPlan};

fn cell_is_null(table: &EncodedTable, col: usize, row: usize) -> bool {
    table.specs[col].null_code == Some(table.columns[col][row])
}

fn eval_pred(table: &EncodedTable, node: &PredNode, row: usize) -> bool {
    match node {
        PredNode::Leaf(c) => {
            let null = cell_is_null(table, c.column, row);
            match c.literal {
                Literal::Null => match c.op {
                    CmpOp::Eq => null,
                    CmpOp::Ne => !null,
                    _ => false,
                },
                Literal::Value(z) => {
                    if null {
                        return false;
                    }
                    let v = i128::from(table.columns[c.column][row]);
                    match c.op {
                        CmpOp::Lt => v < z,
                        CmpOp::Gt => v > z,
                        CmpOp::Le => v <= z,
                        CmpOp::Ge => v >= z,
                        CmpOp::Eq => v == z,
                        CmpOp::Ne => v != z,
                    }
                }
            }
        }
        PredNode::And(children) => children.iter().all(|n| eval_pred(table, n, row)),
        PredNode::Or(children) => children.iter().any(|n| eval_pred(table, n, row)),
    }
}

/// Rows satisfying the plan's predicate (all rows when there is none).
pub fn selection(table: &EncodedTable, predicate: Option<&PredNode>) -> Vec<usize> {
    (0..table.n_rows())
        .filter(|&r| predicate.is_none_or(|p| eval_pred(table, p, r)))
        .collect()
}

fn decode(spec: &ColumnSpec, code: u64) -> f64 {
    (code as i128 + i128::from(spec.offset)) as f64 / spec.scale as f64
}

fn aggregate(values: &mut Vec<f64>, agg: Aggregation) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    Some(match agg {
        Aggregation::Count => n,
        Aggregation::Sum => values.iter().sum(),
        Aggregation::Avg => values.iter().sum::<f64>() / n,
        Aggregation::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
        Aggregation::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregation::Median => {
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            values[(values.len() - 1) / 2]
        }
        Aggregation::Var => {
            let mean = values.iter().sum::<f64>() / n;
            values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
        }
    })
}

fn scalar_over(table: &EncodedTable, plan: &QueryPlan, rows: &[usize]) -> Option<f64> {
    match plan.agg_column {
        None => {
            debug_assert_eq!(plan.aggregation, Aggregation::Count);
            if rows.is_empty() {
                None
            } else {
                Some(rows.len() as f64)
            }
        }
        Some(col) => {
            let spec = &table.specs[col];
            let mut values: Vec<f64> = rows
                .iter()
                .filter(|&&r| !cell_is_null(table, col, r))
                .map(|&r| decode(spec, table.columns[col][r]))
                .collect();
            aggregate(&mut values, plan.aggregation)
        }
    }
}

/// Exact scalar answer, `None` on an empty selection.
pub fn exact_scalar(table: &EncodedTable, plan: &QueryPlan) -> Option<f64> {
    scalar_over(table, plan, &selection(table, plan.predicate.as_ref()))
}

/// Exact per-group answers in category rank order, mirroring the grouped
/// estimate layout.
pub fn exact_grouped(table: &EncodedTable, plan: &QueryPlan) -> Vec<(String, Option<f64>)> {
    let g = plan.group_by.expect("grouped oracle needs GROUP BY");
    let rows = selection(table, plan.predicate.as_ref());
    table.specs[g]
        .category_ranks
        .iter()
        .enumerate()
        .map(|(rank, label)| {
            let subset: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&r| table.columns[g][r] == rank as u64)
                .collect();
            (label.clone(), scalar_over(table, plan, &subset))
        })
        .collect()
}

/// Fraction of rows satisfying the predicate; the floor used when drawing
/// benchmark queries.
pub fn selectivity(table: &EncodedTable, predicate: Option<&PredNode>) -> f64 {
    selection(table, predicate).len() as f64 / table.n_rows() as f64
}
