//! Query execution over a synopsis.
//!
//! A query runs in three steps: the SQL text parses into a plan against the
//! synopsis's columns; the predicate tree evaluates into per-bin weights over
//! the aggregation column (three tracks: estimate, lower, upper); and the
//! aggregate estimator turns the weights into a value with deterministic
//! bounds, decoded back to raw units.

mod aggregate;
pub mod coverage;
mod parse;
mod weights;

pub use coverage::{coverage_bounds, coverage_eq, coverage_set, Interval, IntervalSet};
pub use parse::parse_query;
pub use weights::weightings;

use crate::model::{
    Aggregation, AqpResult, CmpOp, ColumnKind, Condition, Estimate, Literal, PredNode, PwhError,
    QueryPlan, Result, Synopsis,
};

/// How the sampling widening scales with the bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WideningMode {
    /// Widen each bin's weight by a fixed multiple of the binomial deviation
    /// of the satisfaction fraction.
    #[default]
    Printed,
    /// Scale the widening to the deviation of the satisfying count itself.
    BinomialCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExecOptions {
    pub widening: WideningMode,
}

/// Runs a parsed plan against the synopsis.
pub fn execute(syn: &Synopsis, plan: &QueryPlan, opts: &ExecOptions) -> Result<AqpResult> {
    if let Some(g) = plan.group_by {
        let spec = &syn.columns[g];
        if spec.kind != ColumnKind::Categorical {
            return Err(PwhError::QueryShape(format!(
                "GROUP BY {} requires a categorical column",
                spec.name
            )));
        }
        let mut groups = Vec::with_capacity(spec.category_ranks.len());
        for rank in 0..spec.category_ranks.len() {
            let cond = PredNode::Leaf(Condition {
                column: g,
                op: CmpOp::Eq,
                literal: Literal::Value(rank as i128),
            });
            let pred = match &plan.predicate {
                Some(p) => PredNode::And(vec![p.clone(), cond]),
                None => cond,
            };
            let est = execute_scalar(syn, plan, Some(&pred), opts)?;
            groups.push((syn.columns[g].category_ranks[rank].clone(), est));
        }
        Ok(AqpResult {
            scalar: None,
            groups: Some(groups),
        })
    } else {
        Ok(AqpResult::scalar(execute_scalar(
            syn,
            plan,
            plan.predicate.as_ref(),
            opts,
        )?))
    }
}

fn execute_scalar(
    syn: &Synopsis,
    plan: &QueryPlan,
    predicate: Option<&PredNode>,
    opts: &ExecOptions,
) -> Result<Option<Estimate>> {
    let anchor = match plan.agg_column {
        Some(c) => c,
        // COUNT(*) anchors on the predicate column with the most bins, or
        // the first column when there is no predicate at all.
        None => {
            let mut cols = Vec::new();
            if let Some(p) = predicate {
                p.columns(&mut cols);
            }
            cols.into_iter()
                .fold(None::<usize>, |best, c| match best {
                    Some(b) if syn.hists_1d[b].k() >= syn.hists_1d[c].k() => Some(b),
                    _ => Some(c),
                })
                .unwrap_or(0)
        }
    };

    if plan.aggregation != Aggregation::Count && !syn.columns[anchor].is_numeric() {
        return Err(PwhError::QueryShape(format!(
            "{} undefined for categorical {}",
            plan.aggregation.name(),
            syn.columns[anchor].name
        )));
    }

    let single_column = predicate.map_or(true, |p| {
        let mut cols = Vec::new();
        p.columns(&mut cols);
        cols.iter().all(|&c| c == anchor)
    });

    let wv = weights::weightings(syn, anchor, predicate, opts)?;
    aggregate::estimate(syn, plan.aggregation, anchor, &wv, single_column)
}
