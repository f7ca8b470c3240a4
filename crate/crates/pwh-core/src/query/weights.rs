//! Predicate evaluation onto the aggregation column's bins.
//!
//! Every condition becomes three per-bin probability vectors over the anchor
//! column's 1-d bins (estimate, lower, upper). Conditions on the anchor
//! itself read coverage straight off its bins. Conditions on another column
//! go through the pair histogram: coverage over that column's refined bins,
//! weighted by the joint counts, summed per refined anchor strip, folded onto
//! the 1-d bins, and divided by the bin counts. AND multiplies the vectors,
//! OR combines complements, and range conditions sharing a column under one
//! connective are first merged exactly by interval algebra. The root vectors
//! scale by bin counts and widen for the sampled rows the synopsis never saw.
//!
//! Null tuples never enter histograms, so `= NULL` coverage is the count gap
//! between a bin and its pairwise marginal; its tracks carry no extra bounds.

use std::collections::BTreeMap;

use super::coverage::{coverage_bounds, coverage_eq, coverage_set, IntervalSet};
use super::{ExecOptions, WideningMode};
use crate::model::{
    BinMeta, CmpOp, Condition, Literal, PredNode, PwhError, Result, Synopsis, WeightingsVector,
    Z98,
};

#[derive(Debug, Clone)]
struct Tracks {
    p: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Tracks {
    fn constant(k: usize, v: f64) -> Self {
        Tracks {
            p: vec![v; k],
            lo: vec![v; k],
            hi: vec![v; k],
        }
    }

    fn and_with(&mut self, o: &Tracks) {
        for t in 0..self.p.len() {
            self.p[t] *= o.p[t];
            self.lo[t] *= o.lo[t];
            self.hi[t] *= o.hi[t];
        }
    }

    fn or_with(&mut self, o: &Tracks) {
        for t in 0..self.p.len() {
            self.p[t] = self.p[t] + o.p[t] - self.p[t] * o.p[t];
            self.lo[t] = self.lo[t] + o.lo[t] - self.lo[t] * o.lo[t];
            self.hi[t] = self.hi[t] + o.hi[t] - self.hi[t] * o.hi[t];
        }
    }
}

enum Leaf {
    Range(usize, IntervalSet),
    Eq(usize, i128),
    Ne(usize, i128),
    IsNull(usize),
    NotNull(usize),
}

impl Leaf {
    fn column(&self) -> usize {
        match *self {
            Leaf::Range(c, _)
            | Leaf::Eq(c, _)
            | Leaf::Ne(c, _)
            | Leaf::IsNull(c)
            | Leaf::NotNull(c) => c,
        }
    }
}

fn classify(c: &Condition) -> Result<Leaf> {
    match (c.op, c.literal) {
        (CmpOp::Eq, Literal::Null) => Ok(Leaf::IsNull(c.column)),
        (CmpOp::Ne, Literal::Null) => Ok(Leaf::NotNull(c.column)),
        (CmpOp::Eq, Literal::Value(x)) => Ok(Leaf::Eq(c.column, x)),
        (CmpOp::Ne, Literal::Value(x)) => Ok(Leaf::Ne(c.column, x)),
        (op, Literal::Value(x)) => Ok(Leaf::Range(
            c.column,
            IntervalSet::half_line(op, x).expect("ordering operator"),
        )),
        (_, Literal::Null) => Err(PwhError::QueryShape("NULL only supports = and <>".into())),
    }
}

/// Coverage tracks of a non-null leaf over arbitrary bins.
fn leaf_coverage(
    leaf: &Leaf,
    bins: &[BinMeta],
    min_points: u64,
    alpha: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let k = bins.len();
    let (mut p, mut lo, mut hi) = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    for (t, b) in bins.iter().enumerate() {
        let beta = match leaf {
            Leaf::Range(_, set) => coverage_set(set, b.v_min, b.v_max, b.unique),
            Leaf::Eq(_, x) => coverage_eq(*x, b.v_min, b.v_max, b.unique),
            Leaf::Ne(_, x) => 1.0 - coverage_eq(*x, b.v_min, b.v_max, b.unique),
            Leaf::IsNull(_) | Leaf::NotNull(_) => unreachable!("null leaves bypass coverage"),
        };
        let (b_lo, b_hi) = coverage_bounds(beta, b.count, b.unique, min_points, alpha)?;
        p[t] = beta;
        lo[t] = b_lo;
        hi[t] = b_hi;
    }
    Ok((p, lo, hi))
}

/// Maps each refined bin to the 1-d bin containing it. The refined edges are
/// a superset of the 1-d edges, so the containment is exact.
fn nesting_map(refined: &[u64], coarse: &[u64]) -> Vec<usize> {
    refined[..refined.len() - 1]
        .iter()
        .map(|&e| coarse.partition_point(|&c| c <= e) - 1)
        .collect()
}

struct Ctx<'a> {
    syn: &'a Synopsis,
    anchor: usize,
}

fn leaf_tracks(leaf: &Leaf, ctx: &Ctx) -> Result<Tracks> {
    let syn = ctx.syn;
    let h1 = &syn.hists_1d[ctx.anchor];
    let k = h1.k();
    let m = u64::from(syn.params.min_points);
    let alpha = syn.params.alpha;
    let col = leaf.column();

    if col == ctx.anchor {
        return match leaf {
            // The anchor histogram holds no null tuples.
            Leaf::IsNull(_) => Ok(Tracks::constant(k, 0.0)),
            Leaf::NotNull(_) => Ok(Tracks::constant(k, 1.0)),
            _ => {
                let (p, lo, hi) = leaf_coverage(leaf, &h1.bins, m, alpha)?;
                Ok(Tracks { p, lo, hi })
            }
        };
    }

    let pair = syn
        .hist2d(ctx.anchor, col)
        .ok_or_else(|| PwhError::Invalid(format!("no pair histogram for columns {} and {col}", ctx.anchor)))?;
    let anchor_is_row = pair.col_row == ctx.anchor;
    let (anchor_edges, other_meta, k_a, k_o) = if anchor_is_row {
        (&pair.edges_row, &pair.meta_col, pair.k_rows(), pair.k_cols())
    } else {
        (&pair.edges_col, &pair.meta_row, pair.k_cols(), pair.k_rows())
    };
    let cell = |a: usize, o: usize| {
        if anchor_is_row {
            pair.count(a, o)
        } else {
            pair.count(o, a)
        }
    };

    // Expected satisfying tuples per refined anchor bin, one per track.
    let (q, q_lo, q_hi) = match leaf {
        Leaf::IsNull(_) | Leaf::NotNull(_) => {
            let marg: Vec<f64> = (0..k_a)
                .map(|a| (0..k_o).map(|o| cell(a, o)).sum::<u64>() as f64)
                .collect();
            (marg.clone(), marg.clone(), marg)
        }
        _ => {
            let (beta, beta_lo, beta_hi) = leaf_coverage(leaf, other_meta, m, alpha)?;
            let fold = |beta: &[f64]| -> Vec<f64> {
                (0..k_a)
                    .map(|a| (0..k_o).map(|o| cell(a, o) as f64 * beta[o]).sum())
                    .collect()
            };
            (fold(&beta), fold(&beta_lo), fold(&beta_hi))
        }
    };

    let nest = nesting_map(anchor_edges, &h1.edges);
    let mut acc = Tracks::constant(k, 0.0);
    for (r, &t) in nest.iter().enumerate() {
        acc.p[t] += q[r];
        acc.lo[t] += q_lo[r];
        acc.hi[t] += q_hi[r];
    }
    for t in 0..k {
        let h = h1.bins[t].count as f64;
        if h == 0.0 {
            acc.p[t] = 0.0;
            acc.lo[t] = 0.0;
            acc.hi[t] = 0.0;
            continue;
        }
        let to_p = |joint: f64| -> f64 {
            let sat = if matches!(leaf, Leaf::IsNull(_)) {
                h - joint
            } else {
                joint
            };
            (sat / h).clamp(0.0, 1.0)
        };
        acc.p[t] = to_p(acc.p[t]);
        acc.lo[t] = to_p(acc.lo[t]);
        acc.hi[t] = to_p(acc.hi[t]);
    }
    Ok(acc)
}

fn eval_node(node: &PredNode, ctx: &Ctx) -> Result<Tracks> {
    match node {
        PredNode::Leaf(c) => leaf_tracks(&classify(c)?, ctx),
        PredNode::And(children) => combine(children, ctx, true),
        PredNode::Or(children) => combine(children, ctx, false),
    }
}

fn combine(children: &[PredNode], ctx: &Ctx, is_and: bool) -> Result<Tracks> {
    // Range conditions on a shared column combine exactly before anything
    // multiplies: the per-column interval algebra replaces the independence
    // assumption for that group.
    let mut range_groups: BTreeMap<usize, IntervalSet> = BTreeMap::new();
    let mut parts: Vec<Tracks> = Vec::new();
    for child in children {
        match child {
            PredNode::Leaf(c) => match classify(c)? {
                Leaf::Range(col, set) => {
                    range_groups
                        .entry(col)
                        .and_modify(|acc| {
                            *acc = if is_and { acc.intersect(&set) } else { acc.union(&set) }
                        })
                        .or_insert(set);
                }
                leaf => parts.push(leaf_tracks(&leaf, ctx)?),
            },
            inner => parts.push(eval_node(inner, ctx)?),
        }
    }
    for (col, set) in range_groups {
        parts.push(leaf_tracks(&Leaf::Range(col, set), ctx)?);
    }

    let mut iter = parts.into_iter();
    let mut acc = iter
        .next()
        .ok_or_else(|| PwhError::Invalid("empty predicate group".into()))?;
    for t in iter {
        if is_and {
            acc.and_with(&t);
        } else {
            acc.or_with(&t);
        }
    }
    Ok(acc)
}

/// Evaluates a predicate into per-bin weights over the anchor column's bins,
/// with lower/upper tracks widened for rows outside the sample.
pub fn weightings(
    syn: &Synopsis,
    anchor: usize,
    predicate: Option<&PredNode>,
    opts: &ExecOptions,
) -> Result<WeightingsVector> {
    let h1 = &syn.hists_1d[anchor];
    let k = h1.k();
    let tracks = match predicate {
        Some(node) => eval_node(node, &Ctx { syn, anchor })?,
        None => Tracks::constant(k, 1.0),
    };

    let n = syn.params.n_rows as f64;
    let ns = syn.params.n_sample as f64;
    let widen = syn.params.n_sample < syn.params.n_rows;
    let mut w = vec![0.0; k];
    let mut w_lo = vec![0.0; k];
    let mut w_hi = vec![0.0; k];
    for t in 0..k {
        let h = h1.bins[t].count as f64;
        w[t] = (tracks.p[t] * h).clamp(0.0, h);
        let mut lo = tracks.lo[t] * h;
        let mut hi = tracks.hi[t] * h;
        if widen && h > 0.0 {
            let scale = match opts.widening {
                WideningMode::Printed => 1.0,
                WideningMode::BinomialCount => h.sqrt(),
            };
            let fpc = (n - ns) / (n - 1.0);
            let beta_lo = (lo / h).clamp(0.0, 1.0);
            let beta_hi = (hi / h).clamp(0.0, 1.0);
            lo -= Z98 * (beta_lo * (1.0 - beta_lo) * fpc).sqrt() * scale;
            hi += Z98 * (beta_hi * (1.0 - beta_hi) * fpc).sqrt() * scale;
        }
        w_lo[t] = lo.clamp(0.0, h).min(w[t]);
        w_hi[t] = hi.clamp(0.0, h).max(w[t]);
    }
    Ok(WeightingsVector {
        column: anchor,
        w,
        w_lo,
        w_hi,
    })
}
