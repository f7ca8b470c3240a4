//! Synopsis construction: seeded sampling, recursive 1-d and 2-d bin
//! refinement driven by the uniformity test, and weighted-centre bounds.
//!
//! Construction runs in two strict phases. Every column's 1-d histogram is
//! refined first; the pair histograms then start from those 1-d edges and add
//! cuts wherever a cell's marginal fails the uniformity test. Within each
//! phase the work items are independent and run data-parallel when the
//! `parallel` feature is on, collected in index order so the result never
//! depends on scheduling.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chi2::{
    chi_squared_critical, chi_squared_statistic, is_uniform, subbin_counts,
    terrell_scott_subbins,
};
use crate::model::{
    BinMeta, EncodedTable, Histogram1D, Histogram2D, Params, PwhError, Result, Synopsis,
};
use crate::par;

/// Output of 1-d refinement: one entry per leaf bin, in edge order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefineResult1D {
    pub upper_edges: Vec<u64>,
    pub v_mins: Vec<u64>,
    pub v_maxs: Vec<u64>,
    pub uniques: Vec<u64>,
}

impl RefineResult1D {
    fn push(&mut self, edge: u64, v_min: u64, v_max: u64, unique: u64) {
        self.upper_edges.push(edge);
        self.v_mins.push(v_min);
        self.v_maxs.push(v_max);
        self.uniques.push(unique);
    }

    fn append(&mut self, mut other: RefineResult1D) {
        self.upper_edges.append(&mut other.upper_edges);
        self.v_mins.append(&mut other.v_mins);
        self.v_maxs.append(&mut other.v_maxs);
        self.uniques.append(&mut other.uniques);
    }

    pub fn len(&self) -> usize {
        self.upper_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper_edges.is_empty()
    }
}

fn count_unique_sorted(values: &[u64]) -> u64 {
    let mut n = 0;
    let mut prev = None;
    for &x in values {
        if Some(x) != prev {
            n += 1;
            prev = Some(x);
        }
    }
    n
}

/// Recursively refines one bin `[e_l, e_r)` over its sorted values.
///
/// Leaves arise from four cases, checked in order: an empty bin keeps the
/// edge interval itself as min/max; a single distinct value collapses to it;
/// a bin that is small (fewer than `min_points` values) or passes the
/// uniformity test is kept whole; anything else splits at the integer
/// midpoint and recurses on both halves, left first.
pub fn refine_bin_1d(
    e_l: u64,
    e_r: u64,
    values: &[u64],
    min_points: u64,
    alpha: f64,
) -> Result<RefineResult1D> {
    debug_assert!(values.windows(2).all(|w| w[0] <= w[1]), "values must be sorted");
    let mut out = RefineResult1D::default();
    refine_1d_into(e_l, e_r, values, min_points, alpha, &mut out)?;
    Ok(out)
}

fn refine_1d_into(
    e_l: u64,
    e_r: u64,
    values: &[u64],
    min_points: u64,
    alpha: f64,
    out: &mut RefineResult1D,
) -> Result<()> {
    if values.is_empty() {
        out.push(e_r, e_l, e_r, 0);
        return Ok(());
    }
    let v_min = values[0];
    let v_max = *values.last().unwrap();
    let unique = count_unique_sorted(values);
    if unique == 1 {
        out.push(e_r, v_min, v_min, 1);
        return Ok(());
    }
    if (values.len() as u64) < min_points || is_uniform(values, e_l, e_r, unique, alpha)? {
        out.push(e_r, v_min, v_max, unique);
        return Ok(());
    }
    let z = e_l + (e_r - e_l) / 2;
    if z <= e_l || z >= e_r {
        // No representable split point left; keep the leaf.
        out.push(e_r, v_min, v_max, unique);
        return Ok(());
    }
    let cut = values.partition_point(|&x| x < z);
    refine_1d_into(e_l, z, &values[..cut], min_points, alpha, out)?;
    refine_1d_into(z, e_r, &values[cut..], min_points, alpha, out)
}

struct DimTest {
    wants_split: bool,
    stat: f64,
}

fn test_dim(values: &[u64], e_l: u64, e_r: u64, alpha: f64) -> Result<DimTest> {
    let splittable = e_r.saturating_sub(e_l) >= 2;
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let unique = count_unique_sorted(&sorted);
    if unique < 2 {
        return Ok(DimTest {
            wants_split: false,
            stat: 0.0,
        });
    }
    let s = terrell_scott_subbins(unique)?;
    let stat = chi_squared_statistic(&subbin_counts(values, e_l, e_r, s));
    Ok(DimTest {
        wants_split: splittable && stat > chi_squared_critical(s, alpha),
        stat,
    })
}

/// Refines one 2-d bin: tests each dimension's marginal for uniformity, and
/// while either fails, splits the dimension with the larger statistic at its
/// integer midpoint (ties go to the row dimension), recursing into the halves
/// that still hold more than `min_points` points. Returns the sorted split
/// positions per dimension.
pub fn refine_bin_2d(
    e_li: u64,
    e_ri: u64,
    e_lj: u64,
    e_rj: u64,
    points: &[(u64, u64)],
    min_points: u64,
    alpha: f64,
) -> Result<(Vec<u64>, Vec<u64>)> {
    let mut cuts_i = BTreeSet::new();
    let mut cuts_j = BTreeSet::new();
    let mut pts = points.to_vec();
    refine_2d_into(
        e_li, e_ri, e_lj, e_rj, &mut pts, min_points, alpha, &mut cuts_i, &mut cuts_j,
    )?;
    Ok((cuts_i.into_iter().collect(), cuts_j.into_iter().collect()))
}

#[allow(clippy::too_many_arguments)]
fn refine_2d_into(
    e_li: u64,
    e_ri: u64,
    e_lj: u64,
    e_rj: u64,
    points: &mut [(u64, u64)],
    min_points: u64,
    alpha: f64,
    cuts_i: &mut BTreeSet<u64>,
    cuts_j: &mut BTreeSet<u64>,
) -> Result<()> {
    if points.len() as u64 <= min_points {
        return Ok(());
    }
    let vi: Vec<u64> = points.iter().map(|p| p.0).collect();
    let vj: Vec<u64> = points.iter().map(|p| p.1).collect();
    let ti = test_dim(&vi, e_li, e_ri, alpha)?;
    let tj = test_dim(&vj, e_lj, e_rj, alpha)?;
    let split_row = match (ti.wants_split, tj.wants_split) {
        (false, false) => return Ok(()),
        (true, false) => true,
        (false, true) => false,
        // The less uniform dimension splits first; ties go to the row.
        (true, true) => tj.stat <= ti.stat,
    };
    if split_row {
        let z = e_li + (e_ri - e_li) / 2;
        cuts_i.insert(z);
        points.sort_unstable_by_key(|p| p.0);
        let cut = points.partition_point(|p| p.0 < z);
        let (left, right) = points.split_at_mut(cut);
        refine_2d_into(e_li, z, e_lj, e_rj, left, min_points, alpha, cuts_i, cuts_j)?;
        refine_2d_into(z, e_ri, e_lj, e_rj, right, min_points, alpha, cuts_i, cuts_j)
    } else {
        let z = e_lj + (e_rj - e_lj) / 2;
        cuts_j.insert(z);
        points.sort_unstable_by_key(|p| p.1);
        let cut = points.partition_point(|p| p.1 < z);
        let (left, right) = points.split_at_mut(cut);
        refine_2d_into(e_li, e_ri, e_lj, z, left, min_points, alpha, cuts_i, cuts_j)?;
        refine_2d_into(e_li, e_ri, z, e_rj, right, min_points, alpha, cuts_i, cuts_j)
    }
}

/// Deterministic bounds on a bin's weighted centre (the mean of its values),
/// derived from the stored min/max/unique/count alone.
///
/// Small bins (`h < min_points`) use the exact extremal placement of `u`
/// distinct values at `quantum` spacing. Larger bins assume the uniformity
/// test passed and bound the centre over every sub-bin occupancy whose test
/// statistic stays within the critical value; the extremes of that set have a
/// closed form. Results are clamped into `[v_min, v_max]`.
pub fn weighted_centre_bounds(
    h: u64,
    v_min: u64,
    v_max: u64,
    u: u64,
    min_points: u64,
    alpha: f64,
    quantum: f64,
) -> Result<(f64, f64)> {
    if h == 0 {
        return Err(PwhError::Invalid("empty bin".into()));
    }
    let vmin = v_min as f64;
    let vmax = v_max as f64;
    let (lo, hi) = if h < min_points {
        let x = ((u.saturating_sub(1) * u) as f64 * quantum / (2.0 * h as f64))
            .min((vmax - vmin) / 2.0);
        (vmin + x, vmax - x)
    } else if u < 2 {
        (vmin, vmax)
    } else {
        let s = f64::from(terrell_scott_subbins(u)?);
        let delta = (vmax - vmin) / s;
        let crit = chi_squared_critical(s as u32, alpha);
        let radical = (delta / 6.0) * (3.0 * crit * (s * s - 1.0) / h as f64).sqrt();
        (
            vmin + (s - 1.0) * delta / 2.0 - radical,
            vmin + (s + 1.0) * delta / 2.0 + radical,
        )
    };
    Ok((lo.clamp(vmin, vmax), hi.clamp(vmin, vmax)))
}

/// Builds a full `BinMeta`, deriving the midpoint and centre bounds. Empty
/// bins take the interval midpoint so downstream dot products stay finite;
/// their weight is always zero.
pub(crate) fn make_bin_meta(
    v_min: u64,
    v_max: u64,
    unique: u64,
    count: u64,
    min_points: u64,
    alpha: f64,
) -> Result<BinMeta> {
    let c = (v_min as f64 + v_max as f64) / 2.0;
    let (c_lo, c_hi) = if count == 0 {
        (c, c)
    } else {
        weighted_centre_bounds(count, v_min, v_max, unique, min_points, alpha, 1.0)?
    };
    Ok(BinMeta {
        v_min,
        v_max,
        unique: unique as u32,
        count,
        c,
        c_lo,
        c_hi,
    })
}

/// The seeded row sample used for construction: all rows in order when the
/// sample covers the dataset, otherwise a uniform draw without replacement,
/// returned sorted.
pub fn sample_indices(n_rows: u64, n_sample: u64, seed: u64) -> Vec<usize> {
    if n_sample >= n_rows {
        return (0..n_rows as usize).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n_rows as usize, n_sample as usize).into_vec();
    idx.sort_unstable();
    idx
}

/// Initial edge list for one column: an equi-width grid of about
/// `ceil(n_sample / min_points)` windows by default, or the provided edges
/// downsampled to that many values and coerced to cover the column's
/// encoded range. Without the grid a column that passes the uniformity test
/// at the top level would stay a single bin, which is useless resolution.
fn initial_edges_for(
    values: &[u64],
    provided: Option<&Vec<u64>>,
    n_sample: u64,
    min_points: u64,
) -> Vec<u64> {
    let upper = values.last().copied().unwrap_or(0).max(1);
    let target = n_sample.div_ceil(min_points.max(1)).max(1);
    if let Some(prov) = provided {
        let mut sorted: Vec<u64> = prov.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() >= 2 {
            let stride = sorted.len().div_ceil(target as usize).max(1);
            let mut kept: Vec<u64> = sorted.iter().copied().step_by(stride).collect();
            if kept.last() != sorted.last() {
                kept.push(*sorted.last().unwrap());
            }
            let mut edges: Vec<u64> = kept.into_iter().filter(|&e| e > 0 && e < upper).collect();
            edges.insert(0, 0);
            edges.push(upper);
            return edges;
        }
    }
    // No point cutting finer than the distinct values present.
    let distinct = if values.is_empty() {
        1
    } else {
        1 + values.windows(2).filter(|w| w[0] != w[1]).count() as u64
    };
    let k0 = target.min(upper).min(distinct);
    let mut edges: Vec<u64> = (0..k0).map(|i| i * upper / k0).collect();
    edges.push(upper);
    edges.dedup();
    edges
}

fn build_hist_1d(
    column: usize,
    values: &[u64],
    provided: Option<&Vec<u64>>,
    params: &Params,
) -> Result<Histogram1D> {
    let m = u64::from(params.min_points);
    let init = initial_edges_for(values, provided, params.n_sample, m);
    let top = *init.last().unwrap();

    let mut refined = RefineResult1D::default();
    for w in init.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let a = values.partition_point(|&x| x < lo);
        let b = if hi == top {
            values.len()
        } else {
            values.partition_point(|&x| x < hi)
        };
        refined.append(refine_bin_1d(lo, hi, &values[a..b], m, params.alpha)?);
    }

    let mut edges = Vec::with_capacity(refined.len() + 1);
    edges.push(init[0]);
    edges.extend_from_slice(&refined.upper_edges);

    let k = refined.len();
    let mut bins = Vec::with_capacity(k);
    for t in 0..k {
        let a = values.partition_point(|&x| x < edges[t]);
        let b = if t + 1 == k {
            values.len()
        } else {
            values.partition_point(|&x| x < edges[t + 1])
        };
        bins.push(make_bin_meta(
            refined.v_mins[t],
            refined.v_maxs[t],
            refined.uniques[t],
            (b - a) as u64,
            m,
            params.alpha,
        )?);
    }
    Ok(Histogram1D {
        column,
        edges,
        bins,
    })
}

/// Strip boundaries of `pts` (sorted by the extracted key) over an edge list,
/// with the final bin closed above.
fn strip_bounds(pts: &[(u64, u64)], edges: &[u64], key: impl Fn(&(u64, u64)) -> u64) -> Vec<usize> {
    let k = edges.len() - 1;
    let mut bounds = Vec::with_capacity(k + 1);
    bounds.push(pts.partition_point(|p| key(p) < edges[0]));
    for (t, &e) in edges[1..].iter().enumerate() {
        bounds.push(if t + 1 == k {
            pts.len()
        } else {
            pts.partition_point(|p| key(p) < e)
        });
    }
    bounds
}

fn merge_edges(base: &[u64], cuts: BTreeSet<u64>) -> Vec<u64> {
    let mut all: Vec<u64> = base.iter().copied().chain(cuts).collect();
    all.sort_unstable();
    all.dedup();
    all
}

/// Min/max/unique of a sorted slice, or the bin interval itself when empty.
fn slice_meta(sorted: &[u64], lo: u64, hi: u64) -> (u64, u64, u64) {
    if sorted.is_empty() {
        (lo, hi, 0)
    } else {
        (
            sorted[0],
            *sorted.last().unwrap(),
            count_unique_sorted(sorted),
        )
    }
}

/// Per-dimension metadata for the refined bins of one pair histogram. Bins
/// whose interval is exactly a 1-d bin keep that bin's min/max/unique, so the
/// values survive serialization, which stores explicit metadata only for bins
/// created by 2-d refinement. Bins created by a split get metadata measured
/// on the pairwise sample. Counts are the refined marginals either way.
fn finalize_dim_meta(
    edges_refined: &[u64],
    edges_1d: &[u64],
    bins_1d: &[BinMeta],
    measured: &[(u64, u64, u64)],
    marginals: &[u64],
    min_points: u64,
    alpha: f64,
) -> Result<Vec<BinMeta>> {
    let k = edges_refined.len() - 1;
    let mut out = Vec::with_capacity(k);
    for t in 0..k {
        let (lo, hi) = (edges_refined[t], edges_refined[t + 1]);
        let original = edges_1d
            .binary_search(&lo)
            .ok()
            .filter(|&p| edges_1d.get(p + 1) == Some(&hi));
        let (v_min, v_max, unique) = match original {
            Some(p) => (bins_1d[p].v_min, bins_1d[p].v_max, u64::from(bins_1d[p].unique)),
            None => measured[t],
        };
        out.push(make_bin_meta(
            v_min,
            v_max,
            unique,
            marginals[t],
            min_points,
            alpha,
        )?);
    }
    Ok(out)
}

fn build_hist_2d(
    i: usize,
    j: usize,
    table: &EncodedTable,
    sample: &[usize],
    h1i: &Histogram1D,
    h1j: &Histogram1D,
    params: &Params,
) -> Result<Histogram2D> {
    let m = u64::from(params.min_points);
    let alpha = params.alpha;
    let (col_i, col_j) = (&table.columns[i], &table.columns[j]);
    let (null_i, null_j) = (table.specs[i].null_code, table.specs[j].null_code);

    let mut pts: Vec<(u64, u64)> = sample
        .iter()
        .filter_map(|&r| {
            let (a, b) = (col_i[r], col_j[r]);
            (Some(a) != null_i && Some(b) != null_j).then_some((a, b))
        })
        .collect();

    // Refinement pass: every initial cell (from the 1-d edge grid) holding
    // more than min_points points may contribute cuts. A cut found in one
    // cell applies to the whole grid, which is what the recount below does.
    let mut cuts_i: BTreeSet<u64> = BTreeSet::new();
    let mut cuts_j: BTreeSet<u64> = BTreeSet::new();
    pts.sort_unstable_by_key(|p| p.0);
    let row_bounds = strip_bounds(&pts, &h1i.edges, |p| p.0);
    for r in 0..h1i.edges.len() - 1 {
        let strip = &mut pts[row_bounds[r]..row_bounds[r + 1]];
        if strip.is_empty() {
            continue;
        }
        strip.sort_unstable_by_key(|p| p.1);
        let col_bounds = strip_bounds(strip, &h1j.edges, |p| p.1);
        for c in 0..h1j.edges.len() - 1 {
            let cell = &strip[col_bounds[c]..col_bounds[c + 1]];
            if cell.len() as u64 > m {
                let (ci, cj) = refine_bin_2d(
                    h1i.edges[r],
                    h1i.edges[r + 1],
                    h1j.edges[c],
                    h1j.edges[c + 1],
                    cell,
                    m,
                    alpha,
                )?;
                cuts_i.extend(ci);
                cuts_j.extend(cj);
            }
        }
    }

    let edges_row = merge_edges(&h1i.edges, cuts_i);
    let edges_col = merge_edges(&h1j.edges, cuts_j);
    let k_r = edges_row.len() - 1;
    let k_c = edges_col.len() - 1;

    // Recount over the refined grid and record per-dimension metadata.
    pts.sort_unstable_by_key(|p| p.0);
    let row_bounds = strip_bounds(&pts, &edges_row, |p| p.0);
    let mut counts = vec![0u64; k_r * k_c];
    let mut row_measured = Vec::with_capacity(k_r);
    let mut row_marginals = Vec::with_capacity(k_r);
    for r in 0..k_r {
        let strip = &mut pts[row_bounds[r]..row_bounds[r + 1]];
        let vi: Vec<u64> = strip.iter().map(|p| p.0).collect();
        row_measured.push(slice_meta(&vi, edges_row[r], edges_row[r + 1]));
        row_marginals.push(strip.len() as u64);
        strip.sort_unstable_by_key(|p| p.1);
        let col_bounds = strip_bounds(strip, &edges_col, |p| p.1);
        for c in 0..k_c {
            counts[r * k_c + c] = (col_bounds[c + 1] - col_bounds[c]) as u64;
        }
    }

    let mut vj: Vec<u64> = pts.iter().map(|p| p.1).collect();
    vj.sort_unstable();
    let mut col_measured = Vec::with_capacity(k_c);
    let mut col_marginals = Vec::with_capacity(k_c);
    {
        let mut start = vj.partition_point(|&x| x < edges_col[0]);
        for c in 0..k_c {
            let end = if c + 1 == k_c {
                vj.len()
            } else {
                vj.partition_point(|&x| x < edges_col[c + 1])
            };
            col_measured.push(slice_meta(&vj[start..end], edges_col[c], edges_col[c + 1]));
            col_marginals.push((end - start) as u64);
            start = end;
        }
    }

    let meta_row = finalize_dim_meta(
        &edges_row,
        &h1i.edges,
        &h1i.bins,
        &row_measured,
        &row_marginals,
        m,
        alpha,
    )?;
    let meta_col = finalize_dim_meta(
        &edges_col,
        &h1j.edges,
        &h1j.bins,
        &col_measured,
        &col_marginals,
        m,
        alpha,
    )?;

    Ok(Histogram2D {
        col_row: i,
        col_col: j,
        edges_row,
        edges_col,
        counts,
        meta_row,
        meta_col,
    })
}

/// Builds the full synopsis from an encoded table.
///
/// Draws the seeded sample, refines each column's 1-d histogram (optionally
/// seeding edges from `initial_edges`, e.g. block boundaries of a compressed
/// layout), then builds every pair histogram from the finished 1-d edges.
pub fn build_pairwise_hist(
    table: &EncodedTable,
    params: &Params,
    initial_edges: Option<&[Vec<u64>]>,
    seed: u64,
) -> Result<Synopsis> {
    let d = table.n_columns();
    if d == 0 {
        return Err(PwhError::Invalid("table has no columns".into()));
    }
    if params.n_columns != d {
        return Err(PwhError::Invalid(format!(
            "params describe {} columns, table has {d}",
            params.n_columns
        )));
    }
    if params.n_rows != table.n_rows() as u64 {
        return Err(PwhError::Invalid(format!(
            "params describe {} rows, table has {}",
            params.n_rows,
            table.n_rows()
        )));
    }
    if let Some(edges) = initial_edges {
        if edges.len() != d {
            return Err(PwhError::Invalid(
                "initial edge vectors must match the column count".into(),
            ));
        }
    }

    let sample = sample_indices(params.n_rows, params.n_sample, seed);

    let col_values: Vec<Vec<u64>> = par::map_indexed(d, |i| {
        let null = table.specs[i].null_code;
        let mut v: Vec<u64> = sample
            .iter()
            .map(|&r| table.columns[i][r])
            .filter(|&x| Some(x) != null)
            .collect();
        v.sort_unstable();
        v
    });

    let hists_1d: Vec<Histogram1D> = par::map_indexed(d, |i| {
        build_hist_1d(
            i,
            &col_values[i],
            initial_edges.and_then(|e| e.get(i)),
            params,
        )
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
        .collect();
    let hists_2d: Vec<Histogram2D> = par::map_indexed(pairs.len(), |p| {
        let (i, j) = pairs[p];
        build_hist_2d(i, j, table, &sample, &hists_1d[i], &hists_1d[j], params)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    Ok(Synopsis {
        params: params.clone(),
        columns: table.specs.clone(),
        hists_1d,
        hists_2d,
    })
}

/// Re-checks every refined 1-d bin against the construction sample (derived
/// again from `seed`): a bin at or above the refinement threshold holding two
/// or more distinct values must pass the uniformity test, and its stored
/// count, extrema, and unique count must match the sample. Returns one line
/// per violation; an empty list means the construction is sound.
pub fn audit_leaves(table: &EncodedTable, syn: &Synopsis, seed: u64) -> Result<Vec<String>> {
    let sample = sample_indices(syn.params.n_rows, syn.params.n_sample, seed);
    let m = u64::from(syn.params.min_points);
    let mut findings = Vec::new();
    for (i, h1) in syn.hists_1d.iter().enumerate() {
        let null = table.specs[i].null_code;
        let mut vals: Vec<u64> = sample
            .iter()
            .map(|&r| table.columns[i][r])
            .filter(|&x| Some(x) != null)
            .collect();
        vals.sort_unstable();
        let top = *h1.edges.last().unwrap();
        for (t, b) in h1.bins.iter().enumerate() {
            let (lo, hi) = (h1.edges[t], h1.edges[t + 1]);
            let a = vals.partition_point(|&x| x < lo);
            let z = if hi == top {
                vals.len()
            } else {
                vals.partition_point(|&x| x < hi)
            };
            let window = &vals[a..z];
            let uniques = 1 + window.windows(2).filter(|w| w[0] != w[1]).count() as u64;
            if window.is_empty() {
                if b.count != 0 {
                    findings.push(format!(
                        "column {i} bin {t}: stored count {} for an empty window",
                        b.count
                    ));
                }
                continue;
            }
            if b.count != window.len() as u64
                || b.v_min != window[0]
                || b.v_max != *window.last().unwrap()
                || u64::from(b.unique) != uniques
            {
                findings.push(format!(
                    "column {i} bin {t}: stored (h={}, v_min={}, v_max={}, u={}) vs sample (h={}, v_min={}, v_max={}, u={uniques})",
                    b.count,
                    b.v_min,
                    b.v_max,
                    b.unique,
                    window.len(),
                    window[0],
                    window.last().unwrap(),
                ));
            }
            if b.count >= m && uniques >= 2 && !is_uniform(window, lo, hi, uniques, syn.params.alpha)? {
                findings.push(format!(
                    "column {i} bin {t} [{lo}, {hi}): h={} u={uniques} fails the uniformity test",
                    window.len()
                ));
            }
        }
    }
    Ok(findings)
}
