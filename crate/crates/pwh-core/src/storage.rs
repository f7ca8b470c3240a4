//! Binary synopsis format.
//!
//! A synopsis serializes to one self-contained blob: a fixed header, each
//! column's 1-d bin structure, each pair's refinement stored relative to the
//! 1-d edges (only new edges, and metadata only for bins a split created),
//! then every count matrix bit-packed with a per-block choice between a dense
//! layout and a sparse one that Rice-codes the gaps between non-zero cells.
//! Deserialization restores structure and counts exactly and recomputes the
//! derived midpoints and centre bounds, so serializing the result reproduces
//! the input byte for byte.

use crate::construct::make_bin_meta;
use crate::model::{
    BinMeta, ColumnKind, ColumnSpec, Histogram1D, Histogram2D, Params, PwhError, Result, Synopsis,
};

const MAGIC: &[u8; 4] = b"PWH1";

/// MSB-first bit accumulator.
#[derive(Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_bit(&mut self, bit: bool) {
        let slot = self.bits / 8;
        if slot == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[slot] |= 1 << (7 - (self.bits % 8));
        }
        self.bits += 1;
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        for b in (0..width).rev() {
            self.push_bit((value >> b) & 1 == 1);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bits
    }

    /// The accumulated bytes, zero-padded to a byte boundary.
    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// MSB-first bit cursor over a byte slice.
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let byte = self
            .bytes
            .get(self.pos / 8)
            .ok_or_else(|| PwhError::Format("bit stream exhausted".into()))?;
        let bit = (byte >> (7 - (self.pos % 8))) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }

    pub fn bits_read(&self) -> usize {
        self.pos
    }
}

/// Rice code: the quotient `value >> k` in unary (that many ones, then a
/// zero), followed by the low `k` bits plain.
pub fn rice_encode(w: &mut BitWriter, value: u64, k: u8) {
    let q = value >> k;
    for _ in 0..q {
        w.push_bit(true);
    }
    w.push_bit(false);
    w.push_bits(value, u32::from(k));
}

pub fn rice_decode(r: &mut BitReader, k: u8) -> Result<u64> {
    let mut q = 0u64;
    while r.read_bit()? {
        q += 1;
        if q > u64::MAX >> k.max(1) {
            return Err(PwhError::Format("unary run overflows".into()));
        }
    }
    Ok((q << k) | r.read_bits(u32::from(k))?)
}

/// Bits needed to store any count up to `max`, at least one.
fn count_bit_width(max: u64) -> u8 {
    ((64 - max.leading_zeros()) as u8).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountsEncoding {
    Dense,
    Sparse { rice_k: u8 },
}

/// Picks the smaller encoding for one count matrix by exact encoded size;
/// dense wins ties. Returns the choice and the per-cell bit width.
pub fn choose_counts_encoding(counts: &[u64]) -> (CountsEncoding, u8) {
    let max = counts.iter().copied().max().unwrap_or(0);
    let ell = count_bit_width(max);
    let dense_total = 2 + (counts.len() * usize::from(ell)).div_ceil(8);

    let nonzero: Vec<usize> = counts
        .iter()
        .enumerate()
        .filter_map(|(i, &c)| (c != 0).then_some(i))
        .collect();
    let (rice_k, payload_bits) = if nonzero.is_empty() {
        (0u8, 0usize)
    } else {
        let span = *nonzero.last().unwrap() as u64 + 1;
        let mean = span / nonzero.len() as u64;
        let rice_k = if mean >= 1 { mean.ilog2() as u8 } else { 0 };
        let mut bits = 0usize;
        let mut prev: i64 = -1;
        for &p in &nonzero {
            let delta = (p as i64 - prev) as u64;
            bits += (delta >> rice_k) as usize + 1 + usize::from(rice_k) + usize::from(ell);
            prev = p as i64;
        }
        (rice_k, bits)
    };
    let sparse_total = 7 + payload_bits.div_ceil(8);

    if dense_total <= sparse_total {
        (CountsEncoding::Dense, ell)
    } else {
        (CountsEncoding::Sparse { rice_k }, ell)
    }
}

fn write_counts_block(out: &mut Vec<u8>, counts: &[u64]) {
    let (enc, ell) = choose_counts_encoding(counts);
    out.push(ell);
    match enc {
        CountsEncoding::Dense => {
            out.push(0);
            let mut w = BitWriter::new();
            for &c in counts {
                w.push_bits(c, u32::from(ell));
            }
            out.extend_from_slice(&w.into_bytes());
        }
        CountsEncoding::Sparse { rice_k } => {
            out.push(1);
            let nonzero: Vec<(usize, u64)> = counts
                .iter()
                .enumerate()
                .filter_map(|(i, &c)| (c != 0).then_some((i, c)))
                .collect();
            out.extend_from_slice(&(nonzero.len() as u32).to_le_bytes());
            out.push(rice_k);
            let mut w = BitWriter::new();
            let mut prev: i64 = -1;
            for (p, c) in nonzero {
                rice_encode(&mut w, (p as i64 - prev) as u64, rice_k);
                w.push_bits(c, u32::from(ell));
                prev = p as i64;
            }
            out.extend_from_slice(&w.into_bytes());
        }
    }
}

struct SliceReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> SliceReader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(PwhError::Format(format!("truncated {what}"))),
        }
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    /// Little-endian unsigned integer of `m` bytes.
    fn uint(&mut self, m: u8, what: &str) -> Result<u64> {
        let raw = self.take(usize::from(m), what)?;
        let mut bytes = [0u8; 8];
        bytes[..raw.len()].copy_from_slice(raw);
        Ok(u64::from_le_bytes(bytes))
    }

    fn rest(&self) -> &'a [u8] {
        &self.buf[self.pos..]
    }

    fn advance(&mut self, n: usize, what: &str) -> Result<()> {
        self.take(n, what).map(|_| ())
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

fn read_counts_block(r: &mut SliceReader, cells: usize, what: &str) -> Result<Vec<u64>> {
    let ell = r.u8(what)?;
    if ell == 0 || ell > 64 {
        return Err(PwhError::Format(format!(
            "invalid count width {ell} in {what}"
        )));
    }
    match r.u8(what)? {
        0 => {
            let payload = r.take((cells * usize::from(ell)).div_ceil(8), what)?;
            let mut br = BitReader::new(payload);
            (0..cells).map(|_| br.read_bits(u32::from(ell))).collect()
        }
        1 => {
            let theta = r.u32(what)? as usize;
            if theta > cells {
                return Err(PwhError::Format(format!(
                    "sparse block claims {theta} cells of {cells} in {what}"
                )));
            }
            let rice_k = r.u8(what)?;
            let mut counts = vec![0u64; cells];
            let mut br = BitReader::new(r.rest());
            let mut pos: i64 = -1;
            for _ in 0..theta {
                let delta =
                    rice_decode(&mut br, rice_k).map_err(|_| PwhError::Format(format!("truncated {what}")))?;
                if delta == 0 {
                    return Err(PwhError::Format(format!("zero position gap in {what}")));
                }
                pos += delta as i64;
                if pos as usize >= cells {
                    return Err(PwhError::Format(format!(
                        "count position out of range in {what}"
                    )));
                }
                counts[pos as usize] = br
                    .read_bits(u32::from(ell))
                    .map_err(|_| PwhError::Format(format!("truncated {what}")))?;
            }
            let consumed = br.bits_read().div_ceil(8);
            r.advance(consumed, what)?;
            Ok(counts)
        }
        other => Err(PwhError::Format(format!(
            "unknown counts encoding {other} in {what}"
        ))),
    }
}

fn write_uint(out: &mut Vec<u8>, v: u64, m: u8) -> Result<()> {
    if m < 8 && v >= 1u64 << (8 * u32::from(m)) {
        return Err(PwhError::Format(format!(
            "value {v} exceeds byte depth {m}"
        )));
    }
    out.extend_from_slice(&v.to_le_bytes()[..usize::from(m)]);
    Ok(())
}

fn is_original(lo: u64, hi: u64, edges_1d: &[u64]) -> bool {
    edges_1d
        .binary_search(&lo)
        .ok()
        .is_some_and(|p| edges_1d.get(p + 1) == Some(&hi))
}

/// Byte sizes of the sections of a serialized synopsis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub header: usize,
    pub structure_1d: Vec<usize>,
    pub structure_2d: Vec<usize>,
    pub counts_1d: Vec<usize>,
    pub counts_2d: Vec<usize>,
}

impl Layout {
    pub fn total(&self) -> usize {
        self.header
            + self.structure_1d.iter().sum::<usize>()
            + self.structure_2d.iter().sum::<usize>()
            + self.counts_1d.iter().sum::<usize>()
            + self.counts_2d.iter().sum::<usize>()
    }
}

pub fn serialize(syn: &Synopsis) -> Result<Vec<u8>> {
    serialize_with_layout(syn).map(|(bytes, _)| bytes)
}

pub fn serialize_with_layout(syn: &Synopsis) -> Result<(Vec<u8>, Layout)> {
    let d = syn.columns.len();
    if d == 0 || d > 255 {
        return Err(PwhError::Format(format!("{d} columns not serializable")));
    }
    if syn.hists_1d.len() != d || syn.hists_2d.len() != d * (d - 1) / 2 {
        return Err(PwhError::Format("histogram count mismatch".into()));
    }
    for spec in &syn.columns {
        if ![1, 2, 4, 8].contains(&spec.byte_depth) {
            return Err(PwhError::Format(format!(
                "byte depth {} unsupported",
                spec.byte_depth
            )));
        }
    }

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&syn.params.n_rows.to_le_bytes());
    out.extend_from_slice(&syn.params.n_sample.to_le_bytes());
    out.extend_from_slice(&syn.params.min_points.to_le_bytes());
    out.extend_from_slice(&syn.params.alpha.to_bits().to_le_bytes());
    out.push(d as u8);
    for spec in &syn.columns {
        out.push(spec.byte_depth);
    }
    let header = out.len();

    let mut structure_1d = Vec::with_capacity(d);
    for h in &syn.hists_1d {
        let start = out.len();
        let m = syn.columns[h.column].byte_depth;
        let k = h.k();
        if k == 0 || k > usize::from(u16::MAX) {
            return Err(PwhError::Format(format!("column {} has {k} bins", h.column)));
        }
        if h.edges[0] != 0 {
            return Err(PwhError::Format("first edge must be zero".into()));
        }
        out.extend_from_slice(&(k as u16).to_le_bytes());
        for &e in &h.edges[1..] {
            write_uint(&mut out, e, m)?;
        }
        for b in &h.bins {
            write_uint(&mut out, b.v_min, m)?;
        }
        for b in &h.bins {
            write_uint(&mut out, b.v_max, m)?;
        }
        for b in &h.bins {
            out.extend_from_slice(&b.unique.to_le_bytes());
        }
        structure_1d.push(out.len() - start);
    }

    let mut structure_2d = Vec::with_capacity(syn.hists_2d.len());
    for h2 in &syn.hists_2d {
        let start = out.len();
        write_pair_dim(
            &mut out,
            &h2.edges_row,
            &h2.meta_row,
            &syn.hists_1d[h2.col_row],
            syn.columns[h2.col_row].byte_depth,
        )?;
        write_pair_dim(
            &mut out,
            &h2.edges_col,
            &h2.meta_col,
            &syn.hists_1d[h2.col_col],
            syn.columns[h2.col_col].byte_depth,
        )?;
        structure_2d.push(out.len() - start);
    }

    let mut counts_1d = Vec::with_capacity(d);
    for h in &syn.hists_1d {
        let start = out.len();
        let counts: Vec<u64> = h.bins.iter().map(|b| b.count).collect();
        write_counts_block(&mut out, &counts);
        counts_1d.push(out.len() - start);
    }
    let mut counts_2d = Vec::with_capacity(syn.hists_2d.len());
    for h2 in &syn.hists_2d {
        let start = out.len();
        write_counts_block(&mut out, &h2.counts);
        counts_2d.push(out.len() - start);
    }

    Ok((
        out,
        Layout {
            header,
            structure_1d,
            structure_2d,
            counts_1d,
            counts_2d,
        },
    ))
}

fn write_pair_dim(
    out: &mut Vec<u8>,
    edges_2d: &[u64],
    meta: &[BinMeta],
    hist1d: &Histogram1D,
    m: u8,
) -> Result<()> {
    let new_edges: Vec<u64> = edges_2d
        .iter()
        .copied()
        .filter(|e| hist1d.edges.binary_search(e).is_err())
        .collect();
    if new_edges.len() > usize::from(u16::MAX) {
        return Err(PwhError::Format("too many refinement edges".into()));
    }
    out.extend_from_slice(&(new_edges.len() as u16).to_le_bytes());
    for &e in &new_edges {
        write_uint(out, e, m)?;
    }
    for (t, b) in meta.iter().enumerate() {
        if !is_original(edges_2d[t], edges_2d[t + 1], &hist1d.edges) {
            write_uint(out, b.v_min, m)?;
            write_uint(out, b.v_max, m)?;
            out.extend_from_slice(&b.unique.to_le_bytes());
        }
    }
    Ok(())
}

struct Raw1D {
    edges: Vec<u64>,
    v_mins: Vec<u64>,
    v_maxs: Vec<u64>,
    uniques: Vec<u32>,
}

struct RawDim {
    edges: Vec<u64>,
    /// One entry per refined bin: `None` inherits the matching 1-d bin.
    triples: Vec<Option<(u64, u64, u32)>>,
}

fn read_pair_dim(r: &mut SliceReader, edges_1d: &[u64], m: u8, what: &str) -> Result<RawDim> {
    let n_new = r.u16(what)? as usize;
    let top = *edges_1d.last().unwrap();
    let mut edges: Vec<u64> = edges_1d.to_vec();
    for _ in 0..n_new {
        let e = r.uint(m, what)?;
        if e == 0 || e >= top || edges_1d.binary_search(&e).is_ok() {
            return Err(PwhError::Format(format!("invalid refinement edge in {what}")));
        }
        edges.push(e);
    }
    edges.sort_unstable();
    edges.dedup();
    if edges.len() != edges_1d.len() + n_new {
        return Err(PwhError::Format(format!("duplicate refinement edge in {what}")));
    }
    let mut triples = Vec::with_capacity(edges.len() - 1);
    for t in 0..edges.len() - 1 {
        if is_original(edges[t], edges[t + 1], edges_1d) {
            triples.push(None);
        } else {
            let v_min = r.uint(m, what)?;
            let v_max = r.uint(m, what)?;
            let unique = r.u32(what)?;
            if v_min > v_max {
                return Err(PwhError::Format(format!("inverted bin extrema in {what}")));
            }
            triples.push(Some((v_min, v_max, unique)));
        }
    }
    Ok(RawDim { edges, triples })
}

fn assemble_dim_meta(
    raw: &RawDim,
    raw1: &Raw1D,
    marginals: &[u64],
    min_points: u64,
    alpha: f64,
) -> Result<Vec<BinMeta>> {
    let mut out = Vec::with_capacity(raw.triples.len());
    for (t, triple) in raw.triples.iter().enumerate() {
        let (v_min, v_max, unique) = match triple {
            Some(t) => *t,
            None => {
                let p = raw1.edges.binary_search(&raw.edges[t]).unwrap();
                (raw1.v_mins[p], raw1.v_maxs[p], raw1.uniques[p])
            }
        };
        out.push(make_bin_meta(
            v_min,
            v_max,
            u64::from(unique),
            marginals[t],
            min_points,
            alpha,
        )?);
    }
    Ok(out)
}

pub fn deserialize(bytes: &[u8]) -> Result<Synopsis> {
    let mut r = SliceReader::new(bytes);
    if r.take(4, "header")? != MAGIC {
        return Err(PwhError::Format("bad magic".into()));
    }
    let n_rows = r.u64("header")?;
    let n_sample = r.u64("header")?;
    let min_points = r.u32("header")?;
    let alpha = f64::from_bits(r.u64("header")?);
    let d = usize::from(r.u8("header")?);
    if d == 0 {
        return Err(PwhError::Format("zero columns".into()));
    }
    let mut depths = Vec::with_capacity(d);
    for _ in 0..d {
        let m = r.u8("header")?;
        if ![1, 2, 4, 8].contains(&m) {
            return Err(PwhError::Format(format!("byte depth {m} unsupported")));
        }
        depths.push(m);
    }
    let params = Params::new(n_rows, n_sample, min_points, alpha, d)
        .map_err(|e| PwhError::Format(format!("invalid parameters: {e}")))?;

    let mut raws = Vec::with_capacity(d);
    for i in 0..d {
        let what = format!("column {i} structure");
        let k = r.u16(&what)? as usize;
        if k == 0 {
            return Err(PwhError::Format(format!("column {i} has no bins")));
        }
        let mut edges = Vec::with_capacity(k + 1);
        edges.push(0u64);
        for _ in 0..k {
            edges.push(r.uint(depths[i], &what)?);
        }
        if !edges.windows(2).all(|w| w[0] < w[1]) {
            return Err(PwhError::Format(format!("edges not increasing in {what}")));
        }
        let mut v_mins = Vec::with_capacity(k);
        for _ in 0..k {
            v_mins.push(r.uint(depths[i], &what)?);
        }
        let mut v_maxs = Vec::with_capacity(k);
        for _ in 0..k {
            v_maxs.push(r.uint(depths[i], &what)?);
        }
        let mut uniques = Vec::with_capacity(k);
        for _ in 0..k {
            uniques.push(r.u32(&what)?);
        }
        if v_mins.iter().zip(&v_maxs).any(|(a, b)| a > b) {
            return Err(PwhError::Format(format!("inverted bin extrema in {what}")));
        }
        raws.push(Raw1D {
            edges,
            v_mins,
            v_maxs,
            uniques,
        });
    }

    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
        .collect();
    let mut raw_dims = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let row = read_pair_dim(
            &mut r,
            &raws[i].edges,
            depths[i],
            &format!("pair ({i}, {j}) row dimension"),
        )?;
        let col = read_pair_dim(
            &mut r,
            &raws[j].edges,
            depths[j],
            &format!("pair ({i}, {j}) column dimension"),
        )?;
        raw_dims.push((row, col));
    }

    let mut counts_1d = Vec::with_capacity(d);
    for (i, raw) in raws.iter().enumerate() {
        counts_1d.push(read_counts_block(
            &mut r,
            raw.edges.len() - 1,
            &format!("column {i} counts"),
        )?);
    }
    let mut counts_2d = Vec::with_capacity(pairs.len());
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let cells = (raw_dims[p].0.edges.len() - 1) * (raw_dims[p].1.edges.len() - 1);
        counts_2d.push(read_counts_block(
            &mut r,
            cells,
            &format!("pair ({i}, {j}) counts"),
        )?);
    }
    if r.remaining() != 0 {
        return Err(PwhError::Format(format!(
            "{} trailing bytes",
            r.remaining()
        )));
    }

    let m = u64::from(min_points);
    let mut hists_1d = Vec::with_capacity(d);
    for (i, raw) in raws.iter().enumerate() {
        let k = raw.edges.len() - 1;
        let mut bins = Vec::with_capacity(k);
        for t in 0..k {
            bins.push(make_bin_meta(
                raw.v_mins[t],
                raw.v_maxs[t],
                u64::from(raw.uniques[t]),
                counts_1d[i][t],
                m,
                alpha,
            )?);
        }
        hists_1d.push(Histogram1D {
            column: i,
            edges: raw.edges.clone(),
            bins,
        });
    }

    let mut hists_2d = Vec::with_capacity(pairs.len());
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let (row, col) = &raw_dims[p];
        let k_r = row.edges.len() - 1;
        let k_c = col.edges.len() - 1;
        let counts = &counts_2d[p];
        let row_marginals: Vec<u64> = (0..k_r)
            .map(|r| counts[r * k_c..(r + 1) * k_c].iter().sum())
            .collect();
        let col_marginals: Vec<u64> = (0..k_c)
            .map(|c| (0..k_r).map(|r| counts[r * k_c + c]).sum())
            .collect();
        hists_2d.push(Histogram2D {
            col_row: i,
            col_col: j,
            edges_row: row.edges.clone(),
            edges_col: col.edges.clone(),
            counts: counts.clone(),
            meta_row: assemble_dim_meta(row, &raws[i], &row_marginals, m, alpha)?,
            meta_col: assemble_dim_meta(col, &raws[j], &col_marginals, m, alpha)?,
        });
    }

    let columns = depths
        .iter()
        .enumerate()
        .map(|(i, &depth)| ColumnSpec {
            column_id: i,
            name: format!("col{i}"),
            kind: ColumnKind::Integer,
            offset: 0,
            scale: 1,
            category_ranks: vec![],
            null_code: None,
            byte_depth: depth,
        })
        .collect();

    Ok(Synopsis {
        params,
        columns,
        hists_1d,
        hists_2d,
    })
}

/// Closed-form bound on the serialized size, computable from bin counts and
/// byte depths alone. The double sums run over ordered column pairs with the
/// diagonal standing in for the 1-d blocks, so each pair's budget is counted
/// once per direction; the slack covers block headers and the split-bin
/// metadata overhead.
pub fn size_bound(syn: &Synopsis) -> u64 {
    let d = syn.columns.len();
    let dim_bins = |i: usize, j: usize| -> u64 {
        if i == j {
            return syn.hists_1d[i].k() as u64;
        }
        let h2 = syn.hist2d(i, j).expect("pair histogram");
        if h2.col_row == i {
            h2.k_rows() as u64
        } else {
            h2.k_cols() as u64
        }
    };

    let mut total = 29 + d as u64 + 4 * (d as u64) * (d as u64);
    for i in 0..d {
        let m = u64::from(syn.columns[i].byte_depth);
        let k_i = syn.hists_1d[i].k() as u64;
        let sum_k: u64 = (0..d).map(|j| dim_bins(i, j)).sum();
        total += (3 * m + 4) * (sum_k - (d as u64 - 1) * k_i);
    }
    for i in 0..d {
        for j in 0..d {
            let ell = if i == j {
                count_bit_width(syn.hists_1d[i].bins.iter().map(|b| b.count).max().unwrap_or(0))
            } else {
                count_bit_width(
                    syn.hist2d(i, j)
                        .expect("pair histogram")
                        .counts
                        .iter()
                        .copied()
                        .max()
                        .unwrap_or(0),
                )
            };
            total += (dim_bins(i, j) * dim_bins(j, i) * u64::from(ell)).div_ceil(8);
        }
    }
    total
}
