//! Reversible per-column encoding into non-negative integers.
//!
//! Numeric columns are scaled by the smallest power of ten that makes every
//! cell integral and shifted so the minimum lands on zero. Categorical
//! columns are dictionary-encoded by descending frequency (ties broken
//! lexicographically), datetimes become epoch seconds, and missing cells get
//! a dedicated code one past the maximum. Histogram construction and all
//! predicate evaluation happen in this integer domain; query results are
//! decoded back at the API boundary.

use std::collections::HashMap;

use chrono::{NaiveDate, NaiveDateTime};

use crate::model::{ColumnKind, ColumnSpec, PwhError, Result};

/// Largest power-of-ten multiplier tried for decimal columns; cells with more
/// fractional digits are truncated at this precision.
pub const MAX_SCALE: i64 = 1_000_000_000;

fn parse_integer(text: &str) -> Option<i64> {
    text.trim().parse::<i64>().ok()
}

fn parse_decimal(text: &str) -> Option<f64> {
    let t = text.trim();
    if t.is_empty() || t == "." {
        return None;
    }
    if !t
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
    {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_datetime(text: &str) -> Option<i64> {
    let t = text.trim();
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(t, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(t, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp())
}

/// Fractional digits of a numeric literal as written, ignoring trailing
/// zeros, capped at the 10^9 scale limit.
fn fractional_digits(text: &str) -> u32 {
    let t = text.trim();
    let mantissa = t.split(['e', 'E']).next().unwrap_or(t);
    match mantissa.find('.') {
        Some(dot) => {
            let frac = mantissa[dot + 1..].trim_end_matches('0');
            (frac.len() as u32).min(9)
        }
        None => 0,
    }
}

fn kind_of_cells(cells: &[Option<&str>]) -> Result<ColumnKind> {
    let present: Vec<&str> = cells.iter().filter_map(|c| *c).collect();
    if present.iter().all(|t| parse_integer(t).is_some()) {
        return Ok(ColumnKind::Integer);
    }
    if present.iter().all(|t| parse_decimal(t).is_some()) {
        return Ok(ColumnKind::Decimal);
    }
    if present.iter().all(|t| parse_datetime(t).is_some()) {
        return Ok(ColumnKind::Datetime);
    }
    if present.iter().any(|t| parse_decimal(t).is_some()) {
        return Err(PwhError::Invalid("ambiguous column kind".into()));
    }
    Ok(ColumnKind::Categorical)
}

/// Pre-offset encoded value of one non-null cell under the column's kind and
/// scale. Offset subtraction happens afterwards.
fn pre_offset_value(text: &str, kind: ColumnKind, scale: i64) -> Result<i128> {
    match kind {
        ColumnKind::Integer => parse_integer(text)
            .map(i128::from)
            .ok_or_else(|| PwhError::Invalid(format!("not an integer: {text:?}"))),
        ColumnKind::Decimal => parse_decimal(text)
            .map(|x| (x * scale as f64).round() as i128)
            .ok_or_else(|| PwhError::Invalid(format!("not a number: {text:?}"))),
        ColumnKind::Datetime => parse_datetime(text)
            .map(i128::from)
            .ok_or_else(|| PwhError::Invalid(format!("not a datetime: {text:?}"))),
        ColumnKind::Categorical => Err(PwhError::Invalid(
            "categorical cells encode by rank, not arithmetic".into(),
        )),
    }
}

fn byte_depth_for(max_code: u64) -> u8 {
    if max_code <= u64::from(u8::MAX) {
        1
    } else if max_code <= u64::from(u16::MAX) {
        2
    } else if max_code <= u64::from(u32::MAX) {
        4
    } else {
        8
    }
}

/// Derives the reversible encoding for one column from its raw cells.
///
/// Kind inference tries integer, then decimal, then datetime, and falls back
/// to categorical only when no cell looks numeric; a numeric/text mix without
/// a `declared` kind is rejected. The resulting spec satisfies
/// `decode(encode(x)) = x` for every non-null cell (decimals up to the scale
/// cap) and reserves a null code iff any cell is missing.
pub fn infer_column_spec(
    column_id: usize,
    name: &str,
    cells: &[Option<&str>],
    declared: Option<ColumnKind>,
) -> Result<ColumnSpec> {
    if cells.is_empty() {
        return Err(PwhError::Invalid(format!("column {name} has no cells")));
    }
    let kind = match declared {
        Some(k) => k,
        None => kind_of_cells(cells)?,
    };
    let has_nulls = cells.iter().any(|c| c.is_none());

    let mut spec = ColumnSpec {
        column_id,
        name: name.to_string(),
        kind,
        offset: 0,
        scale: 1,
        category_ranks: vec![],
        null_code: None,
        byte_depth: 1,
    };

    let max_encoded: u64 = if kind == ColumnKind::Categorical {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for t in cells.iter().flatten() {
            *freq.entry(t).or_insert(0) += 1;
        }
        let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        spec.category_ranks = ranked.iter().map(|(t, _)| t.to_string()).collect();
        spec.category_ranks.len().saturating_sub(1) as u64
    } else {
        if kind == ColumnKind::Decimal {
            let frac = cells
                .iter()
                .flatten()
                .map(|t| fractional_digits(t))
                .max()
                .unwrap_or(0);
            spec.scale = 10i64.pow(frac).min(MAX_SCALE);
        }
        let mut min: Option<i128> = None;
        let mut max: Option<i128> = None;
        for t in cells.iter().flatten() {
            let v = pre_offset_value(t, kind, spec.scale)?;
            min = Some(min.map_or(v, |m| m.min(v)));
            max = Some(max.map_or(v, |m| m.max(v)));
        }
        spec.offset = min.unwrap_or(0) as i64;
        max.map_or(0, |m| (m - i128::from(spec.offset)) as u64)
    };

    if has_nulls {
        let null_code = if cells.iter().all(|c| c.is_none()) {
            0
        } else {
            max_encoded + 1
        };
        spec.null_code = Some(null_code);
    }
    spec.byte_depth = byte_depth_for(max_encoded.max(spec.null_code.unwrap_or(0)));
    Ok(spec)
}

/// Encodes a batch of cells under a spec inferred from a superset of them.
/// Missing cells map to the null code; the batch boundary is invisible, so
/// encoding a concatenation equals concatenating the encodings.
pub fn encode_column(cells: &[Option<&str>], spec: &ColumnSpec) -> Result<Vec<u64>> {
    let rank_of: HashMap<&str, u64> = spec
        .category_ranks
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i as u64))
        .collect();
    cells
        .iter()
        .map(|cell| match cell {
            None => spec.null_code.ok_or_else(|| {
                PwhError::Invalid(format!(
                    "missing value in column {} which reserved no null code",
                    spec.name
                ))
            }),
            Some(text) => {
                let code = if spec.kind == ColumnKind::Categorical {
                    *rank_of
                        .get(text)
                        .ok_or_else(|| PwhError::Invalid(format!("unknown category: {text:?}")))?
                } else {
                    let pre = pre_offset_value(text, spec.kind, spec.scale)?;
                    let shifted = pre - i128::from(spec.offset);
                    if shifted < 0 {
                        return Err(PwhError::Invalid(format!(
                            "value precedes declared minimum: {text:?}"
                        )));
                    }
                    shifted as u64
                };
                if spec.null_code == Some(code) {
                    return Err(PwhError::Invalid(format!(
                        "value {text:?} collides with the null code"
                    )));
                }
                Ok(code)
            }
        })
        .collect()
}

/// Transforms a predicate literal with the same arithmetic as the column
/// encoding. The result may be negative or past the observed maximum; such
/// literals simply make conditions degenerate. Unknown categorical labels
/// map to -1 for the same reason (matches nothing under `=`, everything
/// under `<>`).
pub fn transform_literal(token: &str, spec: &ColumnSpec) -> Result<i128> {
    match spec.kind {
        ColumnKind::Categorical => Ok(spec
            .category_ranks
            .iter()
            .position(|l| l == token)
            .map_or(-1, |r| r as i128)),
        ColumnKind::Datetime => {
            let epoch = parse_datetime(token)
                .or_else(|| parse_integer(token))
                .ok_or_else(|| {
                    PwhError::QueryShape(format!("literal {token:?} is not a datetime"))
                })?;
            Ok(i128::from(epoch) - i128::from(spec.offset))
        }
        ColumnKind::Integer | ColumnKind::Decimal => {
            let x = parse_decimal(token).ok_or_else(|| {
                PwhError::QueryShape(format!("literal {token:?} is not numeric"))
            })?;
            Ok((x * spec.scale as f64).round() as i128 - i128::from(spec.offset))
        }
    }
}
