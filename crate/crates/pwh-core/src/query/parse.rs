//! SQL parsing for the supported query shape:
//!
//! ```sql
//! SELECT agg(column | *) FROM table
//!   [WHERE cond [AND|OR cond]... with parentheses]
//!   [GROUP BY column] [;]
//! ```
//!
//! Conditions compare a column against a literal with `< > <= >= = != <>`,
//! or test nullness (`col = NULL`, `col <> NULL`, `col IS [NOT] NULL`).
//! Literals are numbers, single-quoted strings (`''` escapes a quote), or
//! `NULL`. Literals transform into the encoded domain during parsing, so the
//! plan is directly executable. The table name is not interpreted.

use crate::model::{
    Aggregation, CmpOp, Condition, Literal, PredNode, PwhError, QueryPlan, Result, Synopsis,
};
use crate::preprocess::transform_literal;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Lp,
    Rp,
    Star,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    Semi,
}

fn shape_err(msg: impl Into<String>) -> PwhError {
    PwhError::QueryShape(msg.into())
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                toks.push(Tok::Lp);
            }
            ')' => {
                chars.next();
                toks.push(Tok::Rp);
            }
            '*' => {
                chars.next();
                toks.push(Tok::Star);
            }
            ';' => {
                chars.next();
                toks.push(Tok::Semi);
            }
            ',' => return Err(shape_err("multiple select items are not supported")),
            '=' => {
                chars.next();
                toks.push(Tok::Eq);
            }
            '!' => {
                chars.next();
                if chars.next_if_eq(&'=').is_none() {
                    return Err(shape_err("expected != "));
                }
                toks.push(Tok::Ne);
            }
            '<' => {
                chars.next();
                if chars.next_if_eq(&'=').is_some() {
                    toks.push(Tok::Le);
                } else if chars.next_if_eq(&'>').is_some() {
                    toks.push(Tok::Ne);
                } else {
                    toks.push(Tok::Lt);
                }
            }
            '>' => {
                chars.next();
                if chars.next_if_eq(&'=').is_some() {
                    toks.push(Tok::Ge);
                } else {
                    toks.push(Tok::Gt);
                }
            }
            '\'' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('\'') => {
                            if chars.next_if_eq(&'\'').is_some() {
                                s.push('\'');
                            } else {
                                break;
                            }
                        }
                        Some(c) => s.push(c),
                        None => return Err(shape_err("unterminated string literal")),
                    }
                }
                toks.push(Tok::Str(s));
            }
            c if c.is_ascii_digit() || c == '-' || c == '.' => {
                let mut s = String::new();
                if c == '-' {
                    s.push(c);
                    chars.next();
                    if !chars.peek().is_some_and(|c| c.is_ascii_digit() || *c == '.') {
                        return Err(shape_err("dangling minus sign"));
                    }
                }
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' {
                        s.push(c);
                        chars.next();
                    } else if (c == '-' || c == '+') && s.ends_with(['e', 'E']) {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Number(s));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Ident(s));
            }
            other => return Err(shape_err(format!("unexpected character {other:?}"))),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    syn: &'a Synopsis,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(shape_err(format!("expected {kw}")))
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(shape_err(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => Err(shape_err(format!("expected {what}"))),
        }
    }

    fn column(&mut self) -> Result<usize> {
        let name = self.ident("a column name")?;
        self.syn
            .column_by_name(&name)
            .ok_or(PwhError::UnknownColumn(name))
    }

    fn or_expr(&mut self) -> Result<PredNode> {
        let mut parts = vec![self.and_expr()?];
        while self.eat_keyword("OR") {
            parts.push(self.and_expr()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            PredNode::Or(parts)
        })
    }

    fn and_expr(&mut self) -> Result<PredNode> {
        let mut parts = vec![self.primary()?];
        while self.eat_keyword("AND") {
            parts.push(self.primary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            PredNode::And(parts)
        })
    }

    fn primary(&mut self) -> Result<PredNode> {
        if self.peek() == Some(&Tok::Lp) {
            self.pos += 1;
            let node = self.or_expr()?;
            self.expect(Tok::Rp, ")")?;
            return Ok(node);
        }
        self.condition().map(PredNode::Leaf)
    }

    fn condition(&mut self) -> Result<Condition> {
        let column = self.column()?;
        if self.eat_keyword("IS") {
            let op = if self.eat_keyword("NOT") { CmpOp::Ne } else { CmpOp::Eq };
            self.expect_keyword("NULL")?;
            return Ok(Condition {
                column,
                op,
                literal: Literal::Null,
            });
        }
        let op = match self.next() {
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::Gt) => CmpOp::Gt,
            Some(Tok::Le) => CmpOp::Le,
            Some(Tok::Ge) => CmpOp::Ge,
            Some(Tok::Eq) => CmpOp::Eq,
            Some(Tok::Ne) => CmpOp::Ne,
            _ => return Err(shape_err("expected a comparison operator")),
        };
        let literal = match self.next() {
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("NULL") => {
                if !matches!(op, CmpOp::Eq | CmpOp::Ne) {
                    return Err(shape_err("NULL only supports = and <>"));
                }
                Literal::Null
            }
            Some(Tok::Number(s)) | Some(Tok::Str(s)) => {
                Literal::Value(transform_literal(&s, &self.syn.columns[column])?)
            }
            _ => return Err(shape_err("expected a literal")),
        };
        Ok(Condition {
            column,
            op,
            literal,
        })
    }
}

/// Parses a query against the synopsis's columns into an executable plan.
pub fn parse_query(text: &str, syn: &Synopsis) -> Result<QueryPlan> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        syn,
    };
    p.expect_keyword("SELECT")?;
    let agg_name = p.ident("an aggregate")?;
    let aggregation = match agg_name.to_ascii_uppercase().as_str() {
        "COUNT" => Aggregation::Count,
        "SUM" => Aggregation::Sum,
        "AVG" => Aggregation::Avg,
        "MIN" => Aggregation::Min,
        "MAX" => Aggregation::Max,
        "MEDIAN" => Aggregation::Median,
        "VAR" => Aggregation::Var,
        other => return Err(shape_err(format!("aggregate {other} is not supported"))),
    };
    p.expect(Tok::Lp, "(")?;
    let agg_column = if p.peek() == Some(&Tok::Star) {
        if aggregation != Aggregation::Count {
            return Err(shape_err(format!("{}(*) is not supported", aggregation.name())));
        }
        p.pos += 1;
        None
    } else {
        Some(p.column()?)
    };
    p.expect(Tok::Rp, ")")?;
    p.expect_keyword("FROM")?;
    p.ident("a table name")?;

    let predicate = if p.eat_keyword("WHERE") {
        Some(p.or_expr()?)
    } else {
        None
    };

    let group_by = if p.eat_keyword("GROUP") {
        p.expect_keyword("BY")?;
        Some(p.column()?)
    } else {
        None
    };

    if p.peek() == Some(&Tok::Semi) {
        p.pos += 1;
    }
    if let Some(t) = p.peek() {
        return Err(shape_err(format!("trailing input at {t:?}")));
    }
    Ok(QueryPlan {
        aggregation,
        agg_column,
        predicate,
        group_by,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ColumnKind, ColumnSpec, Params};

    fn test_synopsis() -> Synopsis {
        let mk = |id: usize, name: &str, kind: ColumnKind| ColumnSpec {
            column_id: id,
            name: name.into(),
            kind,
            offset: if kind == ColumnKind::Decimal { 250 } else { 0 },
            scale: if kind == ColumnKind::Decimal { 10 } else { 1 },
            category_ranks: if kind == ColumnKind::Categorical {
                vec!["NK".into(), "AA".into(), "B6".into()]
            } else {
                vec![]
            },
            null_code: None,
            byte_depth: 4,
        };
        Synopsis {
            params: Params::new(100, 100, 10, 0.001, 3).unwrap(),
            columns: vec![
                mk(0, "distance", ColumnKind::Integer),
                mk(1, "delay", ColumnKind::Decimal),
                mk(2, "carrier", ColumnKind::Categorical),
            ],
            hists_1d: vec![],
            hists_2d: vec![],
        }
    }

    #[test]
    fn parses_a_full_query() {
        let syn = test_synopsis();
        let plan = parse_query(
            "SELECT AVG(delay) FROM flights WHERE distance > 150 AND (carrier = 'AA' OR carrier = 'B6');",
            &syn,
        )
        .unwrap();
        assert_eq!(plan.aggregation, Aggregation::Avg);
        assert_eq!(plan.agg_column, Some(1));
        let PredNode::And(parts) = plan.predicate.unwrap() else {
            panic!("expected a conjunction")
        };
        assert_eq!(parts.len(), 2);
        assert_eq!(
            parts[0],
            PredNode::Leaf(Condition {
                column: 0,
                op: CmpOp::Gt,
                literal: Literal::Value(150),
            })
        );
        let PredNode::Or(alts) = &parts[1] else {
            panic!("expected a disjunction")
        };
        assert_eq!(
            alts[0],
            PredNode::Leaf(Condition {
                column: 2,
                op: CmpOp::Eq,
                literal: Literal::Value(1),
            })
        );
    }

    #[test]
    fn count_star_has_no_aggregate_column() {
        let syn = test_synopsis();
        let plan = parse_query("SELECT COUNT(*) FROM t", &syn).unwrap();
        assert_eq!(plan.aggregation, Aggregation::Count);
        assert_eq!(plan.agg_column, None);
        assert!(plan.predicate.is_none());
    }

    #[test]
    fn star_outside_count_is_rejected() {
        let syn = test_synopsis();
        let err = parse_query("SELECT SUM(*) FROM t", &syn).unwrap_err();
        assert!(matches!(err, PwhError::QueryShape(_)), "{err}");
    }

    #[test]
    fn literals_transform_into_the_encoded_domain() {
        let syn = test_synopsis();
        // 90.5 scales by 10 and shifts by the offset 250.
        let plan = parse_query("SELECT COUNT(*) FROM t WHERE delay <= 90.5", &syn).unwrap();
        let PredNode::Leaf(c) = plan.predicate.unwrap() else {
            panic!()
        };
        assert_eq!(c.literal, Literal::Value(655));
        assert_eq!(c.op, CmpOp::Le);
    }

    #[test]
    fn unknown_categories_become_unmatchable() {
        let syn = test_synopsis();
        let plan = parse_query("SELECT COUNT(*) FROM t WHERE carrier <> 'ZZ'", &syn).unwrap();
        let PredNode::Leaf(c) = plan.predicate.unwrap() else {
            panic!()
        };
        assert_eq!(c.literal, Literal::Value(-1));
    }

    #[test]
    fn bare_numbers_on_categorical_columns_match_as_labels() {
        let mut syn = test_synopsis();
        syn.columns[2].category_ranks = vec!["7".into(), "11".into()];
        let plan = parse_query("SELECT COUNT(*) FROM t WHERE carrier = 11", &syn).unwrap();
        let PredNode::Leaf(c) = plan.predicate.unwrap() else {
            panic!()
        };
        assert_eq!(c.literal, Literal::Value(1));
    }

    #[test]
    fn null_checks_parse_in_both_spellings() {
        let syn = test_synopsis();
        for (text, op) in [
            ("SELECT COUNT(*) FROM t WHERE delay = NULL", CmpOp::Eq),
            ("SELECT COUNT(*) FROM t WHERE delay <> NULL", CmpOp::Ne),
            ("SELECT COUNT(*) FROM t WHERE delay IS NULL", CmpOp::Eq),
            ("SELECT COUNT(*) FROM t WHERE delay IS NOT NULL", CmpOp::Ne),
        ] {
            let plan = parse_query(text, &syn).unwrap();
            let PredNode::Leaf(c) = plan.predicate.unwrap() else {
                panic!()
            };
            assert_eq!((c.op, c.literal), (op, Literal::Null), "{text}");
        }
    }

    #[test]
    fn null_with_an_ordering_operator_is_rejected() {
        let syn = test_synopsis();
        let err = parse_query("SELECT COUNT(*) FROM t WHERE delay < NULL", &syn).unwrap_err();
        assert!(matches!(err, PwhError::QueryShape(_)), "{err}");
    }

    #[test]
    fn and_binds_tighter_than_or() {
        let syn = test_synopsis();
        let plan = parse_query(
            "SELECT COUNT(*) FROM t WHERE distance < 100 OR distance > 200 AND delay = 5",
            &syn,
        )
        .unwrap();
        let PredNode::Or(parts) = plan.predicate.unwrap() else {
            panic!("OR must be the root")
        };
        assert_eq!(parts.len(), 2);
        assert!(matches!(parts[0], PredNode::Leaf(_)));
        assert!(matches!(&parts[1], PredNode::And(p) if p.len() == 2));
    }

    #[test]
    fn group_by_resolves_the_column() {
        let syn = test_synopsis();
        let plan =
            parse_query("SELECT COUNT(*) FROM t GROUP BY carrier", &syn).unwrap();
        assert_eq!(plan.group_by, Some(2));
    }

    #[test]
    fn unknown_column_is_its_own_error() {
        let syn = test_synopsis();
        let err = parse_query("SELECT COUNT(nope) FROM t", &syn).unwrap_err();
        assert!(matches!(err, PwhError::UnknownColumn(ref c) if c == "nope"), "{err}");
    }

    #[test]
    fn unsupported_aggregates_are_shape_errors() {
        let syn = test_synopsis();
        for text in [
            "SELECT MODE(distance) FROM t",
            "SELECT STDDEV(distance) FROM t",
        ] {
            let err = parse_query(text, &syn).unwrap_err();
            assert!(matches!(err, PwhError::QueryShape(_)), "{text}: {err}");
        }
    }

    #[test]
    fn string_literal_on_a_numeric_column_is_a_shape_error() {
        let syn = test_synopsis();
        let err = parse_query("SELECT COUNT(*) FROM t WHERE distance = 'far'", &syn).unwrap_err();
        assert!(matches!(err, PwhError::QueryShape(_)), "{err}");
    }

    #[test]
    fn quoted_escapes_and_trailing_garbage() {
        let syn = test_synopsis();
        let mut syn2 = syn.clone();
        syn2.columns[2].category_ranks = vec!["o'hare".into()];
        let plan = parse_query("SELECT COUNT(*) FROM t WHERE carrier = 'o''hare'", &syn2).unwrap();
        let PredNode::Leaf(c) = plan.predicate.unwrap() else {
            panic!()
        };
        assert_eq!(c.literal, Literal::Value(0));

        let err = parse_query("SELECT COUNT(*) FROM t; DROP", &syn).unwrap_err();
        assert!(matches!(err, PwhError::QueryShape(_)), "{err}");
    }

    #[test]
    fn negative_literals_parse() {
        let syn = test_synopsis();
        let plan = parse_query("SELECT COUNT(*) FROM t WHERE delay > -12.5", &syn).unwrap();
        let PredNode::Leaf(c) = plan.predicate.unwrap() else {
            panic!()
        };
        assert_eq!(c.literal, Literal::Value(-125 - 250));
    }
}
