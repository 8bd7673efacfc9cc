//! Result-set comparison.
//!
//! Two results are compared as a multiset of rows unless the first query of
//! the pair carries a top-level ORDER BY, in which case the exact row
//! sequence must match. Cells compare with NULL == NULL (row matching needs
//! a total relation) and numeric cells within an absolute tolerance of 1e-9
//! to absorb cross-backend float formatting.

use sqlparser::dialect::GenericDialect;
use sqlparser::keywords::Keyword;
use sqlparser::tokenizer::{Token, Tokenizer};

use super::types::{CompareMode, ComparisonOutcome, ExecutionError, ExecutionResult, SqlValue};

pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Selects the comparison mode for a pair of queries from the first query's
/// text: ordered iff it has an ORDER BY outside any parentheses.
pub fn compare_mode_for(first_sql: &str) -> CompareMode {
    if has_top_level_order_by(first_sql) {
        CompareMode::Ordered
    } else {
        CompareMode::Multiset
    }
}

fn has_top_level_order_by(sql: &str) -> bool {
    let dialect = GenericDialect {};
    let tokens = match Tokenizer::new(&dialect, sql).tokenize() {
        Ok(t) => t,
        Err(_) => return false,
    };
    let mut depth = 0usize;
    let mut prev_order_at_top = false;
    for tok in tokens {
        match tok {
            Token::LParen => depth += 1,
            Token::RParen => depth = depth.saturating_sub(1),
            Token::Word(w) if depth == 0 => {
                if prev_order_at_top && w.keyword == Keyword::BY {
                    return true;
                }
                prev_order_at_top = w.keyword == Keyword::ORDER;
            }
            Token::Whitespace(_) => continue,
            _ => {
                if depth == 0 {
                    prev_order_at_top = false;
                }
            }
        }
    }
    false
}

/// Compares two execution outcomes. Any execution error makes the outcome
/// unequal, with the error folded into `detail`.
pub fn compare_outcomes(
    first: &Result<ExecutionResult, ExecutionError>,
    second: &Result<ExecutionResult, ExecutionError>,
    mode: CompareMode,
) -> ComparisonOutcome {
    match (first, second) {
        (Ok(a), Ok(b)) => compare_results(a, b, mode),
        (Err(e), _) => ComparisonOutcome {
            equal: false,
            mode,
            detail: Some(format!("first query failed: {e}")),
        },
        (_, Err(e)) => ComparisonOutcome {
            equal: false,
            mode,
            detail: Some(format!("second query failed: {e}")),
        },
    }
}

pub fn compare_results(
    a: &ExecutionResult,
    b: &ExecutionResult,
    mode: CompareMode,
) -> ComparisonOutcome {
    if a.rows.len() != b.rows.len() {
        return ComparisonOutcome {
            equal: false,
            mode,
            detail: Some(format!(
                "row counts differ: {} vs {}",
                a.rows.len(),
                b.rows.len()
            )),
        };
    }
    let (left, right): (Vec<&Vec<SqlValue>>, Vec<&Vec<SqlValue>>) = match mode {
        CompareMode::Ordered => (a.rows.iter().collect(), b.rows.iter().collect()),
        CompareMode::Multiset => {
            let mut l: Vec<&Vec<SqlValue>> = a.rows.iter().collect();
            let mut r: Vec<&Vec<SqlValue>> = b.rows.iter().collect();
            l.sort_by(|x, y| row_key(x).cmp(&row_key(y)));
            r.sort_by(|x, y| row_key(x).cmp(&row_key(y)));
            (l, r)
        }
    };
    for (i, (ra, rb)) in left.iter().zip(right.iter()).enumerate() {
        if !rows_equal(ra, rb) {
            return ComparisonOutcome {
                equal: false,
                mode,
                detail: Some(format!(
                    "rows differ at {} position {}: {:?} vs {:?}",
                    match mode {
                        CompareMode::Ordered => "row",
                        CompareMode::Multiset => "sorted",
                    },
                    i,
                    ra,
                    rb
                )),
            };
        }
    }
    ComparisonOutcome {
        equal: true,
        mode,
        detail: None,
    }
}

fn rows_equal(a: &[SqlValue], b: &[SqlValue]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| cells_equal(x, y))
}

/// NULL == NULL; integers and reals compare numerically within tolerance.
pub fn cells_equal(a: &SqlValue, b: &SqlValue) -> bool {
    match (a, b) {
        (SqlValue::Null, SqlValue::Null) => true,
        (SqlValue::Integer(x), SqlValue::Integer(y)) => x == y,
        (SqlValue::Text(x), SqlValue::Text(y)) => x == y,
        (SqlValue::Blob(x), SqlValue::Blob(y)) => x == y,
        (SqlValue::Real(x), SqlValue::Real(y)) => (x - y).abs() <= FLOAT_TOLERANCE,
        (SqlValue::Integer(x), SqlValue::Real(y)) | (SqlValue::Real(y), SqlValue::Integer(x)) => {
            (*x as f64 - y).abs() <= FLOAT_TOLERANCE
        }
        _ => false,
    }
}

/// Canonical sort key for a row; numerics share a key space so that an
/// INTEGER in one result can line up with an equal REAL in the other.
fn row_key(row: &[SqlValue]) -> Vec<(u8, String)> {
    row.iter().map(cell_key).collect()
}

fn cell_key(v: &SqlValue) -> (u8, String) {
    match v {
        SqlValue::Null => (0, String::new()),
        SqlValue::Integer(i) => (1, format!("{:+021.9}", *i as f64)),
        SqlValue::Real(r) => {
            let r = if *r == 0.0 { 0.0 } else { *r };
            (1, format!("{r:+021.9}"))
        }
        SqlValue::Text(t) => (2, t.clone()),
        SqlValue::Blob(b) => (3, b.iter().map(|x| format!("{x:02x}")).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_by_detection_is_top_level_only() {
        assert_eq!(compare_mode_for("SELECT a FROM t ORDER BY a"), CompareMode::Ordered);
        assert_eq!(compare_mode_for("SELECT a FROM t"), CompareMode::Multiset);
        assert_eq!(
            compare_mode_for("SELECT a FROM (SELECT a FROM t ORDER BY a)"),
            CompareMode::Multiset
        );
        assert_eq!(
            compare_mode_for("SELECT a FROM t WHERE x = 'ORDER BY'"),
            CompareMode::Multiset
        );
    }

    #[test]
    fn multiset_ignores_row_order() {
        let a = ExecutionResult {
            columns: vec!["a".into()],
            rows: vec![vec![SqlValue::Integer(1)], vec![SqlValue::Integer(2)]],
            elapsed: Default::default(),
        };
        let b = ExecutionResult {
            columns: vec!["a".into()],
            rows: vec![vec![SqlValue::Integer(2)], vec![SqlValue::Integer(1)]],
            elapsed: Default::default(),
        };
        assert!(compare_results(&a, &b, CompareMode::Multiset).equal);
        assert!(!compare_results(&a, &b, CompareMode::Ordered).equal);
    }

    #[test]
    fn null_equals_null_and_floats_have_tolerance() {
        assert!(cells_equal(&SqlValue::Null, &SqlValue::Null));
        assert!(cells_equal(&SqlValue::Real(1.0), &SqlValue::Real(1.0 + 5e-10)));
        assert!(!cells_equal(&SqlValue::Real(1.0), &SqlValue::Real(1.0 + 5e-9)));
        assert!(cells_equal(&SqlValue::Integer(2), &SqlValue::Real(2.0)));
        assert!(!cells_equal(&SqlValue::Text("1".into()), &SqlValue::Integer(1)));
    }
}
