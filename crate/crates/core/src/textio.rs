//! Shared helpers for the plain-text formats.

use crate::error::{Error, Result};

/// Shortest decimal that round-trips to the same `f64`, always with a
/// fractional part or exponent (`1.0`, `0.1`, `1e-7`).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// A whitespace-separated token with its 1-based column.
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub column: usize,
}

/// Splits a line into tokens, skipping blank lines and `#` comments.
/// Returns `None` when the line carries no content.
pub(crate) fn tokens(line: &str) -> Option<Vec<Token<'_>>> {
    let content = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in content.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &content[s..i],
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &content[s..],
            column: s + 1,
        });
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

pub(crate) fn parse_f64(tok: &Token<'_>, line: usize) -> Result<f64> {
    let v: f64 = tok
        .text
        .parse()
        .map_err(|_| Error::parse(line, tok.column, format!("invalid number {:?}", tok.text)))?;
    if !v.is_finite() {
        return Err(Error::parse(line, tok.column, "number is not finite"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_shortest_round_trip() {
        assert_eq!(fmt_f64(1.0), "1.0");
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(0.8), "0.8");
        assert_eq!(fmt_f64(1.0 - 2.0 * 0.1), "0.8");
        for x in [1.0 / 3.0, 1e-300, -2.5e17, 0.00052] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn tokenizer_reports_columns() {
        let t = tokens("  ZZ   1.5 # note").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].text, t[0].column), ("ZZ", 3));
        assert_eq!((t[1].text, t[1].column), ("1.5", 8));
        assert!(tokens("   # only a comment").is_none());
        assert!(tokens("").is_none());
    }
}
