//! Touch files: one exploration per file.
//!
//! ```text
//! # comment
//! dims 14 6
//! x y z v_1 v_2 ... v_84
//! ```
//!
//! Pressures are row-major. A file without a `dims` header is read as 14×6.

use super::types::{Exploration, TactileFrame, TouchSample, DEFAULT_COLS, DEFAULT_ROWS};
use crate::error::{Error, Result};
use crate::numfmt::{parse_f64, push_joined};

pub fn parse_exploration(object_id: &str, text: &str) -> Result<Exploration> {
    let mut dims: Option<(usize, usize)> = None;
    let mut samples = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        if line.starts_with("dims") {
            if dims.is_some() || !samples.is_empty() {
                return Err(Error::parse(line_no, "dims header must appear once, before data"));
            }
            tokens.next();
            let rows = parse_dim(tokens.next(), line_no)?;
            let cols = parse_dim(tokens.next(), line_no)?;
            if tokens.next().is_some() {
                return Err(Error::parse(line_no, "dims header takes exactly two values"));
            }
            dims = Some((rows, cols));
            continue;
        }

        let (rows, cols) = *dims.get_or_insert((DEFAULT_ROWS, DEFAULT_COLS));
        let expected = 3 + rows * cols;
        let values = tokens
            .map(|t| parse_f64(t, line_no))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != expected {
            return Err(Error::parse(
                line_no,
                format!(
                    "expected {expected} fields (x y z + {} pressures), found {}",
                    rows * cols,
                    values.len()
                ),
            ));
        }
        if let Some(v) = values[3..].iter().find(|v| **v < 0.0) {
            return Err(Error::parse(line_no, format!("negative pressure {v}")));
        }
        let frame = TactileFrame::new(rows, cols, values[3..].to_vec())
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
        let sample = TouchSample::new([values[0], values[1], values[2]], frame)
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
        samples.push(sample);
    }

    Exploration::new(object_id, samples)
}

fn parse_dim(token: Option<&str>, line: usize) -> Result<usize> {
    let t = token.ok_or_else(|| Error::parse(line, "dims header needs rows and cols"))?;
    match t.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(Error::parse(line, format!("'{t}' is not a positive integer"))),
    }
}

/// Canonical form: `dims` header then one line per sample, numbers in their
/// shortest round-trip decimal form.
pub fn serialize_exploration(e: &Exploration) -> String {
    let (rows, cols) = e.frame_dims();
    let mut out = format!("dims {rows} {cols}\n");
    for s in e.samples() {
        push_joined(
            &mut out,
            s.position.iter().chain(s.frame.pressures()).copied(),
        );
        out.push('\n');
    }
    out
}
