//! Line-oriented problem data files:
//!
//! ```text
//! name <string>
//! id <base-id>
//! dim <D>
//! bias <real>
//! <D shift components>
//! <D rows of D rotation entries>
//! ```
//!
//! Fields are whitespace separated; trailing blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{BaseFunction, BenchError, ProblemSpec};

pub fn load_problem_data(path: impl AsRef<Path>) -> Result<ProblemSpec, BenchError> {
    let text = std::fs::read_to_string(path)?;
    parse_problem_data(&text)
}

fn parse_err(line: usize, message: impl Into<String>) -> BenchError {
    BenchError::Parse {
        line,
        message: message.into(),
    }
}

fn keyed<'a>(lines: &[&'a str], line: usize, key: &str) -> Result<&'a str, BenchError> {
    let text = lines
        .get(line - 1)
        .ok_or_else(|| parse_err(line, format!("missing `{key}` line")))?;
    let rest = text
        .trim()
        .strip_prefix(key)
        .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
        .ok_or_else(|| parse_err(line, format!("expected `{key} <value>`")))?
        .trim();
    if rest.is_empty() {
        return Err(parse_err(line, format!("`{key}` has no value")));
    }
    Ok(rest)
}

fn reals(lines: &[&str], line: usize, count: usize, what: &str) -> Result<Vec<f64>, BenchError> {
    let text = lines
        .get(line - 1)
        .ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    let values = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("invalid number {t:?} in {what}")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if values.len() != count {
        return Err(parse_err(
            line,
            format!("{what} has {} values, expected {count}", values.len()),
        ));
    }
    Ok(values)
}

pub fn parse_problem_data(text: &str) -> Result<ProblemSpec, BenchError> {
    let mut lines: Vec<&str> = text.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    let name = keyed(&lines, 1, "name")?;
    let base: BaseFunction = keyed(&lines, 2, "id")?
        .parse()
        .map_err(|e: BenchError| parse_err(2, e.to_string()))?;
    let dim_text = keyed(&lines, 3, "dim")?;
    let dim: usize = dim_text
        .parse()
        .ok()
        .filter(|&d| d > 0)
        .ok_or_else(|| parse_err(3, format!("invalid dimension {dim_text:?}")))?;
    let bias_text = keyed(&lines, 4, "bias")?;
    let bias: f64 = bias_text
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| parse_err(4, format!("invalid bias {bias_text:?}")))?;
    let shift = reals(&lines, 5, dim, "shift vector")?;
    let mut rotation = Vec::with_capacity(dim * dim);
    for row in 0..dim {
        rotation.extend(reals(&lines, 6 + row, dim, &format!("rotation row {}", row + 1))?);
    }
    if lines.len() > 5 + dim {
        return Err(parse_err(6 + dim, "unexpected trailing content"));
    }
    ProblemSpec::new(name, base, dim)?
        .with_bias(bias)
        .with_rotation(rotation)?
        .with_shift(shift)
}

/// Serializes `spec`; a missing shift or rotation is written as zeros or the
/// identity.
pub fn write_problem_data(spec: &ProblemSpec) -> String {
    let d = spec.dimension();
    let mut out = String::new();
    let _ = writeln!(out, "name {}", spec.name);
    let _ = writeln!(out, "id {}", spec.base.id());
    let _ = writeln!(out, "dim {d}");
    let _ = writeln!(out, "bias {:e}", spec.bias);
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
    let shift = spec.shift.clone().unwrap_or_else(|| vec![0.0; d]);
    let _ = writeln!(out, "{}", join(&shift));
    let rotation = spec.rotation.clone().unwrap_or_else(|| super::identity(d));
    for row in rotation.chunks(d) {
        let _ = writeln!(out, "{}", join(row));
    }
    out
}
