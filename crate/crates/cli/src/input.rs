//! Vector-file ingestion and comma-list flag parsing.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Read a vector file: either a JSON numeric array or whitespace- and
/// newline-separated decimals. Non-finite values are rejected with the
/// offending line and token position (1-based).
pub fn parse_vector(path: &Path) -> Result<Vec<f64>, CliError> {
    let shown = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|e| CliError::InputParse {
        path: shown.clone(),
        line: 0,
        position: 0,
        message: e.to_string(),
    })?;

    if content.trim_start().starts_with('[') {
        let entries: Vec<f64> =
            serde_json::from_str(&content).map_err(|e| CliError::InputParse {
                path: shown.clone(),
                line: e.line(),
                position: e.column(),
                message: e.to_string(),
            })?;
        if let Some(idx) = entries.iter().position(|v| !v.is_finite()) {
            return Err(CliError::InputParse {
                path: shown,
                line: 1,
                position: idx + 1,
                message: format!("non-finite value at entry {}", idx + 1),
            });
        }
        return Ok(entries);
    }

    let mut entries = Vec::new();
    for (line_idx, line) in content.lines().enumerate() {
        for (tok_idx, token) in line.split_whitespace().enumerate() {
            let value: f64 = token.parse().map_err(|_| CliError::InputParse {
                path: shown.clone(),
                line: line_idx + 1,
                position: tok_idx + 1,
                message: format!("not a number: {token:?}"),
            })?;
            if !value.is_finite() {
                return Err(CliError::InputParse {
                    path: shown,
                    line: line_idx + 1,
                    position: tok_idx + 1,
                    message: format!("non-finite value: {token:?}"),
                });
            }
            entries.push(value);
        }
    }
    if entries.is_empty() {
        return Err(CliError::InputParse {
            path: shown,
            line: 1,
            position: 1,
            message: "empty input".into(),
        });
    }
    Ok(entries)
}

/// Parse a comma-separated flag value into a list.
pub fn parse_list<T>(raw: &str, flag: &str) -> Result<Vec<T>, CliError>
where
    T: FromStr,
    T::Err: Display,
{
    let mut values = Vec::new();
    for piece in raw.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            return Err(CliError::Config(format!("{flag} contains an empty entry")));
        }
        values.push(
            piece
                .parse()
                .map_err(|e| CliError::Config(format!("{flag}: bad value {piece:?} ({e})")))?,
        );
    }
    if values.is_empty() {
        return Err(CliError::Config(format!("{flag} must not be empty")));
    }
    Ok(values)
}
