//! Record emission: line-delimited JSON or CSV with a fixed column set
//! per command, so downstream plots can rely on the schema.

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CostModelArg {
    Sampling,
    Paper,
}

impl CostModelArg {
    pub fn label(self) -> &'static str {
        match self {
            CostModelArg::Sampling => "sampling",
            CostModelArg::Paper => "paper",
        }
    }

    pub fn to_model(self) -> lculab_core::CostModel {
        match self {
            CostModelArg::Sampling => lculab_core::CostModel::Sampling,
            CostModelArg::Paper => lculab_core::CostModel::Paper,
        }
    }
}

/// Append records to the output buffer, one per line. JSON preserves the
/// struct field order; CSV emits `columns` in the given order with a
/// header row.
pub fn emit_records<T: Serialize>(
    records: &[T],
    columns: &[&str],
    format: Format,
    buf: &mut Vec<u8>,
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            for record in records {
                let line = serde_json::to_string(record)
                    .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
                buf.extend_from_slice(line.as_bytes());
                buf.push(b'\n');
            }
        }
        Format::Csv => {
            buf.extend_from_slice(columns.join(",").as_bytes());
            buf.push(b'\n');
            for record in records {
                let value = serde_json::to_value(record)
                    .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
                let map = match value {
                    Value::Object(map) => map,
                    other => {
                        return Err(CliError::Io(format!("record is not an object: {other}")))
                    }
                };
                debug_assert!(
                    map.keys().all(|k| columns.contains(&k.as_str()))
                        && columns.iter().all(|c| map.contains_key(*c)),
                    "column list out of sync with record fields"
                );
                let row: Vec<String> =
                    columns.iter().map(|c| csv_cell(map.get(*c))).collect();
                buf.extend_from_slice(row.join(",").as_bytes());
                buf.push(b'\n');
            }
        }
    }
    Ok(())
}

fn csv_cell(value: Option<&Value>) -> String {
    match value {
        None | Some(Value::Null) => String::new(),
        Some(Value::Bool(b)) => b.to_string(),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::String(s)) => csv_escape(s),
        Some(Value::Array(items)) => {
            let joined: Vec<String> = items
                .iter()
                .map(|v| match v {
                    Value::Number(n) => n.to_string(),
                    Value::String(s) => s.clone(),
                    Value::Bool(b) => b.to_string(),
                    other => other.to_string(),
                })
                .collect();
            csv_escape(&joined.join(";"))
        }
        Some(Value::Object(_)) => {
            debug_assert!(false, "nested objects must be flattened before emission");
            String::new()
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render a measurement histogram as `index:count` pairs sorted by index.
pub fn histogram_string(counts: &std::collections::BTreeMap<usize, u64>) -> String {
    counts
        .iter()
        .map(|(k, v)| format!("{k}:{v}"))
        .collect::<Vec<_>>()
        .join(";")
}
