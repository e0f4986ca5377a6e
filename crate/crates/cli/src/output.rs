use std::fmt;
use std::fs;

use serde::Serialize;
use serde_json::Value;

use crate::{Common, Format, EXIT_CHECK_FAILED, EXIT_DEGENERATE, EXIT_USAGE};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Degenerate(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Degenerate(_) => EXIT_DEGENERATE,
            Self::Failed(_) => EXIT_CHECK_FAILED,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Degenerate(m) | Self::Failed(m) => f.write_str(m),
        }
    }
}

impl From<invspan::Error> for CliError {
    fn from(e: invspan::Error) -> Self {
        use invspan::Error as E;
        match e {
            E::Degenerate(_) | E::EmptyInput | E::NonFinite => Self::Degenerate(e.to_string()),
            E::InvarianceViolation(_) | E::NotOrthogonal(_) | E::NotAntisymmetric(_) => Self::Failed(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// CSV of a list of flat JSON objects, columns in key order of the first.
pub fn records_csv(records: &[Value]) -> CliResult<String> {
    let Some(Value::Object(first)) = records.first() else {
        return Err(CliError::Usage("nothing to write as CSV".into()));
    };
    let keys: Vec<&String> = first.keys().collect();
    let mut s = keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(",");
    s.push('\n');
    for r in records {
        let row: Vec<String> = keys.iter().map(|k| r.get(k.as_str()).map(scalar).unwrap_or_default()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    Ok(s)
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Writes `json` (or `csv`, when requested) to `--out` or stdout.
pub fn emit<T: Serialize>(common: &Common, json: &T, csv: impl FnOnce() -> CliResult<String>) -> CliResult<()> {
    let text = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(json).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => csv()?,
    };
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
