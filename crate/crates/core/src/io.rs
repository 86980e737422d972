//! CSV input of training pairs and query values.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::TrainingData;
use crate::workflow::Dataset;

/// Reads `(x, y)` pairs from a CSV with a header naming columns `x` and `y`.
pub fn read_training_csv<R: Read>(reader: R) -> Result<TrainingData> {
    let dataset = read_dataset(reader, Some("y"))?;
    let j = match dataset.feature_names().iter().position(|n| n == "x") {
        Some(j) => j,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "expected a column named 'x'".into(),
            })
        }
    };
    TrainingData::new(
        dataset.features().iter().map(|r| r[j]).collect(),
        dataset.outcomes().to_vec(),
    )
}

pub fn read_training_csv_path(path: &Path) -> Result<TrainingData> {
    read_training_csv(std::fs::File::open(path)?)
}

/// Reads the column `name` (or the first column when there is no such
/// header) from a CSV with a header row.
pub fn read_column_csv<R: Read>(reader: R, name: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers.iter().all(String::is_empty) {
        return Err(Error::EmptySample);
    }
    let j = headers.iter().position(|h| h == name).unwrap_or(0);
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = record.get(j).ok_or_else(|| Error::Parse {
            line,
            message: format!("missing column '{}'", headers[j]),
        })?;
        let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid number '{field}'"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line,
                message: "non-finite value".into(),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(values)
}

fn read_dataset<R: Read>(mut reader: R, outcome: Option<&str>) -> Result<Dataset> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    if text.trim().is_empty() {
        return Err(Error::EmptySample);
    }
    Dataset::from_csv(text.as_bytes(), outcome)
}
