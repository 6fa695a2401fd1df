//! CSV ingestion.

use std::path::Path;

use crate::data::series::SeriesDataset;
use crate::error::DataError;

/// Picks a CSV column either by zero-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(n) => write!(f, "{n}"),
        }
    }
}

/// Loads a univariate series from `path`.
///
/// The header row is optional: when `column` (or `timestamp_column`) names a
/// column the first row is read as a header; with index selectors the first
/// row is treated as a header only if the selected cell does not parse as a
/// number. Parse failures report the 1-based line number in the file.
pub fn load_series(
    path: impl AsRef<Path>,
    column: &ColumnSelector,
    timestamp_column: Option<&ColumnSelector>,
) -> Result<SeriesDataset, DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let raw = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: display.clone(),
        source,
    })?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::Csv {
            path: display.clone(),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        records.push((line, record));
    }
    if records.is_empty() {
        return Err(DataError::TooFewPoints {
            got: 0,
            min: crate::data::series::MIN_POINTS,
        });
    }

    let needs_header = matches!(column, ColumnSelector::Name(_))
        || matches!(timestamp_column, Some(ColumnSelector::Name(_)));
    let width = records[0].1.len();

    let resolve = |sel: &ColumnSelector| -> Result<usize, DataError> {
        match sel {
            ColumnSelector::Index(i) => {
                if *i >= width {
                    Err(DataError::ColumnOutOfRange { index: *i, width })
                } else {
                    Ok(*i)
                }
            }
            ColumnSelector::Name(name) => records[0]
                .1
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DataError::MissingColumn(name.clone())),
        }
    };

    let value_col = resolve(column)?;
    let ts_col = timestamp_column.map(resolve).transpose()?;

    // With positional selectors the file may or may not carry a header;
    // skip the first row exactly when its selected cell is not a number.
    let skip_first = needs_header
        || records[0]
            .1
            .get(value_col)
            .map(|cell| cell.parse::<f64>().is_err())
            .unwrap_or(true);
    let start = usize::from(skip_first);

    let parse_cell = |line: u64, record: &csv::StringRecord, col: usize| -> Result<f64, DataError> {
        let cell = record.get(col).ok_or(DataError::ColumnOutOfRange {
            index: col,
            width: record.len(),
        })?;
        cell.parse::<f64>().map_err(|_| DataError::NonNumeric {
            value: cell.to_string(),
            row: line,
            column: column.to_string(),
        })
    };

    let mut values = Vec::with_capacity(records.len() - start);
    let mut timestamps = ts_col.map(|_| Vec::with_capacity(records.len() - start));
    for (line, record) in &records[start..] {
        values.push(parse_cell(*line, record, value_col)?);
        if let (Some(ts), Some(col)) = (&mut timestamps, ts_col) {
            ts.push(parse_cell(*line, record, col)?);
        }
    }

    let label = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or(display);
    SeriesDataset::new(values, timestamps, label)
}
