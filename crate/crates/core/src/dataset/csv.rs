//! Comma-separated input with a header line.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, Trim};

use super::{Dataset, Output, Task};
use crate::{Error, Result};

/// Output column selector: header name or 0-based column index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputColumn {
    Name(String),
    Index(usize),
}

impl OutputColumn {
    /// Resolves against a header. A name that matches no header but parses
    /// as an integer is taken as an index.
    fn resolve(&self, headers: &[String]) -> Option<usize> {
        match self {
            OutputColumn::Index(i) => (*i < headers.len()).then_some(*i),
            OutputColumn::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .or_else(|| name.parse::<usize>().ok().filter(|&i| i < headers.len())),
        }
    }
}

impl std::fmt::Display for OutputColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OutputColumn::Name(s) => write!(f, "{s}"),
            OutputColumn::Index(i) => write!(f, "#{i}"),
        }
    }
}

impl From<&str> for OutputColumn {
    fn from(s: &str) -> Self {
        OutputColumn::Name(s.to_string())
    }
}

impl From<usize> for OutputColumn {
    fn from(i: usize) -> Self {
        OutputColumn::Index(i)
    }
}

/// Loads a dataset from a CSV file: header line, `,` delimiter, `.` decimal
/// point. Every column but the output column becomes a feature.
///
/// Feature cells must parse as finite reals; NaN and infinities are rejected
/// rather than imputed. In classification mode output cells are taken as
/// opaque class tokens.
pub fn load_csv(path: impl AsRef<Path>, output: &OutputColumn, task: Task) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, path, output, task)
}

/// Like [`load_csv`] over any reader; `path` is only used in error messages.
pub fn read_csv<R: Read>(reader: R, path: &Path, output: &OutputColumn, task: Task) -> Result<Dataset> {
    let parse_err = |line: usize, column: &str, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column: column.to_string(),
        reason,
    };
    let mut rdr = ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(reader);

    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, "-", e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(parse_err(1, "-", "empty table".into()));
    }
    let out_col = output
        .resolve(&headers)
        .ok_or_else(|| parse_err(1, &output.to_string(), "output column not found in header".into()))?;
    if headers.len() < 2 {
        return Err(parse_err(1, "-", "no feature columns besides the output column".into()));
    }
    let d = headers.len() - 1;

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); d];
    let mut real_out = Vec::new();
    let mut label_out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, "-", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(parse_err(
                line,
                "-",
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let mut k = 0;
        for (j, cell) in record.iter().enumerate() {
            if j == out_col {
                match task {
                    Task::Regression => real_out.push(parse_finite(cell).map_err(|r| parse_err(line, &headers[j], r))?),
                    Task::Classification => {
                        if cell.is_empty() {
                            return Err(parse_err(line, &headers[j], "empty class label".into()));
                        }
                        label_out.push(cell.to_string());
                    }
                }
            } else {
                columns[k].push(parse_finite(cell).map_err(|r| parse_err(line, &headers[j], r))?);
                k += 1;
            }
        }
    }
    if columns[0].is_empty() {
        return Err(parse_err(2, "-", "empty table: no data rows".into()));
    }

    let output = match task {
        Task::Regression => Output::Real(real_out),
        Task::Classification => Output::Labels(label_out),
    };
    let names = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != out_col)
        .map(|(_, h)| h.clone())
        .collect();
    Dataset::from_feature_rows(columns, output)?.with_feature_names(names)
}

fn parse_finite(cell: &str) -> std::result::Result<f64, String> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("non-finite value `{cell}`")),
        Err(_) => Err(format!("non-numeric value `{cell}`")),
    }
}
