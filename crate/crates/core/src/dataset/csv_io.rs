use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{encode_labels, FeatureTable, LabelEncoding};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub(crate) const LABEL_COLUMN: &str = "label";

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file))
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::MalformedRow {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn parse_cell(cell: &str, line: u64, column: &str) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::MalformedRow {
        line,
        message: format!("cannot parse {cell:?} in column {column:?} as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            line,
            column: column.to_owned(),
        });
    }
    Ok(v)
}

/// Loads a feature CSV with header `name_0,...,name_{d-1},label`.
///
/// Rows keep file order. Labels are encoded lexicographically.
pub fn load_feature_csv(path: impl AsRef<Path>) -> Result<(FeatureTable, LabelEncoding)> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(path, e))?,
        None => return Err(Error::EmptyFile),
    };
    let names: Vec<String> = header.iter().map(str::to_owned).collect();
    if names.len() < 2 || names.last().map(String::as_str) != Some(LABEL_COLUMN) {
        return Err(Error::MissingLabelColumn);
    }
    let feature_names = names[..names.len() - 1].to_vec();
    let mut seen = HashSet::new();
    for n in &feature_names {
        if !seen.insert(n) {
            return Err(Error::DuplicateFeature(n.clone()));
        }
    }
    let d = feature_names.len();

    let mut values = Vec::new();
    let mut label_names = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record_line(&record);
        if record.len() != d + 1 {
            return Err(Error::MalformedRow {
                line,
                message: format!("expected {} fields, found {}", d + 1, record.len()),
            });
        }
        for (cell, name) in record.iter().zip(&feature_names) {
            values.push(parse_cell(cell, line, name)?);
        }
        label_names.push(record[d].to_owned());
    }
    if label_names.is_empty() {
        return Err(Error::EmptyFile);
    }

    let encoding = encode_labels(&label_names)?;
    let labels = label_names
        .iter()
        .map(|n| encoding.id(n).expect("encoded from the same names"))
        .collect();
    let matrix = Matrix::new(label_names.len(), d, values)?;
    let table = FeatureTable::new(matrix, labels, encoding.len(), feature_names)?;
    Ok((table, encoding))
}

/// Writes `table` in the format read by [`load_feature_csv`].
///
/// Values use Rust's shortest round-trip formatting, so reloading is bit-exact.
pub fn save_feature_csv(
    table: &FeatureTable,
    encoding: &LabelEncoding,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let io = |e: csv::Error| csv_error(path, e);

    let mut header: Vec<&str> = table.feature_names().iter().map(String::as_str).collect();
    header.push(LABEL_COLUMN);
    writer.write_record(&header).map_err(io)?;

    let mut fields: Vec<String> = Vec::with_capacity(table.n_features() + 1);
    for (row, &label) in table.values().iter_rows().zip(table.labels()) {
        fields.clear();
        fields.extend(row.iter().map(|v| format!("{v:?}")));
        let name = encoding
            .name(label)
            .ok_or(Error::LabelOutOfRange {
                label,
                n_classes: encoding.len(),
            })?;
        fields.push(name.to_owned());
        writer.write_record(&fields).map_err(io)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

/// Columns picked out of a CSV by header name.
#[derive(Debug, Clone)]
pub struct NamedColumns {
    /// One row per data record, columns in the requested order. May have zero rows.
    pub values: Matrix,
    /// Raw `label` cells, when the file has a `label` column.
    pub labels: Option<Vec<String>>,
}

/// Reads only the columns named in `wanted` (in that order); every other
/// column is ignored. A header-only file yields zero rows.
pub fn read_named_columns(path: impl AsRef<Path>, wanted: &[String]) -> Result<NamedColumns> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(path, e))?,
        None => return Err(Error::EmptyFile),
    };
    let mut position: HashMap<&str, usize> = HashMap::new();
    for (i, name) in header.iter().enumerate() {
        if position.insert(name, i).is_some() {
            return Err(Error::DuplicateFeature(name.to_owned()));
        }
    }
    let columns = wanted
        .iter()
        .map(|w| {
            position
                .get(w.as_str())
                .copied()
                .ok_or_else(|| Error::MissingColumn(w.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let label_col = position.get(LABEL_COLUMN).copied();

    let mut values = Vec::new();
    let mut labels = label_col.map(|_| Vec::new());
    let mut n_rows = 0;
    for record in records {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record_line(&record);
        if record.len() != header.len() {
            return Err(Error::MalformedRow {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for (&c, name) in columns.iter().zip(wanted) {
            values.push(parse_cell(&record[c], line, name)?);
        }
        if let (Some(c), Some(labels)) = (label_col, labels.as_mut()) {
            labels.push(record[c].to_owned());
        }
        n_rows += 1;
    }
    Ok(NamedColumns {
        values: Matrix::new(n_rows, wanted.len(), values)?,
        labels,
    })
}
