use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Dataset, FeatureMatrix};
use crate::error::{Error, Result};

/// Reads a `label,f0,...,f{d-1}` CSV. Class indices are assigned in order of
/// first appearance.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

pub(crate) fn read_csv<R: std::io::Read>(reader: R) -> Result<Dataset> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        None => return Err(Error::format("empty file")),
        Some(rec) => rec.map_err(csv_error)?,
    };
    if header.get(0).map(str::trim) != Some("label") {
        return Err(Error::format_at(1, "header must start with 'label'"));
    }
    let n_cols = header.len() - 1;
    if n_cols == 0 {
        return Err(Error::format_at(1, "header names no feature columns"));
    }

    let mut class_names: Vec<String> = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != n_cols + 1 {
            return Err(Error::format_at(
                line,
                format!("expected {} fields, found {}", n_cols + 1, rec.len()),
            ));
        }
        let row = labels.len();
        let name = rec[0].trim();
        if name.is_empty() {
            return Err(Error::format_at(line, "empty label"));
        }
        let label = match class_names.iter().position(|c| c == name) {
            Some(i) => i,
            None => {
                class_names.push(name.to_string());
                class_names.len() - 1
            }
        };
        labels.push(label as u32);
        for (col, field) in rec.iter().skip(1).enumerate() {
            let v: f32 = field.trim().parse().map_err(|_| Error::Value {
                row,
                col,
                message: format!("cannot parse '{field}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Value {
                    row,
                    col,
                    message: format!("non-finite value '{field}'"),
                });
            }
            values.push(v);
        }
    }
    if labels.is_empty() {
        return Err(Error::format("no data rows"));
    }
    let features = FeatureMatrix::new(labels.len(), n_cols, values)?;
    Dataset::new(features, labels, class_names)
}

/// Writes a dataset as CSV. Values use the shortest representation that
/// parses back to the same `f32`.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv_to(dataset, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn write_csv_to<W: Write>(dataset: &Dataset, w: &mut W) -> std::io::Result<()> {
    write!(w, "label")?;
    for c in 0..dataset.n_cols() {
        write!(w, ",f{c}")?;
    }
    writeln!(w)?;
    let fm = dataset.features();
    for (i, &label) in dataset.labels().iter().enumerate() {
        write!(w, "{}", dataset.class_names()[label as usize])?;
        for v in fm.row(i) {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn csv_error(e: ::csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    Error::Format {
        line,
        message: e.to_string(),
    }
}
