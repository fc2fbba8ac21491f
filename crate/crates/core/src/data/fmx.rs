//! FMX1: little-endian binary interchange format for labelled feature
//! matrices.
//!
//! ```text
//! offset  size         field
//! 0       4            magic "FMX1"
//! 4       4            u32 version (= 1)
//! 8       8            u64 n_rows
//! 16      8            u64 n_cols
//! 24      4            u32 n_classes
//! 28      4*n_rows     u32 labels
//! ..      4*n*d        f32 features, row-major
//! ```
//!
//! Class names live next to the matrix in `<stem>.classes`, one per line, in
//! class-index order.

use std::fs;
use std::io::{BufWriter, Cursor, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{Dataset, FeatureMatrix};
use crate::error::{Error, Result};

pub const FMX_MAGIC: [u8; 4] = *b"FMX1";
pub const FMX_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 4;

/// Path of the class-name companion of an FMX file.
pub fn classes_path(path: &Path) -> PathBuf {
    path.with_extension("classes")
}

pub fn write_fmx(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?);
    encode(dataset, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))?;

    let classes = classes_path(path);
    let mut text = String::new();
    for name in dataset.class_names() {
        text.push_str(name);
        text.push('\n');
    }
    fs::write(&classes, text).map_err(|e| Error::io(classes, e))
}

fn encode<W: Write>(dataset: &Dataset, w: &mut W) -> std::io::Result<()> {
    w.write_all(&FMX_MAGIC)?;
    w.write_u32::<LittleEndian>(FMX_VERSION)?;
    w.write_u64::<LittleEndian>(dataset.n_rows() as u64)?;
    w.write_u64::<LittleEndian>(dataset.n_cols() as u64)?;
    w.write_u32::<LittleEndian>(dataset.n_classes() as u32)?;
    for &l in dataset.labels() {
        w.write_u32::<LittleEndian>(l)?;
    }
    for &v in dataset.features().values() {
        w.write_f32::<LittleEndian>(v)?;
    }
    Ok(())
}

pub fn load_fmx(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (n_classes, labels, features) = decode(&bytes)?;

    let classes = classes_path(path);
    let text = fs::read_to_string(&classes).map_err(|e| Error::io(&classes, e))?;
    let class_names: Vec<String> = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect();
    if class_names.len() != n_classes {
        return Err(Error::Consistency(format!(
            "header declares {n_classes} classes but {} lists {}",
            classes.display(),
            class_names.len()
        )));
    }
    Dataset::new(features, labels, class_names)
}

fn decode(bytes: &[u8]) -> Result<(usize, Vec<u32>, FeatureMatrix)> {
    if bytes.len() < 8 {
        return Err(Error::Length(format!(
            "{} bytes is shorter than the FMX header",
            bytes.len()
        )));
    }
    if bytes[..4] != FMX_MAGIC {
        return Err(Error::format(format!("bad magic {:?}", &bytes[..4])));
    }
    let mut cur = Cursor::new(&bytes[4..]);
    let version = cur.read_u32::<LittleEndian>().map_err(short)?;
    if version != FMX_VERSION {
        return Err(Error::format(format!("unsupported FMX version {version}")));
    }
    let n_rows = cur.read_u64::<LittleEndian>().map_err(short)?;
    let n_cols = cur.read_u64::<LittleEndian>().map_err(short)?;
    let n_classes = cur.read_u32::<LittleEndian>().map_err(short)? as usize;

    let payload = n_rows
        .checked_mul(n_cols)
        .and_then(|cells| cells.checked_add(n_rows))
        .and_then(|words| words.checked_mul(4))
        .and_then(|b| usize::try_from(b).ok())
        .ok_or_else(|| Error::Length(format!("{n_rows}x{n_cols} payload overflows")))?;
    let available = bytes.len() - HEADER_LEN;
    if available != payload {
        return Err(Error::Length(format!(
            "payload of a {n_rows}x{n_cols} matrix needs {payload} bytes, file has {available}"
        )));
    }
    let (n_rows, n_cols) = (n_rows as usize, n_cols as usize);

    let mut labels = vec![0u32; n_rows];
    cur.read_u32_into::<LittleEndian>(&mut labels)
        .map_err(short)?;
    let mut values = vec![0f32; n_rows * n_cols];
    cur.read_f32_into::<LittleEndian>(&mut values)
        .map_err(short)?;

    Ok((
        n_classes,
        labels,
        FeatureMatrix::new(n_rows, n_cols, values)?,
    ))
}

fn short(e: std::io::Error) -> Error {
    Error::Length(format!("truncated FMX file: {e}"))
}
