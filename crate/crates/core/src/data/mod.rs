//! Feature matrices, labelled datasets, file loaders and split planning.

mod csv;
mod fmx;
mod split;

pub use self::csv::{load_csv, write_csv};
pub use self::fmx::{classes_path, load_fmx, write_fmx, FMX_MAGIC, FMX_VERSION};
pub use self::split::{
    stratified_holdout, stratified_kfold, Fold, SplitKind, SplitPlan, DEFAULT_SEED,
};

use std::path::Path;

use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f32` feature activations.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f32>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Length(format!(
                "feature matrix must be non-empty, got {n_rows}x{n_cols}"
            )));
        }
        let expected = n_rows
            .checked_mul(n_cols)
            .ok_or_else(|| Error::Length(format!("{n_rows}x{n_cols} overflows")))?;
        if values.len() != expected {
            return Err(Error::Length(format!(
                "{n_rows}x{n_cols} matrix needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Value {
                row: pos / n_cols,
                col: pos % n_cols,
                message: format!("non-finite value {}", values[pos]),
            });
        }
        Ok(FeatureMatrix {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(Error::Length(format!(
                "row {bad} has {} values, expected {n_cols}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), n_cols, rows.concat())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.n_cols + col]
    }

    /// Copies the given rows, in the given order, into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            if r >= self.n_rows {
                return Err(Error::Input(format!(
                    "row index {r} out of range for {} rows",
                    self.n_rows
                )));
            }
            values.extend_from_slice(self.row(r));
        }
        Self::new(rows.len(), self.n_cols, values)
    }
}

/// A feature matrix with one class label per row.
///
/// Class indices follow the order of `class_names`, and every class occurs at
/// least once.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: FeatureMatrix,
    labels: Vec<u32>,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: FeatureMatrix,
        labels: Vec<u32>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != features.n_rows() {
            return Err(Error::Consistency(format!(
                "{} labels for {} feature rows",
                labels.len(),
                features.n_rows()
            )));
        }
        if class_names.is_empty() {
            return Err(Error::Consistency("no class names".into()));
        }
        for (i, name) in class_names.iter().enumerate() {
            if name.is_empty() || name.contains('\n') {
                return Err(Error::Consistency(format!(
                    "invalid class name at index {i}"
                )));
            }
            if class_names[..i].contains(name) {
                return Err(Error::Consistency(format!("duplicate class name '{name}'")));
            }
        }
        let n_classes = class_names.len();
        let mut seen = vec![false; n_classes];
        for (row, &label) in labels.iter().enumerate() {
            let slot = seen.get_mut(label as usize).ok_or_else(|| {
                Error::Consistency(format!(
                    "label {label} at row {row} is outside [0, {n_classes})"
                ))
            })?;
            *slot = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Consistency(format!(
                "class '{}' has no rows",
                class_names[missing]
            )));
        }
        Ok(Dataset {
            features,
            labels,
            class_names,
        })
    }

    /// Loads `.fmx` files through the binary loader and everything else as CSV.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("fmx") => load_fmx(path),
            _ => load_csv(path),
        }
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.features.n_cols()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }

    /// Row indices of each class, ascending.
    pub fn rows_by_class(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.rows_by_class().iter().map(Vec::len).collect()
    }
}
