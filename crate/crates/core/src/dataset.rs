//! Tabular data model.
//!
//! A [`Dataset`] keeps its feature columns sorted by name at all times. Model
//! fitting is sensitive to column order, so sorting is enforced here rather
//! than left to callers.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Immutable feature matrix (column-major) plus target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target_name: String,
    target: Vec<f64>,
}

/// Row indices of the three partitions. Each set is in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// What a lag column is built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LagSource {
    Target,
    Column(String),
}

pub(crate) fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Dataset {
    /// Validates and builds a dataset, sorting columns by name.
    pub fn new(
        feature_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        target_name: impl Into<String>,
        target: Vec<f64>,
    ) -> Result<Self> {
        let target_name = target_name.into();
        if feature_names.len() != columns.len() {
            return Err(Error::InvalidDataset(format!(
                "{} names for {} columns",
                feature_names.len(),
                columns.len()
            )));
        }
        let n = target.len();
        if n == 0 {
            return Err(Error::InvalidDataset("dataset has no rows".into()));
        }
        for name in feature_names.iter().chain(std::iter::once(&target_name)) {
            if !valid_name(name) {
                return Err(Error::InvalidDataset(format!(
                    "name {name:?} must match [A-Za-z0-9_]+"
                )));
            }
        }
        for (name, col) in feature_names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "column {name:?} has {} rows, target has {n}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "column {name:?} contains a non-finite value"
                )));
            }
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("target contains a non-finite value".into()));
        }
        let mut order: Vec<usize> = (0..feature_names.len()).collect();
        order.sort_by(|&a, &b| feature_names[a].cmp(&feature_names[b]));
        for w in order.windows(2) {
            if feature_names[w[0]] == feature_names[w[1]] {
                return Err(Error::DuplicateColumn(feature_names[w[0]].clone()));
            }
        }
        if feature_names.contains(&target_name) {
            return Err(Error::DuplicateColumn(target_name));
        }
        let mut columns: Vec<Option<Vec<f64>>> = columns.into_iter().map(Some).collect();
        let (names, cols) = order
            .iter()
            .map(|&i| (feature_names[i].clone(), columns[i].take().unwrap()))
            .unzip();
        Ok(Dataset {
            feature_names: names,
            columns: cols,
            target_name,
            target,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.column_index(name)
            .map(|j| self.columns[j].as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Row-major copy of the feature matrix.
    pub fn feature_matrix(&self) -> Matrix {
        let (n, m) = (self.n_rows(), self.n_features());
        let mut data = Vec::with_capacity(n * m);
        for i in 0..n {
            data.extend(self.columns.iter().map(|c| c[i]));
        }
        Matrix::from_vec(n, m, data).expect("shape is consistent")
    }

    /// Keeps the listed rows, in the given order.
    pub fn take_rows(&self, idx: &[usize]) -> Result<Dataset> {
        if idx.is_empty() {
            return Err(Error::InvalidDataset("row selection is empty".into()));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.n_rows()) {
            return Err(Error::OutOfRange {
                index: bad,
                n: self.n_rows(),
            });
        }
        Ok(Dataset {
            feature_names: self.feature_names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| idx.iter().map(|&i| c[i]).collect())
                .collect(),
            target_name: self.target_name.clone(),
            target: idx.iter().map(|&i| self.target[i]).collect(),
        })
    }

    /// Restricts to the named features. Order of `names` is irrelevant.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let mut idx = Vec::with_capacity(names.len());
        for name in names {
            let name = name.as_ref();
            let j = self
                .column_index(name)
                .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
            if idx.contains(&j) {
                return Err(Error::DuplicateColumn(name.to_string()));
            }
            idx.push(j);
        }
        idx.sort_unstable();
        Ok(Dataset {
            feature_names: idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
            target_name: self.target_name.clone(),
            target: self.target.clone(),
        })
    }

    pub fn drop_features<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        for name in names {
            if self.column_index(name.as_ref()).is_none() {
                return Err(Error::UnknownColumn(name.as_ref().to_string()));
            }
        }
        let keep: Vec<&String> = self
            .feature_names
            .iter()
            .filter(|n| !names.iter().any(|d| d.as_ref() == n.as_str()))
            .collect();
        self.select_features(&keep)
    }

    /// Adds a column, keeping name order.
    pub fn with_column(&self, name: &str, values: Vec<f64>) -> Result<Dataset> {
        if self.column_index(name).is_some() || name == self.target_name {
            return Err(Error::DuplicateColumn(name.to_string()));
        }
        let mut names = self.feature_names.clone();
        let mut cols = self.columns.clone();
        names.push(name.to_string());
        cols.push(values);
        Dataset::new(names, cols, self.target_name.clone(), self.target.clone())
    }

    /// Stacks `other` below `self`. Both must have the same schema.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.feature_names != other.feature_names || self.target_name != other.target_name {
            return Err(Error::InvalidDataset("concat of mismatched schemas".into()));
        }
        Ok(Dataset {
            feature_names: self.feature_names.clone(),
            columns: self
                .columns
                .iter()
                .zip(&other.columns)
                .map(|(a, b)| a.iter().chain(b).copied().collect())
                .collect(),
            target_name: self.target_name.clone(),
            target: self.target.iter().chain(&other.target).copied().collect(),
        })
    }

    /// Reads a headered CSV. All cells must be finite decimal numbers.
    pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<Dataset> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, target_column)
    }

    pub fn read_csv<R: std::io::Read>(reader: R, target_column: &str) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        for (i, h) in header.iter().enumerate() {
            if h.is_empty() {
                return Err(Error::Header(format!("column {i} has an empty name")));
            }
            if !valid_name(h) {
                return Err(Error::Header(format!("name {h:?} must match [A-Za-z0-9_]+")));
            }
            if header[..i].contains(h) {
                return Err(Error::Header(format!("duplicate column name {h:?}")));
            }
        }
        let target_pos = header
            .iter()
            .position(|h| h == target_column)
            .ok_or_else(|| Error::Header(format!("target column {target_column:?} not found")))?;
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for (j, cell) in rec.iter().enumerate() {
                let cell_err = |reason| Error::Cell {
                    row: r + 1,
                    column: header[j].clone(),
                    value: cell.to_string(),
                    reason,
                };
                let text = cell.trim();
                if text.is_empty() {
                    return Err(cell_err("empty cell"));
                }
                let v: f64 = text.parse().map_err(|_| cell_err("not a number"))?;
                if !v.is_finite() {
                    return Err(cell_err("not finite"));
                }
                cols[j].push(v);
            }
        }
        let target = cols.remove(target_pos);
        let mut names = header;
        names.remove(target_pos);
        Dataset::new(names, cols, target_column, target)
    }

    /// Writes features (name order) then the target as the last column.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for name in &self.feature_names {
            out.push_str(name);
            out.push(',');
        }
        out.push_str(&self.target_name);
        out.push('\n');
        for i in 0..self.n_rows() {
            for c in &self.columns {
                let _ = write!(out, "{},", format_f64(c[i]));
            }
            out.push_str(&format_f64(self.target[i]));
            out.push('\n');
        }
        out
    }

    /// `train = [0, n_train)`, `val = [n_train, n_train + n_val)`, test is the rest.
    pub fn split_chronological(&self, n_train: usize, n_val: usize) -> Result<SplitIndices> {
        let n = self.n_rows();
        if n_train == 0 || n_val == 0 {
            return Err(Error::InvalidSplit("n_train and n_val must be >= 1".into()));
        }
        if n_train + n_val > n {
            return Err(Error::InvalidSplit(format!(
                "n_train + n_val = {} exceeds {n} rows",
                n_train + n_val
            )));
        }
        Ok(SplitIndices {
            train: (0..n_train).collect(),
            val: (n_train..n_train + n_val).collect(),
            test: (n_train + n_val..n).collect(),
        })
    }

    /// Seeded random partition.
    ///
    /// Sizes: `n_val = floor(n * f_val)`, `n_test = floor(n * f_test)`, and train
    /// takes the remainder. With n = 7 and (0.5, 0.25, 0.25) that gives 5/1/1.
    pub fn split_random(&self, fractions: [f64; 3], seed: u64) -> Result<SplitIndices> {
        if fractions.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidSplit("fractions must be positive".into()));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSplit(format!("fractions sum to {sum}, not 1")));
        }
        let n = self.n_rows();
        let alloc = |f: f64| (n as f64 * f + 1e-9).floor() as usize;
        let n_val = alloc(fractions[1]);
        let n_test = alloc(fractions[2]);
        let n_train = n.saturating_sub(n_val + n_test);
        if n_train == 0 || n_val == 0 || n_test == 0 {
            return Err(Error::InvalidSplit(format!(
                "fractions {fractions:?} leave an empty split for n = {n}"
            )));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let take = |range: std::ops::Range<usize>| {
            let mut v = perm[range].to_vec();
            v.sort_unstable();
            v
        };
        Ok(SplitIndices {
            train: take(0..n_train),
            val: take(n_train..n_train + n_val),
            test: take(n_train + n_val..n),
        })
    }

    /// Adds `new_name[i] = source[i - lag]` and drops the first `lag` rows.
    pub fn add_lag_feature(&self, source: &LagSource, lag: usize, new_name: &str) -> Result<Dataset> {
        let n = self.n_rows();
        if lag == 0 {
            return Err(Error::InvalidParam("lag must be positive".into()));
        }
        if lag >= n {
            return Err(Error::InvalidParam(format!("lag {lag} >= {n} rows")));
        }
        if self.column_index(new_name).is_some() || new_name == self.target_name {
            return Err(Error::DuplicateColumn(new_name.to_string()));
        }
        let src = match source {
            LagSource::Target => &self.target[..],
            LagSource::Column(name) => self.column(name)?,
        };
        let lagged = src[..n - lag].to_vec();
        let mut names = self.feature_names.clone();
        let mut cols: Vec<Vec<f64>> = self.columns.iter().map(|c| c[lag..].to_vec()).collect();
        names.push(new_name.to_string());
        cols.push(lagged);
        Dataset::new(names, cols, self.target_name.clone(), self.target[lag..].to_vec())
    }

    /// Appends a seeded uniform permutation of `name` as `new_name`.
    pub fn permute_column(&self, name: &str, seed: u64, new_name: &str) -> Result<Dataset> {
        let mut values = self.column(name)?.to_vec();
        values.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        self.with_column(new_name, values)
    }
}

impl SplitIndices {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.val.len(), self.test.len())
    }

    /// Materializes the three partitions.
    pub fn apply(&self, ds: &Dataset) -> Result<(Dataset, Dataset, Dataset)> {
        Ok((
            ds.take_rows(&self.train)?,
            ds.take_rows(&self.val)?,
            ds.take_rows(&self.test)?,
        ))
    }
}
