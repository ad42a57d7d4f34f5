//! Dataset container and data plumbing: CSV ingestion, min-max normalization,
//! train/test splitting, MCAR missingness injection, and synthetic generators.
//!
//! A [`Dataset`] is a column-named numeric matrix plus a boolean mask that is
//! the single source of truth for missingness (`true` = observed). Masked
//! cells hold a NaN sentinel that numeric code never reads: the typed
//! accessor [`Dataset::get`] refuses to return a masked cell.
//!
//! All types are immutable after construction; operations return new values.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand_distr::{Distribution, StandardNormal};

use crate::linalg;
use crate::rng::{derive_seed, seeded_rng, Rng};

/// Errors from dataset construction and the data pipeline.
#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}, column {col}: cannot parse {token:?} as a number")]
    Parse { row: usize, col: usize, token: String },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRows { row: usize, found: usize, expected: usize },
    #[error("column {0} has no observed values")]
    AllMissingColumn(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("split would leave an empty train or test set")]
    EmptySplit,
    #[error("column {0} already has missing cells")]
    ColumnAlreadyMissing(usize),
    #[error("cell ({row}, {col}) is masked as missing")]
    MaskedCell { row: usize, col: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

/// Column-named numeric matrix with a missingness mask (`true` = observed).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<String>,
    values: Vec<f64>, // row-major, n_rows * n_cols; masked cells hold NaN
    mask: Vec<bool>,
    n_rows: usize,
    n_cols: usize,
}

/// One removed cell recorded during missingness injection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthCell {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl Dataset {
    /// Build a fully observed dataset from rows.
    pub fn from_rows(columns: Vec<String>, rows: &[Vec<f64>]) -> Result<Self, DataError> {
        let n_cols = columns.len();
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(DataError::RaggedRows { row: r, found: row.len(), expected: n_cols });
            }
            values.extend_from_slice(row);
        }
        let n_rows = rows.len();
        Ok(Dataset { columns, mask: vec![true; values.len()], values, n_rows, n_cols })
    }

    /// Build a dataset from optional cells; `None` marks a missing cell.
    pub fn from_cells(columns: Vec<String>, rows: &[Vec<Option<f64>>]) -> Result<Self, DataError> {
        let n_cols = columns.len();
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        let mut mask = Vec::with_capacity(rows.len() * n_cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(DataError::RaggedRows { row: r, found: row.len(), expected: n_cols });
            }
            for cell in row {
                match cell {
                    Some(v) => {
                        values.push(*v);
                        mask.push(true);
                    }
                    None => {
                        values.push(f64::NAN);
                        mask.push(false);
                    }
                }
            }
        }
        let n_rows = rows.len();
        Ok(Dataset { columns, values, mask, n_rows, n_cols })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        row * self.n_cols + col
    }

    /// Typed accessor: reading a masked cell is an error.
    pub fn get(&self, row: usize, col: usize) -> Result<f64, DataError> {
        if self.mask[self.idx(row, col)] {
            Ok(self.values[self.idx(row, col)])
        } else {
            Err(DataError::MaskedCell { row, col })
        }
    }

    /// `Some(value)` when observed, `None` when masked.
    pub fn observed(&self, row: usize, col: usize) -> Option<f64> {
        if self.mask[self.idx(row, col)] {
            Some(self.values[self.idx(row, col)])
        } else {
            None
        }
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.mask[self.idx(row, col)]
    }

    pub fn row_is_complete(&self, row: usize) -> bool {
        (0..self.n_cols).all(|c| self.mask[self.idx(row, c)])
    }

    /// Row cells as options (`None` = missing).
    pub fn row(&self, row: usize) -> Vec<Option<f64>> {
        (0..self.n_cols).map(|c| self.observed(row, c)).collect()
    }

    /// Observed/missing pattern of a row (`true` = observed).
    pub fn row_mask(&self, row: usize) -> Vec<bool> {
        (0..self.n_cols).map(|c| self.mask[self.idx(row, c)]).collect()
    }

    /// Indices of rows with no missing cells.
    pub fn complete_rows(&self) -> Vec<usize> {
        (0..self.n_rows).filter(|&r| self.row_is_complete(r)).collect()
    }

    pub fn n_missing(&self) -> usize {
        self.mask.iter().filter(|&&m| !m).count()
    }

    /// All observed values of one column.
    pub fn column_observed(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).filter_map(|r| self.observed(r, col)).collect()
    }

    /// Stack `other` below `self`; column names must match.
    pub fn vstack(&self, other: &Dataset) -> Result<Dataset, DataError> {
        if self.columns != other.columns {
            return Err(DataError::DimensionMismatch(format!(
                "cannot stack datasets with different columns ({:?} vs {:?})",
                self.columns, other.columns
            )));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        let mut mask = self.mask.clone();
        mask.extend_from_slice(&other.mask);
        Ok(Dataset {
            columns: self.columns.clone(),
            values,
            mask,
            n_rows: self.n_rows + other.n_rows,
            n_cols: self.n_cols,
        })
    }

    /// Copy with one cell replaced by an observed value.
    pub(crate) fn with_cell(&self, row: usize, col: usize, value: f64) -> Dataset {
        let mut out = self.clone();
        let i = out.idx(row, col);
        out.values[i] = value;
        out.mask[i] = true;
        out
    }

    /// Replace a whole row with observed values.
    pub(crate) fn with_row(&self, row: usize, values: &[f64]) -> Dataset {
        debug_assert_eq!(values.len(), self.n_cols);
        let mut out = self.clone();
        for (c, v) in values.iter().enumerate() {
            let i = out.idx(row, c);
            out.values[i] = *v;
            out.mask[i] = true;
        }
        out
    }

    /// Load a dataset from CSV. Cells equal to `missing_token` are masked.
    ///
    /// Without a header, columns are named `c0..cN`. Parse errors carry the
    /// 0-based (data row, column) location.
    pub fn load_csv(
        path: impl AsRef<Path>,
        has_header: bool,
        missing_token: &str,
    ) -> Result<Self, DataError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|source| DataError::Io { path: path.to_owned(), source })?;
        Self::read_csv(file, has_header, missing_token)
            .map_err(|e| match e {
                DataError::Io { source, .. } => DataError::Io { path: path.to_owned(), source },
                other => other,
            })
    }

    /// CSV ingestion from any reader; see [`Dataset::load_csv`].
    pub fn read_csv(
        reader: impl Read,
        has_header: bool,
        missing_token: &str,
    ) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .flexible(true)
            .from_reader(reader);

        let mut columns: Option<Vec<String>> = if has_header {
            let headers = rdr
                .headers()
                .map_err(|e| DataError::InvalidSpec(format!("cannot read CSV header: {e}")))?;
            Some(headers.iter().map(|s| s.to_string()).collect())
        } else {
            None
        };

        let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record =
                record.map_err(|e| DataError::InvalidSpec(format!("CSV error at row {r}: {e}")))?;
            let expected = match &columns {
                Some(cols) => cols.len(),
                None => record.len(),
            };
            if columns.is_none() {
                columns = Some((0..record.len()).map(|c| format!("c{c}")).collect());
            }
            if record.len() != expected {
                return Err(DataError::RaggedRows { row: r, found: record.len(), expected });
            }
            let mut row = Vec::with_capacity(expected);
            for (c, field) in record.iter().enumerate() {
                if field == missing_token {
                    row.push(None);
                } else {
                    let v: f64 = field.trim().parse().map_err(|_| DataError::Parse {
                        row: r,
                        col: c,
                        token: field.to_string(),
                    })?;
                    row.push(Some(v));
                }
            }
            rows.push(row);
        }

        let columns = columns.unwrap_or_default();
        Dataset::from_cells(columns, &rows)
    }

    /// Write as CSV. Observed values use the shortest representation that
    /// parses back to the identical f64; masked cells emit `missing_token`.
    pub fn write_csv(
        &self,
        mut w: impl Write,
        with_header: bool,
        missing_token: &str,
    ) -> std::io::Result<()> {
        if with_header {
            writeln!(w, "{}", self.columns.join(","))?;
        }
        for r in 0..self.n_rows {
            let fields: Vec<String> = (0..self.n_cols)
                .map(|c| match self.observed(r, c) {
                    Some(v) => format!("{v}"),
                    None => missing_token.to_string(),
                })
                .collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// Min-max normalize observed cells to [0,1] using per-column observed
    /// min/max. Constant columns map to 0.0 and are recorded as degenerate.
    pub fn minmax_normalize(&self) -> Result<(Dataset, NormalizationParams), DataError> {
        let mut scales = Vec::with_capacity(self.n_cols);
        for c in 0..self.n_cols {
            let obs = self.column_observed(c);
            if obs.is_empty() {
                return Err(DataError::AllMissingColumn(c));
            }
            let min = obs.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = obs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            scales.push(ColumnScale { min, max });
        }
        let params = NormalizationParams { scales };
        let mut out = self.clone();
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                let i = out.idx(r, c);
                if out.mask[i] {
                    out.values[i] = params.scales[c].normalize(out.values[i]);
                }
            }
        }
        Ok((out, params))
    }

    /// Inverse of [`Dataset::minmax_normalize`]. Degenerate columns map back
    /// to their recorded minimum.
    pub fn denormalize(&self, params: &NormalizationParams) -> Result<Dataset, DataError> {
        if params.scales.len() != self.n_cols {
            return Err(DataError::DimensionMismatch(format!(
                "{} normalization columns for a {}-column dataset",
                params.scales.len(),
                self.n_cols
            )));
        }
        let mut out = self.clone();
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                let i = out.idx(r, c);
                if out.mask[i] {
                    out.values[i] = params.scales[c].denormalize(out.values[i]);
                }
            }
        }
        Ok(out)
    }

    /// Partition rows into (train, test) with `|test| = floor(n_rows *
    /// test_fraction)`. Without shuffling the test set is the final rows.
    pub fn split(&self, spec: &SplitSpec) -> Result<(Dataset, Dataset), DataError> {
        if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
            return Err(DataError::InvalidSpec(format!(
                "test_fraction must lie in (0,1), got {}",
                spec.test_fraction
            )));
        }
        if self.n_rows < 2 {
            return Err(DataError::EmptySplit);
        }
        let n_test = (self.n_rows as f64 * spec.test_fraction).floor() as usize;
        if n_test == 0 || n_test == self.n_rows {
            return Err(DataError::EmptySplit);
        }
        let mut order: Vec<usize> = (0..self.n_rows).collect();
        if spec.shuffle {
            let mut rng = seeded_rng(spec.seed);
            // Fisher-Yates
            for i in (1..order.len()).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
        }
        let (train_rows, test_rows) = order.split_at(self.n_rows - n_test);
        Ok((self.take_rows(train_rows), self.take_rows(test_rows)))
    }

    fn take_rows(&self, rows: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        let mut mask = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            let start = r * self.n_cols;
            values.extend_from_slice(&self.values[start..start + self.n_cols]);
            mask.extend_from_slice(&self.mask[start..start + self.n_cols]);
        }
        Dataset {
            columns: self.columns.clone(),
            values,
            mask,
            n_rows: rows.len(),
            n_cols: self.n_cols,
        }
    }

    /// Mask `ceil(fraction * n_rows)` uniformly random cells per target
    /// column, recording the removed values. Positions depend only on the
    /// seed, never on cell values (MCAR).
    pub fn inject_missing(
        &self,
        spec: &MissingnessSpec,
    ) -> Result<(Dataset, Vec<GroundTruthCell>), DataError> {
        if !(spec.fraction > 0.0 && spec.fraction <= 1.0) {
            return Err(DataError::InvalidSpec(format!(
                "missing fraction must lie in (0,1], got {}",
                spec.fraction
            )));
        }
        let unique: HashSet<usize> = spec.target_columns.iter().copied().collect();
        if unique.len() != spec.target_columns.len() {
            return Err(DataError::InvalidSpec("duplicate target columns".into()));
        }
        for &c in &spec.target_columns {
            if c >= self.n_cols {
                return Err(DataError::InvalidSpec(format!(
                    "target column {c} out of range for {} columns",
                    self.n_cols
                )));
            }
            if (0..self.n_rows).any(|r| !self.is_observed(r, c)) {
                return Err(DataError::ColumnAlreadyMissing(c));
            }
        }
        let n_masked = (spec.fraction * self.n_rows as f64).ceil() as usize;
        let mut out = self.clone();
        let mut ground_truth = Vec::new();
        for &c in &spec.target_columns {
            // per-column stream so the pattern of one column is independent
            // of which other columns are targeted
            let mut rng = seeded_rng(derive_seed(spec.seed, c as u64));
            let rows = sample_without_replacement(self.n_rows, n_masked, &mut rng);
            for r in rows {
                let i = out.idx(r, c);
                ground_truth.push(GroundTruthCell { row: r, col: c, value: out.values[i] });
                out.values[i] = f64::NAN;
                out.mask[i] = false;
            }
        }
        Ok((out, ground_truth))
    }
}

/// Draw `k` distinct indices from `0..n`, sorted; partial Fisher-Yates.
fn sample_without_replacement(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    let mut chosen = pool[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Per-column observed min/max recorded by normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationParams {
    scales: Vec<ColumnScale>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnScale {
    pub min: f64,
    pub max: f64,
}

impl ColumnScale {
    /// A constant column; normalization maps it to 0.0.
    pub fn is_degenerate(&self) -> bool {
        self.min == self.max
    }

    fn normalize(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            0.0
        } else {
            (x - self.min) / (self.max - self.min)
        }
    }

    fn denormalize(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            self.min
        } else {
            x * (self.max - self.min) + self.min
        }
    }
}

impl NormalizationParams {
    pub fn n_cols(&self) -> usize {
        self.scales.len()
    }

    pub fn scale(&self, col: usize) -> &ColumnScale {
        &self.scales[col]
    }

    /// Map a single value of one column back to the original scale.
    pub fn denormalize_value(&self, col: usize, x: f64) -> f64 {
        self.scales[col].denormalize(x)
    }
}

/// Train/test split specification. Without shuffling the test set is the
/// final `floor(n_rows * test_fraction)` rows, mirroring test data appended
/// at the end of a file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub shuffle: bool,
}

/// Missingness mechanisms available for injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    /// Missing completely at random: masked positions are independent of all
    /// data values.
    Mcar,
}

/// Missingness injection specification.
#[derive(Debug, Clone, PartialEq)]
pub struct MissingnessSpec {
    pub mechanism: Mechanism,
    pub target_columns: Vec<usize>,
    pub fraction: f64,
    pub seed: u64,
}

/// Built-in synthetic dataset families. Exact parameters are documented in
/// `fixtures/generators.md`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// 5-dim Gaussian with the fixed mean/covariance below.
    LinearGaussian,
    /// Deterministic nonlinear couplings plus small noise, then min-max
    /// normalized. Column [`NONLINEAR_TARGET_COLUMN`] is the nonlinearly
    /// dependent one.
    Nonlinear,
    /// Contains a column that is an exact affine image of another, so the
    /// sample covariance is singular.
    Collinear,
    /// Mutually independent uniform columns.
    Independent,
}

impl SyntheticKind {
    pub fn parse(s: &str) -> Option<SyntheticKind> {
        match s {
            "linear_gaussian" => Some(SyntheticKind::LinearGaussian),
            "nonlinear" => Some(SyntheticKind::Nonlinear),
            "collinear" => Some(SyntheticKind::Collinear),
            "independent" => Some(SyntheticKind::Independent),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SyntheticKind::LinearGaussian => "linear_gaussian",
            SyntheticKind::Nonlinear => "nonlinear",
            SyntheticKind::Collinear => "collinear",
            SyntheticKind::Independent => "independent",
        }
    }
}

/// Mean vector of the `linear_gaussian` generator.
pub const LINEAR_GAUSSIAN_MEAN: [f64; 5] = [0.50, 0.40, 0.60, 0.45, 0.55];

/// Per-column standard deviations of the `linear_gaussian` generator.
pub const LINEAR_GAUSSIAN_SD: [f64; 5] = [0.10, 0.12, 0.08, 0.11, 0.09];

/// Correlation matrix of the `linear_gaussian` generator (row-major).
pub const LINEAR_GAUSSIAN_CORR: [[f64; 5]; 5] = [
    [1.0, 0.8, 0.5, 0.3, 0.1],
    [0.8, 1.0, 0.4, 0.2, 0.1],
    [0.5, 0.4, 1.0, 0.1, 0.1],
    [0.3, 0.2, 0.1, 1.0, 0.1],
    [0.1, 0.1, 0.1, 0.1, 1.0],
];

/// Covariance of the `linear_gaussian` generator: `diag(sd) * corr * diag(sd)`.
pub fn linear_gaussian_covariance() -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(5, 5, |i, j| {
        LINEAR_GAUSSIAN_SD[i] * LINEAR_GAUSSIAN_SD[j] * LINEAR_GAUSSIAN_CORR[i][j]
    })
}

/// Column of the `nonlinear` generator that depends nonlinearly on the
/// others (`x2 = x0^6 + noise`).
pub const NONLINEAR_TARGET_COLUMN: usize = 2;

/// Column of the `collinear` generator that is an exact affine image of
/// column 0 (`x1 = 0.6 * x0 + 0.2`).
pub const COLLINEAR_DEPENDENT_COLUMN: usize = 1;

/// Observation noise sigma used by the nonlinear generator.
pub const NONLINEAR_NOISE_SD: f64 = 0.02;

/// Generate a synthetic dataset; deterministic under the seed.
pub fn gen_synthetic(kind: SyntheticKind, n_rows: usize, seed: u64) -> Result<Dataset, DataError> {
    if n_rows < 10 {
        return Err(DataError::InvalidSpec(format!(
            "synthetic generators need at least 10 rows, got {n_rows}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let columns: Vec<String> = (0..5).map(|c| format!("x{c}")).collect();
    let rows: Vec<Vec<f64>> = match kind {
        SyntheticKind::LinearGaussian => {
            let cov = linear_gaussian_covariance();
            let factor = linalg::cholesky(&cov, 1e-15)
                .expect("documented generator covariance is positive definite");
            let lower = factor.lower();
            (0..n_rows)
                .map(|_| {
                    let z: Vec<f64> =
                        (0..5).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                    (0..5)
                        .map(|i| {
                            LINEAR_GAUSSIAN_MEAN[i]
                                + (0..=i).map(|k| lower[(i, k)] * z[k]).sum::<f64>()
                        })
                        .collect()
                })
                .collect()
        }
        SyntheticKind::Nonlinear => {
            let noise = rand_distr::Normal::new(0.0, NONLINEAR_NOISE_SD)
                .expect("constant sigma is valid");
            let raw: Vec<Vec<f64>> = (0..n_rows)
                .map(|_| {
                    let a: f64 = rng.random();
                    let b: f64 = rng.random();
                    vec![
                        a,
                        b,
                        a.powi(6) + noise.sample(&mut rng),
                        a * b + noise.sample(&mut rng),
                        (std::f64::consts::PI * b).sin() + noise.sample(&mut rng),
                    ]
                })
                .collect();
            return normalize_generated(columns, raw);
        }
        SyntheticKind::Collinear => {
            let noise =
                rand_distr::Normal::new(0.0, 0.05).expect("constant sigma is valid");
            (0..n_rows)
                .map(|_| {
                    let a: f64 = rng.random();
                    let c: f64 = rng.random();
                    vec![
                        a,
                        0.6 * a + 0.2,
                        c,
                        0.5 * a + 0.5 * c + noise.sample(&mut rng),
                        rng.random(),
                    ]
                })
                .collect()
        }
        SyntheticKind::Independent => (0..n_rows)
            .map(|_| (0..5).map(|_| rng.random()).collect())
            .collect(),
    };
    Dataset::from_rows(columns, &rows)
}

fn normalize_generated(columns: Vec<String>, raw: Vec<Vec<f64>>) -> Result<Dataset, DataError> {
    let ds = Dataset::from_rows(columns, &raw)?;
    let (normalized, _) = ds.minmax_normalize()?;
    Ok(normalized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cols(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn csv_parses_values_and_missing_token() {
        let ds = Dataset::read_csv("a,b\n1,2\n3,\n5,6".as_bytes(), true, "").unwrap();
        assert_eq!(ds.columns(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.n_rows(), 3);
        assert!(!ds.is_observed(1, 1));
        assert_eq!(ds.get(2, 0).unwrap(), 5.0);
        assert_eq!(ds.get(2, 1).unwrap(), 6.0);
        assert!(matches!(ds.get(1, 1), Err(DataError::MaskedCell { row: 1, col: 1 })));
    }

    #[test]
    fn csv_header_only_gives_empty_dataset() {
        let ds = Dataset::read_csv("a,b\n".as_bytes(), true, "").unwrap();
        assert_eq!(ds.n_rows(), 0);
        assert_eq!(ds.n_cols(), 2);
    }

    #[test]
    fn csv_parse_error_carries_location() {
        let err = Dataset::read_csv("a,b\n1,2\n1,x\n".as_bytes(), true, "").unwrap_err();
        match err {
            DataError::Parse { row, col, token } => {
                assert_eq!((row, col), (1, 1));
                assert_eq!(token, "x");
            }
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn csv_ragged_row_is_rejected() {
        let err = Dataset::read_csv("1,2\n3\n".as_bytes(), false, "").unwrap_err();
        assert!(matches!(err, DataError::RaggedRows { row: 1, found: 1, expected: 2 }));
    }

    #[test]
    fn csv_round_trips_exact_values() {
        let ds = Dataset::from_cells(
            cols(&["a", "b"]),
            &[
                vec![Some(0.1 + 0.2), Some(-1.5e-7)],
                vec![None, Some(1.0 / 3.0)],
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf, true, "").unwrap();
        let back = Dataset::read_csv(buf.as_slice(), true, "").unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn normalize_maps_endpoints_and_midpoint() {
        let ds = Dataset::from_rows(cols(&["a"]), &[vec![2.0], vec![4.0], vec![6.0]]).unwrap();
        let (norm, params) = ds.minmax_normalize().unwrap();
        assert_eq!(norm.get(0, 0).unwrap(), 0.0);
        assert_eq!(norm.get(1, 0).unwrap(), 0.5);
        assert_eq!(norm.get(2, 0).unwrap(), 1.0);
        assert!(!params.scale(0).is_degenerate());
    }

    #[test]
    fn constant_column_normalizes_to_zero_with_degenerate_flag() {
        let ds = Dataset::from_rows(cols(&["a"]), &[vec![5.0], vec![5.0], vec![5.0]]).unwrap();
        let (norm, params) = ds.minmax_normalize().unwrap();
        assert!(params.scale(0).is_degenerate());
        for r in 0..3 {
            assert_eq!(norm.get(r, 0).unwrap(), 0.0);
        }
        // degenerate columns denormalize to the stored minimum
        let back = norm.denormalize(&params).unwrap();
        for r in 0..3 {
            assert_eq!(back.get(r, 0).unwrap(), 5.0);
        }
    }

    #[test]
    fn all_missing_column_is_rejected() {
        let ds =
            Dataset::from_cells(cols(&["a", "b"]), &[vec![Some(1.0), None], vec![Some(2.0), None]])
                .unwrap();
        assert!(matches!(ds.minmax_normalize(), Err(DataError::AllMissingColumn(1))));
    }

    #[test]
    fn denormalize_inverts_normalize() {
        let ds = Dataset::from_rows(cols(&["a"]), &[vec![0.0], vec![0.5], vec![1.0]]).unwrap();
        let params = NormalizationParams {
            scales: vec![ColumnScale { min: 2.0, max: 6.0 }],
        };
        let back = ds.denormalize(&params).unwrap();
        assert_eq!(back.get(0, 0).unwrap(), 2.0);
        assert_eq!(back.get(1, 0).unwrap(), 4.0);
        assert_eq!(back.get(2, 0).unwrap(), 6.0);
        // identity scale
        let id = NormalizationParams {
            scales: vec![ColumnScale { min: 0.0, max: 1.0 }],
        };
        let same = ds.denormalize(&id).unwrap();
        assert_eq!(same, ds);
    }

    #[test]
    fn denormalize_rejects_wrong_arity() {
        let ds = Dataset::from_rows(cols(&["a"]), &[vec![0.0]]).unwrap();
        let params = NormalizationParams {
            scales: vec![ColumnScale { min: 0.0, max: 1.0 }, ColumnScale { min: 0.0, max: 1.0 }],
        };
        assert!(matches!(ds.denormalize(&params), Err(DataError::DimensionMismatch(_))));
    }

    #[test]
    fn split_sizes_follow_floor_rule() {
        let rows: Vec<Vec<f64>> = (0..200).map(|i| vec![i as f64]).collect();
        let ds = Dataset::from_rows(cols(&["a"]), &rows).unwrap();
        let (train, test) = ds
            .split(&SplitSpec { test_fraction: 1.0 / 7.0, seed: 0, shuffle: false })
            .unwrap();
        assert_eq!(train.n_rows(), 172);
        assert_eq!(test.n_rows(), 28);
        // tail rows without shuffle
        assert_eq!(test.get(0, 0).unwrap(), 172.0);
        assert_eq!(test.get(27, 0).unwrap(), 199.0);

        let rows: Vec<Vec<f64>> = (0..2500).map(|i| vec![i as f64]).collect();
        let ds = Dataset::from_rows(cols(&["a"]), &rows).unwrap();
        let (_, test) =
            ds.split(&SplitSpec { test_fraction: 0.2, seed: 0, shuffle: false }).unwrap();
        assert_eq!(test.n_rows(), 500);

        let ds = Dataset::from_rows(cols(&["a"]), &[vec![1.0], vec![2.0]]).unwrap();
        let (train, test) =
            ds.split(&SplitSpec { test_fraction: 0.5, seed: 0, shuffle: false }).unwrap();
        assert_eq!((train.n_rows(), test.n_rows()), (1, 1));
    }

    #[test]
    fn split_is_an_exact_partition_even_when_shuffled() {
        let rows: Vec<Vec<f64>> = (0..31).map(|i| vec![i as f64]).collect();
        let ds = Dataset::from_rows(cols(&["a"]), &rows).unwrap();
        let (train, test) =
            ds.split(&SplitSpec { test_fraction: 0.3, seed: 9, shuffle: true }).unwrap();
        let mut seen: Vec<f64> = (0..train.n_rows())
            .map(|r| train.get(r, 0).unwrap())
            .chain((0..test.n_rows()).map(|r| test.get(r, 0).unwrap()))
            .collect();
        seen.sort_by(f64::total_cmp);
        let expected: Vec<f64> = (0..31).map(|i| i as f64).collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn split_rejects_empty_sides() {
        let ds = Dataset::from_rows(cols(&["a"]), &[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(matches!(
            ds.split(&SplitSpec { test_fraction: 0.1, seed: 0, shuffle: false }),
            Err(DataError::EmptySplit)
        ));
        let one = Dataset::from_rows(cols(&["a"]), &[vec![1.0]]).unwrap();
        assert!(matches!(
            one.split(&SplitSpec { test_fraction: 0.5, seed: 0, shuffle: false }),
            Err(DataError::EmptySplit)
        ));
    }

    #[test]
    fn inject_full_column_and_ceiling_rule() {
        let rows: Vec<Vec<f64>> = (0..28).map(|i| vec![i as f64, -(i as f64)]).collect();
        let ds = Dataset::from_rows(cols(&["a", "b"]), &rows).unwrap();

        let (corrupted, gt) = ds
            .inject_missing(&MissingnessSpec {
                mechanism: Mechanism::Mcar,
                target_columns: vec![0],
                fraction: 1.0,
                seed: 1,
            })
            .unwrap();
        assert_eq!(gt.len(), 28);
        assert!((0..28).all(|r| !corrupted.is_observed(r, 0)));
        assert!((0..28).all(|r| corrupted.is_observed(r, 1)));

        let (corrupted, gt) = ds
            .inject_missing(&MissingnessSpec {
                mechanism: Mechanism::Mcar,
                target_columns: vec![1],
                fraction: 0.25,
                seed: 1,
            })
            .unwrap();
        assert_eq!(gt.len(), 7); // ceil(0.25 * 28)
        assert_eq!(corrupted.n_missing(), 7);
        for cell in &gt {
            assert_eq!(cell.value, -(cell.row as f64));
        }
    }

    #[test]
    fn inject_is_deterministic_under_seed() {
        let ds = gen_synthetic(SyntheticKind::Independent, 50, 3).unwrap();
        let spec = MissingnessSpec {
            mechanism: Mechanism::Mcar,
            target_columns: vec![0, 2],
            fraction: 0.3,
            seed: 77,
        };
        let (a, gta) = ds.inject_missing(&spec).unwrap();
        let (b, gtb) = ds.inject_missing(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(gta, gtb);
    }

    #[test]
    fn inject_rejects_partially_missing_target() {
        let ds =
            Dataset::from_cells(cols(&["a"]), &[vec![Some(1.0)], vec![None], vec![Some(2.0)]])
                .unwrap();
        let err = ds
            .inject_missing(&MissingnessSpec {
                mechanism: Mechanism::Mcar,
                target_columns: vec![0],
                fraction: 0.5,
                seed: 0,
            })
            .unwrap_err();
        assert!(matches!(err, DataError::ColumnAlreadyMissing(0)));
    }

    #[test]
    fn collinear_generator_has_singular_sample_covariance() {
        let ds = gen_synthetic(SyntheticKind::Collinear, 200, 7).unwrap();
        let n = ds.n_rows() as f64;
        let d = ds.n_cols();
        let means: Vec<f64> =
            (0..d).map(|c| ds.column_observed(c).iter().sum::<f64>() / n).collect();
        let cov = nalgebra::DMatrix::from_fn(d, d, |i, j| {
            (0..ds.n_rows())
                .map(|r| (ds.get(r, i).unwrap() - means[i]) * (ds.get(r, j).unwrap() - means[j]))
                .sum::<f64>()
                / n
        });
        assert!(cov.determinant().abs() < 1e-10);
    }

    #[test]
    fn independent_generator_has_near_zero_cross_correlation() {
        // oracle: direct pairwise sample correlation on the generated sample
        let ds = gen_synthetic(SyntheticKind::Independent, 10_000, 11).unwrap();
        for i in 0..5 {
            for j in (i + 1)..5 {
                let a = ds.column_observed(i);
                let b = ds.column_observed(j);
                let r = crate::metrics::correlation(&a, &b).unwrap();
                assert!(r.abs() < 0.05, "columns {i},{j} correlate at {r}");
            }
        }
    }

    #[test]
    fn linear_gaussian_sample_mean_matches_documented_mean() {
        // oracle: law of large numbers on the generated sample
        let ds = gen_synthetic(SyntheticKind::LinearGaussian, 10_000, 5).unwrap();
        for c in 0..5 {
            let col = ds.column_observed(c);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            assert_relative_eq!(mean, LINEAR_GAUSSIAN_MEAN[c], epsilon = 0.05);
        }
    }

    #[test]
    fn generators_reject_tiny_row_counts() {
        assert!(gen_synthetic(SyntheticKind::Independent, 9, 0).is_err());
    }

    #[test]
    fn mcar_positions_are_independent_of_values() {
        // over many seeds, the mean of masked ground-truth values stays within
        // 3 standard errors of the column mean
        let ds = gen_synthetic(SyntheticKind::LinearGaussian, 200, 21).unwrap();
        let col = ds.column_observed(0);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let mut masked_values = Vec::new();
        for seed in 0..1000u64 {
            let (_, gt) = ds
                .inject_missing(&MissingnessSpec {
                    mechanism: Mechanism::Mcar,
                    target_columns: vec![0],
                    fraction: 0.2,
                    seed,
                })
                .unwrap();
            masked_values.extend(gt.iter().map(|c| c.value));
        }
        let m = masked_values.iter().sum::<f64>() / masked_values.len() as f64;
        let se = (var / masked_values.len() as f64).sqrt();
        assert!(
            (m - mean).abs() < 3.0 * se,
            "masked mean {m} deviates from column mean {mean} by more than 3 SE ({se})"
        );
    }

    #[test]
    fn vstack_concatenates_rows() {
        let a = Dataset::from_rows(cols(&["a", "b"]), &[vec![1.0, 2.0]]).unwrap();
        let b = Dataset::from_cells(cols(&["a", "b"]), &[vec![None, Some(3.0)]]).unwrap();
        let s = a.vstack(&b).unwrap();
        assert_eq!(s.n_rows(), 2);
        assert!(!s.is_observed(1, 0));
        assert_eq!(s.get(1, 1).unwrap(), 3.0);
        let c = Dataset::from_rows(cols(&["z"]), &[vec![1.0]]).unwrap();
        assert!(a.vstack(&c).is_err());
    }
}
