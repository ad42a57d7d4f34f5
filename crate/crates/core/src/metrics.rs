//! Imputation evaluation: Pearson correlation between imputed and true
//! values, relative prediction accuracy within a tolerance, and assembly of
//! the per-variable comparison report.

use crate::dataset::{Dataset, GroundTruthCell};

/// When `|actual| < NEAR_ZERO_GUARD`, the tolerance criterion switches from
/// relative to absolute (normalized data contains exact zeros at column
/// minima, where a relative margin would be empty).
pub const NEAR_ZERO_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Actual,
    Predicted,
}

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("length mismatch: actual has {actual}, predicted has {predicted}")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("{0:?} vector has zero variance; correlation is undefined")]
    ZeroVariance(Side),
    #[error("no predictions to evaluate")]
    EmptyInput,
    #[error("cell ({row}, {col}) was not filled in the completed dataset")]
    MissingPrediction { row: usize, col: usize },
}

/// Pearson correlation coefficient between two equal-length vectors.
///
/// The result is clamped into [-1, 1] to absorb last-bit rounding.
pub fn correlation(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    if actual.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    let n = actual.len();
    if n < 2 {
        // a 0- or 1-element vector trivially has zero variance
        return Err(MetricsError::ZeroVariance(Side::Actual));
    }
    let mean_a = actual.iter().sum::<f64>() / n as f64;
    let mean_p = predicted.iter().sum::<f64>() / n as f64;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_p = 0.0;
    for i in 0..n {
        let da = actual[i] - mean_a;
        let dp = predicted[i] - mean_p;
        cov += da * dp;
        var_a += da * da;
        var_p += dp * dp;
    }
    if var_a == 0.0 {
        return Err(MetricsError::ZeroVariance(Side::Actual));
    }
    if var_p == 0.0 {
        return Err(MetricsError::ZeroVariance(Side::Predicted));
    }
    Ok((cov / (var_a * var_p).sqrt()).clamp(-1.0, 1.0))
}

/// Result of the tolerance-accuracy count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceAccuracy {
    /// `100 * n_within / n_total`.
    pub accuracy_pct: f64,
    pub n_within: usize,
    pub n_total: usize,
    /// How many comparisons used the absolute near-zero guard.
    pub n_absolute_guard: usize,
}

/// Fraction of predictions within `tolerance_fraction * |actual|` of the
/// actual value, as a percentage. Near-zero actuals (see [`NEAR_ZERO_GUARD`])
/// use the tolerance as an absolute margin instead.
pub fn tolerance_accuracy(
    actual: &[f64],
    predicted: &[f64],
    tolerance_fraction: f64,
) -> Result<ToleranceAccuracy, MetricsError> {
    assert!(tolerance_fraction > 0.0, "tolerance_fraction must be positive");
    if actual.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut n_within = 0usize;
    let mut n_absolute_guard = 0usize;
    for (a, p) in actual.iter().zip(predicted) {
        let margin = if a.abs() < NEAR_ZERO_GUARD {
            n_absolute_guard += 1;
            tolerance_fraction
        } else {
            tolerance_fraction * a.abs()
        };
        if (p - a).abs() <= margin {
            n_within += 1;
        }
    }
    Ok(ToleranceAccuracy {
        accuracy_pct: 100.0 * n_within as f64 / actual.len() as f64,
        n_within,
        n_total: actual.len(),
        n_absolute_guard,
    })
}

/// Imputation method tags used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Em,
    Nnga,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Em => "EM",
            Method::Nnga => "NN-GA",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.to_ascii_lowercase().as_str() {
            "em" => Some(Method::Em),
            "nnga" | "nn-ga" => Some(Method::Nnga),
            _ => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A metric cell: either a value or a failure carrying its cause.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricOutcome {
    Value(f64),
    Failed(String),
}

impl MetricOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            MetricOutcome::Value(v) => Some(*v),
            MetricOutcome::Failed(_) => None,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, MetricOutcome::Failed(_))
    }

    fn render(&self, decimals: usize) -> String {
        match self {
            MetricOutcome::Value(v) => format!("{v:.decimals$}"),
            MetricOutcome::Failed(_) => "-".to_string(),
        }
    }
}

/// One (variable, method) evaluation result.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub variable: String,
    pub method: Method,
    pub correlation: MetricOutcome,
    pub accuracy: MetricOutcome,
    pub n_evaluated: usize,
}

impl ReportRow {
    /// Row for a method that errored before producing predictions.
    pub fn failed(variable: impl Into<String>, method: Method, cause: impl Into<String>) -> Self {
        let cause = cause.into();
        ReportRow {
            variable: variable.into(),
            method,
            correlation: MetricOutcome::Failed(cause.clone()),
            accuracy: MetricOutcome::Failed(cause),
            n_evaluated: 0,
        }
    }
}

/// Per-variable correlation and tolerance-accuracy table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvaluationReport {
    pub rows: Vec<ReportRow>,
}

/// Score one variable's imputations: extract (actual, predicted) pairs at the
/// ground-truth positions and compute both metrics in normalized space.
///
/// A zero-variance correlation is recorded as a failed cell while the
/// accuracy is still computed.
pub fn evaluate_variable(
    ground_truth: &[GroundTruthCell],
    completed: &Dataset,
    method: Method,
    tolerance_fraction: f64,
) -> Result<ReportRow, MetricsError> {
    if ground_truth.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let col = ground_truth[0].col;
    debug_assert!(
        ground_truth.iter().all(|c| c.col == col),
        "evaluate_variable scores one column at a time"
    );
    let mut actual = Vec::with_capacity(ground_truth.len());
    let mut predicted = Vec::with_capacity(ground_truth.len());
    for cell in ground_truth {
        let p = completed
            .observed(cell.row, cell.col)
            .ok_or(MetricsError::MissingPrediction { row: cell.row, col: cell.col })?;
        actual.push(cell.value);
        predicted.push(p);
    }
    let corr = match correlation(&actual, &predicted) {
        Ok(r) => MetricOutcome::Value(r),
        Err(e @ MetricsError::ZeroVariance(_)) => MetricOutcome::Failed(e.to_string()),
        Err(other) => return Err(other),
    };
    let acc = tolerance_accuracy(&actual, &predicted, tolerance_fraction)?;
    Ok(ReportRow {
        variable: completed.columns()[col].clone(),
        method,
        correlation: corr,
        accuracy: MetricOutcome::Value(acc.accuracy_pct),
        n_evaluated: ground_truth.len(),
    })
}

impl EvaluationReport {
    /// Methods present, in fixed EM-then-NN-GA order.
    fn methods(&self) -> Vec<Method> {
        let mut out = Vec::new();
        for m in [Method::Em, Method::Nnga] {
            if self.rows.iter().any(|r| r.method == m) {
                out.push(m);
            }
        }
        out
    }

    /// Variables in first-appearance order.
    fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for row in &self.rows {
            if !out.contains(&row.variable) {
                out.push(row.variable.clone());
            }
        }
        out
    }

    fn cell(&self, variable: &str, method: Method) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.variable == variable && r.method == method)
    }

    /// Aligned plain-text table: one line per variable, correlation columns
    /// first, then accuracy columns. Correlations render with 4 decimals,
    /// percentages with 2; failures render as "-".
    pub fn to_text(&self) -> String {
        let methods = self.methods();
        let mut header: Vec<String> = vec!["Variable".to_string()];
        for m in &methods {
            header.push(format!("Corr {m}"));
        }
        for m in &methods {
            header.push(format!("{m} %"));
        }
        let mut table: Vec<Vec<String>> = vec![header];
        for variable in self.variables() {
            let mut line = vec![variable.clone()];
            for m in &methods {
                line.push(match self.cell(&variable, *m) {
                    Some(row) => row.correlation.render(4),
                    None => "-".to_string(),
                });
            }
            for m in &methods {
                line.push(match self.cell(&variable, *m) {
                    Some(row) => row.accuracy.render(2),
                    None => "-".to_string(),
                });
            }
            table.push(line);
        }
        let n_cols = table[0].len();
        let widths: Vec<usize> = (0..n_cols)
            .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &table {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    line.push_str("  ");
                }
                line.push_str(&format!("{:<width$}", cell, width = widths[c]));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    /// Long-format CSV (one row per variable and method) with the same
    /// numeric renderings as the text table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variable,method,correlation,accuracy_pct,n_evaluated\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.variable,
                row.method,
                row.correlation.render(4),
                row.accuracy.render(2),
                row.n_evaluated
            ));
        }
        out
    }
}
