//! Missing-data imputation library and benchmark harness.
//!
//! Two imputers are implemented and compared:
//!
//! - [`nnga`]: an autoencoder (a bottlenecked multilayer perceptron trained to
//!   reproduce its input) combined with a real-coded genetic algorithm that
//!   searches for the missing entries minimizing the reconstruction error of
//!   the recombined record.
//! - [`em`]: a single multivariate Gaussian fitted to the incomplete data by
//!   Expectation-Maximization, imputing each missing cell by its conditional
//!   mean given the observed cells of the row.
//!
//! Supporting modules provide the dataset container with an explicit
//! missingness mask ([`dataset`]), evaluation metrics ([`metrics`]) and the
//! end-to-end benchmark pipeline ([`experiment`]): load or generate data,
//! min-max normalize, split, inject missingness completely at random, fit,
//! impute, and report per-variable correlation and tolerance accuracy.
//!
//! Every randomized operation is a pure function of its inputs and a 64-bit
//! seed; the whole pipeline is reproducible from a single master seed.

pub mod dataset;
pub mod em;
pub mod experiment;
pub mod ga;
pub mod metrics;
pub mod mlp;
pub mod nnga;
pub mod rng;

pub(crate) mod linalg;

pub use dataset::{
    gen_synthetic, Dataset, DataError, GroundTruthCell, MissingnessSpec, NormalizationParams,
    SplitSpec, SyntheticKind,
};
pub use em::{check_positive_definite, em_fit, em_impute, log_likelihood, EmConfig, EmError, GaussianModel};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentError};
pub use ga::{GaConfig, GaError, GaResult};
pub use metrics::{
    correlation, evaluate_variable, tolerance_accuracy, EvaluationReport, MetricOutcome,
    MetricsError, Method, ReportRow,
};
pub use mlp::{MlpConfig, MlpError, MlpModel};
pub use nnga::{impute_dataset, impute_record, ImputationProblem, ImputeError, ImputedRecord};
