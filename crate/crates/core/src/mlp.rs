//! Feed-forward multilayer perceptron with one hidden layer, trained by
//! full-batch backpropagation on mean squared error.
//!
//! Configured with equal input/output width and a narrower hidden layer it is
//! the autoencoder used for reconstruction-based imputation: the bottleneck
//! forces the network to capture inter-variable structure instead of copying
//! its input.

use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::{DMatrix, DVector};

use crate::rng::{seeded_rng, Rng};

#[derive(Debug, thiserror::Error)]
pub enum MlpError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("training diverged to a non-finite loss at epoch {epoch} (learning rate too high?)")]
    NonFiniteLoss { epoch: usize },
    #[error("malformed model file: {0}")]
    MalformedModel(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenActivation {
    Tanh,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    /// Identity output; useful for tests and unbounded targets.
    Linear,
    /// Keeps reconstructions inside (0,1) for min-max normalized data.
    Sigmoid,
}

impl HiddenActivation {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tanh" => Some(HiddenActivation::Tanh),
            "sigmoid" => Some(HiddenActivation::Sigmoid),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HiddenActivation::Tanh => "tanh",
            HiddenActivation::Sigmoid => "sigmoid",
        }
    }

    #[inline]
    fn apply(&self, x: f64) -> f64 {
        match self {
            HiddenActivation::Tanh => x.tanh(),
            HiddenActivation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation output `y = act(x)`.
    #[inline]
    fn derivative_from_output(&self, y: f64) -> f64 {
        match self {
            HiddenActivation::Tanh => 1.0 - y * y,
            HiddenActivation::Sigmoid => y * (1.0 - y),
        }
    }
}

impl OutputActivation {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(OutputActivation::Linear),
            "sigmoid" => Some(OutputActivation::Sigmoid),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OutputActivation::Linear => "linear",
            OutputActivation::Sigmoid => "sigmoid",
        }
    }

    #[inline]
    fn apply(&self, x: f64) -> f64 {
        match self {
            OutputActivation::Linear => x,
            OutputActivation::Sigmoid => sigmoid(x),
        }
    }

    #[inline]
    fn derivative_from_output(&self, y: f64) -> f64 {
        match self {
            OutputActivation::Linear => 1.0,
            OutputActivation::Sigmoid => y * (1.0 - y),
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Network architecture and training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub n_inputs: usize,
    pub n_hidden: usize,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl MlpConfig {
    /// Defaults for an autoencoder over `n_inputs` variables: one fewer
    /// hidden node than inputs (the bottleneck), tanh hidden, sigmoid output.
    pub fn autoencoder(n_inputs: usize, seed: u64) -> Self {
        MlpConfig {
            n_inputs,
            n_hidden: n_inputs.saturating_sub(1).max(1),
            hidden_activation: HiddenActivation::Tanh,
            output_activation: OutputActivation::Sigmoid,
            epochs: 200,
            learning_rate: 0.1,
            weight_decay: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), MlpError> {
        if self.n_inputs == 0 {
            return Err(MlpError::InvalidConfig("n_inputs must be at least 1".into()));
        }
        if self.n_hidden == 0 {
            return Err(MlpError::InvalidConfig("n_hidden must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(MlpError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(MlpError::InvalidConfig(format!(
                "weight_decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// Weights of a trained (or freshly initialized) network. Output width
/// always equals input width.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    w1: DMatrix<f64>, // n_hidden x n_inputs
    b1: DVector<f64>, // n_hidden
    w2: DMatrix<f64>, // n_inputs x n_hidden
    b2: DVector<f64>, // n_inputs
    config: MlpConfig,
}

/// Gradients of the training loss with respect to every parameter.
#[derive(Debug, Clone)]
pub struct MlpGradients {
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
}

impl MlpModel {
    /// Initialize weights uniformly in `[-1/sqrt(fan_in), +1/sqrt(fan_in)]`
    /// and biases at zero; deterministic under the config seed.
    pub fn init(config: MlpConfig) -> Result<MlpModel, MlpError> {
        config.validate()?;
        let mut rng = seeded_rng(config.seed);
        let s1 = 1.0 / (config.n_inputs as f64).sqrt();
        let s2 = 1.0 / (config.n_hidden as f64).sqrt();
        // fill row-major so the draw order is part of the format
        let w1 = DMatrix::from_fn(config.n_hidden, config.n_inputs, |_, _| {
            rng.random_range(-s1..=s1)
        });
        let w2 = DMatrix::from_fn(config.n_inputs, config.n_hidden, |_, _| {
            rng.random_range(-s2..=s2)
        });
        Ok(MlpModel {
            b1: DVector::zeros(config.n_hidden),
            b2: DVector::zeros(config.n_inputs),
            w1,
            w2,
            config,
        })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn n_inputs(&self) -> usize {
        self.config.n_inputs
    }

    pub fn n_hidden(&self) -> usize {
        self.config.n_hidden
    }

    /// Single-record forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, MlpError> {
        if x.len() != self.config.n_inputs {
            return Err(MlpError::DimensionMismatch(format!(
                "input has {} components, network expects {}",
                x.len(),
                self.config.n_inputs
            )));
        }
        let x = DVector::from_column_slice(x);
        let hidden = (&self.w1 * &x + &self.b1).map(|a| self.config.hidden_activation.apply(a));
        let out = (&self.w2 * hidden + &self.b2).map(|a| self.config.output_activation.apply(a));
        Ok(out.as_slice().to_vec())
    }

    fn check_batch(&self, data: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<(), MlpError> {
        if data.ncols() != self.config.n_inputs {
            return Err(MlpError::DimensionMismatch(format!(
                "data has {} columns, network expects {}",
                data.ncols(),
                self.config.n_inputs
            )));
        }
        if targets.shape() != data.shape() {
            return Err(MlpError::DimensionMismatch(format!(
                "targets are {:?}, data is {:?}",
                targets.shape(),
                data.shape()
            )));
        }
        Ok(())
    }

    /// Loss (mean squared error over rows and columns, plus the weight-decay
    /// penalty) and its gradients at the current parameters.
    pub fn loss_and_gradients(
        &self,
        data: &DMatrix<f64>,
        targets: &DMatrix<f64>,
    ) -> Result<(f64, MlpGradients), MlpError> {
        self.check_batch(data, targets)?;
        let n = data.nrows() as f64;
        let d = data.ncols() as f64;
        let wd = self.config.weight_decay;

        // rows are samples: A1 = X W1^T + b1
        let mut a1 = data * self.w1.transpose();
        for mut row in a1.row_iter_mut() {
            row += self.b1.transpose();
        }
        let h = a1.map(|v| self.config.hidden_activation.apply(v));
        let mut a2 = &h * self.w2.transpose();
        for mut row in a2.row_iter_mut() {
            row += self.b2.transpose();
        }
        let y = a2.map(|v| self.config.output_activation.apply(v));

        let residual = &y - targets;
        let loss = residual.norm_squared() / (n * d)
            + wd * (self.w1.norm_squared() + self.w2.norm_squared());

        // delta at the output pre-activation
        let d_a2 = residual
            .zip_map(&y, |r, yv| r * self.config.output_activation.derivative_from_output(yv))
            * (2.0 / (n * d));
        let g_w2 = d_a2.transpose() * &h + 2.0 * wd * &self.w2;
        let g_b2 = DVector::from_iterator(
            self.config.n_inputs,
            d_a2.column_iter().map(|c| c.sum()),
        );
        let d_h = &d_a2 * &self.w2;
        let d_a1 = d_h.zip_map(&h, |dv, hv| {
            dv * self.config.hidden_activation.derivative_from_output(hv)
        });
        let g_w1 = d_a1.transpose() * data + 2.0 * wd * &self.w1;
        let g_b1 = DVector::from_iterator(
            self.config.n_hidden,
            d_a1.column_iter().map(|c| c.sum()),
        );

        Ok((loss, MlpGradients { w1: g_w1, b1: g_b1, w2: g_w2, b2: g_b2 }))
    }

    /// Full-batch gradient descent for `config.epochs` epochs. Rows of `data`
    /// are samples; for autoencoder training pass `targets = data`.
    ///
    /// The returned history holds the loss at the start of each epoch.
    pub fn train(
        &self,
        data: &DMatrix<f64>,
        targets: &DMatrix<f64>,
    ) -> Result<(MlpModel, Vec<f64>), MlpError> {
        self.check_batch(data, targets)?;
        let lr = self.config.learning_rate;
        let mut model = self.clone();
        let mut history = Vec::with_capacity(self.config.epochs);
        for epoch in 0..self.config.epochs {
            let (loss, grads) = model.loss_and_gradients(data, targets)?;
            if !loss.is_finite() {
                return Err(MlpError::NonFiniteLoss { epoch });
            }
            history.push(loss);
            model.w1 -= lr * grads.w1;
            model.b1 -= lr * grads.b1;
            model.w2 -= lr * grads.w2;
            model.b2 -= lr * grads.b2;
        }
        if model.w1.iter().chain(model.w2.iter()).any(|v| !v.is_finite()) {
            return Err(MlpError::NonFiniteLoss { epoch: self.config.epochs });
        }
        Ok((model, history))
    }

    /// Mean reconstruction error: mean over rows of `|x - forward(x)|^2 / n_cols`.
    pub fn mse(&self, data: &DMatrix<f64>) -> Result<f64, MlpError> {
        if data.ncols() != self.config.n_inputs {
            return Err(MlpError::DimensionMismatch(format!(
                "data has {} columns, network expects {}",
                data.ncols(),
                self.config.n_inputs
            )));
        }
        let n = data.nrows() as f64;
        let d = data.ncols() as f64;
        let mut a1 = data * self.w1.transpose();
        for mut row in a1.row_iter_mut() {
            row += self.b1.transpose();
        }
        let h = a1.map(|v| self.config.hidden_activation.apply(v));
        let mut a2 = &h * self.w2.transpose();
        for mut row in a2.row_iter_mut() {
            row += self.b2.transpose();
        }
        let y = a2.map(|v| self.config.output_activation.apply(v));
        Ok((y - data).norm_squared() / (n * d))
    }

    /// Serialize to a flat text format: a header with dimensions, activations
    /// and hyperparameters, then row-major weight and bias arrays. Values use
    /// the shortest representation that parses back to the identical f64, so
    /// the round-trip is exact.
    pub fn save(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "mlp")?;
        writeln!(w, "n_inputs {}", self.config.n_inputs)?;
        writeln!(w, "n_hidden {}", self.config.n_hidden)?;
        writeln!(w, "hidden_activation {}", self.config.hidden_activation.name())?;
        writeln!(w, "output_activation {}", self.config.output_activation.name())?;
        writeln!(w, "epochs {}", self.config.epochs)?;
        writeln!(w, "learning_rate {}", self.config.learning_rate)?;
        writeln!(w, "weight_decay {}", self.config.weight_decay)?;
        writeln!(w, "seed {}", self.config.seed)?;
        writeln!(w, "w1 {}", join(self.w1.transpose().as_slice()))?;
        writeln!(w, "b1 {}", join(self.b1.as_slice()))?;
        writeln!(w, "w2 {}", join(self.w2.transpose().as_slice()))?;
        writeln!(w, "b2 {}", join(self.b2.as_slice()))?;
        Ok(())
    }

    pub fn load(r: impl Read) -> Result<MlpModel, MlpError> {
        let mut lines = BufReader::new(r).lines();
        let magic = next_line(&mut lines)?;
        if magic.trim() != "mlp" {
            return Err(MlpError::MalformedModel("missing 'mlp' header".into()));
        }
        let n_inputs: usize = parse_field(&mut lines, "n_inputs")?;
        let n_hidden: usize = parse_field(&mut lines, "n_hidden")?;
        let hidden_activation = HiddenActivation::parse(&parse_field::<String>(
            &mut lines,
            "hidden_activation",
        )?)
        .ok_or_else(|| MlpError::MalformedModel("unknown hidden activation".into()))?;
        let output_activation = OutputActivation::parse(&parse_field::<String>(
            &mut lines,
            "output_activation",
        )?)
        .ok_or_else(|| MlpError::MalformedModel("unknown output activation".into()))?;
        let epochs: usize = parse_field(&mut lines, "epochs")?;
        let learning_rate: f64 = parse_field(&mut lines, "learning_rate")?;
        let weight_decay: f64 = parse_field(&mut lines, "weight_decay")?;
        let seed: u64 = parse_field(&mut lines, "seed")?;
        let w1 = parse_floats(&mut lines, "w1", n_hidden * n_inputs)?;
        let b1 = parse_floats(&mut lines, "b1", n_hidden)?;
        let w2 = parse_floats(&mut lines, "w2", n_inputs * n_hidden)?;
        let b2 = parse_floats(&mut lines, "b2", n_inputs)?;
        let config = MlpConfig {
            n_inputs,
            n_hidden,
            hidden_activation,
            output_activation,
            epochs,
            learning_rate,
            weight_decay,
            seed,
        };
        config.validate()?;
        Ok(MlpModel {
            w1: DMatrix::from_row_slice(n_hidden, n_inputs, &w1),
            b1: DVector::from_vec(b1),
            w2: DMatrix::from_row_slice(n_inputs, n_hidden, &w2),
            b2: DVector::from_vec(b2),
            config,
        })
    }

    #[cfg(test)]
    pub(crate) fn from_parts(
        w1: DMatrix<f64>,
        b1: DVector<f64>,
        w2: DMatrix<f64>,
        b2: DVector<f64>,
        config: MlpConfig,
    ) -> MlpModel {
        MlpModel { w1, b1, w2, b2, config }
    }

    #[cfg(test)]
    pub(crate) fn perturbed(&self, param: usize, index: usize, delta: f64) -> MlpModel {
        let mut m = self.clone();
        match param {
            0 => m.w1[index] += delta,
            1 => m.b1[index] += delta,
            2 => m.w2[index] += delta,
            _ => m.b2[index] += delta,
        }
        m
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" ")
}

fn next_line(lines: &mut impl Iterator<Item = std::io::Result<String>>) -> Result<String, MlpError> {
    lines
        .next()
        .ok_or_else(|| MlpError::MalformedModel("unexpected end of file".into()))?
        .map_err(MlpError::Io)
}

fn parse_field<T: std::str::FromStr>(
    lines: &mut impl Iterator<Item = std::io::Result<String>>,
    key: &str,
) -> Result<T, MlpError> {
    let line = next_line(lines)?;
    let rest = line
        .strip_prefix(key)
        .ok_or_else(|| MlpError::MalformedModel(format!("expected '{key}', got {line:?}")))?;
    rest.trim()
        .parse()
        .map_err(|_| MlpError::MalformedModel(format!("cannot parse value for '{key}'")))
}

fn parse_floats(
    lines: &mut impl Iterator<Item = std::io::Result<String>>,
    key: &str,
    expected: usize,
) -> Result<Vec<f64>, MlpError> {
    let line = next_line(lines)?;
    let rest = line
        .strip_prefix(key)
        .ok_or_else(|| MlpError::MalformedModel(format!("expected '{key}', got {line:?}")))?;
    let values: Result<Vec<f64>, _> = rest.split_whitespace().map(str::parse).collect();
    let values =
        values.map_err(|_| MlpError::MalformedModel(format!("bad number in '{key}'")))?;
    if values.len() != expected {
        return Err(MlpError::MalformedModel(format!(
            "'{key}' has {} values, expected {expected}",
            values.len()
        )));
    }
    Ok(values)
}
