use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of classes; class 1 is fraud, class 0 is genuine.
pub const NUM_CLASSES: usize = 2;

/// Architecture and optimizer settings for one network.
///
/// The shape is fixed: input, three ReLU hidden layers, softmax output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_units: usize,
    pub hidden_units: [usize; 3],
    pub output_units: usize,
    pub dropout_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
}

impl NetworkConfig {
    /// Defaults of the reference experiment: dropout 0.3, 50 epochs, Adam at 1e-3.
    pub fn new(input_units: usize, hidden_units: [usize; 3]) -> Self {
        Self {
            input_units,
            hidden_units,
            output_units: NUM_CLASSES,
            dropout_rate: 0.3,
            epochs: 50,
            batch_size: 128,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
        }
    }

    /// The single MCD network: 256 / 64 / 16 hidden units.
    pub fn mcd_default(input_units: usize) -> Self {
        Self::new(input_units, [256, 64, 16])
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_units == 0 {
            return Err(Error::Config("input_units must be at least 1".into()));
        }
        if let Some(i) = self.hidden_units.iter().position(|&h| h == 0) {
            return Err(Error::Config(format!(
                "hidden layer {} has zero units",
                i + 1
            )));
        }
        if self.output_units != NUM_CLASSES {
            return Err(Error::Config(format!(
                "output_units must be {NUM_CLASSES}, got {}",
                self.output_units
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!(
                "dropout_rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        for (name, b) in [
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must be in [0, 1), got {b}")));
            }
        }
        if !(self.adam_epsilon > 0.0 && self.adam_epsilon.is_finite()) {
            return Err(Error::Config("adam_epsilon must be positive".into()));
        }
        Ok(())
    }

    /// `[input, h1, h2, h3, output]`.
    pub fn layer_widths(&self) -> [usize; 5] {
        let [a, b, c] = self.hidden_units;
        [self.input_units, a, b, c, self.output_units]
    }
}
