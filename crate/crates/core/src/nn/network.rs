use rand::Rng;

use super::activation::softmax_in_place;
use super::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// One affine map `z = W a + b`, `W` stored row-major as `rows x cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    pub fn zeros_like(other: &Layer) -> Self {
        Self::zeros(other.rows, other.cols)
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn affine_into(&self, input: &[f64], out: &mut [f64]) {
        debug_assert_eq!(input.len(), self.cols);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.bias[r] + dot(self.row(r), input);
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub(crate) fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(self.bias.iter())
    }

    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-hidden-layer multipliers applied after ReLU.
///
/// Entries are `0` (dropped) or `1 / (1 - rate)` (kept, inverted scaling), so
/// the same forward path serves deterministic and stochastic evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    pub keep_prob: f64,
    pub layers: Vec<Vec<f64>>,
}

impl DropoutMask {
    /// Mask that keeps every unit; equivalent to no mask.
    pub fn identity(hidden_units: &[usize; 3]) -> Self {
        Self {
            keep_prob: 1.0,
            layers: hidden_units.iter().map(|&h| vec![1.0; h]).collect(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(hidden_units: &[usize; 3], rate: f64, rng: &mut R) -> Self {
        let mut m = Self {
            keep_prob: 1.0 - rate,
            layers: hidden_units.iter().map(|&h| vec![0.0; h]).collect(),
        };
        m.resample(rng);
        m
    }

    /// Redraws every entry in place, keeping `keep_prob`.
    pub fn resample<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let rate = 1.0 - self.keep_prob;
        let scale = 1.0 / self.keep_prob;
        for layer in &mut self.layers {
            for v in layer.iter_mut() {
                *v = if rng.random::<f64>() < rate {
                    0.0
                } else {
                    scale
                };
            }
        }
    }

    fn check(&self, hidden_units: &[usize; 3]) -> Result<()> {
        let ok = self.layers.len() == 3
            && self
                .layers
                .iter()
                .zip(hidden_units)
                .all(|(l, &h)| l.len() == h);
        if ok {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "dropout mask layout does not match hidden units {hidden_units:?}"
            )))
        }
    }
}

/// Fully connected classifier with three ReLU hidden layers and a softmax head.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub config: NetworkConfig,
    pub layers: Vec<Layer>,
}

/// He-uniform initialization, zero biases. Deterministic in `seed`.
pub fn init_network(config: &NetworkConfig, seed: u64) -> Result<Network> {
    config.validate()?;
    let mut rng = stream_rng(seed, "init", &[]);
    let widths = config.layer_widths();
    let layers = widths
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            let mut layer = Layer::zeros(fan_out, fan_in);
            for v in &mut layer.weights {
                *v = rng.random_range(-limit..limit);
            }
            layer
        })
        .collect();
    let mut config = config.clone();
    config.seed = seed;
    Ok(Network { config, layers })
}

impl Network {
    pub fn input_units(&self) -> usize {
        self.config.input_units
    }

    pub fn hidden_units(&self) -> &[usize; 3] {
        &self.config.hidden_units
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_units() {
            return Err(Error::Shape(format!(
                "input has {} features, network expects {}",
                x.len(),
                self.input_units()
            )));
        }
        Ok(())
    }

    /// Class probabilities for `x`, optionally under a dropout mask.
    pub fn forward(&self, x: &[f64], mask: Option<&DropoutMask>) -> Result<Vec<f64>> {
        self.check_input(x)?;
        if let Some(m) = mask {
            m.check(self.hidden_units())?;
        }
        let mut pre = vec![0.0; self.layers[0].rows];
        self.layers[0].affine_into(x, &mut pre);
        let mut scratch = ForwardScratch::new(self);
        let mut out = vec![0.0; self.config.output_units];
        self.forward_from_first(&pre, mask, &mut scratch, &mut out);
        if out.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric(
                "forward pass produced a non-finite probability".into(),
            ));
        }
        Ok(out)
    }

    /// First-layer pre-activation `W1 x + b1`. Dropout never touches the
    /// input, so repeated stochastic passes can share this product.
    pub fn first_preactivation(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut pre = vec![0.0; self.layers[0].rows];
        self.layers[0].affine_into(x, &mut pre);
        Ok(pre)
    }

    /// Completes a forward pass from a cached first-layer pre-activation.
    pub(crate) fn forward_from_first(
        &self,
        pre1: &[f64],
        mask: Option<&DropoutMask>,
        scratch: &mut ForwardScratch,
        out: &mut [f64],
    ) {
        let ForwardScratch { a, b } = scratch;
        let h1 = &mut a[..pre1.len()];
        h1.copy_from_slice(pre1);
        relu_mask(h1, mask.map(|m| m.layers[0].as_slice()));

        let h2 = &mut b[..self.layers[1].rows];
        self.layers[1].affine_into(h1, h2);
        relu_mask(h2, mask.map(|m| m.layers[1].as_slice()));

        let h3 = &mut a[..self.layers[2].rows];
        self.layers[2].affine_into(h2, h3);
        relu_mask(h3, mask.map(|m| m.layers[2].as_slice()));

        self.layers[3].affine_into(h3, out);
        softmax_in_place(out);
    }
}

#[inline]
fn relu_mask(h: &mut [f64], mask: Option<&[f64]>) {
    match mask {
        Some(m) => {
            for (v, k) in h.iter_mut().zip(m) {
                *v = v.max(0.0) * k;
            }
        }
        None => {
            for v in h.iter_mut() {
                *v = v.max(0.0);
            }
        }
    }
}

/// Reusable ping-pong buffers for hidden activations.
pub(crate) struct ForwardScratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ForwardScratch {
    pub(crate) fn new(net: &Network) -> Self {
        let widest = net.hidden_units().iter().copied().max().unwrap_or(0);
        Self {
            a: vec![0.0; widest],
            b: vec![0.0; widest],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> NetworkConfig {
        NetworkConfig::new(4, [3, 3, 2])
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_network(&small(), 7).unwrap();
        let b = init_network(&small(), 7).unwrap();
        assert_eq!(a, b);
        let bits = |n: &Network| -> Vec<u64> {
            n.layers
                .iter()
                .flat_map(|l| l.params().map(|v| v.to_bits()).collect::<Vec<_>>())
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a, init_network(&small(), 8).unwrap());
    }

    #[test]
    fn init_rejects_zero_width() {
        let c = NetworkConfig::new(4, [0, 3, 2]);
        assert!(matches!(init_network(&c, 7), Err(Error::Config(_))));
    }

    #[test]
    fn init_shapes_and_bounds() {
        let net = init_network(&NetworkConfig::mcd_default(385), 1).unwrap();
        assert_eq!((net.layers[0].rows, net.layers[0].cols), (256, 385));
        assert_eq!((net.layers[3].rows, net.layers[3].cols), (2, 16));
        let limit = (6.0f64 / 385.0).sqrt();
        assert!(net.layers[0].weights.iter().all(|w| w.abs() <= limit));
        assert!(net.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn zero_network_outputs_uniform() {
        let mut net = init_network(&small(), 3).unwrap();
        for l in &mut net.layers {
            l.params_mut().for_each(|v| *v = 0.0);
        }
        assert_eq!(
            net.forward(&[1.0, -2.0, 3.0, 0.5], None).unwrap(),
            vec![0.5, 0.5]
        );
    }

    #[test]
    fn identity_mask_matches_no_mask() {
        let net = init_network(&small(), 11).unwrap();
        let x = [0.3, -1.2, 2.0, 0.1];
        let id = DropoutMask::identity(net.hidden_units());
        let mut rng = stream_rng(0, "t", &[]);
        let zero_rate = DropoutMask::sample(net.hidden_units(), 0.0, &mut rng);
        let plain = net.forward(&x, None).unwrap();
        assert_eq!(plain, net.forward(&x, Some(&id)).unwrap());
        assert_eq!(plain, net.forward(&x, Some(&zero_rate)).unwrap());
        assert!((plain.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mask_entries_are_zero_or_scaled() {
        let mut rng = stream_rng(5, "t", &[]);
        let m = DropoutMask::sample(&[50, 40, 30], 0.3, &mut rng);
        let s = 1.0 / 0.7;
        assert!(m.layers.iter().flatten().all(|&v| v == 0.0 || v == s));
        assert!(m.layers.iter().flatten().any(|&v| v == 0.0));
    }

    #[test]
    fn shape_errors() {
        let net = init_network(&small(), 1).unwrap();
        assert!(matches!(net.forward(&[1.0; 3], None), Err(Error::Shape(_))));
        let bad = DropoutMask::identity(&[3, 3, 3]);
        assert!(matches!(
            net.forward(&[1.0; 4], Some(&bad)),
            Err(Error::Shape(_))
        ));
    }
}
