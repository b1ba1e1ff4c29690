use super::activation::{cross_entropy, softmax_in_place};
use super::network::{DropoutMask, Layer, Network};
use crate::error::{Error, Result};

/// Gradients of the mean loss, one entry per affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net.layers.iter().map(Layer::zeros_like).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.params())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.params_mut().for_each(|g| *g *= s);
        }
    }
}

/// Activations kept from the forward pass of one sample.
struct Trace {
    /// `acts[l]` is the input to layer `l` (after ReLU and mask for l > 0).
    acts: Vec<Vec<f64>>,
    /// Hidden pre-activations, for the ReLU derivative.
    pre: Vec<Vec<f64>>,
    probs: Vec<f64>,
    delta: Vec<Vec<f64>>,
}

impl Trace {
    fn new(net: &Network) -> Self {
        let w = net.config.layer_widths();
        Self {
            acts: w[..4].iter().map(|&n| vec![0.0; n]).collect(),
            pre: w[1..4].iter().map(|&n| vec![0.0; n]).collect(),
            probs: vec![0.0; w[4]],
            delta: w[1..].iter().map(|&n| vec![0.0; n]).collect(),
        }
    }
}

/// Mean cross-entropy over the batch and its gradient w.r.t. every parameter.
///
/// `masks`, when given, holds one dropout mask per sample.
pub fn backward(
    net: &Network,
    inputs: &[&[f64]],
    labels: &[usize],
    masks: Option<&[DropoutMask]>,
) -> Result<(Gradients, f64)> {
    if inputs.is_empty() {
        return Err(Error::Input("backward needs a nonempty batch".into()));
    }
    if labels.len() != inputs.len() {
        return Err(Error::Shape(format!(
            "{} inputs but {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    if let Some(m) = masks {
        if m.len() != inputs.len() {
            return Err(Error::Shape(format!(
                "{} inputs but {} dropout masks",
                inputs.len(),
                m.len()
            )));
        }
    }
    let mut grads = Gradients::zeros_like(net);
    let mut trace = Trace::new(net);
    let mut loss = 0.0;
    for (i, (&x, &label)) in inputs.iter().zip(labels).enumerate() {
        if x.len() != net.input_units() {
            return Err(Error::Shape(format!(
                "sample {i} has {} features, network expects {}",
                x.len(),
                net.input_units()
            )));
        }
        if label >= net.config.output_units {
            return Err(Error::Input(format!("label {label} out of range")));
        }
        let mask = masks.map(|m| &m[i]);
        loss += accumulate_sample(net, x, label, mask, &mut trace, &mut grads)?;
    }
    let inv = 1.0 / inputs.len() as f64;
    grads.scale(inv);
    Ok((grads, loss * inv))
}

fn accumulate_sample(
    net: &Network,
    x: &[f64],
    label: usize,
    mask: Option<&DropoutMask>,
    t: &mut Trace,
    grads: &mut Gradients,
) -> Result<f64> {
    t.acts[0].copy_from_slice(x);
    for l in 0..3 {
        let (lower, upper) = t.acts.split_at_mut(l + 1);
        net.layers[l].affine_into(&lower[l], &mut t.pre[l]);
        let out = &mut upper[0];
        for (j, (o, &z)) in out.iter_mut().zip(&t.pre[l]).enumerate() {
            let keep = mask.map_or(1.0, |m| m.layers[l][j]);
            *o = z.max(0.0) * keep;
        }
    }
    net.layers[3].affine_into(&t.acts[3], &mut t.probs);
    softmax_in_place(&mut t.probs);
    let loss = cross_entropy(&t.probs, label)?;

    // dL/dz at the output is p - onehot(label)
    for (d, &p) in t.delta[3].iter_mut().zip(&t.probs) {
        *d = p;
    }
    t.delta[3][label] -= 1.0;

    for l in (0..4).rev() {
        let layer = &net.layers[l];
        let g = &mut grads.layers[l];
        let a = &t.acts[l];
        for r in 0..layer.rows {
            let d = t.delta[l][r];
            if d == 0.0 {
                continue;
            }
            g.bias[r] += d;
            let row = &mut g.weights[r * layer.cols..(r + 1) * layer.cols];
            for (gw, &av) in row.iter_mut().zip(a) {
                *gw += d * av;
            }
        }
        if l == 0 {
            break;
        }
        let (lower, upper) = t.delta.split_at_mut(l);
        let below = &mut lower[l - 1];
        below.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..layer.rows {
            let d = upper[0][r];
            if d == 0.0 {
                continue;
            }
            for (b, &w) in below.iter_mut().zip(layer.row(r)) {
                *b += w * d;
            }
        }
        for (j, b) in below.iter_mut().enumerate() {
            let active = t.pre[l - 1][j] > 0.0;
            let keep = mask.map_or(1.0, |m| m.layers[l - 1][j]);
            *b = if active { *b * keep } else { 0.0 };
        }
    }
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::config::NetworkConfig;
    use crate::nn::network::init_network;

    #[test]
    fn duplicated_batch_matches_single() {
        let net = init_network(&NetworkConfig::new(3, [4, 3, 2]), 9).unwrap();
        let x = [0.4, -0.7, 1.1];
        let (g1, l1) = backward(&net, &[&x], &[1], None).unwrap();
        let (g2, l2) = backward(&net, &[&x, &x], &[1, 1], None).unwrap();
        assert!((l1 - l2).abs() < 1e-15);
        for (a, b) in g1.layers.iter().zip(&g2.layers) {
            for (u, v) in a.params().zip(b.params()) {
                assert!((u - v).abs() <= 1e-15 * u.abs().max(1.0));
            }
        }
    }

    #[test]
    fn saturated_correct_prediction_has_vanishing_gradient() {
        let mut net = init_network(&NetworkConfig::new(3, [4, 3, 2]), 2).unwrap();
        net.layers[3].bias = vec![-40.0, 40.0];
        let x = [0.2, 0.1, -0.3];
        let (g, loss) = backward(&net, &[&x], &[1], None).unwrap();
        assert!(loss < 1e-12);
        assert!(g.norm() < 1e-6, "norm {}", g.norm());
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        let net = init_network(&NetworkConfig::new(3, [4, 3, 2]), 2).unwrap();
        assert!(matches!(
            backward(&net, &[], &[], None),
            Err(Error::Input(_))
        ));
        let x = [0.0; 2];
        assert!(matches!(
            backward(&net, &[&x], &[0], None),
            Err(Error::Shape(_))
        ));
        let x = [0.0; 3];
        assert!(matches!(
            backward(&net, &[&x], &[2], None),
            Err(Error::Input(_))
        ));
    }
}
