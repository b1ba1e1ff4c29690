use super::backprop::Gradients;
use super::network::{Layer, Network};
use crate::error::{Error, Result};

/// First/second moment accumulators with the same layout as the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first: Vec<Layer>,
    pub second: Vec<Layer>,
    pub step: u64,
}

/// Hyper-parameters of one Adam update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamParams {
    pub fn from_config(c: &super::config::NetworkConfig) -> Self {
        Self {
            learning_rate: c.learning_rate,
            beta1: c.adam_beta1,
            beta2: c.adam_beta2,
            epsilon: c.adam_epsilon,
        }
    }
}

impl AdamState {
    pub fn new(net: &Network) -> Self {
        Self {
            first: net.layers.iter().map(Layer::zeros_like).collect(),
            second: net.layers.iter().map(Layer::zeros_like).collect(),
            step: 0,
        }
    }
}

/// Bias-corrected Adam update applied in place.
pub fn adam_step(
    net: &mut Network,
    grads: &Gradients,
    state: &mut AdamState,
    params: AdamParams,
) -> Result<()> {
    let same_shape = |a: &[Layer]| {
        a.len() == net.layers.len()
            && a.iter()
                .zip(&net.layers)
                .all(|(x, y)| x.rows == y.rows && x.cols == y.cols)
    };
    if !same_shape(&grads.layers) || !same_shape(&state.first) || !same_shape(&state.second) {
        return Err(Error::Shape(
            "gradient or optimizer state layout differs from network".into(),
        ));
    }
    state.step += 1;
    let t = state.step as i32;
    let AdamParams {
        learning_rate: lr,
        beta1: b1,
        beta2: b2,
        epsilon: eps,
    } = params;
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (((layer, g), m), v) in net
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut state.first)
        .zip(&mut state.second)
    {
        for (((w, &g), m), v) in layer
            .params_mut()
            .zip(g.params())
            .zip(m.params_mut())
            .zip(v.params_mut())
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *w -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::config::NetworkConfig;
    use crate::nn::network::init_network;

    fn setup() -> (Network, AdamParams) {
        let c = NetworkConfig::new(3, [2, 2, 2]);
        (init_network(&c, 4).unwrap(), AdamParams::from_config(&c))
    }

    fn filled(net: &Network, value: f64) -> Gradients {
        let mut g = Gradients::zeros_like(net);
        for l in &mut g.layers {
            l.params_mut().for_each(|v| *v = value);
        }
        g
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let (mut net, p) = setup();
        let before = net.clone();
        let mut s = AdamState::new(&net);
        let zero = Gradients::zeros_like(&net);
        adam_step(&mut net, &zero, &mut s, p).unwrap();
        assert_eq!(net, before);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_closed_form() {
        // m_hat = g, v_hat = g^2, so the update is -lr * g / (|g| + eps)
        let (mut net, p) = setup();
        let before = net.clone();
        let mut s = AdamState::new(&net);
        let g = 0.37;
        let grads = filled(&net, g);
        adam_step(&mut net, &grads, &mut s, p).unwrap();
        let expected = -p.learning_rate * g / (g.abs() + p.epsilon);
        for (a, b) in net.layers.iter().zip(&before.layers) {
            for (x, y) in a.params().zip(b.params()) {
                assert!(((x - y) - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_gradient_step_tends_to_lr() {
        let (mut net, p) = setup();
        let mut s = AdamState::new(&net);
        let g = filled(&net, -2.5);
        let mut last = 0.0;
        for _ in 0..2000 {
            let w0 = net.layers[0].weights[0];
            adam_step(&mut net, &g, &mut s, p).unwrap();
            last = net.layers[0].weights[0] - w0;
        }
        assert!((last - p.learning_rate).abs() < 1e-6, "{last}");
    }
}
