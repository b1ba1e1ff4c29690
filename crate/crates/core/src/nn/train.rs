use rand::seq::SliceRandom;

use super::adam::{adam_step, AdamParams, AdamState};
use super::backprop::backward;
use super::config::NetworkConfig;
use super::network::{init_network, DropoutMask, Network};
use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// A trained network plus the mean training loss of every epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: Network,
    pub loss_history: Vec<f64>,
}

/// Mini-batch Adam on mean cross-entropy.
///
/// Rows are reshuffled every epoch and each sample gets a fresh dropout mask.
/// Initialization, shuffling and mask streams all derive from `seed`.
pub fn train(config: &NetworkConfig, data: &FeatureTable, seed: u64) -> Result<TrainOutcome> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Input("training table is empty".into()));
    }
    if data.n_cols() != config.input_units {
        return Err(Error::Shape(format!(
            "training table has {} features, network expects {}",
            data.n_cols(),
            config.input_units
        )));
    }
    let mut net = init_network(config, seed)?;
    let mut state = AdamState::new(&net);
    let params = AdamParams::from_config(config);
    let mut order: Vec<usize> = (0..data.n_rows()).collect();
    let mut shuffle_rng = stream_rng(seed, "shuffle", &[]);
    let mut mask_rng = stream_rng(seed, "train-dropout", &[]);
    let use_dropout = config.dropout_rate > 0.0;
    let mut masks: Vec<DropoutMask> = Vec::new();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let inputs: Vec<&[f64]> = batch.iter().map(|&i| data.row(i)).collect();
            let labels: Vec<usize> = batch.iter().map(|&i| data.label(i) as usize).collect();
            if use_dropout {
                masks.resize_with(batch.len(), || {
                    DropoutMask::sample(&config.hidden_units, config.dropout_rate, &mut mask_rng)
                });
                for m in &mut masks[..batch.len()] {
                    m.resample(&mut mask_rng);
                }
            }
            let mask_slice = use_dropout.then(|| &masks[..batch.len()]);
            let (grads, loss) = backward(&net, &inputs, &labels, mask_slice)?;
            adam_step(&mut net, &grads, &mut state, params)?;
            epoch_loss += loss * batch.len() as f64;
        }
        if net
            .layers
            .iter()
            .any(|l| l.params().any(|w| !w.is_finite()))
        {
            return Err(Error::Numeric(format!(
                "non-finite weight after epoch {}",
                epoch + 1
            )));
        }
        history.push(epoch_loss / data.n_rows() as f64);
    }
    Ok(TrainOutcome {
        network: net,
        loss_history: history,
    })
}

/// Fraction of rows whose argmax prediction (no dropout) matches the label.
pub fn accuracy(net: &Network, data: &FeatureTable) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Input("accuracy of an empty table".into()));
    }
    let mut correct = 0usize;
    for i in 0..data.n_rows() {
        let p = net.forward(data.row(i), None)?;
        let pred = usize::from(p[1] > p[0]);
        correct += usize::from(pred == data.label(i) as usize);
    }
    Ok(correct as f64 / data.n_rows() as f64)
}
