//! Minimal feedforward engine: initialization, (masked) forward pass,
//! cross-entropy backprop, Adam and a binary model format.

mod activation;
mod adam;
mod backprop;
mod config;
mod io;
mod network;
mod train;

pub use activation::{cross_entropy, softmax, PROB_FLOOR};
pub use adam::{adam_step, AdamParams, AdamState};
pub use backprop::{backward, Gradients};
pub use config::{NetworkConfig, NUM_CLASSES};
pub use io::{
    decode_network, encode_network, load_network, save_network, MODEL_MAGIC, MODEL_VERSION,
};
pub(crate) use network::ForwardScratch;
pub use network::{init_network, DropoutMask, Layer, Network};
pub use train::{accuracy, train, TrainOutcome};
