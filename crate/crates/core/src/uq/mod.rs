//! Predictive distributions and entropy-based uncertainty: Monte Carlo
//! dropout, deep ensembles, and ensembles evaluated with MC dropout.

mod dump;
mod ensemble;
mod estimate;
mod exact_mean;
mod mcd;

pub use dump::{DumpMeta, PredictionDump, PredictionRecord, DUMP_VERSION};
pub use ensemble::{
    emcd_estimates, emcd_predict, ensemble_estimates, ensemble_predict, train_ensemble,
    EnsembleSpec, DEFAULT_MEMBERS, DEFAULT_WIDTH_RANGES,
};
pub(crate) use estimate::check_threshold;
pub use estimate::{
    entropy, flag_certainty, summarize, Method, PredictiveSamples, SampleTag, SummaryAccumulator,
    UncertaintyEstimate,
};
pub use exact_mean::{exact_mean, ExactSum};
pub use mcd::{mcd_estimates, mcd_predict};

/// Monte Carlo passes used for MCD and EMCD evaluation by default.
pub const DEFAULT_MC_PASSES: usize = 1000;
/// Operating point for certain/uncertain flagging.
pub const DEFAULT_THRESHOLD: f64 = 0.4;
