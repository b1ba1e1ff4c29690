//! Raw CSV ingestion, imputation/scaling/encoding, splits and synthetic data.

mod preprocess;
mod raw;
mod split;
mod synth;
mod table;

pub use preprocess::{
    apply_preprocessor, fit_preprocessor, ColumnTransform, PreprocessorState, PREPROCESSOR_VERSION,
};
pub use raw::{load_csv, read_csv, ColumnData, ColumnKind, RawColumn, RawTable, Schema};
pub use split::{split_indices, split_train_test, SplitIndices};
pub use synth::{nearest_mean_accuracy, synth_generate};
pub use table::FeatureTable;
