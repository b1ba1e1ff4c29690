use serde::{Deserialize, Serialize};

use super::{check_aligned, ratio};
use crate::error::Result;
use crate::uq::UncertaintyEstimate;

/// Point-prediction metrics with fraud (class 1) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicMetrics {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

pub fn classic_metrics(estimates: &[UncertaintyEstimate], labels: &[u8]) -> Result<ClassicMetrics> {
    check_aligned(estimates, labels)?;
    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    for (e, &y) in estimates.iter().zip(labels) {
        match (e.predicted_class == 1, y == 1) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(ClassicMetrics {
        accuracy: ratio(tp + tn, tp + tn + fp + fn_),
        sensitivity: ratio(tp, tp + fn_),
        specificity: ratio(tn, tn + fp),
        precision: ratio(tp, tp + fp),
        tp,
        tn,
        fp,
        fn_,
    })
}
