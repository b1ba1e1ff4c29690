use serde::{Deserialize, Serialize};

use super::confusion::{uq_confusion, uq_metrics, UqConfusion, UqMetrics};
use crate::error::{Error, Result};
use crate::uq::UncertaintyEstimate;

/// `0.1, 0.2, .., 0.9`, each computed as `k / 10`.
pub fn default_thresholds() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub confusion: UqConfusion,
    pub metrics: UqMetrics,
}

/// UQ confusion and metrics at each threshold; thresholds must be strictly
/// increasing and inside `[0, 1]`.
pub fn threshold_sweep(
    estimates: &[UncertaintyEstimate],
    labels: &[u8],
    thresholds: &[f64],
) -> Result<Vec<SweepRow>> {
    if thresholds.is_empty() {
        return Err(Error::Input("threshold list is empty".into()));
    }
    if thresholds
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::Input(
            "thresholds must be strictly increasing".into(),
        ));
    }
    thresholds
        .iter()
        .map(|&t| {
            let confusion = uq_confusion(estimates, labels, t)?;
            Ok(SweepRow {
                confusion,
                metrics: uq_metrics(&confusion),
            })
        })
        .collect()
}
