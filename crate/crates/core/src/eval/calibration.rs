use serde::{Deserialize, Serialize};

use super::check_aligned;
use crate::error::{Error, Result};
use crate::uq::UncertaintyEstimate;

pub const DEFAULT_ECE_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    /// The bin covers `(lo, hi]`; bin 0 also takes confidence 0.
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Fraction correct; `None` for an empty bin.
    pub accuracy: Option<f64>,
    /// Mean confidence; `None` for an empty bin.
    pub confidence: Option<f64>,
}

impl CalibrationBin {
    pub fn gap(&self) -> f64 {
        match (self.accuracy, self.confidence) {
            (Some(a), Some(c)) => (a - c).abs(),
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBins {
    pub n: usize,
    pub bins: Vec<CalibrationBin>,
    pub ece: f64,
}

fn edge(k: usize, m: usize) -> f64 {
    k as f64 / m as f64
}

/// Index of the equal-width bin `(k/m, (k+1)/m]` holding `conf`.
pub(crate) fn bin_index(conf: f64, m: usize) -> usize {
    let mut k = ((conf * m as f64).ceil() as isize - 1).clamp(0, m as isize - 1) as usize;
    while k > 0 && conf <= edge(k, m) {
        k -= 1;
    }
    while k + 1 < m && conf > edge(k + 1, m) {
        k += 1;
    }
    k
}

/// Expected calibration error over equal-width confidence bins, with
/// confidence = max of the mean predictive distribution.
pub fn compute_ece(
    estimates: &[UncertaintyEstimate],
    labels: &[u8],
    m_bins: usize,
) -> Result<CalibrationBins> {
    if m_bins < 1 {
        return Err(Error::Input("ECE needs at least one bin".into()));
    }
    check_aligned(estimates, labels)?;
    let mut counts = vec![0usize; m_bins];
    let mut correct = vec![0usize; m_bins];
    let mut conf_sum = vec![0.0f64; m_bins];
    for (e, &y) in estimates.iter().zip(labels) {
        let c = e.confidence();
        let k = bin_index(c, m_bins);
        counts[k] += 1;
        conf_sum[k] += c;
        correct[k] += usize::from(e.predicted_class == y as usize);
    }
    let n = estimates.len();
    let bins: Vec<CalibrationBin> = (0..m_bins)
        .map(|k| {
            let cnt = counts[k];
            let (accuracy, confidence) = if cnt == 0 {
                (None, None)
            } else {
                (
                    Some(correct[k] as f64 / cnt as f64),
                    Some(conf_sum[k] / cnt as f64),
                )
            };
            CalibrationBin {
                lo: edge(k, m_bins),
                hi: edge(k + 1, m_bins),
                count: cnt,
                accuracy,
                confidence,
            }
        })
        .collect();
    let ece = bins
        .iter()
        .map(|b| b.count as f64 / n as f64 * b.gap())
        .sum::<f64>()
        .clamp(0.0, 1.0);
    Ok(CalibrationBins { n, bins, ece })
}
