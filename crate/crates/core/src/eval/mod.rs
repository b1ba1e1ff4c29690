//! Calibration, uncertainty-confusion metrics, threshold sweeps, classic
//! binary metrics and plot-data exports over lists of estimates.

mod calibration;
mod classic;
mod confusion;
mod histogram;
mod report;
mod svg;
mod sweep;

pub use calibration::{compute_ece, CalibrationBin, CalibrationBins, DEFAULT_ECE_BINS};
pub use classic::{classic_metrics, ClassicMetrics};
pub use confusion::{uq_confusion, uq_metrics, UqConfusion, UqCounts, UqMetrics};
pub use histogram::{export_entropy_histogram, EntropyHistogram, DEFAULT_HIST_BINS};
pub use report::{build_report, fmt_metric, ReportOptions, UqReport, REPORT_VERSION};
pub use svg::{reliability_svg, render_reliability_svg};
pub use sweep::{default_thresholds, threshold_sweep, SweepRow};

use crate::error::{Error, Result};
use crate::uq::UncertaintyEstimate;

/// `num / den`, or `None` for 0/0.
pub(crate) fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub(crate) fn check_aligned(estimates: &[UncertaintyEstimate], labels: &[u8]) -> Result<()> {
    if estimates.is_empty() {
        return Err(Error::Input("no predictions to evaluate".into()));
    }
    if estimates.len() != labels.len() {
        return Err(Error::Input(format!(
            "{} predictions but {} labels",
            estimates.len(),
            labels.len()
        )));
    }
    Ok(())
}
