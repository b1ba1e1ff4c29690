use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::calibration::{compute_ece, CalibrationBins};
use super::classic::{classic_metrics, ClassicMetrics};
use super::histogram::{export_entropy_histogram, EntropyHistogram};
use super::sweep::{threshold_sweep, SweepRow};
use crate::error::{Error, Result};
use crate::uq::{Method, UncertaintyEstimate};

pub const REPORT_VERSION: u32 = 1;

/// Everything the evaluator produces for one method's predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UqReport {
    pub version: u32,
    pub method: Method,
    pub seed: u64,
    pub config_digest: String,
    pub n: usize,
    pub calibration: CalibrationBins,
    pub classic: ClassicMetrics,
    pub sweep: Vec<SweepRow>,
    pub entropy_histogram: EntropyHistogram,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub thresholds: Vec<f64>,
    pub ece_bins: usize,
    pub hist_bins: usize,
    pub seed: u64,
    pub config_digest: String,
}

pub fn build_report(
    method: Method,
    estimates: &[UncertaintyEstimate],
    labels: &[u8],
    opts: &ReportOptions,
) -> Result<UqReport> {
    Ok(UqReport {
        version: REPORT_VERSION,
        method,
        seed: opts.seed,
        config_digest: opts.config_digest.clone(),
        n: estimates.len(),
        calibration: compute_ece(estimates, labels, opts.ece_bins)?,
        classic: classic_metrics(estimates, labels)?,
        sweep: threshold_sweep(estimates, labels, &opts.thresholds)?,
        entropy_histogram: export_entropy_histogram(estimates, labels, opts.hist_bins)?,
    })
}

/// Undefined ratios print as `undefined`.
pub fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| x.to_string())
}

impl UqReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::format(0, format!("report: {e}")))
    }

    /// Flat per-threshold table.
    pub fn sweep_csv(&self) -> String {
        let mut s = format!(
            "# uqfraud sweep v{} method={} seed={} config={}\n",
            self.version, self.method, self.seed, self.config_digest
        );
        s.push_str("threshold,tc,tu,fu,fc,uacc,usen,uspe,upre\n");
        for r in &self.sweep {
            let c = r.confusion.counts;
            let m = r.metrics;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.confusion.threshold,
                c.tc,
                c.tu,
                c.fu,
                c.fc,
                fmt_metric(m.uacc),
                fmt_metric(m.usen),
                fmt_metric(m.uspe),
                fmt_metric(m.upre)
            );
        }
        s
    }

    /// The sweep row at `threshold`, if it was evaluated.
    pub fn at_threshold(&self, threshold: f64) -> Option<&SweepRow> {
        self.sweep
            .iter()
            .find(|r| (r.confusion.threshold - threshold).abs() < 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::default_thresholds;

    #[test]
    fn json_round_trip_and_csv_shape() {
        let ests = vec![
            UncertaintyEstimate::from_mean(vec![0.9, 0.1]),
            UncertaintyEstimate::from_mean(vec![0.4, 0.6]),
            UncertaintyEstimate::from_mean(vec![0.55, 0.45]),
        ];
        let opts = ReportOptions {
            thresholds: default_thresholds(),
            ece_bins: 10,
            hist_bins: 20,
            seed: 1,
            config_digest: "abc".into(),
        };
        let r = build_report(Method::Mcd, &ests, &[0, 0, 1], &opts).unwrap();
        assert_eq!(UqReport::from_json(&r.to_json()).unwrap(), r);
        let csv = r.sweep_csv();
        assert_eq!(csv.lines().count(), 11);
        assert!(r.at_threshold(0.4).is_some());
        assert!(build_report(Method::Mcd, &[], &[], &opts).is_err());
    }
}
