use serde::{Deserialize, Serialize};

use super::{check_aligned, ratio};
use crate::error::Result;
use crate::uq::{check_threshold, UncertaintyEstimate};

/// Counts of (correct | incorrect) x (certain | uncertain).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UqCounts {
    /// correct and certain
    pub tc: usize,
    /// incorrect and uncertain
    pub tu: usize,
    /// correct but uncertain
    pub fu: usize,
    /// incorrect but certain
    pub fc: usize,
}

impl UqCounts {
    pub fn total(&self) -> usize {
        self.tc + self.tu + self.fu + self.fc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UqConfusion {
    pub threshold: f64,
    #[serde(flatten)]
    pub counts: UqCounts,
}

/// Uncertainty accuracy, sensitivity, specificity and precision.
/// `None` marks a 0/0 ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UqMetrics {
    pub uacc: Option<f64>,
    pub usen: Option<f64>,
    pub uspe: Option<f64>,
    pub upre: Option<f64>,
}

/// Partitions predictions; certain means `entropy_norm <= threshold`.
pub fn uq_confusion(
    estimates: &[UncertaintyEstimate],
    labels: &[u8],
    threshold: f64,
) -> Result<UqConfusion> {
    check_threshold(threshold)?;
    check_aligned(estimates, labels)?;
    let mut c = UqCounts::default();
    for (e, &y) in estimates.iter().zip(labels) {
        let correct = e.predicted_class == y as usize;
        let certain = e.entropy_norm <= threshold;
        match (correct, certain) {
            (true, true) => c.tc += 1,
            (true, false) => c.fu += 1,
            (false, false) => c.tu += 1,
            (false, true) => c.fc += 1,
        }
    }
    Ok(UqConfusion {
        threshold,
        counts: c,
    })
}

pub fn uq_metrics(c: &UqConfusion) -> UqMetrics {
    let UqCounts { tc, tu, fu, fc } = c.counts;
    UqMetrics {
        uacc: ratio(tu + tc, tu + tc + fu + fc),
        usen: ratio(tu, tu + fc),
        uspe: ratio(tc, tc + fu),
        upre: ratio(tu, tu + fu),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(p1: f64) -> UncertaintyEstimate {
        UncertaintyEstimate::from_mean(vec![1.0 - p1, p1])
    }

    #[test]
    fn worked_fixture() {
        let c = UqConfusion {
            threshold: 0.4,
            counts: UqCounts {
                tc: 8,
                tu: 1,
                fu: 1,
                fc: 0,
            },
        };
        let m = uq_metrics(&c);
        assert_eq!(m.uacc, Some(0.9));
        assert_eq!(m.usen, Some(1.0));
        assert!((m.uspe.unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert_eq!(m.upre, Some(0.5));
    }

    #[test]
    fn counts_from_estimates() {
        // 8 correct-certain, 1 incorrect-uncertain, 1 correct-uncertain
        let mut ests: Vec<_> = (0..8).map(|_| est(0.99)).collect();
        ests.push(est(0.55));
        ests.push(est(0.45));
        let mut labels = vec![1u8; 8];
        labels.push(0);
        labels.push(0);
        let c = uq_confusion(&ests, &labels, 0.4).unwrap();
        assert_eq!(
            c.counts,
            UqCounts {
                tc: 8,
                tu: 1,
                fu: 1,
                fc: 0
            }
        );
    }

    #[test]
    fn boundaries_and_undefined() {
        let ests = vec![est(0.9), est(0.2)];
        let c = uq_confusion(&ests, &[1, 0], 0.0).unwrap();
        assert_eq!((c.counts.tc, c.counts.fc), (0, 0));
        let all_certain = uq_confusion(&ests, &[1, 0], 1.0).unwrap();
        assert_eq!(all_certain.counts.tc, 2);
        let m = uq_metrics(&all_certain);
        assert_eq!(m.usen, None);
        assert_eq!(m.upre, None);
        assert!(uq_confusion(&ests, &[1], 0.4).is_err());
        assert!(uq_confusion(&ests, &[1, 0], 1.1).is_err());
    }
}
