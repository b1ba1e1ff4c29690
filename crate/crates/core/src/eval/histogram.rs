use serde::{Deserialize, Serialize};

use super::check_aligned;
use crate::error::{Error, Result};
use crate::uq::UncertaintyEstimate;

pub const DEFAULT_HIST_BINS: usize = 50;

/// Normalized-entropy histogram split by correct / incorrect predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyHistogram {
    /// `bins + 1` edges from 0 to 1; bin k is `[edges[k], edges[k+1])`,
    /// the last bin closed.
    pub edges: Vec<f64>,
    pub correct: Vec<usize>,
    pub incorrect: Vec<usize>,
    pub mean_correct: Option<f64>,
    pub mean_incorrect: Option<f64>,
}

pub fn export_entropy_histogram(
    estimates: &[UncertaintyEstimate],
    labels: &[u8],
    bins: usize,
) -> Result<EntropyHistogram> {
    if bins < 1 {
        return Err(Error::Input("histogram needs at least one bin".into()));
    }
    check_aligned(estimates, labels)?;
    let mut correct = vec![0; bins];
    let mut incorrect = vec![0; bins];
    let (mut sum_c, mut sum_i) = (0.0, 0.0);
    for (e, &y) in estimates.iter().zip(labels) {
        let h = e.entropy_norm.clamp(0.0, 1.0);
        let k = ((h * bins as f64) as usize).min(bins - 1);
        if e.predicted_class == y as usize {
            correct[k] += 1;
            sum_c += h;
        } else {
            incorrect[k] += 1;
            sum_i += h;
        }
    }
    let n_c: usize = correct.iter().sum();
    let n_i: usize = incorrect.iter().sum();
    Ok(EntropyHistogram {
        edges: (0..=bins).map(|k| k as f64 / bins as f64).collect(),
        correct,
        incorrect,
        mean_correct: (n_c > 0).then(|| sum_c / n_c as f64),
        mean_incorrect: (n_i > 0).then(|| sum_i / n_i as f64),
    })
}

impl EntropyHistogram {
    /// `bin_lo,bin_hi,correct,incorrect` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_lo,bin_hi,correct,incorrect\n");
        for k in 0..self.correct.len() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                self.edges[k],
                self.edges[k + 1],
                self.correct[k],
                self.incorrect[k]
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_at_zero_for_confident_correct() {
        let ests: Vec<_> = (0..5)
            .map(|_| UncertaintyEstimate::from_mean(vec![1.0, 0.0]))
            .collect();
        let h = export_entropy_histogram(&ests, &[0; 5], 50).unwrap();
        assert_eq!(h.correct[0], 5);
        assert_eq!(h.correct.iter().sum::<usize>(), 5);
        assert!(h.incorrect.iter().all(|&c| c == 0));
        assert_eq!((h.mean_correct, h.mean_incorrect), (Some(0.0), None));
        assert_eq!((h.edges[0], h.edges[50]), (0.0, 1.0));
    }

    #[test]
    fn counts_cover_all_and_top_edge_is_closed() {
        let ests = vec![
            UncertaintyEstimate::from_mean(vec![0.5, 0.5]),
            UncertaintyEstimate::from_mean(vec![0.7, 0.3]),
            UncertaintyEstimate::from_mean(vec![0.2, 0.8]),
        ];
        let h = export_entropy_histogram(&ests, &[1, 0, 0], 10).unwrap();
        assert_eq!(
            h.correct.iter().sum::<usize>() + h.incorrect.iter().sum::<usize>(),
            3
        );
        assert_eq!(h.incorrect[9], 1);
        assert_eq!(h.incorrect[7], 1);
        assert_eq!(h.to_csv().lines().count(), 11);
    }
}
