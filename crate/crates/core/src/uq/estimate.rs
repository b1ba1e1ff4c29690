use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::exact_mean::ExactSum;
use crate::error::{Error, Result};

/// Which uncertainty method produced a set of samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mcd,
    Ensemble,
    Emcd,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mcd, Method::Ensemble, Method::Emcd];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mcd => "mcd",
            Method::Ensemble => "ensemble",
            Method::Emcd => "emcd",
        }
    }

    /// Ensemble and EMCD share the same trained member set.
    pub fn uses_ensemble(self) -> bool {
        !matches!(self, Method::Mcd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mcd" => Ok(Method::Mcd),
            "ensemble" => Ok(Method::Ensemble),
            "emcd" => Ok(Method::Emcd),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected mcd, ensemble or emcd)"
            ))),
        }
    }
}

/// Where a sample row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleTag {
    pub member: u32,
    pub pass: u32,
}

/// Softmax outputs of repeated evaluations of one input, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveSamples {
    pub method: Method,
    num_classes: usize,
    probs: Vec<f64>,
    tags: Vec<SampleTag>,
}

impl PredictiveSamples {
    pub fn new(method: Method, num_classes: usize) -> Self {
        Self {
            method,
            num_classes,
            probs: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn push(&mut self, row: &[f64], tag: SampleTag) {
        assert_eq!(row.len(), self.num_classes, "sample row width");
        self.probs.extend_from_slice(row);
        self.tags.push(tag);
    }

    pub fn num_samples(&self) -> usize {
        self.tags.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks_exact(self.num_classes)
    }

    pub fn tags(&self) -> &[SampleTag] {
        &self.tags
    }

    /// Sample variance (n - 1 denominator) of one class probability.
    pub fn variance(&self, class: usize) -> f64 {
        let n = self.num_samples();
        if n < 2 {
            return 0.0;
        }
        let mean = self.rows().map(|r| r[class]).sum::<f64>() / n as f64;
        self.rows().map(|r| (r[class] - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    }
}

/// Mean prediction and its entropy for one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyEstimate {
    pub mean_probs: Vec<f64>,
    pub predicted_class: usize,
    /// Entropy of `mean_probs` in nats.
    pub entropy_raw: f64,
    /// `entropy_raw / ln(C)`, in `[0, 1]`.
    pub entropy_norm: f64,
    /// Set by [`flag_certainty`].
    pub certain: Option<bool>,
}

impl UncertaintyEstimate {
    /// Builds an estimate directly from a mean distribution.
    pub fn from_mean(mean_probs: Vec<f64>) -> Self {
        let entropy_raw = entropy(&mean_probs);
        let c = mean_probs.len();
        let entropy_norm = if c > 1 {
            (entropy_raw / (c as f64).ln()).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let predicted_class = argmax(&mean_probs);
        Self {
            mean_probs,
            predicted_class,
            entropy_raw,
            entropy_norm,
            certain: None,
        }
    }

    /// Max of the mean distribution, used as calibration confidence.
    pub fn confidence(&self) -> f64 {
        self.mean_probs.iter().copied().fold(0.0, f64::max)
    }
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum();
    h.max(0.0)
}

/// First index of the maximum (ties go to the lower class).
fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Streaming form of [`summarize`]; holds one exact accumulator per class.
#[derive(Debug, Clone)]
pub struct SummaryAccumulator {
    sums: Vec<ExactSum>,
}

impl SummaryAccumulator {
    pub fn new(num_classes: usize) -> Self {
        Self {
            sums: vec![ExactSum::new(); num_classes],
        }
    }

    pub fn add(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.sums.len());
        for (s, &p) in self.sums.iter_mut().zip(row) {
            s.add(p);
        }
    }

    pub fn finish(&self) -> Result<UncertaintyEstimate> {
        let mean: Option<Vec<f64>> = self.sums.iter().map(ExactSum::mean).collect();
        let mean = mean.ok_or_else(|| Error::Input("cannot summarize zero samples".into()))?;
        Ok(UncertaintyEstimate::from_mean(mean))
    }
}

/// Column mean of the samples, its entropy, and the argmax class.
///
/// The mean is exactly rounded, so the result depends only on the multiset
/// of rows.
pub fn summarize(samples: &PredictiveSamples) -> Result<UncertaintyEstimate> {
    let mut acc = SummaryAccumulator::new(samples.num_classes());
    for row in samples.rows() {
        if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Numeric(
                "sample row is not a probability vector".into(),
            ));
        }
        acc.add(row);
    }
    acc.finish()
}

/// Marks an estimate certain when `entropy_norm <= threshold`.
pub fn flag_certainty(est: &UncertaintyEstimate, threshold: f64) -> Result<UncertaintyEstimate> {
    check_threshold(threshold)?;
    let mut out = est.clone();
    out.certain = Some(est.entropy_norm <= threshold);
    Ok(out)
}

pub(crate) fn check_threshold(threshold: f64) -> Result<()> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "threshold must be in [0, 1], got {threshold}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[[f64; 2]]) -> PredictiveSamples {
        let mut s = PredictiveSamples::new(Method::Mcd, 2);
        for (t, r) in rows.iter().enumerate() {
            s.push(
                r,
                SampleTag {
                    member: 0,
                    pass: t as u32,
                },
            );
        }
        s
    }

    #[test]
    fn summarize_examples() {
        let u = summarize(&from_rows(&[[0.5, 0.5]])).unwrap();
        assert_eq!(u.entropy_norm, 1.0);
        let one_hot = summarize(&from_rows(&[[1.0, 0.0]])).unwrap();
        assert_eq!((one_hot.entropy_raw, one_hot.entropy_norm), (0.0, 0.0));
        // -(0.9 ln 0.9 + 0.1 ln 0.1), and divided by ln 2
        let e = summarize(&from_rows(&[[0.9, 0.1]])).unwrap();
        assert!((e.entropy_raw - 0.3250829733914482).abs() < 1e-12);
        assert!((e.entropy_norm - 0.46899559358928117).abs() < 1e-12);
        assert_eq!(e.predicted_class, 0);
    }

    #[test]
    fn mean_over_rows_and_ties() {
        let e = summarize(&from_rows(&[[1.0, 0.0], [0.0, 1.0]])).unwrap();
        assert_eq!(e.mean_probs, vec![0.5, 0.5]);
        assert_eq!(e.entropy_norm, 1.0);
        assert_eq!(e.predicted_class, 0);
        assert!(summarize(&from_rows(&[])).is_err());
    }

    #[test]
    fn certainty_boundary() {
        let mut e = UncertaintyEstimate::from_mean(vec![0.5, 0.5]);
        e.entropy_norm = 0.39;
        assert_eq!(flag_certainty(&e, 0.4).unwrap().certain, Some(true));
        e.entropy_norm = 0.40;
        assert_eq!(flag_certainty(&e, 0.4).unwrap().certain, Some(true));
        e.entropy_norm = 0.41;
        assert_eq!(flag_certainty(&e, 0.4).unwrap().certain, Some(false));
        assert!(flag_certainty(&e, 1.5).is_err());
        assert!(flag_certainty(&e, -0.1).is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("EMCD".parse::<Method>().unwrap(), Method::Emcd);
        assert!("bayes".parse::<Method>().is_err());
        assert_eq!(Method::Ensemble.to_string(), "ensemble");
    }
}
