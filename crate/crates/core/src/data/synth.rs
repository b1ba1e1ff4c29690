use rand_distr::{Distribution, StandardNormal};

use super::table::FeatureTable;
use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// Two unit-covariance Gaussian blobs with means `±(separation / 2) u`,
/// `u = (1, .., 1) / sqrt(d)`. Class 0 rows come first, then class 1.
pub fn synth_generate(
    n_per_class: usize,
    d: usize,
    class_separation: f64,
    noise_seed: u64,
) -> Result<FeatureTable> {
    if n_per_class == 0 {
        return Err(Error::Input("n_per_class must be at least 1".into()));
    }
    if d < 2 {
        return Err(Error::Input(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    if !class_separation.is_finite() {
        return Err(Error::Input("class separation must be finite".into()));
    }
    let mut rng = stream_rng(noise_seed, "synth", &[]);
    let offset = class_separation / 2.0 / (d as f64).sqrt();
    let mut features = Vec::with_capacity(2 * n_per_class * d);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for class in [0u8, 1] {
        let sign = if class == 1 { 1.0 } else { -1.0 };
        for _ in 0..n_per_class {
            for _ in 0..d {
                let z: f64 = StandardNormal.sample(&mut rng);
                features.push(sign * offset + z);
            }
            labels.push(class);
        }
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    FeatureTable::new(
        names,
        features,
        labels,
        format!(
            "synth n_per_class={n_per_class} d={d} separation={class_separation} seed={noise_seed}"
        ),
    )
}

/// Nearest-class-mean rule using the true generating means; the
/// Bayes-optimal classifier for this generator.
pub fn nearest_mean_accuracy(table: &FeatureTable) -> f64 {
    let correct = (0..table.n_rows())
        .filter(|&i| {
            let s: f64 = table.row(i).iter().sum();
            u8::from(s > 0.0) == table.label(i)
        })
        .count();
    correct as f64 / table.n_rows() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_balance_and_determinism() {
        let t = synth_generate(50, 3, 4.0, 1).unwrap();
        assert_eq!((t.n_rows(), t.n_cols()), (100, 3));
        assert_eq!(t.labels().iter().filter(|&&l| l == 1).count(), 50);
        assert_eq!(t, synth_generate(50, 3, 4.0, 1).unwrap());
        assert_ne!(t, synth_generate(50, 3, 4.0, 2).unwrap());
    }

    #[test]
    fn separation_controls_difficulty() {
        let easy = synth_generate(500, 2, 8.0, 4).unwrap();
        assert!(nearest_mean_accuracy(&easy) > 0.99);
        let flat = synth_generate(500, 2, 0.0, 4).unwrap();
        assert!((nearest_mean_accuracy(&flat) - 0.5).abs() < 0.05);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(synth_generate(0, 2, 1.0, 0).is_err());
        assert!(synth_generate(3, 1, 1.0, 0).is_err());
    }
}
