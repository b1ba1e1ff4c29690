use rand::seq::SliceRandom;

use super::table::FeatureTable;
use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// Disjoint, exhaustive row indices (each side sorted ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffle-and-cut split. When `stratified`, each class is cut separately
/// with `round(n_class * train_fraction)` rows going to train.
pub fn split_indices(
    labels: &[u8],
    train_fraction: f64,
    stratified: bool,
    seed: u64,
) -> Result<SplitIndices> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Input(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = stream_rng(seed, "split", &[]);
    let groups: Vec<Vec<usize>> = if stratified {
        let (ones, zeros): (Vec<usize>, Vec<usize>) =
            (0..labels.len()).partition(|&i| labels[i] == 1);
        if ones.is_empty() || zeros.is_empty() {
            return Err(Error::Input(
                "stratified split needs both classes present".into(),
            ));
        }
        vec![zeros, ones]
    } else {
        vec![(0..labels.len()).collect()]
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut g in groups {
        g.shuffle(&mut rng);
        let cut = (g.len() as f64 * train_fraction).round() as usize;
        train.extend_from_slice(&g[..cut]);
        test.extend_from_slice(&g[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

pub fn split_train_test(
    table: &FeatureTable,
    train_fraction: f64,
    stratified: bool,
    seed: u64,
) -> Result<(FeatureTable, FeatureTable)> {
    let s = split_indices(table.labels(), train_fraction, stratified, seed)?;
    Ok((table.select(&s.train), table.select(&s.test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balanced(n: usize) -> Vec<u8> {
        (0..n).map(|i| (i % 2) as u8).collect()
    }

    #[test]
    fn stratified_counts() {
        let labels = balanced(1000);
        let s = split_indices(&labels, 0.7, true, 3).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (700, 300));
        let ones = s.train.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!(ones, 350);
    }

    #[test]
    fn reference_dataset_size() {
        let labels = balanced(41_326);
        let s = split_indices(&labels, 0.7, true, 0).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (28_928, 12_398));
    }

    #[test]
    fn deterministic_partition() {
        let labels = balanced(101);
        let a = split_indices(&labels, 0.7, true, 9).unwrap();
        assert_eq!(a, split_indices(&labels, 0.7, true, 9).unwrap());
        assert_ne!(a, split_indices(&labels, 0.7, true, 10).unwrap());
        let mut all: Vec<usize> = a.train.iter().chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
    }

    #[test]
    fn invalid_inputs() {
        assert!(split_indices(&balanced(10), 0.0, true, 0).is_err());
        assert!(split_indices(&balanced(10), 1.0, false, 0).is_err());
        assert!(split_indices(&[0, 0, 0], 0.5, true, 0).is_err());
        assert!(split_indices(&[0, 0, 0], 0.5, false, 0).is_ok());
    }
}
