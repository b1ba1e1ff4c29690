use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::raw::{ColumnData, RawTable};
use super::table::FeatureTable;
use crate::error::{Error, Result};

pub const PREPROCESSOR_VERSION: u32 = 1;

/// Fitted transform for one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnTransform {
    /// Mean imputation then standardization with the population std.
    /// `constant` columns map to 0.
    Numeric {
        name: String,
        impute: f64,
        mean: f64,
        std: f64,
        constant: bool,
    },
    /// Mode imputation then ordinal codes in first-appearance order;
    /// unseen categories get `categories.len()`.
    Categorical {
        name: String,
        impute: String,
        categories: Vec<String>,
    },
}

impl ColumnTransform {
    pub fn name(&self) -> &str {
        match self {
            ColumnTransform::Numeric { name, .. } | ColumnTransform::Categorical { name, .. } => {
                name
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessorState {
    pub version: u32,
    pub fitted: bool,
    pub columns: Vec<ColumnTransform>,
}

impl Default for PreprocessorState {
    fn default() -> Self {
        Self {
            version: PREPROCESSOR_VERSION,
            fitted: false,
            columns: Vec::new(),
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let (mut s, mut n) = (0.0, 0usize);
    for v in values {
        s += v;
        n += 1;
    }
    (s / n as f64, n)
}

/// Learns imputation, scaling and encoding from the training rows only.
pub fn fit_preprocessor(train: &RawTable) -> Result<PreprocessorState> {
    if train.is_empty() {
        return Err(Error::Fit {
            column: train.label_name.clone(),
            message: "cannot fit on an empty table".into(),
        });
    }
    let all_missing = |name: &str| Error::Fit {
        column: name.to_string(),
        message: "column has no observed values".into(),
    };
    let mut columns = Vec::with_capacity(train.columns.len());
    for col in &train.columns {
        let t = match &col.data {
            ColumnData::Numeric(cells) => {
                let (impute, observed) = mean(cells.iter().flatten().copied());
                if observed == 0 {
                    return Err(all_missing(&col.name));
                }
                let filled = || cells.iter().map(|c| c.unwrap_or(impute));
                let (mu, n) = mean(filled());
                let var = filled().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64;
                let std = var.sqrt();
                let constant = std.partial_cmp(&(1e-12 * mu.abs().max(1.0)))
                    != Some(std::cmp::Ordering::Greater);
                ColumnTransform::Numeric {
                    name: col.name.clone(),
                    impute,
                    mean: mu,
                    std,
                    constant,
                }
            }
            ColumnData::Categorical(cells) => {
                let mut categories: Vec<String> = Vec::new();
                let mut index: HashMap<&str, usize> = HashMap::new();
                let mut counts: Vec<usize> = Vec::new();
                for c in cells.iter().flatten() {
                    let i = *index.entry(c.as_str()).or_insert_with(|| {
                        categories.push(c.clone());
                        counts.push(0);
                        categories.len() - 1
                    });
                    counts[i] += 1;
                }
                if categories.is_empty() {
                    return Err(all_missing(&col.name));
                }
                // first-appearance order breaks ties
                let mut best = 0;
                for (i, &c) in counts.iter().enumerate() {
                    if c > counts[best] {
                        best = i;
                    }
                }
                ColumnTransform::Categorical {
                    name: col.name.clone(),
                    impute: categories[best].clone(),
                    categories,
                }
            }
        };
        columns.push(t);
    }
    Ok(PreprocessorState {
        version: PREPROCESSOR_VERSION,
        fitted: true,
        columns,
    })
}

/// Applies a fitted state; output has no missing values.
pub fn apply_preprocessor(state: &PreprocessorState, table: &RawTable) -> Result<FeatureTable> {
    if !state.fitted {
        return Err(Error::Transform("preprocessor has not been fitted".into()));
    }
    if state.columns.len() != table.columns.len() {
        return Err(Error::Transform(format!(
            "state has {} columns, table has {}",
            state.columns.len(),
            table.columns.len()
        )));
    }
    let n = table.n_rows();
    let d = state.columns.len();
    let mut features = vec![0.0; n * d];
    for (j, (t, col)) in state.columns.iter().zip(&table.columns).enumerate() {
        if t.name() != col.name {
            return Err(Error::Transform(format!(
                "column {j} is `{}` in the table but `{}` in the state",
                col.name,
                t.name()
            )));
        }
        match (t, &col.data) {
            (
                ColumnTransform::Numeric {
                    impute,
                    mean,
                    std,
                    constant,
                    ..
                },
                ColumnData::Numeric(cells),
            ) => {
                for (i, c) in cells.iter().enumerate() {
                    let v = c.unwrap_or(*impute);
                    features[i * d + j] = if *constant { 0.0 } else { (v - mean) / std };
                }
            }
            (
                ColumnTransform::Categorical {
                    impute, categories, ..
                },
                ColumnData::Categorical(cells),
            ) => {
                let index: HashMap<&str, usize> = categories
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (c.as_str(), i))
                    .collect();
                let unknown = categories.len();
                for (i, c) in cells.iter().enumerate() {
                    let key = c.as_deref().unwrap_or(impute.as_str());
                    features[i * d + j] = index.get(key).copied().unwrap_or(unknown) as f64;
                }
            }
            _ => {
                return Err(Error::Transform(format!(
                    "column `{}` kind differs between state and table",
                    col.name
                )))
            }
        }
    }
    let names = state.columns.iter().map(|t| t.name().to_string()).collect();
    FeatureTable::new(names, features, table.labels.clone(), table.source.clone())
}

impl PreprocessorState {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("state serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let state: Self = serde_json::from_str(s).map_err(|e| {
            Error::format(
                0,
                format!(
                    "preprocessor state line {} column {}: {e}",
                    e.line(),
                    e.column()
                ),
            )
        })?;
        if state.version != PREPROCESSOR_VERSION {
            return Err(Error::format(
                0,
                format!("unsupported preprocessor version {}", state.version),
            ));
        }
        Ok(state)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::raw::{read_csv, Schema};

    fn raw(s: &str) -> RawTable {
        read_csv(s.as_bytes(), &Schema::with_label("y"), "t").unwrap()
    }

    #[test]
    fn numeric_mean_impute_and_scale() {
        let t = raw("a,y\n1,0\n,1\n3,0\n");
        let s = fit_preprocessor(&t).unwrap();
        match &s.columns[0] {
            ColumnTransform::Numeric {
                impute, mean, std, ..
            } => {
                assert_eq!(*impute, 2.0);
                assert_eq!(*mean, 2.0);
                assert!((std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let f = apply_preprocessor(&s, &t).unwrap();
        let inv = 1.0 / (2.0f64 / 3.0).sqrt();
        let got: Vec<f64> = f.column(0).collect();
        for (g, e) in got.iter().zip([-inv, 0.0, inv]) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn categorical_mode_and_order() {
        let t = raw("c,y\na,0\nb,1\na,0\n,1\n");
        let s = fit_preprocessor(&t).unwrap();
        assert_eq!(
            s.columns[0],
            ColumnTransform::Categorical {
                name: "c".into(),
                impute: "a".into(),
                categories: vec!["a".into(), "b".into()],
            }
        );
        let f = apply_preprocessor(&s, &t).unwrap();
        assert_eq!(f.column(0).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0, 0.0]);
        let novel = raw("c,y\nz,0\n");
        let g = apply_preprocessor(&s, &novel).unwrap();
        assert_eq!(g.row(0), &[2.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let t = raw("a,b,y\n5,1,0\n5,2,1\n5,3,0\n");
        let s = fit_preprocessor(&t).unwrap();
        let f = apply_preprocessor(&s, &t).unwrap();
        assert!(f.column(0).all(|v| v == 0.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            fit_preprocessor(&raw("a,y\n")),
            Err(Error::Fit { .. })
        ));
        match fit_preprocessor(&raw("a,b,y\n,1,0\n,2,1\n")) {
            Err(Error::Fit { column, .. }) => assert_eq!(column, "a"),
            other => panic!("{other:?}"),
        }
        let t = raw("a,y\n1,0\n2,1\n");
        assert!(matches!(
            apply_preprocessor(&PreprocessorState::default(), &t),
            Err(Error::Transform(_))
        ));
        let s = fit_preprocessor(&t).unwrap();
        assert!(matches!(
            apply_preprocessor(&s, &raw("b,y\n1,0\n")),
            Err(Error::Transform(_))
        ));
        assert!(matches!(
            apply_preprocessor(&s, &raw("a,y\nq,0\n")),
            Err(Error::Transform(_))
        ));
    }

    #[test]
    fn json_round_trip_reproduces_transform() {
        let t = raw("a,c,y\n0.1,x,0\n0.7,y,1\n,x,1\n1e-3,,0\n");
        let s = fit_preprocessor(&t).unwrap();
        let back = PreprocessorState::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let a = apply_preprocessor(&s, &t).unwrap();
        let b = apply_preprocessor(&back, &t).unwrap();
        let bits = |f: &FeatureTable| -> Vec<u64> {
            (0..f.n_rows())
                .flat_map(|i| f.row(i).iter().map(|v| v.to_bits()).collect::<Vec<_>>())
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }
}
