use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// How to read a raw CSV: which column is the label, which to drop, which
/// strings mean "missing", and explicit kinds for columns that should not
/// be inferred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub label: String,
    #[serde(default)]
    pub drop: Vec<String>,
    #[serde(default = "default_missing")]
    pub missing: Vec<String>,
    #[serde(default)]
    pub kinds: BTreeMap<String, ColumnKind>,
}

fn default_missing() -> Vec<String> {
    vec![String::new(), "NA".into(), "NaN".into()]
}

impl Schema {
    pub fn with_label(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            drop: Vec::new(),
            missing: default_missing(),
            kinds: BTreeMap::new(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("schema: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl ColumnData {
    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn missing_count(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.iter().filter(|c| c.is_none()).count(),
            ColumnData::Categorical(v) => v.iter().filter(|c| c.is_none()).count(),
        }
    }

    fn select(&self, idx: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(idx.iter().map(|&i| v[i]).collect()),
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(idx.iter().map(|&i| v[i].clone()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub data: ColumnData,
}

/// Typed cells straight from a CSV, missing values explicit.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub columns: Vec<RawColumn>,
    pub labels: Vec<u8>,
    pub label_name: String,
    pub source: String,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.columns.iter().map(|c| c.data.missing_count()).sum()
    }

    pub fn select_rows(&self, idx: &[usize]) -> RawTable {
        RawTable {
            columns: self
                .columns
                .iter()
                .map(|c| RawColumn {
                    name: c.name.clone(),
                    data: c.data.select(idx),
                })
                .collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            label_name: self.label_name.clone(),
            source: self.source.clone(),
        }
    }
}

fn parse_label(s: &str) -> Option<u8> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("true") {
        return Some(1);
    }
    if t.eq_ignore_ascii_case("false") {
        return Some(0);
    }
    match t.parse::<f64>() {
        Ok(0.0) => Some(0),
        Ok(1.0) => Some(1),
        _ => None,
    }
}

/// Reads a headed, comma-delimited CSV according to `schema`.
///
/// Columns without an explicit kind are numeric when every observed cell
/// parses as a number, categorical otherwise.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::Ingestion {
        row: 0,
        message: format!("cannot open {}: {e}", path.display()),
    })?;
    read_csv(file, schema, &path.display().to_string())
}

pub fn read_csv<R: std::io::Read>(reader: R, schema: &Schema, source: &str) -> Result<RawTable> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::Ingestion {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let arity = headers.len();
    let label_idx = headers
        .iter()
        .position(|h| h == schema.label)
        .ok_or_else(|| Error::Ingestion {
            row: 1,
            message: format!("label column `{}` not in header", schema.label),
        })?;
    for name in schema.kinds.keys().chain(&schema.drop) {
        if !headers.iter().any(|h| h == name) {
            return Err(Error::Ingestion {
                row: 1,
                message: format!("schema names column `{name}` which is not in the header"),
            });
        }
    }
    let keep: Vec<usize> = (0..arity)
        .filter(|&j| j != label_idx && !schema.drop.iter().any(|d| d == &headers[j]))
        .collect();

    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); keep.len()];
    let mut labels = Vec::new();
    for rec in csv.records() {
        let rec = rec.map_err(|e| Error::Ingestion {
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != arity {
            return Err(Error::Ingestion {
                row: line,
                message: format!("expected {arity} fields, found {}", rec.len()),
            });
        }
        let raw_label = &rec[label_idx];
        let label = parse_label(raw_label).ok_or_else(|| Error::Ingestion {
            row: line,
            message: format!("label `{raw_label}` is not mappable to 0/1"),
        })?;
        labels.push(label);
        for (col, &j) in cells.iter_mut().zip(&keep) {
            let v = &rec[j];
            let missing = schema.missing.iter().any(|m| m == v.trim());
            col.push((!missing).then(|| v.to_string()));
        }
    }

    let mut columns = Vec::with_capacity(keep.len());
    for (col, &j) in cells.into_iter().zip(&keep) {
        let name = headers[j].to_string();
        let parsed: Option<Vec<Option<f64>>> = col
            .iter()
            .map(|c| match c {
                None => Some(None),
                Some(s) => s
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Some),
            })
            .collect();
        let data = match (schema.kinds.get(&name), parsed) {
            (Some(ColumnKind::Categorical), _) => ColumnData::Categorical(col),
            (Some(ColumnKind::Numeric), None) => {
                let (row, bad) = col
                    .iter()
                    .enumerate()
                    .find_map(|(i, c)| {
                        c.as_ref()
                            .filter(|s| s.trim().parse::<f64>().map_or(true, |v| !v.is_finite()))
                            .map(|s| (i, s.clone()))
                    })
                    .unwrap_or_default();
                return Err(Error::Ingestion {
                    row: row as u64 + 2,
                    message: format!("column `{name}` declared numeric but has value `{bad}`"),
                });
            }
            (_, Some(nums)) => ColumnData::Numeric(nums),
            (None, None) => ColumnData::Categorical(col),
        };
        columns.push(RawColumn { name, data });
    }
    Ok(RawTable {
        columns,
        labels,
        label_name: schema.label.clone(),
        source: source.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<RawTable> {
        read_csv(s.as_bytes(), &Schema::with_label("y"), "inline")
    }

    #[test]
    fn missing_cell_is_marked() {
        let t = read("a,b,y\n1,x,0\n,x,1\n3,z,0\n").unwrap();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(t.missing_count(), 1);
        assert_eq!(
            t.columns[0].data,
            ColumnData::Numeric(vec![Some(1.0), None, Some(3.0)])
        );
        assert_eq!(t.columns[1].data.kind(), ColumnKind::Categorical);
        assert_eq!(t.labels, vec![0, 1, 0]);
    }

    #[test]
    fn ragged_row_names_its_line() {
        match read("a,y\n1,0\n2,1,9\n") {
            Err(Error::Ingestion { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_only_is_empty() {
        let t = read("a,b,y\n").unwrap();
        assert!(t.is_empty());
        assert_eq!(t.columns.len(), 2);
    }

    #[test]
    fn absent_label_and_bad_label() {
        assert!(matches!(
            read("a,b\n1,2\n"),
            Err(Error::Ingestion { row: 1, .. })
        ));
        assert!(matches!(
            read("a,y\n1,2\n"),
            Err(Error::Ingestion { row: 2, .. })
        ));
        assert!(matches!(read("a,y\n1,\n"), Err(Error::Ingestion { .. })));
    }

    #[test]
    fn schema_kinds_drop_and_sentinels() {
        let schema = Schema::from_toml_str(
            r#"
            label = "y"
            drop = ["id"]
            missing = ["", "?"]
            [kinds]
            code = "categorical"
            "#,
        )
        .unwrap();
        let t = read_csv(
            "id,code,v,y\n1,10,?,1\n2,20,2.5,0\n".as_bytes(),
            &schema,
            "s",
        )
        .unwrap();
        assert_eq!(t.columns.len(), 2);
        assert_eq!(t.columns[0].data.kind(), ColumnKind::Categorical);
        assert_eq!(
            t.columns[1].data,
            ColumnData::Numeric(vec![None, Some(2.5)])
        );
        let bad = Schema::from_toml_str("label = \"y\"\n[kinds]\nq = \"numeric\"\n").unwrap();
        assert!(read_csv("a,y\n1,0\n".as_bytes(), &bad, "s").is_err());
    }

    #[test]
    fn unreadable_file() {
        let r = load_csv(
            Path::new("/definitely/not/here.csv"),
            &Schema::with_label("y"),
        );
        assert!(matches!(r, Err(Error::Ingestion { .. })));
    }
}
