use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Dense, fully numeric feature matrix with binary labels (1 = fraud).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub column_names: Vec<String>,
    features: Vec<f64>,
    labels: Vec<u8>,
    /// Source file or synthetic seed the rows came from.
    pub provenance: String,
}

const TABLE_HEADER: &str = "# uqfraud feature-table v1";

impl FeatureTable {
    pub fn new(
        column_names: Vec<String>,
        features: Vec<f64>,
        labels: Vec<u8>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let d = column_names.len();
        if d == 0 {
            return Err(Error::Shape(
                "feature table needs at least one column".into(),
            ));
        }
        if features.len() != d * labels.len() {
            return Err(Error::Shape(format!(
                "{} values do not form {} rows of {d} columns",
                features.len(),
                labels.len()
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite feature at row {}, column {}",
                i / d,
                i % d
            )));
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::Input(format!(
                "label {} at row {i} is not 0/1",
                labels[i]
            )));
        }
        Ok(Self {
            column_names,
            features,
            labels,
            provenance: provenance.into(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_cols();
        &self.features[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i)[j])
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureTable {
        let mut features = Vec::with_capacity(indices.len() * self.n_cols());
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        FeatureTable {
            column_names: self.column_names.clone(),
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Writes a CSV: a version comment, a header of column names plus
    /// `label`, then one row per sample. Floats use shortest round-trip
    /// formatting, so [`FeatureTable::read_csv`] restores them bit-for-bit.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let file = std::fs::File::create(path).map_err(io)?;
        let mut w = std::io::BufWriter::new(file);
        writeln!(
            w,
            "{TABLE_HEADER} provenance={}",
            self.provenance.replace('\n', " ")
        )
        .map_err(io)?;
        let mut csv = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Input(format!("writing {}: {e}", path.display()));
        csv.write_record(
            self.column_names
                .iter()
                .map(String::as_str)
                .chain(["label"]),
        )
        .map_err(csv_err)?;
        let mut rec = Vec::with_capacity(self.n_cols() + 1);
        for i in 0..self.n_rows() {
            rec.clear();
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            rec.push(self.labels[i].to_string());
            csv.write_record(&rec).map_err(csv_err)?;
        }
        csv.flush().map_err(io)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let io = |e| Error::io(path, e);
        let file = std::fs::File::open(path).map_err(io)?;
        let mut reader = BufReader::new(file);
        let mut first = String::new();
        reader.read_line(&mut first).map_err(io)?;
        let provenance = first
            .trim_end()
            .strip_prefix(TABLE_HEADER)
            .ok_or_else(|| Error::Ingestion {
                row: 1,
                message: format!("{} is not a feature-table file", path.display()),
            })?
            .trim()
            .strip_prefix("provenance=")
            .unwrap_or("")
            .to_string();
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let ingest = |row: u64, message: String| Error::Ingestion { row, message };
        let headers = csv.headers().map_err(|e| ingest(2, e.to_string()))?.clone();
        let d = headers.len().saturating_sub(1);
        if headers.get(d) != Some("label") {
            return Err(ingest(2, "last column must be `label`".into()));
        }
        let names: Vec<String> = headers.iter().take(d).map(str::to_string).collect();
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for rec in csv.records() {
            let rec =
                rec.map_err(|e| ingest(e.position().map_or(0, |p| p.line()) + 1, e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line()) + 1;
            for j in 0..d {
                let v: f64 = rec[j]
                    .parse()
                    .map_err(|_| ingest(line, format!("bad number `{}`", &rec[j])))?;
                features.push(v);
            }
            let l: u8 = rec[d]
                .parse()
                .map_err(|_| ingest(line, format!("bad label `{}`", &rec[d])))?;
            labels.push(l);
        }
        Self::new(names, features, labels, provenance)
    }
}
