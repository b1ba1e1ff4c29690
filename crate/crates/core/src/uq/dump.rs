//! Per-input prediction dumps.
//!
//! CSV layout: one `#` comment line with format name, version and run
//! metadata, then the header
//! `index,method,p_genuine,p_fraud,entropy_raw,entropy_norm,predicted_class,label`.
//! `label` is empty for unlabeled inputs. The JSON-lines variant starts with
//! one metadata object and then one object per input with the same fields.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::estimate::{Method, UncertaintyEstimate};
use crate::error::{Error, Result};

pub const DUMP_VERSION: u32 = 1;
const DUMP_TAG: &str = "# uqfraud predictions";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpMeta {
    pub version: u32,
    pub method: Method,
    pub seed: u64,
    pub mc_passes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub index: usize,
    pub method: Method,
    pub p_genuine: f64,
    pub p_fraud: f64,
    pub entropy_raw: f64,
    pub entropy_norm: f64,
    pub predicted_class: usize,
    pub label: Option<u8>,
}

impl PredictionRecord {
    pub fn from_estimate(
        index: usize,
        method: Method,
        est: &UncertaintyEstimate,
        label: Option<u8>,
    ) -> Self {
        Self {
            index,
            method,
            p_genuine: est.mean_probs[0],
            p_fraud: est.mean_probs[1],
            entropy_raw: est.entropy_raw,
            entropy_norm: est.entropy_norm,
            predicted_class: est.predicted_class,
            label,
        }
    }

    pub fn to_estimate(&self) -> UncertaintyEstimate {
        UncertaintyEstimate {
            mean_probs: vec![self.p_genuine, self.p_fraud],
            predicted_class: self.predicted_class,
            entropy_raw: self.entropy_raw,
            entropy_norm: self.entropy_norm,
            certain: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionDump {
    pub meta: DumpMeta,
    pub records: Vec<PredictionRecord>,
}

impl PredictionDump {
    pub fn new(meta: DumpMeta, estimates: &[UncertaintyEstimate], labels: Option<&[u8]>) -> Self {
        let records = estimates
            .iter()
            .enumerate()
            .map(|(i, e)| PredictionRecord::from_estimate(i, meta.method, e, labels.map(|l| l[i])))
            .collect();
        Self { meta, records }
    }

    pub fn estimates(&self) -> Vec<UncertaintyEstimate> {
        self.records
            .iter()
            .map(PredictionRecord::to_estimate)
            .collect()
    }

    /// Labels of every record, or an error if any is missing.
    pub fn labels(&self) -> Result<Vec<u8>> {
        self.records
            .iter()
            .map(|r| {
                r.label.ok_or_else(|| {
                    Error::Input(format!("prediction {} has no ground-truth label", r.index))
                })
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        let m = &self.meta;
        writeln!(
            w,
            "{DUMP_TAG} v{} method={} seed={} mc_passes={}",
            m.version, m.method, m.seed, m.mc_passes
        )
        .map_err(io)?;
        let mut csv = csv::WriterBuilder::new().has_headers(true).from_writer(w);
        for r in &self.records {
            csv.serialize(r)
                .map_err(|e| Error::Input(format!("writing {}: {e}", path.display())))?;
        }
        csv.flush().map_err(io)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let io = |e| Error::io(path, e);
        let mut reader = BufReader::new(std::fs::File::open(path).map_err(io)?);
        let mut first = String::new();
        reader.read_line(&mut first).map_err(io)?;
        let meta = parse_meta(first.trim_end()).ok_or_else(|| Error::Ingestion {
            row: 1,
            message: format!("{} is not a prediction dump", path.display()),
        })?;
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let mut records = Vec::new();
        for rec in csv.deserialize::<PredictionRecord>() {
            let rec = rec.map_err(|e| Error::Ingestion {
                row: e.position().map_or(0, |p| p.line()) + 1,
                message: e.to_string(),
            })?;
            records.push(rec);
        }
        Ok(Self { meta, records })
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        #[derive(Serialize)]
        struct Header<'a> {
            format: &'static str,
            #[serde(flatten)]
            meta: &'a DumpMeta,
        }
        let header = Header {
            format: "uqfraud-predictions",
            meta: &self.meta,
        };
        writeln!(
            w,
            "{}",
            serde_json::to_string(&header).expect("header serializes")
        )
        .map_err(io)?;
        for r in &self.records {
            writeln!(
                w,
                "{}",
                serde_json::to_string(r).expect("record serializes")
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

fn parse_meta(line: &str) -> Option<DumpMeta> {
    let rest = line.strip_prefix(DUMP_TAG)?.trim();
    let mut parts = rest.split_whitespace();
    let version: u32 = parts.next()?.strip_prefix('v')?.parse().ok()?;
    let (mut method, mut seed, mut passes) = (None, None, None);
    for kv in parts {
        let (k, v) = kv.split_once('=')?;
        match k {
            "method" => method = v.parse().ok(),
            "seed" => seed = v.parse().ok(),
            "mc_passes" => passes = v.parse().ok(),
            _ => {}
        }
    }
    Some(DumpMeta {
        version,
        method: method?,
        seed: seed?,
        mc_passes: passes?,
    })
}
