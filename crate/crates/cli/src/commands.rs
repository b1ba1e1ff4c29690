//! Pipeline stages behind the subcommands.
//!
//! Every artifact lives under the run directory:
//!
//! ```text
//! preprocess/{train.csv, test.csv, preprocessor.json, manifest.json}
//! train/mcd/{model.uqnn, loss.csv, manifest.json}
//! train/ensemble/{member_000.uqnn .., ensemble.json, loss.csv, manifest.json}
//! predict/{<method>.csv, <method>.jsonl, <method>.manifest.json}
//! evaluate/<method>/{report.json, sweep.csv, reliability.svg, entropy_histogram.csv, manifest.json}
//! summary.csv, summary.json
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use uqfraud::data::{
    apply_preprocessor, fit_preprocessor, load_csv, split_indices, split_train_test,
    synth_generate, FeatureTable, Schema,
};
use uqfraud::eval::{
    build_report, fmt_metric, render_reliability_svg, threshold_sweep, ReportOptions, UqMetrics,
    UqReport,
};
use uqfraud::nn::{accuracy, load_network, save_network, train, Network, TrainOutcome};
use uqfraud::seed::derive_seed;
use uqfraud::uq::{
    emcd_estimates, ensemble_estimates, mcd_estimates, train_ensemble, DumpMeta, Method,
    PredictionDump, DEFAULT_THRESHOLD, DUMP_VERSION,
};
use uqfraud::{Error, Execution, Result};

use crate::config::{DataSource, RunConfig};
use crate::manifest::{digest_of, sha256_file, StageManifest};

pub const TRAIN_TABLE: &str = "preprocess/train.csv";
pub const TEST_TABLE: &str = "preprocess/test.csv";
pub const PREPROCESSOR_STATE: &str = "preprocess/preprocessor.json";
pub const PREPROCESS_MANIFEST: &str = "preprocess/manifest.json";
pub const MCD_DIR: &str = "train/mcd";
pub const ENSEMBLE_DIR: &str = "train/ensemble";
pub const ENSEMBLE_INDEX: &str = "ensemble.json";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_JSON: &str = "summary.json";

/// Which stages a command ran versus skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Skipped,
}

/// Which trained artifact a method consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Single,
    Ensemble,
}

impl ModelKind {
    pub fn for_method(m: Method) -> Self {
        if m.uses_ensemble() {
            ModelKind::Ensemble
        } else {
            ModelKind::Single
        }
    }

    fn dir(self) -> &'static str {
        match self {
            ModelKind::Single => MCD_DIR,
            ModelKind::Ensemble => ENSEMBLE_DIR,
        }
    }
}

/// A loaded model of either kind.
#[derive(Debug, Clone)]
pub enum Model {
    Single(Network),
    Ensemble(Vec<Network>),
}

impl Model {
    fn kind(&self) -> ModelKind {
        match self {
            Model::Single(_) => ModelKind::Single,
            Model::Ensemble(_) => ModelKind::Ensemble,
        }
    }

    fn input_units(&self) -> usize {
        match self {
            Model::Single(n) => n.input_units(),
            Model::Ensemble(m) => m[0].input_units(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EnsembleIndex {
    version: u32,
    master_seed: u64,
    members: Vec<EnsembleEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EnsembleEntry {
    file: String,
    seed: u64,
    hidden_units: [usize; 3],
}

/// Table 2-shaped line for one method at the default operating threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub threshold: f64,
    pub uacc: Option<f64>,
    pub usen: Option<f64>,
    pub uspe: Option<f64>,
    pub upre: Option<f64>,
    pub accuracy: Option<f64>,
    pub ece: f64,
}

impl SummaryRow {
    fn from_report(r: &UqReport) -> Result<Self> {
        let row = r.at_threshold(DEFAULT_THRESHOLD).ok_or_else(|| {
            Error::Config(format!(
                "report has no row at threshold {DEFAULT_THRESHOLD}"
            ))
        })?;
        let UqMetrics {
            uacc,
            usen,
            uspe,
            upre,
        } = row.metrics;
        Ok(Self {
            method: r.method,
            threshold: DEFAULT_THRESHOLD,
            uacc,
            usen,
            uspe,
            upre,
            accuracy: r.classic.accuracy,
            ece: r.calibration.ece,
        })
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("method,threshold,UAcc,USen,USpe,UPre,accuracy,ece\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.method,
            r.threshold,
            fmt_metric(r.uacc),
            fmt_metric(r.usen),
            fmt_metric(r.uspe),
            fmt_metric(r.upre),
            fmt_metric(r.accuracy),
            r.ece
        );
    }
    s
}

fn fmt2(v: Option<f64>) -> String {
    v.map_or_else(|| "undef".to_string(), |x| format!("{x:.2}"))
}

/// Fixed-width rendering of the summary for the terminal.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut s = format!(
        "{:<10} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}\n",
        "method", "UAcc", "USen", "USpe", "UPre", "acc", "ECE"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<10} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6.3}",
            r.method.as_str(),
            fmt2(r.uacc),
            fmt2(r.usen),
            fmt2(r.uspe),
            fmt2(r.upre),
            fmt2(r.accuracy),
            r.ece
        );
    }
    s
}

fn mkdirs(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_dump(path: &Path) -> Result<PredictionDump> {
    if !path.is_file() {
        return Err(Error::Config(format!(
            "prediction dump {} does not exist",
            path.display()
        )));
    }
    let dump = PredictionDump::read_csv(path)?;
    if dump.records.is_empty() {
        return Err(Error::Input(format!(
            "prediction dump {} is empty",
            path.display()
        )));
    }
    Ok(dump)
}

fn method_index(m: Method) -> u64 {
    Method::ALL
        .iter()
        .position(|&x| x == m)
        .expect("listed method") as u64
}

/// Runs pipeline stages for one resolved configuration.
pub struct Pipeline {
    pub cfg: RunConfig,
    /// Skip stages whose manifest still matches.
    pub resume: bool,
    pub exec: Execution,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Self {
        Self {
            cfg,
            resume: false,
            exec: Execution::Parallel,
        }
    }

    pub fn root(&self) -> &Path {
        &self.cfg.out_dir
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.cfg.out_dir.join(rel)
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.cfg.quiet {
            use std::io::Write as _;
            let _ = writeln!(std::io::stdout(), "{}", msg.as_ref());
        }
    }

    fn seed(&self, label: &str, idx: &[u64]) -> u64 {
        derive_seed(self.cfg.seed, label, idx)
    }

    /// Runs `body` unless resuming and `fresh` matches the manifest on disk.
    /// `body` returns the relative paths it wrote and any manifest details.
    fn stage<F>(&self, manifest_rel: &str, mut fresh: StageManifest, body: F) -> Result<StageStatus>
    where
        F: FnOnce() -> Result<(Vec<String>, BTreeMap<String, serde_json::Value>)>,
    {
        let mpath = self.path(manifest_rel);
        if self.resume && mpath.is_file() {
            if let Ok(old) = StageManifest::load(&mpath) {
                if fresh.still_valid(&old, self.root()) {
                    self.say(format!("[{}] up to date, skipped", fresh.stage));
                    return Ok(StageStatus::Skipped);
                }
            }
        }
        let (outputs, details) = body()?;
        fresh.record_outputs(self.root(), outputs.iter().map(String::as_str))?;
        fresh.details = details;
        fresh.save(&mpath)?;
        Ok(StageStatus::Ran)
    }

    fn preprocess_digest(&self) -> String {
        let c = &self.cfg;
        digest_of(&json!({
            "data": c.data,
            "train_fraction": c.train_fraction,
            "stratified": c.stratified,
        }))
    }

    /// Loads (or generates) the dataset, splits it, fits preprocessing on the
    /// training rows and writes both tables.
    pub fn preprocess(&self) -> Result<StageStatus> {
        let split_seed = self.seed("split", &[]);
        let mut m = StageManifest::new("preprocess", split_seed, self.preprocess_digest());
        if let DataSource::Csv { path, schema } = &self.cfg.data {
            m.inputs.insert("csv".into(), sha256_file(path)?);
            m.inputs.insert("schema".into(), sha256_file(schema)?);
        }
        mkdirs(&self.path("preprocess"))?;
        self.stage(PREPROCESS_MANIFEST, m, || {
            let c = &self.cfg;
            let mut outputs = vec![TRAIN_TABLE.to_string(), TEST_TABLE.to_string()];
            let (train_t, test_t) = match &c.data {
                DataSource::Csv { path, schema } => {
                    let schema = Schema::load(schema)?;
                    let raw = load_csv(path, &schema)?;
                    let split =
                        split_indices(&raw.labels, c.train_fraction, c.stratified, split_seed)?;
                    let raw_train = raw.select_rows(&split.train);
                    let state = fit_preprocessor(&raw_train)?;
                    let name = path
                        .file_name()
                        .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
                    let mut tr = apply_preprocessor(&state, &raw_train)?;
                    let mut te = apply_preprocessor(&state, &raw.select_rows(&split.test))?;
                    tr.provenance = format!("{name} train");
                    te.provenance = format!("{name} test");
                    state.save(&self.path(PREPROCESSOR_STATE))?;
                    outputs.push(PREPROCESSOR_STATE.to_string());
                    self.say(format!(
                        "[preprocess] {} rows ({} missing cells) -> {} features",
                        raw.n_rows(),
                        raw.missing_count(),
                        tr.n_cols()
                    ));
                    (tr, te)
                }
                &DataSource::Synth {
                    n_per_class,
                    dim,
                    separation,
                } => {
                    let table =
                        synth_generate(n_per_class, dim, separation, self.seed("synth", &[]))?;
                    split_train_test(&table, c.train_fraction, c.stratified, split_seed)?
                }
            };
            train_t.write_csv(&self.path(TRAIN_TABLE))?;
            test_t.write_csv(&self.path(TEST_TABLE))?;
            self.say(format!(
                "[preprocess] split {} train / {} test (seed {split_seed})",
                train_t.n_rows(),
                test_t.n_rows()
            ));
            let details = BTreeMap::from([
                ("split_seed".to_string(), json!(split_seed)),
                ("train_rows".to_string(), json!(train_t.n_rows())),
                ("test_rows".to_string(), json!(test_t.n_rows())),
                ("features".to_string(), json!(train_t.n_cols())),
            ]);
            Ok((outputs, details))
        })
    }

    /// Fails unless the preprocessed tables on disk came from this
    /// configuration's data settings.
    fn check_preprocessed(&self) -> Result<()> {
        let mpath = self.path(PREPROCESS_MANIFEST);
        if !mpath.is_file() {
            return Err(Error::Config(format!(
                "no preprocessed data under {}; run `preprocess` first",
                self.root().display()
            )));
        }
        let m = StageManifest::load(&mpath)?;
        if m.config_digest != self.preprocess_digest() || m.seed != self.seed("split", &[]) {
            return Err(Error::Config(
                "preprocessed data was produced with different data settings or seed; rerun `preprocess`"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Trains the artifact `kind` needs on the preprocessed training table.
    pub fn train(&self, kind: ModelKind) -> Result<StageStatus> {
        self.check_preprocessed()?;
        let train_path = self.path(TRAIN_TABLE);
        let c = &self.cfg;
        let (seed, digest) = match kind {
            ModelKind::Single => (
                self.seed("mcd-net", &[]),
                digest_of(&json!({ "network": c.network })),
            ),
            ModelKind::Ensemble => (
                self.seed("ensemble", &[]),
                digest_of(&json!({ "network": c.network, "ensemble": c.ensemble })),
            ),
        };
        let stage = match kind {
            ModelKind::Single => "train-mcd",
            ModelKind::Ensemble => "train-ensemble",
        };
        let mut m = StageManifest::new(stage, seed, digest);
        m.inputs.insert("train".into(), sha256_file(&train_path)?);
        let dir = kind.dir();
        mkdirs(&self.path(dir))?;
        self.stage(&format!("{dir}/manifest.json"), m, || {
            let data = FeatureTable::read_csv(&train_path)?;
            let d = data.n_cols();
            let mut outputs = Vec::new();
            let loss_rel = format!("{dir}/loss.csv");
            let mut loss = String::new();
            match kind {
                ModelKind::Single => {
                    let mut nc = c.network_config(d);
                    nc.seed = seed;
                    self.say(format!(
                        "[train] mcd network {:?} seed {seed}",
                        nc.layer_widths()
                    ));
                    let TrainOutcome {
                        network,
                        loss_history,
                    } = train(&nc, &data, seed)?;
                    loss.push_str("epoch,loss\n");
                    for (e, l) in loss_history.iter().enumerate() {
                        let _ = writeln!(loss, "{},{l}", e + 1);
                        self.say(format!("  epoch {:>3} loss {l:.6}", e + 1));
                    }
                    self.say(format!(
                        "[train] training accuracy {:.4}",
                        accuracy(&network, &data)?
                    ));
                    let rel = format!("{dir}/model.uqnn");
                    save_network(&network, &self.path(&rel))?;
                    outputs.push(rel);
                }
                ModelKind::Ensemble => {
                    let spec = c.ensemble_spec(d, seed);
                    self.say(format!(
                        "[train] ensemble of {} members, master seed {seed}",
                        spec.members
                    ));
                    let trained = train_ensemble(&spec, &data, self.exec)?;
                    loss.push_str("member,epoch,loss\n");
                    for (i, t) in trained.iter().enumerate() {
                        for (e, l) in t.loss_history.iter().enumerate() {
                            let _ = writeln!(loss, "{i},{},{l}", e + 1);
                        }
                    }
                    let epochs = trained[0].loss_history.len();
                    for e in 0..epochs {
                        let mean = trained.iter().map(|t| t.loss_history[e]).sum::<f64>()
                            / trained.len() as f64;
                        self.say(format!("  epoch {:>3} mean member loss {mean:.6}", e + 1));
                    }
                    let mut index = EnsembleIndex {
                        version: 1,
                        master_seed: seed,
                        members: Vec::new(),
                    };
                    for (i, t) in trained.iter().enumerate() {
                        let file = format!("member_{i:03}.uqnn");
                        let rel = format!("{dir}/{file}");
                        save_network(&t.network, &self.path(&rel))?;
                        outputs.push(rel);
                        index.members.push(EnsembleEntry {
                            file,
                            seed: t.network.config.seed,
                            hidden_units: *t.network.hidden_units(),
                        });
                    }
                    let rel = format!("{dir}/{ENSEMBLE_INDEX}");
                    let mut text = serde_json::to_string_pretty(&index).expect("index serializes");
                    text.push('\n');
                    write_text(&self.path(&rel), &text)?;
                    outputs.push(rel);
                }
            }
            write_text(&self.path(&loss_rel), &loss)?;
            outputs.push(loss_rel);
            Ok((outputs, BTreeMap::new()))
        })
    }

    /// Default model location for `method` in this run directory.
    pub fn default_model_path(&self, method: Method) -> PathBuf {
        match ModelKind::for_method(method) {
            ModelKind::Single => self.path(&format!("{MCD_DIR}/model.uqnn")),
            ModelKind::Ensemble => self.path(ENSEMBLE_DIR),
        }
    }

    pub fn dump_path(&self, method: Method) -> PathBuf {
        self.path(&format!("predict/{method}.csv"))
    }

    /// Scores `data_path` (default: the preprocessed test table) with
    /// `method` and writes the CSV and JSON-lines dumps.
    pub fn predict(
        &self,
        method: Method,
        model_path: Option<&Path>,
        data_path: Option<&Path>,
    ) -> Result<StageStatus> {
        let model_path =
            model_path.map_or_else(|| self.default_model_path(method), Path::to_path_buf);
        let data_path = data_path.map_or_else(|| self.path(TEST_TABLE), Path::to_path_buf);
        let (model, model_files) = load_model(&model_path)?;
        let want = ModelKind::for_method(method);
        if model.kind() != want {
            return Err(Error::Config(format!(
                "method {method} needs {} model, but {} holds {}",
                if want == ModelKind::Single {
                    "a single-network"
                } else {
                    "an ensemble"
                },
                model_path.display(),
                if model.kind() == ModelKind::Single {
                    "a single network"
                } else {
                    "an ensemble"
                },
            )));
        }
        if !data_path.is_file() {
            return Err(Error::Config(format!(
                "data file {} does not exist",
                data_path.display()
            )));
        }

        let passes = if method == Method::Ensemble {
            0
        } else {
            self.cfg.mc_passes
        };
        let seed = self.seed("predict", &[method_index(method)]);
        let mut m = StageManifest::new(
            &format!("predict-{method}"),
            seed,
            digest_of(&json!({ "method": method, "mc_passes": passes })),
        );
        for (i, f) in model_files.iter().enumerate() {
            m.inputs.insert(format!("model/{i:03}"), sha256_file(f)?);
        }
        m.inputs.insert("data".into(), sha256_file(&data_path)?);
        mkdirs(&self.path("predict"))?;
        self.stage(&format!("predict/{method}.manifest.json"), m, || {
            let table = FeatureTable::read_csv(&data_path)?;
            if table.n_cols() != model.input_units() {
                return Err(Error::Shape(format!(
                    "data {} has {} features but the model expects {}",
                    data_path.display(),
                    table.n_cols(),
                    model.input_units()
                )));
            }
            self.say(format!(
                "[predict] {method} on {} rows{}",
                table.n_rows(),
                if passes > 0 {
                    format!(", T = {passes}")
                } else {
                    String::new()
                }
            ));
            let estimates = match (&model, method) {
                (Model::Single(net), _) => mcd_estimates(net, &table, passes, seed, self.exec)?,
                (Model::Ensemble(members), Method::Ensemble) => {
                    ensemble_estimates(members, &table, self.exec)?
                }
                (Model::Ensemble(members), _) => {
                    emcd_estimates(members, &table, passes, seed, self.exec)?
                }
            };
            let meta = DumpMeta {
                version: DUMP_VERSION,
                method,
                seed,
                mc_passes: passes,
            };
            let dump = PredictionDump::new(meta, &estimates, Some(table.labels()));
            let csv_rel = format!("predict/{method}.csv");
            let jsonl_rel = format!("predict/{method}.jsonl");
            dump.write_csv(&self.path(&csv_rel))?;
            dump.write_jsonl(&self.path(&jsonl_rel))?;
            Ok((vec![csv_rel, jsonl_rel], BTreeMap::new()))
        })
    }

    /// Report thresholds: the configured grid plus the default operating point.
    fn report_thresholds(&self) -> Vec<f64> {
        let mut t = self.cfg.thresholds.clone();
        if !t.contains(&DEFAULT_THRESHOLD) {
            t.push(DEFAULT_THRESHOLD);
            t.sort_by(f64::total_cmp);
        }
        t
    }

    /// Builds the full report for a labeled dump and writes its files under
    /// `evaluate/<method>/`.
    pub fn evaluate(&self, dump_path: &Path) -> Result<UqReport> {
        let dump = read_dump(dump_path)?;
        let labels = dump.labels()?;
        let method = dump.meta.method;
        let thresholds = self.report_thresholds();
        let digest = digest_of(&json!({
            "thresholds": thresholds,
            "ece_bins": self.cfg.ece_bins,
            "hist_bins": self.cfg.hist_bins,
        }));
        let dir = format!("evaluate/{method}");
        let report_rel = format!("{dir}/report.json");
        let mut m = StageManifest::new(
            &format!("evaluate-{method}"),
            dump.meta.seed,
            digest.clone(),
        );
        m.inputs.insert("dump".into(), sha256_file(dump_path)?);
        mkdirs(&self.path(&dir))?;
        let status = self.stage(&format!("{dir}/manifest.json"), m, || {
            let opts = ReportOptions {
                thresholds,
                ece_bins: self.cfg.ece_bins,
                hist_bins: self.cfg.hist_bins,
                seed: dump.meta.seed,
                config_digest: digest,
            };
            let report = build_report(method, &dump.estimates(), &labels, &opts)?;
            let sweep_rel = format!("{dir}/sweep.csv");
            let svg_rel = format!("{dir}/reliability.svg");
            let hist_rel = format!("{dir}/entropy_histogram.csv");
            write_text(&self.path(&report_rel), &report.to_json())?;
            write_text(&self.path(&sweep_rel), &report.sweep_csv())?;
            render_reliability_svg(
                &report.calibration,
                &format!("Reliability: {method}"),
                &self.path(&svg_rel),
            )?;
            write_text(&self.path(&hist_rel), &report.entropy_histogram.to_csv())?;
            Ok((
                vec![report_rel.clone(), sweep_rel, svg_rel, hist_rel],
                BTreeMap::new(),
            ))
        })?;
        let report = UqReport::from_json(&read_text(&self.path(&report_rel))?)?;
        if status == StageStatus::Ran {
            let row = SummaryRow::from_report(&report)?;
            self.say(format!(
                "[evaluate] {} samples, ECE {:.4}",
                report.n, report.calibration.ece
            ));
            self.say(summary_table(&[row]));
        }
        Ok(report)
    }

    /// Threshold sweep of a labeled dump, written to `sweep/<method>.csv`.
    pub fn sweep(&self, dump_path: &Path) -> Result<PathBuf> {
        let dump = read_dump(dump_path)?;
        let labels = dump.labels()?;
        let rows = threshold_sweep(&dump.estimates(), &labels, &self.cfg.thresholds)?;
        let mut s = format!(
            "# uqfraud sweep v1 method={} seed={}\nthreshold,tc,tu,fu,fc,uacc,usen,uspe,upre\n",
            dump.meta.method, dump.meta.seed
        );
        let mut table = format!(
            "{:>9} {:>6} {:>6} {:>6} {:>6}\n",
            "threshold", "UAcc", "USen", "USpe", "UPre"
        );
        for r in &rows {
            let k = &r.confusion.counts;
            let m = &r.metrics;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.confusion.threshold,
                k.tc,
                k.tu,
                k.fu,
                k.fc,
                fmt_metric(m.uacc),
                fmt_metric(m.usen),
                fmt_metric(m.uspe),
                fmt_metric(m.upre)
            );
            let _ = writeln!(
                table,
                "{:>9} {:>6} {:>6} {:>6} {:>6}",
                r.confusion.threshold,
                fmt2(m.uacc),
                fmt2(m.usen),
                fmt2(m.uspe),
                fmt2(m.upre)
            );
        }
        mkdirs(&self.path("sweep"))?;
        let out = self.path(&format!("sweep/{}.csv", dump.meta.method));
        write_text(&out, &s)?;
        self.say(table);
        Ok(out)
    }

    /// Writes the configured synthetic dataset as a plain CSV plus a schema,
    /// ready for `preprocess` with a csv data source.
    pub fn synth(&self) -> Result<PathBuf> {
        let DataSource::Synth {
            n_per_class,
            dim,
            separation,
        } = self.cfg.data
        else {
            return Err(Error::Config(
                "synth needs a synthetic data source, not a csv".into(),
            ));
        };
        let table = synth_generate(n_per_class, dim, separation, self.seed("synth", &[]))?;
        mkdirs(&self.path("synth"))?;
        let out = self.path("synth/data.csv");
        let mut w = csv::Writer::from_path(&out)
            .map_err(|e| Error::Input(format!("{}: {e}", out.display())))?;
        let csv_err = |e: csv::Error| Error::Input(format!("writing {}: {e}", out.display()));
        w.write_record(
            table
                .column_names
                .iter()
                .map(String::as_str)
                .chain(["label"]),
        )
        .map_err(csv_err)?;
        for i in 0..table.n_rows() {
            let mut rec: Vec<String> = table.row(i).iter().map(f64::to_string).collect();
            rec.push(table.label(i).to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(&out, e))?;
        write_text(&self.path("synth/schema.toml"), "label = \"label\"\n")?;
        self.say(format!(
            "[synth] {} rows x {dim} features -> {}",
            table.n_rows(),
            out.display()
        ));
        Ok(out)
    }

    /// Full chain: preprocess, train both model kinds, predict and evaluate
    /// with every method, then write the side-by-side summary. Completed
    /// stages are skipped when their manifests still match.
    pub fn reproduce(&mut self) -> Result<Vec<SummaryRow>> {
        self.resume = true;
        mkdirs(self.root())?;
        self.preprocess()?;
        self.train(ModelKind::Single)?;
        self.train(ModelKind::Ensemble)?;
        let mut rows = Vec::new();
        for method in Method::ALL {
            self.predict(method, None, None)?;
            let report = self.evaluate(&self.dump_path(method))?;
            rows.push(SummaryRow::from_report(&report)?);
        }
        write_text(&self.path(SUMMARY_CSV), &summary_csv(&rows))?;
        let mut json = serde_json::to_string_pretty(&rows).expect("summary serializes");
        json.push('\n');
        write_text(&self.path(SUMMARY_JSON), &json)?;
        self.say(format!(
            "[reproduce] summary at threshold {DEFAULT_THRESHOLD}"
        ));
        self.say(summary_table(&rows));
        Ok(rows)
    }
}

/// Loads a single `.uqnn` file or an ensemble directory (or its index file).
/// Also returns every file read, for digesting.
pub fn load_model(path: &Path) -> Result<(Model, Vec<PathBuf>)> {
    let index_path = if path.is_dir() {
        Some(path.join(ENSEMBLE_INDEX))
    } else if path.file_name().is_some_and(|n| n == ENSEMBLE_INDEX) {
        Some(path.to_path_buf())
    } else {
        None
    };
    match index_path {
        Some(ip) => {
            if !ip.is_file() {
                return Err(Error::Config(format!(
                    "no ensemble index at {}",
                    ip.display()
                )));
            }
            let index: EnsembleIndex = serde_json::from_str(&read_text(&ip)?)
                .map_err(|e| Error::format(0, format!("{}: {e}", ip.display())))?;
            let dir = ip.parent().unwrap_or(Path::new("."));
            let mut files = vec![ip.clone()];
            let mut members = Vec::with_capacity(index.members.len());
            for e in &index.members {
                let f = dir.join(&e.file);
                members.push(load_network(&f)?);
                files.push(f);
            }
            if members.len() < 2 {
                return Err(Error::Config(format!(
                    "{} lists fewer than 2 members",
                    ip.display()
                )));
            }
            Ok((Model::Ensemble(members), files))
        }
        None => {
            if !path.is_file() {
                return Err(Error::Config(format!(
                    "model {} does not exist",
                    path.display()
                )));
            }
            Ok((Model::Single(load_network(path)?), vec![path.to_path_buf()]))
        }
    }
}
