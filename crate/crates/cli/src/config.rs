//! Run configuration: a TOML file layered over a named profile, with a few
//! command-line overrides on top.
//!
//! ```toml
//! seed = 7
//! profile = "desk"          # or "paper"
//! method = "emcd"           # mcd | ensemble | emcd
//! out_dir = "runs/demo"
//!
//! [data]                    # exactly one source: csv + schema, or synth
//! csv = "transactions.csv"
//! schema = "schema.toml"
//! train_fraction = 0.7
//! stratified = true
//! # [data.synth]
//! # n_per_class = 300
//! # dim = 4
//! # separation = 2.0
//!
//! [network]
//! hidden_units = [256, 64, 16]
//! dropout_rate = 0.3
//! epochs = 50
//! batch_size = 128
//! learning_rate = 0.001
//!
//! [ensemble]
//! members = 30
//! width_ranges = [[256, 385], [64, 256], [16, 32]]
//!
//! [uq]
//! mc_passes = 1000
//! thresholds = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
//! ece_bins = 10
//! hist_bins = 50
//! ```
//!
//! Relative paths are resolved against the config file's directory. With no
//! data section the run uses the profile's synthetic dataset.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use uqfraud::eval::{default_thresholds, DEFAULT_ECE_BINS, DEFAULT_HIST_BINS};
use uqfraud::nn::NetworkConfig;
use uqfraud::uq::{EnsembleSpec, Method, DEFAULT_MC_PASSES, DEFAULT_MEMBERS, DEFAULT_WIDTH_RANGES};
use uqfraud::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Reference experiment: 30 members, 1000 MC passes, 50 epochs.
    Paper,
    /// Shrunk for CI and laptops.
    Desk,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            other => Err(Error::Config(format!(
                "unknown profile `{other}` (paper | desk)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub profile: Option<Profile>,
    pub method: Option<String>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub uq: UqSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub csv: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub synth: Option<SynthSection>,
    pub train_fraction: Option<f64>,
    pub stratified: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub n_per_class: Option<usize>,
    pub dim: Option<usize>,
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub hidden_units: Option<Vec<usize>>,
    pub dropout_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub adam_beta1: Option<f64>,
    pub adam_beta2: Option<f64>,
    pub adam_epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub members: Option<usize>,
    pub width_ranges: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UqSection {
    pub mc_passes: Option<usize>,
    pub thresholds: Option<Vec<f64>>,
    pub ece_bins: Option<usize>,
    pub hist_bins: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        schema: PathBuf,
    },
    Synth {
        n_per_class: usize,
        dim: usize,
        separation: f64,
    },
}

/// Shared hyper-parameters for every network (MCD net and ensemble members).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSettings {
    pub hidden_units: [usize; 3],
    pub dropout_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSettings {
    pub members: usize,
    pub width_ranges: [(usize, usize); 3],
}

/// Fully resolved, validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub profile: Profile,
    pub method: Method,
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Suppresses progress output; not part of any digest.
    #[serde(skip)]
    pub quiet: bool,
    pub data: DataSource,
    pub train_fraction: f64,
    pub stratified: bool,
    pub network: NetworkSettings,
    pub ensemble: EnsembleSettings,
    pub mc_passes: usize,
    pub thresholds: Vec<f64>,
    pub ece_bins: usize,
    pub hist_bins: usize,
}

/// Flag overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub method: Option<Method>,
    pub mc_passes: Option<usize>,
    pub profile: Option<Profile>,
}

impl RunConfig {
    /// Profile defaults with no config file.
    pub fn from_profile(profile: Profile) -> Self {
        let paper = profile == Profile::Paper;
        Self {
            seed: 0,
            profile,
            method: Method::Emcd,
            out_dir: PathBuf::from("uqfraud-out"),
            quiet: false,
            data: if paper {
                DataSource::Synth {
                    n_per_class: 2000,
                    dim: 16,
                    separation: 2.0,
                }
            } else {
                DataSource::Synth {
                    n_per_class: 300,
                    dim: 4,
                    separation: 2.0,
                }
            },
            train_fraction: 0.7,
            stratified: true,
            network: NetworkSettings {
                hidden_units: if paper { [256, 64, 16] } else { [32, 16, 8] },
                dropout_rate: 0.3,
                epochs: if paper { 50 } else { 20 },
                batch_size: if paper { 128 } else { 64 },
                learning_rate: 1e-3,
                adam_beta1: 0.9,
                adam_beta2: 0.999,
                adam_epsilon: 1e-8,
            },
            ensemble: EnsembleSettings {
                members: if paper { DEFAULT_MEMBERS } else { 5 },
                width_ranges: if paper {
                    DEFAULT_WIDTH_RANGES
                } else {
                    [(32, 64), (16, 32), (8, 16)]
                },
            },
            mc_passes: if paper { DEFAULT_MC_PASSES } else { 100 },
            thresholds: default_thresholds(),
            ece_bins: DEFAULT_ECE_BINS,
            hist_bins: DEFAULT_HIST_BINS,
        }
    }

    /// Layers `file` (whose relative paths resolve against `base_dir`) and
    /// `overrides` over the chosen profile, then validates.
    pub fn resolve(file: &ConfigFile, base_dir: &Path, overrides: &Overrides) -> Result<Self> {
        let profile = overrides.profile.or(file.profile).unwrap_or(Profile::Desk);
        let mut c = Self::from_profile(profile);
        let rel = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };

        if let Some(s) = file.seed {
            c.seed = s;
        }
        if let Some(m) = &file.method {
            c.method = m.parse()?;
        }
        if let Some(o) = &file.out_dir {
            c.out_dir = rel(o);
        }

        let d = &file.data;
        c.data = match (&d.csv, &d.synth) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "data section names both a csv file and a synth generator; pick one".into(),
                ))
            }
            (Some(csv), None) => {
                let schema = d.schema.as_ref().ok_or_else(|| {
                    Error::Config("data.csv requires data.schema (column kinds and label)".into())
                })?;
                DataSource::Csv {
                    path: rel(csv),
                    schema: rel(schema),
                }
            }
            (None, synth) => {
                if d.schema.is_some() {
                    return Err(Error::Config("data.schema given without data.csv".into()));
                }
                let DataSource::Synth {
                    mut n_per_class,
                    mut dim,
                    mut separation,
                } = c.data
                else {
                    unreachable!("profiles default to synthetic data")
                };
                if let Some(s) = synth {
                    n_per_class = s.n_per_class.unwrap_or(n_per_class);
                    dim = s.dim.unwrap_or(dim);
                    separation = s.separation.unwrap_or(separation);
                }
                DataSource::Synth {
                    n_per_class,
                    dim,
                    separation,
                }
            }
        };
        if let Some(f) = d.train_fraction {
            c.train_fraction = f;
        }
        if let Some(s) = d.stratified {
            c.stratified = s;
        }

        let n = &file.network;
        if let Some(h) = &n.hidden_units {
            c.network.hidden_units = <[usize; 3]>::try_from(h.as_slice()).map_err(|_| {
                Error::Config(format!(
                    "network.hidden_units needs exactly 3 entries, got {}",
                    h.len()
                ))
            })?;
        }
        let net = &mut c.network;
        net.dropout_rate = n.dropout_rate.unwrap_or(net.dropout_rate);
        net.epochs = n.epochs.unwrap_or(net.epochs);
        net.batch_size = n.batch_size.unwrap_or(net.batch_size);
        net.learning_rate = n.learning_rate.unwrap_or(net.learning_rate);
        net.adam_beta1 = n.adam_beta1.unwrap_or(net.adam_beta1);
        net.adam_beta2 = n.adam_beta2.unwrap_or(net.adam_beta2);
        net.adam_epsilon = n.adam_epsilon.unwrap_or(net.adam_epsilon);

        if let Some(m) = file.ensemble.members {
            c.ensemble.members = m;
        }
        if let Some(r) = &file.ensemble.width_ranges {
            if r.len() != 3 {
                return Err(Error::Config(format!(
                    "ensemble.width_ranges needs 3 [low, high] pairs, got {}",
                    r.len()
                )));
            }
            c.ensemble.width_ranges = [(r[0][0], r[0][1]), (r[1][0], r[1][1]), (r[2][0], r[2][1])];
        }

        let u = &file.uq;
        c.mc_passes = u.mc_passes.unwrap_or(c.mc_passes);
        if let Some(t) = &u.thresholds {
            c.thresholds = t.clone();
        }
        c.ece_bins = u.ece_bins.unwrap_or(c.ece_bins);
        c.hist_bins = u.hist_bins.unwrap_or(c.hist_bins);

        c.apply(overrides);
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        match path {
            Some(p) => {
                let file = ConfigFile::load(p)?;
                let base = p.parent().unwrap_or(Path::new("."));
                Self::resolve(&file, base, overrides)
            }
            None => Self::resolve(&ConfigFile::default(), Path::new("."), overrides),
        }
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = d.clone();
        }
        if let Some(m) = o.method {
            self.method = m;
        }
        if let Some(t) = o.mc_passes {
            self.mc_passes = t;
        }
    }

    /// Rejects every invariant violation before any work starts.
    pub fn validate(&self) -> Result<()> {
        match &self.data {
            DataSource::Csv { path, schema } => {
                for (what, p) in [("data.csv", path), ("data.schema", schema)] {
                    if !p.is_file() {
                        return Err(Error::Config(format!(
                            "{what} {} does not exist",
                            p.display()
                        )));
                    }
                }
            }
            DataSource::Synth {
                n_per_class,
                dim,
                separation,
            } => {
                if *n_per_class < 2 || *dim < 2 || !separation.is_finite() || *separation < 0.0 {
                    return Err(Error::Config(
                        "synth needs n_per_class >= 2, dim >= 2 and a finite separation >= 0"
                            .into(),
                    ));
                }
            }
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        // input width is not known yet; 1 is a placeholder for the shape checks
        self.network_config(1).validate()?;
        self.ensemble_spec(1, 0).validate()?;
        if self.mc_passes == 0 {
            return Err(Error::Config("mc_passes must be at least 1".into()));
        }
        if self.thresholds.is_empty()
            || self.thresholds.iter().any(|t| !(0.0..=1.0).contains(t))
            || self
                .thresholds
                .windows(2)
                .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::Config(
                "thresholds must be a nonempty, strictly increasing list inside [0, 1]".into(),
            ));
        }
        if self.ece_bins == 0 || self.hist_bins == 0 {
            return Err(Error::Config(
                "ece_bins and hist_bins must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn network_config(&self, input_units: usize) -> NetworkConfig {
        let n = &self.network;
        let mut c = NetworkConfig::new(input_units, n.hidden_units);
        c.dropout_rate = n.dropout_rate;
        c.epochs = n.epochs;
        c.batch_size = n.batch_size;
        c.learning_rate = n.learning_rate;
        c.adam_beta1 = n.adam_beta1;
        c.adam_beta2 = n.adam_beta2;
        c.adam_epsilon = n.adam_epsilon;
        c
    }

    pub fn ensemble_spec(&self, input_units: usize, master_seed: u64) -> EnsembleSpec {
        EnsembleSpec {
            members: self.ensemble.members,
            width_ranges: self.ensemble.width_ranges,
            base: self.network_config(input_units),
            master_seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<RunConfig> {
        RunConfig::resolve(
            &ConfigFile::parse(text)?,
            Path::new("."),
            &Overrides::default(),
        )
    }

    #[test]
    fn profiles_carry_reference_constants() {
        let p = RunConfig::from_profile(Profile::Paper);
        assert_eq!(p.network.hidden_units, [256, 64, 16]);
        assert_eq!(p.network.dropout_rate, 0.3);
        assert_eq!(p.network.epochs, 50);
        assert_eq!(p.network.learning_rate, 0.001);
        assert_eq!(p.ensemble.members, 30);
        assert_eq!(p.ensemble.width_ranges, [(256, 385), (64, 256), (16, 32)]);
        assert_eq!(p.mc_passes, 1000);
        assert_eq!(p.thresholds, default_thresholds());
        p.validate().unwrap();
        RunConfig::from_profile(Profile::Desk).validate().unwrap();
    }

    #[test]
    fn file_and_flags_layer_over_profile() {
        let file = ConfigFile::parse(
            "seed = 3\nmethod = \"mcd\"\n[network]\nepochs = 2\n[uq]\nmc_passes = 20\n[data.synth]\ndim = 6\n",
        )
        .unwrap();
        let o = Overrides {
            mc_passes: Some(50),
            ..Default::default()
        };
        let c = RunConfig::resolve(&file, Path::new("."), &o).unwrap();
        assert_eq!(
            (c.seed, c.method, c.network.epochs, c.mc_passes),
            (3, Method::Mcd, 2, 50)
        );
        assert!(matches!(
            c.data,
            DataSource::Synth {
                dim: 6,
                n_per_class: 300,
                ..
            }
        ));
    }

    #[test]
    fn validation_failures() {
        assert!(resolve("method = \"gp\"").is_err());
        assert!(resolve("[network]\nhidden_units = [3, 2]").is_err());
        assert!(resolve("[network]\nhidden_units = [0, 2, 2]").is_err());
        assert!(resolve("[network]\ndropout_rate = 1.0").is_err());
        assert!(resolve("[ensemble]\nmembers = 1").is_err());
        assert!(resolve("[uq]\nthresholds = [0.5, 0.2]").is_err());
        assert!(resolve("[uq]\nmc_passes = 0").is_err());
        assert!(resolve("[data]\ncsv = \"nope.csv\"").is_err());
        assert!(resolve("[data]\ncsv = \"nope.csv\"\nschema = \"nope.toml\"").is_err());
        assert!(
            resolve("[data]\ncsv = \"a.csv\"\nschema = \"s.toml\"\n[data.synth]\ndim = 3").is_err()
        );
        assert!(resolve("bogus_key = 1").is_err());
    }
}
