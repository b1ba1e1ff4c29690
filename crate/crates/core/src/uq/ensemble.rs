use rand::Rng;
use serde::{Deserialize, Serialize};

use super::estimate::{
    Method, PredictiveSamples, SampleTag, SummaryAccumulator, UncertaintyEstimate,
};
use super::mcd::{check_passes, stochastic_passes};
use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::nn::{train, Network, NetworkConfig, TrainOutcome};
use crate::seed::{derive_seed, stream_rng};

/// Inclusive width ranges per hidden layer for the reference ensemble.
pub const DEFAULT_WIDTH_RANGES: [(usize, usize); 3] = [(256, 385), (64, 256), (16, 32)];
pub const DEFAULT_MEMBERS: usize = 30;

/// How to build a deep ensemble: `members` networks sharing `base`'s
/// hyper-parameters, each with hidden widths drawn uniformly from
/// `width_ranges`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub members: usize,
    pub width_ranges: [(usize, usize); 3],
    pub base: NetworkConfig,
    pub master_seed: u64,
}

impl EnsembleSpec {
    pub fn new(base: NetworkConfig, master_seed: u64) -> Self {
        Self {
            members: DEFAULT_MEMBERS,
            width_ranges: DEFAULT_WIDTH_RANGES,
            base,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.members < 2 {
            return Err(Error::Config(format!(
                "an ensemble needs at least 2 members, got {}",
                self.members
            )));
        }
        for (i, &(lo, hi)) in self.width_ranges.iter().enumerate() {
            if lo == 0 || lo >= hi {
                return Err(Error::Config(format!(
                    "hidden layer {} width range ({lo}, {hi}) must satisfy 1 <= low < high",
                    i + 1
                )));
            }
        }
        self.base.validate()
    }

    /// Configuration of member `i`; depends only on `(master_seed, i)`.
    pub fn member_config(&self, i: usize) -> NetworkConfig {
        let mut rng = stream_rng(self.master_seed, "ensemble-widths", &[i as u64]);
        let mut c = self.base.clone();
        for (h, &(lo, hi)) in c.hidden_units.iter_mut().zip(&self.width_ranges) {
            *h = rng.random_range(lo..=hi);
        }
        c.seed = derive_seed(self.master_seed, "ensemble-member", &[i as u64]);
        c
    }

    pub fn member_configs(&self) -> Vec<NetworkConfig> {
        (0..self.members).map(|i| self.member_config(i)).collect()
    }
}

/// Trains every member on the identical table (no bootstrap resampling).
pub fn train_ensemble(
    spec: &EnsembleSpec,
    data: &FeatureTable,
    exec: Execution,
) -> Result<Vec<TrainOutcome>> {
    spec.validate()?;
    exec.try_map(spec.members, |i| {
        let c = spec.member_config(i);
        train(&c, data, c.seed)
    })
}

fn check_members(members: &[Network], input_len: usize) -> Result<()> {
    if members.len() < 2 {
        return Err(Error::Input(format!(
            "ensemble prediction needs at least 2 members, got {}",
            members.len()
        )));
    }
    for (i, m) in members.iter().enumerate() {
        if m.input_units() != input_len {
            return Err(Error::Shape(format!(
                "member {i} expects {} features, input has {input_len}",
                m.input_units()
            )));
        }
    }
    Ok(())
}

/// One deterministic forward per member.
pub fn ensemble_predict(members: &[Network], x: &[f64]) -> Result<PredictiveSamples> {
    check_members(members, x.len())?;
    let mut s = PredictiveSamples::new(Method::Ensemble, members[0].config.output_units);
    for (i, m) in members.iter().enumerate() {
        let p = m.forward(x, None)?;
        s.push(
            &p,
            SampleTag {
                member: i as u32,
                pass: 0,
            },
        );
    }
    Ok(s)
}

/// `passes` dropout-active passes per member, member-major.
pub fn emcd_predict<R: Rng + ?Sized>(
    members: &[Network],
    x: &[f64],
    passes: usize,
    rng: &mut R,
) -> Result<PredictiveSamples> {
    check_members(members, x.len())?;
    check_passes(passes)?;
    let mut s = PredictiveSamples::new(Method::Emcd, members[0].config.output_units);
    for (i, m) in members.iter().enumerate() {
        stochastic_passes(m, x, passes, rng, |pass, row| {
            s.push(
                row,
                SampleTag {
                    member: i as u32,
                    pass,
                },
            )
        })?;
    }
    Ok(s)
}

pub fn ensemble_estimates(
    members: &[Network],
    table: &FeatureTable,
    exec: Execution,
) -> Result<Vec<UncertaintyEstimate>> {
    check_members(members, table.n_cols())?;
    let classes = members[0].config.output_units;
    exec.try_map(table.n_rows(), |i| {
        let mut acc = SummaryAccumulator::new(classes);
        for m in members {
            acc.add(&m.forward(table.row(i), None)?);
        }
        acc.finish()
    })
}

/// EMCD estimates for every row; member `k` on row `i` uses the stream
/// `(seed, "emcd", [k, i])`.
pub fn emcd_estimates(
    members: &[Network],
    table: &FeatureTable,
    passes: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<UncertaintyEstimate>> {
    check_members(members, table.n_cols())?;
    check_passes(passes)?;
    let classes = members[0].config.output_units;
    exec.try_map(table.n_rows(), |i| {
        let mut acc = SummaryAccumulator::new(classes);
        for (k, m) in members.iter().enumerate() {
            let mut rng = stream_rng(seed, "emcd", &[k as u64, i as u64]);
            stochastic_passes(m, table.row(i), passes, &mut rng, |_, row| acc.add(row))?;
        }
        acc.finish()
    })
}
