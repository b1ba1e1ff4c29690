use rand::Rng;

use super::estimate::{
    Method, PredictiveSamples, SampleTag, SummaryAccumulator, UncertaintyEstimate,
};
use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::nn::{DropoutMask, ForwardScratch, Network};
use crate::seed::stream_rng;

/// Runs `passes` stochastic forward passes of `net` on `x`, handing each
/// probability row to `sink` in pass order.
///
/// The first-layer product is shared across passes since dropout only acts
/// on hidden activations. With a zero dropout rate every pass is the plain
/// deterministic forward.
pub(crate) fn stochastic_passes<R: Rng + ?Sized>(
    net: &Network,
    x: &[f64],
    passes: usize,
    rng: &mut R,
    mut sink: impl FnMut(u32, &[f64]),
) -> Result<()> {
    let pre1 = net.first_preactivation(x)?;
    let rate = net.config.dropout_rate;
    let mut scratch = ForwardScratch::new(net);
    let mut out = vec![0.0; net.config.output_units];
    let mut mask = DropoutMask::identity(net.hidden_units());
    mask.keep_prob = 1.0 - rate;
    for t in 0..passes {
        let m = if rate > 0.0 {
            mask.resample(rng);
            Some(&mask)
        } else {
            None
        };
        net.forward_from_first(&pre1, m, &mut scratch, &mut out);
        if out.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric(
                "stochastic pass produced a non-finite probability".into(),
            ));
        }
        sink(t as u32, &out);
    }
    Ok(())
}

pub(crate) fn check_passes(passes: usize) -> Result<()> {
    if passes == 0 {
        return Err(Error::Input(
            "number of MC passes must be at least 1".into(),
        ));
    }
    Ok(())
}

/// `passes` dropout-active forward passes of one input.
pub fn mcd_predict<R: Rng + ?Sized>(
    net: &Network,
    x: &[f64],
    passes: usize,
    rng: &mut R,
) -> Result<PredictiveSamples> {
    check_passes(passes)?;
    let mut s = PredictiveSamples::new(Method::Mcd, net.config.output_units);
    stochastic_passes(net, x, passes, rng, |pass, row| {
        s.push(row, SampleTag { member: 0, pass })
    })?;
    Ok(s)
}

/// MCD estimates for every row of `table`.
///
/// Row `i` draws its masks from the stream `(seed, "mcd", [0, i])`, so the
/// output is the same in every execution mode.
pub fn mcd_estimates(
    net: &Network,
    table: &FeatureTable,
    passes: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<UncertaintyEstimate>> {
    check_passes(passes)?;
    exec.try_map(table.n_rows(), |i| {
        let mut rng = stream_rng(seed, "mcd", &[0, i as u64]);
        let mut acc = SummaryAccumulator::new(net.config.output_units);
        stochastic_passes(net, table.row(i), passes, &mut rng, |_, row| acc.add(row))?;
        acc.finish()
    })
}
