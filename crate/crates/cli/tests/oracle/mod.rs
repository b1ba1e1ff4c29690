//! Reference computations for the acceptance suite, written against the
//! definitions only. Nothing here calls the library's math.

use rand::Rng;
use uqfraud::nn::{DropoutMask, Network};
use uqfraud::seed::stream_rng;
use uqfraud::uq::UncertaintyEstimate;

/// Forward pass from the raw layer parameters. Returns class probabilities
/// and the ReLU on/off pattern of every hidden unit.
pub fn forward(net: &Network, x: &[f64], mask: Option<&DropoutMask>) -> (Vec<f64>, Vec<bool>) {
    let mut a = x.to_vec();
    let mut pattern = Vec::new();
    let last = net.layers.len() - 1;
    for (l, layer) in net.layers.iter().enumerate() {
        let mut z = vec![0.0; layer.rows];
        for (r, zr) in z.iter_mut().enumerate() {
            let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
            *zr = layer.bias[r] + row.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>();
        }
        if l < last {
            for (u, v) in z.iter_mut().enumerate() {
                pattern.push(*v > 0.0);
                *v = v.max(0.0);
                if let Some(m) = mask {
                    *v *= m.layers[l][u];
                }
            }
        }
        a = z;
    }
    let top = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = a.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = exps.iter().sum();
    (exps.iter().map(|e| e / total).collect(), pattern)
}

/// Mean clamped negative log-likelihood and the concatenated ReLU patterns.
pub fn batch_loss(
    net: &Network,
    xs: &[Vec<f64>],
    ys: &[usize],
    masks: Option<&[DropoutMask]>,
) -> (f64, Vec<bool>) {
    let mut total = 0.0;
    let mut pattern = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let (p, pat) = forward(net, x, masks.map(|m| &m[i]));
        total -= p[ys[i]].max(1e-12).ln();
        pattern.extend(pat);
    }
    (total / xs.len() as f64, pattern)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GradCheck {
    pub checked: usize,
    /// Parameters whose ±h perturbation crosses a ReLU kink; the finite
    /// difference is not a derivative there.
    pub skipped: usize,
    pub max_rel_error: f64,
}

/// Relative error with a floor so both-near-zero pairs compare absolutely.
pub fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn param(net: &mut Network, layer: usize, which: usize, k: usize) -> &mut f64 {
    let l = &mut net.layers[layer];
    if which == 0 {
        &mut l.weights[k]
    } else {
        &mut l.bias[k]
    }
}

/// Central differences of [`batch_loss`] against `analytic`, which is laid
/// out per layer as weights then bias.
pub fn check_gradients(
    net: &Network,
    xs: &[Vec<f64>],
    ys: &[usize],
    masks: Option<&[DropoutMask]>,
    analytic: &[(Vec<f64>, Vec<f64>)],
    h: f64,
) -> GradCheck {
    let (_, base) = batch_loss(net, xs, ys, masks);
    let mut out = GradCheck::default();
    let mut probe = net.clone();
    for (l, grads) in analytic.iter().enumerate() {
        for which in 0..2 {
            let n = if which == 0 {
                net.layers[l].weights.len()
            } else {
                net.layers[l].bias.len()
            };
            for k in 0..n {
                let theta = *param(&mut probe, l, which, k);
                *param(&mut probe, l, which, k) = theta + h;
                let (lp, pp) = batch_loss(&probe, xs, ys, masks);
                *param(&mut probe, l, which, k) = theta - h;
                let (lm, pm) = batch_loss(&probe, xs, ys, masks);
                *param(&mut probe, l, which, k) = theta;
                if pp != base || pm != base {
                    out.skipped += 1;
                    continue;
                }
                let numeric = (lp - lm) / (2.0 * h);
                let a = if which == 0 { grads.0[k] } else { grads.1[k] };
                out.checked += 1;
                out.max_rel_error = out.max_rel_error.max(rel_error(a, numeric));
            }
        }
    }
    out
}

/// Entropy of `p` in nats divided by `ln C`.
pub fn entropy_norm(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum();
    h / (p.len() as f64).ln()
}

pub fn argmax(p: &[f64]) -> usize {
    (0..p.len()).fold(0, |best, i| if p[i] > p[best] { i } else { best })
}

/// `(TC, TU, FU, FC)` by checking every sample against the definitions.
pub fn recount(
    est: &[UncertaintyEstimate],
    labels: &[u8],
    threshold: f64,
) -> (usize, usize, usize, usize) {
    let (mut tc, mut tu, mut fu, mut fc) = (0, 0, 0, 0);
    for (e, &y) in est.iter().zip(labels) {
        let correct = argmax(&e.mean_probs) == y as usize;
        let uncertain = e.entropy_norm > threshold;
        if correct && !uncertain {
            tc += 1;
        }
        if !correct && uncertain {
            tu += 1;
        }
        if correct && uncertain {
            fu += 1;
        }
        if !correct && !uncertain {
            fc += 1;
        }
    }
    (tc, tu, fu, fc)
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `(UAcc, USen, USpe, UPre)`.
#[allow(clippy::type_complexity)]
pub fn metrics(
    c: (usize, usize, usize, usize),
) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    let (tc, tu, fu, fc) = c;
    (
        ratio(tu + tc, tc + tu + fu + fc),
        ratio(tu, tu + fc),
        ratio(tc, tc + fu),
        ratio(tu, tu + fu),
    )
}

/// ECE straight from its definition over `(k/m, (k+1)/m]` bins.
pub fn ece(est: &[UncertaintyEstimate], labels: &[u8], m: usize) -> f64 {
    let n = est.len() as f64;
    let conf: Vec<f64> = est
        .iter()
        .map(|e| e.mean_probs.iter().copied().fold(0.0, f64::max))
        .collect();
    let mut total = 0.0;
    for k in 0..m {
        let (lo, hi) = (k as f64 / m as f64, (k + 1) as f64 / m as f64);
        let idx: Vec<usize> = (0..est.len())
            .filter(|&i| (conf[i] > lo || (k == 0 && conf[i] >= lo)) && conf[i] <= hi)
            .collect();
        if idx.is_empty() {
            continue;
        }
        let b = idx.len() as f64;
        let acc = idx
            .iter()
            .filter(|&&i| argmax(&est[i].mean_probs) == labels[i] as usize)
            .count() as f64
            / b;
        let mean_conf = idx.iter().map(|&i| conf[i]).sum::<f64>() / b;
        total += b / n * (acc - mean_conf).abs();
    }
    total
}

/// Predictions whose confidence `c ~ U[0.5, 1]` is exactly the probability
/// of the predicted class being right.
pub fn calibrated_fixture(n: usize, seed: u64) -> (Vec<UncertaintyEstimate>, Vec<u8>) {
    let mut rng = stream_rng(seed, "acceptance-calibrated", &[]);
    (0..n)
        .map(|_| {
            let c = 0.5 + 0.5 * rng.random::<f64>();
            let predicted = rng.random_range(0..2usize);
            let probs = if predicted == 1 {
                vec![1.0 - c, c]
            } else {
                vec![c, 1.0 - c]
            };
            let y = if rng.random::<f64>() < c {
                predicted
            } else {
                1 - predicted
            };
            (UncertaintyEstimate::from_mean(probs), y as u8)
        })
        .unzip()
}
