//! Central finite-difference check of the full network gradient.

use rand::Rng as _;

use crate::ctc::ctc_loss_from_log_probs;
use crate::dropout::{masks_for_utterance, DropoutEntry, DropoutLocation, DropoutPolicy, MaskGranularity, MaskSet};
use crate::error::Result;
use crate::network::{init_network, network_backward, Architecture, ForgetBiasInit, Network, ParamTensor, Upstream};
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckConfig {
    pub layers: usize,
    pub cells: usize,
    pub frames: usize,
    pub alphabet_size: usize,
    pub input_dim: usize,
    pub label_len: usize,
    pub epsilon: f64,
    /// Dropout rate used for every masked configuration.
    pub rate: f64,
    /// Parameters are drawn from `U[-param_scale, param_scale]`.
    pub param_scale: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            layers: 2,
            cells: 4,
            frames: 5,
            alphabet_size: 3,
            input_dim: 3,
            label_len: 2,
            epsilon: 1e-4,
            rate: 0.2,
            param_scale: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub label: String,
    pub max_rel_error: f64,
    /// Tensor and flat index of the worst parameter.
    pub worst: Option<(ParamTensor, usize)>,
    pub checked: usize,
}

/// `|a − n| / max(|a|, |n|)`, zero when both are zero.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale == 0.0 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

/// The six dropout configurations every gradient check covers.
pub fn standard_dropout_configs(rate: f64) -> Vec<(String, DropoutPolicy)> {
    use DropoutLocation::*;
    use MaskGranularity::*;
    let mut out = vec![("none".to_string(), DropoutPolicy::none())];
    for (loc, gran) in [
        (ForwardConnection, PerStep),
        (ForwardConnection, PerSequence),
        (RnnDropCell, PerStep),
        (NmlCellUpdate, PerStep),
        (NmlCellUpdate, PerSequence),
    ] {
        let e = DropoutEntry::new(loc, gran, rate);
        out.push((e.name(), DropoutPolicy::naive(vec![e])));
    }
    out
}

fn loss(net: &Network, x: &[f64], frames: usize, masks: &Option<MaskSet>, labels: &[usize]) -> Result<f64> {
    let cache = net.forward(x, frames, masks.clone())?;
    Ok(ctc_loss_from_log_probs(&cache.log_probs, net.num_classes(), labels)?.loss)
}

/// Compares the analytic CTC gradient of every parameter against central
/// differences, with the dropout masks sampled once and held fixed.
pub fn gradient_check(cfg: &GradCheckConfig, label: &str, policy: &DropoutPolicy) -> Result<GradCheckReport> {
    let arch = Architecture {
        input_dim: cfg.input_dim,
        layers: cfg.layers,
        cells: cfg.cells,
        alphabet_size: cfg.alphabet_size,
    };
    let mut net = init_network(&arch, cfg.seed, ForgetBiasInit::Random)?;
    let mut rng = stream(cfg.seed, &["gradcheck".into(), label.into()]);
    // At the ±0.1 training init many gradients sit near 1e-9, where the
    // rounding noise of a central difference is already ~1e-3 relative.
    for (_, t) in net.tensors_mut() {
        t.iter_mut().for_each(|v| *v = rng.random_range(-cfg.param_scale..=cfg.param_scale));
    }
    let x: Vec<f64> = (0..cfg.frames * cfg.input_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let labels: Vec<usize> = (0..cfg.label_len).map(|_| rng.random_range(0..cfg.alphabet_size)).collect();
    let masks = if policy.entries.is_empty() {
        None
    } else {
        Some(masks_for_utterance(policy, cfg.frames, &net.cells_per_layer(), &mut rng, None)?)
    };

    let cache = net.forward(&x, cfg.frames, masks.clone())?;
    let ctc = ctc_loss_from_log_probs(&cache.log_probs, net.num_classes(), &labels)?;
    let grad = network_backward(&net, &cache, Upstream::Logits(&ctc.grad_logits))?;
    let analytic: Vec<(ParamTensor, Vec<f64>)> = grad.tensors().into_iter().map(|(id, t)| (id, t.to_vec())).collect();

    let mut report = GradCheckReport {
        label: label.to_string(),
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
    };
    for (ti, (id, a)) in analytic.iter().enumerate() {
        for (k, &ak) in a.iter().enumerate() {
            let orig = net.tensors()[ti].1[k];
            net.tensors_mut()[ti].1[k] = orig + cfg.epsilon;
            let up = loss(&net, &x, cfg.frames, &masks, &labels)?;
            net.tensors_mut()[ti].1[k] = orig - cfg.epsilon;
            let down = loss(&net, &x, cfg.frames, &masks, &labels)?;
            net.tensors_mut()[ti].1[k] = orig;
            let numeric = (up - down) / (2.0 * cfg.epsilon);
            let e = relative_error(ak, numeric);
            report.checked += 1;
            if e > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(e);
                report.worst = Some((*id, k));
            }
        }
    }
    Ok(report)
}

/// Runs [`gradient_check`] for every standard dropout configuration.
pub fn gradient_check_suite(cfg: &GradCheckConfig) -> Result<Vec<GradCheckReport>> {
    standard_dropout_configs(cfg.rate)
        .iter()
        .map(|(label, policy)| gradient_check(cfg, label, policy))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for r in gradient_check_suite(&GradCheckConfig::default()).unwrap() {
            assert!(r.max_rel_error < 1e-4, "{r:?}");
        }
    }
}
