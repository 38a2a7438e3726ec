use super::cell::{step_from_projections, StepOut};
use super::{BiLstmLayer, DirectionParams, Network};
use crate::dropout::{masks_for_utterance, CellMask, Combination, DropoutPolicy, LayerMasks, MaskSet};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::linalg::{gemm, Op};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Masks are sampled from the dropout policy.
    Train,
    /// No masks; the deterministic inference network.
    Eval,
}

/// Per-direction activations, each `frames × cells`, indexed by time.
#[derive(Clone, Debug, PartialEq)]
pub struct DirCache {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerCache {
    /// `[forward, backward]`
    pub dirs: [DirCache; 2],
    /// `frames × 2·cells`, after the forward-connection mask (if any).
    pub output: Vec<f64>,
}

/// Everything the backward pass needs for one utterance.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardCache {
    pub frames: usize,
    pub input: Vec<f64>,
    pub layers: Vec<LayerCache>,
    /// `frames × (K+1)` each.
    pub logits: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub posteriors: Vec<f64>,
    pub masks: Option<MaskSet>,
    pub(crate) fingerprint: u64,
}

/// Processing order of time indices for one direction.
pub(crate) fn time_order(frames: usize, reverse: bool) -> impl DoubleEndedIterator<Item = usize> + Clone {
    let it = 0..frames;
    let map = move |k: usize| if reverse { frames - 1 - k } else { k };
    it.map(map)
}

/// Input projections `X Wᵀ + b` for every gate, each `frames × cells`.
pub(crate) fn input_projections(p: &DirectionParams, x: &[f64], frames: usize) -> [Vec<f64>; 4] {
    let n = p.cells();
    let d = p.input_dim();
    let proj = |g: &super::GateParams| {
        let mut z = vec![0.0; frames * n];
        gemm(frames, d, n, x, Op::N, &g.w.data, Op::T, 0.0, &mut z);
        for row in z.chunks_exact_mut(n) {
            row.iter_mut().zip(&g.b).for_each(|(v, b)| *v += b);
        }
        z
    };
    [proj(&p.input_gate), proj(&p.forget_gate), proj(&p.output_gate), proj(&p.candidate)]
}

fn direction_forward(
    p: &DirectionParams,
    x: &[f64],
    frames: usize,
    reverse: bool,
    mask: Option<&CellMask>,
) -> Result<DirCache> {
    let n = p.cells();
    let z = input_projections(p, x, frames);
    let mut dc = DirCache {
        i: vec![0.0; frames * n],
        f: vec![0.0; frames * n],
        o: vec![0.0; frames * n],
        g: vec![0.0; frames * n],
        c: vec![0.0; frames * n],
        tanh_c: vec![0.0; frames * n],
        h: vec![0.0; frames * n],
    };
    let zeros = vec![0.0; n];
    let mut prev: Option<usize> = None;
    for t in time_order(frames, reverse) {
        let r = t * n..(t + 1) * n;
        let (h_prev, c_prev) = match prev {
            Some(s) => (dc.h[s * n..(s + 1) * n].to_vec(), dc.c[s * n..(s + 1) * n].to_vec()),
            None => (zeros.clone(), zeros.clone()),
        };
        step_from_projections(
            p,
            [&z[0][r.clone()], &z[1][r.clone()], &z[2][r.clone()], &z[3][r.clone()]],
            &h_prev,
            &c_prev,
            mask.map(|m| (m.location, m.mask.at(t))),
            StepOut {
                i: &mut dc.i[r.clone()],
                f: &mut dc.f[r.clone()],
                o: &mut dc.o[r.clone()],
                g: &mut dc.g[r.clone()],
                c: &mut dc.c[r.clone()],
                tanh_c: &mut dc.tanh_c[r.clone()],
                h: &mut dc.h[r],
            },
        )?;
        prev = Some(t);
    }
    Ok(dc)
}

/// Runs both directions of one layer over `x` (`frames × input_dim`) and
/// returns the concatenated, optionally masked output.
pub fn bilstm_layer_forward(
    layer: &BiLstmLayer,
    x: &[f64],
    frames: usize,
    masks: Option<&LayerMasks>,
) -> Result<LayerCache> {
    let d = layer.input_dim();
    let n = layer.cells;
    if frames == 0 || x.len() != frames * d {
        return Err(Error::ShapeError(format!(
            "layer expects frames × {d} inputs with frames ≥ 1, got {} values for {frames} frames",
            x.len()
        )));
    }
    if let Some(m) = masks {
        check_layer_masks(m, n, frames)?;
    }
    let cell = |k: usize| masks.and_then(|m| m.cell[k].as_ref());
    let fwd = direction_forward(&layer.forward_dir, x, frames, false, cell(0))?;
    let bwd = direction_forward(&layer.backward_dir, x, frames, true, cell(1))?;
    let mut output = vec![0.0; frames * 2 * n];
    for (t, row) in output.chunks_exact_mut(2 * n).enumerate() {
        row[..n].copy_from_slice(&fwd.h[t * n..(t + 1) * n]);
        row[n..].copy_from_slice(&bwd.h[t * n..(t + 1) * n]);
        if let Some(m) = masks.and_then(|m| m.forward.as_ref()) {
            row.iter_mut().zip(m.at(t)).for_each(|(v, k)| *v *= k);
        }
    }
    Ok(LayerCache { dirs: [fwd, bwd], output })
}

fn check_layer_masks(m: &LayerMasks, cells: usize, frames: usize) -> Result<()> {
    if let Some(f) = &m.forward {
        if f.dim() != 2 * cells || f.steps() != frames {
            return Err(Error::ShapeError(format!(
                "forward mask is {}×{}, layer needs {frames}×{}",
                f.steps(),
                f.dim(),
                2 * cells
            )));
        }
    }
    for c in m.cell.iter().flatten() {
        if !c.location.is_cell() {
            return Err(Error::WrongLocation(c.location.to_string()));
        }
        if c.mask.dim() != cells || c.mask.steps() != frames {
            return Err(Error::ShapeError(format!(
                "cell mask is {}×{}, layer needs {frames}×{cells}",
                c.mask.steps(),
                c.mask.dim()
            )));
        }
    }
    Ok(())
}

impl Network {
    /// Forward pass over `x` (`frames × input_dim`) with explicit masks.
    pub fn forward(&self, x: &[f64], frames: usize, masks: Option<MaskSet>) -> Result<ForwardCache> {
        if let Some(m) = &masks {
            if m.layers.len() != self.layers.len() || m.steps != frames {
                return Err(Error::ShapeError(format!(
                    "mask set covers {} layers × {} steps, network has {} layers and input {frames} frames",
                    m.layers.len(),
                    m.steps,
                    self.layers.len()
                )));
            }
        }
        let mut layers: Vec<LayerCache> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let input = if l == 0 { x } else { &layers[l - 1].output };
            let lm = masks.as_ref().map(|m| &m.layers[l]);
            let cache = bilstm_layer_forward(layer, input, frames, lm)?;
            layers.push(cache);
        }
        let top = &layers.last().expect("at least one layer").output;
        let c = self.num_classes();
        let width = self.softmax_w.rows;
        let mut logits = vec![0.0; frames * c];
        gemm(frames, width, c, top, Op::N, &self.softmax_w.data, Op::N, 0.0, &mut logits);
        let mut log_probs = vec![0.0; frames * c];
        let mut posteriors = vec![0.0; frames * c];
        for t in 0..frames {
            let r = t * c..(t + 1) * c;
            let row = &mut logits[r.clone()];
            row.iter_mut().zip(&self.softmax_b).for_each(|(v, b)| *v += b);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            for k in 0..c {
                log_probs[t * c + k] = row[k] - lse;
                posteriors[t * c + k] = log_probs[t * c + k].exp();
            }
        }
        Ok(ForwardCache {
            frames,
            input: x.to_vec(),
            layers,
            logits,
            log_probs,
            posteriors,
            masks,
            fingerprint: self.fingerprint(),
        })
    }
}

/// Forward pass over a feature matrix. In [`Mode::Train`] masks are drawn
/// from `policy` (which must not be a cascade; resolve its active stage
/// first); in [`Mode::Eval`] no masks are applied.
pub fn network_forward(
    features: &FeatureMatrix,
    net: &Network,
    policy: &DropoutPolicy,
    mode: Mode,
    rng: &mut Rng,
) -> Result<ForwardCache> {
    if features.dim() != net.input_dim() {
        return Err(Error::ShapeError(format!(
            "features have dimension {}, network expects {}",
            features.dim(),
            net.input_dim()
        )));
    }
    let frames = features.frames();
    let masks = match mode {
        Mode::Eval => None,
        Mode::Train if policy.entries.is_empty() && !matches!(policy.combination, Combination::Cascade { .. }) => None,
        Mode::Train => Some(masks_for_utterance(policy, frames, &net.cells_per_layer(), rng, None)?),
    };
    net.forward(features.data(), frames, masks)
}
