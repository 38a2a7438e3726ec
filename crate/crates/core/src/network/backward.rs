use super::forward::{time_order, DirCache, ForwardCache};
use super::{DirectionParams, Network};
use crate::dropout::{CellMask, DropoutLocation};
use crate::error::{Error, Result};
use crate::linalg::{gemm, matvec_t_add, Op};

/// Gradient arriving at the network output.
#[derive(Clone, Copy, Debug)]
pub enum Upstream<'a> {
    /// `∂L/∂logits`, `frames × (K+1)` (what CTC produces).
    Logits(&'a [f64]),
    /// `∂L/∂posteriors`, `frames × (K+1)`; pushed through the softmax.
    Posteriors(&'a [f64]),
}

/// Backpropagation through time. Returns gradients shaped like `net`.
///
/// `cache` must come from a forward pass of this exact `net`; anything else
/// is a [`Error::CacheMismatch`].
pub fn network_backward(net: &Network, cache: &ForwardCache, upstream: Upstream<'_>) -> Result<Network> {
    if cache.fingerprint != net.fingerprint() || cache.layers.len() != net.layers.len() {
        return Err(Error::CacheMismatch);
    }
    let frames = cache.frames;
    let c = net.num_classes();
    let dlogits: Vec<f64> = match upstream {
        Upstream::Logits(g) => {
            check_len(g.len(), frames * c)?;
            g.to_vec()
        }
        Upstream::Posteriors(g) => {
            check_len(g.len(), frames * c)?;
            let mut out = vec![0.0; frames * c];
            for t in 0..frames {
                let y = &cache.posteriors[t * c..(t + 1) * c];
                let dy = &g[t * c..(t + 1) * c];
                let s: f64 = y.iter().zip(dy).map(|(a, b)| a * b).sum();
                for k in 0..c {
                    out[t * c + k] = y[k] * (dy[k] - s);
                }
            }
            out
        }
    };

    let mut grad = net.zeros_like();
    let top = &cache.layers.last().expect("at least one layer").output;
    let width = net.softmax_w.rows;
    gemm(width, frames, c, top, Op::T, &dlogits, Op::N, 0.0, &mut grad.softmax_w.data);
    for row in dlogits.chunks_exact(c) {
        grad.softmax_b.iter_mut().zip(row).for_each(|(b, v)| *b += v);
    }
    let mut dy = vec![0.0; frames * width];
    gemm(frames, c, width, &dlogits, Op::N, &net.softmax_w.data, Op::T, 0.0, &mut dy);

    for l in (0..net.layers.len()).rev() {
        let layer = &net.layers[l];
        let lc = &cache.layers[l];
        let n = layer.cells;
        let lm = cache.masks.as_ref().map(|m| &m.layers[l]);
        if let Some(m) = lm.and_then(|m| m.forward.as_ref()) {
            for (t, row) in dy.chunks_exact_mut(2 * n).enumerate() {
                row.iter_mut().zip(m.at(t)).for_each(|(v, k)| *v *= k);
            }
        }
        let mut dh = [vec![0.0; frames * n], vec![0.0; frames * n]];
        for (t, row) in dy.chunks_exact(2 * n).enumerate() {
            dh[0][t * n..(t + 1) * n].copy_from_slice(&row[..n]);
            dh[1][t * n..(t + 1) * n].copy_from_slice(&row[n..]);
        }
        let x: &[f64] = if l == 0 { &cache.input } else { &cache.layers[l - 1].output };
        let d = layer.input_dim();
        let mut dx = vec![0.0; frames * d];
        let cell = |k: usize| lm.and_then(|m| m.cell[k].as_ref());
        let gl = &mut grad.layers[l];
        direction_backward(&layer.forward_dir, x, frames, false, &lc.dirs[0], cell(0), &dh[0], &mut gl.forward_dir, &mut dx);
        direction_backward(&layer.backward_dir, x, frames, true, &lc.dirs[1], cell(1), &dh[1], &mut gl.backward_dir, &mut dx);
        dy = dx;
    }
    Ok(grad)
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::ShapeError(format!("upstream gradient has {got} values, expected {want}")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn direction_backward(
    p: &DirectionParams,
    x: &[f64],
    frames: usize,
    reverse: bool,
    cache: &DirCache,
    mask: Option<&CellMask>,
    dh_out: &[f64],
    grad: &mut DirectionParams,
    dx: &mut [f64],
) {
    let n = p.cells();
    let d = p.input_dim();
    let pi = p.input_gate.p.as_deref().expect("peephole");
    let pf = p.forget_gate.p.as_deref().expect("peephole");
    let po = p.output_gate.p.as_deref().expect("peephole");

    // Pre-activation deltas per gate, time-indexed, in [i, f, o, g] order.
    let mut delta = [vec![0.0; frames * n], vec![0.0; frames * n], vec![0.0; frames * n], vec![0.0; frames * n]];
    let mut dp = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut dh_rec = vec![0.0; n];
    let mut dc_carry = vec![0.0; n];
    let zeros = vec![0.0; n];
    // Previous step in processing order, for each t.
    let order: Vec<usize> = time_order(frames, reverse).collect();
    let mut prev_of = vec![None; frames];
    for w in order.windows(2) {
        prev_of[w[1]] = Some(w[0]);
    }

    for &t in order.iter().rev() {
        let r = t * n..(t + 1) * n;
        let (i, f, o, g, c, tc) = (&cache.i[r.clone()], &cache.f[r.clone()], &cache.o[r.clone()], &cache.g[r.clone()], &cache.c[r.clone()], &cache.tanh_c[r.clone()]);
        let cp = match prev_of[t] {
            Some(s) => &cache.c[s * n..(s + 1) * n],
            None => &zeros[..],
        };
        let m = mask.map(|m| (m.location, m.mask.at(t)));
        for k in 0..n {
            let dh = dh_out[t * n + k] + dh_rec[k];
            let da_o = dh * tc[k] * o[k] * (1.0 - o[k]);
            delta[2][t * n + k] = da_o;
            let dc = dh * o[k] * (1.0 - tc[k] * tc[k]) + da_o * po[k] + dc_carry[k];
            // `a` flows to c_prev and the forget gate, `b` to i ⊙ g.
            let (a, b) = match m {
                None => (dc, dc),
                Some((DropoutLocation::RnnDropCell, mv)) => (dc * mv[k], dc * mv[k]),
                Some((_, mv)) => (dc, dc * mv[k]),
            };
            let da_f = a * cp[k] * f[k] * (1.0 - f[k]);
            let da_i = b * g[k] * i[k] * (1.0 - i[k]);
            let da_g = b * i[k] * (1.0 - g[k] * g[k]);
            delta[0][t * n + k] = da_i;
            delta[1][t * n + k] = da_f;
            delta[3][t * n + k] = da_g;
            dp[0][k] += da_i * cp[k];
            dp[1][k] += da_f * cp[k];
            dp[2][k] += da_o * c[k];
            dc_carry[k] = a * f[k] + da_i * pi[k] + da_f * pf[k];
        }
        dh_rec.fill(0.0);
        for (gp, dl) in [&p.input_gate, &p.forget_gate, &p.output_gate, &p.candidate].into_iter().zip(&delta) {
            matvec_t_add(&gp.r.data, n, n, &dl[r.clone()], &mut dh_rec);
        }
    }

    // Recurrent inputs h_prev, time-indexed.
    let mut h_prev = vec![0.0; frames * n];
    for t in 0..frames {
        if let Some(s) = prev_of[t] {
            h_prev[t * n..(t + 1) * n].copy_from_slice(&cache.h[s * n..(s + 1) * n]);
        }
    }
    let DirectionParams { input_gate, forget_gate, output_gate, candidate } = grad;
    for ((gg, gp), dl) in [input_gate, forget_gate, output_gate, candidate]
        .into_iter()
        .zip([&p.input_gate, &p.forget_gate, &p.output_gate, &p.candidate])
        .zip(&delta)
    {
        gemm(n, frames, d, dl, Op::T, x, Op::N, 0.0, &mut gg.w.data);
        gemm(n, frames, n, dl, Op::T, &h_prev, Op::N, 0.0, &mut gg.r.data);
        for row in dl.chunks_exact(n) {
            gg.b.iter_mut().zip(row).for_each(|(b, v)| *b += v);
        }
        gemm(frames, n, d, dl, Op::N, &gp.w.data, Op::N, 1.0, dx);
    }
    for (target, src) in [&mut grad.input_gate.p, &mut grad.forget_gate.p, &mut grad.output_gate.p].into_iter().zip(dp) {
        *target = Some(src);
    }
}
