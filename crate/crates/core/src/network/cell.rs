use super::DirectionParams;
use crate::dropout::{cell_state_with_dropout, DropoutLocation};
use crate::error::{Error, Result};
use crate::linalg::{matvec_add, sigmoid};

/// Activations of one LSTM step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepCache {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) struct StepOut<'a> {
    pub i: &'a mut [f64],
    pub f: &'a mut [f64],
    pub o: &'a mut [f64],
    pub g: &'a mut [f64],
    pub c: &'a mut [f64],
    pub tanh_c: &'a mut [f64],
    pub h: &'a mut [f64],
}

/// One step given the input projections `W x + b` of each gate, in
/// `[input, forget, output, candidate]` order.
pub(crate) fn step_from_projections(
    p: &DirectionParams,
    zx: [&[f64]; 4],
    h_prev: &[f64],
    c_prev: &[f64],
    mask: Option<(DropoutLocation, &[f64])>,
    out: StepOut<'_>,
) -> Result<()> {
    let n = p.cells();
    out.i.copy_from_slice(zx[0]);
    out.f.copy_from_slice(zx[1]);
    out.o.copy_from_slice(zx[2]);
    out.g.copy_from_slice(zx[3]);
    matvec_add(&p.input_gate.r.data, n, n, h_prev, out.i);
    matvec_add(&p.forget_gate.r.data, n, n, h_prev, out.f);
    matvec_add(&p.output_gate.r.data, n, n, h_prev, out.o);
    matvec_add(&p.candidate.r.data, n, n, h_prev, out.g);

    let pi = p.input_gate.p.as_deref().expect("input gate peephole");
    let pf = p.forget_gate.p.as_deref().expect("forget gate peephole");
    let po = p.output_gate.p.as_deref().expect("output gate peephole");
    for k in 0..n {
        out.i[k] = sigmoid(out.i[k] + pi[k] * c_prev[k]);
        out.f[k] = sigmoid(out.f[k] + pf[k] * c_prev[k]);
        out.g[k] = out.g[k].tanh();
    }
    match mask {
        None => {
            for k in 0..n {
                out.c[k] = out.f[k] * c_prev[k] + out.i[k] * out.g[k];
            }
        }
        Some((location, m)) => cell_state_with_dropout(out.f, c_prev, out.i, out.g, m, location, out.c)?,
    }
    for k in 0..n {
        out.o[k] = sigmoid(out.o[k] + po[k] * out.c[k]);
        out.tanh_c[k] = out.c[k].tanh();
        out.h[k] = out.o[k] * out.tanh_c[k];
    }
    Ok(())
}

/// A single peephole LSTM step. `mask` applies a cell-location dropout mask.
pub fn lstm_cell_step(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    p: &DirectionParams,
    mask: Option<(DropoutLocation, &[f64])>,
) -> Result<StepCache> {
    let n = p.cells();
    let d = p.input_dim();
    if x.len() != d || h_prev.len() != n || c_prev.len() != n {
        return Err(Error::ShapeError(format!(
            "cell step expects x[{d}], h[{n}], c[{n}]; got x[{}], h[{}], c[{}]",
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    if let Some((location, m)) = mask {
        if !location.is_cell() {
            return Err(Error::WrongLocation(location.to_string()));
        }
        if m.len() != n {
            return Err(Error::ShapeError(format!("cell mask has {} entries for {n} cells", m.len())));
        }
    }
    let proj = |g: &super::GateParams| {
        let mut z = g.b.clone();
        matvec_add(&g.w.data, n, d, x, &mut z);
        z
    };
    let z = [proj(&p.input_gate), proj(&p.forget_gate), proj(&p.output_gate), proj(&p.candidate)];
    let mut s = StepCache {
        i: vec![0.0; n],
        f: vec![0.0; n],
        o: vec![0.0; n],
        g: vec![0.0; n],
        c: vec![0.0; n],
        tanh_c: vec![0.0; n],
        h: vec![0.0; n],
    };
    step_from_projections(
        p,
        [&z[0], &z[1], &z[2], &z[3]],
        h_prev,
        c_prev,
        mask,
        StepOut {
            i: &mut s.i,
            f: &mut s.f,
            o: &mut s.o,
            g: &mut s.g,
            c: &mut s.c,
            tanh_c: &mut s.tanh_c,
            h: &mut s.h,
        },
    )?;
    Ok(s)
}
