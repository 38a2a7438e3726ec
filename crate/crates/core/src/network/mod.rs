//! Deep bidirectional peephole LSTM with a softmax output layer.
//!
//! Per direction and time step (σ logistic, φ = tanh, ⊙ elementwise):
//!
//! ```text
//! i_t = σ(W_i x_t + R_i h_{t-1} + p_i ⊙ c_{t-1} + b_i)
//! f_t = σ(W_f x_t + R_f h_{t-1} + p_f ⊙ c_{t-1} + b_f)
//! c_t = f_t ⊙ c_{t-1} + i_t ⊙ φ(W_c x_t + R_c h_{t-1} + b_c)
//! o_t = σ(W_o x_t + R_o h_{t-1} + p_o ⊙ c_t + b_o)
//! h_t = o_t ⊙ φ(c_t)
//! ```
//!
//! The layer output at `t` is `[h_fwd_t, h_bwd_t]`. The final layer feeds a
//! softmax over `K + 1` classes, the last of which is the CTC blank.

mod backward;
mod cell;
mod checkpoint;
mod forward;

pub use backward::{network_backward, Upstream};
pub use cell::{lstm_cell_step, StepCache};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use forward::{bilstm_layer_forward, network_forward, DirCache, ForwardCache, LayerCache, Mode};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Input,
    Forget,
    Output,
    Candidate,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Output, Gate::Candidate];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    Input,
    Recurrent,
    Peephole,
    Bias,
}

/// Identifies one parameter tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamTensor {
    Lstm {
        layer: usize,
        direction: Direction,
        gate: Gate,
        part: Part,
    },
    SoftmaxWeights,
    SoftmaxBias,
}

/// Weights of one gate (or of the cell candidate, which has no peephole).
#[derive(Clone, Debug, PartialEq)]
pub struct GateParams {
    /// `cells × input_dim`
    pub w: Matrix,
    /// `cells × cells`
    pub r: Matrix,
    /// Diagonal peephole weights.
    pub p: Option<Vec<f64>>,
    pub b: Vec<f64>,
}

impl GateParams {
    fn zeros(cells: usize, input_dim: usize, peephole: bool) -> Self {
        GateParams {
            w: Matrix::zeros(cells, input_dim),
            r: Matrix::zeros(cells, cells),
            p: peephole.then(|| vec![0.0; cells]),
            b: vec![0.0; cells],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionParams {
    pub input_gate: GateParams,
    pub forget_gate: GateParams,
    pub output_gate: GateParams,
    pub candidate: GateParams,
}

impl DirectionParams {
    pub fn zeros(cells: usize, input_dim: usize) -> Self {
        DirectionParams {
            input_gate: GateParams::zeros(cells, input_dim, true),
            forget_gate: GateParams::zeros(cells, input_dim, true),
            output_gate: GateParams::zeros(cells, input_dim, true),
            candidate: GateParams::zeros(cells, input_dim, false),
        }
    }

    pub fn gate(&self, g: Gate) -> &GateParams {
        match g {
            Gate::Input => &self.input_gate,
            Gate::Forget => &self.forget_gate,
            Gate::Output => &self.output_gate,
            Gate::Candidate => &self.candidate,
        }
    }

    pub fn gate_mut(&mut self, g: Gate) -> &mut GateParams {
        match g {
            Gate::Input => &mut self.input_gate,
            Gate::Forget => &mut self.forget_gate,
            Gate::Output => &mut self.output_gate,
            Gate::Candidate => &mut self.candidate,
        }
    }

    pub fn cells(&self) -> usize {
        self.input_gate.b.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_gate.w.cols
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiLstmLayer {
    pub forward_dir: DirectionParams,
    pub backward_dir: DirectionParams,
    pub cells: usize,
}

impl BiLstmLayer {
    pub fn zeros(cells: usize, input_dim: usize) -> Self {
        BiLstmLayer {
            forward_dir: DirectionParams::zeros(cells, input_dim),
            backward_dir: DirectionParams::zeros(cells, input_dim),
            cells,
        }
    }

    pub fn dir(&self, d: Direction) -> &DirectionParams {
        match d {
            Direction::Forward => &self.forward_dir,
            Direction::Backward => &self.backward_dir,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.forward_dir.input_dim()
    }
}

/// Layer sizes of a network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub input_dim: usize,
    pub layers: usize,
    /// Cells per direction; a layer emits `2 · cells` values per frame.
    pub cells: usize,
    /// Number of real labels `K`; the softmax has `K + 1` outputs.
    pub alphabet_size: usize,
}

impl Architecture {
    /// Four bidirectional layers of 640 cells (320 per direction).
    pub fn base_recipe(input_dim: usize, alphabet_size: usize) -> Self {
        Architecture {
            input_dim,
            layers: 4,
            cells: 320,
            alphabet_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArchitecture(format!("{what} must be at least 1")));
        if self.layers == 0 {
            return bad("layer count");
        }
        if self.cells == 0 {
            return bad("cells per direction");
        }
        if self.input_dim == 0 {
            return bad("input dimension");
        }
        if self.alphabet_size == 0 {
            return bad("alphabet size");
        }
        Ok(())
    }

    /// Total parameter count, or `None` on overflow.
    pub fn num_params(&self) -> Option<usize> {
        let h = self.cells;
        let per_dir = |d: usize| -> Option<usize> {
            let w = h.checked_mul(d)?;
            let r = h.checked_mul(h)?;
            // four W, four R, three peepholes, four biases
            w.checked_mul(4)?.checked_add(r.checked_mul(4)?)?.checked_add(h.checked_mul(7)?)
        };
        let mut total = per_dir(self.input_dim)?.checked_mul(2)?;
        let upper = per_dir(h.checked_mul(2)?)?.checked_mul(2)?;
        total = total.checked_add(upper.checked_mul(self.layers - 1)?)?;
        let c = self.alphabet_size.checked_add(1)?;
        total.checked_add(h.checked_mul(2)?.checked_mul(c)?)?.checked_add(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForgetBiasInit {
    /// Same uniform draw as every other parameter.
    Random,
    /// Every forget-gate bias set to 1, starting the gates open.
    Ones,
}

pub const INIT_RANGE: f64 = 0.1;

/// Stacked bidirectional LSTM parameters plus the softmax layer.
/// Also used as the gradient container (same shapes).
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub layers: Vec<BiLstmLayer>,
    /// `(2 · cells) × (K + 1)`
    pub softmax_w: Matrix,
    pub softmax_b: Vec<f64>,
    pub alphabet_size: usize,
}

impl Network {
    pub fn zeros(arch: &Architecture) -> Result<Self> {
        arch.validate()?;
        let mut layers = Vec::with_capacity(arch.layers);
        for l in 0..arch.layers {
            let d = if l == 0 { arch.input_dim } else { 2 * arch.cells };
            layers.push(BiLstmLayer::zeros(arch.cells, d));
        }
        Ok(Network {
            layers,
            softmax_w: Matrix::zeros(2 * arch.cells, arch.alphabet_size + 1),
            softmax_b: vec![0.0; arch.alphabet_size + 1],
            alphabet_size: arch.alphabet_size,
        })
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.tensors_mut().into_iter().for_each(|(_, t)| t.fill(0.0));
        z
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            input_dim: self.input_dim(),
            layers: self.layers.len(),
            cells: self.layers[0].cells,
            alphabet_size: self.alphabet_size,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn num_classes(&self) -> usize {
        self.alphabet_size + 1
    }

    pub fn blank_index(&self) -> usize {
        self.alphabet_size
    }

    pub fn cells_per_layer(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.cells).collect()
    }

    /// Every parameter tensor in declaration order: per layer the forward
    /// then backward direction, per direction the input, forget and output
    /// gates then the candidate, per gate `W, R, p, b`; then the softmax
    /// weights and bias.
    pub fn tensors(&self) -> Vec<(ParamTensor, &[f64])> {
        let mut out = Vec::new();
        for (layer, l) in self.layers.iter().enumerate() {
            for (direction, d) in [(Direction::Forward, &l.forward_dir), (Direction::Backward, &l.backward_dir)] {
                for gate in Gate::ALL {
                    let g = d.gate(gate);
                    let id = |part| ParamTensor::Lstm { layer, direction, gate, part };
                    out.push((id(Part::Input), g.w.data.as_slice()));
                    out.push((id(Part::Recurrent), g.r.data.as_slice()));
                    if let Some(p) = &g.p {
                        out.push((id(Part::Peephole), p.as_slice()));
                    }
                    out.push((id(Part::Bias), g.b.as_slice()));
                }
            }
        }
        out.push((ParamTensor::SoftmaxWeights, self.softmax_w.data.as_slice()));
        out.push((ParamTensor::SoftmaxBias, self.softmax_b.as_slice()));
        out
    }

    /// Mutable counterpart of [`Network::tensors`], same order.
    pub fn tensors_mut(&mut self) -> Vec<(ParamTensor, &mut [f64])> {
        let mut out = Vec::new();
        for (layer, l) in self.layers.iter_mut().enumerate() {
            for (direction, d) in [
                (Direction::Forward, &mut l.forward_dir),
                (Direction::Backward, &mut l.backward_dir),
            ] {
                let DirectionParams {
                    input_gate,
                    forget_gate,
                    output_gate,
                    candidate,
                } = d;
                for (gate, g) in [
                    (Gate::Input, input_gate),
                    (Gate::Forget, forget_gate),
                    (Gate::Output, output_gate),
                    (Gate::Candidate, candidate),
                ] {
                    let id = |part| ParamTensor::Lstm { layer, direction, gate, part };
                    out.push((id(Part::Input), g.w.data.as_mut_slice()));
                    out.push((id(Part::Recurrent), g.r.data.as_mut_slice()));
                    if let Some(p) = &mut g.p {
                        out.push((id(Part::Peephole), p.as_mut_slice()));
                    }
                    out.push((id(Part::Bias), g.b.as_mut_slice()));
                }
            }
        }
        out.push((ParamTensor::SoftmaxWeights, self.softmax_w.data.as_mut_slice()));
        out.push((ParamTensor::SoftmaxBias, self.softmax_b.as_mut_slice()));
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().into_iter().flat_map(|(_, t)| t.iter().copied()).collect()
    }

    /// `self += alpha · other` (shapes must match).
    pub fn add_scaled(&mut self, alpha: f64, other: &Network) {
        for ((_, a), (_, b)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            assert_eq!(a.len(), b.len(), "add_scaled: shape mismatch");
            a.iter_mut().zip(b).for_each(|(x, y)| *x += alpha * y);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    /// FNV-1a over the architecture and every parameter bit pattern.
    pub fn fingerprint(&self) -> u64 {
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |v: u64| {
            h ^= v;
            h = h.wrapping_mul(PRIME);
        };
        let a = self.architecture();
        for v in [a.input_dim, a.layers, a.cells, a.alphabet_size] {
            mix(v as u64);
        }
        for (_, t) in self.tensors() {
            for v in t {
                mix(v.to_bits());
            }
        }
        h
    }
}

/// Uniform `[-0.1, 0.1]` initialization, optionally with forget biases at 1.
pub fn init_network(arch: &Architecture, seed: u64, forget_bias: ForgetBiasInit) -> Result<Network> {
    let mut net = Network::zeros(arch)?;
    let mut rng = rng::stream(seed, &["init".into()]);
    for (id, t) in net.tensors_mut() {
        for v in t.iter_mut() {
            *v = rng.random_range(-INIT_RANGE..=INIT_RANGE);
        }
        if forget_bias == ForgetBiasInit::Ones
            && matches!(id, ParamTensor::Lstm { gate: Gate::Forget, part: Part::Bias, .. })
        {
            t.fill(1.0);
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch() -> Architecture {
        Architecture { input_dim: 5, layers: 2, cells: 3, alphabet_size: 4 }
    }

    #[test]
    fn forget_bias_ones() {
        let net = init_network(&arch(), 11, ForgetBiasInit::Ones).unwrap();
        for (id, t) in net.tensors() {
            let is_bf = matches!(id, ParamTensor::Lstm { gate: Gate::Forget, part: Part::Bias, .. });
            if is_bf {
                assert!(t.iter().all(|&v| v == 1.0));
            } else {
                assert!(t.iter().all(|v| v.abs() <= INIT_RANGE));
            }
        }
    }

    #[test]
    fn random_init_in_range_and_deterministic() {
        let a = init_network(&arch(), 3, ForgetBiasInit::Random).unwrap();
        let b = init_network(&arch(), 3, ForgetBiasInit::Random).unwrap();
        let c = init_network(&arch(), 4, ForgetBiasInit::Random).unwrap();
        assert!(a.flatten().iter().all(|v| v.abs() <= INIT_RANGE));
        let bits = |n: &Network| n.flatten().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn zero_sizes_are_rejected() {
        for bad in [
            Architecture { layers: 0, ..arch() },
            Architecture { cells: 0, ..arch() },
        ] {
            assert!(matches!(init_network(&bad, 0, ForgetBiasInit::Random), Err(Error::InvalidArchitecture(_))));
        }
    }

    #[test]
    fn param_count_matches_tensors() {
        let net = Network::zeros(&arch()).unwrap();
        assert_eq!(arch().num_params(), Some(net.num_params()));
        assert_eq!(net.softmax_w.rows, 6);
        assert_eq!(net.layers[1].input_dim(), 6);
    }

    #[test]
    fn base_recipe_size() {
        let a = Architecture::base_recipe(120, 40);
        assert_eq!(a.layers, 4);
        assert_eq!(2 * a.cells, 640);
    }
}
