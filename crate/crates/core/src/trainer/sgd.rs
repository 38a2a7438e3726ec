use crate::error::{Error, Result};
use crate::network::Network;

pub const DEFAULT_MOMENTUM: f64 = 0.9;
pub const DEFAULT_MINIBATCH_SIZE: usize = 8;
pub const DEFAULT_CLIP: f64 = 50.0;

/// SGD with classical momentum.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub momentum: f64,
    pub velocity: Network,
    pub minibatch_size: usize,
    /// Element-wise gradient clip `[-c, c]`; `None` disables clipping.
    pub clip: Option<f64>,
}

impl OptimizerState {
    pub fn new(net: &Network, momentum: f64, minibatch_size: usize, clip: Option<f64>) -> Self {
        OptimizerState {
            momentum,
            velocity: net.zeros_like(),
            minibatch_size,
            clip,
        }
    }
}

/// `v ← μ v − lr · clip(g)`, `θ ← θ + v`.
pub fn sgd_update(net: &mut Network, grads: &Network, opt: &mut OptimizerState, lr: f64) -> Result<()> {
    if net.architecture() != grads.architecture() || net.architecture() != opt.velocity.architecture() {
        return Err(Error::ShapeError("gradient/velocity shapes do not match the network".into()));
    }
    if !grads.all_finite() {
        return Err(Error::NonFiniteGradient { utterance: "<minibatch>".into() });
    }
    let mu = opt.momentum;
    let clip = opt.clip;
    for (((_, p), (_, g)), (_, v)) in net
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(opt.velocity.tensors_mut())
    {
        for k in 0..p.len() {
            let gk = match clip {
                Some(c) => g[k].clamp(-c, c),
                None => g[k],
            };
            v[k] = mu * v[k] - lr * gk;
            p[k] += v[k];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_network, Architecture, ForgetBiasInit};

    fn net() -> Network {
        let arch = Architecture { input_dim: 2, layers: 1, cells: 2, alphabet_size: 1 };
        init_network(&arch, 2, ForgetBiasInit::Random).unwrap()
    }

    fn constant_grad(n: &Network, g: f64) -> Network {
        let mut z = n.zeros_like();
        z.tensors_mut().into_iter().for_each(|(_, t)| t.fill(g));
        z
    }

    #[test]
    fn plain_sgd_step() {
        let mut n = net();
        let before = n.flatten();
        let mut opt = OptimizerState::new(&n, 0.0, 1, None);
        let g = constant_grad(&n, 2.0);
        sgd_update(&mut n, &g, &mut opt, 0.1).unwrap();
        for (a, b) in n.flatten().iter().zip(&before) {
            assert!((b - a - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn momentum_two_steps() {
        let mut n = net();
        let before = n.flatten();
        let mut opt = OptimizerState::new(&n, 0.9, 1, None);
        let g = constant_grad(&n, 0.5);
        sgd_update(&mut n, &g, &mut opt, 1.0).unwrap();
        sgd_update(&mut n, &g, &mut opt, 1.0).unwrap();
        for (a, b) in n.flatten().iter().zip(&before) {
            assert!((a - b + 2.9 * 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn clipping_and_non_finite() {
        let mut n = net();
        let before = n.flatten();
        let mut opt = OptimizerState::new(&n, 0.0, 1, Some(DEFAULT_CLIP));
        let g = constant_grad(&n, 1e6);
        sgd_update(&mut n, &g, &mut opt, 1.0).unwrap();
        assert!(n.flatten().iter().zip(&before).all(|(a, b)| (b - a - 50.0).abs() < 1e-9));
        let g = constant_grad(&n, f64::NAN);
        let r = sgd_update(&mut n, &g, &mut opt, 1.0);
        assert!(matches!(r, Err(Error::NonFiniteGradient { .. })));
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut n = net();
        let before = n.clone();
        let mut opt = OptimizerState::new(&n, 0.9, 1, None);
        let g = n.zeros_like();
        sgd_update(&mut n, &g, &mut opt, 0.5).unwrap();
        assert_eq!(n, before);
    }
}
