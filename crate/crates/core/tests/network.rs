mod common;

use common::{max_abs_diff, random_input, small_net};
use lstm_ctc::dropout::{
    masks_for_utterance, DropoutEntry, DropoutPolicy, LayerMasks, Mask, MaskGranularity, MaskSet,
};
use lstm_ctc::network::{
    network_backward, network_forward, read_checkpoint, write_checkpoint, Architecture, Mode, Network, Upstream,
};
use lstm_ctc::rng::stream;
use lstm_ctc::Error;
use proptest::prelude::*;

fn entry(s: &str) -> DropoutEntry {
    s.parse().unwrap()
}

/// Same network seen running the other way: directions swapped and the
/// softmax rows for the two halves exchanged. One layer only.
fn mirrored(net: &Network) -> Network {
    assert_eq!(net.layers.len(), 1);
    let mut m = net.clone();
    let l = &mut m.layers[0];
    std::mem::swap(&mut l.forward_dir, &mut l.backward_dir);
    let h = l.cells;
    let cols = m.softmax_w.cols;
    for r in 0..h {
        for c in 0..cols {
            m.softmax_w.data.swap(r * cols + c, (r + h) * cols + c);
        }
    }
    m
}

fn reverse_rows(x: &[f64], dim: usize) -> Vec<f64> {
    x.chunks(dim).rev().flatten().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn posteriors_are_distributions(
        layers in 1usize..3, cells in 1usize..5, frames in 1usize..8, k in 1usize..5, seed in 0u64..500
    ) {
        let net = small_net(3, layers, cells, k, seed);
        let cache = net.forward(&random_input(frames, 3, seed), frames, None).unwrap();
        for row in cache.posteriors.chunks(k + 1) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn time_reversal_mirrors_the_directions(cells in 1usize..5, frames in 1usize..9, seed in 0u64..500) {
        let net = small_net(2, 1, cells, 3, seed);
        let x = random_input(frames, 2, seed + 1);
        let fwd = net.forward(&x, frames, None).unwrap();
        let rev = mirrored(&net).forward(&reverse_rows(&x, 2), frames, None).unwrap();
        prop_assert!(max_abs_diff(&fwd.posteriors, &reverse_rows(&rev.posteriors, 4)) < 1e-12);
    }

    #[test]
    fn sampled_masks_take_two_values_and_per_sequence_rows_repeat(
        p in 0.05f64..0.9, dim in 1usize..10, steps in 1usize..10, seed in 0u64..1000
    ) {
        let mut rng = stream(seed, &["t".into()]);
        let keep = 1.0 / (1.0 - p);
        let step = Mask::sample(dim, steps, MaskGranularity::PerStep, p, &mut rng).unwrap();
        prop_assert!(step.values().iter().all(|&v| v == 0.0 || v == keep));
        let seq = Mask::sample(dim, steps, MaskGranularity::PerSequence, p, &mut rng).unwrap();
        for t in 0..steps {
            prop_assert_eq!(seq.at(t), seq.at(0));
        }
    }

    #[test]
    fn checkpoints_round_trip_bitwise(layers in 1usize..3, cells in 1usize..4, seed in 0u64..100) {
        let net = small_net(4, layers, cells, 3, seed);
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &net).unwrap();
        let back = read_checkpoint(bytes.as_slice()).unwrap();
        prop_assert_eq!(back.fingerprint(), net.fingerprint());
        prop_assert_eq!(back, net);
    }
}

#[test]
fn zero_parameters_give_uniform_posteriors() {
    let arch = Architecture { input_dim: 3, layers: 2, cells: 4, alphabet_size: 4 };
    let net = Network::zeros(&arch).unwrap();
    let cache = net.forward(&random_input(6, 3, 0), 6, None).unwrap();
    assert!(cache.posteriors.iter().all(|&p| (p - 0.2).abs() < 1e-15));
}

#[test]
fn zero_upstream_gives_zero_gradient() {
    let net = small_net(3, 2, 3, 2, 5);
    let cache = net.forward(&random_input(5, 3, 5), 5, None).unwrap();
    let g = network_backward(&net, &cache, Upstream::Logits(&vec![0.0; 5 * 3])).unwrap();
    assert!(g.flatten().iter().all(|&v| v == 0.0));
}

#[test]
fn backward_rejects_a_cache_from_another_network() {
    let a = small_net(3, 1, 2, 2, 1);
    let b = small_net(3, 1, 2, 2, 2);
    let cache = a.forward(&random_input(4, 3, 0), 4, None).unwrap();
    let up = vec![0.1; 4 * 3];
    assert!(matches!(network_backward(&b, &cache, Upstream::Logits(&up)), Err(Error::CacheMismatch)));
}

#[test]
fn dropped_output_unit_gets_no_softmax_gradient() {
    let (frames, cells) = (6, 3);
    let net = small_net(3, 2, cells, 3, 9);
    let dropped = 4; // a backward-direction unit of the top layer
    let mut values = vec![1.25; 2 * cells];
    values[dropped] = 0.0;
    let mut masks = MaskSet::empty(2, frames);
    masks.layers[1] = LayerMasks {
        forward: Some(Mask::from_values(2 * cells, frames, MaskGranularity::PerSequence, values).unwrap()),
        cell: [None, None],
    };
    masks.active = vec![entry("forward-sequence")];
    let cache = net.forward(&random_input(frames, 3, 9), frames, Some(masks)).unwrap();
    let up: Vec<f64> = (0..frames * 4).map(|i| (i as f64 * 0.7).sin()).collect();
    let g = network_backward(&net, &cache, Upstream::Logits(&up)).unwrap();
    assert!(g.softmax_w.row(dropped).iter().all(|&v| v == 0.0));
    assert!(g.softmax_w.row(dropped - 1).iter().any(|&v| v != 0.0));
}

#[test]
fn eval_mode_ignores_the_policy_and_rng() {
    let net = small_net(3, 2, 3, 2, 3);
    let fm = common::feature_matrix(7, 3, "u", 3);
    let policy = DropoutPolicy::naive(vec![entry("nml-step"), entry("forward-step")]);
    let a = network_forward(&fm, &net, &policy, Mode::Eval, &mut stream(1, &[])).unwrap();
    let b = network_forward(&fm, &net, &policy, Mode::Eval, &mut stream(2, &[])).unwrap();
    let plain = net.forward(fm.data(), 7, None).unwrap();
    assert_eq!(a.posteriors, b.posteriors);
    assert_eq!(a.posteriors, plain.posteriors);
    let t = network_forward(&fm, &net, &policy, Mode::Train, &mut stream(1, &[])).unwrap();
    assert_ne!(t.posteriors, plain.posteriors);
}

#[test]
fn stochastic_policy_samples_only_the_chosen_entry() {
    let policy = DropoutPolicy::stochastic(vec![entry("nml-sequence"), entry("forward-sequence")], 0.5);
    for choice in 0..2 {
        let m = masks_for_utterance(&policy, 5, &[3, 3], &mut stream(0, &[]), Some(choice)).unwrap();
        assert_eq!(m.active, vec![policy.entries[choice]]);
        assert_eq!(m.layers[0].forward.is_some(), choice == 1);
        assert_eq!(m.layers[0].cell[0].is_some(), choice == 0);
    }
}
