#![allow(dead_code)]

use lstm_ctc::ctc::collapse_path;
use lstm_ctc::features::{FeatureMatrix, Provenance};
use lstm_ctc::network::{init_network, Architecture, ForgetBiasInit, Network};
use lstm_ctc::rng::stream;
use rand::Rng as _;

/// `ln p(labels | posteriors)` by enumerating every frame-level path.
pub fn brute_force_log_prob(posteriors: &[f64], classes: usize, labels: &[usize]) -> f64 {
    let frames = posteriors.len() / classes;
    let blank = classes - 1;
    let mut path = vec![0usize; frames];
    let mut total = 0.0;
    loop {
        if collapse_path(&path, blank) == labels {
            total += path.iter().enumerate().map(|(t, &k)| posteriors[t * classes + k]).product::<f64>();
        }
        // odometer increment
        let mut t = 0;
        loop {
            if t == frames {
                return total.ln();
            }
            path[t] += 1;
            if path[t] < classes {
                break;
            }
            path[t] = 0;
            t += 1;
        }
    }
}

/// Rows drawn uniformly and normalized.
pub fn random_posteriors(frames: usize, classes: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, &["test".into(), "posteriors".into()]);
    let mut out = Vec::with_capacity(frames * classes);
    for _ in 0..frames {
        let row: Vec<f64> = (0..classes).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = row.iter().sum();
        out.extend(row.iter().map(|v| v / s));
    }
    out
}

pub fn small_net(input_dim: usize, layers: usize, cells: usize, alphabet: usize, seed: u64) -> Network {
    let arch = Architecture { input_dim, layers, cells, alphabet_size: alphabet };
    init_network(&arch, seed, ForgetBiasInit::Random).unwrap()
}

pub fn random_input(frames: usize, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, &["test".into(), "input".into()]);
    (0..frames * dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn feature_matrix(frames: usize, dim: usize, id: &str, seed: u64) -> FeatureMatrix {
    FeatureMatrix::new(random_input(frames, dim, seed), dim, 10.0, id, "spk", Provenance::default()).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
