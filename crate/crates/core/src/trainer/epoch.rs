use rayon::prelude::*;

use super::batch::{bucket_minibatches, Minibatch};
use super::sgd::{sgd_update, OptimizerState};
use crate::ctc::{corpus_token_accuracy, ctc_loss_from_log_probs, greedy_decode, LabelSequence};
use crate::dropout::{masks_for_utterance, Combination, DropoutEntry, DropoutPolicy};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::network::{network_backward, Network, Upstream};
use crate::rng::stream;

/// What one minibatch did.
#[derive(Clone, Debug, PartialEq)]
pub struct MinibatchRecord {
    pub utterances: Vec<String>,
    /// Dropout entries whose masks were live.
    pub active: Vec<DropoutEntry>,
    pub loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    /// Mean CTC loss per utterance.
    pub mean_loss: f64,
    pub utterances: usize,
    pub frames: usize,
    pub minibatches: Vec<MinibatchRecord>,
}

/// Loss and parameter gradient of one utterance under `policy`.
///
/// Masks come from a stream keyed by `(seed, epoch, utterance)`, so the
/// result does not depend on which worker computes it.
#[allow(clippy::too_many_arguments)]
pub fn utterance_gradient(
    net: &Network,
    features: &[f64],
    frames: usize,
    labels: &[usize],
    utterance_id: &str,
    policy: &DropoutPolicy,
    choice: Option<usize>,
    seed: u64,
    epoch: usize,
) -> Result<(f64, Network)> {
    let masks = if policy.entries.is_empty() {
        None
    } else {
        let mut rng = stream(seed, &["mask".into(), (epoch as u64).into(), utterance_id.into()]);
        Some(masks_for_utterance(policy, frames, &net.cells_per_layer(), &mut rng, choice)?)
    };
    let cache = net.forward(features, frames, masks)?;
    let ctc = ctc_loss_from_log_probs(&cache.log_probs, net.num_classes(), labels).map_err(|e| match e {
        Error::InfeasibleAlignment { frames, labels, required, .. } => Error::InfeasibleAlignment {
            utterance: utterance_id.to_string(),
            frames,
            labels,
            required,
        },
        e => e,
    })?;
    let grad = network_backward(net, &cache, Upstream::Logits(&ctc.grad_logits))?;
    if !ctc.loss.is_finite() || !grad.all_finite() {
        return Err(Error::NonFiniteGradient { utterance: utterance_id.to_string() });
    }
    Ok((ctc.loss, grad))
}

/// Sums per-utterance gradients of one padded minibatch, in batch order.
pub fn minibatch_gradient(
    net: &Network,
    batch: &Minibatch,
    ids: &[&str],
    labels: &[&[usize]],
    policy: &DropoutPolicy,
    choice: Option<usize>,
    seed: u64,
    epoch: usize,
) -> Result<(Vec<f64>, Network)> {
    let parts: Vec<(f64, Network)> = (0..batch.len())
        .into_par_iter()
        .map(|b| {
            utterance_gradient(net, batch.features(b), batch.lengths[b], labels[b], ids[b], policy, choice, seed, epoch)
        })
        .collect::<Result<_>>()?;
    let mut iter = parts.into_iter();
    let (l0, mut total) = iter.next().ok_or_else(|| Error::ShapeError("empty minibatch".into()))?;
    let mut losses = vec![l0];
    for (l, g) in iter {
        losses.push(l);
        total.add_scaled(1.0, &g);
    }
    Ok((losses, total))
}

/// One pass over `corpus` with length-bucketed minibatches. Minibatch order,
/// stochastic dropout choices and masks are all derived from `(seed, epoch)`.
#[allow(clippy::too_many_arguments)]
pub fn train_epoch(
    net: &mut Network,
    corpus: &[FeatureMatrix],
    labels: &[LabelSequence],
    policy: &DropoutPolicy,
    opt: &mut OptimizerState,
    lr: f64,
    seed: u64,
    epoch: usize,
) -> Result<EpochStats> {
    if corpus.is_empty() {
        return Err(Error::ShapeError("training corpus is empty".into()));
    }
    if corpus.len() != labels.len() {
        return Err(Error::ShapeError(format!("{} utterances but {} label sequences", corpus.len(), labels.len())));
    }
    policy.validate()?;
    if matches!(policy.combination, Combination::Cascade { .. }) {
        return Err(Error::InvalidPolicy("resolve the active cascade stage before training".into()));
    }
    let lengths: Vec<usize> = corpus.iter().map(FeatureMatrix::frames).collect();
    let batches = bucket_minibatches(&lengths, opt.minibatch_size, &mut stream(seed, &["shuffle".into(), (epoch as u64).into()]));

    let mut records = Vec::with_capacity(batches.len());
    let mut loss_sum = 0.0;
    for (bi, indices) in batches.iter().enumerate() {
        let mut crng = stream(seed, &["choice".into(), (epoch as u64).into(), (bi as u64).into()]);
        let choice = policy.draw_choice(&mut crng);
        let batch = Minibatch::from_features(corpus, indices)?;
        let ids: Vec<&str> = indices.iter().map(|&i| corpus[i].utterance_id.as_str()).collect();
        let labs: Vec<&[usize]> = indices.iter().map(|&i| labels[i].as_slice()).collect();
        let (losses, grad) = minibatch_gradient(net, &batch, &ids, &labs, policy, choice, seed, epoch)?;
        sgd_update(net, &grad, opt, lr)?;
        let batch_loss: f64 = losses.iter().sum();
        loss_sum += batch_loss;
        records.push(MinibatchRecord {
            utterances: ids.iter().map(|s| s.to_string()).collect(),
            active: match choice {
                Some(c) => vec![policy.entries[c]],
                None => policy.entries.clone(),
            },
            loss: batch_loss,
        });
    }
    Ok(EpochStats {
        mean_loss: loss_sum / corpus.len() as f64,
        utterances: corpus.len(),
        frames: lengths.iter().sum(),
        minibatches: records,
    })
}

/// Greedy CTC decode of every utterance with the inference network.
pub fn decode_corpus(net: &Network, corpus: &[FeatureMatrix]) -> Result<Vec<LabelSequence>> {
    corpus
        .par_iter()
        .map(|fm| {
            if fm.dim() != net.input_dim() {
                return Err(Error::ShapeError(format!(
                    "utterance `{}` has dimension {}, network expects {}",
                    fm.utterance_id,
                    fm.dim(),
                    net.input_dim()
                )));
            }
            let cache = net.forward(fm.data(), fm.frames(), None)?;
            Ok(greedy_decode(&cache.posteriors, net.num_classes()))
        })
        .collect()
}

/// Corpus token accuracy (%) of greedy decodes against `labels`.
pub fn evaluate_token_accuracy(net: &Network, corpus: &[FeatureMatrix], labels: &[LabelSequence]) -> Result<f64> {
    if corpus.len() != labels.len() {
        return Err(Error::ShapeError(format!("{} utterances but {} label sequences", corpus.len(), labels.len())));
    }
    let hyps = decode_corpus(net, corpus)?;
    Ok(corpus_token_accuracy(hyps.iter().zip(labels).map(|(h, r)| (h.as_slice(), r.as_slice()))))
}
