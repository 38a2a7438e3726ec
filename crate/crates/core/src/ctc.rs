//! CTC loss via log-space forward-backward, path collapsing, greedy decoding
//! and token-accuracy scoring.
//!
//! Matrices are row-major `T × (K+1)` with the blank label at index `K`.

use crate::error::{Error, Result};
use crate::linalg::log_add;

/// Label tokens in `[0, K)`; never the blank.
pub type LabelSequence = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct CtcResult {
    /// `-ln p(labels | input)` in nats.
    pub loss: f64,
    /// Gradient of `loss` with respect to the pre-softmax logits, `T × (K+1)`.
    pub grad_logits: Vec<f64>,
}

/// `blank, l1, blank, l2, …, blank` (length `2L + 1`).
pub fn augment_labels(labels: &[usize], blank: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(2 * labels.len() + 1);
    out.push(blank);
    for &l in labels {
        out.push(l);
        out.push(blank);
    }
    out
}

/// Frames needed to emit `labels`: one per label plus a blank between
/// each adjacent repeated pair.
pub fn min_frames(labels: &[usize]) -> usize {
    labels.len() + labels.windows(2).filter(|w| w[0] == w[1]).count()
}

fn check_labels(labels: &[usize], classes: usize) -> Result<()> {
    if classes < 2 {
        return Err(Error::ShapeError("need at least one label plus the blank".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes - 1) {
        return Err(Error::ShapeError(format!(
            "label {bad} outside [0, {}) (index {} is the blank)",
            classes - 1,
            classes - 1
        )));
    }
    Ok(())
}

/// CTC loss from posterior probabilities (rows must be distributions).
pub fn ctc_loss(posteriors: &[f64], classes: usize, labels: &[usize]) -> Result<CtcResult> {
    let log_probs: Vec<f64> = posteriors.iter().map(|p| p.ln()).collect();
    ctc_loss_from_log_probs(&log_probs, classes, labels)
}

/// CTC loss from log-posteriors (log-softmax outputs).
pub fn ctc_loss_from_log_probs(log_probs: &[f64], classes: usize, labels: &[usize]) -> Result<CtcResult> {
    check_labels(labels, classes)?;
    if log_probs.is_empty() || log_probs.len() % classes != 0 {
        return Err(Error::ShapeError(format!(
            "{} log-probabilities are not a nonempty multiple of {classes} classes",
            log_probs.len()
        )));
    }
    let frames = log_probs.len() / classes;
    let required = min_frames(labels);
    if frames < required {
        return Err(Error::InfeasibleAlignment {
            utterance: String::new(),
            frames,
            labels: labels.len(),
            required,
        });
    }
    let blank = classes - 1;
    let ext = augment_labels(labels, blank);
    let s_len = ext.len();
    let lp = |t: usize, k: usize| log_probs[t * classes + k];
    // A label may be reached by skipping the preceding blank unless it
    // repeats the label two positions back.
    let can_skip = |s: usize| s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];

    let ninf = f64::NEG_INFINITY;
    let mut alpha = vec![ninf; frames * s_len];
    alpha[0] = lp(0, ext[0]);
    if s_len > 1 {
        alpha[1] = lp(0, ext[1]);
    }
    for t in 1..frames {
        let (prev, cur) = alpha.split_at_mut(t * s_len);
        let prev = &prev[(t - 1) * s_len..];
        let cur = &mut cur[..s_len];
        // Only states from which the end is still reachable matter, but the
        // full sweep keeps the recursion simple.
        for s in 0..s_len {
            let mut a = prev[s];
            if s >= 1 {
                a = log_add(a, prev[s - 1]);
            }
            if can_skip(s) {
                a = log_add(a, prev[s - 2]);
            }
            cur[s] = if a == ninf { ninf } else { a + lp(t, ext[s]) };
        }
    }
    let last = &alpha[(frames - 1) * s_len..];
    let log_p = if s_len > 1 {
        log_add(last[s_len - 1], last[s_len - 2])
    } else {
        last[0]
    };

    // beta[t][s]: log probability of the remaining frames after t, given
    // state s at t (emission at t excluded).
    let mut beta = vec![ninf; frames * s_len];
    beta[(frames - 1) * s_len + s_len - 1] = 0.0;
    if s_len > 1 {
        beta[(frames - 1) * s_len + s_len - 2] = 0.0;
    }
    for t in (0..frames - 1).rev() {
        for s in 0..s_len {
            let next = |s2: usize| beta[(t + 1) * s_len + s2] + lp(t + 1, ext[s2]);
            let mut b = next(s);
            if s + 1 < s_len {
                b = log_add(b, next(s + 1));
            }
            if s + 2 < s_len && can_skip(s + 2) {
                b = log_add(b, next(s + 2));
            }
            beta[t * s_len + s] = b;
        }
    }

    let mut grad = Vec::with_capacity(frames * classes);
    let mut occupancy = vec![ninf; classes];
    for t in 0..frames {
        occupancy.iter_mut().for_each(|o| *o = ninf);
        for s in 0..s_len {
            let g = alpha[t * s_len + s] + beta[t * s_len + s];
            occupancy[ext[s]] = log_add(occupancy[ext[s]], g);
        }
        for k in 0..classes {
            let post = lp(t, k).exp();
            let occ = if occupancy[k] == ninf { 0.0 } else { (occupancy[k] - log_p).exp() };
            grad.push(post - occ);
        }
    }
    Ok(CtcResult {
        loss: -log_p,
        grad_logits: grad,
    })
}

/// Merges adjacent repeats, then drops blanks.
pub fn collapse_path(path: &[usize], blank: usize) -> LabelSequence {
    let mut out = Vec::new();
    let mut prev = None;
    for &p in path {
        if Some(p) != prev && p != blank {
            out.push(p);
        }
        prev = Some(p);
    }
    out
}

/// Per-frame argmax (lowest index wins ties), then [`collapse_path`].
pub fn greedy_decode(posteriors: &[f64], classes: usize) -> LabelSequence {
    let path: Vec<usize> = posteriors
        .chunks_exact(classes)
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect();
    collapse_path(&path, classes - 1)
}

/// Unit-cost Levenshtein distance over tokens.
pub fn edit_distance(hyp: &[usize], reference: &[usize]) -> usize {
    strsim::generic_levenshtein(&hyp.to_vec(), &reference.to_vec())
}

/// `100 · (1 − edits / max(|ref|, 1))`; negative when edits exceed `|ref|`.
pub fn token_accuracy(hyp: &[usize], reference: &[usize]) -> f64 {
    100.0 * (1.0 - edit_distance(hyp, reference) as f64 / reference.len().max(1) as f64)
}

/// Token accuracy pooled over a set: total edits over total reference length.
pub fn corpus_token_accuracy<'a, I>(pairs: I) -> f64
where
    I: IntoIterator<Item = (&'a [usize], &'a [usize])>,
{
    let (edits, len) = pairs
        .into_iter()
        .fold((0usize, 0usize), |(e, n), (h, r)| (e + edit_distance(h, r), n + r.len()));
    100.0 * (1.0 - edits as f64 / len.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_frame_single_label() {
        let post = [0.7, 0.2, 0.1];
        let r = ctc_loss(&post, 3, &[0]).unwrap();
        assert!((r.loss + 0.7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_frames_uniform_is_ln3() {
        let post = [1.0 / 3.0; 6];
        let r = ctc_loss(&post, 3, &[0]).unwrap();
        assert!((r.loss - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn empty_labels_is_all_blank_path() {
        let post = [0.2, 0.8, 0.5, 0.5];
        let r = ctc_loss(&post, 2, &[]).unwrap();
        assert!((r.loss + (0.8f64 * 0.5).ln()).abs() < 1e-14);
    }

    #[test]
    fn infeasible_is_an_error() {
        let post = [0.5; 6];
        assert!(ctc_loss(&post, 2, &[0, 0]).is_ok());
        assert!(matches!(
            ctc_loss(&post[..4], 2, &[0, 0]),
            Err(Error::InfeasibleAlignment { required: 3, .. })
        ));
        assert!(matches!(ctc_loss(&post, 2, &[1]), Err(Error::ShapeError(_))));
    }

    #[test]
    fn gradient_rows_sum_to_zero() {
        let post = [0.1, 0.3, 0.6, 0.5, 0.25, 0.25, 0.2, 0.2, 0.6];
        let r = ctc_loss(&post, 3, &[1, 0]).unwrap();
        for row in r.grad_logits.chunks(3) {
            assert!(row.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn collapse_cases() {
        let b = 9;
        assert_eq!(collapse_path(&[1, 1, b, 2], b), vec![1, 2]);
        assert_eq!(collapse_path(&[b, b, b], b), Vec::<usize>::new());
        assert_eq!(collapse_path(&[1, b, 1], b), vec![1, 1]);
    }

    #[test]
    fn greedy_cases() {
        // one-hot rows spelling a a φ b with K = 2 (blank = 2)
        let post = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        assert_eq!(greedy_decode(&post, 3), vec![0, 1]);
        assert!(greedy_decode(&[0.1, 0.2, 0.7, 0.0, 0.0, 1.0], 3).is_empty());
        // ties go to the lowest index
        assert_eq!(greedy_decode(&[0.4, 0.4, 0.2], 3), vec![0]);
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(token_accuracy(&[1, 2, 3, 4, 0], &[1, 2, 3, 4, 0]), 100.0);
        assert_eq!(token_accuracy(&[], &[1, 2, 3, 4]), 0.0);
        assert_eq!(token_accuracy(&[0, 1, 2], &[0, 2]), 50.0);
        assert_eq!(token_accuracy(&[1, 1, 1], &[2]), -200.0);
        assert_eq!(token_accuracy(&[], &[]), 100.0);
    }
}
