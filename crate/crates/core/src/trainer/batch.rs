use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::rng::Rng;

/// Groups utterances of similar length: sort by (frames, index), cut into
/// chunks of `size`, then shuffle the chunk order.
pub fn bucket_minibatches(lengths: &[usize], size: usize, rng: &mut Rng) -> Vec<Vec<usize>> {
    let size = size.max(1);
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| (lengths[i], i));
    let mut batches: Vec<Vec<usize>> = order.chunks(size).map(<[usize]>::to_vec).collect();
    batches.shuffle(rng);
    batches
}

/// Zero-padded `utterances × max_frames × dim` block with true lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct Minibatch {
    pub indices: Vec<usize>,
    pub lengths: Vec<usize>,
    pub max_frames: usize,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Minibatch {
    pub fn from_features(corpus: &[FeatureMatrix], indices: &[usize]) -> Result<Self> {
        let first = indices
            .first()
            .map(|&i| &corpus[i])
            .ok_or_else(|| Error::ShapeError("empty minibatch".into()))?;
        let dim = first.dim();
        let max_frames = indices.iter().map(|&i| corpus[i].frames()).max().unwrap_or(0);
        let mut data = vec![0.0; indices.len() * max_frames * dim];
        let mut lengths = Vec::with_capacity(indices.len());
        for (b, &i) in indices.iter().enumerate() {
            let fm = &corpus[i];
            if fm.dim() != dim {
                return Err(Error::ShapeError(format!(
                    "utterance `{}` has dimension {}, minibatch has {dim}",
                    fm.utterance_id,
                    fm.dim()
                )));
            }
            let start = b * max_frames * dim;
            data[start..start + fm.data().len()].copy_from_slice(fm.data());
            lengths.push(fm.frames());
        }
        Ok(Minibatch {
            indices: indices.to_vec(),
            lengths,
            max_frames,
            dim,
            data,
        })
    }

    /// The same batch with `extra` more padding frames per utterance.
    pub fn with_extra_padding(&self, extra: usize) -> Self {
        let t = self.max_frames + extra;
        let mut data = vec![0.0; self.indices.len() * t * self.dim];
        for b in 0..self.indices.len() {
            let src = &self.data[b * self.max_frames * self.dim..][..self.max_frames * self.dim];
            data[b * t * self.dim..][..src.len()].copy_from_slice(src);
        }
        Minibatch { max_frames: t, data, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The unpadded frames of the `b`-th utterance.
    pub fn features(&self, b: usize) -> &[f64] {
        &self.data[b * self.max_frames * self.dim..][..self.lengths[b] * self.dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Provenance;
    use crate::rng::stream;

    #[test]
    fn buckets_cover_every_utterance_once() {
        let lengths = [5, 9, 1, 7, 7, 3, 2, 8, 4, 6, 10];
        let batches = bucket_minibatches(&lengths, 4, &mut stream(3, &[]));
        let mut all: Vec<usize> = batches.iter().flatten().copied().collect();
        all.sort();
        assert_eq!(all, (0..lengths.len()).collect::<Vec<_>>());
        assert!(batches.iter().all(|b| b.len() <= 4));
        // Within a bucket lengths are sorted.
        for b in &batches {
            assert!(b.windows(2).all(|w| lengths[w[0]] <= lengths[w[1]]));
        }
    }

    #[test]
    fn padding_keeps_true_frames() {
        let fm = |n: usize| FeatureMatrix::new((0..2 * n).map(|v| v as f64 + 1.0).collect(), 2, 10.0, "u", "s", Provenance::default()).unwrap();
        let corpus = [fm(3), fm(5)];
        let mb = Minibatch::from_features(&corpus, &[0, 1]).unwrap();
        assert_eq!(mb.max_frames, 5);
        assert_eq!(mb.features(0), corpus[0].data());
        let padded = mb.with_extra_padding(4);
        assert_eq!(padded.features(0), corpus[0].data());
        assert_eq!(padded.features(1), corpus[1].data());
        assert_eq!(padded.data.len(), 2 * 9 * 2);
    }
}
