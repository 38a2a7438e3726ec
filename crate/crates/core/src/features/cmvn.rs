use std::collections::BTreeMap;

use super::FeatureMatrix;

/// Relative variance below which a dimension is treated as constant.
const VARIANCE_GUARD: f64 = 1e-18;

/// Per-speaker mean and variance normalization.
///
/// Statistics are pooled over every frame of every utterance that shares a
/// `speaker_id`. Dimensions whose pooled variance is (numerically) zero are
/// only mean-subtracted. Output order matches input order.
pub fn cmvn_per_speaker(features: &[FeatureMatrix]) -> Vec<FeatureMatrix> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, fm) in features.iter().enumerate() {
        groups.entry(fm.speaker_id.as_str()).or_default().push(i);
    }
    let mut out: Vec<Option<FeatureMatrix>> = vec![None; features.len()];
    for members in groups.values() {
        let dim = features[members[0]].dim();
        let count: usize = members.iter().map(|&i| features[i].frames()).sum();
        let n = count as f64;

        let mut mean = vec![0.0; dim];
        for &i in members {
            for row in features[i].rows() {
                mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);

        let mut var = vec![0.0; dim];
        for &i in members {
            for row in features[i].rows() {
                for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
        }
        let scale: Vec<f64> = var
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let v = s / n;
                if v <= VARIANCE_GUARD * (1.0 + m * m) {
                    1.0
                } else {
                    1.0 / v.sqrt()
                }
            })
            .collect();

        for &i in members {
            let fm = &features[i];
            assert_eq!(fm.dim(), dim, "speaker `{}` mixes feature widths", fm.speaker_id);
            let data = fm
                .rows()
                .flat_map(|row| {
                    row.iter()
                        .zip(&mean)
                        .zip(&scale)
                        .map(|((v, m), s)| (v - m) * s)
                })
                .collect();
            out[i] = Some(fm.with_data(data, dim));
        }
    }
    out.into_iter().map(|o| o.expect("every utterance belongs to a group")).collect()
}
