//! Synthetic speech-like corpus for desk-scale end-to-end runs.
//!
//! Each token has a fixed spectral prototype: a few sinusoids at distinct
//! frequencies with distinct amplitudes. An utterance is a random token
//! string (no immediate repeats) rendered as consecutive prototype segments
//! of random duration, scaled by a per-speaker gain and frequency factor,
//! plus uniform noise. Rendering happens at the waveform level, so VTLN
//! warps and frame-rate changes act on it like on real audio.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::corpus::{write_labels, write_wav_list, ListEntry};
use crate::augment::{materialize_variant, PerturbationVariant};
use crate::ctc::LabelSequence;
use crate::error::{Error, Result};
use crate::features::{write_archive_file, write_wav_file, FilterbankConfig, Waveform};
use crate::rng::{stream, Rng};

/// Band centers (Hz), log-spaced about 1.93x apart so that a warp or
/// speaker factor within ±30% keeps a band closer to itself than to its
/// neighbors.
const BAND_CENTERS: [f64; 5] = [320.0, 616.0, 1187.0, 2285.0, 4400.0];
/// Tone offsets within a band.
const BAND_SPREAD: [f64; 3] = [0.92, 1.0, 1.08];
const TONES_PER_TOKEN: usize = BAND_SPREAD.len();
const GRID_LEN: usize = BAND_CENTERS.len() * TONES_PER_TOKEN;

/// Tone grid the prototypes draw from, band by band.
fn tone(i: usize) -> f64 {
    BAND_CENTERS[i / TONES_PER_TOKEN] * BAND_SPREAD[i % TONES_PER_TOKEN]
}

const FRAME_MS: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticTaskSpec {
    pub alphabet_size: usize,
    pub sample_rate: u32,
    /// Inclusive range of token durations, in 10 ms frames.
    pub token_frames: (usize, usize),
    /// Amplitude of the additive uniform noise.
    pub noise_level: f64,
    pub train_utterances: usize,
    pub cv_utterances: usize,
    /// Inclusive range of tokens per utterance.
    pub tokens_per_utterance: (usize, usize),
    /// Speakers per split.
    pub speakers: usize,
    /// Speaker frequency factors are drawn from `[1 - w, 1 + w]`.
    pub speaker_warp: f64,
}

impl Default for SyntheticTaskSpec {
    fn default() -> Self {
        SyntheticTaskSpec {
            alphabet_size: 5,
            sample_rate: 16000,
            token_frames: (9, 15),
            noise_level: 0.05,
            train_utterances: 200,
            cv_utterances: 50,
            tokens_per_utterance: (3, 8),
            speakers: 8,
            speaker_warp: 0.05,
        }
    }
}

impl SyntheticTaskSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidFeatureConfig(format!("synthetic task: {m}")));
        if self.alphabet_size < 2 {
            return bad("need at least two tokens (no immediate repeats are generated)");
        }
        if self.token_frames.0 == 0 || self.token_frames.0 > self.token_frames.1 {
            return bad("token durations must satisfy 1 <= min <= max");
        }
        if self.tokens_per_utterance.0 == 0 || self.tokens_per_utterance.0 > self.tokens_per_utterance.1 {
            return bad("tokens per utterance must satisfy 1 <= min <= max");
        }
        if self.speakers == 0 || self.train_utterances == 0 || self.cv_utterances == 0 {
            return bad("speaker and utterance counts must be positive");
        }
        if !(0.0..0.3).contains(&self.speaker_warp) || !(self.noise_level >= 0.0) {
            return bad("speaker_warp must lie in [0, 0.3) and noise must be non-negative");
        }
        if (self.sample_rate as f64) < 2.0 * tone(GRID_LEN - 1) * 1.5 {
            return bad("sample rate too low for the tone grid");
        }
        let max_prototypes = binomial(GRID_LEN, TONES_PER_TOKEN);
        if self.alphabet_size > max_prototypes {
            return bad("alphabet larger than the number of distinct prototypes");
        }
        Ok(())
    }

    pub(crate) fn to_settings(&self) -> Vec<(String, String)> {
        vec![
            ("synth.train_utterances".into(), self.train_utterances.to_string()),
            ("synth.cv_utterances".into(), self.cv_utterances.to_string()),
            ("synth.speakers".into(), self.speakers.to_string()),
            ("synth.noise".into(), self.noise_level.to_string()),
            ("synth.sample_rate".into(), self.sample_rate.to_string()),
            ("synth.tokens".into(), format!("{}, {}", self.tokens_per_utterance.0, self.tokens_per_utterance.1)),
            ("synth.token_frames".into(), format!("{}, {}", self.token_frames.0, self.token_frames.1)),
            ("synth.speaker_warp".into(), self.speaker_warp.to_string()),
        ]
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// A token's spectral recipe.
#[derive(Clone, Debug, PartialEq)]
pub struct Prototype {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

/// Pairwise-distinct prototypes, one per token, fixed by `seed`.
pub fn prototypes(spec: &SyntheticTaskSpec, seed: u64) -> Vec<Prototype> {
    let mut rng = stream(seed, &["synth".into(), "prototypes".into()]);
    // Each token owns a whole band while bands last, so a frame straddling
    // two tokens never looks like a third and moderate warps do not move a
    // token onto another; beyond that, distinct mixed tone sets.
    let mut bands: Vec<Vec<usize>> = (0..BAND_CENTERS.len())
        .map(|b| (b * TONES_PER_TOKEN..(b + 1) * TONES_PER_TOKEN).collect())
        .collect();
    bands.shuffle(&mut rng);
    let mut chosen: Vec<Vec<usize>> = bands.into_iter().take(spec.alphabet_size).collect();
    while chosen.len() < spec.alphabet_size {
        let mut idx: Vec<usize> = rand::seq::index::sample(&mut rng, GRID_LEN, TONES_PER_TOKEN).into_vec();
        idx.sort_unstable();
        if !chosen.contains(&idx) {
            chosen.push(idx);
        }
    }
    chosen
        .into_iter()
        .map(|idx| Prototype {
            frequencies: idx.iter().map(|&i| tone(i)).collect(),
            amplitudes: (0..TONES_PER_TOKEN).map(|_| rng.random_range(0.1..0.35)).collect(),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Speaker {
    gain: f64,
    freq_scale: f64,
}

/// Renders `tokens` with the given per-token durations (frames).
fn render(
    spec: &SyntheticTaskSpec,
    protos: &[Prototype],
    tokens: &[usize],
    durations: &[usize],
    speaker: Speaker,
    rng: &mut Rng,
) -> Vec<f64> {
    let sr = spec.sample_rate as f64;
    let per_frame = (FRAME_MS * sr / 1000.0).round() as usize;
    let total: usize = durations.iter().sum::<usize>() * per_frame;
    let mut out = Vec::with_capacity(total);
    for (&tok, &d) in tokens.iter().zip(durations) {
        let p = &protos[tok];
        let phases: Vec<f64> = (0..p.frequencies.len()).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        for n in 0..d * per_frame {
            let t = n as f64 / sr;
            let mut v = 0.0;
            for ((f, a), ph) in p.frequencies.iter().zip(&p.amplitudes).zip(&phases) {
                v += a * (std::f64::consts::TAU * f * speaker.freq_scale * t + ph).sin();
            }
            out.push(speaker.gain * v);
        }
    }
    if spec.noise_level > 0.0 {
        for v in out.iter_mut() {
            *v += rng.random_range(-spec.noise_level..=spec.noise_level);
        }
    }
    out.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
    out
}

/// One generated utterance.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticUtterance {
    pub waveform: Waveform,
    pub labels: LabelSequence,
}

/// Generates the `split` ("train" or "cv") utterances in memory.
pub fn synthesize_split(spec: &SyntheticTaskSpec, seed: u64, split: &str) -> Result<Vec<SyntheticUtterance>> {
    spec.validate()?;
    let protos = prototypes(spec, seed);
    let count = if split == "train" { spec.train_utterances } else { spec.cv_utterances };
    let mut srng = stream(seed, &["synth".into(), split.into(), "speakers".into()]);
    let speakers: Vec<Speaker> = (0..spec.speakers)
        .map(|_| Speaker {
            gain: srng.random_range(0.6..1.4),
            freq_scale: if spec.speaker_warp > 0.0 {
                srng.random_range(1.0 - spec.speaker_warp..=1.0 + spec.speaker_warp)
            } else {
                1.0
            },
        })
        .collect();
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, &["synth".into(), split.into(), (i as u64).into()]);
            let len = rng.random_range(spec.tokens_per_utterance.0..=spec.tokens_per_utterance.1);
            let mut tokens = Vec::with_capacity(len);
            while tokens.len() < len {
                let t = rng.random_range(0..spec.alphabet_size);
                if tokens.last() != Some(&t) {
                    tokens.push(t);
                }
            }
            let durations: Vec<usize> = (0..len).map(|_| rng.random_range(spec.token_frames.0..=spec.token_frames.1)).collect();
            let s = i % spec.speakers;
            let samples = render(spec, &protos, &tokens, &durations, speakers[s], &mut rng);
            let waveform = Waveform::new(
                samples,
                spec.sample_rate,
                format!("{split}-{i:05}"),
                format!("{split}-spk{s:02}"),
            )?;
            Ok(SyntheticUtterance { waveform, labels: tokens })
        })
        .collect()
}

/// Files written by [`generate_synthetic_corpus`].
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCorpus {
    pub train_list: PathBuf,
    pub train_labels: PathBuf,
    pub cv_list: PathBuf,
    pub cv_labels: PathBuf,
    pub train_archive: PathBuf,
    pub cv_archive: PathBuf,
}

/// Writes WAVs, waveform lists, label files and identity-variant feature
/// archives for both splits under `dir`.
pub fn generate_synthetic_corpus(spec: &SyntheticTaskSpec, seed: u64, dir: &Path) -> Result<SyntheticCorpus> {
    std::fs::create_dir_all(dir.join("wav"))?;
    let identity = PerturbationVariant::identity();
    let mut paths = Vec::new();
    for split in ["train", "cv"] {
        let utts = synthesize_split(spec, seed, split)?;
        let mut entries = Vec::with_capacity(utts.len());
        for u in &utts {
            let rel = PathBuf::from("wav").join(format!("{}.wav", u.waveform.utterance_id));
            write_wav_file(dir.join(&rel), &u.waveform)?;
            entries.push(ListEntry {
                utterance_id: u.waveform.utterance_id.clone(),
                speaker_id: u.waveform.speaker_id.clone(),
                path: rel,
            });
        }
        let list = dir.join(format!("{split}.list"));
        write_wav_list(&list, &entries)?;
        let labels = dir.join(format!("{split}.labels"));
        write_labels(&labels, utts.iter().map(|u| (u.waveform.utterance_id.as_str(), u.labels.as_slice())))?;
        // Archive features from the stored (f32) audio so they match what a
        // later run reads back from the WAVs.
        let stored: Vec<Waveform> = utts
            .iter()
            .map(|u| {
                let mut w = u.waveform.clone();
                w.samples.iter_mut().for_each(|v| *v = *v as f32 as f64);
                w
            })
            .collect();
        let feats = materialize_variant(&stored, &identity, &FilterbankConfig::default())?;
        let archive = dir.join(identity.archive_name(split));
        write_archive_file(&archive, &feats)?;
        paths.push((list, labels, archive));
    }
    let (cv, train) = (paths.pop().expect("cv"), paths.pop().expect("train"));
    Ok(SyntheticCorpus {
        train_list: train.0,
        train_labels: train.1,
        train_archive: train.2,
        cv_list: cv.0,
        cv_labels: cv.1,
        cv_archive: cv.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctc::collapse_path;
    use crate::features::compute_logmel;

    #[test]
    fn prototypes_are_distinct() {
        let spec = SyntheticTaskSpec { alphabet_size: 12, ..Default::default() };
        let p = prototypes(&spec, 4);
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                assert_ne!(p[i].frequencies, p[j].frequencies);
            }
        }
    }

    #[test]
    fn label_lengths_within_bounds() {
        let spec = SyntheticTaskSpec::default();
        let utts = synthesize_split(&spec, 1, "train").unwrap();
        assert_eq!(utts.len(), 200);
        assert!(utts.iter().all(|u| (3..=8).contains(&u.labels.len())));
        assert!(utts.iter().all(|u| u.labels.windows(2).all(|w| w[0] != w[1])));
    }

    #[test]
    fn noiseless_fixed_duration_is_recoverable_by_prototype_match() {
        let spec = SyntheticTaskSpec {
            noise_level: 0.0,
            token_frames: (12, 12),
            speaker_warp: 0.0,
            cv_utterances: 20,
            ..Default::default()
        };
        let cfg = FilterbankConfig::default();
        let protos = prototypes(&spec, 7);
        // Mean log-mel of each prototype rendered alone.
        let refs: Vec<Vec<f64>> = (0..spec.alphabet_size)
            .map(|k| {
                let mut rng = stream(0, &[]);
                let s = render(&spec, &protos, &[k], &[30], Speaker { gain: 1.0, freq_scale: 1.0 }, &mut rng);
                let fm = compute_logmel(&Waveform::new(s, spec.sample_rate, "p", "p").unwrap(), &cfg).unwrap();
                let mut m = vec![0.0; fm.dim()];
                fm.rows().for_each(|r| m.iter_mut().zip(r).for_each(|(a, b)| *a += b / fm.frames() as f64));
                m
            })
            .collect();
        for u in synthesize_split(&spec, 7, "cv").unwrap() {
            let fm = compute_logmel(&u.waveform, &cfg).unwrap();
            let path: Vec<usize> = fm
                .rows()
                .map(|r| {
                    // Gain only shifts log energies, so compare mean-removed spectra.
                    let centered = |v: &[f64]| {
                        let mu = v.iter().sum::<f64>() / v.len() as f64;
                        v.iter().map(|x| x - mu).collect::<Vec<f64>>()
                    };
                    let rc = centered(r);
                    let dist = |m: &Vec<f64>| rc.iter().zip(centered(m)).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
                    (0..refs.len()).min_by(|&a, &b| dist(&refs[a]).total_cmp(&dist(&refs[b]))).unwrap()
                })
                .collect();
            // Ignore boundary frames that straddle two tokens by collapsing.
            assert_eq!(collapse_path(&path, usize::MAX), u.labels, "{}", u.waveform.utterance_id);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let spec = SyntheticTaskSpec { train_utterances: 6, cv_utterances: 3, ..Default::default() };
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ca = generate_synthetic_corpus(&spec, 9, a.path()).unwrap();
        let cb = generate_synthetic_corpus(&spec, 9, b.path()).unwrap();
        for (x, y) in [(&ca.train_archive, &cb.train_archive), (&ca.cv_labels, &cb.cv_labels)] {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }
}
