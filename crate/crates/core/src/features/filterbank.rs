use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{FeatureMatrix, FilterbankConfig, Provenance, Waveform};
use crate::error::{Error, Result};

pub fn hz_to_mel(f: f64) -> f64 {
    1127.0 * (1.0 + f / 700.0).ln()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * ((m / 1127.0).exp() - 1.0)
}

/// Below this offset above `freq_low` the warp blends back to identity.
const LOWER_KNEE_OFFSET_HZ: f64 = 100.0;
/// Offset below `freq_high` where the upper blending segment begins.
const UPPER_KNEE_OFFSET_HZ: f64 = 500.0;

/// Piecewise-linear VTLN frequency warp.
///
/// The interior segment is `f ↦ α·f`. Two linear segments join it to the
/// fixed points `freq_low` and `freq_high`; frequencies outside the band are
/// left alone, so 0 always maps to 0. The knees sit at
/// `(freq_low + 100)·max(1, 1/α)` and `(freq_high − 500)·min(1, 1/α)`, which
/// keeps every segment's slope positive for α ∈ [0.5, 1.5].
pub fn vtln_warp_frequency(f: f64, alpha: f64, freq_low: f64, freq_high: f64) -> Result<f64> {
    if !(0.5..=1.5).contains(&alpha) {
        return Err(Error::InvalidWarp(alpha));
    }
    if f <= freq_low || f >= freq_high {
        return Ok(f);
    }
    let knee_low = (freq_low + LOWER_KNEE_OFFSET_HZ) * (1.0f64).max(1.0 / alpha);
    let knee_high = (freq_high - UPPER_KNEE_OFFSET_HZ) * (1.0f64).min(1.0 / alpha);
    if !(knee_low < knee_high) {
        return Err(Error::InvalidWarp(alpha));
    }
    Ok(if f < knee_low {
        let slope = (alpha * knee_low - freq_low) / (knee_low - freq_low);
        freq_low + slope * (f - freq_low)
    } else if f <= knee_high {
        alpha * f
    } else {
        let slope = (freq_high - alpha * knee_high) / (freq_high - knee_high);
        freq_high + slope * (f - freq_high)
    })
}

/// Filter corners in Hz (`num_filters + 2` points), after warping.
fn filter_corners(cfg: &FilterbankConfig, sample_rate: u32) -> Result<Vec<f64>> {
    let high = cfg.high_edge(sample_rate);
    let mel_lo = hz_to_mel(cfg.freq_low);
    let mel_hi = hz_to_mel(high);
    let step = (mel_hi - mel_lo) / (cfg.num_filters + 1) as f64;
    (0..cfg.num_filters + 2)
        .map(|j| {
            let f = mel_to_hz(mel_lo + step * j as f64);
            vtln_warp_frequency(f, cfg.warp_factor, cfg.freq_low, high)
        })
        .collect()
}

/// Center frequency of each (warped) triangular filter.
pub fn filter_center_frequencies(cfg: &FilterbankConfig, sample_rate: u32) -> Result<Vec<f64>> {
    cfg.validate(sample_rate)?;
    let corners = filter_corners(cfg, sample_rate)?;
    Ok(corners[1..corners.len() - 1].to_vec())
}

struct Triangle {
    first_bin: usize,
    weights: Vec<f64>,
}

fn build_filters(cfg: &FilterbankConfig, sample_rate: u32) -> Result<Vec<Triangle>> {
    let corners: Vec<f64> = filter_corners(cfg, sample_rate)?
        .into_iter()
        .map(hz_to_mel)
        .collect();
    let bins = cfg.fft_size / 2 + 1;
    let bin_hz = sample_rate as f64 / cfg.fft_size as f64;
    let mut filters = Vec::with_capacity(cfg.num_filters);
    for j in 0..cfg.num_filters {
        let (left, center, right) = (corners[j], corners[j + 1], corners[j + 2]);
        let mut first_bin = usize::MAX;
        let mut weights = Vec::new();
        for k in 0..bins {
            let m = hz_to_mel(k as f64 * bin_hz);
            let w = if m > left && m <= center {
                (m - left) / (center - left)
            } else if m > center && m < right {
                (right - m) / (right - center)
            } else {
                0.0
            };
            if w > 0.0 {
                if first_bin == usize::MAX {
                    first_bin = k;
                }
                // Triangles are convex, so nonzero weights are contiguous.
                weights.resize(k - first_bin, 0.0);
                weights.push(w);
            }
        }
        filters.push(Triangle {
            first_bin: first_bin.min(bins),
            weights,
        });
    }
    Ok(filters)
}

/// Log mel filterbank energies.
///
/// Frames are `window_ms` long every `hop_ms`, giving
/// `T = 1 + floor((len − window) / hop)` frames. Each frame is
/// pre-emphasized, Hamming-windowed and zero-padded to `fft_size`; each
/// output cell is `ln(max(energy, log_floor))`.
pub fn compute_logmel(w: &Waveform, cfg: &FilterbankConfig) -> Result<FeatureMatrix> {
    cfg.validate(w.sample_rate)?;
    let win = cfg.window_samples(w.sample_rate);
    let hop = cfg.hop_samples(w.sample_rate);
    if w.samples.len() < win {
        return Err(Error::InputTooShort {
            samples: w.samples.len(),
            window: win,
        });
    }
    let frames = 1 + (w.samples.len() - win) / hop;
    let filters = build_filters(cfg, w.sample_rate)?;
    let window: Vec<f64> = (0..win)
        .map(|n| {
            if win == 1 {
                1.0
            } else {
                0.54 - 0.46 * (2.0 * PI * n as f64 / (win - 1) as f64).cos()
            }
        })
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.fft_size);
    let mut buf = vec![Complex::new(0.0, 0.0); cfg.fft_size];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut power = vec![0.0; cfg.fft_size / 2 + 1];
    let mut out = Vec::with_capacity(frames * cfg.num_filters);

    for t in 0..frames {
        let frame = &w.samples[t * hop..t * hop + win];
        for (n, slot) in buf.iter_mut().enumerate() {
            *slot = if n < win {
                let prev = if n == 0 { frame[0] } else { frame[n - 1] };
                Complex::new((frame[n] - cfg.preemphasis * prev) * window[n], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p = c.norm_sqr();
        }
        for f in &filters {
            let energy: f64 = f
                .weights
                .iter()
                .zip(&power[f.first_bin..])
                .map(|(a, b)| a * b)
                .sum();
            out.push(energy.max(cfg.log_floor).ln());
        }
    }

    FeatureMatrix::new(
        out,
        cfg.num_filters,
        cfg.hop_ms,
        w.utterance_id.clone(),
        w.speaker_id.clone(),
        Provenance {
            warp_factor: cfg.warp_factor,
            hop_ms: cfg.hop_ms,
            stacked: false,
        },
    )
}
