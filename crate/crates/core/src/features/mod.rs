//! Front end: waveform → log-mel filterbank → deltas → per-speaker CMVN,
//! plus frame stacking/striding and the on-disk feature archive.

mod archive;
mod cmvn;
mod deltas;
mod filterbank;
mod stack;
mod wav;

pub use archive::{read_archive, read_archive_file, write_archive, write_archive_file, ARCHIVE_MAGIC, ARCHIVE_VERSION};
pub use cmvn::cmvn_per_speaker;
pub use deltas::{append_deltas, DELTA_WINDOW};
pub use filterbank::{compute_logmel, filter_center_frequencies, mel_to_hz, hz_to_mel, vtln_warp_frequency};
pub use stack::stack_and_stride;
pub use wav::{read_wav, read_wav_file, write_wav_file};

use crate::error::{Error, Result};

/// Mono audio in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub utterance_id: String,
    pub speaker_id: String,
}

impl Waveform {
    pub fn new(
        samples: Vec<f64>,
        sample_rate: u32,
        utterance_id: impl Into<String>,
        speaker_id: impl Into<String>,
    ) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidFeatureConfig("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::InvalidFeatureConfig("waveform has no samples".into()));
        }
        Ok(Waveform {
            samples,
            sample_rate,
            utterance_id: utterance_id.into(),
            speaker_id: speaker_id.into(),
        })
    }

    pub fn duration_ms(&self) -> f64 {
        self.samples.len() as f64 * 1000.0 / self.sample_rate as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterbankConfig {
    pub num_filters: usize,
    pub window_ms: f64,
    pub hop_ms: f64,
    /// VTLN warp factor α.
    pub warp_factor: f64,
    pub fft_size: usize,
    pub freq_low: f64,
    /// Upper band edge; `None` means the Nyquist frequency.
    pub freq_high: Option<f64>,
    pub log_floor: f64,
    pub preemphasis: f64,
}

impl Default for FilterbankConfig {
    fn default() -> Self {
        FilterbankConfig {
            num_filters: 40,
            window_ms: 25.0,
            hop_ms: 10.0,
            warp_factor: 1.0,
            fft_size: 512,
            freq_low: 20.0,
            freq_high: None,
            log_floor: 1e-10,
            preemphasis: 0.97,
        }
    }
}

impl FilterbankConfig {
    pub fn high_edge(&self, sample_rate: u32) -> f64 {
        self.freq_high.unwrap_or(sample_rate as f64 / 2.0)
    }

    pub fn window_samples(&self, sample_rate: u32) -> usize {
        (self.window_ms * sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        (self.hop_ms * sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidFeatureConfig(m));
        if self.num_filters == 0 {
            return bad("num_filters must be at least 1".into());
        }
        if !(0.5..=1.5).contains(&self.warp_factor) {
            return Err(Error::InvalidWarp(self.warp_factor));
        }
        let high = self.high_edge(sample_rate);
        if !(self.freq_low > 0.0 && self.freq_low < high && high <= sample_rate as f64 / 2.0) {
            return bad(format!(
                "need 0 < freq_low ({}) < freq_high ({high}) <= sample_rate/2",
                self.freq_low
            ));
        }
        if !(self.log_floor > 0.0) {
            return bad("log_floor must be positive".into());
        }
        let win = self.window_samples(sample_rate);
        if win == 0 || self.hop_samples(sample_rate) == 0 {
            return bad("window and hop must each span at least one sample".into());
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < win {
            return bad(format!(
                "fft_size {} must be a power of two no smaller than the {win} sample window",
                self.fft_size
            ));
        }
        Ok(())
    }
}

/// Which front-end settings produced a feature matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Provenance {
    pub warp_factor: f64,
    pub hop_ms: f64,
    pub stacked: bool,
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance {
            warp_factor: 1.0,
            hop_ms: 10.0,
            stacked: false,
        }
    }
}

/// T×D row-major feature matrix for one utterance.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    frames: usize,
    dim: usize,
    pub frame_period_ms: f64,
    pub utterance_id: String,
    pub speaker_id: String,
    pub provenance: Provenance,
}

impl FeatureMatrix {
    pub fn new(
        data: Vec<f64>,
        dim: usize,
        frame_period_ms: f64,
        utterance_id: impl Into<String>,
        speaker_id: impl Into<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(Error::ShapeError(format!(
                "feature buffer of {} values is not a nonempty multiple of dim {dim}",
                data.len()
            )));
        }
        Ok(FeatureMatrix {
            frames: data.len() / dim,
            data,
            dim,
            frame_period_ms,
            utterance_id: utterance_id.into(),
            speaker_id: speaker_id.into(),
            provenance,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    /// Same metadata, new contents and width.
    pub(crate) fn with_data(&self, data: Vec<f64>, dim: usize) -> FeatureMatrix {
        debug_assert!(dim > 0 && data.len() % dim == 0 && !data.is_empty());
        FeatureMatrix {
            frames: data.len() / dim,
            data,
            dim,
            frame_period_ms: self.frame_period_ms,
            utterance_id: self.utterance_id.clone(),
            speaker_id: self.speaker_id.clone(),
            provenance: self.provenance,
        }
    }

    /// Round every value through `f32`, as storing in an archive would.
    pub fn quantize_f32(&mut self) {
        for v in &mut self.data {
            *v = *v as f32 as f64;
        }
    }
}
