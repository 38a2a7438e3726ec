//! Experiment configuration, presets, data files, the synthetic corpus and
//! the gradient checker.

pub mod config;
pub mod corpus;
pub mod gradcheck;
pub mod presets;
pub mod synth;

pub use config::{ExperimentConfig, RawConfig, TrainerConfig};
pub use presets::{embedded_preset, preset_names, PRESETS};
