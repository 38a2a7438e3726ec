//! Full training runs: per-epoch variant selection, training, CV scoring,
//! newbob, checkpoints and the metrics log.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::epoch::{evaluate_token_accuracy, train_epoch};
use super::newbob::{newbob_decide, NewbobAction, NewbobState};
use super::sgd::OptimizerState;
use crate::augment::{build_plan, materialize_variant, variant_for_epoch, PerturbationVariant};
use crate::ctc::LabelSequence;
use crate::dropout::{cascade_active_stage, TriggerState};
use crate::error::{Error, Result};
use crate::features::{read_archive_file, stack_and_stride, write_archive_file, FeatureMatrix, Waveform};
use crate::harness::config::ExperimentConfig;
use crate::harness::corpus::{align_labels, load_waveforms, read_labels, read_wav_list, write_labels};
use crate::harness::synth::generate_synthetic_corpus;
use crate::io_util::atomic_write_str;
use crate::network::{init_network, save_checkpoint, Architecture, Network};

/// Operator inputs polled once per epoch.
pub trait TrainControl {
    /// Whether the newbob manual trigger has been pulled by `epoch` (1-based).
    fn manual_lr_trigger(&self, epoch: usize) -> bool;
    /// How many manual cascade switches have fired by `epoch` (1-based).
    fn cascade_switches(&self, epoch: usize) -> usize;
}

/// No operator input.
pub struct NoControl;

impl TrainControl for NoControl {
    fn manual_lr_trigger(&self, _: usize) -> bool {
        false
    }

    fn cascade_switches(&self, _: usize) -> usize {
        0
    }
}

/// Control files in a directory: `newbob` (present = trigger halving) and
/// `cascade` (contains the number of manual stage switches).
pub struct FileControl {
    pub dir: PathBuf,
}

impl TrainControl for FileControl {
    fn manual_lr_trigger(&self, _: usize) -> bool {
        self.dir.join("newbob").exists()
    }

    fn cascade_switches(&self, _: usize) -> usize {
        std::fs::read_to_string(self.dir.join("cascade"))
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub variant_id: String,
    pub mean_loss: f64,
    pub cv_token_acc: f64,
    /// Rate used during this epoch.
    pub lr: f64,
    pub dropout_stage: usize,
    pub action: NewbobAction,
    pub wall_seconds: Option<f64>,
}

impl EpochRecord {
    pub fn log_line(&self) -> String {
        let action = match self.action {
            NewbobAction::Keep => "keep",
            NewbobAction::Halve => "halve",
            NewbobAction::Stop => "stop",
        };
        let wall = self.wall_seconds.map_or_else(|| "NA".to_string(), |w| format!("{w:.3}"));
        format!(
            "epoch={} variant={} mean_loss={} cv_token_acc={} lr={} dropout_stage={} action={action} wall_seconds={wall}",
            self.epoch, self.variant_id, self.mean_loss, self.cv_token_acc, self.lr, self.dropout_stage
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunEnd {
    /// Newbob said stop.
    Stopped,
    /// Hit `max_epochs`.
    EpochCap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainRun {
    pub records: Vec<EpochRecord>,
    pub checkpoints: Vec<PathBuf>,
    pub final_checkpoint: PathBuf,
    pub metrics_log: PathBuf,
    pub end: RunEnd,
}

impl TrainRun {
    pub fn final_cv_accuracy(&self) -> Option<f64> {
        self.records.last().map(|r| r.cv_token_acc)
    }
}

/// A split's audio and labels, resolved from the config.
struct Split {
    name: &'static str,
    waveforms: Vec<Waveform>,
    labels: Vec<LabelSequence>,
}

fn load_split(name: &'static str, list: &Path, labels: &Path, alphabet: usize) -> Result<Split> {
    let entries = read_wav_list(list)?;
    let waveforms = load_waveforms(&entries)?;
    let ids: Vec<&str> = entries.iter().map(|e| e.utterance_id.as_str()).collect();
    let labels = align_labels(&ids, read_labels(labels)?, alphabet)?;
    if waveforms.is_empty() {
        return Err(Error::config(list.display().to_string(), "list is empty"));
    }
    Ok(Split { name, waveforms, labels })
}

/// Network-ready features of one split under one variant: from a
/// pre-materialized archive if one exists, else computed; then rounded
/// through f32 (archive precision) and stacked.
fn split_features(cfg: &ExperimentConfig, split: &Split, variant: &PerturbationVariant) -> Result<Vec<FeatureMatrix>> {
    let archived = cfg
        .data
        .feature_dir
        .as_ref()
        .map(|d| d.join(variant.archive_name(split.name)))
        .filter(|p| p.is_file());
    let mut feats = match archived {
        Some(p) => {
            let f = read_archive_file(&p)?;
            let same_order = f.len() == split.waveforms.len()
                && f.iter().zip(&split.waveforms).all(|(a, w)| a.utterance_id == w.utterance_id);
            if !same_order {
                return Err(Error::format("feature archive", format!("{} does not match the {} list", p.display(), split.name)));
            }
            f
        }
        None => materialize_variant(&split.waveforms, variant, &cfg.features)?,
    };
    for fm in feats.iter_mut() {
        fm.quantize_f32();
        *fm = stack_and_stride(fm, cfg.stack_context, cfg.stack_stride);
    }
    Ok(feats)
}

/// Trains `cfg` to completion, writing into `cfg.out_dir`:
/// `config.resolved`, `metrics.log`, `epochN.netc`, `final.netc`, and the
/// CV set the run scores against (`cv.farc`, `cv.labels`).
pub fn run_experiment(cfg: &ExperimentConfig, control: &dyn TrainControl) -> Result<TrainRun> {
    cfg.validate()?;
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out)?;
    atomic_write_str(&out.join("config.resolved"), &cfg.to_text())?;
    let metrics_log = out.join("metrics.log");
    let result = run_inner(cfg, control, &metrics_log);
    let status = match &result {
        Ok(run) => format!("completed ({:?}) after {} epochs\n", run.end, run.records.len()),
        Err(e) => format!("failed: {e}\n"),
    };
    atomic_write_str(&out.join("status"), &status)?;
    result
}

fn run_inner(cfg: &ExperimentConfig, control: &dyn TrainControl, metrics_log: &Path) -> Result<TrainRun> {
    let out = &cfg.out_dir;
    let (train, cv) = match &cfg.data.synthetic {
        Some(spec) => {
            let c = generate_synthetic_corpus(spec, cfg.seed, &out.join("data"))?;
            (
                load_split("train", &c.train_list, &c.train_labels, cfg.alphabet_size)?,
                load_split("cv", &c.cv_list, &c.cv_labels, cfg.alphabet_size)?,
            )
        }
        None => (
            load_split("train", &cfg.data.train_list, &cfg.data.train_labels, cfg.alphabet_size)?,
            load_split("cv", &cfg.data.cv_list, &cfg.data.cv_labels, cfg.alphabet_size)?,
        ),
    };

    let plan = build_plan(&cfg.augment)?;
    let cv_feats = split_features(cfg, &cv, &PerturbationVariant::identity())?;
    write_archive_file(&out.join("cv.farc"), &cv_feats)?;
    write_labels(
        &out.join("cv.labels"),
        cv_feats.iter().zip(&cv.labels).map(|(f, l)| (f.utterance_id.as_str(), l.as_slice())),
    )?;

    let arch = Architecture {
        input_dim: cfg.input_dim(),
        layers: cfg.layers,
        cells: cfg.cells,
        alphabet_size: cfg.alphabet_size,
    };
    let mut net: Network = init_network(&arch, cfg.seed, cfg.trainer.forget_bias)?;
    let t = &cfg.trainer;
    let mut opt = OptimizerState::new(&net, t.momentum, t.minibatch_size, t.clip);
    let mut newbob = NewbobState {
        halving_threshold: t.halving_threshold,
        stop_threshold: t.stop_threshold,
        min_epochs_before_halving: t.min_epochs_before_halving,
        manual_trigger: t.manual_trigger,
        ..NewbobState::new(t.lr)
    };

    let mut records = Vec::new();
    let mut checkpoints = Vec::new();
    let mut log = String::new();
    let mut end = RunEnd::EpochCap;
    for epoch in 1..=t.max_epochs {
        let started = Instant::now();
        let variant = variant_for_epoch(&plan, epoch - 1);
        let feats = split_features(cfg, &train, variant)?;
        let trigger = TriggerState { epoch: epoch - 1, manual_switches: control.cascade_switches(epoch) };
        let (stage, policy) = cascade_active_stage(&cfg.dropout, trigger);
        if control.manual_lr_trigger(epoch) || t.manual_trigger_epoch.is_some_and(|e| epoch >= e) {
            newbob.manual_trigger = true;
        }
        let lr = newbob.lr;
        let stats = train_epoch(&mut net, &feats, &train.labels, policy, &mut opt, lr, cfg.seed, epoch)?;
        let cv_acc = evaluate_token_accuracy(&net, &cv_feats, &cv.labels)?;
        let action = newbob_decide(&mut newbob, epoch, cv_acc)?;
        let record = EpochRecord {
            epoch,
            variant_id: variant.variant_id.clone(),
            mean_loss: stats.mean_loss,
            cv_token_acc: cv_acc,
            lr,
            dropout_stage: stage,
            action,
            wall_seconds: t.log_wall_time.then(|| started.elapsed().as_secs_f64()),
        };
        let ckpt = out.join(format!("epoch{epoch}.netc"));
        save_checkpoint(&ckpt, &net)?;
        checkpoints.push(ckpt);
        let _ = writeln!(log, "{}", record.log_line());
        atomic_write_str(metrics_log, &log)?;
        records.push(record);
        if action == NewbobAction::Stop {
            end = RunEnd::Stopped;
            break;
        }
    }
    let final_checkpoint = out.join("final.netc");
    save_checkpoint(&final_checkpoint, &net)?;
    Ok(TrainRun { records, checkpoints, final_checkpoint, metrics_log: metrics_log.to_path_buf(), end })
}
