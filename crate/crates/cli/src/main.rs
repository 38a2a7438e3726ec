use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lstm_ctc::augment::{build_plan, materialize_variant, PerturbationVariant};
use lstm_ctc::ctc::LabelSequence;
use lstm_ctc::features::{read_archive_file, stack_and_stride, write_archive_file, FeatureMatrix, FilterbankConfig};
use lstm_ctc::harness::config::ExperimentConfig;
use lstm_ctc::harness::corpus::{align_labels, format_labels, load_waveforms, read_labels, read_wav_list};
use lstm_ctc::harness::gradcheck::{gradient_check_suite, GradCheckConfig};
use lstm_ctc::harness::synth::{generate_synthetic_corpus, SyntheticTaskSpec};
use lstm_ctc::network::{load_checkpoint, Network};
use lstm_ctc::trainer::{decode_corpus, evaluate_token_accuracy, run_experiment, FileControl, NoControl, TrainControl};

/// Bidirectional LSTM + CTC training toolkit.
#[derive(Parser)]
#[command(name = "lstmctc", version)]
struct Cli {
    /// Worker threads for per-utterance parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file or preset name.
    #[arg(long)]
    config: Option<String>,
    /// Override a config key (`key=value`); repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self, out: Option<&Path>) -> Result<Option<ExperimentConfig>> {
        let Some(name) = &self.config else {
            if !self.set.is_empty() {
                bail!("--set needs --config");
            }
            return Ok(None);
        };
        let mut overrides = self.set.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(out) = out {
            overrides.push(format!("out={}", out.display()));
        }
        Ok(Some(ExperimentConfig::load(name, &overrides)?))
    }

    fn features(&self) -> Result<(FilterbankConfig, usize, usize)> {
        Ok(match self.load(None)? {
            Some(c) => (c.features, c.stack_context, c.stack_stride),
            None => (FilterbankConfig::default(), 0, 1),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute features for a WAV list and write a FARC archive.
    Extract {
        /// Lines of `utterance_id speaker_id wav_path`.
        #[arg(long)]
        list: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        warp: f64,
        #[arg(long, default_value_t = 10.0)]
        hop: f64,
        /// Also stack and stride with the config's settings.
        #[arg(long)]
        stacked: bool,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Build the config's perturbation plan and write one archive per variant.
    Augment {
        #[arg(long)]
        list: PathBuf,
        /// Output directory for `<corpus>.<variant>.farc`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "train")]
        corpus: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run a training experiment.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Start halving the learning rate from the first decision.
        #[arg(long)]
        manual_lr_trigger: bool,
        /// Poll this directory each epoch for `newbob` / `cascade` control files.
        #[arg(long)]
        control_dir: Option<PathBuf>,
    },
    /// Token accuracy of a checkpoint on an archive.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Greedy CTC decode of an archive; one `utterance_id tokens...` per line.
    Decode {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        archive: PathBuf,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Finite-difference check of the full network gradient under each dropout setting.
    Gradcheck {
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long, default_value_t = 4)]
        cells: usize,
        #[arg(long, default_value_t = 5)]
        frames: usize,
        #[arg(long, default_value_t = 3)]
        alphabet_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate the synthetic corpus (WAVs, lists, labels, identity archives).
    Synth {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Extract { list, out, warp, hop, stacked, cfg } => {
            let (fb, context, stride) = cfg.features()?;
            let waves = load_waveforms(&read_wav_list(&list)?)?;
            let mut feats = materialize_variant(&waves, &PerturbationVariant::new(warp, hop), &fb)?;
            if stacked {
                feats = feats.iter().map(|f| stack_and_stride(f, context, stride)).collect();
            }
            write_archive_file(&out, &feats)?;
            println!("wrote {} utterances to {}", feats.len(), out.display());
        }
        Command::Augment { list, out, corpus, cfg } => {
            let Some(c) = cfg.load(None)? else { bail!("augment needs --config") };
            let plan = build_plan(&c.augment)?;
            let waves = load_waveforms(&read_wav_list(&list)?)?;
            std::fs::create_dir_all(&out)?;
            for v in &plan.variants {
                let feats = materialize_variant(&waves, v, &c.features)?;
                let path = out.join(v.archive_name(&corpus));
                write_archive_file(&path, &feats)?;
                println!("{} {}", v.variant_id, path.display());
            }
        }
        Command::Train { cfg, out, manual_lr_trigger, control_dir } => {
            let mut cfg_args = cfg;
            if manual_lr_trigger {
                cfg_args.set.push("trainer.manual_trigger=true".into());
            }
            let Some(c) = cfg_args.load(out.as_deref())? else { bail!("train needs --config") };
            let control: Box<dyn TrainControl> = match control_dir {
                Some(dir) => Box::new(FileControl { dir }),
                None => Box::new(NoControl),
            };
            eprintln!("training `{}` into {} ({})", c.name, c.out_dir.display(), c.dropout.describe());
            let run = run_experiment(&c, control.as_ref())?;
            for r in &run.records {
                println!("{}", r.log_line());
            }
            println!("final checkpoint: {}", run.final_checkpoint.display());
        }
        Command::Evaluate { checkpoint, archive, labels, seed: _ } => {
            let (net, feats) = load_pair(&checkpoint, &archive)?;
            let refs = aligned_labels(&feats, &labels, net.alphabet_size)?;
            let acc = evaluate_token_accuracy(&net, &feats, &refs)?;
            println!("token_accuracy={acc}");
        }
        Command::Decode { checkpoint, archive, out, seed: _ } => {
            let (net, feats) = load_pair(&checkpoint, &archive)?;
            let hyps = decode_corpus(&net, &feats)?;
            let text = format_labels(feats.iter().zip(&hyps).map(|(f, h)| (f.utterance_id.as_str(), h.as_slice())));
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Gradcheck { layers, cells, frames, alphabet_size, seed } => {
            let cfg = GradCheckConfig { layers, cells, frames, alphabet_size, seed, ..GradCheckConfig::default() };
            let reports = gradient_check_suite(&cfg)?;
            let mut worst = 0.0f64;
            for r in &reports {
                println!("{:<18} max_rel_error={:.3e} params={}", r.label, r.max_rel_error, r.checked);
                worst = worst.max(r.max_rel_error);
            }
            println!("max_rel_error={worst:.6e}");
            if !(worst < 1e-4) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Synth { cfg, out } => {
            let (spec, seed) = match cfg.load(None)? {
                Some(c) => (c.data.synthetic.clone().unwrap_or_default(), c.seed),
                None => (SyntheticTaskSpec::default(), cfg.seed.unwrap_or(0)),
            };
            let c = generate_synthetic_corpus(&spec, seed, &out)?;
            println!("train list: {}", c.train_list.display());
            println!("cv list: {}", c.cv_list.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load_pair(checkpoint: &Path, archive: &Path) -> Result<(Network, Vec<FeatureMatrix>)> {
    let net = load_checkpoint(checkpoint).with_context(|| format!("loading {}", checkpoint.display()))?;
    let feats = read_archive_file(archive).with_context(|| format!("reading {}", archive.display()))?;
    Ok((net, feats))
}

fn aligned_labels(feats: &[FeatureMatrix], labels: &Path, alphabet: usize) -> Result<Vec<LabelSequence>> {
    let ids: Vec<&str> = feats.iter().map(|f| f.utterance_id.as_str()).collect();
    Ok(align_labels(&ids, read_labels(labels)?, alphabet)?)
}
