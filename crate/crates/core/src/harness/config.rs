//! Flat `key = value` experiment configs.
//!
//! ```text
//! # comment
//! include = base            # another config, processed in place
//! arch.layers = 2
//! dropout.entries = nml-sequence, forward-sequence
//! ```
//!
//! Later assignments override earlier ones, so a file that includes a base
//! and then sets keys refines it. `include` names resolve against the
//! including file's directory first, then against the embedded presets.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::presets::embedded_preset;
use super::synth::SyntheticTaskSpec;
use crate::augment::AugmentMode;
use crate::dropout::{CascadeTrigger, Combination, DropoutEntry, DropoutPolicy};
use crate::error::{Error, Result};
use crate::features::FilterbankConfig;
use crate::network::ForgetBiasInit;
use crate::trainer::{DEFAULT_CLIP, DEFAULT_HALVING_THRESHOLD, DEFAULT_LR, DEFAULT_MINIBATCH_SIZE, DEFAULT_MOMENTUM, DEFAULT_STOP_THRESHOLD};

const MAX_INCLUDE_DEPTH: usize = 16;

/// One `key = value` assignment with where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub value: String,
    pub location: String,
}

/// Key/value pairs after includes and overrides, before typing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    pub settings: BTreeMap<String, Setting>,
}

impl RawConfig {
    /// Parses config text. `origin` names the source in error messages;
    /// `dir` is where relative includes are looked up.
    pub fn parse(text: &str, origin: &str, dir: Option<&Path>) -> Result<Self> {
        let mut raw = RawConfig::default();
        raw.parse_into(text, origin, dir, 0)?;
        Ok(raw)
    }

    fn parse_into(&mut self, text: &str, origin: &str, dir: Option<&Path>, depth: usize) -> Result<()> {
        if depth > MAX_INCLUDE_DEPTH {
            return Err(Error::config(origin, "includes nested too deeply (cycle?)"));
        }
        for (n, line) in text.lines().enumerate() {
            let location = format!("{origin}:{}", n + 1);
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(&location, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.chars().any(char::is_whitespace) {
                return Err(Error::config(&location, format!("bad key `{key}`")));
            }
            if key == "include" {
                let (text, origin, sub_dir) = resolve_source(value, dir).map_err(|e| match e {
                    Error::Config { msg, .. } => Error::config(&location, msg),
                    e => e,
                })?;
                self.parse_into(&text, &origin, sub_dir.as_deref(), depth + 1)?;
            } else {
                self.settings.insert(key.to_string(), Setting { value: value.to_string(), location });
            }
        }
        Ok(())
    }

    /// Applies a `key=value` override (as given to `--set`).
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config("--set", format!("expected key=value, got `{assignment}`")))?;
        self.settings.insert(
            k.trim().to_string(),
            Setting { value: v.trim().to_string(), location: "--set".into() },
        );
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Setting> {
        self.settings.get(key)
    }
}

/// Finds config text for `name`: a file on disk (relative to `dir`, then
/// the working directory), else an embedded preset (`presets/` prefix
/// optional).
pub fn resolve_source(name: &str, dir: Option<&Path>) -> Result<(String, String, Option<PathBuf>)> {
    let candidates: Vec<PathBuf> = dir
        .map(|d| d.join(name))
        .into_iter()
        .chain(std::iter::once(PathBuf::from(name)))
        .collect();
    for p in candidates {
        if p.is_file() {
            let text = std::fs::read_to_string(&p)?;
            let parent = p.parent().map(Path::to_path_buf);
            return Ok((text, p.display().to_string(), parent));
        }
    }
    let bare = name.strip_prefix("presets/").unwrap_or(name);
    let bare = bare.strip_suffix(".cfg").unwrap_or(bare);
    embedded_preset(bare)
        .map(|t| (t.to_string(), format!("preset:{bare}"), None))
        .ok_or_else(|| Error::config(name, "no such config file or preset"))
}

/// Where an experiment's data lives.
#[derive(Clone, Debug, PartialEq)]
pub struct DataConfig {
    /// Either generate a synthetic corpus into `<out>/data` ...
    pub synthetic: Option<SyntheticTaskSpec>,
    /// ... or read these lists (`utt_id speaker_id wav_path` per line) and
    /// label files.
    pub train_list: PathBuf,
    pub train_labels: PathBuf,
    pub cv_list: PathBuf,
    pub cv_labels: PathBuf,
    /// Optional directory of pre-materialized `<corpus>.<variant>.farc`.
    pub feature_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainerConfig {
    pub lr: f64,
    pub momentum: f64,
    pub minibatch_size: usize,
    pub clip: Option<f64>,
    pub halving_threshold: f64,
    pub stop_threshold: f64,
    pub min_epochs_before_halving: usize,
    pub max_epochs: usize,
    /// Start halving from the first decision.
    pub manual_trigger: bool,
    /// Start halving from this (1-based) epoch's decision.
    pub manual_trigger_epoch: Option<usize>,
    pub forget_bias: ForgetBiasInit,
    /// Record real wall time in the metrics log (breaks byte-identical logs).
    pub log_wall_time: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            lr: DEFAULT_LR,
            momentum: DEFAULT_MOMENTUM,
            minibatch_size: DEFAULT_MINIBATCH_SIZE,
            clip: Some(DEFAULT_CLIP),
            halving_threshold: DEFAULT_HALVING_THRESHOLD,
            stop_threshold: DEFAULT_STOP_THRESHOLD,
            min_epochs_before_halving: 0,
            max_epochs: 100,
            manual_trigger: false,
            manual_trigger_epoch: None,
            forget_bias: ForgetBiasInit::Random,
            log_wall_time: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub layers: usize,
    pub cells: usize,
    pub alphabet_size: usize,
    pub features: FilterbankConfig,
    pub augment: AugmentMode,
    pub stack_context: usize,
    pub stack_stride: usize,
    pub dropout: DropoutPolicy,
    pub trainer: TrainerConfig,
    pub data: DataConfig,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Feature width the network sees: filterbank + Δ + ΔΔ, stacked.
    pub fn input_dim(&self) -> usize {
        self.features.num_filters * 3 * (2 * self.stack_context + 1)
    }

    /// Loads a config file or preset and applies `--set` style overrides.
    pub fn load(name: &str, overrides: &[String]) -> Result<Self> {
        let (text, origin, dir) = resolve_source(name, None)?;
        let mut raw = RawConfig::parse(&text, &origin, dir.as_deref())?;
        for o in overrides {
            raw.set(o)?;
        }
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mut r = Reader { raw, used: Vec::new() };
        let mut cfg = ExperimentConfig {
            name: r.string("name")?.unwrap_or_else(|| "experiment".into()),
            seed: r.parse("seed")?.unwrap_or(0),
            layers: r.parse("arch.layers")?.unwrap_or(4),
            cells: r.parse("arch.cells")?.unwrap_or(320),
            alphabet_size: r.required("arch.alphabet_size")?,
            features: FilterbankConfig::default(),
            augment: AugmentMode::None,
            stack_context: r.parse("stack.context")?.unwrap_or(0),
            stack_stride: r.parse("stack.stride")?.unwrap_or(1),
            dropout: DropoutPolicy::none(),
            trainer: TrainerConfig::default(),
            data: DataConfig {
                synthetic: None,
                train_list: PathBuf::new(),
                train_labels: PathBuf::new(),
                cv_list: PathBuf::new(),
                cv_labels: PathBuf::new(),
                feature_dir: None,
            },
            out_dir: r.string("out")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs/experiment")),
        };

        let f = &mut cfg.features;
        if let Some(v) = r.parse("features.num_filters")? { f.num_filters = v; }
        if let Some(v) = r.parse("features.window_ms")? { f.window_ms = v; }
        if let Some(v) = r.parse("features.fft_size")? { f.fft_size = v; }
        if let Some(v) = r.parse("features.freq_low")? { f.freq_low = v; }
        if let Some(v) = r.string("features.freq_high")? {
            f.freq_high = if v == "nyquist" { None } else { Some(parse_value("features.freq_high", &v, r.loc("features.freq_high"))?) };
        }
        if let Some(v) = r.parse("features.log_floor")? { f.log_floor = v; }
        if let Some(v) = r.parse("features.preemphasis")? { f.preemphasis = v; }

        cfg.augment = match r.string("augment.mode")?.as_deref() {
            None => AugmentMode::None,
            Some("custom") => AugmentMode::Custom {
                warps: r.list("augment.warps")?.ok_or_else(|| r.missing("augment.warps"))?,
                hops: r.list("augment.hops")?.ok_or_else(|| r.missing("augment.hops"))?,
            },
            Some(m) => m.parse().map_err(|e: Error| Error::config(r.loc("augment.mode"), e.to_string()))?,
        };

        cfg.dropout = parse_dropout(&mut r)?;

        let t = &mut cfg.trainer;
        if let Some(v) = r.parse("trainer.lr")? { t.lr = v; }
        if let Some(v) = r.parse("trainer.momentum")? { t.momentum = v; }
        if let Some(v) = r.parse("trainer.minibatch_size")? { t.minibatch_size = v; }
        if let Some(v) = r.string("trainer.clip")? {
            t.clip = if v == "off" { None } else { Some(parse_value("trainer.clip", &v, r.loc("trainer.clip"))?) };
        }
        if let Some(v) = r.parse("trainer.halving_threshold")? { t.halving_threshold = v; }
        if let Some(v) = r.parse("trainer.stop_threshold")? { t.stop_threshold = v; }
        if let Some(v) = r.parse("trainer.min_epochs_before_halving")? { t.min_epochs_before_halving = v; }
        if let Some(v) = r.parse("trainer.max_epochs")? { t.max_epochs = v; }
        if let Some(v) = r.parse("trainer.manual_trigger")? { t.manual_trigger = v; }
        if let Some(v) = r.string("trainer.manual_trigger_epoch")? {
            t.manual_trigger_epoch = if v == "none" { None } else { Some(parse_value("trainer.manual_trigger_epoch", &v, r.loc("trainer.manual_trigger_epoch"))?) };
        }
        if let Some(v) = r.string("trainer.forget_bias")? {
            t.forget_bias = match v.as_str() {
                "random" => ForgetBiasInit::Random,
                "ones" => ForgetBiasInit::Ones,
                other => return Err(Error::config(r.loc("trainer.forget_bias"), format!("expected random|ones, got `{other}`"))),
            };
        }
        if let Some(v) = r.parse("trainer.log_wall_time")? { t.log_wall_time = v; }

        let synthetic: bool = r.parse("data.synthetic")?.unwrap_or(false);
        if synthetic {
            cfg.data.synthetic = Some(parse_synth(&mut r, cfg.alphabet_size)?);
        }
        for (key, slot) in [
            ("data.train", &mut cfg.data.train_list),
            ("data.train_labels", &mut cfg.data.train_labels),
            ("data.cv", &mut cfg.data.cv_list),
            ("data.cv_labels", &mut cfg.data.cv_labels),
        ] {
            match r.string(key)? {
                Some(v) => *slot = PathBuf::from(v),
                None if synthetic => {}
                None => return Err(r.missing(key)),
            }
        }
        cfg.data.feature_dir = r.string("data.feature_dir")?.filter(|s| !s.is_empty() && s != "none").map(PathBuf::from);

        if let Some(unknown) = raw.settings.keys().find(|k| !r.used.contains(&k.as_str())) {
            let s = &raw.settings[unknown];
            return Err(Error::config(&s.location, format!("unknown key `{unknown}`")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::config(format!("config `{}`", self.name), m));
        if self.layers == 0 || self.cells == 0 || self.alphabet_size == 0 {
            return bad("arch.layers, arch.cells and arch.alphabet_size must be positive".into());
        }
        if self.stack_stride == 0 {
            return bad("stack.stride must be at least 1".into());
        }
        if self.trainer.minibatch_size == 0 || self.trainer.max_epochs == 0 {
            return bad("trainer.minibatch_size and trainer.max_epochs must be positive".into());
        }
        if !(self.trainer.lr > 0.0) || !(0.0..1.0).contains(&self.trainer.momentum) {
            return bad("need trainer.lr > 0 and 0 <= trainer.momentum < 1".into());
        }
        if let Some(c) = self.trainer.clip {
            if !(c > 0.0) {
                return bad("trainer.clip must be positive or `off`".into());
            }
        }
        self.dropout.validate()?;
        crate::augment::build_plan(&self.augment)?;
        Ok(())
    }

    /// Every key with its resolved value, in the config's own syntax.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("name", self.name.clone());
        kv("seed", self.seed.to_string());
        kv("out", self.out_dir.display().to_string());
        kv("arch.layers", self.layers.to_string());
        kv("arch.cells", self.cells.to_string());
        kv("arch.alphabet_size", self.alphabet_size.to_string());
        let f = &self.features;
        kv("features.num_filters", f.num_filters.to_string());
        kv("features.window_ms", f.window_ms.to_string());
        kv("features.fft_size", f.fft_size.to_string());
        kv("features.freq_low", f.freq_low.to_string());
        kv("features.freq_high", f.freq_high.map_or("nyquist".into(), |v| v.to_string()));
        kv("features.log_floor", f.log_floor.to_string());
        kv("features.preemphasis", f.preemphasis.to_string());
        kv("augment.mode", self.augment.to_string());
        if let AugmentMode::Custom { warps, hops } = &self.augment {
            kv("augment.warps", join(warps));
            kv("augment.hops", join(hops));
        }
        kv("stack.context", self.stack_context.to_string());
        kv("stack.stride", self.stack_stride.to_string());
        for (k, v) in dropout_to_settings(&self.dropout) {
            kv(&k, v);
        }
        let t = &self.trainer;
        kv("trainer.lr", t.lr.to_string());
        kv("trainer.momentum", t.momentum.to_string());
        kv("trainer.minibatch_size", t.minibatch_size.to_string());
        kv("trainer.clip", t.clip.map_or("off".into(), |v| v.to_string()));
        kv("trainer.halving_threshold", t.halving_threshold.to_string());
        kv("trainer.stop_threshold", t.stop_threshold.to_string());
        kv("trainer.min_epochs_before_halving", t.min_epochs_before_halving.to_string());
        kv("trainer.max_epochs", t.max_epochs.to_string());
        kv("trainer.manual_trigger", t.manual_trigger.to_string());
        kv("trainer.manual_trigger_epoch", t.manual_trigger_epoch.map_or("none".into(), |v| v.to_string()));
        kv(
            "trainer.forget_bias",
            match t.forget_bias {
                ForgetBiasInit::Random => "random".into(),
                ForgetBiasInit::Ones => "ones".into(),
            },
        );
        kv("trainer.log_wall_time", t.log_wall_time.to_string());
        kv("data.synthetic", self.data.synthetic.is_some().to_string());
        if let Some(sy) = &self.data.synthetic {
            for (k, v) in sy.to_settings() {
                kv(&k, v);
            }
        }
        for (k, p) in [
            ("data.train", &self.data.train_list),
            ("data.train_labels", &self.data.train_labels),
            ("data.cv", &self.data.cv_list),
            ("data.cv_labels", &self.data.cv_labels),
        ] {
            if !p.as_os_str().is_empty() {
                kv(k, p.display().to_string());
            }
        }
        kv("data.feature_dir", self.data.feature_dir.as_ref().map_or("none".into(), |p| p.display().to_string()));
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn parse_value<T: FromStr>(key: &str, v: &str, loc: String) -> Result<T> {
    v.parse().map_err(|_| Error::config(loc, format!("cannot parse `{v}` for `{key}`")))
}

/// Typed access that remembers which keys were consumed.
pub(crate) struct Reader<'a> {
    raw: &'a RawConfig,
    used: Vec<&'a str>,
}

impl<'a> Reader<'a> {
    fn loc(&self, key: &str) -> String {
        self.raw.get(key).map_or_else(|| key.to_string(), |s| s.location.clone())
    }

    fn missing(&self, key: &str) -> Error {
        Error::config(key, "required key is missing")
    }

    pub(crate) fn string(&mut self, key: &str) -> Result<Option<String>> {
        Ok(self.raw.settings.get_key_value(key).map(|(k, s)| {
            self.used.push(k.as_str());
            s.value.clone()
        }))
    }

    pub(crate) fn parse<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.string(key)? {
            None => Ok(None),
            Some(v) => parse_value(key, &v, self.loc(key)).map(Some),
        }
    }

    fn required<T: FromStr>(&mut self, key: &str) -> Result<T> {
        self.parse(key)?.ok_or_else(|| self.missing(key))
    }

    pub(crate) fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.string(key)? else { return Ok(None) };
        let loc = self.loc(key);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_value(key, s, loc.clone()))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }
}

/// `name` or `name:rate`, e.g. `nml-sequence:0.3`.
fn parse_entry(s: &str, default_rate: f64, loc: &str) -> Result<DropoutEntry> {
    let (name, rate) = match s.split_once(':') {
        Some((n, r)) => (n.trim(), Some(parse_value::<f64>("dropout rate", r.trim(), loc.to_string())?)),
        None => (s.trim(), None),
    };
    let mut e: DropoutEntry = name.parse().map_err(|e: Error| Error::config(loc, e.to_string()))?;
    e.rate = rate.unwrap_or(default_rate);
    Ok(e)
}

/// A stage: `a+b` (naive) or `a+b/stochastic`.
fn parse_stage(s: &str, rate: f64, choice_prob: f64, loc: &str) -> Result<DropoutPolicy> {
    let (body, mode) = match s.trim().split_once('/') {
        Some((b, m)) => (b, m.trim()),
        None => (s.trim(), "naive"),
    };
    if body == "none" {
        return Ok(DropoutPolicy::none());
    }
    let entries = body
        .split('+')
        .map(|e| parse_entry(e, rate, loc))
        .collect::<Result<Vec<_>>>()?;
    match mode {
        "naive" => Ok(DropoutPolicy::naive(entries)),
        "stochastic" => Ok(DropoutPolicy::stochastic(entries, choice_prob)),
        m => Err(Error::config(loc, format!("unknown stage combination `{m}`"))),
    }
}

fn parse_dropout(r: &mut Reader<'_>) -> Result<DropoutPolicy> {
    let rate: f64 = r.parse("dropout.rate")?.unwrap_or(crate::dropout::DEFAULT_RATE);
    let choice_prob: f64 = r.parse("dropout.choice_prob")?.unwrap_or(0.5);
    let combination = r.string("dropout.combination")?.unwrap_or_else(|| "naive".into());
    let entries_loc = r.loc("dropout.entries");
    let entries: Vec<DropoutEntry> = match r.string("dropout.entries")? {
        None => Vec::new(),
        Some(v) if v == "none" || v.is_empty() => Vec::new(),
        Some(v) => v.split(',').map(|e| parse_entry(e, rate, &entries_loc)).collect::<Result<_>>()?,
    };
    let stages_loc = r.loc("dropout.stages");
    let stages = r.string("dropout.stages")?;
    let trigger_loc = r.loc("dropout.cascade_trigger");
    let trigger = r.string("dropout.cascade_trigger")?;
    let loc = r.loc("dropout.combination");
    let policy = match combination.as_str() {
        "none" => DropoutPolicy::none(),
        "naive" => DropoutPolicy::naive(entries),
        "stochastic" => DropoutPolicy::stochastic(entries, choice_prob),
        "cascade" => {
            let stages = stages
                .ok_or_else(|| Error::config(&loc, "cascade needs `dropout.stages`"))?
                .split('|')
                .map(|s| parse_stage(s, rate, choice_prob, &stages_loc))
                .collect::<Result<Vec<_>>>()?;
            let trigger = match trigger.as_deref() {
                None | Some("manual") => CascadeTrigger::Manual,
                Some(t) => {
                    let epochs = t
                        .strip_prefix("epochs:")
                        .ok_or_else(|| Error::config(&trigger_loc, format!("expected `manual` or `epochs:a,b,..`, got `{t}`")))?;
                    CascadeTrigger::AtEpochs(
                        epochs
                            .split(',')
                            .map(|e| parse_value("dropout.cascade_trigger", e.trim(), trigger_loc.clone()))
                            .collect::<Result<_>>()?,
                    )
                }
            };
            DropoutPolicy::cascade(stages, trigger)
        }
        other => return Err(Error::config(&loc, format!("unknown combination `{other}`"))),
    };
    policy.validate().map_err(|e| Error::config(&loc, e.to_string()))?;
    Ok(policy)
}

fn entry_text(e: &DropoutEntry) -> String {
    format!("{}:{}", e.name(), e.rate)
}

fn stage_text(p: &DropoutPolicy) -> String {
    if p.entries.is_empty() {
        return "none".into();
    }
    let body = p.entries.iter().map(entry_text).collect::<Vec<_>>().join("+");
    match p.combination {
        Combination::Stochastic { .. } => format!("{body}/stochastic"),
        _ => body,
    }
}

fn dropout_to_settings(p: &DropoutPolicy) -> Vec<(String, String)> {
    let entries = || p.entries.iter().map(entry_text).collect::<Vec<_>>().join(", ");
    match &p.combination {
        Combination::Naive if p.entries.is_empty() => vec![("dropout.combination".into(), "none".into())],
        Combination::Naive => vec![
            ("dropout.combination".into(), "naive".into()),
            ("dropout.entries".into(), entries()),
        ],
        Combination::Stochastic { choice_prob } => vec![
            ("dropout.combination".into(), "stochastic".into()),
            ("dropout.entries".into(), entries()),
            ("dropout.choice_prob".into(), choice_prob.to_string()),
        ],
        Combination::Cascade { stages, trigger } => {
            let mut v = vec![
                ("dropout.combination".into(), "cascade".into()),
                ("dropout.stages".into(), stages.iter().map(stage_text).collect::<Vec<_>>().join(" | ")),
                (
                    "dropout.cascade_trigger".into(),
                    match trigger {
                        CascadeTrigger::Manual => "manual".into(),
                        CascadeTrigger::AtEpochs(e) => {
                            format!("epochs:{}", e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                        }
                    },
                ),
            ];
            if let Some(Combination::Stochastic { choice_prob }) =
                stages.iter().map(|s| &s.combination).find(|c| matches!(c, Combination::Stochastic { .. }))
            {
                v.push(("dropout.choice_prob".into(), choice_prob.to_string()));
            }
            v
        }
    }
}

fn parse_synth(r: &mut Reader<'_>, alphabet_size: usize) -> Result<SyntheticTaskSpec> {
    let mut s = SyntheticTaskSpec { alphabet_size, ..SyntheticTaskSpec::default() };
    if let Some(v) = r.parse("synth.train_utterances")? { s.train_utterances = v; }
    if let Some(v) = r.parse("synth.cv_utterances")? { s.cv_utterances = v; }
    if let Some(v) = r.parse("synth.speakers")? { s.speakers = v; }
    if let Some(v) = r.parse("synth.noise")? { s.noise_level = v; }
    if let Some(v) = r.parse("synth.sample_rate")? { s.sample_rate = v; }
    if let Some(v) = r.list::<usize>("synth.tokens")? {
        if v.len() != 2 {
            return Err(Error::config(r.loc("synth.tokens"), "expected `min, max`"));
        }
        s.tokens_per_utterance = (v[0], v[1]);
    }
    if let Some(v) = r.list::<usize>("synth.token_frames")? {
        if v.len() != 2 {
            return Err(Error::config(r.loc("synth.token_frames"), "expected `min, max`"));
        }
        s.token_frames = (v[0], v[1]);
    }
    if let Some(v) = r.parse("synth.speaker_warp")? { s.speaker_warp = v; }
    s.validate()?;
    Ok(s)
}
