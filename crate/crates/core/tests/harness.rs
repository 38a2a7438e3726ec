use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lstm_ctc::dropout::{Combination, DropoutLocation, MaskGranularity};
use lstm_ctc::features::{read_archive, read_wav};
use lstm_ctc::harness::corpus::{format_labels, parse_labels, parse_wav_list, read_labels};
use lstm_ctc::harness::synth::{synthesize_split, SyntheticTaskSpec};
use lstm_ctc::harness::{preset_names, ExperimentConfig, RawConfig};
use lstm_ctc::network::{read_checkpoint, write_checkpoint};

#[test]
fn every_preset_resolves_and_survives_its_resolved_form() {
    let names: Vec<&str> = preset_names().collect();
    assert!(names.len() >= 25);
    for name in names {
        let cfg = ExperimentConfig::load(name, &[]).unwrap_or_else(|e| panic!("{name}: {e}"));
        let raw = RawConfig::parse(&cfg.to_text(), "resolved", None).unwrap();
        assert_eq!(ExperimentConfig::from_raw(&raw).unwrap(), cfg, "{name}");
    }
}

#[test]
fn table_presets_cover_tables_two_to_eight() {
    for table in 2..=8 {
        let prefix = format!("table{table}-");
        assert!(preset_names().any(|n| n.starts_with(&prefix)), "no preset for table {table}");
    }
}

#[test]
fn stochastic_preset_picks_nml_sequence_or_forward_sequence() {
    let cfg = ExperimentConfig::load("presets/table7-nml-seq-fwd-seq-stochastic", &[]).unwrap();
    assert!(matches!(cfg.dropout.combination, Combination::Stochastic { choice_prob } if choice_prob == 0.5));
    let e = &cfg.dropout.entries;
    assert_eq!(e.len(), 2);
    assert_eq!((e[0].location, e[0].granularity), (DropoutLocation::NmlCellUpdate, MaskGranularity::PerSequence));
    assert_eq!((e[1].location, e[1].granularity), (DropoutLocation::ForwardConnection, MaskGranularity::PerSequence));
    assert!(e.iter().all(|x| x.rate == 0.2));
    assert_eq!((cfg.stack_context, cfg.stack_stride), (1, 3));
}

#[test]
fn cascade_preset_has_two_stages() {
    let cfg = ExperimentConfig::load("table8-cascade", &[]).unwrap();
    let Combination::Cascade { stages, .. } = &cfg.dropout.combination else { panic!("not a cascade") };
    assert_eq!(stages.len(), 2);
    assert_eq!(stages[0].describe(), "nml-sequence+forward-step/naive");
    assert_eq!(stages[1].describe(), "nml-sequence+forward-sequence/naive");
}

#[test]
fn overrides_beat_presets_and_unknown_keys_are_rejected() {
    let cfg = ExperimentConfig::load("synth-baseline", &["seed=99".into(), "arch.cells=7".into()]).unwrap();
    assert_eq!((cfg.seed, cfg.cells), (99, 7));
    assert!(ExperimentConfig::load("synth-baseline", &["arch.celz=7".into()]).is_err());
    assert!(ExperimentConfig::load("no-such-preset", &[]).is_err());
}

#[test]
fn synthetic_labels_match_their_spec() {
    let spec = SyntheticTaskSpec::default();
    let utts = synthesize_split(&spec, 7, "train").unwrap();
    assert_eq!(utts.len(), 200);
    let mut histogram = BTreeMap::new();
    for u in &utts {
        *histogram.entry(u.labels.len()).or_insert(0) += 1;
        assert!(u.labels.iter().all(|&t| t < 5));
        assert!(u.labels.windows(2).all(|w| w[0] != w[1]));
    }
    assert!(histogram.keys().all(|l| (3..=8).contains(l)), "{histogram:?}");
    // every length in range shows up with 200 draws
    assert_eq!(histogram.len(), 6, "{histogram:?}");
}

#[test]
fn labels_and_lists_round_trip() {
    let entries = vec![("a".to_string(), vec![1, 2]), ("b".to_string(), vec![])];
    let text = format_labels(entries.iter().map(|(i, l)| (i.as_str(), l.as_slice())));
    assert_eq!(parse_labels(&text).unwrap(), entries);
    let list = parse_wav_list("u1 s1 x.wav\n", Some(Path::new("/data"))).unwrap();
    assert_eq!(list[0].path, PathBuf::from("/data/x.wav"));
}

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn fuzz_seeds_replay_cleanly() {
    let mut accepted = BTreeMap::new();
    for (p, data) in seeds("farc_archive") {
        if let Ok(f) = read_archive(data.as_slice()) {
            *accepted.entry("farc").or_insert(0) += 1;
            assert!(!f.is_empty(), "{}", p.display());
        }
    }
    for (p, data) in seeds("netc_checkpoint") {
        if let Ok(net) = read_checkpoint(data.as_slice()) {
            *accepted.entry("netc").or_insert(0) += 1;
            let mut out = Vec::new();
            write_checkpoint(&mut out, &net).unwrap();
            assert_eq!(out, data, "{}", p.display());
        }
    }
    for (_, data) in seeds("wav") {
        if read_wav(data.as_slice(), "u", "s").is_ok() {
            *accepted.entry("wav").or_insert(0) += 1;
        }
    }
    for (p, data) in seeds("labels") {
        if let Ok(e) = parse_labels(std::str::from_utf8(&data).unwrap()) {
            *accepted.entry("labels").or_insert(0) += 1;
            let again = format_labels(e.iter().map(|(i, l)| (i.as_str(), l.as_slice())));
            assert_eq!(parse_labels(&again).unwrap(), e, "{}", p.display());
        }
    }
    for (_, data) in seeds("wav_list") {
        if parse_wav_list(std::str::from_utf8(&data).unwrap(), None).is_ok() {
            *accepted.entry("wav_list").or_insert(0) += 1;
        }
    }
    for (p, data) in seeds("config") {
        let text = std::str::from_utf8(&data).unwrap();
        if let Ok(cfg) = RawConfig::parse(text, "seed", None).and_then(|r| ExperimentConfig::from_raw(&r)) {
            *accepted.entry("config").or_insert(0) += 1;
            let again = RawConfig::parse(&cfg.to_text(), "resolved", None).unwrap();
            assert_eq!(ExperimentConfig::from_raw(&again).unwrap(), cfg, "{}", p.display());
        }
    }
    // each target has at least one well-formed seed
    for t in ["farc", "netc", "wav", "labels", "wav_list", "config"] {
        assert!(accepted.get(t).copied().unwrap_or(0) > 0, "{t}: {accepted:?}");
    }
}

#[test]
fn synthetic_label_files_are_plain_text() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticTaskSpec { train_utterances: 3, cv_utterances: 2, speakers: 1, ..Default::default() };
    let c = lstm_ctc::harness::synth::generate_synthetic_corpus(&spec, 1, dir.path()).unwrap();
    let labels = read_labels(&c.train_labels).unwrap();
    assert_eq!(labels.len(), 3);
    assert_eq!(labels[0].0, "train-00000");
}
