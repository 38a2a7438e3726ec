//! Label files and waveform lists.
//!
//! A label file has one utterance per line: the utterance id followed by
//! whitespace-separated integer tokens. A waveform list has one utterance
//! per line: `utt_id speaker_id path`. Blank lines and `#` comments are
//! ignored in both.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::ctc::LabelSequence;
use crate::error::{Error, Result};
use crate::features::{read_wav_file, Waveform};
use crate::io_util::atomic_write_str;

const LABELS: &str = "label file";
const LIST: &str = "waveform list";

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses label-file text into `(utterance_id, tokens)` in file order.
pub fn parse_labels(text: &str) -> Result<Vec<(String, LabelSequence)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (n, line) in content_lines(text) {
        let mut it = line.split_whitespace();
        let id = it.next().expect("non-empty line");
        let tokens = it
            .map(|t| t.parse::<usize>().map_err(|_| Error::format(LABELS, format!("line {n}: bad token `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if seen.insert(id.to_string(), n).is_some() {
            return Err(Error::format(LABELS, format!("line {n}: duplicate utterance `{id}`")));
        }
        out.push((id.to_string(), tokens));
    }
    Ok(out)
}

pub fn format_labels<'a>(entries: impl IntoIterator<Item = (&'a str, &'a [usize])>) -> String {
    let mut s = String::new();
    for (id, toks) in entries {
        s.push_str(id);
        for t in toks {
            let _ = write!(s, " {t}");
        }
        s.push('\n');
    }
    s
}

pub fn read_labels(path: &Path) -> Result<Vec<(String, LabelSequence)>> {
    parse_labels(&std::fs::read_to_string(path)?)
}

pub fn write_labels<'a>(path: &Path, entries: impl IntoIterator<Item = (&'a str, &'a [usize])>) -> Result<()> {
    atomic_write_str(path, &format_labels(entries))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListEntry {
    pub utterance_id: String,
    pub speaker_id: String,
    pub path: PathBuf,
}

/// Parses a waveform list. Relative paths are taken relative to `base`.
pub fn parse_wav_list(text: &str, base: Option<&Path>) -> Result<Vec<ListEntry>> {
    let mut out = Vec::new();
    let mut seen = BTreeMap::new();
    for (n, line) in content_lines(text) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [utt, spk, path] = parts[..] else {
            return Err(Error::format(LIST, format!("line {n}: expected `utt_id speaker_id path`")));
        };
        if seen.insert(utt.to_string(), n).is_some() {
            return Err(Error::format(LIST, format!("line {n}: duplicate utterance `{utt}`")));
        }
        let p = PathBuf::from(path);
        let path = match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p,
        };
        out.push(ListEntry { utterance_id: utt.into(), speaker_id: spk.into(), path });
    }
    Ok(out)
}

pub fn read_wav_list(path: &Path) -> Result<Vec<ListEntry>> {
    parse_wav_list(&std::fs::read_to_string(path)?, path.parent())
}

pub fn write_wav_list(path: &Path, entries: &[ListEntry]) -> Result<()> {
    let mut s = String::new();
    for e in entries {
        let _ = writeln!(s, "{} {} {}", e.utterance_id, e.speaker_id, e.path.display());
    }
    atomic_write_str(path, &s)
}

pub fn load_waveforms(entries: &[ListEntry]) -> Result<Vec<Waveform>> {
    entries
        .iter()
        .map(|e| read_wav_file(&e.path, e.utterance_id.as_str(), e.speaker_id.as_str()))
        .collect()
}

/// Orders `labels` to match `ids`; every id needs a label line.
pub fn align_labels(ids: &[&str], labels: Vec<(String, LabelSequence)>, alphabet_size: usize) -> Result<Vec<LabelSequence>> {
    let mut map: BTreeMap<String, LabelSequence> = labels.into_iter().collect();
    ids.iter()
        .map(|id| {
            let l = map
                .remove(*id)
                .ok_or_else(|| Error::format(LABELS, format!("no labels for utterance `{id}`")))?;
            if let Some(t) = l.iter().find(|&&t| t >= alphabet_size) {
                return Err(Error::format(LABELS, format!("utterance `{id}`: token {t} outside alphabet of {alphabet_size}")));
            }
            Ok(l)
        })
        .collect()
}
