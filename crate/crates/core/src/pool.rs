//! Per-speaker utterance inventories and the JSON-lines manifest format.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One source utterance: who said it, how long it is, where the audio lives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub id: String,
    pub speaker: String,
    /// Seconds, > 0.
    pub duration: f64,
    pub path: String,
}

/// Utterances grouped by speaker.
///
/// Speakers iterate in sorted order so that seeded sampling over the pool is
/// reproducible regardless of manifest row order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UtterancePool {
    by_speaker: BTreeMap<String, Vec<UtteranceRecord>>,
}

impl UtterancePool {
    /// Groups records by speaker, rejecting duplicate utterance ids.
    pub fn from_records(records: Vec<UtteranceRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut by_speaker: BTreeMap<String, Vec<UtteranceRecord>> = BTreeMap::new();
        for rec in records {
            if !(rec.duration > 0.0) {
                return Err(Error::Manifest(format!(
                    "utterance {} has non-positive duration {}",
                    rec.id, rec.duration
                )));
            }
            if rec.path.is_empty() {
                return Err(Error::Manifest(format!("utterance {} has empty path", rec.id)));
            }
            if !seen.insert(rec.id.clone()) {
                return Err(Error::Manifest(format!("duplicate utterance id {}", rec.id)));
            }
            by_speaker.entry(rec.speaker.clone()).or_default().push(rec);
        }
        if by_speaker.is_empty() {
            return Err(Error::EmptyPool);
        }
        Ok(Self { by_speaker })
    }

    pub fn speakers(&self) -> Vec<&str> {
        self.by_speaker.keys().map(|s| s.as_str()).collect()
    }

    pub fn utterances(&self, speaker: &str) -> Option<&[UtteranceRecord]> {
        self.by_speaker.get(speaker).map(|v| v.as_slice())
    }

    pub fn speaker_count(&self) -> usize {
        self.by_speaker.len()
    }

    pub fn utterance_count(&self) -> usize {
        self.by_speaker.values().map(|v| v.len()).sum()
    }

    pub fn find(&self, speaker: &str, utterance_id: &str) -> Option<&UtteranceRecord> {
        self.by_speaker
            .get(speaker)?
            .iter()
            .find(|u| u.id == utterance_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[UtteranceRecord])> {
        self.by_speaker.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Parses JSON-lines manifest text, one [`UtteranceRecord`] per line.
pub fn parse_manifest(text: &str) -> Result<Vec<UtteranceRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rec: UtteranceRecord = serde_json::from_str(line)
            .map_err(|e| Error::Manifest(format!("line {}: {e}", i + 1)))?;
        records.push(rec);
    }
    Ok(records)
}

pub fn write_manifest<W: Write>(mut w: W, records: &[UtteranceRecord]) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Loads a manifest into a pool, dropping utterances shorter than
/// `min_duration` seconds. Speakers left with no utterances are dropped with
/// a warning; an entirely empty result is an error. Relative audio paths are
/// resolved against the manifest's directory.
pub fn load_pool(path: impl AsRef<Path>, min_duration: f64) -> Result<UtterancePool> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let file = std::fs::File::open(path)?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut rec: UtteranceRecord = serde_json::from_str(line)
            .map_err(|e| Error::Manifest(format!("line {}: {e}", i + 1)))?;
        if !rec.path.is_empty() && std::path::Path::new(&rec.path).is_relative() {
            rec.path = base.join(&rec.path).display().to_string();
        }
        records.push(rec);
    }
    pool_from_records(records, min_duration)
}

/// Same as [`load_pool`] but starting from already-parsed records.
pub fn pool_from_records(
    records: Vec<UtteranceRecord>,
    min_duration: f64,
) -> Result<UtterancePool> {
    let mut speakers_before: BTreeMap<&str, usize> = BTreeMap::new();
    for rec in &records {
        *speakers_before.entry(rec.speaker.as_str()).or_default() += 1;
    }
    let kept: Vec<UtteranceRecord> = records
        .iter()
        .filter(|r| r.duration >= min_duration)
        .cloned()
        .collect();
    let mut speakers_after: BTreeMap<&str, usize> = BTreeMap::new();
    for rec in &kept {
        *speakers_after.entry(rec.speaker.as_str()).or_default() += 1;
    }
    for speaker in speakers_before.keys() {
        if !speakers_after.contains_key(speaker) {
            log::warn!("speaker {speaker} has no utterances >= {min_duration} s; dropped");
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyPool);
    }
    UtterancePool::from_records(kept)
}
