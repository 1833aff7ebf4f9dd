//! Building reference tracks from SRT files and `start<TAB>text` transcripts.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::lang::Language;
use crate::prompting::normalize_utterance;
use crate::strategies::{estimate_duration, SpeechRateModel};
use crate::subtitles::{parse_srt, SrtEntry, SubtitleError};
use crate::time::Seconds;
use crate::track::{CommentaryTrack, ReferenceTrack, Utterance};

#[derive(Debug, Error)]
pub enum ReferenceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Srt(#[from] SubtitleError),
    #[error("transcript line {line}: {reason}")]
    Transcript { line: usize, reason: String },
    #[error("{0}: unsupported reference extension (expected .srt or .tsv)")]
    Extension(PathBuf),
}

/// Sorts entries, merges entries sharing a start time and drops entries starting after the end.
pub fn reference_from_entries(
    video_id: &str,
    duration: Seconds,
    entries: &[SrtEntry],
    language: Language,
) -> ReferenceTrack {
    let mut sorted: Vec<&SrtEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| e.start);
    let mut merged: Vec<(Seconds, Seconds, String)> = Vec::new();
    for e in sorted {
        let text = normalize_utterance(&e.text);
        match merged.last_mut() {
            Some((start, end, t)) if *start == e.start => {
                *end = (*end).max(e.end);
                t.push_str(language.joiner());
                t.push_str(&text);
            }
            _ => merged.push((e.start, e.end, text)),
        }
    }
    let mut track = CommentaryTrack::new(video_id, duration);
    for (start, end, text) in merged {
        match Utterance::new(text, language, start, end - start) {
            Ok(u) => {
                if let Err(e) = track.push(u) {
                    log::warn!("reference {video_id}: dropping entry at {start}s: {e}");
                }
            }
            Err(e) => log::warn!("reference {video_id}: dropping entry at {start}s: {e}"),
        }
    }
    track
}

/// Smallest whole-second duration covering every entry.
pub fn covering_duration(entries: &[SrtEntry]) -> Seconds {
    let end = entries.iter().map(|e| e.end).max().unwrap_or(Seconds::ZERO);
    Seconds::from_secs(end.get().ceil())
}

/// Transcript lines `start_seconds<TAB>text`, optionally preceded by a
/// `#video_id<TAB><id><TAB>duration<TAB><seconds>` header. Durations come from the rate model.
pub fn parse_transcript(
    video_id: &str,
    text: &str,
    language: Language,
    rates: &SpeechRateModel,
    duration: Option<Seconds>,
) -> Result<ReferenceTrack, ReferenceError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut header_duration = None;
    let mut header_id = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#video_id\t") {
            let fields: Vec<&str> = rest.split('\t').collect();
            if fields.len() == 3 && fields[1] == "duration" {
                header_id = Some(fields[0].to_string());
                let d: f64 = fields[2].trim().parse().map_err(|_| ReferenceError::Transcript {
                    line: line_no,
                    reason: "bad duration".into(),
                })?;
                header_duration = Some(Seconds::new(d).map_err(|e| ReferenceError::Transcript {
                    line: line_no,
                    reason: e.to_string(),
                })?);
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let (start, utterance) = line.split_once('\t').ok_or_else(|| ReferenceError::Transcript {
            line: line_no,
            reason: "expected `start_seconds<TAB>text`".into(),
        })?;
        let start: f64 = start.trim().parse().map_err(|_| ReferenceError::Transcript {
            line: line_no,
            reason: format!("'{start}' is not a number"),
        })?;
        let start = Seconds::new(start).map_err(|e| ReferenceError::Transcript {
            line: line_no,
            reason: e.to_string(),
        })?;
        let d = estimate_duration(utterance, language, rates).map_err(|e| ReferenceError::Transcript {
            line: line_no,
            reason: e.to_string(),
        })?;
        rows.push(SrtEntry {
            index: rows.len() + 1,
            start,
            end: start + d,
            text: utterance.trim().to_string(),
        });
    }
    let duration = duration
        .or(header_duration)
        .unwrap_or_else(|| covering_duration(&rows));
    let id = header_id.as_deref().unwrap_or(video_id);
    Ok(reference_from_entries(id, duration, &rows, language))
}

/// Loads `<path>` as SRT (`.srt`) or transcript (`.tsv`/`.txt`).
pub fn load_reference(
    path: &Path,
    language: Language,
    rates: &SpeechRateModel,
    duration: Option<Seconds>,
) -> Result<ReferenceTrack, ReferenceError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReferenceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let video_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    match path.extension().and_then(|e| e.to_str()) {
        Some("srt") => {
            let entries = parse_srt(&text)?;
            let duration = duration.unwrap_or_else(|| covering_duration(&entries));
            Ok(reference_from_entries(&video_id, duration, &entries, language))
        }
        Some("tsv") | Some("txt") => parse_transcript(&video_id, &text, language, rates, duration),
        _ => Err(ReferenceError::Extension(path.to_path_buf())),
    }
}
