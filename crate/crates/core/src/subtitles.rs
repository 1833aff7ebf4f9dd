//! SRT emission and parsing, and display-interval overlap analysis.

use std::fmt::Write as _;

use thiserror::Error;

use crate::prompting::normalize_utterance;
use crate::time::Seconds;
use crate::track::{utterance_interval, CommentaryTrack};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubtitleError {
    #[error("entry {entry} (line {line}): malformed timestamp line '{text}'")]
    MalformedTimestamp {
        entry: usize,
        line: usize,
        text: String,
    },
    #[error("entry {entry} (line {line}): malformed index line '{text}'")]
    MalformedIndex {
        entry: usize,
        line: usize,
        text: String,
    },
    #[error("entry {entry} (line {line}): end time is not after start time")]
    EmptyInterval { entry: usize, line: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrtEntry {
    pub index: usize,
    pub start: Seconds,
    pub end: Seconds,
    pub text: String,
}

/// `HH:MM:SS,mmm`, rounded to the millisecond.
pub fn format_timestamp(t: Seconds) -> String {
    let ms = t.as_millis();
    let (h, rem) = (ms / 3_600_000, ms % 3_600_000);
    let (m, rem) = (rem / 60_000, rem % 60_000);
    let (s, ms) = (rem / 1000, rem % 1000);
    format!("{h:02}:{m:02}:{s:02},{ms:03}")
}

/// Accepts a comma or a dot before the milliseconds.
pub fn parse_timestamp(text: &str) -> Option<Seconds> {
    let text = text.trim();
    let (hms, frac) = match text.rfind([',', '.']) {
        Some(pos) => (&text[..pos], &text[pos + 1..]),
        None => (text, "0"),
    };
    let parts: Vec<&str> = hms.split(':').collect();
    if parts.len() != 3 {
        return None;
    }
    let num = |s: &str| -> Option<u64> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    };
    let (h, m, s) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if m >= 60 || s >= 60 || frac.is_empty() || frac.len() > 3 {
        return None;
    }
    let ms = num(frac)? * 10u64.pow(3 - frac.len() as u32);
    Some(Seconds::from_millis(((h * 60 + m) * 60 + s) * 1000 + ms))
}

/// Subtitle entries for a track, numbered from 1 in start order.
pub fn track_entries(track: &CommentaryTrack) -> Vec<SrtEntry> {
    track
        .utterances()
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let (start, end) = utterance_interval(u);
            SrtEntry {
                index: i + 1,
                start,
                end,
                text: normalize_utterance(u.text()),
            }
        })
        .collect()
}

pub fn entries_to_srt(entries: &[SrtEntry]) -> String {
    let mut out = String::new();
    for (i, e) in entries.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(
            out,
            "{}\n{} --> {}\n{}\n",
            e.index,
            format_timestamp(e.start),
            format_timestamp(e.end),
            e.text
        );
    }
    out
}

pub fn to_srt(track: &CommentaryTrack) -> String {
    entries_to_srt(&track_entries(track))
}

/// Parsed entries plus non-fatal warnings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedSrt {
    pub entries: Vec<SrtEntry>,
    pub warnings: Vec<String>,
}

pub fn parse_srt(text: &str) -> Result<Vec<SrtEntry>, SubtitleError> {
    let parsed = parse_srt_detailed(text)?;
    for w in &parsed.warnings {
        log::warn!("srt: {w}");
    }
    Ok(parsed.entries)
}

pub fn parse_srt_detailed(text: &str) -> Result<ParsedSrt, SubtitleError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let mut out = ParsedSrt::default();
    let mut i = 0;
    let mut ordinal = 0;
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        ordinal += 1;
        let block_start = i;
        while i < lines.len() && !lines[i].trim().is_empty() {
            i += 1;
        }
        let block = &lines[block_start..i];

        // The index line may be missing; a block can start directly with its timing line.
        let (index, timing_offset) = match block[0].trim().parse::<usize>() {
            Ok(n) => (n, 1),
            Err(_) if block[0].contains("-->") => {
                out.warnings
                    .push(format!("entry {ordinal} (line {}): missing index", block_start + 1));
                (ordinal, 0)
            }
            Err(_) => {
                return Err(SubtitleError::MalformedIndex {
                    entry: ordinal,
                    line: block_start + 1,
                    text: block[0].to_string(),
                })
            }
        };
        let timing_line_no = block_start + timing_offset + 1;
        let malformed = |text: &str| SubtitleError::MalformedTimestamp {
            entry: index,
            line: timing_line_no,
            text: text.to_string(),
        };
        let timing = block.get(timing_offset).ok_or_else(|| malformed(""))?;
        let (a, b) = timing.split_once("-->").ok_or_else(|| malformed(timing))?;
        let start = parse_timestamp(a).ok_or_else(|| malformed(timing))?;
        // Anything after the end timestamp (positioning hints) is ignored.
        let b = b.split_whitespace().next().unwrap_or("");
        let end = parse_timestamp(b).ok_or_else(|| malformed(timing))?;
        if end <= start {
            return Err(SubtitleError::EmptyInterval {
                entry: index,
                line: timing_line_no,
            });
        }
        let body = block[timing_offset + 1..].join("\n");
        if body.trim().is_empty() {
            out.warnings
                .push(format!("entry {index} (line {}): no text, skipped", block_start + 1));
            continue;
        }
        if let Some(prev) = out.entries.last() {
            if index != prev.index + 1 {
                out.warnings.push(format!(
                    "entry {index} (line {}): index does not follow {}",
                    block_start + 1,
                    prev.index
                ));
            }
        }
        out.entries.push(SrtEntry {
            index,
            start,
            end,
            text: body,
        });
    }
    Ok(out)
}

/// Fraction of adjacent pairs (in start order) whose display intervals intersect.
pub fn overlap_proportion(entries: &[SrtEntry]) -> f64 {
    if entries.len() < 2 {
        return 0.0;
    }
    let mut sorted: Vec<&SrtEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| e.start);
    let overlapping = sorted
        .windows(2)
        .filter(|pair| pair[0].end > pair[1].start)
        .count();
    overlapping as f64 / (sorted.len() - 1) as f64
}
