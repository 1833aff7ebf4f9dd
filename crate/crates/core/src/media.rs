//! Frame manifests (one frame per second) and frame windows.
//!
//! A manifest is a UTF-8 text file whose first line is
//! `#video_id<TAB><id><TAB>duration<TAB><seconds>`, followed by one
//! `second<TAB>uri` record per line covering `[0, ceil(duration))` without gaps.
//! Frames are never opened here; backends resolve the URIs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::time::{Seconds, TimeError};

pub const DEFAULT_WINDOW_CAP: usize = 30;

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("manifest has no frame for second {second}")]
    Gap { second: usize },
    #[error("manifest lists second {second} more than once (line {line})")]
    Duplicate { second: usize, line: usize },
    #[error("manifest lists second {second} beyond the video duration (line {line})")]
    BeyondDuration { second: usize, line: usize },
    #[error("window [{start}, {end}] is outside the video (duration {duration}s)")]
    OutOfBounds {
        start: Seconds,
        end: Seconds,
        duration: Seconds,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRef {
    pub video_id: String,
    pub second: usize,
    pub uri: String,
}

/// Read-only set of frames for one video, one per whole second.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStore {
    video_id: String,
    video_duration: Seconds,
    frames: Vec<FrameRef>,
}

/// Number of frames a video of the given duration must provide.
/// A zero-length video still carries its opening frame.
pub fn required_frames(duration: Seconds) -> usize {
    duration.whole_seconds().max(1)
}

impl FrameStore {
    /// Builds a store from `(second, uri)` pairs, checking full coverage.
    pub fn new(
        video_id: impl Into<String>,
        video_duration: Seconds,
        frames: impl IntoIterator<Item = (usize, String)>,
    ) -> Result<Self, MediaError> {
        let video_id = video_id.into();
        let needed = required_frames(video_duration);
        let mut by_second = BTreeMap::new();
        for (i, (second, uri)) in frames.into_iter().enumerate() {
            if second >= needed {
                return Err(MediaError::BeyondDuration { second, line: i + 2 });
            }
            if by_second.insert(second, uri).is_some() {
                return Err(MediaError::Duplicate { second, line: i + 2 });
            }
        }
        let mut out = Vec::with_capacity(needed);
        for second in 0..needed {
            let uri = by_second
                .remove(&second)
                .ok_or(MediaError::Gap { second })?;
            out.push(FrameRef {
                video_id: video_id.clone(),
                second,
                uri,
            });
        }
        Ok(Self {
            video_id,
            video_duration,
            frames: out,
        })
    }

    /// Synthetic store with `frame://<id>/<second>` URIs. Handy for tests and dry runs.
    pub fn synthetic(video_id: &str, video_duration: Seconds) -> Self {
        let frames = (0..required_frames(video_duration))
            .map(|s| (s, format!("frame://{video_id}/{s}")))
            .collect::<Vec<_>>();
        Self::new(video_id, video_duration, frames).expect("synthetic store is complete")
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn video_duration(&self) -> Seconds {
        self.video_duration
    }

    pub fn frames(&self) -> &[FrameRef] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, second: usize) -> Option<&FrameRef> {
        self.frames.get(second)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameWindow {
    pub frames: Vec<FrameRef>,
    pub window_start: Seconds,
    pub window_end: Seconds,
}

impl FrameWindow {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn seconds(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.second).collect()
    }

    pub fn uris(&self) -> impl Iterator<Item = &str> {
        self.frames.iter().map(|f| f.uri.as_str())
    }
}

pub fn parse_manifest(text: &str) -> Result<FrameStore, MediaError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| MediaError::Malformed {
        line: 1,
        reason: "empty manifest".into(),
    })?;
    let (video_id, duration) = parse_header(header.trim_end_matches('\r'))?;

    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (second, uri) = line.split_once('\t').ok_or_else(|| MediaError::Malformed {
            line: line_no,
            reason: "expected `second<TAB>uri`".into(),
        })?;
        let second: usize = second.trim().parse().map_err(|_| MediaError::Malformed {
            line: line_no,
            reason: format!("'{second}' is not a non-negative integer second"),
        })?;
        let uri = uri.trim();
        if uri.is_empty() {
            return Err(MediaError::Malformed {
                line: line_no,
                reason: "empty uri".into(),
            });
        }
        records.push((line_no, second, uri.to_string()));
    }

    // Re-map errors to real line numbers.
    let needed = required_frames(duration);
    let mut seen = BTreeMap::new();
    for (line, second, _) in &records {
        if *second >= needed {
            return Err(MediaError::BeyondDuration {
                second: *second,
                line: *line,
            });
        }
        if seen.insert(*second, *line).is_some() {
            return Err(MediaError::Duplicate {
                second: *second,
                line: *line,
            });
        }
    }
    FrameStore::new(
        video_id,
        duration,
        records.into_iter().map(|(_, s, u)| (s, u)),
    )
}

fn parse_header(line: &str) -> Result<(String, Seconds), MediaError> {
    let malformed = |reason: &str| MediaError::Malformed {
        line: 1,
        reason: reason.to_string(),
    };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 || fields[0] != "#video_id" || fields[2] != "duration" {
        return Err(malformed(
            "header must be `#video_id<TAB><id><TAB>duration<TAB><seconds>`",
        ));
    }
    let id = fields[1].trim();
    if id.is_empty() {
        return Err(malformed("empty video id"));
    }
    let duration: f64 = fields[3]
        .trim()
        .parse()
        .map_err(|_| malformed("duration is not a number"))?;
    let duration = Seconds::new(duration)
        .map_err(|e: TimeError| malformed(&format!("bad duration: {e}")))?;
    Ok((id.to_string(), duration))
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<FrameStore, MediaError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MediaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(&text)
}

/// Renders a store back to manifest text.
pub fn write_manifest(store: &FrameStore) -> String {
    let mut out = format!(
        "#video_id\t{}\tduration\t{}\n",
        store.video_id, store.video_duration
    );
    for f in &store.frames {
        out.push_str(&format!("{}\t{}\n", f.second, f.uri));
    }
    out
}

/// Frames with `t_a <= second < max(t_b, t_a + 1)`, keeping the newest `cap`.
pub fn frames_between(
    store: &FrameStore,
    t_a: Seconds,
    t_b: Seconds,
    cap: usize,
) -> Result<FrameWindow, MediaError> {
    if t_a > t_b || t_b > store.video_duration {
        return Err(MediaError::OutOfBounds {
            start: t_a,
            end: t_b,
            duration: store.video_duration,
        });
    }
    let cap = cap.max(1);
    let upper = t_b.get().max(t_a.get() + 1.0);
    let lo = t_a.get().ceil() as usize;
    let hi = (upper.ceil() as usize).min(store.frames.len());

    let mut frames: Vec<FrameRef> = if lo < hi {
        store.frames[lo..hi].to_vec()
    } else {
        // Window sits at the very end of the video: show the last frame.
        let last = (t_a.get().floor() as usize).min(store.frames.len() - 1);
        vec![store.frames[last].clone()]
    };
    if frames.len() > cap {
        frames.drain(..frames.len() - cap);
    }
    Ok(FrameWindow {
        frames,
        window_start: t_a,
        window_end: t_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(id: &str, duration: &str, seconds: impl IntoIterator<Item = usize>) -> String {
        let mut s = format!("#video_id\t{id}\tduration\t{duration}\n");
        for sec in seconds {
            s.push_str(&format!("{sec}\tframes/{id}/{sec:04}.jpg\n"));
        }
        s
    }

    fn secs(v: f64) -> Seconds {
        Seconds::from_secs(v)
    }

    #[test]
    fn complete_manifest_loads() {
        let store = parse_manifest(&manifest("a", "10", 0..10)).unwrap();
        assert_eq!(store.len(), 10);
        assert_eq!(store.frame(9).unwrap().uri, "frames/a/0009.jpg");
    }

    #[test]
    fn gap_names_the_second() {
        let err = parse_manifest(&manifest("a", "10", (0..10).filter(|&s| s != 4))).unwrap_err();
        assert!(matches!(err, MediaError::Gap { second: 4 }));
        assert!(err.to_string().contains('4'));
    }

    #[test]
    fn fractional_duration_rounds_coverage_up() {
        let store = parse_manifest(&manifest("a", "3.5", 0..4)).unwrap();
        assert_eq!(store.len(), 4);
        let err = parse_manifest(&manifest("a", "3.5", 0..3)).unwrap_err();
        assert!(matches!(err, MediaError::Gap { second: 3 }));
    }

    #[test]
    fn malformed_and_duplicate_lines() {
        assert!(matches!(
            parse_manifest("0\ta.jpg\n"),
            Err(MediaError::Malformed { line: 1, .. })
        ));
        let mut text = manifest("a", "2", 0..2);
        text.push_str("1\tdup.jpg\n");
        assert!(matches!(
            parse_manifest(&text),
            Err(MediaError::Duplicate { second: 1, line: 4 })
        ));
        let text = "#video_id\ta\tduration\t2\n0\ta.jpg\nx\tb.jpg\n";
        assert!(matches!(
            parse_manifest(text),
            Err(MediaError::Malformed { line: 3, .. })
        ));
        let text = manifest("a", "2", 0..3);
        assert!(matches!(
            parse_manifest(&text),
            Err(MediaError::BeyondDuration { second: 2, line: 4 })
        ));
    }

    #[test]
    fn missing_file_is_reported() {
        let err = load_manifest("/nonexistent/manifest.tsv").unwrap_err();
        assert!(matches!(err, MediaError::Io { .. }));
    }

    #[test]
    fn crlf_and_bom_tolerated() {
        let text = "\u{feff}#video_id\tb\tduration\t2\r\n0\ta.jpg\r\n1\tb.jpg\r\n";
        assert_eq!(parse_manifest(text).unwrap().len(), 2);
    }

    #[test]
    fn manifest_round_trips() {
        let store = FrameStore::synthetic("x", secs(4.5));
        assert_eq!(parse_manifest(&write_manifest(&store)).unwrap(), store);
    }

    #[test]
    fn window_examples() {
        let store = FrameStore::synthetic("v", secs(60.0));
        let w = frames_between(&store, secs(4.0), secs(6.0), 30).unwrap();
        assert_eq!(w.seconds(), vec![4, 5]);
        let w = frames_between(&store, secs(0.0), secs(0.0), 30).unwrap();
        assert_eq!(w.seconds(), vec![0]);
        let w = frames_between(&store, secs(0.0), secs(45.0), 30).unwrap();
        assert_eq!(w.seconds(), (15..45).collect::<Vec<_>>());
        let w = frames_between(&store, secs(10.0), secs(15.25), 30).unwrap();
        assert_eq!(w.seconds(), (10..=15).collect::<Vec<_>>());
    }

    #[test]
    fn window_out_of_bounds() {
        let store = FrameStore::synthetic("v", secs(10.0));
        assert!(frames_between(&store, secs(5.0), secs(4.0), 30).is_err());
        assert!(frames_between(&store, secs(5.0), secs(10.5), 30).is_err());
    }

    #[test]
    fn window_at_the_end_shows_last_frame() {
        let store = FrameStore::synthetic("v", secs(10.0));
        let w = frames_between(&store, secs(10.0), secs(10.0), 30).unwrap();
        assert_eq!(w.seconds(), vec![9]);
        let empty = FrameStore::synthetic("z", secs(0.0));
        let w = frames_between(&empty, secs(0.0), secs(0.0), 30).unwrap();
        assert_eq!(w.seconds(), vec![0]);
    }
}
