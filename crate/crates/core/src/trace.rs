//! Line-oriented serialization of a [`GenerationRecord`].
//!
//! ```text
//! #livecomm-trace	1
//! video_id	race01
//! duration	10
//! ...
//! #steps	6
//! 0	0	3fa1c2d4e5b6a7f8	SPEAK	The race is on.
//! 1	2	9a8b7c6d5e4f3a2b	WAIT
//! ```
#![allow(clippy::tabs_in_doc_comments)]

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::lang::Language;
use crate::prompting::ParseNote;
use crate::strategies::{
    estimate_duration, GenerationRecord, SessionStatus, SpeechRateModel, StrategyKind,
};
use crate::time::Seconds;
use crate::track::{CommentaryTrack, DecisionOutcome, Utterance};

pub const TRACE_MAGIC: &str = "#livecomm-trace\t1";
pub const TRACE_EXTENSION: &str = "trace";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

pub fn write_trace(record: &GenerationRecord) -> String {
    let c = &record.config;
    let mut s = String::new();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(s, "{k}\t{v}");
    };
    kv("video_id", &escape(&record.video_id));
    kv("duration", &record.video_duration);
    kv("strategy", &c.kind);
    kv("language", &c.language);
    kv("step", &c.step);
    kv("window_cap", &c.window_cap);
    kv("icl_shots", &c.icl_shots);
    kv("rate_model", &c.rate_model);
    kv(
        "max_history",
        &c.max_history.map_or_else(|| "all".to_string(), |n| n.to_string()),
    );
    kv(
        "templates",
        &format!("{}\t{}", record.template_ids.0, record.template_ids.1),
    );
    kv("model", &escape(&record.model_id));
    match &record.status {
        SessionStatus::Complete => kv("status", &"complete"),
        SessionStatus::Aborted {
            index,
            message,
            configuration,
        } => kv(
            "status",
            &format!(
                "aborted\t{index}\t{}\t{}",
                if *configuration { "configuration" } else { "runtime" },
                escape(message)
            ),
        ),
    }
    let mixed: Vec<String> = record
        .steps
        .iter()
        .filter(|st| st.note == ParseNote::MixedWaitText)
        .map(|st| st.point.index.to_string())
        .collect();
    kv(
        "mixed_wait_steps",
        &if mixed.is_empty() { "none".to_string() } else { mixed.join(",") },
    );
    let _ = writeln!(s, "#steps\t{}", record.steps.len());
    for st in &record.steps {
        let (tag, text) = match &st.outcome {
            DecisionOutcome::Speak(u) => ("SPEAK", escape(u.text())),
            DecisionOutcome::Wait => match st.note {
                ParseNote::Clean => ("WAIT", String::new()),
                note => ("WAIT", note.tag().to_string()),
            },
        };
        let _ = write!(s, "{}\t{}\t{}\t{}", st.point.index, st.point.time, st.prompt_digest, tag);
        if !text.is_empty() {
            let _ = write!(s, "\t{text}");
        }
        s.push('\n');
    }
    format!("{TRACE_MAGIC}\n{s}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub index: usize,
    pub time: Seconds,
    pub digest: String,
    /// Utterance text for SPEAK; `None` for WAIT.
    pub text: Option<String>,
    /// Parse note recorded for WAIT steps (empty when clean).
    pub wait_note: String,
}

/// A trace read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub video_id: String,
    pub duration: Seconds,
    pub strategy: StrategyKind,
    pub language: Language,
    pub step: Seconds,
    pub rate_model: SpeechRateModel,
    pub model: String,
    pub templates: (String, String),
    pub complete: bool,
    pub status_line: String,
    pub mixed_wait_steps: Vec<usize>,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    /// Rebuilds the commentary track, re-estimating durations with the recorded rate model.
    pub fn track(&self) -> Result<CommentaryTrack, TraceError> {
        let mut track = CommentaryTrack::new(self.video_id.clone(), self.duration);
        for st in &self.steps {
            let Some(text) = &st.text else { continue };
            let bad = |reason: String| TraceError::Malformed {
                line: st.index,
                reason,
            };
            let d = estimate_duration(text, self.language, &self.rate_model)
                .map_err(|e| bad(e.to_string()))?;
            let u = Utterance::new(text.clone(), self.language, st.time, d)
                .map_err(|e| bad(e.to_string()))?;
            track.push(u).map_err(|e| bad(e.to_string()))?;
        }
        Ok(track)
    }
}

pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    let bad = |line: usize, reason: &str| TraceError::Malformed {
        line,
        reason: reason.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, l)) if l == TRACE_MAGIC => {}
        _ => return Err(bad(1, "missing trace header")),
    }
    let mut header = std::collections::HashMap::new();
    let mut step_count = None;
    for (no, line) in lines.by_ref() {
        if let Some(n) = line.strip_prefix("#steps\t") {
            step_count = Some(n.parse::<usize>().map_err(|_| bad(no, "bad step count"))?);
            break;
        }
        let (k, v) = line.split_once('\t').ok_or_else(|| bad(no, "expected key<TAB>value"))?;
        header.insert(k.to_string(), (no, v.to_string()));
    }
    let step_count = step_count.ok_or_else(|| bad(0, "missing #steps line"))?;
    let field = |k: &str| -> Result<(usize, &str), TraceError> {
        header
            .get(k)
            .map(|(n, v)| (*n, v.as_str()))
            .ok_or_else(|| bad(0, &format!("missing header field '{k}'")))
    };
    let seconds = |k: &str| -> Result<Seconds, TraceError> {
        let (n, v) = field(k)?;
        v.parse::<f64>()
            .ok()
            .and_then(|x| Seconds::new(x).ok())
            .ok_or_else(|| bad(n, &format!("bad {k}")))
    };
    let (n, strategy) = field("strategy")?;
    let strategy = strategy.parse().map_err(|_| bad(n, "bad strategy"))?;
    let (n, language) = field("language")?;
    let language = language.parse().map_err(|_| bad(n, "bad language"))?;
    let (n, rates) = field("rate_model")?;
    let rate_model = rates.parse().map_err(|_| bad(n, "bad rate model"))?;
    let (n, templates) = field("templates")?;
    let templates = templates
        .split_once('\t')
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .ok_or_else(|| bad(n, "expected two template ids"))?;
    let (n, mixed) = field("mixed_wait_steps")?;
    let mixed_wait_steps = if mixed == "none" {
        Vec::new()
    } else {
        mixed
            .split(',')
            .map(|x| x.parse().map_err(|_| bad(n, "bad mixed step index")))
            .collect::<Result<_, _>>()?
    };
    let status_line = unescape(field("status")?.1);

    let mut steps = Vec::with_capacity(step_count);
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.splitn(5, '\t').collect();
        if cols.len() < 4 {
            return Err(bad(no, "expected index, time, digest and outcome"));
        }
        let index = cols[0].parse().map_err(|_| bad(no, "bad index"))?;
        let time = cols[1]
            .parse::<f64>()
            .ok()
            .and_then(|x| Seconds::new(x).ok())
            .ok_or_else(|| bad(no, "bad time"))?;
        let rest = cols.get(4).map(|t| unescape(t)).unwrap_or_default();
        let (text, wait_note) = match cols[3] {
            "SPEAK" => (Some(rest), String::new()),
            "WAIT" => (None, rest),
            _ => return Err(bad(no, "outcome must be SPEAK or WAIT")),
        };
        steps.push(TraceStep {
            index,
            time,
            digest: cols[2].to_string(),
            text,
            wait_note,
        });
    }
    if steps.len() != step_count {
        return Err(bad(0, &format!("header announces {step_count} steps, found {}", steps.len())));
    }
    Ok(Trace {
        video_id: unescape(field("video_id")?.1),
        duration: seconds("duration")?,
        strategy,
        language,
        step: seconds("step")?,
        rate_model,
        model: unescape(field("model")?.1),
        templates,
        complete: status_line == "complete",
        status_line,
        mixed_wait_steps,
        steps,
    })
}

pub fn read_trace(path: &Path) -> Result<Trace, TraceError> {
    let text = std::fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_trace(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::ScriptedBackend;
    use crate::media::FrameStore;
    use crate::prompting::TemplateSet;
    use crate::strategies::{run_session, PromptSet, StrategyConfig};
    use crate::time::SimulatedClock;

    fn record() -> GenerationRecord {
        let store = FrameStore::synthetic("race\t01", Seconds::from_secs(10.0));
        let config = StrategyConfig::new(StrategyKind::Feedback, Language::En);
        let backend = ScriptedBackend::from_sequence(
            ["Red leads.\nBlue\tfollows.", "<WAIT>", "", "<WAIT> then blue"],
            "<WAIT>",
        );
        let prompts = PromptSet::new(TemplateSet::builtin("race-en").unwrap());
        run_session(&store, &config, &backend, &mut SimulatedClock::new(), &prompts).unwrap()
    }

    #[test]
    fn round_trip() {
        let r = record();
        let text = write_trace(&r);
        let t = parse_trace(&text).unwrap();
        assert_eq!(t.video_id, "race\t01");
        assert_eq!(t.steps.len(), 6);
        assert_eq!(t.mixed_wait_steps, vec![3]);
        assert_eq!(t.steps[2].wait_note, "empty-response-wait");
        assert!(t.complete);
        assert_eq!(t.track().unwrap(), r.track);
        let digests: Vec<_> = r.steps.iter().map(|s| s.prompt_digest.clone()).collect();
        assert_eq!(t.steps.iter().map(|s| s.digest.clone()).collect::<Vec<_>>(), digests);
    }

    #[test]
    fn step_lines_have_five_columns_for_speak() {
        let text = write_trace(&record());
        let speak = text.lines().find(|l| l.contains("\tSPEAK\t")).unwrap();
        assert_eq!(speak.split('\t').count(), 5);
        let wait = text.lines().find(|l| l.ends_with("\tWAIT")).unwrap();
        assert_eq!(wait.split('\t').count(), 4);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_trace("hello").is_err());
        let text = write_trace(&record()).replace("#steps\t6", "#steps\t7");
        assert!(parse_trace(&text).is_err());
    }
}
