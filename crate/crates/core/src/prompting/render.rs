use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::lang::Language;
use crate::media::{FrameRef, FrameWindow};
use crate::time::Seconds;

use super::template::{PromptTemplate, TemplateKind, CONTEXT_PLACEHOLDER};
use super::PromptError;

/// Rendered in place of `{context}` when there is no history yet.
pub const EMPTY_HISTORY: &str = "none";

/// Marker placed in the text wherever an attached image belongs.
pub const IMAGE_MARKER: &str = "<image>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demonstration {
    pub frames: FrameWindow,
    pub utterance_text: String,
}

impl Demonstration {
    pub fn new(uri: impl Into<String>, utterance_text: impl Into<String>) -> Result<Self, PromptError> {
        let utterance_text = utterance_text.into();
        if utterance_text.trim().is_empty() {
            return Err(PromptError::EmptyDemonstration);
        }
        let frame = FrameRef {
            video_id: "demo".into(),
            second: 0,
            uri: uri.into(),
        };
        Ok(Self {
            frames: FrameWindow {
                frames: vec![frame],
                window_start: Seconds::ZERO,
                window_end: Seconds::from_secs(1.0),
            },
            utterance_text,
        })
    }
}

/// Parses demonstration lines of the form `uri<TAB>utterance_text`.
pub fn parse_demonstrations(text: &str) -> Result<Vec<Demonstration>, PromptError> {
    let mut demos = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (uri, utterance) = line.split_once('\t').ok_or(PromptError::DemonstrationLine {
            line: i + 1,
        })?;
        demos.push(Demonstration::new(uri.trim(), utterance.trim())?);
    }
    Ok(demos)
}

pub fn load_demonstrations(path: impl AsRef<Path>) -> Result<Vec<Demonstration>, PromptError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| PromptError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_demonstrations(&text)
}

/// Uniformly samples `shots` demonstrations without replacement, deterministically for a seed.
pub fn sample_demonstrations(pool: &[Demonstration], shots: usize, seed: u64) -> Vec<Demonstration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.choose_multiple(&mut rng, shots.min(pool.len()))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedPrompt {
    pub text: String,
    /// Demonstration frames first, then the current window in ascending order.
    pub attachments: Vec<String>,
    pub digest: String,
}

impl RenderedPrompt {
    pub fn new(text: String, attachments: Vec<String>) -> Self {
        let digest = prompt_digest(&text, &attachments);
        Self {
            text,
            attachments,
            digest,
        }
    }
}

/// 16 hex chars of SHA-256 over the text and the attachment list.
pub fn prompt_digest(text: &str, attachments: &[String]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher.update([0u8]);
    for uri in attachments {
        hasher.update(uri.as_bytes());
        hasher.update(b"\n");
    }
    let bytes = hasher.finalize();
    hex::encode(&bytes[..8])
}

fn check_kind(template: &PromptTemplate, expected: TemplateKind) -> Result<(), PromptError> {
    if template.kind != expected {
        return Err(PromptError::WrongKind {
            expected,
            found: template.kind,
        });
    }
    Ok(())
}

pub fn render_init(template: &PromptTemplate, window: &FrameWindow) -> Result<RenderedPrompt, PromptError> {
    check_kind(template, TemplateKind::Init)?;
    if window.is_empty() {
        return Err(PromptError::EmptyWindow);
    }
    let text = template.text();
    let attachments = window.uris().map(str::to_string).collect();
    Ok(RenderedPrompt::new(text, attachments))
}

/// Numbered lines, oldest first.
pub fn serialize_history<S: AsRef<str>>(history: &[S]) -> String {
    if history.is_empty() {
        return EMPTY_HISTORY.to_string();
    }
    history
        .iter()
        .enumerate()
        .map(|(i, h)| format!("{}. {}", i + 1, h.as_ref()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn demo_labels(language: Language) -> (&'static str, &'static str) {
    match language {
        Language::En => ("Example", "Commentary:"),
        Language::Ja => ("例", "実況:"),
    }
}

pub fn render_decision<S: AsRef<str>>(
    template: &PromptTemplate,
    history: &[S],
    demos: &[Demonstration],
    window: &FrameWindow,
) -> Result<RenderedPrompt, PromptError> {
    check_kind(template, TemplateKind::Decision)?;
    if window.is_empty() {
        return Err(PromptError::EmptyWindow);
    }
    let mut text = template.role_preamble.clone();
    let mut attachments = Vec::new();
    let (example, answer) = demo_labels(template.language);
    for (i, demo) in demos.iter().enumerate() {
        let markers = vec![IMAGE_MARKER; demo.frames.len()].join(" ");
        text.push_str(&format!(
            "\n{example} {}: {markers}\n{answer} {}",
            i + 1,
            demo.utterance_text
        ));
        attachments.extend(demo.frames.uris().map(str::to_string));
    }
    if !template.body.is_empty() {
        text.push('\n');
        text.push_str(
            &template
                .body
                .replace(CONTEXT_PLACEHOLDER, &serialize_history(history)),
        );
    }
    attachments.extend(window.uris().map(str::to_string));
    Ok(RenderedPrompt::new(text, attachments))
}
