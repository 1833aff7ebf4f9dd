//! Prompt templates, rendering with history and demonstrations, and reply parsing.

use std::path::PathBuf;

use thiserror::Error;

mod parse;
mod render;
mod template;

pub use parse::{
    is_wait_only, normalize_utterance, parse_response, ParseNote, ParsedResponse, WAIT_TOKEN,
};
pub use render::{
    load_demonstrations, parse_demonstrations, prompt_digest, render_decision, render_init,
    sample_demonstrations, serialize_history, Demonstration, RenderedPrompt, EMPTY_HISTORY,
    IMAGE_MARKER,
};
pub use template::{PromptTemplate, TemplateKind, TemplateSet, CONTEXT_PLACEHOLDER};

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("expected a {} template, got a {} template", expected.tag(), found.tag())]
    WrongKind {
        expected: TemplateKind,
        found: TemplateKind,
    },
    #[error("template {id}: {reason}")]
    InvalidTemplate { id: String, reason: String },
    #[error("template file: {reason}")]
    TemplateFile { reason: String },
    #[error("frame window is empty")]
    EmptyWindow,
    #[error("demonstration utterance is empty")]
    EmptyDemonstration,
    #[error("demonstration line {line}: expected `uri<TAB>utterance_text`")]
    DemonstrationLine { line: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
