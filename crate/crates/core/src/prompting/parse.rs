//! Interpreting raw backend replies as Speak or Wait.

use crate::lang::Language;

pub const WAIT_TOKEN: &str = "<WAIT>";

/// Audit tag attached to a parsed reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseNote {
    /// Plain utterance or bare WAIT token.
    Clean,
    /// The reply was empty (or had no content at all) and was read as Wait.
    EmptyResponseWait,
    /// The reply mentioned WAIT next to other content and was kept as speech.
    MixedWaitText,
}

impl ParseNote {
    pub fn tag(self) -> &'static str {
        match self {
            ParseNote::Clean => "clean",
            ParseNote::EmptyResponseWait => "empty-response-wait",
            ParseNote::MixedWaitText => "mixed-wait-text",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedResponse {
    Speak { text: String, note: ParseNote },
    Wait { note: ParseNote },
}

impl ParsedResponse {
    pub fn is_wait(&self) -> bool {
        matches!(self, ParsedResponse::Wait { .. })
    }

    pub fn note(&self) -> ParseNote {
        match self {
            ParsedResponse::Speak { note, .. } | ParsedResponse::Wait { note } => *note,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match self {
            ParsedResponse::Speak { text, .. } => Some(text),
            ParsedResponse::Wait { .. } => None,
        }
    }
}

/// Drops markup tags such as `<answer>` or `</b>`, keeping `<WAIT>` and anything
/// that does not look like a tag.
fn strip_tags(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(open) = rest.find('<') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('>') {
            Some(close) => {
                let inner = after[..close].trim().trim_matches('/').trim();
                let is_tag = !inner.is_empty()
                    && inner
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
                if is_tag && !inner.eq_ignore_ascii_case("wait") {
                    out.push(' ');
                } else {
                    out.push_str(&rest[open..open + 1 + close + 1]);
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

fn content_tokens(raw: &str) -> Vec<String> {
    strip_tags(raw)
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn is_wait_word(token: &str) -> bool {
    token.eq_ignore_ascii_case("wait")
}

/// True when WAIT is the only content-bearing element of `text`.
pub fn is_wait_only(text: &str) -> bool {
    let tokens = content_tokens(text);
    !tokens.is_empty() && tokens.iter().all(|t| is_wait_word(t))
}

/// Trimmed, with line breaks collapsed to single spaces.
pub fn normalize_utterance(raw: &str) -> String {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_response(raw: &str, _language: Language) -> ParsedResponse {
    let tokens = content_tokens(raw);
    if raw.trim().is_empty() || tokens.is_empty() {
        return ParsedResponse::Wait {
            note: ParseNote::EmptyResponseWait,
        };
    }
    let waits = tokens.iter().filter(|t| is_wait_word(t)).count();
    if waits == tokens.len() {
        return ParsedResponse::Wait {
            note: ParseNote::Clean,
        };
    }
    let note = if waits > 0 {
        ParseNote::MixedWaitText
    } else {
        ParseNote::Clean
    };
    ParsedResponse::Speak {
        text: normalize_utterance(raw),
        note,
    }
}
