use std::collections::HashMap;
use std::path::Path;

use crate::prompting::WAIT_TOKEN;
use crate::time::Seconds;

use super::{BackendError, Generator, GeneratorRequest, GeneratorResponse};

/// Replies from a fixed script keyed by prompt digest or decision index.
///
/// Script files hold one `key<TAB>response` per line, where key is a decision
/// index, `digest:<hex>`, or `default`. In responses `\n`, `\t` and `\\` are escapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptedBackend {
    by_index: HashMap<usize, String>,
    by_digest: HashMap<String, String>,
    default: String,
}

impl Default for ScriptedBackend {
    fn default() -> Self {
        Self::new(WAIT_TOKEN)
    }
}

impl ScriptedBackend {
    pub fn new(default: impl Into<String>) -> Self {
        Self {
            by_index: HashMap::new(),
            by_digest: HashMap::new(),
            default: default.into(),
        }
    }

    /// Responses for indices 0, 1, 2, ... in order; later indices get `default`.
    pub fn from_sequence<I, S>(responses: I, default: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut b = Self::new(default);
        for (i, r) in responses.into_iter().enumerate() {
            b.by_index.insert(i, r.into());
        }
        b
    }

    pub fn at_index(mut self, index: usize, response: impl Into<String>) -> Self {
        self.by_index.insert(index, response.into());
        self
    }

    pub fn at_digest(mut self, digest: impl Into<String>, response: impl Into<String>) -> Self {
        self.by_digest.insert(digest.into(), response.into());
        self
    }

    pub fn response_for(&self, request: &GeneratorRequest) -> &str {
        self.by_digest
            .get(&request.prompt.digest)
            .or_else(|| self.by_index.get(&request.context.index))
            .unwrap_or(&self.default)
    }

    pub fn parse(text: &str) -> Result<Self, BackendError> {
        let mut b = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || BackendError::Config(format!("script line {}: expected `key<TAB>response`", i + 1));
            let (key, response) = line.split_once('\t').ok_or_else(bad)?;
            let response = unescape(response);
            let key = key.trim();
            if key == "default" {
                b.default = response;
            } else if let Some(d) = key.strip_prefix("digest:") {
                b.by_digest.insert(d.to_string(), response);
            } else {
                let idx: usize = key.parse().map_err(|_| bad())?;
                b.by_index.insert(idx, response);
            }
        }
        Ok(b)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("script {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

impl Generator for ScriptedBackend {
    fn generate(&self, request: &GeneratorRequest) -> Result<GeneratorResponse, BackendError> {
        Ok(GeneratorResponse {
            raw_text: self.response_for(request).to_string(),
            latency: Seconds::ZERO,
            model_id: request.model_id.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::request;
    use super::*;

    #[test]
    fn index_lookup() {
        let b = ScriptedBackend::new("Red leads.").at_index(3, "<WAIT>");
        let r = b.generate(&request(3, "p")).unwrap();
        assert_eq!(r.raw_text, "<WAIT>");
        assert_eq!(r.latency, Seconds::ZERO);
        assert_eq!(b.generate(&request(2, "p")).unwrap().raw_text, "Red leads.");
    }

    #[test]
    fn digest_beats_index() {
        let req = request(0, "prompt");
        let b = ScriptedBackend::new("d")
            .at_index(0, "by index")
            .at_digest(req.prompt.digest.clone(), "by digest");
        assert_eq!(b.generate(&req).unwrap().raw_text, "by digest");
    }

    #[test]
    fn parses_script_file() {
        let b = ScriptedBackend::parse("# script\n0\tRed leads.\\nBlue second.\ndefault\t<WAIT>\ndigest:abc\tx\n").unwrap();
        assert_eq!(b.generate(&request(0, "p")).unwrap().raw_text, "Red leads.\nBlue second.");
        assert_eq!(b.generate(&request(9, "p")).unwrap().raw_text, "<WAIT>");
        assert!(ScriptedBackend::parse("zero\tx").is_err());
        assert!(ScriptedBackend::parse("0 x").is_err());
    }
}
