use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::lang::Language;

use super::PromptError;

pub const CONTEXT_PLACEHOLDER: &str = "{context}";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    Init,
    Decision,
}

impl TemplateKind {
    pub fn tag(self) -> &'static str {
        match self {
            TemplateKind::Init => "init",
            TemplateKind::Decision => "decision",
        }
    }
}

impl FromStr for TemplateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "init" => Ok(TemplateKind::Init),
            "decision" => Ok(TemplateKind::Decision),
            other => Err(format!("unknown template kind '{other}'")),
        }
    }
}

/// A prompt template. The first line of the template text is the role preamble,
/// the rest is the body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: String,
    pub language: Language,
    pub kind: TemplateKind,
    pub role_preamble: String,
    pub body: String,
}

impl PromptTemplate {
    pub fn new(
        id: impl Into<String>,
        language: Language,
        kind: TemplateKind,
        text: &str,
    ) -> Result<Self, PromptError> {
        let id = id.into();
        let text = text.trim_matches(|c| c == '\n' || c == '\r');
        let (role_preamble, body) = match text.split_once('\n') {
            Some((first, rest)) => (first.trim_end_matches('\r'), rest),
            None => (text, ""),
        };
        let has_context = text.contains(CONTEXT_PLACEHOLDER);
        match kind {
            TemplateKind::Decision if !has_context => {
                return Err(PromptError::InvalidTemplate {
                    id,
                    reason: "decision template lacks the {context} placeholder".into(),
                })
            }
            TemplateKind::Init if has_context => {
                return Err(PromptError::InvalidTemplate {
                    id,
                    reason: "init template must not contain {context}".into(),
                })
            }
            _ => {}
        }
        if role_preamble.contains(CONTEXT_PLACEHOLDER) {
            return Err(PromptError::InvalidTemplate {
                id,
                reason: "{context} must appear in the body, not the first line".into(),
            });
        }
        Ok(Self {
            id,
            language,
            kind,
            role_preamble: role_preamble.to_string(),
            body: body.to_string(),
        })
    }

    /// Parses a template file: `id:`, `language:` and `kind:` header lines, then the body.
    pub fn parse(text: &str) -> Result<Self, PromptError> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let mut lines = text.split_inclusive('\n');
        let mut header = |name: &str| -> Result<String, PromptError> {
            let line = lines.next().ok_or_else(|| PromptError::TemplateFile {
                reason: format!("missing `{name}:` header line"),
            })?;
            let value = line
                .trim_end()
                .strip_prefix(name)
                .and_then(|rest| rest.strip_prefix(':'))
                .ok_or_else(|| PromptError::TemplateFile {
                    reason: format!("expected `{name}:` header, found '{}'", line.trim_end()),
                })?;
            Ok(value.trim().to_string())
        };
        let id = header("id")?;
        let language = header("language")?
            .parse::<Language>()
            .map_err(|e| PromptError::TemplateFile {
                reason: e.to_string(),
            })?;
        let kind = header("kind")?
            .parse::<TemplateKind>()
            .map_err(|reason| PromptError::TemplateFile { reason })?;
        let body: String = lines.collect();
        Self::new(id, language, kind, &body)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PromptError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PromptError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Full template text (preamble and body).
    pub fn text(&self) -> String {
        if self.body.is_empty() {
            self.role_preamble.clone()
        } else {
            format!("{}\n{}", self.role_preamble, self.body)
        }
    }

    pub fn to_file_string(&self) -> String {
        format!(
            "id: {}\nlanguage: {}\nkind: {}\n{}\n",
            self.id,
            self.language,
            self.kind.tag(),
            self.text()
        )
    }
}

/// The init and decision templates used by one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub init: PromptTemplate,
    pub decision: PromptTemplate,
}

impl TemplateSet {
    pub fn new(init: PromptTemplate, decision: PromptTemplate) -> Result<Self, PromptError> {
        if init.kind != TemplateKind::Init {
            return Err(PromptError::WrongKind {
                expected: TemplateKind::Init,
                found: init.kind,
            });
        }
        if decision.kind != TemplateKind::Decision {
            return Err(PromptError::WrongKind {
                expected: TemplateKind::Decision,
                found: decision.kind,
            });
        }
        if init.language != decision.language {
            return Err(PromptError::InvalidTemplate {
                id: decision.id.clone(),
                reason: format!(
                    "language {} does not match init template language {}",
                    decision.language, init.language
                ),
            });
        }
        Ok(Self { init, decision })
    }

    pub fn language(&self) -> Language {
        self.init.language
    }

    /// One of the shipped presets: `race-en`, `race-ja`, `fight-ja`.
    pub fn builtin(id: &str) -> Option<Self> {
        let (language, init, decision) = match id {
            "race-en" => (Language::En, RACE_EN_INIT, RACE_EN_DECISION),
            "race-ja" => (Language::Ja, RACE_JA_INIT, RACE_JA_DECISION),
            "fight-ja" => (Language::Ja, FIGHT_JA_INIT, FIGHT_JA_DECISION),
            _ => return None,
        };
        let init = PromptTemplate::new(format!("{id}-init"), language, TemplateKind::Init, init)
            .expect("builtin init template");
        let decision = PromptTemplate::new(
            format!("{id}-decision"),
            language,
            TemplateKind::Decision,
            decision,
        )
        .expect("builtin decision template");
        Some(Self { init, decision })
    }

    pub const BUILTIN_IDS: [&'static str; 3] = ["race-en", "race-ja", "fight-ja"];

    /// Loads every `*.txt` template in a directory; exactly one of each kind must exist.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        let entries = std::fs::read_dir(dir).map_err(|source| PromptError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        paths.sort();
        let mut init = None;
        let mut decision = None;
        for path in paths {
            let t = PromptTemplate::load(&path)?;
            let slot = match t.kind {
                TemplateKind::Init => &mut init,
                TemplateKind::Decision => &mut decision,
            };
            if slot.is_some() {
                return Err(PromptError::TemplateFile {
                    reason: format!(
                        "{} holds more than one {} template",
                        dir.display(),
                        t.kind.tag()
                    ),
                });
            }
            *slot = Some(t);
        }
        let missing = |kind: &str| PromptError::TemplateFile {
            reason: format!("{} has no {kind} template", dir.display()),
        };
        Self::new(
            init.ok_or_else(|| missing("init"))?,
            decision.ok_or_else(|| missing("decision"))?,
        )
    }

    /// A preset id or a template directory.
    pub fn resolve(spec: &str) -> Result<Self, PromptError> {
        match Self::builtin(spec) {
            Some(set) => Ok(set),
            None if Path::new(spec).is_dir() => Self::load_dir(spec),
            None => Err(PromptError::TemplateFile {
                reason: format!(
                    "'{spec}' is neither a preset ({}) nor a template directory",
                    Self::BUILTIN_IDS.join(", ")
                ),
            }),
        }
    }
}

const RACE_EN_INIT: &str = "\
You are a professional commentator for car racing games. You will be provided with a video clip that represents the start of a race. Your task is to generate one sentence of commentary.
1) You should identify the number of players and their names, along with cars.
2) Ignore the background information and refrain from describing the scenery.
3) Initial information about the game without being too verbose.";

const RACE_JA_INIT: &str = "\
あなたはカーレースのプロの実況者です。これからレース開始時のビデオクリップが提示されます。
それに対して1文の日本語実況を生成してください。
冗長になりすぎず、レースの初期情報を伝えてください。人名や車種には言及せず「プレイヤー」や車の色を使って説明してください．";

const FIGHT_JA_INIT: &str = "\
あなたは大乱闘スマッシュブラザーズのプロの実況者です。これから対戦開始時のビデオクリップが提示されます。
このシーンを1文で説明する日本語の実況を生成し視聴者を楽しませてください。
観客が没入できるよう驚きや感嘆句も含めてエキサイティングな実況となるよう心がけてください。話すべきことがなければ <WAIT> を出力してください。";

const RACE_EN_DECISION: &str = "\
You are a professional commentator for car racing games. You are provided with a video clip from an ongoing car racing game and commentary generated for the game so far.
Previous generated Commentary: {context}
Your task is to compare the given video with the previously generated commentary.
1) Identify if the video has any new development as compared to the already provided commentary.
2) Ignore the background information and refrain from describing the scenery too much.
3) If the state of the game as compared to the provided commentary has not changed, then generate <WAIT>
4) If there are new developments in the provided video, then generate 1 - 2 lines of commentary to describe it.";

const RACE_JA_DECISION: &str = "\
あなたはカーレースのプロの実況者です。以下に示すのは現在進行中のレースのビデオクリップと、これまでに生成された実況です。
これまでの実況: {context}
以下のルールに従って日本語実況を1〜2文生成してください：
1) 新たな展開があるかどうかを特定してください。
2) 背景や風景の描写は避けてください
3) 変化がある場合は、それを説明する1文の実況を生成してください。
4) 人名や車種には言及せず「プレイヤー」や車の色を使って説明してください．";

// Shipped as published, including its racing wording.
const FIGHT_JA_DECISION: &str = "\
あなたはカーレースのプロの実況者です。以下に示すのは現在進行中のレースのビデオクリップと、これまでに生成された実況です。
これまでの実況: {context}
ビデオに新たな展開があるかどうかを比較・分析し、以下のルールに従って日本語実況を生成してください：
1) 新たな展開があるかどうかを特定してください。
2) 状況に変化がなければ <WAIT> を出力してください。
3) 明確な変化があれば、それを説明する1文の実況を生成してください。
4) 人名や車種には言及せず「プレイヤー」や車の色を使って説明してください";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid() {
        for id in TemplateSet::BUILTIN_IDS {
            let set = TemplateSet::builtin(id).unwrap();
            assert!(set.decision.body.contains(CONTEXT_PLACEHOLDER));
            assert!(!set.init.text().contains(CONTEXT_PLACEHOLDER));
        }
        assert!(TemplateSet::builtin("chess-en").is_none());
    }

    #[test]
    fn decision_requires_context() {
        let err = PromptTemplate::new("x", Language::En, TemplateKind::Decision, "role\nno slot");
        assert!(matches!(err, Err(PromptError::InvalidTemplate { .. })));
        let err = PromptTemplate::new("x", Language::En, TemplateKind::Init, "role\n{context}");
        assert!(matches!(err, Err(PromptError::InvalidTemplate { .. })));
    }

    #[test]
    fn file_format_round_trips() {
        let set = TemplateSet::builtin("race-ja").unwrap();
        let parsed = PromptTemplate::parse(&set.decision.to_file_string()).unwrap();
        assert_eq!(parsed, set.decision);
    }

    #[test]
    fn file_header_errors() {
        assert!(PromptTemplate::parse("id: a\nkind: init\nbody").is_err());
        assert!(PromptTemplate::parse("id: a\nlanguage: xx\nkind: init\nbody").is_err());
        let t = PromptTemplate::parse("id: a\nlanguage: en\nkind: init\nYou are X.\nSay hi.\n")
            .unwrap();
        assert_eq!(t.role_preamble, "You are X.");
        assert_eq!(t.body, "Say hi.");
    }

    #[test]
    fn loads_template_directory() {
        let dir = tempfile::tempdir().unwrap();
        let set = TemplateSet::builtin("race-en").unwrap();
        std::fs::write(dir.path().join("a.txt"), set.init.to_file_string()).unwrap();
        std::fs::write(dir.path().join("b.txt"), set.decision.to_file_string()).unwrap();
        let loaded = TemplateSet::resolve(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(loaded, set);
        assert!(TemplateSet::resolve("/nonexistent-dir").is_err());
    }
}
