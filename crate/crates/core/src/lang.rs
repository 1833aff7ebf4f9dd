//! Language tags and the text-unit rules shared by duration estimation and metrics.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown language tag '{0}' (expected en or ja)")]
pub struct UnknownLanguage(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Language {
    En,
    Ja,
}

impl Language {
    pub fn tag(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Ja => "ja",
        }
    }

    /// The unit a language is counted in by default.
    pub fn default_unit(self) -> UnitKind {
        match self {
            Language::En => UnitKind::Word,
            Language::Ja => UnitKind::Character,
        }
    }

    /// Separator used when utterances are concatenated into one text.
    pub fn joiner(self) -> &'static str {
        match self {
            Language::En => " ",
            Language::Ja => "",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "ja" | "jp" => Ok(Language::Ja),
            other => Err(UnknownLanguage(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitKind {
    /// Maximal runs of non-whitespace.
    Word,
    /// Non-whitespace characters, punctuation included.
    Character,
}

impl UnitKind {
    pub fn tag(self) -> &'static str {
        match self {
            UnitKind::Word => "word",
            UnitKind::Character => "char",
        }
    }
}

impl FromStr for UnitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "word" | "words" => Ok(UnitKind::Word),
            "char" | "chars" | "character" | "characters" => Ok(UnitKind::Character),
            other => Err(format!("unknown unit kind '{other}' (expected word or char)")),
        }
    }
}

pub fn count_units(text: &str, unit: UnitKind) -> usize {
    match unit {
        UnitKind::Word => text.split_whitespace().count(),
        UnitKind::Character => text.chars().filter(|c| !c.is_whitespace()).count(),
    }
}

/// Splits text into units. Words are borrowed slices, characters are one-char slices.
pub fn units(text: &str, unit: UnitKind) -> Vec<&str> {
    match unit {
        UnitKind::Word => text.split_whitespace().collect(),
        UnitKind::Character => text
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| &text[i..i + c.len_utf8()])
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_are_whitespace_runs() {
        assert_eq!(count_units("  the red\tcar\n leads ", UnitKind::Word), 4);
        assert_eq!(count_units("   ", UnitKind::Word), 0);
    }

    #[test]
    fn characters_skip_whitespace_keep_punctuation() {
        assert_eq!(count_units("赤い車が、 先頭！", UnitKind::Character), 8);
        assert_eq!(units("a b", UnitKind::Character), vec!["a", "b"]);
    }

    #[test]
    fn parses_tags() {
        assert_eq!("EN".parse::<Language>().unwrap(), Language::En);
        assert_eq!("jp".parse::<Language>().unwrap(), Language::Ja);
        assert!("fr".parse::<Language>().is_err());
    }
}
