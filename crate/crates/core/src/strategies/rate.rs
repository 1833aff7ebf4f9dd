use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lang::{count_units, Language, UnitKind};
use crate::time::Seconds;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("no speech rate configured for language {0}")]
    Unconfigured(Language),
    #[error("text has no countable units")]
    NoUnits,
    #[error("speech rate for {language} must be positive, got {rate}")]
    NonPositive { language: Language, rate: f64 },
    #[error("bad rate model '{0}' (expected e.g. en=word:4,ja=char:8)")]
    Syntax(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeechRate {
    pub unit: UnitKind,
    /// Units per second.
    pub rate: f64,
}

/// Fixed speaking speed per language, used to turn text length into time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeechRateModel {
    entries: BTreeMap<Language, SpeechRate>,
}

impl Default for SpeechRateModel {
    /// 4 words/s for English, 8 characters/s for Japanese.
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(
            Language::En,
            SpeechRate {
                unit: UnitKind::Word,
                rate: 4.0,
            },
        );
        entries.insert(
            Language::Ja,
            SpeechRate {
                unit: UnitKind::Character,
                rate: 8.0,
            },
        );
        Self { entries }
    }
}

impl SpeechRateModel {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with(mut self, language: Language, unit: UnitKind, rate: f64) -> Result<Self, RateError> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(RateError::NonPositive { language, rate });
        }
        self.entries.insert(language, SpeechRate { unit, rate });
        Ok(self)
    }

    pub fn get(&self, language: Language) -> Option<SpeechRate> {
        self.entries.get(&language).copied()
    }

    /// Unit kind for a language, falling back to the language default.
    pub fn unit_for(&self, language: Language) -> UnitKind {
        self.get(language)
            .map(|r| r.unit)
            .unwrap_or_else(|| language.default_unit())
    }
}

impl fmt::Display for SpeechRateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(lang, r)| format!("{lang}={}:{}", r.unit.tag(), r.rate))
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for SpeechRateModel {
    type Err = RateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || RateError::Syntax(s.to_string());
        let mut model = SpeechRateModel::empty();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (lang, spec) = part.split_once('=').ok_or_else(syntax)?;
            let language: Language = lang.parse().map_err(|_| syntax())?;
            let (unit, rate) = match spec.split_once(':') {
                Some((u, r)) => (u.parse::<UnitKind>().map_err(|_| syntax())?, r),
                None => (language.default_unit(), spec),
            };
            let rate: f64 = rate.trim().parse().map_err(|_| syntax())?;
            model = model.with(language, unit, rate)?;
        }
        if model.entries.is_empty() {
            return Err(syntax());
        }
        Ok(model)
    }
}

/// Estimated speaking time `w / r`, with `w` counted in the language's unit.
pub fn estimate_duration(
    text: &str,
    language: Language,
    rates: &SpeechRateModel,
) -> Result<Seconds, RateError> {
    let rate = rates.get(language).ok_or(RateError::Unconfigured(language))?;
    let units = count_units(text, rate.unit);
    if units == 0 {
        return Err(RateError::NoUnits);
    }
    Ok(Seconds::from_secs(units as f64 / rate.rate))
}
