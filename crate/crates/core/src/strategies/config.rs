use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lang::Language;
use crate::media::DEFAULT_WINDOW_CAP;
use crate::time::Seconds;

use super::rate::SpeechRateModel;

pub const DEFAULT_STEP: f64 = 2.0;
pub const DEFAULT_ICL_SHOTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Fixed interval, no history.
    Stateless,
    /// Fixed interval, prior utterances fed back.
    Feedback,
    /// Feedback plus in-context demonstrations.
    FeedbackIcl,
    /// Next query scheduled after the estimated speaking time of the last utterance.
    Realtime,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Stateless,
        StrategyKind::Feedback,
        StrategyKind::FeedbackIcl,
        StrategyKind::Realtime,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            StrategyKind::Stateless => "stateless",
            StrategyKind::Feedback => "feedback",
            StrategyKind::FeedbackIcl => "feedback-icl",
            StrategyKind::Realtime => "realtime",
        }
    }

    pub fn is_fixed_interval(self) -> bool {
        !matches!(self, StrategyKind::Realtime)
    }

    pub fn uses_history(self) -> bool {
        !matches!(self, StrategyKind::Stateless)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for StrategyKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stateless" => Ok(StrategyKind::Stateless),
            "feedback" => Ok(StrategyKind::Feedback),
            "feedback-icl" | "feedback_icl" | "icl" => Ok(StrategyKind::FeedbackIcl),
            "realtime" | "real-time" => Ok(StrategyKind::Realtime),
            other => Err(ConfigError::UnknownStrategy(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown strategy '{0}'")]
    UnknownStrategy(String),
    #[error("step must be positive")]
    NonPositiveStep,
    #[error("window cap must be positive")]
    ZeroWindowCap,
    #[error("{0} in-context shots requested but strategy is {1}")]
    ShotsWithoutIcl(usize, StrategyKind),
    #[error("no speech rate configured for language {0}")]
    MissingRate(Language),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub step: Seconds,
    pub window_cap: usize,
    pub icl_shots: usize,
    pub rate_model: SpeechRateModel,
    pub language: Language,
    /// Most recent utterances fed back as history; `None` keeps all of them.
    pub max_history: Option<usize>,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, language: Language) -> Self {
        Self {
            kind,
            step: Seconds::from_secs(DEFAULT_STEP),
            window_cap: DEFAULT_WINDOW_CAP,
            icl_shots: if kind == StrategyKind::FeedbackIcl {
                DEFAULT_ICL_SHOTS
            } else {
                0
            },
            rate_model: SpeechRateModel::default(),
            language,
            max_history: None,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Seconds::new(step).unwrap_or(Seconds::ZERO);
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.step.get() <= 0.0 {
            return Err(ConfigError::NonPositiveStep);
        }
        if self.window_cap == 0 {
            return Err(ConfigError::ZeroWindowCap);
        }
        if self.icl_shots > 0 && self.kind != StrategyKind::FeedbackIcl {
            return Err(ConfigError::ShotsWithoutIcl(self.icl_shots, self.kind));
        }
        if self.rate_model.get(self.language).is_none() {
            return Err(ConfigError::MissingRate(self.language));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = StrategyConfig::new(StrategyKind::FeedbackIcl, Language::En);
        assert_eq!(c.step.get(), 2.0);
        assert_eq!(c.icl_shots, 8);
        assert_eq!(c.window_cap, 30);
        assert_eq!(StrategyConfig::new(StrategyKind::Feedback, Language::En).icl_shots, 0);
        c.validate().unwrap();
    }

    #[test]
    fn validation() {
        let c = StrategyConfig::new(StrategyKind::Feedback, Language::En).with_step(0.0);
        assert_eq!(c.validate(), Err(ConfigError::NonPositiveStep));
        let mut c = StrategyConfig::new(StrategyKind::Feedback, Language::En);
        c.icl_shots = 2;
        assert!(matches!(c.validate(), Err(ConfigError::ShotsWithoutIcl(2, _))));
        let mut c = StrategyConfig::new(StrategyKind::Realtime, Language::Ja);
        c.rate_model = SpeechRateModel::empty();
        assert_eq!(c.validate(), Err(ConfigError::MissingRate(Language::Ja)));
    }

    #[test]
    fn parses_kinds() {
        for k in StrategyKind::ALL {
            assert_eq!(k.tag().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("greedy".parse::<StrategyKind>().is_err());
    }
}
