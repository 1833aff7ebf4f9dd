//! Decoding schedulers (Stateless, Feedback, Feedback with ICL, Realtime) and the session loop.

mod config;
mod rate;
mod schedule;
mod session;

pub use config::{ConfigError, StrategyConfig, StrategyKind, DEFAULT_ICL_SHOTS, DEFAULT_STEP};
pub use rate::{estimate_duration, RateError, SpeechRate, SpeechRateModel};
pub use schedule::{next_decision_time, select_window};
pub use session::{
    run_session, run_session_with, DecisionPoint, GenerationRecord, PromptSet, SessionError,
    SessionStatus, SessionStep,
};
