//! Running one video end to end under a decoding strategy.

use thiserror::Error;

use crate::backend::{BackendError, Generator, GeneratorRequest, RequestContext, RequestParams};
use crate::media::{FrameStore, FrameWindow, MediaError};
use crate::prompting::{
    parse_response, render_decision, render_init, sample_demonstrations, Demonstration, ParseNote,
    ParsedResponse, PromptError, TemplateSet,
};
use crate::time::{Clock, Seconds};
use crate::track::{CommentaryTrack, DecisionOutcome, TrackError, Utterance};

use super::config::{ConfigError, StrategyConfig, StrategyKind};
use super::rate::{estimate_duration, RateError};
use super::schedule::{next_decision_time, select_window};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("templates are {templates} but the strategy language is {config}")]
    LanguageMismatch {
        templates: crate::lang::Language,
        config: crate::lang::Language,
    },
    #[error("feedback-icl needs {needed} demonstrations, only {available} available")]
    MissingDemonstrations { needed: usize, available: usize },
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Templates plus the demonstrations chosen for this session.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    pub templates: TemplateSet,
    pub demos: Vec<Demonstration>,
}

impl PromptSet {
    pub fn new(templates: TemplateSet) -> Self {
        Self {
            templates,
            demos: Vec::new(),
        }
    }

    /// Draws `shots` demonstrations from `pool` with a seeded uniform sample.
    pub fn with_sampled_demos(templates: TemplateSet, pool: &[Demonstration], shots: usize, seed: u64) -> Self {
        Self {
            templates,
            demos: sample_demonstrations(pool, shots, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionPoint {
    pub index: usize,
    pub time: Seconds,
    pub window: FrameWindow,
    pub history_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionStep {
    pub point: DecisionPoint,
    pub prompt_digest: String,
    pub raw_response: String,
    pub outcome: DecisionOutcome,
    pub note: ParseNote,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionStatus {
    Complete,
    /// The backend failed at step `index`; steps before it are kept.
    Aborted {
        index: usize,
        message: String,
        /// Failure caused by setup (cold cache, bad credentials) rather than the run itself.
        configuration: bool,
    },
}

/// Full trace of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub video_id: String,
    pub video_duration: Seconds,
    pub config: StrategyConfig,
    pub template_ids: (String, String),
    pub model_id: String,
    pub steps: Vec<SessionStep>,
    pub track: CommentaryTrack,
    pub status: SessionStatus,
}

impl GenerationRecord {
    pub fn is_complete(&self) -> bool {
        self.status == SessionStatus::Complete
    }

    pub fn decision_times(&self) -> Vec<Seconds> {
        self.steps.iter().map(|s| s.point.time).collect()
    }
}

pub fn run_session<G: Generator + ?Sized>(
    store: &FrameStore,
    config: &StrategyConfig,
    backend: &G,
    clock: &mut dyn Clock,
    prompts: &PromptSet,
) -> Result<GenerationRecord, SessionError> {
    run_session_with(store, config, backend, clock, prompts, &RequestParams::default())
}

pub fn run_session_with<G: Generator + ?Sized>(
    store: &FrameStore,
    config: &StrategyConfig,
    backend: &G,
    clock: &mut dyn Clock,
    prompts: &PromptSet,
    params: &RequestParams,
) -> Result<GenerationRecord, SessionError> {
    config.validate()?;
    let templates = &prompts.templates;
    if templates.language() != config.language {
        return Err(SessionError::LanguageMismatch {
            templates: templates.language(),
            config: config.language,
        });
    }
    let demos: &[Demonstration] = if config.kind == StrategyKind::FeedbackIcl {
        if prompts.demos.len() < config.icl_shots {
            return Err(SessionError::MissingDemonstrations {
                needed: config.icl_shots,
                available: prompts.demos.len(),
            });
        }
        &prompts.demos[..config.icl_shots]
    } else {
        &[]
    };

    let duration = store.video_duration();
    let mut record = GenerationRecord {
        video_id: store.video_id().to_string(),
        video_duration: duration,
        config: config.clone(),
        template_ids: (templates.init.id.clone(), templates.decision.id.clone()),
        model_id: params.model_id.clone(),
        steps: Vec::new(),
        track: CommentaryTrack::new(store.video_id(), duration),
        status: SessionStatus::Complete,
    };

    let mut t = Seconds::ZERO;
    let mut previous: Option<Seconds> = None;
    let mut grid: u64 = 0;
    clock.advance_to(t);
    for index in 0.. {
        let window = select_window(config, store, t, previous.unwrap_or(Seconds::ZERO))?;
        let history: Vec<&str> = if config.kind.uses_history() {
            let texts = record.track.utterances().iter().map(Utterance::text);
            let all: Vec<&str> = texts.collect();
            let keep = config.max_history.unwrap_or(all.len()).min(all.len());
            all[all.len() - keep..].to_vec()
        } else {
            Vec::new()
        };
        let prompt = if index == 0 {
            render_init(&templates.init, &window)?
        } else {
            render_decision(&templates.decision, &history, demos, &window)?
        };
        let request = GeneratorRequest {
            prompt,
            model_id: params.model_id.clone(),
            max_output_units: params.max_output_units,
            temperature: params.temperature,
            context: RequestContext {
                video_id: record.video_id.clone(),
                index,
                time: t,
                previous_time: previous,
            },
        };
        let point = DecisionPoint {
            index,
            time: t,
            window,
            history_len: history.len(),
        };

        let response = match backend.generate(&request) {
            Ok(r) => r,
            Err(e) => {
                record.status = aborted(index, &e);
                break;
            }
        };
        let parsed = parse_response(&response.raw_text, config.language);
        let note = parsed.note();
        let outcome = match parsed {
            ParsedResponse::Wait { .. } => DecisionOutcome::Wait,
            ParsedResponse::Speak { text, .. } => match speak(config, &text, t) {
                Ok(u) => DecisionOutcome::Speak(u),
                Err(message) => {
                    record.status = SessionStatus::Aborted {
                        index,
                        message,
                        configuration: false,
                    };
                    break;
                }
            },
        };
        if let DecisionOutcome::Speak(u) = &outcome {
            if let Err(e) = record.track.push(u.clone()) {
                record.status = SessionStatus::Aborted {
                    index,
                    message: e.to_string(),
                    configuration: false,
                };
                break;
            }
        }

        let scheduled = if config.kind.is_fixed_interval() {
            // Grid arithmetic keeps fixed decisions exactly at k * step.
            let step = config.step.get();
            grid += 1;
            while grid as f64 * step <= t.get() {
                grid += 1;
            }
            Seconds::from_secs(grid as f64 * step)
        } else {
            next_decision_time(config, t, &outcome)
        };
        record.steps.push(SessionStep {
            point,
            prompt_digest: request.prompt.digest,
            raw_response: response.raw_text,
            outcome,
            note,
        });

        // A late reply pushes the next decision to the moment it arrived.
        let next = scheduled.max(clock.now());
        if next > duration {
            break;
        }
        clock.advance_to(next);
        previous = Some(t);
        t = next;
    }
    Ok(record)
}

fn speak(config: &StrategyConfig, text: &str, t: Seconds) -> Result<Utterance, String> {
    let duration = estimate_duration(text, config.language, &config.rate_model)
        .map_err(|e: RateError| e.to_string())?;
    Utterance::new(text, config.language, t, duration).map_err(|e: TrackError| e.to_string())
}

fn aborted(index: usize, e: &BackendError) -> SessionStatus {
    SessionStatus::Aborted {
        index,
        message: e.to_string(),
        configuration: e.is_configuration(),
    }
}
