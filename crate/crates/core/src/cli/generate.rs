use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::backend::{
    CacheMode, Generator, Limited, OracleBackend, RemoteClient, ReplayCache, ScriptedBackend,
    DEFAULT_CONCURRENCY,
};
use crate::eval::load_reference;
use crate::media::{load_manifest, FrameStore};
use crate::prompting::{load_demonstrations, TemplateSet};
use crate::strategies::{run_session_with, GenerationRecord, PromptSet, SessionStatus};
use crate::subtitles::to_srt;
use crate::time::{Clock, SimulatedClock, WallClock};
use crate::trace::{write_trace, TRACE_EXTENSION};
use crate::track::ReferenceTrack;

use super::{BackendSpec, CliError, Exit, RunConfig, SUMMARY_FILE};

/// What happened to one video.
#[derive(Debug, Clone, PartialEq)]
pub enum VideoOutcome {
    Complete { video_id: String, steps: usize, utterances: usize },
    /// Runtime failure mid-session; partial outputs were written.
    Partial { video_id: String, steps: usize, message: String },
    /// Setup failure (cold cache, credentials, bad input); nothing written.
    Failed { video_id: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub videos: Vec<VideoOutcome>,
    pub out: PathBuf,
}

impl GenerateSummary {
    pub fn exit(&self) -> Exit {
        if self.videos.iter().any(|v| matches!(v, VideoOutcome::Failed { .. })) {
            Exit::Config
        } else if self.videos.iter().any(|v| matches!(v, VideoOutcome::Partial { .. })) {
            Exit::Partial
        } else {
            Exit::Success
        }
    }

    pub fn problems(&self) -> Vec<String> {
        self.videos
            .iter()
            .filter_map(|v| match v {
                VideoOutcome::Complete { .. } => None,
                VideoOutcome::Partial { video_id, message, .. } => {
                    Some(format!("warning: {video_id}: partial: {message}"))
                }
                VideoOutcome::Failed { video_id, message } => Some(format!("error: {video_id}: {message}")),
            })
            .collect()
    }
}

fn load_oracle(path: &Path, stores: &[FrameStore], cfg: &RunConfig) -> Result<OracleBackend, CliError> {
    let lang = cfg.strategy.language;
    let rates = &cfg.strategy.rate_model;
    let load = |p: &Path, store: &FrameStore| -> Result<ReferenceTrack, CliError> {
        load_reference(p, lang, rates, Some(store.video_duration()))
            .map_err(|e| CliError::config(format!("oracle reference: {e}")))
    };
    let mut tracks = Vec::new();
    if path.is_dir() {
        for store in stores {
            let found = ["srt", "tsv", "txt"]
                .iter()
                .map(|ext| path.join(format!("{}.{ext}", store.video_id())))
                .find(|p| p.is_file())
                .ok_or_else(|| {
                    CliError::config(format!(
                        "oracle: no reference for '{}' in {}",
                        store.video_id(),
                        path.display()
                    ))
                })?;
            tracks.push(load(&found, store)?);
        }
    } else {
        let [store] = stores else {
            return Err(CliError::config("oracle: a single reference file serves exactly one video"));
        };
        let t = load(path, store)?;
        // Adopt the manifest's id so a differently named file still matches.
        tracks.push(crate::track::CommentaryTrack::from_utterances(
            store.video_id(),
            store.video_duration(),
            t.utterances().iter().cloned(),
        )
        .map_err(|e| CliError::config(format!("oracle reference: {e}")))?);
    }
    Ok(OracleBackend::from_tracks(tracks))
}

fn build_backend(cfg: &RunConfig, stores: &[FrameStore]) -> Result<Box<dyn Generator>, CliError> {
    let inner: Option<Box<dyn Generator>> = if cfg.cache_mode == CacheMode::Replay {
        None
    } else {
        Some(match &cfg.backend {
            BackendSpec::Remote => {
                let client = RemoteClient::from_env().map_err(|e| CliError::config(e.to_string()))?;
                Box::new(Limited::new(client, DEFAULT_CONCURRENCY))
            }
            BackendSpec::Scripted(p) => {
                Box::new(ScriptedBackend::load(p).map_err(|e| CliError::config(e.to_string()))?)
            }
            BackendSpec::Oracle(p) => Box::new(load_oracle(p, stores, cfg)?),
        })
    };
    match (&cfg.cache_dir, cfg.cache_mode) {
        (_, CacheMode::Passthrough) => Ok(inner.expect("passthrough builds a backend")),
        (Some(dir), mode) => Ok(Box::new(
            ReplayCache::new(inner, dir, mode).map_err(|e| CliError::config(e.to_string()))?,
        )),
        (None, _) => Err(CliError::config("cache mode needs --cache-dir")),
    }
}

fn model_id(cfg: &RunConfig) -> String {
    match &cfg.backend {
        BackendSpec::Remote => std::env::var(crate::backend::ENV_MODEL).unwrap_or_else(|_| "remote".into()),
        BackendSpec::Scripted(_) => "scripted".into(),
        BackendSpec::Oracle(_) => "oracle".into(),
    }
}

fn prompt_set(cfg: &RunConfig) -> Result<PromptSet, CliError> {
    let templates = TemplateSet::resolve(&cfg.templates).map_err(|e| CliError::config(format!("templates: {e}")))?;
    if cfg.strategy.icl_shots == 0 {
        return Ok(PromptSet::new(templates));
    }
    let path = cfg
        .demos
        .as_ref()
        .ok_or_else(|| CliError::config("feedback-icl needs --demos"))?;
    let pool = load_demonstrations(path).map_err(|e| CliError::config(format!("demos: {e}")))?;
    if pool.len() < cfg.strategy.icl_shots {
        return Err(CliError::config(format!(
            "demos: {} shots requested, pool has {}",
            cfg.strategy.icl_shots,
            pool.len()
        )));
    }
    Ok(PromptSet::with_sampled_demos(templates, &pool, cfg.strategy.icl_shots, cfg.seed))
}

fn summary_tsv(cfg: &RunConfig, videos: &[VideoOutcome]) -> String {
    let mut s = String::from("video_id\tstrategy\tstep\tdecisions\tutterances\tstatus\n");
    for v in videos {
        let (id, decisions, utterances, status) = match v {
            VideoOutcome::Complete { video_id, steps, utterances } => {
                (video_id, steps.to_string(), utterances.to_string(), "complete".to_string())
            }
            VideoOutcome::Partial { video_id, steps, .. } => {
                (video_id, steps.to_string(), "-".into(), "partial".into())
            }
            VideoOutcome::Failed { video_id, .. } => (video_id, "-".into(), "-".into(), "failed".into()),
        };
        let _ = writeln!(
            s,
            "{id}\t{}\t{}\t{decisions}\t{utterances}\t{status}",
            cfg.strategy.kind, cfg.strategy.step
        );
    }
    s
}

fn write_outputs(out: &Path, record: &GenerationRecord) -> Result<(), String> {
    let io = |p: &Path, e: std::io::Error| format!("{}: {e}", p.display());
    let srt = out.join(format!("{}.srt", record.video_id));
    std::fs::write(&srt, to_srt(&record.track)).map_err(|e| io(&srt, e))?;
    let trace = out.join(format!("{}.{TRACE_EXTENSION}", record.video_id));
    std::fs::write(&trace, write_trace(record)).map_err(|e| io(&trace, e))
}

/// Generates `<video_id>.srt` and `<video_id>.trace` for every manifest plus a run summary.
pub fn cmd_generate(cfg: &RunConfig) -> Result<GenerateSummary, CliError> {
    cfg.validate()?;
    let stores: Vec<FrameStore> = cfg
        .manifests
        .iter()
        .map(|p| load_manifest(p).map_err(|e| CliError::config(format!("{}: {e}", p.display()))))
        .collect::<Result<_, _>>()?;
    let mut ids: Vec<&str> = stores.iter().map(|s| s.video_id()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::config(format!("video id '{}' appears in two manifests", w[0])));
    }
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::config(format!("{}: {e}", cfg.out.display())))?;
    if !cfg.force {
        for s in &stores {
            let p = cfg.out.join(format!("{}.{TRACE_EXTENSION}", s.video_id()));
            if p.exists() {
                return Err(CliError::config(format!(
                    "{} exists; pass --force to overwrite",
                    p.display()
                )));
            }
        }
    }
    let prompts = prompt_set(cfg)?;
    let backend = build_backend(cfg, &stores)?;
    let mut params = cfg.params.clone();
    params.model_id = model_id(cfg);

    let videos = super::parallel_map(&stores, cfg.jobs, |store| {
        let video_id = store.video_id().to_string();
        let mut clock: Box<dyn Clock> = if cfg.wall_clock {
            Box::new(WallClock::new())
        } else {
            Box::new(SimulatedClock::new())
        };
        log::info!("{video_id}: {} step {}", cfg.strategy.kind, cfg.strategy.step);
        let record = match run_session_with(store, &cfg.strategy, &*backend, clock.as_mut(), &prompts, &params) {
            Ok(r) => r,
            Err(e) => return VideoOutcome::Failed { video_id, message: e.to_string() },
        };
        match &record.status {
            SessionStatus::Aborted { index, message, configuration: true } => VideoOutcome::Failed {
                video_id,
                message: format!("step {index}: {message}"),
            },
            status => {
                if let Err(message) = write_outputs(&cfg.out, &record) {
                    return VideoOutcome::Failed { video_id, message };
                }
                match status {
                    SessionStatus::Complete => VideoOutcome::Complete {
                        video_id,
                        steps: record.steps.len(),
                        utterances: record.track.len(),
                    },
                    SessionStatus::Aborted { index, message, .. } => VideoOutcome::Partial {
                        video_id,
                        steps: record.steps.len(),
                        message: format!("step {index}: {message}"),
                    },
                }
            }
        }
    });
    let summary_path = cfg.out.join(SUMMARY_FILE);
    std::fs::write(&summary_path, summary_tsv(cfg, &videos))
        .map_err(|e| CliError::config(format!("{}: {e}", summary_path.display())))?;
    Ok(GenerateSummary {
        videos,
        out: cfg.out.clone(),
    })
}
