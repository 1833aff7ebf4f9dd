//! Pause-aware live commentary generation: schedulers, prompts, backends, subtitles and metrics.

pub mod backend;
pub mod cli;
pub mod eval;
pub mod lang;
pub mod media;
pub mod prompting;
pub mod strategies;
pub mod subtitles;
pub mod time;
pub mod trace;
pub mod track;

#[cfg(test)]
mod test_http;
