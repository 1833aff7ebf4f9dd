use std::collections::HashMap;

use crate::prompting::WAIT_TOKEN;
use crate::time::Seconds;
use crate::track::ReferenceTrack;

use super::{BackendError, Generator, GeneratorRequest, GeneratorResponse};

/// Speaks the human reference back at the right moment.
///
/// At a decision at time `t` it returns the earliest reference utterance whose
/// start lies in `(previous decision, t]` (or `[0, t]` at initialization), and
/// `<WAIT>` when there is none. Since decision windows never overlap, each
/// reference utterance is emitted at most once per session.
#[derive(Debug, Clone, Default)]
pub struct OracleBackend {
    references: HashMap<String, ReferenceTrack>,
}

impl OracleBackend {
    pub fn new(reference: ReferenceTrack) -> Self {
        Self::from_tracks([reference])
    }

    pub fn from_tracks(tracks: impl IntoIterator<Item = ReferenceTrack>) -> Self {
        Self {
            references: tracks
                .into_iter()
                .map(|t| (t.video_id().to_string(), t))
                .collect(),
        }
    }

    pub fn reference(&self, video_id: &str) -> Option<&ReferenceTrack> {
        self.references.get(video_id)
    }

    /// Reference text due in the window `(previous, time]`.
    pub fn due(&self, video_id: &str, previous: Option<Seconds>, time: Seconds) -> Option<&str> {
        let track = self.references.get(video_id)?;
        track
            .utterances()
            .iter()
            .find(|u| {
                let after_previous = previous.is_none_or(|p| u.start() > p);
                after_previous && u.start() <= time
            })
            .map(|u| u.text())
    }
}

impl Generator for OracleBackend {
    fn generate(&self, request: &GeneratorRequest) -> Result<GeneratorResponse, BackendError> {
        let ctx = &request.context;
        if !self.references.contains_key(&ctx.video_id) {
            return Err(BackendError::Config(format!(
                "oracle has no reference for video '{}'",
                ctx.video_id
            )));
        }
        let text = self
            .due(&ctx.video_id, ctx.previous_time, ctx.time)
            .unwrap_or(WAIT_TOKEN);
        Ok(GeneratorResponse {
            raw_text: text.to_string(),
            latency: Seconds::ZERO,
            model_id: request.model_id.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::request;
    use super::*;
    use crate::lang::Language;
    use crate::track::{CommentaryTrack, Utterance};

    fn reference() -> ReferenceTrack {
        let u = |start: f64, text: &str| {
            Utterance::new(text, Language::En, Seconds::from_secs(start), Seconds::from_secs(1.0)).unwrap()
        };
        CommentaryTrack::from_utterances(
            "v",
            Seconds::from_secs(20.0),
            [u(0.0, "start"), u(5.0, "five"), u(5.5, "five and a half")],
        )
        .unwrap()
    }

    #[test]
    fn speaks_utterance_in_window() {
        let o = OracleBackend::new(reference());
        let mut req = request(3, "p");
        req.context.previous_time = Some(Seconds::from_secs(4.0));
        req.context.time = Seconds::from_secs(6.0);
        assert_eq!(o.generate(&req).unwrap().raw_text, "five");
    }

    #[test]
    fn waits_outside_windows() {
        let o = OracleBackend::new(reference());
        let mut req = request(4, "p");
        req.context.previous_time = Some(Seconds::from_secs(6.0));
        req.context.time = Seconds::from_secs(8.0);
        assert_eq!(o.generate(&req).unwrap().raw_text, WAIT_TOKEN);
    }

    #[test]
    fn initialization_window_is_closed_at_zero() {
        let o = OracleBackend::new(reference());
        let req = request(0, "p");
        assert_eq!(o.generate(&req).unwrap().raw_text, "start");
    }

    #[test]
    fn unknown_video_is_an_error() {
        let o = OracleBackend::new(reference());
        let mut req = request(0, "p");
        req.context.video_id = "other".into();
        assert!(o.generate(&req).is_err());
    }
}
