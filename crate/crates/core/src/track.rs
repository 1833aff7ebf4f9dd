//! Utterances, commentary tracks and the per-second speaking timeline.

use thiserror::Error;

use crate::lang::Language;
use crate::prompting::is_wait_only;
use crate::time::Seconds;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("utterance text is empty")]
    EmptyText,
    #[error("utterance text is the WAIT token")]
    WaitText,
    #[error("utterance duration must be positive")]
    NonPositiveDuration,
    #[error("utterance at {start}s does not start after the previous one at {previous}s")]
    NotIncreasing { previous: Seconds, start: Seconds },
    #[error("utterance at {start}s starts after the end of the video ({duration}s)")]
    PastEnd { start: Seconds, duration: Seconds },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    text: String,
    language: Language,
    start: Seconds,
    est_duration: Seconds,
}

impl Utterance {
    pub fn new(
        text: impl Into<String>,
        language: Language,
        start: Seconds,
        est_duration: Seconds,
    ) -> Result<Self, TrackError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(TrackError::EmptyText);
        }
        if is_wait_only(&text) {
            return Err(TrackError::WaitText);
        }
        if est_duration.get() <= 0.0 {
            return Err(TrackError::NonPositiveDuration);
        }
        Ok(Self {
            text,
            language,
            start,
            est_duration,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn start(&self) -> Seconds {
        self.start
    }

    pub fn est_duration(&self) -> Seconds {
        self.est_duration
    }

    pub fn end(&self) -> Seconds {
        self.start + self.est_duration
    }
}

/// Display window of an utterance: `(start, start + est_duration)`.
pub fn utterance_interval(u: &Utterance) -> (Seconds, Seconds) {
    (u.start, u.end())
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecisionOutcome {
    Speak(Utterance),
    Wait,
}

impl DecisionOutcome {
    pub fn is_wait(&self) -> bool {
        matches!(self, DecisionOutcome::Wait)
    }

    pub fn utterance(&self) -> Option<&Utterance> {
        match self {
            DecisionOutcome::Speak(u) => Some(u),
            DecisionOutcome::Wait => None,
        }
    }
}

/// Ordered utterances for one video. Human reference tracks share this shape.
#[derive(Debug, Clone, PartialEq)]
pub struct CommentaryTrack {
    video_id: String,
    utterances: Vec<Utterance>,
    video_duration: Seconds,
}

pub type ReferenceTrack = CommentaryTrack;

impl CommentaryTrack {
    pub fn new(video_id: impl Into<String>, video_duration: Seconds) -> Self {
        Self {
            video_id: video_id.into(),
            utterances: Vec::new(),
            video_duration,
        }
    }

    pub fn from_utterances(
        video_id: impl Into<String>,
        video_duration: Seconds,
        utterances: impl IntoIterator<Item = Utterance>,
    ) -> Result<Self, TrackError> {
        let mut track = Self::new(video_id, video_duration);
        for u in utterances {
            track.push(u)?;
        }
        Ok(track)
    }

    pub fn push(&mut self, u: Utterance) -> Result<(), TrackError> {
        if u.start > self.video_duration {
            return Err(TrackError::PastEnd {
                start: u.start,
                duration: self.video_duration,
            });
        }
        if let Some(last) = self.utterances.last() {
            if u.start <= last.start {
                return Err(TrackError::NotIncreasing {
                    previous: last.start,
                    start: u.start,
                });
            }
        }
        self.utterances.push(u);
        Ok(())
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn video_duration(&self) -> Seconds {
        self.video_duration
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    /// All utterance texts joined with the language's separator.
    pub fn concatenated_text(&self, language: Language) -> String {
        self.utterances
            .iter()
            .map(Utterance::text)
            .collect::<Vec<_>>()
            .join(language.joiner())
    }
}

/// One flag per whole second of video: `true` while some utterance is being spoken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeakingTimeline(Vec<bool>);

impl SpeakingTimeline {
    pub fn seconds(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn speaking_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl From<Vec<bool>> for SpeakingTimeline {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

/// Second `s` is speaking iff some `[start, end)` overlaps `[s, s+1)` with nonzero measure.
pub fn speaking_timeline(track: &CommentaryTrack) -> SpeakingTimeline {
    let len = track.video_duration.whole_seconds();
    let mut bits = vec![false; len];
    for u in &track.utterances {
        let (start, end) = utterance_interval(u);
        let first = start.get().floor() as usize;
        // Exclusive bound: the last second touched is ceil(end) - 1.
        let stop = (end.get().ceil() as usize).min(len);
        for bit in bits.iter_mut().take(stop).skip(first) {
            *bit = true;
        }
    }
    SpeakingTimeline(bits)
}
