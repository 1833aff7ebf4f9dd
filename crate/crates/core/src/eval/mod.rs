//! Automatic metrics: per-second timing agreement, ROUGE-L, binned similarity, verbosity.

use thiserror::Error;

use crate::lang::{count_units, Language};
use crate::subtitles::{overlap_proportion, track_entries};
use crate::time::Seconds;
use crate::track::{speaking_timeline, CommentaryTrack, ReferenceTrack, SpeakingTimeline};

mod reference;
mod rouge;
mod scorer;

pub use reference::{
    covering_duration, load_reference, parse_transcript, reference_from_entries, ReferenceError,
};
pub use rouge::{lcs_len, rouge_l, rouge_l_units};
pub use scorer::{
    cosine, EmbeddingScorer, ExactMatchScorer, ScorerError, SimilarityScorer, TokenF1Scorer,
};

pub const BIN_COUNT: usize = 10;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("video durations differ: generated {generated}s, reference {reference}s")]
    DurationMismatch {
        generated: Seconds,
        reference: Seconds,
    },
    #[error("binned similarity needs a positive duration")]
    ZeroDuration,
    #[error(transparent)]
    Scorer(#[from] ScorerError),
}

fn check_durations(gen: &CommentaryTrack, reference: &ReferenceTrack) -> Result<(), EvalError> {
    let (a, b) = (gen.video_duration(), reference.video_duration());
    if (a.get() - b.get()).abs() > 1e-9 {
        return Err(EvalError::DurationMismatch {
            generated: a,
            reference: b,
        });
    }
    Ok(())
}

/// Fraction of seconds where two timelines agree. Empty timelines agree trivially.
pub fn timeline_agreement(a: &SpeakingTimeline, b: &SpeakingTimeline) -> f64 {
    let n = a.len().max(b.len());
    if n == 0 {
        return 1.0;
    }
    let get = |t: &SpeakingTimeline, i: usize| t.seconds().get(i).copied().unwrap_or(false);
    let agree = (0..n).filter(|&i| get(a, i) == get(b, i)).count();
    agree as f64 / n as f64
}

/// Per-second agreement of speaking/silent state (reported as `agreement@1s`).
pub fn timing_alignment(gen: &CommentaryTrack, reference: &ReferenceTrack) -> Result<f64, EvalError> {
    check_durations(gen, reference)?;
    Ok(timeline_agreement(
        &speaking_timeline(gen),
        &speaking_timeline(reference),
    ))
}

/// Bin holding time `t` when the video is split into ten equal parts.
pub fn bin_of(t: Seconds, duration: Seconds) -> usize {
    let b = (t.get() * BIN_COUNT as f64 / duration.get()).floor() as usize;
    b.min(BIN_COUNT - 1)
}

/// Similarity of the text spoken in each tenth of the video. Bins with an empty side score 0.
pub fn binned_similarity(
    gen: &CommentaryTrack,
    reference: &ReferenceTrack,
    scorer: &dyn SimilarityScorer,
    language: Language,
) -> Result<[f64; BIN_COUNT], EvalError> {
    check_durations(gen, reference)?;
    let duration = reference.video_duration();
    if duration.get() <= 0.0 {
        return Err(EvalError::ZeroDuration);
    }
    let gather = |track: &CommentaryTrack| {
        let mut bins: [Vec<&str>; BIN_COUNT] = Default::default();
        for u in track.utterances() {
            bins[bin_of(u.start(), duration)].push(u.text());
        }
        bins.map(|texts| texts.join(language.joiner()))
    };
    let g = gather(gen);
    let r = gather(reference);
    let mut out = [0.0; BIN_COUNT];
    for b in 0..BIN_COUNT {
        if !g[b].is_empty() && !r[b].is_empty() {
            out[b] = scorer.score(&g[b], &r[b])?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordStats {
    pub avg: f64,
    pub min: usize,
    pub max: usize,
}

/// Total spoken units per track (words for English, characters for Japanese), summarised.
pub fn word_stats(tracks: &[&CommentaryTrack], language: Language) -> Option<WordStats> {
    if tracks.is_empty() {
        return None;
    }
    let unit = language.default_unit();
    let totals: Vec<usize> = tracks
        .iter()
        .map(|t| t.utterances().iter().map(|u| count_units(u.text(), unit)).sum())
        .collect();
    Some(WordStats {
        avg: totals.iter().sum::<usize>() as f64 / totals.len() as f64,
        min: *totals.iter().min().expect("non-empty"),
        max: *totals.iter().max().expect("non-empty"),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub video_id: String,
    /// Per-second speaking/silence agreement in `[0, 1]`.
    pub alignment: f64,
    /// ROUGE-L F1 of the concatenated tracks, `[0, 100]`.
    pub rouge_l: f64,
    pub bin_scores: [f64; BIN_COUNT],
    /// Share of adjacent subtitle pairs that overlap.
    pub overlap: f64,
    pub gen_words: WordStats,
    pub ref_words: WordStats,
    pub scorer: String,
}

pub fn evaluate(
    gen: &CommentaryTrack,
    reference: &ReferenceTrack,
    scorer: &dyn SimilarityScorer,
    language: Language,
) -> Result<EvalReport, EvalError> {
    let alignment = timing_alignment(gen, reference)?;
    let rouge_l = rouge::rouge_l(
        &gen.concatenated_text(language),
        &reference.concatenated_text(language),
        language,
    );
    let bin_scores = if reference.video_duration().get() > 0.0 {
        binned_similarity(gen, reference, scorer, language)?
    } else {
        [0.0; BIN_COUNT]
    };
    Ok(EvalReport {
        video_id: gen.video_id().to_string(),
        alignment,
        rouge_l,
        bin_scores,
        overlap: overlap_proportion(&track_entries(gen)),
        gen_words: word_stats(&[gen], language).expect("one track"),
        ref_words: word_stats(&[reference], language).expect("one track"),
        scorer: scorer.name().to_string(),
    })
}
