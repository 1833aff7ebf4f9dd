//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use livecomm::lang::Language;
use livecomm::time::Seconds;
use livecomm::track::{CommentaryTrack, Utterance};
use rand::Rng;

/// Full-table LCS, written independently of the library's rolling-row version.
pub fn lcs_table<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

/// LCS-based F1 (equal weights) scaled to 0..100, from the definition.
pub fn rouge_oracle<T: PartialEq>(c: &[T], r: &[T]) -> f64 {
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let l = lcs_table(c, r) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let p = l / c.len() as f64;
    let rc = l / r.len() as f64;
    100.0 * 2.0 * p * rc / (p + rc)
}

/// Agreement by enumerating seconds: second `s` is speaking when some `[a, b)` meets `(s, s+1)`.
pub fn agreement_oracle(gen: &[(f64, f64)], reference: &[(f64, f64)], duration: f64) -> f64 {
    let n = duration.ceil() as usize;
    if n == 0 {
        return 1.0;
    }
    let speaking = |iv: &[(f64, f64)], s: usize| {
        let (lo, hi) = (s as f64, s as f64 + 1.0);
        iv.iter().any(|&(a, b)| a < hi && b > lo)
    };
    let agree = (0..n).filter(|&s| speaking(gen, s) == speaking(reference, s)).count();
    agree as f64 / n as f64
}

pub fn intervals(t: &CommentaryTrack) -> Vec<(f64, f64)> {
    t.utterances().iter().map(|u| (u.start().get(), u.end().get())).collect()
}

const WORDS: [&str; 12] = [
    "red", "blue", "car", "leads", "corner", "pit", "lap", "fast", "overtakes", "the", "now", "crash",
];
const KANA: [char; 10] = ['赤', '青', '車', 'が', '先', '頭', 'ピ', 'ッ', 'ト', '周'];

pub fn random_text<R: Rng>(rng: &mut R, language: Language, min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    match language {
        Language::En => (0..n).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect::<Vec<_>>().join(" "),
        Language::Ja => (0..n).map(|_| KANA[rng.gen_range(0..KANA.len())]).collect(),
    }
}

/// Random track with millisecond-aligned starts and durations.
pub fn random_track<R: Rng>(rng: &mut R, id: &str, duration_s: u64, language: Language) -> CommentaryTrack {
    let mut track = CommentaryTrack::new(id, Seconds::from_secs(duration_s as f64));
    let mut t_ms = rng.gen_range(0..3000u64);
    while t_ms <= duration_s * 1000 {
        let d_ms = rng.gen_range(1..8000u64);
        let text = random_text(rng, language, 1, 8);
        let u = Utterance::new(text, language, Seconds::from_millis(t_ms), Seconds::from_millis(d_ms)).unwrap();
        track.push(u).unwrap();
        t_ms += rng.gen_range(1..12_000u64);
    }
    track
}

pub fn manifest_text(id: &str, duration: u64) -> String {
    let mut s = format!("#video_id\t{id}\tduration\t{duration}\n");
    for i in 0..duration.max(1) {
        s.push_str(&format!("{i}\tframe://{id}/{i}\n"));
    }
    s
}
