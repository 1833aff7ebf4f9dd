use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::eval::{
    covering_duration, evaluate, load_reference, reference_from_entries, word_stats, EmbeddingScorer,
    EvalReport, ExactMatchScorer, ScorerError, SimilarityScorer, TokenF1Scorer, WordStats, BIN_COUNT,
};
use crate::lang::Language;
use crate::strategies::SpeechRateModel;
use crate::subtitles::parse_srt;
use crate::trace::{read_trace, TRACE_EXTENSION};
use crate::track::CommentaryTrack;

use super::{CliError, REPORT_TEXT_FILE, REPORT_TSV_FILE, SUMMARY_FILE, SWEEP_FILE};

/// Environment variable naming the embedding model for `--scorer embedding`.
pub const ENV_EMBEDDING_MODEL: &str = "COMMENTARY_EMBEDDING_MODEL";

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub scorer: String,
    pub language: Language,
    pub rate_model: SpeechRateModel,
    pub out: Option<PathBuf>,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        Self {
            scorer: "token-f1".into(),
            language: Language::En,
            rate_model: SpeechRateModel::default(),
            out: None,
        }
    }
}

pub fn make_scorer(spec: &str, language: Language) -> Result<Box<dyn SimilarityScorer>, ScorerError> {
    match spec {
        "token-f1" => Ok(Box::new(TokenF1Scorer::new(language))),
        "exact" => Ok(Box::new(ExactMatchScorer)),
        "embedding" => {
            let base = std::env::var(crate::backend::ENV_API_BASE)
                .map_err(|_| ScorerError::Endpoint(format!("{} is not set", crate::backend::ENV_API_BASE)))?;
            let model = std::env::var(ENV_EMBEDDING_MODEL)
                .map_err(|_| ScorerError::Endpoint(format!("{ENV_EMBEDDING_MODEL} is not set")))?;
            let key = std::env::var(crate::backend::ENV_API_KEY).ok().filter(|k| !k.is_empty());
            Ok(Box::new(EmbeddingScorer::new(&base, key, model)?))
        }
        other => Err(ScorerError::Unknown(other.to_string())),
    }
}

/// Per-video reports and their corpus-level means.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusReport {
    pub videos: Vec<EvalReport>,
    pub alignment: f64,
    pub rouge_l: f64,
    pub overlap: f64,
    pub bin_scores: [f64; BIN_COUNT],
    pub gen_words: WordStats,
    pub ref_words: WordStats,
    pub scorer: String,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

const RESERVED: [&str; 4] = [SUMMARY_FILE, REPORT_TEXT_FILE, REPORT_TSV_FILE, SWEEP_FILE];

fn files_by_stem(dir: &Path, extensions: &[&str]) -> Result<BTreeMap<String, PathBuf>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::config(format!("{}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    let mut paths: Vec<PathBuf> = rd.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for p in paths {
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if RESERVED.contains(&name) || !p.is_file() {
            continue;
        }
        let (Some(stem), Some(ext)) = (p.file_stem().and_then(|s| s.to_str()), p.extension().and_then(|e| e.to_str()))
        else {
            continue;
        };
        // Earlier extensions in the list win.
        let Some(rank) = extensions.iter().position(|x| *x == ext) else { continue };
        let keep = match out.get(stem) {
            Some(existing) => {
                let old: &PathBuf = existing;
                let old_ext = old.extension().and_then(|e| e.to_str()).unwrap_or_default();
                extensions.iter().position(|x| *x == old_ext).is_some_and(|r| rank < r)
            }
            None => true,
        };
        if keep {
            out.insert(stem.to_string(), p);
        }
    }
    Ok(out)
}

fn load_pair(
    id: &str,
    gen_srt: &Path,
    gen_dir: &Path,
    ref_path: &Path,
    opts: &EvaluateOptions,
) -> Result<(CommentaryTrack, CommentaryTrack, Language), CliError> {
    let ctx = |what: &str, e: &dyn std::fmt::Display| CliError::config(format!("{id}: {what}: {e}"));
    let trace_path = gen_dir.join(format!("{id}.{TRACE_EXTENSION}"));
    let trace = if trace_path.is_file() {
        Some(read_trace(&trace_path).map_err(|e| ctx("trace", &e))?)
    } else {
        None
    };
    let language = trace.as_ref().map_or(opts.language, |t| t.language);
    let text = std::fs::read_to_string(gen_srt).map_err(|e| ctx("generated srt", &e))?;
    let entries = parse_srt(&text).map_err(|e| ctx("generated srt", &e))?;
    let duration = match &trace {
        Some(t) => t.duration,
        None => {
            let r = load_reference(ref_path, language, &opts.rate_model, None).map_err(|e| ctx("reference", &e))?;
            r.video_duration().max(covering_duration(&entries))
        }
    };
    let reference =
        load_reference(ref_path, language, &opts.rate_model, Some(duration)).map_err(|e| ctx("reference", &e))?;
    let reference = CommentaryTrack::from_utterances(id, duration, reference.utterances().iter().cloned())
        .map_err(|e| ctx("reference", &e))?;
    let generated = reference_from_entries(id, duration, &entries, language);
    Ok((generated, reference, language))
}

/// Scores every `<id>.srt` in `gen_dir` against `<id>.srt|.tsv|.txt` in `ref_dir`.
pub fn cmd_evaluate(gen_dir: &Path, ref_dir: &Path, opts: &EvaluateOptions) -> Result<CorpusReport, CliError> {
    let gen = files_by_stem(gen_dir, &["srt"])?;
    let refs = files_by_stem(ref_dir, &["srt", "tsv", "txt"])?;
    let orphan_gen: Vec<&str> = gen.keys().filter(|k| !refs.contains_key(*k)).map(String::as_str).collect();
    let orphan_ref: Vec<&str> = refs.keys().filter(|k| !gen.contains_key(*k)).map(String::as_str).collect();
    if !orphan_gen.is_empty() || !orphan_ref.is_empty() {
        let list = |v: &[&str]| if v.is_empty() { "(none)".to_string() } else { v.join(", ") };
        return Err(CliError::config(format!(
            "unmatched video ids\n  generated only: {}\n  reference only: {}",
            list(&orphan_gen),
            list(&orphan_ref)
        )));
    }
    if gen.is_empty() {
        return Err(CliError::config(format!("{}: no generated tracks", gen_dir.display())));
    }

    let mut pairs = Vec::new();
    for (id, gen_path) in &gen {
        pairs.push(load_pair(id, gen_path, gen_dir, &refs[id], opts)?);
    }
    let language = pairs[0].2;
    if let Some((g, _, l)) = pairs.iter().find(|p| p.2 != language) {
        return Err(CliError::config(format!(
            "{}: language {l} differs from {language}",
            g.video_id()
        )));
    }
    let scorer = make_scorer(&opts.scorer, language).map_err(|e| CliError::config(e.to_string()))?;
    let videos: Vec<EvalReport> = pairs
        .iter()
        .map(|(g, r, _)| evaluate(g, r, scorer.as_ref(), language).map_err(|e| CliError::config(format!("{}: {e}", g.video_id()))))
        .collect::<Result<_, _>>()?;
    let mut bin_scores = [0.0; BIN_COUNT];
    for (b, slot) in bin_scores.iter_mut().enumerate() {
        *slot = mean(videos.iter().map(|v| v.bin_scores[b]));
    }
    let gens: Vec<&CommentaryTrack> = pairs.iter().map(|p| &p.0).collect();
    let refs_t: Vec<&CommentaryTrack> = pairs.iter().map(|p| &p.1).collect();
    let report = CorpusReport {
        alignment: mean(videos.iter().map(|v| v.alignment)),
        rouge_l: mean(videos.iter().map(|v| v.rouge_l)),
        overlap: mean(videos.iter().map(|v| v.overlap)),
        bin_scores,
        gen_words: word_stats(&gens, language).expect("non-empty"),
        ref_words: word_stats(&refs_t, language).expect("non-empty"),
        scorer: scorer.name().to_string(),
        videos,
    };
    let out = opts.out.as_deref().unwrap_or(gen_dir);
    std::fs::create_dir_all(out).map_err(|e| CliError::config(format!("{}: {e}", out.display())))?;
    for (name, body) in [(REPORT_TEXT_FILE, report.to_text()), (REPORT_TSV_FILE, report.to_tsv())] {
        let p = out.join(name);
        std::fs::write(&p, body).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
    }
    Ok(report)
}

fn bins(b: &[f64; BIN_COUNT]) -> String {
    b.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(",")
}

impl CorpusReport {
    fn corpus_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[corpus]");
        let _ = writeln!(s, "videos: {}", self.videos.len());
        let _ = writeln!(s, "agreement@1s: {:.6}", self.alignment);
        let _ = writeln!(s, "rouge_l: {:.6}", self.rouge_l);
        let _ = writeln!(s, "overlap: {:.6}", self.overlap);
        let _ = writeln!(s, "bin_similarity: {}", bins(&self.bin_scores));
        for (name, w) in [("gen", self.gen_words), ("ref", self.ref_words)] {
            let _ = writeln!(s, "{name}_units: avg {:.1} min {} max {}", w.avg, w.min, w.max);
        }
        s
    }

    pub fn corpus_text(&self) -> String {
        self.corpus_block()
    }

    /// `key: value` report, one block per video and a corpus block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scorer: {}", self.scorer);
        let _ = writeln!(s, "rouge_l_mode: whole-track concatenation");
        let _ = writeln!(s, "bins: 10 equal segments by utterance start");
        for v in &self.videos {
            let _ = writeln!(s, "\n[{}]", v.video_id);
            let _ = writeln!(s, "agreement@1s: {:.6}", v.alignment);
            let _ = writeln!(s, "rouge_l: {:.6}", v.rouge_l);
            let _ = writeln!(s, "overlap: {:.6}", v.overlap);
            let _ = writeln!(s, "bin_similarity: {}", bins(&v.bin_scores));
            let _ = writeln!(s, "gen_units: {}", v.gen_words.max);
            let _ = writeln!(s, "ref_units: {}", v.ref_words.max);
        }
        s.push('\n');
        s.push_str(&self.corpus_block());
        s
    }

    /// `video_id<TAB>metric<TAB>value` rows; the last block carries the `corpus` means.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("video_id\tmetric\tvalue\n");
        let mut row = |id: &str, metric: &str, value: String| {
            let _ = writeln!(s, "{id}\t{metric}\t{value}");
        };
        let metrics = |row: &mut dyn FnMut(&str, &str, String), id: &str, a: f64, r: f64, o: f64, b: &[f64; BIN_COUNT]| {
            row(id, "agreement@1s", format!("{a:.6}"));
            row(id, "rouge_l", format!("{r:.6}"));
            row(id, "overlap", format!("{o:.6}"));
            for (i, x) in b.iter().enumerate() {
                row(id, &format!("bin_{:02}", i + 1), format!("{x:.6}"));
            }
        };
        for v in &self.videos {
            metrics(&mut row, &v.video_id, v.alignment, v.rouge_l, v.overlap, &v.bin_scores);
            row(&v.video_id, "gen_units", v.gen_words.max.to_string());
            row(&v.video_id, "ref_units", v.ref_words.max.to_string());
        }
        metrics(&mut row, "corpus", self.alignment, self.rouge_l, self.overlap, &self.bin_scores);
        for (name, w) in [("gen", self.gen_words), ("ref", self.ref_words)] {
            row("corpus", &format!("{name}_units_avg"), format!("{:.1}", w.avg));
            row("corpus", &format!("{name}_units_min"), w.min.to_string());
            row("corpus", &format!("{name}_units_max"), w.max.to_string());
        }
        s
    }
}
