//! Command-line front end: `generate`, `evaluate` and `sweep`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::backend::{CacheMode, RequestParams};
use crate::lang::Language;
use crate::strategies::{SpeechRateModel, StrategyConfig, StrategyKind};
use crate::time::Seconds;

mod evaluate;
mod generate;
mod sweep;

pub use evaluate::{cmd_evaluate, make_scorer, CorpusReport, EvaluateOptions};
pub use generate::{cmd_generate, GenerateSummary, VideoOutcome};
pub use sweep::{cmd_sweep, SweepRow, SWEEP_KINDS};

/// Files the CLI writes next to per-video outputs.
pub const SUMMARY_FILE: &str = "summary.tsv";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_TSV_FILE: &str = "report.tsv";
pub const SWEEP_FILE: &str = "sweep.tsv";

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Config = 1,
    Partial = 2,
}

/// A failed command: the status to exit with and what to print.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::Config,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    /// OpenAI-style endpoint configured from the environment.
    Remote,
    /// Replies scripted in a file.
    Scripted(PathBuf),
    /// Replays a reference file, or a directory of `<video_id>.srt|.tsv` references.
    Oracle(PathBuf),
}

impl FromStr for BackendSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "remote" {
            return Ok(BackendSpec::Remote);
        }
        match s.split_once(':') {
            Some(("scripted", p)) if !p.is_empty() => Ok(BackendSpec::Scripted(p.into())),
            Some(("oracle", p)) if !p.is_empty() => Ok(BackendSpec::Oracle(p.into())),
            _ => Err(format!(
                "unknown backend '{s}' (expected remote, scripted:<path> or oracle:<path>)"
            )),
        }
    }
}

/// Everything a generation run depends on.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifests: Vec<PathBuf>,
    pub strategy: StrategyConfig,
    /// Built-in preset id or a directory of template files.
    pub templates: String,
    pub backend: BackendSpec,
    pub cache_mode: CacheMode,
    pub cache_dir: Option<PathBuf>,
    pub out: PathBuf,
    /// Seeds demonstration sampling.
    pub seed: u64,
    pub demos: Option<PathBuf>,
    pub jobs: usize,
    pub force: bool,
    /// Pace decisions against the wall clock instead of simulated time.
    pub wall_clock: bool,
    pub params: RequestParams,
}

impl RunConfig {
    pub fn new(manifests: Vec<PathBuf>, strategy: StrategyConfig, backend: BackendSpec, out: PathBuf) -> Self {
        Self {
            manifests,
            strategy,
            templates: "race-en".into(),
            backend,
            cache_mode: CacheMode::Passthrough,
            cache_dir: None,
            out,
            seed: 0,
            demos: None,
            jobs: crate::backend::DEFAULT_CONCURRENCY,
            force: false,
            wall_clock: false,
            params: RequestParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.strategy.validate().map_err(|e| CliError::config(format!("strategy: {e}")))?;
        if self.jobs == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        if self.manifests.is_empty() {
            return Err(CliError::config("no manifest given"));
        }
        match (&self.cache_dir, self.cache_mode) {
            (None, CacheMode::Record | CacheMode::Replay) => {
                return Err(CliError::config(format!(
                    "--cache {} needs --cache-dir",
                    self.cache_mode
                )))
            }
            (Some(dir), _) if same_dir(dir, &self.out) => {
                return Err(CliError::config(format!(
                    "output dir and cache dir must differ ({})",
                    dir.display()
                )))
            }
            _ => {}
        }
        Ok(())
    }
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a.components().eq(b.components()),
    }
}

#[derive(Parser, Debug)]
#[command(name = "livecomm", version, about = "Pause-aware live commentary generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate commentary tracks for one or more videos.
    Generate(GenerateArgs),
    /// Score generated tracks against references.
    Evaluate(EvaluateArgs),
    /// Sweep step sizes over stateless, feedback and realtime.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Frame manifest file, or a directory of *.manifest files. Repeatable.
    #[arg(long, required = true)]
    manifest: Vec<PathBuf>,
    /// remote | scripted:<file> | oracle:<file-or-dir>
    #[arg(long)]
    backend: BackendSpec,
    #[arg(long, default_value = "off")]
    cache: CacheMode,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Built-in preset (race-en, race-ja, fight-ja) or a template directory.
    #[arg(long, default_value = "race-en")]
    templates: String,
    #[arg(long)]
    rate_model: Option<SpeechRateModel>,
    #[arg(long, default_value_t = crate::backend::DEFAULT_CONCURRENCY)]
    jobs: usize,
    /// Overwrite existing traces.
    #[arg(long)]
    force: bool,
    /// Keep only the newest N utterances as history.
    #[arg(long)]
    max_history: Option<usize>,
    /// Wait in real time between decisions (live runs).
    #[arg(long)]
    wall_clock: bool,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value = "realtime")]
    strategy: StrategyKind,
    #[arg(long, default_value_t = crate::strategies::DEFAULT_STEP)]
    step: f64,
    /// Demonstrations per prompt (feedback-icl only).
    #[arg(long)]
    shots: Option<usize>,
    /// Demonstration pool, `uri<TAB>text` per line.
    #[arg(long)]
    demos: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    gen_dir: PathBuf,
    ref_dir: PathBuf,
    /// token-f1 | exact | embedding
    #[arg(long, default_value = "token-f1")]
    scorer: String,
    /// Used when a generated track has no trace to take it from.
    #[arg(long, default_value = "en")]
    language: Language,
    #[arg(long)]
    rate_model: Option<SpeechRateModel>,
    /// Report directory (defaults to GEN_DIR).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
    steps: Vec<f64>,
    /// Reference directory (defaults to the oracle path).
    #[arg(long)]
    refs: Option<PathBuf>,
    #[arg(long, default_value = "token-f1")]
    scorer: String,
}

fn run_config(args: RunArgs, kind: StrategyKind, step: f64) -> Result<RunConfig, CliError> {
    let templates = crate::prompting::TemplateSet::resolve(&args.templates)
        .map_err(|e| CliError::config(format!("templates: {e}")))?;
    let mut strategy = StrategyConfig::new(kind, templates.language()).with_step(step);
    if let Some(r) = args.rate_model {
        strategy.rate_model = r;
    }
    strategy.max_history = args.max_history;
    let mut cfg = RunConfig::new(expand_manifests(&args.manifest)?, strategy, args.backend, args.out);
    cfg.templates = args.templates;
    cfg.cache_mode = args.cache;
    cfg.cache_dir = args.cache_dir;
    cfg.seed = args.seed;
    cfg.jobs = args.jobs;
    cfg.force = args.force;
    cfg.wall_clock = args.wall_clock;
    cfg.params.temperature = args.temperature;
    Ok(cfg)
}

/// Replaces directories by the `*.manifest` files they contain, sorted by name.
pub fn expand_manifests(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let rd = std::fs::read_dir(p)
                .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
            let mut found: Vec<PathBuf> = rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "manifest"))
                .collect();
            found.sort();
            if found.is_empty() {
                return Err(CliError::config(format!("{}: no *.manifest files", p.display())));
            }
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn dispatch(cli: Cli) -> Result<Exit, CliError> {
    match cli.command {
        Command::Generate(a) => {
            let mut cfg = run_config(a.run, a.strategy, a.step)?;
            if let Some(n) = a.shots {
                cfg.strategy.icl_shots = n;
            }
            cfg.demos = a.demos;
            let summary = cmd_generate(&cfg)?;
            for line in summary.problems() {
                eprintln!("{line}");
            }
            Ok(summary.exit())
        }
        Command::Evaluate(a) => {
            let opts = EvaluateOptions {
                scorer: a.scorer,
                language: a.language,
                rate_model: a.rate_model.unwrap_or_default(),
                out: a.out,
            };
            let report = cmd_evaluate(&a.gen_dir, &a.ref_dir, &opts)?;
            print!("{}", report.corpus_text());
            Ok(Exit::Success)
        }
        Command::Sweep(a) => {
            let refs = match (&a.refs, &a.run.backend) {
                (Some(r), _) => r.clone(),
                (None, BackendSpec::Oracle(p)) => p.clone(),
                _ => return Err(CliError::config("sweep needs --refs unless the backend is an oracle")),
            };
            let steps: Vec<Seconds> = a
                .steps
                .iter()
                .map(|&s| match Seconds::new(s) {
                    Ok(t) if s > 0.0 => Ok(t),
                    _ => Err(CliError::config(format!("step {s} must be positive"))),
                })
                .collect::<Result<_, _>>()?;
            let cfg = run_config(a.run, StrategyKind::Realtime, crate::strategies::DEFAULT_STEP)?;
            let rows = cmd_sweep(&cfg, &steps, &refs, &a.scorer)?;
            print!("{}", sweep::format_table(&rows));
            Ok(Exit::Success)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::Config as i32 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(exit) => exit as i32,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit as i32
        }
    }
}

/// Runs `f` over `items` on at most `jobs` threads, keeping input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}
