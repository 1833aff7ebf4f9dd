mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn livecomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_livecomm"))
        .args(args)
        .env_remove("COMMENTARY_API_BASE")
        .env_remove("COMMENTARY_API_KEY")
        .env_remove("COMMENTARY_MODEL")
        .output()
        .expect("run livecomm")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn s(&self, rel: &str) -> String {
        self.path(rel).to_str().unwrap().to_string()
    }

    fn write(&self, rel: &str, text: &str) -> String {
        let p = self.path(rel);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(&p, text).unwrap();
        self.s(rel)
    }

    fn manifest(&self, id: &str, duration: u64) -> String {
        self.write(&format!("manifests/{id}.manifest"), &common::manifest_text(id, duration))
    }
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

const SCRIPT: &str = "0\tThe cars line up on the grid.\n2\tRed gets the better start and leads into turn one.\ndefault\t<WAIT>\n";

#[test]
fn generate_feedback_writes_six_step_trace() {
    let f = Fixture::new();
    let m = f.manifest("race01", 10);
    let script = f.write("script.tsv", SCRIPT);
    let out = f.s("out");
    let args = ["generate", "--manifest", &m, "--strategy", "feedback", "--step", "2", "--backend", &format!("scripted:{script}"), "--out", &out];
    let o = livecomm(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let trace = read(f.path("out/race01.trace"));
    assert!(trace.contains("#steps\t6"));
    assert_eq!(trace.lines().filter(|l| l.contains("\tSPEAK\t")).count(), 2);
    assert!(read(f.path("out/race01.srt")).contains("00:00:00,000 --> 00:00:01,750"));
    assert!(read(f.path("out/summary.tsv")).contains("race01\tfeedback\t2\t6\t2\tcomplete"));

    // Existing traces are kept unless forced.
    let o = livecomm(&args);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(code(&livecomm(&forced)), 0);
}

#[test]
fn record_then_replay_is_byte_identical() {
    let f = Fixture::new();
    let m = f.manifest("race02", 20);
    let script = f.write("script.tsv", SCRIPT);
    let cache = f.s("cache");
    let run = |mode: &str, out: &str| {
        livecomm(&[
            "generate", "--manifest", &m, "--strategy", "realtime", "--backend", &format!("scripted:{script}"),
            "--cache", mode, "--cache-dir", &cache, "--out", &f.s(out),
        ])
    };
    assert_eq!(code(&run("record", "a")), 0);
    let o = run("replay", "b");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read(f.path("a/race02.trace")), read(f.path("b/race02.trace")));
    assert_eq!(read(f.path("a/race02.srt")), read(f.path("b/race02.srt")));

    let mut entries: Vec<_> = std::fs::read_dir(f.path("cache")).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    let victim = entries[1].clone();
    let digest = victim.file_stem().unwrap().to_str().unwrap().to_string();
    std::fs::remove_file(&victim).unwrap();
    let o = run("replay", "c");
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains(&digest), "{}", stderr(&o));
    assert!(!f.path("c/race02.trace").exists());
}

#[test]
fn replay_without_cache_dir_is_a_config_error() {
    let f = Fixture::new();
    let m = f.manifest("v", 4);
    let o = livecomm(&["generate", "--manifest", &m, "--backend", "remote", "--cache", "replay", "--cache-dir", &f.s("nope"), "--out", &f.s("out")]);
    assert_eq!(code(&o), 1);
    let o = livecomm(&["generate", "--manifest", &m, "--backend", "remote", "--cache", "record", "--cache-dir", &f.s("out"), "--out", &f.s("out")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("differ"));
}

#[test]
fn remote_without_environment_fails_cleanly() {
    let f = Fixture::new();
    let m = f.manifest("v", 4);
    let o = livecomm(&["generate", "--manifest", &m, "--backend", "remote", "--out", &f.s("out")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("COMMENTARY_API_BASE"));
}

#[test]
fn unreachable_endpoint_yields_partial_exit() {
    let f = Fixture::new();
    let m = f.manifest("v", 4);
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let o = Command::new(env!("CARGO_BIN_EXE_livecomm"))
        .args(["generate", "--manifest", &m, "--backend", "remote", "--out", &f.s("out")])
        .env("COMMENTARY_API_BASE", format!("http://127.0.0.1:{port}/v1"))
        .env("COMMENTARY_MODEL", "m")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(read(f.path("out/v.trace")).contains("#steps\t0"));
    assert!(read(f.path("out/summary.tsv")).contains("partial"));
}

fn reference_srt() -> String {
    "1\n00:00:01,000 --> 00:00:03,000\nRed leads.\n\n2\n00:00:09,500 --> 00:00:12,000\nBlue closes in on the leader.\n\n3\n00:00:20,000 --> 00:00:21,000\nPit stop for red.\n".into()
}

#[test]
fn oracle_generation_and_self_evaluation() {
    let f = Fixture::new();
    let m = f.manifest("race03", 30);
    f.write("refs/race03.srt", &reference_srt());
    let o = livecomm(&["generate", "--manifest", &m, "--strategy", "realtime", "--backend", &format!("oracle:{}", f.s("refs")), "--out", &f.s("gen")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let srt = read(f.path("gen/race03.srt"));
    let reference = reference_srt();
    for block in srt.split("\n\n").filter(|b| !b.trim().is_empty()) {
        let text = block.lines().nth(2).unwrap();
        assert!(reference.contains(text), "{text}");
    }

    // Evaluating a run against itself gives perfect agreement.
    let o = livecomm(&["evaluate", &f.s("gen"), &f.s("gen")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tsv = read(f.path("gen/report.tsv"));
    assert!(tsv.contains("race03\tagreement@1s\t1.000000"));
    assert!(tsv.contains("corpus\tagreement@1s\t1.000000"));
    assert!(tsv.contains("race03\toverlap\t0.000000"));
    let text = read(f.path("gen/report.txt"));
    assert!(text.contains("rouge_l: 100.000000"));

    // Against the reference: realtime output never overlaps.
    let o = livecomm(&["evaluate", &f.s("gen"), &f.s("refs"), "--out", &f.s("report")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(read(f.path("report/report.tsv")).contains("corpus\toverlap\t0.000000"));
}

#[test]
fn evaluate_lists_orphans_on_both_sides() {
    let f = Fixture::new();
    f.write("gen/a.srt", &reference_srt());
    f.write("refs/b.srt", &reference_srt());
    let o = livecomm(&["evaluate", &f.s("gen"), &f.s("refs")]);
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    assert!(e.contains("generated only: a") && e.contains("reference only: b"), "{e}");
}

#[test]
fn evaluate_reads_transcripts() {
    let f = Fixture::new();
    f.write("gen/v.srt", "1\n00:00:00,000 --> 00:00:01,000\nRed leads.\n");
    f.write("refs/v.tsv", "#video_id\tv\tduration\t10\n0\tRed leads.\n");
    let o = livecomm(&["evaluate", &f.s("gen"), &f.s("refs"), "--scorer", "exact"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tsv = read(f.path("gen/report.tsv"));
    assert!(tsv.contains("v\tagreement@1s\t1.000000"), "{tsv}");
    assert!(tsv.contains("v\tbin_01\t1.000000"));
}

#[test]
fn sweep_table_and_step_validation() {
    let f = Fixture::new();
    let mut refs = String::new();
    let mut t = 3.0;
    let mut i = 1;
    while t < 110.0 {
        refs.push_str(&format!("{i}\n{} --> {}\nline {i} red blue\n\n", ts(t), ts(t + 2.0)));
        t += 7.0;
        i += 1;
    }
    f.write("refs/s1.srt", &refs);
    let m = f.manifest("s1", 120);
    let oracle = format!("oracle:{}", f.s("refs"));
    let o = livecomm(&["sweep", "--manifest", &m, "--backend", &oracle, "--steps", "1,2,5,10", "--out", &f.s("sweep")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = read(f.path("sweep/sweep.tsv"));
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(table.lines().next().unwrap(), "step\tstateless\tfeedback\treal-time\tavg");
    assert_eq!(rows.len(), 4);
    let avg: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(avg.windows(2).all(|w| w[0] >= w[1]), "{table}");

    let o = livecomm(&["sweep", "--manifest", &m, "--backend", &oracle, "--steps", "2", "--out", &f.s("one")]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(f.path("one/sweep.tsv")).lines().count(), 2);

    let o = livecomm(&["sweep", "--manifest", &m, "--backend", &oracle, "--steps", "0", "--out", &f.s("zero")]);
    assert_eq!(code(&o), 1);
}

fn ts(t: f64) -> String {
    let ms = (t * 1000.0).round() as u64;
    format!("{:02}:{:02}:{:02},{:03}", ms / 3_600_000, ms / 60_000 % 60, ms / 1000 % 60, ms % 1000)
}

#[test]
fn identical_configs_give_identical_outputs() {
    let f = Fixture::new();
    let dir = f.path("manifests");
    f.manifest("a", 12);
    f.manifest("b", 9);
    let demos: String = (0..12).map(|i| format!("demo://{i}\tDemo line {i}.\n")).collect();
    let demos = f.write("demos.tsv", &demos);
    let script = f.write("script.tsv", SCRIPT);
    let run = |out: &str| {
        livecomm(&[
            "generate", "--manifest", dir.to_str().unwrap(), "--strategy", "feedback-icl", "--shots", "4",
            "--demos", &demos, "--seed", "11", "--backend", &format!("scripted:{script}"), "--jobs", "2", "--out", &f.s(out),
        ])
    };
    let o = run("x");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&run("y")), 0);
    for name in ["a.trace", "a.srt", "b.trace", "b.srt", "summary.tsv"] {
        assert_eq!(read(f.path("x").join(name)), read(f.path("y").join(name)), "{name}");
    }
    // ICL without demonstrations is rejected up front.
    let o = livecomm(&["generate", "--manifest", dir.to_str().unwrap(), "--strategy", "feedback-icl", "--backend", &format!("scripted:{script}"), "--out", &f.s("z")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&livecomm(&[])), 1);
    assert_eq!(code(&livecomm(&["generate", "--manifest", "m", "--backend", "nonsense", "--out", "o"])), 1);
    assert_eq!(code(&livecomm(&["--version"])), 0);
}
