//! C ABI over `livecomm`.
//!
//! Every fallible call returns an [`LcStatus`]; on failure [`lc_last_error`]
//! describes the problem. Strings handed out by this library must be released
//! with [`lc_string_free`], tracks with [`lc_track_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use livecomm::backend::ScriptedBackend;
use livecomm::eval::{rouge_l, timing_alignment};
use livecomm::lang::Language;
use livecomm::media::parse_manifest;
use livecomm::prompting::{parse_response, ParsedResponse, TemplateSet};
use livecomm::strategies::{estimate_duration, run_session, PromptSet, SpeechRateModel, StrategyConfig, StrategyKind};
use livecomm::subtitles::{overlap_proportion, parse_srt, to_srt};
use livecomm::time::{Seconds, SimulatedClock};
use livecomm::trace::write_trace;
use livecomm::track::{CommentaryTrack, Utterance};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseError = 4,
    SessionError = 5,
    Panic = 6,
}

/// Opaque commentary track.
pub struct LcTrack {
    inner: CommentaryTrack,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(LcStatus, String);

fn fail(status: LcStatus, msg: impl ToString) -> Fail {
    Fail(status, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LcStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(LcStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LcStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn language(p: *const c_char) -> Result<Language, Fail> {
    text(p, "language")?
        .parse()
        .map_err(|e| fail(LcStatus::InvalidArgument, e))
}

fn seconds(x: f64, name: &str) -> Result<Seconds, Fail> {
    Seconds::new(x).map_err(|e| fail(LcStatus::InvalidArgument, format!("{name}: {e}")))
}

fn out_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(LcStatus::InvalidArgument, "output contains NUL"))
}

unsafe fn store<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(fail(LcStatus::NullArgument, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn track<'a>(p: *const LcTrack) -> Result<&'a CommentaryTrack, Fail> {
    p.as_ref()
        .map(|t| &t.inner)
        .ok_or_else(|| fail(LcStatus::NullArgument, "track is null"))
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn lc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `video_id` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lc_track_new(video_id: *const c_char, duration: f64, out: *mut *mut LcTrack) -> LcStatus {
    guard(|| {
        let id = text(video_id, "video_id")?;
        let t = Box::new(LcTrack {
            inner: CommentaryTrack::new(id, seconds(duration, "duration")?),
        });
        store(out, Box::into_raw(t))
    })
}

/// # Safety
/// `t` is null or came from [`lc_track_new`] and was not freed before.
#[no_mangle]
pub unsafe extern "C" fn lc_track_free(t: *mut LcTrack) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Appends an utterance; starts must strictly increase.
///
/// # Safety
/// `t` is a live track; strings are NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn lc_track_push(
    t: *mut LcTrack,
    text_ptr: *const c_char,
    lang: *const c_char,
    start: f64,
    est_duration: f64,
) -> LcStatus {
    guard(|| {
        let t = t.as_mut().ok_or_else(|| fail(LcStatus::NullArgument, "track is null"))?;
        let u = Utterance::new(
            text(text_ptr, "text")?,
            language(lang)?,
            seconds(start, "start")?,
            seconds(est_duration, "est_duration")?,
        )
        .map_err(|e| fail(LcStatus::InvalidArgument, e))?;
        t.inner.push(u).map_err(|e| fail(LcStatus::InvalidArgument, e))
    })
}

/// Number of utterances, 0 for a null track.
///
/// # Safety
/// `t` is null or a live track.
#[no_mangle]
pub unsafe extern "C" fn lc_track_len(t: *const LcTrack) -> usize {
    t.as_ref().map_or(0, |t| t.inner.len())
}

/// # Safety
/// `t` is a live track; `out` is writable. Free the result with [`lc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn lc_track_to_srt(t: *const LcTrack, out: *mut *mut c_char) -> LcStatus {
    guard(|| {
        let s = out_string(to_srt(track(t)?))?;
        store(out, s)
    })
}

/// Per-second speaking agreement of two tracks of equal duration.
///
/// # Safety
/// Both tracks are live; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lc_timing_alignment(gen: *const LcTrack, reference: *const LcTrack, out: *mut f64) -> LcStatus {
    guard(|| {
        let v = timing_alignment(track(gen)?, track(reference)?).map_err(|e| fail(LcStatus::InvalidArgument, e))?;
        store(out, v)
    })
}

/// Speaking time at the default rates (4 words/s English, 8 characters/s Japanese).
///
/// # Safety
/// Strings are NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lc_estimate_duration(text_ptr: *const c_char, lang: *const c_char, out: *mut f64) -> LcStatus {
    guard(|| {
        let d = estimate_duration(text(text_ptr, "text")?, language(lang)?, &SpeechRateModel::default())
            .map_err(|e| fail(LcStatus::InvalidArgument, e))?;
        store(out, d.get())
    })
}

/// ROUGE-L F1 on a 0 to 100 scale.
///
/// # Safety
/// Strings are NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lc_rouge_l(
    candidate: *const c_char,
    reference: *const c_char,
    lang: *const c_char,
    out: *mut f64,
) -> LcStatus {
    guard(|| {
        let v = rouge_l(text(candidate, "candidate")?, text(reference, "reference")?, language(lang)?);
        store(out, v)
    })
}

/// Share of adjacent subtitle pairs whose intervals overlap.
///
/// # Safety
/// `srt` is NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn lc_srt_overlap(srt: *const c_char, out: *mut f64) -> LcStatus {
    guard(|| {
        let entries = parse_srt(text(srt, "srt")?).map_err(|e| fail(LcStatus::ParseError, e))?;
        store(out, overlap_proportion(&entries))
    })
}

/// Classifies a model reply. `*is_wait` is set to 1 for silence, 0 for speech;
/// for speech `*utterance` receives the normalized text, otherwise null.
///
/// # Safety
/// `raw` is NUL-terminated; `is_wait` and `utterance` are writable.
#[no_mangle]
pub unsafe extern "C" fn lc_parse_response(raw: *const c_char, is_wait: *mut c_int, utterance: *mut *mut c_char) -> LcStatus {
    guard(|| {
        if is_wait.is_null() || utterance.is_null() {
            return Err(fail(LcStatus::NullArgument, "output pointer is null"));
        }
        match parse_response(text(raw, "raw")?, Language::En) {
            ParsedResponse::Wait { .. } => {
                store(is_wait, 1)?;
                store(utterance, ptr::null_mut())
            }
            ParsedResponse::Speak { text, .. } => {
                let s = out_string(text)?;
                store(is_wait, 0)?;
                store(utterance, s)
            }
        }
    })
}

/// Runs one session against scripted replies with simulated time.
///
/// `manifest` and `script` hold file contents (manifest and script formats of
/// the command-line tool); `templates` is a built-in preset id. On success the
/// trace and SRT texts are written to `trace_out` and `srt_out`.
///
/// # Safety
/// Strings are NUL-terminated; both outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn lc_run_scripted(
    manifest: *const c_char,
    script: *const c_char,
    strategy: *const c_char,
    step: f64,
    templates: *const c_char,
    trace_out: *mut *mut c_char,
    srt_out: *mut *mut c_char,
) -> LcStatus {
    guard(|| {
        if trace_out.is_null() || srt_out.is_null() {
            return Err(fail(LcStatus::NullArgument, "output pointer is null"));
        }
        let store_ = parse_manifest(text(manifest, "manifest")?).map_err(|e| fail(LcStatus::ParseError, e))?;
        let backend = ScriptedBackend::parse(text(script, "script")?).map_err(|e| fail(LcStatus::ParseError, e))?;
        let kind: StrategyKind = text(strategy, "strategy")?
            .parse()
            .map_err(|e| fail(LcStatus::InvalidArgument, e))?;
        let preset = text(templates, "templates")?;
        let set = TemplateSet::builtin(preset)
            .ok_or_else(|| fail(LcStatus::InvalidArgument, format!("unknown template preset '{preset}'")))?;
        if kind == StrategyKind::FeedbackIcl {
            return Err(fail(LcStatus::InvalidArgument, "feedback-icl needs demonstrations; not available here"));
        }
        let mut config = StrategyConfig::new(kind, set.language());
        config.step = seconds(step, "step")?;
        let record = run_session(&store_, &config, &backend, &mut SimulatedClock::new(), &PromptSet::new(set))
            .map_err(|e| fail(LcStatus::SessionError, e))?;
        if !record.is_complete() {
            return Err(fail(LcStatus::SessionError, format!("{:?}", record.status)));
        }
        let trace = out_string(write_trace(&record))?;
        let srt = match out_string(to_srt(&record.track)) {
            Ok(s) => s,
            Err(e) => {
                lc_string_free(trace);
                return Err(e);
            }
        };
        store(trace_out, trace)?;
        store(srt_out, srt)
    })
}
