//! C ABI for the phrase-parallel TTS engine.
//!
//! Every fallible call returns a [`PtStatus`]; on failure the message is
//! available from [`pt_last_error_message`] on the same thread until the
//! next call. Handles are opaque and must be released with their matching
//! `*_free` function. Strings are UTF-8 and NUL-terminated.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use phrase_tts::acoustic::{read_mel, read_weights, write_mel, MelSpectrogram, ModelConfig, ModelWeights};
use phrase_tts::crf::{parse_corpus, read_model, train_crf, CrfModel, TrainConfig};
use phrase_tts::frontend::{segment_phrases, tokenize, Frontend, BUNDLED_CORPUS};
use phrase_tts::scheduler::{
    synthesize_sentence_ar_baseline, synthesize_sentence_parallel, synthesize_sentence_sequential,
    FrameLimit, Resources, SynthOptions, WorkerPool,
};
use phrase_tts::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8, out-of-range option.
    InvalidArgument = 1,
    Io = 2,
    /// Malformed model, corpus, lexicon or tensor file.
    Format = 3,
    /// Text that the lexicon cannot cover.
    Unsegmentable = 4,
    /// Shape mismatch or non-finite numbers.
    Numeric = 5,
    /// Internal panic caught at the boundary.
    Internal = 6,
}

/// Phrase-parallel synthesis (the default).
pub const PT_MODE_PARALLEL: u32 = 0;
/// Same pipeline, one phrase at a time on the calling thread.
pub const PT_MODE_SEQUENTIAL: u32 = 1;
/// Whole sentence decoded as a single unit.
pub const PT_MODE_AR_BASELINE: u32 = 2;

/// Paths may be null to select the bundled or generated default.
#[repr(C)]
pub struct PtEngineConfig {
    /// Lexicon TSV; needs `phones_path` too.
    pub lexicon_path: *const c_char,
    pub phones_path: *const c_char,
    /// PPCF boundary model; null trains one on the bundled corpus.
    pub crf_path: *const c_char,
    /// PPSW weights; null generates small-preset weights from `seed`.
    pub weights_path: *const c_char,
    /// Reference mel; null uses a seeded synthetic one.
    pub ref_mel_path: *const c_char,
    pub seed: u64,
    /// Worker threads for parallel mode, at least 1.
    pub workers: u32,
}

#[repr(C)]
pub struct PtSynthOptions {
    pub mode: u32,
    /// Frame cap per decode; 0 means 30 frames per phoneme.
    pub max_frames: u32,
    /// Stop-token probability threshold; 1.0 or more never stops early.
    pub stop_threshold: f32,
}

/// Opaque engine: frontend, boundary model, weights and worker pool.
pub struct PtEngine {
    frontend: Frontend,
    crf: CrfModel,
    weights: ModelWeights,
    reference: MelSpectrogram,
    pool: WorkerPool,
}

/// Opaque mel-spectrogram, row-major `[frames, bins]` f32.
pub struct PtMel {
    mel: MelSpectrogram,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PtStatus {
    match e {
        Error::Io(_) => PtStatus::Io,
        Error::Parse { .. } | Error::Format { .. } | Error::MissingTensor(_) => PtStatus::Format,
        Error::UnsegmentableInput { .. } | Error::EmptyInput | Error::UnknownPhoneme(_) => {
            PtStatus::Unsegmentable
        }
        Error::ShapeMismatch { .. } | Error::NonFiniteLoss { .. } => PtStatus::Numeric,
        Error::UnknownPhonemeId { .. } | Error::InvalidArgument(_) => PtStatus::InvalidArgument,
    }
}

struct Failure(PtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(PtStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any error or panic message, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PtStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal error: {msg}"));
            PtStatus::Internal
        }
    }
}

unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    opt_str(p, what)?.ok_or_else(|| invalid(format!("{what} is null")))
}

fn open(path: &str) -> Result<BufReader<File>, Failure> {
    Ok(BufReader::new(File::open(PathBuf::from(path)).map_err(Error::from)?))
}

fn build_engine(cfg: &PtEngineConfig) -> Result<PtEngine, Failure> {
    // SAFETY: the caller guarantees each non-null path is a valid C string.
    let (lexicon, phones, crf_path, weights_path, ref_path) = unsafe {
        (
            opt_str(cfg.lexicon_path, "lexicon_path")?,
            opt_str(cfg.phones_path, "phones_path")?,
            opt_str(cfg.crf_path, "crf_path")?,
            opt_str(cfg.weights_path, "weights_path")?,
            opt_str(cfg.ref_mel_path, "ref_mel_path")?,
        )
    };
    let frontend = match (lexicon, phones) {
        (Some(l), Some(p)) => Frontend::load(l, p)?,
        (None, None) => Frontend::bundled(),
        _ => return Err(invalid("lexicon_path and phones_path must be given together")),
    };
    let crf = match crf_path {
        Some(p) => read_model(open(p)?)?,
        None => train_crf(&parse_corpus(BUNDLED_CORPUS)?, &TrainConfig::default())?.0,
    };
    let weights = match weights_path {
        Some(p) => read_weights(open(p)?)?,
        None => ModelWeights::generate(ModelConfig::small(frontend.inventory.len()), cfg.seed),
    };
    if weights.config().n_phonemes != frontend.inventory.len() {
        return Err(invalid(format!(
            "weights cover {} phonemes, inventory has {}",
            weights.config().n_phonemes,
            frontend.inventory.len()
        )));
    }
    let reference = match ref_path {
        Some(p) => read_mel(open(p)?)?,
        None => MelSpectrogram::synthetic(80, cfg.seed),
    };
    let pool = WorkerPool::new(cfg.workers as usize)?;
    Ok(PtEngine { frontend, crf, weights, reference, pool })
}

/// Creates an engine. On success `*out` owns it; release with [`pt_engine_free`].
///
/// # Safety
/// `config` and `out` must be valid pointers; non-null paths must be C strings.
#[no_mangle]
pub unsafe extern "C" fn pt_engine_new(config: *const PtEngineConfig, out: *mut *mut PtEngine) -> PtStatus {
    guard(|| {
        if config.is_null() || out.is_null() {
            return Err(invalid("config and out must be non-null"));
        }
        *out = ptr::null_mut();
        let engine = build_engine(&*config)?;
        *out = Box::into_raw(Box::new(engine));
        Ok(())
    })
}

/// # Safety
/// `engine` must come from [`pt_engine_new`] and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn pt_engine_free(engine: *mut PtEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Number of phonemes the engine's inventory defines.
///
/// # Safety
/// `engine` must be a live engine or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn pt_engine_phoneme_count(engine: *const PtEngine) -> usize {
    engine.as_ref().map_or(0, |e| e.frontend.inventory.len())
}

/// Segments one sentence. `*out` receives one phrase per line, tokens
/// separated by spaces and ` |L3|` after every non-final phrase; release it
/// with [`pt_string_free`].
///
/// # Safety
/// `engine` must be live, `text` a C string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pt_engine_segment(
    engine: *const PtEngine,
    text: *const c_char,
    out: *mut *mut c_char,
) -> PtStatus {
    guard(|| {
        let engine = engine.as_ref().ok_or_else(|| invalid("engine is null"))?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = ptr::null_mut();
        let text = req_str(text, "text")?;
        let sentence = tokenize(text, &engine.frontend.lexicon)?;
        let phrases = segment_phrases(&sentence, &engine.crf)?;
        let mut s = String::new();
        for p in &phrases {
            let words: Vec<&str> = sentence.tokens()[p.start..p.end].iter().map(|t| t.text.as_str()).collect();
            s.push_str(&words.join(" "));
            if p.index_in_sentence + 1 < p.total_in_sentence {
                s.push_str(" |L3|");
            }
            s.push('\n');
        }
        *out = CString::new(s).map_err(|_| invalid("segment output contains NUL"))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn pt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Synthesizes one sentence into a mel-spectrogram handle. `options` may be
/// null for parallel mode with default limits.
///
/// # Safety
/// `engine` must be live, `text` a C string, `options` valid or null, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pt_engine_synthesize(
    engine: *const PtEngine,
    text: *const c_char,
    options: *const PtSynthOptions,
    out: *mut *mut PtMel,
) -> PtStatus {
    guard(|| {
        let engine = engine.as_ref().ok_or_else(|| invalid("engine is null"))?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = ptr::null_mut();
        let text = req_str(text, "text")?;
        let (mode, opts) = match options.as_ref() {
            None => (PT_MODE_PARALLEL, SynthOptions::default()),
            Some(o) => {
                if !o.stop_threshold.is_finite() {
                    return Err(invalid("stop_threshold must be finite"));
                }
                let frame_limit = match o.max_frames {
                    0 => FrameLimit::default(),
                    n => FrameLimit::Absolute(n as usize),
                };
                (o.mode, SynthOptions { frame_limit, stop_threshold: o.stop_threshold, prenet_dropout: None })
            }
        };
        let res = Resources {
            frontend: &engine.frontend,
            crf: &engine.crf,
            weights: &engine.weights,
            reference_mel: &engine.reference,
        };
        let sentence = tokenize(text, &engine.frontend.lexicon)?;
        let synth = match mode {
            PT_MODE_PARALLEL => synthesize_sentence_parallel(&sentence, &res, &opts, &engine.pool)?,
            PT_MODE_SEQUENTIAL => synthesize_sentence_sequential(&sentence, &res, &opts)?,
            PT_MODE_AR_BASELINE => synthesize_sentence_ar_baseline(&sentence, &res, &opts)?,
            other => return Err(invalid(format!("unknown mode {other}"))),
        };
        *out = Box::into_raw(Box::new(PtMel { mel: synth.mel }));
        Ok(())
    })
}

/// # Safety
/// `mel` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn pt_mel_frames(mel: *const PtMel) -> usize {
    mel.as_ref().map_or(0, |m| m.mel.frame_count())
}

/// # Safety
/// `mel` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn pt_mel_bins(mel: *const PtMel) -> usize {
    mel.as_ref().map_or(0, |m| m.mel.frames().dim(1))
}

/// # Safety
/// `mel` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn pt_mel_frame_period_us(mel: *const PtMel) -> u32 {
    mel.as_ref().map_or(0, |m| m.mel.frame_period_us)
}

/// Row-major `frames × bins` values, valid until the handle is freed.
///
/// # Safety
/// `mel` must be a live handle or null (returns null).
#[no_mangle]
pub unsafe extern "C" fn pt_mel_data(mel: *const PtMel) -> *const f32 {
    mel.as_ref().map_or(ptr::null(), |m| m.mel.frames().data().as_ptr())
}

/// Writes the mel in the engine's mel file format.
///
/// # Safety
/// `mel` must be live and `path` a C string.
#[no_mangle]
pub unsafe extern "C" fn pt_mel_write(mel: *const PtMel, path: *const c_char) -> PtStatus {
    guard(|| {
        let mel = mel.as_ref().ok_or_else(|| invalid("mel is null"))?;
        let path = req_str(path, "path")?;
        let mut w = BufWriter::new(File::create(path).map_err(Error::from)?);
        write_mel(&mel.mel, &mut w)?;
        w.flush().map_err(Error::from)?;
        Ok(())
    })
}

/// # Safety
/// `mel` must come from [`pt_engine_synthesize`] and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn pt_mel_free(mel: *mut PtMel) {
    if !mel.is_null() {
        drop(Box::from_raw(mel));
    }
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn pt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn pt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
