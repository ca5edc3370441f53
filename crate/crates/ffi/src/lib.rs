//! C ABI for `wals-typology`.
//!
//! Objects are opaque handles created by `*_load` functions and released
//! with the matching `*_free`. Fallible calls return a [`WtStatus`]; on
//! failure [`wt_last_error`] describes the most recent error on the calling
//! thread. Strings returned through out-parameters are owned by the caller
//! and must be released with [`wt_string_free`].

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use wals_typology::corpus::{corpus_languages, read_corpus, ParallelCorpus};
use wals_typology::evaluation::{emit_report, run_experiments, text_table, GridConfig, ReportFormat};
use wals_typology::extraction::{extract_all, text_vector, ExtractionConfig};
use wals_typology::synthetic::{default_benchmark, write_benchmark};
use wals_typology::wals::{load_wals_csv, WalsDatabase};
use wals_typology::{Error, RuleId};

/// Result of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WtStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    BufferTooSmall = 3,
    Config = 4,
    Data = 5,
    Invariant = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WtReportFormat {
    Tsv = 0,
    Markdown = 1,
}

/// A loaded WALS database.
pub struct WtDatabase(WalsDatabase);

/// A loaded parallel corpus for one language.
pub struct WtCorpus(ParallelCorpus);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WtStatus {
    match e.exit_code() {
        2 => WtStatus::Config,
        4 => WtStatus::Invariant,
        _ => WtStatus::Data,
    }
}

struct Failure(WtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WtStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WtStatus::Panic
        }
    }
}

unsafe fn arg_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(WtStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(WtStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

unsafe fn arg_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(WtStatus::NullArgument, format!("`{name}` is null")))
}

unsafe fn arg_out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure(WtStatus::NullArgument, format!("`{name}` is null")))
}

fn into_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn wt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or null if none. Free
/// with `wt_string_free`.
#[no_mangle]
pub extern "C" fn wt_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads `wals.csv` and `rules.csv`.
///
/// # Safety
/// Paths must be nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wt_database_load(
    wals_path: *const c_char,
    rules_path: *const c_char,
    out: *mut *mut WtDatabase,
) -> WtStatus {
    guard(|| {
        let out = arg_out(out, "out")?;
        *out = ptr::null_mut();
        let db = load_wals_csv(arg_str(wals_path, "wals_path")?, arg_str(rules_path, "rules_path")?)?;
        *out = Box::into_raw(Box::new(WtDatabase(db)));
        Ok(())
    })
}

/// # Safety
/// `db` must be null or a handle from `wt_database_load`, freed once.
#[no_mangle]
pub unsafe extern "C" fn wt_database_free(db: *mut WtDatabase) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// # Safety
/// `db` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn wt_database_language_count(db: *const WtDatabase) -> usize {
    db.as_ref().map_or(0, |d| d.0.languages().len())
}

/// Loads `<dir>/source.conll`, `target.txt` and `align.txt`.
///
/// # Safety
/// Strings must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wt_corpus_load(dir: *const c_char, language_code: *const c_char, out: *mut *mut WtCorpus) -> WtStatus {
    guard(|| {
        let out = arg_out(out, "out")?;
        *out = ptr::null_mut();
        let corpus = read_corpus(arg_str(dir, "dir")?, arg_str(language_code, "language_code")?)?;
        *out = Box::into_raw(Box::new(WtCorpus(corpus)));
        Ok(())
    })
}

/// # Safety
/// `corpus` must be null or a handle from `wt_corpus_load`, freed once.
#[no_mangle]
pub unsafe extern "C" fn wt_corpus_free(corpus: *mut WtCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of sentence pairs.
///
/// # Safety
/// `corpus` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn wt_corpus_len(corpus: *const WtCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.pairs.len())
}

/// Writes the normalized text feature vector of `rule` into `values`.
/// `len` receives the vector length; if `capacity` is smaller, nothing is
/// written and `WT_STATUS_BUFFER_TOO_SMALL` is returned. For 92A,
/// `particle` (if non-null) receives the inferred particle or null.
///
/// # Safety
/// `values` must hold `capacity` doubles; other pointers as documented.
#[no_mangle]
pub unsafe extern "C" fn wt_text_vector(
    corpus: *const WtCorpus,
    rule: *const c_char,
    values: *mut f64,
    capacity: usize,
    len: *mut usize,
    particle: *mut *mut c_char,
) -> WtStatus {
    guard(|| {
        let corpus = arg_ref(corpus, "corpus")?;
        let rule = RuleId::from(arg_str(rule, "rule")?);
        let len = arg_out(len, "len")?;
        let v = text_vector(&rule, &corpus.0, &ExtractionConfig::default()).ok_or(Error::UnknownRule(rule))?;
        *len = v.normalized.len();
        if let Some(p) = particle.as_mut() {
            *p = v.particle.map_or(ptr::null_mut(), into_c);
        }
        if capacity < v.normalized.len() {
            return Err(Failure(WtStatus::BufferTooSmall, format!("need {} values", v.normalized.len())));
        }
        if values.is_null() {
            return Err(Failure(WtStatus::NullArgument, "`values` is null".into()));
        }
        std::slice::from_raw_parts_mut(values, v.normalized.len()).copy_from_slice(&v.normalized);
        Ok(())
    })
}

/// Runs the leave-one-out grids for `rules` (comma separated, or null for
/// all six) over every language directory in `corpus_dir` and returns the
/// report text in `out`.
///
/// # Safety
/// Strings must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wt_evaluate_report(
    db: *const WtDatabase,
    corpus_dir: *const c_char,
    rules: *const c_char,
    format: WtReportFormat,
    out: *mut *mut c_char,
) -> WtStatus {
    guard(|| {
        let out = arg_out(out, "out")?;
        *out = ptr::null_mut();
        let db = arg_ref(db, "db")?;
        let dir = PathBuf::from(arg_str(corpus_dir, "corpus_dir")?);
        let rules: Vec<RuleId> = if rules.is_null() {
            wals_typology::rules::study_rules()
        } else {
            arg_str(rules, "rules")?.split(',').map(|r| RuleId::from(r.trim())).collect()
        };
        let corpora =
            corpus_languages(&dir)?.into_iter().map(|(code, path)| read_corpus(path, &code)).collect::<Result<Vec<_>, _>>()?;
        let vectors = extract_all(&corpora, &rules, &ExtractionConfig::default())?;
        let set: BTreeSet<String> = corpora.iter().map(|c| c.language_code.clone()).collect();
        let report = run_experiments(&db.0, &text_table(&vectors), &set, &rules, &GridConfig::default())?;
        let format = match format {
            WtReportFormat::Tsv => ReportFormat::Tsv,
            WtReportFormat::Markdown => ReportFormat::Markdown,
        };
        *out = into_c(emit_report(&report, format));
        Ok(())
    })
}

/// Writes the default synthetic benchmark with the given seed and sentence
/// count (0 keeps the default) into `dir`.
///
/// # Safety
/// `dir` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wt_synth_benchmark(dir: *const c_char, seed: u64, sentences: usize) -> WtStatus {
    guard(|| {
        let dir = arg_str(dir, "dir")?;
        let mut spec = default_benchmark();
        spec.seed = seed;
        if sentences > 0 {
            spec.sentences_per_language = sentences;
        }
        write_benchmark(&spec, dir)?;
        Ok(())
    })
}
