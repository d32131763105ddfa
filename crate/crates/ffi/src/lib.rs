//! C ABI over grammar expansion and the n-gram model.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every fallible call returns a [`SynevalStatus`]; on failure the message is
//! kept in a thread-local slot readable through [`syneval_last_error`] until
//! the next failing call on the same thread. Output pointers are written only
//! on success. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use syneval::corpus::{read_corpus, tokenize};
use syneval::grammar::Grammar;
use syneval::ngram::{train, NGramModel};
use syneval::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynevalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    Grammar = 6,
    Panic = 7,
}

/// Opaque grammar handle.
pub struct SynevalGrammar(Grammar);

/// Opaque n-gram model handle.
pub struct SynevalModel(NGramModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

struct Failure(SynevalStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } | Error::Stream(_) => SynevalStatus::Io,
            Error::Arpa { .. } | Error::Json { .. } | Error::ScoreRecord { .. } => SynevalStatus::Parse,
            Error::Grammar { .. } | Error::IdenticalContrast { .. } => SynevalStatus::Grammar,
            _ => SynevalStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SynevalStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SynevalStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SynevalStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SynevalStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SynevalStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// Null means "absent".
unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(SynevalStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(SynevalStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failure on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn syneval_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn syneval_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a bundled grammar by name, e.g. `"full.grammar"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn syneval_grammar_bundled(name: *const c_char, out: *mut *mut SynevalGrammar) -> SynevalStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        out_ptr(out, "out")?;
        let g = Grammar::bundled(name)?;
        *out = Box::into_raw(Box::new(SynevalGrammar(g)));
        Ok(())
    })
}

/// Loads a grammar file; includes resolve relative to its directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn syneval_grammar_load(path: *const c_char, out: *mut *mut SynevalGrammar) -> SynevalStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        out_ptr(out, "out")?;
        let g = Grammar::from_file(path)?;
        *out = Box::into_raw(Box::new(SynevalGrammar(g)));
        Ok(())
    })
}

/// # Safety
/// `grammar` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn syneval_grammar_free(grammar: *mut SynevalGrammar) {
    if !grammar.is_null() {
        drop(Box::from_raw(grammar));
    }
}

/// Number of conditions declared by the grammar.
///
/// # Safety
/// `grammar` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn syneval_grammar_condition_count(
    grammar: *const SynevalGrammar,
    out: *mut usize,
) -> SynevalStatus {
    guard(|| {
        let g = handle(grammar, "grammar")?;
        out_ptr(out, "out")?;
        *out = g.0.conditions.len();
        Ok(())
    })
}

/// Number of minimal pairs, for one condition id or all when `condition`
/// is null.
///
/// # Safety
/// `grammar` must be a live handle; `condition` null or NUL-terminated;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn syneval_grammar_pair_count(
    grammar: *const SynevalGrammar,
    condition: *const c_char,
    out: *mut usize,
) -> SynevalStatus {
    guard(|| {
        let g = handle(grammar, "grammar")?;
        let condition = opt_str_arg(condition, "condition")?;
        out_ptr(out, "out")?;
        known_condition(&g.0, condition)?;
        *out = g.0.generate_pairs_parallel(condition)?.len();
        Ok(())
    })
}

fn known_condition(g: &Grammar, condition: Option<&str>) -> Result<(), Failure> {
    match condition {
        Some(c) if g.condition(c).is_none() => Err(Failure(
            SynevalStatus::InvalidArgument,
            format!("unknown condition {c:?}"),
        )),
        _ => Ok(()),
    }
}

/// Writes the pairs of one condition (or all when null) as JSON Lines.
///
/// # Safety
/// `grammar` must be a live handle; `condition` null or NUL-terminated;
/// `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn syneval_grammar_write_pairs(
    grammar: *const SynevalGrammar,
    condition: *const c_char,
    path: *const c_char,
) -> SynevalStatus {
    guard(|| {
        let g = handle(grammar, "grammar")?;
        let condition = opt_str_arg(condition, "condition")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        known_condition(&g.0, condition)?;
        let pairs = g.0.generate_pairs_parallel(condition)?;
        syneval::jsonl::save(&pairs, &path)?;
        Ok(())
    })
}

/// Trains a modified Kneser-Ney model on a one-sentence-per-line corpus.
///
/// # Safety
/// `corpus_path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn syneval_model_train(
    corpus_path: *const c_char,
    order: usize,
    min_count: u64,
    out: *mut *mut SynevalModel,
) -> SynevalStatus {
    guard(|| {
        let path = str_arg(corpus_path, "corpus_path")?;
        out_ptr(out, "out")?;
        let corpus = read_corpus(path)?;
        let model = train(&corpus, order, min_count)?;
        *out = Box::into_raw(Box::new(SynevalModel(model)));
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn syneval_model_load_arpa(path: *const c_char, out: *mut *mut SynevalModel) -> SynevalStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        out_ptr(out, "out")?;
        let model = NGramModel::load_arpa(path)?;
        *out = Box::into_raw(Box::new(SynevalModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn syneval_model_save_arpa(model: *const SynevalModel, path: *const c_char) -> SynevalStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let path = str_arg(path, "path")?;
        m.0.save_arpa(path)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn syneval_model_free(model: *mut SynevalModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn syneval_model_order(model: *const SynevalModel, out: *mut usize) -> SynevalStatus {
    guard(|| {
        let m = handle(model, "model")?;
        out_ptr(out, "out")?;
        *out = m.0.order();
        Ok(())
    })
}

/// log10 probability of a whitespace-tokenized sentence, end marker included.
///
/// # Safety
/// `model` must be a live handle; `sentence` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn syneval_model_sentence_log10prob(
    model: *const SynevalModel,
    sentence: *const c_char,
    out: *mut f64,
) -> SynevalStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let sentence = str_arg(sentence, "sentence")?;
        out_ptr(out, "out")?;
        *out = m.0.sentence_logprob(&tokenize(sentence));
        Ok(())
    })
}

/// Perplexity over a one-sentence-per-line corpus file.
///
/// # Safety
/// `model` must be a live handle; `corpus_path` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn syneval_model_perplexity(
    model: *const SynevalModel,
    corpus_path: *const c_char,
    out: *mut f64,
) -> SynevalStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let path = str_arg(corpus_path, "corpus_path")?;
        out_ptr(out, "out")?;
        *out = m.0.perplexity(&read_corpus(path)?)?;
        Ok(())
    })
}
