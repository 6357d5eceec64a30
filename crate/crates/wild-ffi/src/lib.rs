//! C ABI over the workflow engine's model layer: parse a Turtle document
//! into an opaque model handle, ask it about its shape, and check traces
//! of completed activities against it. Every function is callable from C;
//! the generated header lives in `include/wild.h`.
//!
//! Error reporting follows the usual C pattern: functions that can fail
//! return NULL or a status code, and `wild_last_error` retrieves a
//! human-readable message for the current thread's most recent failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use wild::petri::{compile, conformance, Conformance, PetriNet};
use wild::rdf::{parse_turtle, Term, RDF_TYPE};
use wild::semantics::WorkflowModel;
use wild::vocab::wild as vocab;

/// Outcome of an FFI call. Anything other than `Ok` leaves a message for
/// `wild_last_error`, except the two trace verdicts, which are answers
/// rather than failures.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WildStatus {
    /// The call succeeded; for trace checks, the trace is a complete run.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The document is not parseable Turtle.
    ParseError = 3,
    /// The document parsed but holds no single valid workflow.
    ModelError = 4,
    /// The trace is a conformant prefix of a run that never finished.
    TraceIncomplete = 5,
    /// The trace breaks the model's order; see the reported position.
    TraceViolation = 6,
}

/// A parsed workflow model together with its compiled net. Opaque to C:
/// create with `wild_model_parse`, release with `wild_model_free`.
pub struct WildModel {
    model: WorkflowModel,
    net: PetriNet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let stored = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = stored);
}

/// Returns the message left by the current thread's most recent failed
/// call, or an empty string. The pointer stays valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn wild_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a Turtle document holding exactly one workflow and returns a
/// handle to it, or NULL with `wild_last_error` set.
///
/// `base` is the absolute IRI the document is read under; relative IRIs
/// in the document resolve against it.
///
/// # Safety
///
/// `turtle` and `base` must be NUL-terminated strings, readable for their
/// whole length, and the returned handle must be released exactly once
/// with `wild_model_free`.
#[no_mangle]
pub unsafe extern "C" fn wild_model_parse(
    turtle: *const c_char,
    base: *const c_char,
) -> *mut WildModel {
    let (Some(turtle), Some(base)) = (cstr(turtle), cstr(base)) else {
        set_error("turtle and base must be non-NULL");
        return std::ptr::null_mut();
    };
    let (Some(turtle), Some(base)) = (utf8(turtle), utf8(base)) else {
        set_error("turtle and base must be UTF-8");
        return std::ptr::null_mut();
    };
    let graph = match parse_turtle(turtle, Some(base)) {
        Ok(g) => g,
        Err(e) => {
            set_error(e.to_string());
            return std::ptr::null_mut();
        }
    };
    let workflows: Vec<Term> = graph
        .subjects(&Term::iri(RDF_TYPE), &Term::iri(vocab::WORKFLOW))
        .cloned()
        .collect();
    let [workflow] = workflows.as_slice() else {
        set_error(format!("expected exactly one workflow, found {}", workflows.len()));
        return std::ptr::null_mut();
    };
    match WorkflowModel::from_graph(&graph, workflow) {
        Ok(model) => {
            let net = compile(&model);
            Box::into_raw(Box::new(WildModel { model, net }))
        }
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Releases a handle returned by `wild_model_parse`. NULL is a no-op.
///
/// # Safety
///
/// `model` must be a handle from `wild_model_parse` that has not been
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn wild_model_free(model: *mut WildModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of activities in the model, composites included. Zero for NULL.
///
/// # Safety
///
/// `model` must be NULL or a live handle from `wild_model_parse`.
#[no_mangle]
pub unsafe extern "C" fn wild_model_activity_count(model: *const WildModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.nodes.len())
}

/// Number of atomic activities in the model. Zero for NULL.
///
/// # Safety
///
/// `model` must be NULL or a live handle from `wild_model_parse`.
#[no_mangle]
pub unsafe extern "C" fn wild_model_atomic_count(model: *const WildModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.atomics().count())
}

/// Checks a trace of completed activities, given as activity IRIs in
/// completion order, against the model.
///
/// Returns `Ok` for a complete conformant run, `TraceIncomplete` for a
/// conformant prefix that never finished, or `TraceViolation` with the
/// offending index written to `violation_position` (when non-NULL).
///
/// # Safety
///
/// `model` must be a live handle; `completed` must point to `len`
/// NUL-terminated strings (it may be NULL only when `len` is zero);
/// `violation_position` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn wild_model_check_trace(
    model: *const WildModel,
    completed: *const *const c_char,
    len: usize,
    violation_position: *mut usize,
) -> WildStatus {
    let Some(handle) = model.as_ref() else {
        set_error("model must be non-NULL");
        return WildStatus::NullArgument;
    };
    if completed.is_null() && len > 0 {
        set_error("completed must be non-NULL when len > 0");
        return WildStatus::NullArgument;
    }
    let mut word = Vec::with_capacity(len);
    for i in 0..len {
        let Some(s) = cstr(*completed.add(i)) else {
            set_error(format!("completed[{i}] is NULL"));
            return WildStatus::NullArgument;
        };
        let Some(iri) = utf8(s) else {
            set_error(format!("completed[{i}] is not UTF-8"));
            return WildStatus::InvalidUtf8;
        };
        word.push(Term::iri(iri));
    }
    match conformance(&handle.net, &word) {
        Conformance::Conformant { complete: true } => WildStatus::Ok,
        Conformance::Conformant { complete: false } => WildStatus::TraceIncomplete,
        Conformance::Violation { position } => {
            if let Some(out) = violation_position.as_mut() {
                *out = position;
            }
            WildStatus::TraceViolation
        }
    }
}

unsafe fn cstr<'a>(p: *const c_char) -> Option<&'a CStr> {
    if p.is_null() {
        None
    } else {
        Some(CStr::from_ptr(p))
    }
}

fn utf8(s: &CStr) -> Option<&str> {
    s.to_str().ok()
}
