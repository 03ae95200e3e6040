//! C ABI over the semshift core: opaque handles, integer status codes, and a
//! thread-local error message. The matching header is generated into
//! `include/semshift.h` when this crate builds.
//!
//! Ownership rules: a `*_load` or `*_knn` out-pointer hands the caller an
//! owned handle that must go back through the matching `*_free`; `NULL` is
//! always safe to free. Strings returned by accessors borrow from their
//! handle and die with it. Token arguments are NFC-normalized before lookup,
//! matching what the loaders did to the vocabulary.

use std::cell::RefCell;
use std::collections::HashSet;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use semshift::change::jaccard_distance;
use semshift::corpus::{nfc, EmbeddingSpace};
use semshift::neighborhood::knn;
use semshift::prototype::PrototypeModel;
use semshift::stats::pearson;
use semshift::Error;

/// Result of every fallible call. Anything but `SEMSHIFT_STATUS_OK` leaves a
/// message readable through `semshift_last_error` on the calling thread.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemshiftStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Format = 4,
    MissingWord = 5,
    InvalidArgument = 6,
    InsufficientData = 7,
    Internal = 8,
}

fn status_for(err: &Error) -> SemshiftStatus {
    match err {
        Error::Io { .. } => SemshiftStatus::Io,
        Error::Format { .. } | Error::DuplicateToken { .. } => SemshiftStatus::Format,
        Error::MissingWord { .. }
        | Error::MissingDecade(_)
        | Error::NotInLexicon { .. }
        | Error::UntaggedWord { .. }
        | Error::MissingRating { .. } => SemshiftStatus::MissingWord,
        Error::InvalidK(_)
        | Error::InvalidDecade(_)
        | Error::DecadeOrder { .. }
        | Error::Transform { .. }
        | Error::MissingColumn { .. }
        | Error::Config(_) => SemshiftStatus::InvalidArgument,
        Error::EmptySets
        | Error::EmptyCategory { .. }
        | Error::EmptyIntersection { .. }
        | Error::EmptyPool { .. }
        | Error::ZeroNorm { .. }
        | Error::InsufficientData { .. }
        | Error::Degenerate(_)
        | Error::Collinear { .. }
        | Error::Underdetermined { .. } => SemshiftStatus::InsufficientData,
        _ => SemshiftStatus::Internal,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail_with(status: SemshiftStatus, message: String) -> SemshiftStatus {
    let message = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained an interior NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
    status
}

fn fail(err: &Error) -> SemshiftStatus {
    fail_with(status_for(err), err.single_line())
}

/// Decodes a required string argument; `Err` already carries the status.
unsafe fn required_str<'a>(arg: *const c_char, name: &str) -> Result<&'a str, SemshiftStatus> {
    if arg.is_null() {
        return Err(fail_with(
            SemshiftStatus::NullArgument,
            format!("{name} is NULL"),
        ));
    }
    CStr::from_ptr(arg).to_str().map_err(|_| {
        fail_with(
            SemshiftStatus::InvalidUtf8,
            format!("{name} is not valid UTF-8"),
        )
    })
}

/// Decodes an array of NUL-terminated strings. A zero-length array may pass
/// `NULL` for the data pointer.
unsafe fn required_str_array(
    items: *const *const c_char,
    len: usize,
    name: &str,
) -> Result<Vec<String>, SemshiftStatus> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if items.is_null() {
        return Err(fail_with(
            SemshiftStatus::NullArgument,
            format!("{name} is NULL but {name}_len is {len}"),
        ));
    }
    let slice = std::slice::from_raw_parts(items, len);
    let mut out = Vec::with_capacity(len);
    for (i, &item) in slice.iter().enumerate() {
        out.push(nfc(required_str(item, &format!("{name}[{i}]"))?));
    }
    Ok(out)
}

unsafe fn required_out<'a, T>(out: *mut T, name: &str) -> Result<&'a mut T, SemshiftStatus> {
    out.as_mut().ok_or_else(|| {
        fail_with(SemshiftStatus::NullArgument, format!("{name} is NULL"))
    })
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn semshift_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message from the most recent failing call on this thread, or `NULL` when
/// nothing has failed yet. Valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn semshift_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(message) => message.as_ptr(),
        None => ptr::null(),
    })
}

/// Opaque embedding-space handle.
pub struct SemshiftSpace {
    space: EmbeddingSpace,
}

/// Opaque ranked-neighbour list, most similar first.
pub struct SemshiftNeighbors {
    tokens: Vec<CString>,
    similarities: Vec<f64>,
}

/// Loads an embedding space for `decade` from a text or binary container
/// file (the format is sniffed). On failure `out` is left untouched.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn semshift_space_load(
    path: *const c_char,
    decade: i32,
    out: *mut *mut SemshiftSpace,
) -> SemshiftStatus {
    let slot = match required_out(out, "out") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let path = match required_str(path, "path") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match EmbeddingSpace::load(Path::new(path), decade) {
        Ok(space) => {
            *slot = Box::into_raw(Box::new(SemshiftSpace { space }));
            SemshiftStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Releases a space handle. `NULL` is a no-op.
///
/// # Safety
/// `space` must be a pointer from `semshift_space_load`, freed once.
#[no_mangle]
pub unsafe extern "C" fn semshift_space_free(space: *mut SemshiftSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Vector dimensionality; 0 for a `NULL` handle.
///
/// # Safety
/// `space` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn semshift_space_dim(space: *const SemshiftSpace) -> usize {
    space.as_ref().map_or(0, |s| s.space.dim())
}

/// Vocabulary size; 0 for a `NULL` handle.
///
/// # Safety
/// `space` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn semshift_space_len(space: *const SemshiftSpace) -> usize {
    space.as_ref().map_or(0, |s| s.space.len())
}

/// Decade the space was loaded for; 0 for a `NULL` handle.
///
/// # Safety
/// `space` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn semshift_space_decade(space: *const SemshiftSpace) -> i32 {
    space.as_ref().map_or(0, |s| s.space.decade())
}

/// Whether `token` has a vector; false for `NULL` arguments.
///
/// # Safety
/// `space` must be `NULL` or a live handle; `token` `NULL` or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn semshift_space_contains(
    space: *const SemshiftSpace,
    token: *const c_char,
) -> bool {
    let Some(handle) = space.as_ref() else {
        return false;
    };
    if token.is_null() {
        return false;
    }
    match CStr::from_ptr(token).to_str() {
        Ok(token) => handle.space.contains(&nfc(token)),
        Err(_) => false,
    }
}

unsafe fn space_arg<'a>(
    space: *const SemshiftSpace,
    name: &str,
) -> Result<&'a EmbeddingSpace, SemshiftStatus> {
    match space.as_ref() {
        Some(handle) => Ok(&handle.space),
        None => Err(fail_with(
            SemshiftStatus::NullArgument,
            format!("{name} is NULL"),
        )),
    }
}

/// Cosine similarity between two tokens of one space.
///
/// # Safety
/// Pointer arguments must be valid as documented on `semshift_space_load`.
#[no_mangle]
pub unsafe extern "C" fn semshift_space_cosine(
    space: *const SemshiftSpace,
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> SemshiftStatus {
    let (space, a, b, out) = match (
        space_arg(space, "space"),
        required_str(a, "a"),
        required_str(b, "b"),
        required_out(out, "out"),
    ) {
        (Ok(s), Ok(a), Ok(b), Ok(o)) => (s, a, b, o),
        (Err(e), ..) | (_, Err(e), ..) | (_, _, Err(e), _) | (_, _, _, Err(e)) => return e,
    };
    match space.cosine(&nfc(a), &nfc(b)) {
        Ok(value) => {
            *out = value;
            SemshiftStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Ranks the `k` nearest neighbours of `token` over the space's whole
/// vocabulary (this ABI exposes no POS filtering). Fewer than `k` rows come
/// back when the vocabulary is smaller. On failure `out` is left untouched.
///
/// # Safety
/// Pointer arguments must be valid as documented on `semshift_space_load`.
#[no_mangle]
pub unsafe extern "C" fn semshift_space_knn(
    space: *const SemshiftSpace,
    token: *const c_char,
    k: usize,
    out: *mut *mut SemshiftNeighbors,
) -> SemshiftStatus {
    let (space, token, slot) = match (
        space_arg(space, "space"),
        required_str(token, "token"),
        required_out(out, "out"),
    ) {
        (Ok(s), Ok(t), Ok(o)) => (s, t, o),
        (Err(e), ..) | (_, Err(e), _) | (_, _, Err(e)) => return e,
    };
    match knn(space, &nfc(token), k, None, None) {
        Ok(set) => {
            let mut tokens = Vec::with_capacity(set.len());
            let mut similarities = Vec::with_capacity(set.len());
            for neighbor in set.neighbors() {
                // Loader tokens never contain NUL, so this cannot fail.
                tokens.push(CString::new(neighbor.token.as_str()).expect("no interior NUL"));
                similarities.push(neighbor.similarity);
            }
            *slot = Box::into_raw(Box::new(SemshiftNeighbors {
                tokens,
                similarities,
            }));
            SemshiftStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Number of neighbours in the list; 0 for a `NULL` handle.
///
/// # Safety
/// `neighbors` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn semshift_neighbors_len(neighbors: *const SemshiftNeighbors) -> usize {
    neighbors.as_ref().map_or(0, |n| n.tokens.len())
}

/// Borrowed token at `index` (most similar first); `NULL` when out of range.
/// The pointer dies with the handle.
///
/// # Safety
/// `neighbors` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn semshift_neighbors_token(
    neighbors: *const SemshiftNeighbors,
    index: usize,
) -> *const c_char {
    neighbors
        .as_ref()
        .and_then(|n| n.tokens.get(index))
        .map_or(ptr::null(), |t| t.as_ptr())
}

/// Cosine similarity at `index`; NaN when out of range.
///
/// # Safety
/// `neighbors` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn semshift_neighbors_similarity(
    neighbors: *const SemshiftNeighbors,
    index: usize,
) -> f64 {
    neighbors
        .as_ref()
        .and_then(|n| n.similarities.get(index))
        .copied()
        .unwrap_or(f64::NAN)
}

/// Releases a neighbour list. `NULL` is a no-op.
///
/// # Safety
/// `neighbors` must be a pointer from `semshift_space_knn`, freed once.
#[no_mangle]
pub unsafe extern "C" fn semshift_neighbors_free(neighbors: *mut SemshiftNeighbors) {
    if !neighbors.is_null() {
        drop(Box::from_raw(neighbors));
    }
}

/// Neighbourhood-turnover change rate of `token` between two spaces: one
/// minus the Jaccard overlap of the two `k`-nearest-neighbour sets, in
/// [0, 1]. Each pool is its space's whole vocabulary.
///
/// # Safety
/// Pointer arguments must be valid as documented on `semshift_space_load`.
#[no_mangle]
pub unsafe extern "C" fn semshift_change_rate(
    earlier: *const SemshiftSpace,
    later: *const SemshiftSpace,
    token: *const c_char,
    k: usize,
    out: *mut f64,
) -> SemshiftStatus {
    let (earlier, later, token, out) = match (
        space_arg(earlier, "earlier"),
        space_arg(later, "later"),
        required_str(token, "token"),
        required_out(out, "out"),
    ) {
        (Ok(s1), Ok(s2), Ok(t), Ok(o)) => (s1, s2, t, o),
        (Err(e), ..) | (_, Err(e), ..) | (_, _, Err(e), _) | (_, _, _, Err(e)) => return e,
    };
    let token = nfc(token);
    let result = knn(earlier, &token, k, None, None).and_then(|a| {
        let b = knn(later, &token, k, None, None)?;
        jaccard_distance(&a.token_set(), &b.token_set())
    });
    match result {
        Ok(rate) => {
            *out = rate;
            SemshiftStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Jaccard distance between two string sets (duplicates collapse). Undefined
/// and an error when both sets are empty.
///
/// # Safety
/// `a` and `b` must point to `a_len`/`b_len` NUL-terminated strings; either
/// pointer may be `NULL` when its length is 0.
#[no_mangle]
pub unsafe extern "C" fn semshift_jaccard(
    a: *const *const c_char,
    a_len: usize,
    b: *const *const c_char,
    b_len: usize,
    out: *mut f64,
) -> SemshiftStatus {
    let (a, b, out) = match (
        required_str_array(a, a_len, "a"),
        required_str_array(b, b_len, "b"),
        required_out(out, "out"),
    ) {
        (Ok(a), Ok(b), Ok(o)) => (a, b, o),
        (Err(e), ..) | (_, Err(e), _) | (_, _, Err(e)) => return e,
    };
    let a: HashSet<String> = a.into_iter().collect();
    let b: HashSet<String> = b.into_iter().collect();
    match jaccard_distance(&a, &b) {
        Ok(value) => {
            *out = value;
            SemshiftStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Pearson correlation of two length-`n` samples and its two-tailed p-value.
/// Either out-pointer may be `NULL` when that value is not needed.
///
/// # Safety
/// `x` and `y` must point to `n` doubles each.
#[no_mangle]
pub unsafe extern "C" fn semshift_pearson(
    x: *const f64,
    y: *const f64,
    n: usize,
    out_rho: *mut f64,
    out_p: *mut f64,
) -> SemshiftStatus {
    if x.is_null() || y.is_null() {
        return fail_with(SemshiftStatus::NullArgument, "x or y is NULL".into());
    }
    let x = std::slice::from_raw_parts(x, n);
    let y = std::slice::from_raw_parts(y, n);
    match pearson(x, y) {
        Ok(result) => {
            if let Some(rho) = out_rho.as_mut() {
                *rho = result.rho;
            }
            if let Some(p) = out_p.as_mut() {
                *p = result.p;
            }
            SemshiftStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Log-density of `token` under the unit-variance Gaussian prototype fitted
/// to `members` (larger means more prototypical). Every member must have a
/// vector in the space.
///
/// # Safety
/// Pointer arguments must be valid as documented on `semshift_jaccard`.
#[no_mangle]
pub unsafe extern "C" fn semshift_prototype_score(
    space: *const SemshiftSpace,
    members: *const *const c_char,
    members_len: usize,
    token: *const c_char,
    out: *mut f64,
) -> SemshiftStatus {
    let (space, members, token, out) = match (
        space_arg(space, "space"),
        required_str_array(members, members_len, "members"),
        required_str(token, "token"),
        required_out(out, "out"),
    ) {
        (Ok(s), Ok(m), Ok(t), Ok(o)) => (s, m, t, o),
        (Err(e), ..) | (_, Err(e), ..) | (_, _, Err(e), _) | (_, _, _, Err(e)) => return e,
    };
    let result = PrototypeModel::fit(space, "prototype", &members)
        .and_then(|model| model.score_token(space, &nfc(token)));
    match result {
        Ok(score) => {
            *out = score;
            SemshiftStatus::Ok
        }
        Err(e) => fail(&e),
    }
}
