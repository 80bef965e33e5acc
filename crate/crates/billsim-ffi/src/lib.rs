//! C ABI over the billsim kernels: alignment scoring/features, trained-model
//! prediction, weighted kappa, and bill-level aggregation from a label
//! matrix.
//!
//! Conventions: every function returns a [`BillsimStatus`]; results go to
//! caller-provided out-pointers; text is NUL-terminated UTF-8; the classifier
//! is an opaque handle created by [`billsim_classifier_load`] and released by
//! [`billsim_classifier_free`]. The generated header lives at
//! `include/billsim.h`.

use std::ffi::CStr;
use std::os::raw::c_char;
use std::ptr;

use billsim::aggregate;
use billsim::align::{self, AlignmentParams};
use billsim::classify::PairClassifier;
use billsim::corpus::{tokenize, Subsection};
use billsim::metrics::{weighted_kappa, KappaWeighting};

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BillsimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    IoError = 4,
    ParseError = 5,
}

/// Alignment scoring parameters (mismatch and gap penalties are <= 0).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BillsimAlignParams {
    pub match_score: f64,
    pub mismatch: f64,
    pub gap_open: f64,
    pub gap_extend: f64,
}

impl From<BillsimAlignParams> for AlignmentParams {
    fn from(p: BillsimAlignParams) -> Self {
        AlignmentParams {
            match_score: p.match_score,
            mismatch: p.mismatch,
            gap_open: p.gap_open,
            gap_extend: p.gap_extend,
        }
    }
}

/// Local alignment outcome; spans are half-open token ranges.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BillsimAlignResult {
    pub raw_score: f64,
    pub a_start: u64,
    pub a_end: u64,
    pub b_start: u64,
    pub b_end: u64,
    pub aligned_len: u64,
}

/// Opaque trained-classifier handle.
pub struct BillsimClassifier {
    model: PairClassifier,
}

static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn billsim_version() -> *const c_char {
    VERSION.as_ptr() as *const c_char
}

/// Default alignment parameters (2 / -1 / -2 / -0.5).
#[no_mangle]
pub extern "C" fn billsim_default_align_params() -> BillsimAlignParams {
    let p = AlignmentParams::default();
    BillsimAlignParams {
        match_score: p.match_score,
        mismatch: p.mismatch,
        gap_open: p.gap_open,
        gap_extend: p.gap_extend,
    }
}

unsafe fn text_tokens(ptr: *const c_char) -> Result<Vec<String>, BillsimStatus> {
    if ptr.is_null() {
        return Err(BillsimStatus::NullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(text) => Ok(tokenize(text)),
        Err(_) => Err(BillsimStatus::InvalidUtf8),
    }
}

fn checked_params(params: *const BillsimAlignParams) -> Result<AlignmentParams, BillsimStatus> {
    let p: AlignmentParams = if params.is_null() {
        AlignmentParams::default()
    } else {
        unsafe { (*params).into() }
    };
    if p.validate().is_err() {
        return Err(BillsimStatus::InvalidArgument);
    }
    Ok(p)
}

/// Aligns two NUL-terminated UTF-8 texts at the word-token level.
/// `params` may be NULL for defaults.
///
/// # Safety
/// `text_a` and `text_b` must be valid NUL-terminated strings and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn billsim_align(
    text_a: *const c_char,
    text_b: *const c_char,
    params: *const BillsimAlignParams,
    out: *mut BillsimAlignResult,
) -> BillsimStatus {
    if out.is_null() {
        return BillsimStatus::NullArgument;
    }
    let (a, b) = match (text_tokens(text_a), text_tokens(text_b)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let p = match checked_params(params) {
        Ok(p) => p,
        Err(e) => return e,
    };
    let r = align::local_align(&a, &b, &p);
    *out = BillsimAlignResult {
        raw_score: r.raw_score,
        a_start: r.span_a.0 as u64,
        a_end: r.span_a.1 as u64,
        b_start: r.span_b.0 as u64,
        b_end: r.span_b.1 as u64,
        aligned_len: r.aligned_len as u64,
    };
    BillsimStatus::Ok
}

/// Writes the four normalized similarity features for a text pair into
/// `out_features[0..4]`.
///
/// # Safety
/// As [`billsim_align`]; `out_features` must point to at least 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn billsim_align_features(
    text_a: *const c_char,
    text_b: *const c_char,
    params: *const BillsimAlignParams,
    out_features: *mut f64,
) -> BillsimStatus {
    if out_features.is_null() {
        return BillsimStatus::NullArgument;
    }
    let (a, b) = match (text_tokens(text_a), text_tokens(text_b)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let p = match checked_params(params) {
        Ok(p) => p,
        Err(e) => return e,
    };
    let features = align::similarity_features(&a, &b, &p);
    ptr::copy_nonoverlapping(features.as_ptr(), out_features, 4);
    BillsimStatus::Ok
}

/// Loads a trained classifier from a model JSON file. On success `*out`
/// owns the handle; release it with [`billsim_classifier_free`].
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn billsim_classifier_load(
    path: *const c_char,
    out: *mut *mut BillsimClassifier,
) -> BillsimStatus {
    if path.is_null() || out.is_null() {
        return BillsimStatus::NullArgument;
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return BillsimStatus::InvalidUtf8;
    };
    let Ok(text) = std::fs::read_to_string(path) else {
        return BillsimStatus::IoError;
    };
    match PairClassifier::from_json(&text) {
        Ok(model) => {
            *out = Box::into_raw(Box::new(BillsimClassifier { model }));
            BillsimStatus::Ok
        }
        Err(_) => BillsimStatus::ParseError,
    }
}

/// Predicts from a feature vector. `out_probs`, when non-NULL, receives the
/// 5 class probabilities.
///
/// # Safety
/// `classifier` must be a live handle from [`billsim_classifier_load`];
/// `features` must point to `num_features` doubles.
#[no_mangle]
pub unsafe extern "C" fn billsim_classifier_predict(
    classifier: *const BillsimClassifier,
    features: *const f64,
    num_features: usize,
    out_label: *mut u32,
    out_probs: *mut f64,
) -> BillsimStatus {
    if classifier.is_null() || features.is_null() || out_label.is_null() {
        return BillsimStatus::NullArgument;
    }
    let feats = std::slice::from_raw_parts(features, num_features);
    match (*classifier).model.predict(feats) {
        Ok((label, probs)) => {
            *out_label = label as u32;
            if !out_probs.is_null() {
                ptr::copy_nonoverlapping(probs.as_ptr(), out_probs, 5);
            }
            BillsimStatus::Ok
        }
        Err(_) => BillsimStatus::InvalidArgument,
    }
}

/// Aligns two texts and classifies the pair in one call.
///
/// # Safety
/// As [`billsim_align`] and [`billsim_classifier_predict`].
#[no_mangle]
pub unsafe extern "C" fn billsim_classify_pair(
    classifier: *const BillsimClassifier,
    text_a: *const c_char,
    text_b: *const c_char,
    params: *const BillsimAlignParams,
    out_label: *mut u32,
    out_probs: *mut f64,
) -> BillsimStatus {
    if classifier.is_null() || out_label.is_null() {
        return BillsimStatus::NullArgument;
    }
    let (a, b) = match (text_tokens(text_a), text_tokens(text_b)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let p = match checked_params(params) {
        Ok(p) => p,
        Err(e) => return e,
    };
    let features = align::similarity_features(&a, &b, &p);
    match (*classifier).model.predict(&features) {
        Ok((label, probs)) => {
            *out_label = label as u32;
            if !out_probs.is_null() {
                ptr::copy_nonoverlapping(probs.as_ptr(), out_probs, 5);
            }
            BillsimStatus::Ok
        }
        Err(_) => BillsimStatus::InvalidArgument,
    }
}

/// Releases a classifier handle; NULL is a no-op.
///
/// # Safety
/// `classifier` must be NULL or a pointer from [`billsim_classifier_load`]
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn billsim_classifier_free(classifier: *mut BillsimClassifier) {
    if !classifier.is_null() {
        drop(Box::from_raw(classifier));
    }
}

/// Weighted Cohen's kappa over two equal-length label arrays (values 0..=4).
///
/// # Safety
/// `labels_a` and `labels_b` must point to `len` elements each.
#[no_mangle]
pub unsafe extern "C" fn billsim_weighted_kappa(
    labels_a: *const u32,
    labels_b: *const u32,
    len: usize,
    quadratic: bool,
    out: *mut f64,
) -> BillsimStatus {
    if labels_a.is_null() || labels_b.is_null() || out.is_null() {
        return BillsimStatus::NullArgument;
    }
    let a = std::slice::from_raw_parts(labels_a, len);
    let b = std::slice::from_raw_parts(labels_b, len);
    if a.iter().chain(b).any(|&l| l > 4) {
        return BillsimStatus::InvalidArgument;
    }
    let a: Vec<u8> = a.iter().map(|&l| l as u8).collect();
    let b: Vec<u8> = b.iter().map(|&l| l as u8).collect();
    let weighting = if quadratic {
        KappaWeighting::Quadratic
    } else {
        KappaWeighting::Linear
    };
    match weighted_kappa(&a, &b, weighting) {
        Ok(k) => {
            *out = k;
            BillsimStatus::Ok
        }
        Err(_) => BillsimStatus::InvalidArgument,
    }
}

/// Bill-level similarity from a row-major `n_i x n_j` matrix of subsection
/// pair labels (values 0..=4). Writes the directed normalized sums and the
/// final max score.
///
/// # Safety
/// `labels` must point to `n_i * n_j` elements; out-pointers may be NULL to
/// skip that value, except `out_score`.
#[no_mangle]
pub unsafe extern "C" fn billsim_bill_similarity(
    labels: *const u32,
    n_i: usize,
    n_j: usize,
    out_score: *mut f64,
    out_sigma_star_ij: *mut f64,
    out_sigma_star_ji: *mut f64,
) -> BillsimStatus {
    if labels.is_null() || out_score.is_null() {
        return BillsimStatus::NullArgument;
    }
    if n_i == 0 || n_j == 0 {
        return BillsimStatus::InvalidArgument;
    }
    let matrix = std::slice::from_raw_parts(labels, n_i * n_j);
    if matrix.iter().any(|&l| l > 4) {
        return BillsimStatus::InvalidArgument;
    }
    let mk = |bill: &str, n: usize| -> Vec<Subsection> {
        (0..n)
            .map(|k| Subsection {
                subsection_id: format!("{bill}:{k}"),
                bill_id: bill.to_string(),
                heading: None,
                tokens: Vec::new(),
                is_quoted_block: false,
            })
            .collect()
    };
    let bi = mk("i", n_i);
    let bj = mk("j", n_j);
    let label_at = |a: &Subsection, b: &Subsection| -> u8 {
        let i: usize = a.subsection_id[2..].parse().unwrap_or(0);
        let j: usize = b.subsection_id[2..].parse().unwrap_or(0);
        matrix[i * n_j + j] as u8
    };
    match aggregate::bill_similarity(&bi, &bj, label_at) {
        Ok(sim) => {
            *out_score = sim.score;
            if !out_sigma_star_ij.is_null() {
                *out_sigma_star_ij = sim.sigma_star_ij;
            }
            if !out_sigma_star_ji.is_null() {
                *out_sigma_star_ji = sim.sigma_star_ji;
            }
            BillsimStatus::Ok
        }
        Err(_) => BillsimStatus::InvalidArgument,
    }
}
