//! Token-level Smith-Waterman local alignment with affine (Gotoh) gap
//! penalties, plus the normalized similarity features fed to the classifier.
//!
//! The DP runs over word tokens with case-insensitive equality. A gap of
//! length k costs `gap_open + (k-1) * gap_extend`. Scoring uses two rolling
//! rows with companion cells carrying alignment start and column count, so
//! spans and aligned length come out in O(min(|A|,|B|)) memory without a full
//! traceback matrix.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignmentParams {
    pub match_score: f64,
    pub mismatch: f64,
    pub gap_open: f64,
    pub gap_extend: f64,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        AlignmentParams {
            match_score: 2.0,
            mismatch: -1.0,
            gap_open: -2.0,
            gap_extend: -0.5,
        }
    }
}

impl AlignmentParams {
    pub fn validate(&self) -> Result<()> {
        if self.match_score.is_nan() || self.match_score <= 0.0 {
            return Err(Error::config("alignment match score must be positive"));
        }
        if self.mismatch > 0.0 || self.gap_open > 0.0 || self.gap_extend > 0.0 {
            return Err(Error::config(
                "alignment mismatch / gap_open / gap_extend must be <= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentResult {
    pub raw_score: f64,
    /// Half-open token range `[start, end)` in the first sequence.
    pub span_a: (usize, usize),
    pub span_b: (usize, usize),
    /// Number of alignment columns (matches, mismatches, and gap steps).
    pub aligned_len: usize,
}

impl AlignmentResult {
    fn empty() -> Self {
        AlignmentResult {
            raw_score: 0.0,
            span_a: (0, 0),
            span_b: (0, 0),
            aligned_len: 0,
        }
    }
}

/// One traceback step; indices are 0-based token positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignStep {
    /// Consumes a token from both sequences.
    Pair { a: usize, b: usize },
    /// Gap in A: consumes a token from B only.
    GapA { b: usize },
    /// Gap in B: consumes a token from A only.
    GapB { a: usize },
}

/// Maps tokens to dense ids under case-insensitive equality so the inner loop
/// compares integers.
fn encode<S: AsRef<str>>(a: &[S], b: &[S]) -> (Vec<u32>, Vec<u32>) {
    let mut ids: HashMap<String, u32> = HashMap::with_capacity(a.len() + b.len());
    let mut enc = |tokens: &[S]| -> Vec<u32> {
        tokens
            .iter()
            .map(|t| {
                let key = t.as_ref().to_lowercase();
                let next = ids.len() as u32;
                *ids.entry(key).or_insert(next)
            })
            .collect()
    };
    (enc(a), enc(b))
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    start_a: usize,
    start_b: usize,
    cols: usize,
}

impl Cell {
    const EMPTY: Cell = Cell {
        start_a: 0,
        start_b: 0,
        cols: 0,
    };
}

const NEG_INF: f64 = f64::NEG_INFINITY;

/// Local affine-gap alignment score plus spans, in rolling-row memory.
pub fn local_align<S: AsRef<str>>(a: &[S], b: &[S], params: &AlignmentParams) -> AlignmentResult {
    let (ea, eb) = encode(a, b);
    align_encoded(&ea, &eb, params)
}

/// Score-only fast path for all-pairs workloads.
pub fn local_align_score<S: AsRef<str>>(a: &[S], b: &[S], params: &AlignmentParams) -> f64 {
    let (ea, eb) = encode(a, b);
    score_encoded(&ea, &eb, params)
}

fn substitution(params: &AlignmentParams, x: u32, y: u32) -> f64 {
    if x == y {
        params.match_score
    } else {
        params.mismatch
    }
}

fn align_encoded(a: &[u32], b: &[u32], params: &AlignmentParams) -> AlignmentResult {
    if a.is_empty() || b.is_empty() {
        return AlignmentResult::empty();
    }
    // Canonical orientation: `a` runs over rows so tie-breaking among equal
    // optima matches the full-matrix traceback path exactly. The score-only
    // path swaps freely for O(min) memory; this one is O(|B|).
    let n = b.len();
    let mut h = vec![0.0f64; n + 1];
    let mut f = vec![NEG_INF; n + 1];
    let mut hc = vec![Cell::EMPTY; n + 1];
    let mut fc = vec![Cell::EMPTY; n + 1];

    let mut best_score = 0.0f64;
    let mut best = Cell::EMPTY;
    let mut best_end = (0usize, 0usize);

    for (i, &ai) in a.iter().enumerate() {
        let row = i + 1;
        let mut diag = h[0];
        let mut diag_c = hc[0];
        let mut e = NEG_INF;
        let mut ec = Cell::EMPTY;
        for (j, &bj) in b.iter().enumerate() {
            let col = j + 1;
            // E: gap in A (consumes b[j]); depends on this row's previous column.
            let open_e = h[col - 1] + params.gap_open;
            let extend_e = e + params.gap_extend;
            if open_e >= extend_e {
                e = open_e;
                ec = Cell {
                    cols: hc[col - 1].cols + 1,
                    ..hc[col - 1]
                };
            } else {
                e = extend_e;
                ec = Cell {
                    cols: ec.cols + 1,
                    ..ec
                };
            }
            // F: gap in B (consumes a[i]); depends on the previous row, same column.
            let open_f = h[col] + params.gap_open;
            let extend_f = f[col] + params.gap_extend;
            if open_f >= extend_f {
                f[col] = open_f;
                fc[col] = Cell {
                    cols: hc[col].cols + 1,
                    ..hc[col]
                };
            } else {
                f[col] = extend_f;
                fc[col] = Cell {
                    cols: fc[col].cols + 1,
                    ..fc[col]
                };
            }

            let diag_score = diag + substitution(params, ai, bj);
            let diag_cell = if diag_c.cols == 0 && diag == 0.0 {
                // Fresh alignment starting at (i, j).
                Cell {
                    start_a: i,
                    start_b: j,
                    cols: 1,
                }
            } else {
                Cell {
                    cols: diag_c.cols + 1,
                    ..diag_c
                }
            };

            // Selection priority on ties: diagonal, then E, then F, then restart.
            let mut val = 0.0f64;
            let mut cell = Cell::EMPTY;
            if diag_score > val {
                val = diag_score;
                cell = diag_cell;
            }
            if e > val {
                val = e;
                cell = ec;
            }
            if f[col] > val {
                val = f[col];
                cell = fc[col];
            }

            diag = h[col];
            diag_c = hc[col];
            h[col] = val;
            hc[col] = cell;

            if val > best_score {
                best_score = val;
                best = cell;
                best_end = (row, col);
            }
        }
    }

    if best_score <= 0.0 {
        return AlignmentResult::empty();
    }
    AlignmentResult {
        raw_score: best_score,
        span_a: (best.start_a, best_end.0),
        span_b: (best.start_b, best_end.1),
        aligned_len: best.cols,
    }
}

fn score_encoded(a: &[u32], b: &[u32], params: &AlignmentParams) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (outer, inner) = if b.len() <= a.len() { (a, b) } else { (b, a) };
    let n = inner.len();
    let mut h = vec![0.0f64; n + 1];
    let mut f = vec![NEG_INF; n + 1];
    let mut best = 0.0f64;
    for &ai in outer {
        let mut diag = h[0];
        let mut e = NEG_INF;
        for (j, &bj) in inner.iter().enumerate() {
            let col = j + 1;
            e = (h[col - 1] + params.gap_open).max(e + params.gap_extend);
            f[col] = (h[col] + params.gap_open).max(f[col] + params.gap_extend);
            let diag_score = diag + substitution(params, ai, bj);
            let val = diag_score.max(e).max(f[col]).max(0.0);
            diag = h[col];
            h[col] = val;
            if val > best {
                best = val;
            }
        }
    }
    best
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum HFrom {
    Restart,
    Diag,
    E,
    F,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum GapFrom {
    Open,
    Extend,
}

/// Full-matrix variant that also returns the traced alignment steps.
/// Used for inspection and for the traceback-consistency checks; batch
/// workloads go through [`local_align`] / [`local_align_score`].
pub fn local_align_with_ops<S: AsRef<str>>(
    a: &[S],
    b: &[S],
    params: &AlignmentParams,
) -> (AlignmentResult, Vec<AlignStep>) {
    let (ea, eb) = encode(a, b);
    let (m, n) = (ea.len(), eb.len());
    if m == 0 || n == 0 {
        return (AlignmentResult::empty(), Vec::new());
    }
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let mut h = vec![0.0f64; (m + 1) * (n + 1)];
    let mut e = vec![NEG_INF; (m + 1) * (n + 1)];
    let mut f = vec![NEG_INF; (m + 1) * (n + 1)];
    let mut h_from = vec![HFrom::Restart; (m + 1) * (n + 1)];
    let mut e_from = vec![GapFrom::Open; (m + 1) * (n + 1)];
    let mut f_from = vec![GapFrom::Open; (m + 1) * (n + 1)];

    let mut best_score = 0.0f64;
    let mut best_cell = (0usize, 0usize);

    for i in 1..=m {
        for j in 1..=n {
            let open_e = h[idx(i, j - 1)] + params.gap_open;
            let extend_e = e[idx(i, j - 1)] + params.gap_extend;
            if open_e >= extend_e {
                e[idx(i, j)] = open_e;
                e_from[idx(i, j)] = GapFrom::Open;
            } else {
                e[idx(i, j)] = extend_e;
                e_from[idx(i, j)] = GapFrom::Extend;
            }
            let open_f = h[idx(i - 1, j)] + params.gap_open;
            let extend_f = f[idx(i - 1, j)] + params.gap_extend;
            if open_f >= extend_f {
                f[idx(i, j)] = open_f;
                f_from[idx(i, j)] = GapFrom::Open;
            } else {
                f[idx(i, j)] = extend_f;
                f_from[idx(i, j)] = GapFrom::Extend;
            }
            let diag = h[idx(i - 1, j - 1)] + substitution(params, ea[i - 1], eb[j - 1]);
            let mut val = 0.0f64;
            let mut from = HFrom::Restart;
            if diag > val {
                val = diag;
                from = HFrom::Diag;
            }
            if e[idx(i, j)] > val {
                val = e[idx(i, j)];
                from = HFrom::E;
            }
            if f[idx(i, j)] > val {
                val = f[idx(i, j)];
                from = HFrom::F;
            }
            h[idx(i, j)] = val;
            h_from[idx(i, j)] = from;
            if val > best_score {
                best_score = val;
                best_cell = (i, j);
            }
        }
    }

    if best_score <= 0.0 {
        return (AlignmentResult::empty(), Vec::new());
    }

    let mut steps = Vec::new();
    let (mut i, mut j) = best_cell;
    #[derive(Clone, Copy, PartialEq, Eq)]
    enum State {
        H,
        E,
        F,
    }
    let mut state = State::H;
    loop {
        match state {
            State::H => match h_from[idx(i, j)] {
                HFrom::Restart => break,
                HFrom::Diag => {
                    steps.push(AlignStep::Pair { a: i - 1, b: j - 1 });
                    i -= 1;
                    j -= 1;
                }
                HFrom::E => state = State::E,
                HFrom::F => state = State::F,
            },
            State::E => {
                steps.push(AlignStep::GapA { b: j - 1 });
                let from = e_from[idx(i, j)];
                j -= 1;
                if from == GapFrom::Open {
                    state = State::H;
                }
            }
            State::F => {
                steps.push(AlignStep::GapB { a: i - 1 });
                let from = f_from[idx(i, j)];
                i -= 1;
                if from == GapFrom::Open {
                    state = State::H;
                }
            }
        }
    }
    steps.reverse();

    let span_a = (i, best_cell.0);
    let span_b = (j, best_cell.1);
    let result = AlignmentResult {
        raw_score: best_score,
        span_a,
        span_b,
        aligned_len: steps.len(),
    };
    (result, steps)
}

/// Re-scores a traced alignment under the affine gap model.
pub fn score_steps<S: AsRef<str>>(
    a: &[S],
    b: &[S],
    steps: &[AlignStep],
    params: &AlignmentParams,
) -> f64 {
    let (ea, eb) = encode(a, b);
    let mut score = 0.0;
    let mut prev: Option<AlignStep> = None;
    for &step in steps {
        match step {
            AlignStep::Pair { a: i, b: j } => score += substitution(params, ea[i], eb[j]),
            AlignStep::GapA { .. } => {
                score += match prev {
                    Some(AlignStep::GapA { .. }) => params.gap_extend,
                    _ => params.gap_open,
                };
            }
            AlignStep::GapB { .. } => {
                score += match prev {
                    Some(AlignStep::GapB { .. }) => params.gap_extend,
                    _ => params.gap_open,
                };
            }
        }
        prev = Some(step);
    }
    score
}

/// Normalized similarity features for pair classification:
/// `[score / (match * min_len), score / (match * max_len), aligned_len / min_len,
/// |ln(len_a / len_b)|]`. Zero-length input yields all zeros.
pub const FEATURE_NAMES: [&str; 4] = [
    "score_over_min_len",
    "score_over_max_len",
    "aligned_over_min_len",
    "abs_log_len_ratio",
];

pub fn similarity_features<S: AsRef<str>>(a: &[S], b: &[S], params: &AlignmentParams) -> [f64; 4] {
    if a.is_empty() || b.is_empty() {
        return [0.0; 4];
    }
    let result = local_align(a, b, params);
    features_from_result(&result, a.len(), b.len(), params)
}

pub fn features_from_result(
    result: &AlignmentResult,
    len_a: usize,
    len_b: usize,
    params: &AlignmentParams,
) -> [f64; 4] {
    if len_a == 0 || len_b == 0 {
        return [0.0; 4];
    }
    let min_len = len_a.min(len_b) as f64;
    let max_len = len_a.max(len_b) as f64;
    let f1 = (result.raw_score / (params.match_score * min_len)).clamp(0.0, 1.0);
    let f2 = result.raw_score / (params.match_score * max_len);
    let f3 = result.aligned_len as f64 / min_len;
    let f4 = (len_a as f64 / len_b as f64).ln().abs();
    [f1, f2, f3, f4]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn identical_sequences_score_full_match() {
        let a = toks("one two three four five six seven eight nine ten");
        let p = AlignmentParams::default();
        let r = local_align(&a, &a, &p);
        assert_eq!(r.raw_score, 20.0);
        assert_eq!(r.span_a, (0, 10));
        assert_eq!(r.span_b, (0, 10));
        assert_eq!(r.aligned_len, 10);
    }

    #[test]
    fn disjoint_sequences_score_zero() {
        let a = toks("alpha beta gamma");
        let b = toks("delta epsilon zeta");
        let p = AlignmentParams::default();
        let r = local_align(&a, &b, &p);
        assert_eq!(r.raw_score, 0.0);
        assert_eq!(r.aligned_len, 0);
        assert_eq!(r.span_a, (0, 0));
    }

    #[test]
    fn empty_input_scores_zero() {
        let a: Vec<String> = Vec::new();
        let b = toks("a b c");
        let p = AlignmentParams::default();
        assert_eq!(local_align(&a, &b, &p).raw_score, 0.0);
        assert_eq!(local_align(&b, &a, &p).raw_score, 0.0);
        assert_eq!(local_align_score(&a, &a, &p), 0.0);
    }

    #[test]
    fn matching_is_case_insensitive() {
        let a = toks("The Secretary SHALL");
        let b = toks("the secretary shall");
        let p = AlignmentParams::default();
        assert_eq!(local_align(&a, &b, &p).raw_score, 6.0);
    }

    #[test]
    fn hand_dp_prefix_match_case() {
        // a b c d e f vs a b c x y z: best local alignment is the 3-token
        // prefix, 3 * 2.0; extending over mismatches only loses score.
        let a = toks("a b c d e f");
        let b = toks("a b c x y z");
        let p = AlignmentParams::default();
        let r = local_align(&a, &b, &p);
        assert_eq!(r.raw_score, 6.0);
        assert_eq!(r.span_a, (0, 3));
        assert_eq!(r.span_b, (0, 3));
        let feats = similarity_features(&a, &b, &p);
        assert_eq!(feats[0], 0.5);
        assert_eq!(feats[1], 0.5);
        assert_eq!(feats[2], 0.5);
        assert_eq!(feats[3], 0.0);
    }

    #[test]
    fn gap_bridging_beats_restart_when_cheap() {
        // a b c d e ... z f g h: bridging one extra token costs gap_open
        // (-2.0) against 3 more matches (+6.0).
        let a = toks("a b c f g h");
        let b = toks("a b c z f g h");
        let p = AlignmentParams::default();
        let (r, steps) = local_align_with_ops(&a, &b, &p);
        assert_eq!(r.raw_score, 12.0 - 2.0);
        assert_eq!(r.aligned_len, 7);
        assert_eq!(score_steps(&a, &b, &steps, &p), r.raw_score);
        // Rolling-row path agrees with the full-matrix path.
        let rolled = local_align(&a, &b, &p);
        assert_eq!(rolled, r);
    }

    #[test]
    fn affine_gap_cost_is_open_plus_extends() {
        // One gap of length 3 in the middle: -2.0 - 0.5 - 0.5 = -3.0.
        let a = toks("a b c d e f g h");
        let b = toks("a b c d x y z e f g h");
        let p = AlignmentParams::default();
        let r = local_align(&a, &b, &p);
        assert_eq!(r.raw_score, 16.0 - 3.0);
    }

    #[test]
    fn features_identical_and_disjoint() {
        let a = toks("a b c d");
        let p = AlignmentParams::default();
        assert_eq!(similarity_features(&a, &a, &p), [1.0, 1.0, 1.0, 0.0]);
        let b = toks("x y z w");
        assert_eq!(similarity_features(&a, &b, &p), [0.0, 0.0, 0.0, 0.0]);
        let empty: Vec<String> = Vec::new();
        assert_eq!(similarity_features(&a, &empty, &p), [0.0; 4]);
    }

    #[test]
    fn length_ratio_feature() {
        let a = toks("a b c d e f");
        let b = toks("a b c");
        let p = AlignmentParams::default();
        let f = similarity_features(&a, &b, &p);
        assert!((f[3] - (2.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn traceback_rescoring_reproduces_raw_score() {
        let p = AlignmentParams::default();
        let cases = [
            ("a b c d e", "a b x d e"),
            ("the quick brown fox", "the slow brown fox jumps"),
            ("p q r s", "s r q p"),
            ("m n o p q r", "m n q r"),
        ];
        for (sa, sb) in cases {
            let a = toks(sa);
            let b = toks(sb);
            let (r, steps) = local_align_with_ops(&a, &b, &p);
            assert_eq!(score_steps(&a, &b, &steps, &p), r.raw_score, "{sa} / {sb}");
        }
    }

    fn token_strategy(max_len: usize, alphabet: u32) -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(0..alphabet, 0..=max_len)
            .prop_map(|ids| ids.into_iter().map(|i| format!("t{i}")).collect())
    }

    proptest! {
        // Spans may differ between orientations when several alignments tie;
        // only the score is contractually symmetric.
        #[test]
        fn symmetry_of_raw_score(a in token_strategy(16, 6), b in token_strategy(16, 6)) {
            let p = AlignmentParams::default();
            let ab = local_align(&a, &b, &p);
            let ba = local_align(&b, &a, &p);
            prop_assert_eq!(ab.raw_score, ba.raw_score);
            prop_assert_eq!(ab.aligned_len > 0, ba.aligned_len > 0);
        }

        #[test]
        fn score_bound_holds(a in token_strategy(20, 5), b in token_strategy(20, 5)) {
            let p = AlignmentParams::default();
            let r = local_align(&a, &b, &p);
            prop_assert!(r.raw_score >= 0.0);
            prop_assert!(r.raw_score <= p.match_score * a.len().min(b.len()) as f64);
        }

        #[test]
        fn shared_suffix_never_decreases_score(
            a in token_strategy(12, 5),
            b in token_strategy(12, 5),
            suffix in token_strategy(6, 5),
        ) {
            let p = AlignmentParams::default();
            let base = local_align(&a, &b, &p).raw_score;
            let mut a2 = a.clone();
            a2.extend(suffix.iter().cloned());
            let mut b2 = b.clone();
            b2.extend(suffix.iter().cloned());
            prop_assert!(local_align(&a2, &b2, &p).raw_score >= base);
        }

        #[test]
        fn rolling_and_full_paths_agree(a in token_strategy(14, 4), b in token_strategy(14, 4)) {
            let p = AlignmentParams::default();
            let rolled = local_align(&a, &b, &p);
            let (full, steps) = local_align_with_ops(&a, &b, &p);
            prop_assert_eq!(rolled, full);
            prop_assert_eq!(local_align_score(&a, &b, &p), full.raw_score);
            prop_assert_eq!(score_steps(&a, &b, &steps, &p), full.raw_score);
        }
    }
}
