//! Shared test support: the independent alignment oracle and a crafted
//! miniature bill corpus for pipeline tests.

// Each integration-test binary compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use std::path::Path;

use billsim::align::AlignmentParams;

/// Exhaustive local-alignment oracle, independent of the production DP.
///
/// `d[i][j]` is the best score of a local alignment whose final column pairs
/// `a[i]` with `b[j]`. Any alignment decomposes into paired columns joined by
/// gap bridges; a bridge of `dx` unpaired tokens costs the best run
/// decomposition `max(open + (dx-1)*ext, dx*open)` (one run versus all
/// singleton runs; the cost is linear in the run count, so one of the
/// extremes is optimal). Alignments that start or end with gaps never beat
/// their trimmed counterparts because gap costs are nonpositive.
pub fn oracle_local_align_score<S: AsRef<str>>(a: &[S], b: &[S], p: &AlignmentParams) -> f64 {
    let m = a.len();
    let n = b.len();
    if m == 0 || n == 0 {
        return 0.0;
    }
    let gap_run = |d: usize| -> f64 {
        if d == 0 {
            0.0
        } else {
            let d = d as f64;
            (p.gap_open + (d - 1.0) * p.gap_extend).max(d * p.gap_open)
        }
    };
    let la: Vec<String> = a.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let lb: Vec<String> = b.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let mut d = vec![vec![f64::NEG_INFINITY; n]; m];
    let mut best = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            let mut prefix = 0.0f64;
            #[allow(clippy::needless_range_loop)]
            for pi in 0..i {
                for pj in 0..j {
                    let bridge = gap_run(i - pi - 1) + gap_run(j - pj - 1);
                    let cand = d[pi][pj] + bridge;
                    if cand > prefix {
                        prefix = cand;
                    }
                }
            }
            let sub = if la[i] == lb[j] {
                p.match_score
            } else {
                p.mismatch
            };
            d[i][j] = prefix + sub;
            if d[i][j] > best {
                best = d[i][j];
            }
        }
    }
    best
}

/// Text of one subsection body: `count` sentences drawn from a rotating
/// legislative phrase bank, at least 8 words each.
pub fn body_sentences(salt: usize, count: usize) -> String {
    const SUBJECTS: [&str; 4] = [
        "the secretary",
        "the administrator",
        "each state agency",
        "the director",
    ];
    const VERBS: [&str; 4] = [
        "shall establish",
        "may provide",
        "shall submit",
        "must review",
    ];
    const OBJECTS: [&str; 5] = [
        "a grant program for rural communities",
        "an annual report to the congress",
        "the eligibility criteria for assistance",
        "a plan describing the use of funds",
        "standards for participating institutions",
    ];
    (0..count)
        .map(|k| {
            let s = SUBJECTS[(salt + k) % SUBJECTS.len()];
            let v = VERBS[(salt + 2 * k + 1) % VERBS.len()];
            let o = OBJECTS[(salt * 3 + k) % OBJECTS.len()];
            format!(
                "{s} {v} {o} under this subsection number {}.",
                salt * 100 + k
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes four crafted bills. Knowable structure:
/// - `111-hr-1:s2:a` and `111-s-2:s1:a` are identical (label 4 material);
/// - `111-hr-1:s3:a` and `111-s-2:s1:b` overlap partially (label 2 material);
/// - everything else is mutually unrelated (label 0 material);
/// - `111-hr-1` has a boilerplate "Short Title" section that the filter drops;
/// - `111-s-4` ends with a quoted block that parses as its own unit.
pub fn write_mini_corpus(dir: &Path) {
    let shared = body_sentences(7, 6);
    let partial_base = body_sentences(13, 6);
    let partial_extra = body_sentences(29, 3);
    let partial_variant = format!(
        "{} {}",
        partial_base
            .split('.')
            .take(4)
            .collect::<Vec<_>>()
            .join("."),
        partial_extra
    );

    let hr1 = format!(
        "SEC. 1. SHORT TITLE.\nThis Act may be cited as the Example Act.\n\
         SEC. 2. PROGRAM AUTHORITY.\n(a) In general.--{shared}\n(b) Administration.--{}\n\
         SEC. 3. REPORTING.\n(a) Requirement.--{partial_base}\n",
        body_sentences(17, 5),
    );
    let s2 = format!(
        "SEC. 1. PARALLEL AUTHORITY.\n(a) In general.--{shared}\n(b) State plans.--{partial_variant}\n\
         SEC. 2. MISCELLANEOUS.\n(a) Coordination.--{}\n",
        body_sentences(43, 5),
    );
    let hr3 = format!(
        "SEC. 1. UNRELATED MATTERS.\n(a) Fisheries.--{}\n(b) Forestry.--{}\n",
        body_sentences(53, 5),
        body_sentences(61, 5),
    );
    let s4 = format!(
        "SEC. 1. OTHER BUSINESS.\n(a) Transit.--{}\n(b) Harbors.--{}\n``(c) Quoted insert.--{}''\n",
        body_sentences(71, 5),
        body_sentences(83, 5),
        body_sentences(97, 4),
    );

    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(dir.join("111-hr-1.txt"), hr1).unwrap();
    std::fs::write(dir.join("111-s-2.txt"), s2).unwrap();
    std::fs::write(dir.join("111-hr-3.txt"), hr3).unwrap();
    std::fs::write(dir.join("111-s-4.txt"), s4).unwrap();
}

/// Gold labels over the mini corpus, written as a labeled-pairs CSV.
pub fn write_mini_gold(path: &Path) {
    let rows = mini_gold_rows();
    let mut text = String::from("id_a,id_b,label,provenance\n");
    for (a, b, label) in rows {
        text.push_str(&format!("{a},{b},{label},human\n"));
    }
    std::fs::write(path, text).unwrap();
}

pub fn mini_gold_rows() -> Vec<(&'static str, &'static str, u8)> {
    vec![
        ("111-hr-1:s2:a", "111-s-2:s1:a", 4),
        ("111-hr-1:s3:a", "111-s-2:s1:b", 2),
        ("111-hr-1:s2:a", "111-hr-3:s1:a", 0),
        ("111-hr-1:s2:b", "111-s-4:s1:a", 0),
        ("111-hr-1:s3:a", "111-hr-3:s1:b", 0),
        ("111-s-2:s1:a", "111-s-4:s1:b", 0),
        ("111-s-2:s2:a", "111-hr-3:s1:a", 0),
        ("111-hr-3:s1:a", "111-s-4:s1:a", 0),
        ("111-hr-3:s1:b", "111-s-4:s1:b", 0),
        ("111-s-2:s1:b", "111-s-4:s1:a", 0),
    ]
}
