//! Lifting subsection labels to section categories and bill-level similarity,
//! plus co-occurrence binning for the lobbying-based evaluation.

use std::collections::{HashMap, HashSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::align::{local_align, AlignmentParams};
use crate::classify::PairClassifier;
use crate::corpus::Subsection;
use crate::error::{Error, Result};

/// Section-pair alignment categories, ordered by increasing similarity so
/// the index is usable as an ordinal scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SectionCategory {
    DifferentTopic = 0,
    SameTopicDifferentIdea = 1,
    LikelyPolicyIdeaMatch = 2,
    ClearPolicyIdeaMatch = 3,
}

impl SectionCategory {
    pub const ALL: [SectionCategory; 4] = [
        SectionCategory::DifferentTopic,
        SectionCategory::SameTopicDifferentIdea,
        SectionCategory::LikelyPolicyIdeaMatch,
        SectionCategory::ClearPolicyIdeaMatch,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Result<SectionCategory> {
        Self::ALL.get(index as usize).copied().ok_or_else(|| {
            Error::validation(format!("section category index {index} outside 0..=3"))
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SectionCategory::ClearPolicyIdeaMatch => "Clear Policy Idea Match",
            SectionCategory::LikelyPolicyIdeaMatch => "Likely Policy Idea Match",
            SectionCategory::SameTopicDifferentIdea => "Same Topic, Different Idea",
            SectionCategory::DifferentTopic => "Different Topic",
        }
    }
}

/// Maps a 5-class subsection relation label onto the 4 section categories:
/// Identical and Almost Identical collapse to a clear match.
pub fn map_section_labels(label: u8) -> Result<SectionCategory> {
    match label {
        4 | 3 => Ok(SectionCategory::ClearPolicyIdeaMatch),
        2 => Ok(SectionCategory::LikelyPolicyIdeaMatch),
        1 => Ok(SectionCategory::SameTopicDifferentIdea),
        0 => Ok(SectionCategory::DifferentTopic),
        other => Err(Error::validation(format!("label {other} outside 0..=4"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BillSimilarity {
    pub bill_i: String,
    pub bill_j: String,
    pub sigma_ij: f64,
    pub sigma_ji: f64,
    pub sigma_star_ij: f64,
    pub sigma_star_ji: f64,
    pub score: f64,
}

/// Directed-sum bill similarity: each subsection of one bill contributes its
/// best label against the other bill; the sum normalizes by `4 * |B|` and the
/// final score is the larger of the two directions.
///
/// `pair_label_fn` must return a label in 0..=4 for any subsection pair and
/// is treated as symmetric in its arguments.
pub fn bill_similarity<F>(
    bill_i: &[Subsection],
    bill_j: &[Subsection],
    pair_label_fn: F,
) -> Result<BillSimilarity>
where
    F: Fn(&Subsection, &Subsection) -> u8 + Sync,
{
    if bill_i.is_empty() || bill_j.is_empty() {
        return Err(Error::validation(
            "bill_similarity: bills must have at least one subsection",
        ));
    }
    let labels: Vec<Vec<u8>> = bill_i
        .iter()
        .map(|si| {
            bill_j
                .iter()
                .map(|sj| pair_label_fn(si, sj).min(4))
                .collect()
        })
        .collect();

    let sigma_ij: f64 = labels
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0) as f64)
        .sum();
    let sigma_ji: f64 = (0..bill_j.len())
        .map(|j| labels.iter().map(|row| row[j]).max().unwrap_or(0) as f64)
        .sum();

    let sigma_star_ij = sigma_ij / (4.0 * bill_i.len() as f64);
    let sigma_star_ji = sigma_ji / (4.0 * bill_j.len() as f64);
    Ok(BillSimilarity {
        bill_i: bill_i[0].bill_id.clone(),
        bill_j: bill_j[0].bill_id.clone(),
        sigma_ij,
        sigma_ji,
        sigma_star_ij,
        sigma_star_ji,
        score: sigma_star_ij.max(sigma_star_ji),
    })
}

/// Classifier-backed pair labeler with the alignment short-circuit: a pair
/// whose alignment score is zero is Unrelated without a classifier call.
pub fn classifier_labeler<'m>(
    model: &'m PairClassifier,
    params: &'m AlignmentParams,
) -> impl Fn(&Subsection, &Subsection) -> u8 + Sync + 'm {
    move |a: &Subsection, b: &Subsection| {
        if a.tokens.is_empty() || b.tokens.is_empty() {
            return 0;
        }
        let result = local_align(&a.tokens, &b.tokens, params);
        if result.raw_score <= 0.0 {
            return 0;
        }
        let features =
            crate::align::features_from_result(&result, a.tokens.len(), b.tokens.len(), params);
        model
            .predict(&features)
            .map(|(label, _)| label)
            .unwrap_or(0)
    }
}

/// Label lookup backed by precomputed pair labels (external predictions or
/// gold annotations); unknown pairs fall back to Unrelated.
pub fn prediction_labeler(
    predictions: &HashMap<(String, String), u8>,
) -> impl Fn(&Subsection, &Subsection) -> u8 + Sync + '_ {
    move |a: &Subsection, b: &Subsection| {
        let key_ab = (a.subsection_id.clone(), b.subsection_id.clone());
        if let Some(&l) = predictions.get(&key_ab) {
            return l;
        }
        let key_ba = (b.subsection_id.clone(), a.subsection_id.clone());
        predictions.get(&key_ba).copied().unwrap_or(0)
    }
}

/// Co-occurrence count buckets, highest first, matching the published
/// grouping. Counts above 3000 land in the top bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CooccurrenceBin {
    B300To3000,
    B200To299,
    B100To199,
    B50To99,
    B5To49,
    B1To4,
    Zero,
}

impl CooccurrenceBin {
    pub const ALL: [CooccurrenceBin; 7] = [
        CooccurrenceBin::B300To3000,
        CooccurrenceBin::B200To299,
        CooccurrenceBin::B100To199,
        CooccurrenceBin::B50To99,
        CooccurrenceBin::B5To49,
        CooccurrenceBin::B1To4,
        CooccurrenceBin::Zero,
    ];

    pub fn from_count(count: u64) -> CooccurrenceBin {
        match count {
            0 => CooccurrenceBin::Zero,
            1..=4 => CooccurrenceBin::B1To4,
            5..=49 => CooccurrenceBin::B5To49,
            50..=99 => CooccurrenceBin::B50To99,
            100..=199 => CooccurrenceBin::B100To199,
            200..=299 => CooccurrenceBin::B200To299,
            _ => CooccurrenceBin::B300To3000,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CooccurrenceBin::B300To3000 => "300-3000",
            CooccurrenceBin::B200To299 => "200-299",
            CooccurrenceBin::B100To199 => "100-199",
            CooccurrenceBin::B50To99 => "50-99",
            CooccurrenceBin::B5To49 => "5-49",
            CooccurrenceBin::B1To4 => "1-4",
            CooccurrenceBin::Zero => "0",
        }
    }

    pub fn from_label(label: &str) -> Result<CooccurrenceBin> {
        Self::ALL
            .into_iter()
            .find(|b| b.label() == label)
            .ok_or_else(|| Error::validation(format!("unknown co-occurrence bin {label:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceRecord {
    pub bill_i: String,
    pub bill_j: String,
    pub count: u64,
    pub bin: CooccurrenceBin,
}

/// Bins co-occurring bill pairs, dropping pairs where either bill has fewer
/// than `min_subsections` subsections, and keeps a seeded uniform sample of
/// at most `per_bin_cap` pairs per bin. The zero bin is filled with a seeded
/// sample of eligible bill pairs that never co-occur.
pub fn cooccurrence_bins(
    records: &[(String, String, u64)],
    subsection_counts: &HashMap<String, usize>,
    min_subsections: usize,
    per_bin_cap: usize,
    seed: u64,
) -> Vec<CooccurrenceRecord> {
    let eligible = |bill: &str| {
        subsection_counts
            .get(bill)
            .map(|&n| n >= min_subsections)
            .unwrap_or(false)
    };

    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut by_bin: HashMap<CooccurrenceBin, Vec<CooccurrenceRecord>> = HashMap::new();
    for (bill_i, bill_j, count) in records {
        if bill_i == bill_j || !eligible(bill_i) || !eligible(bill_j) {
            continue;
        }
        let (a, b) = if bill_i <= bill_j {
            (bill_i, bill_j)
        } else {
            (bill_j, bill_i)
        };
        if !seen.insert((a.clone(), b.clone())) {
            continue;
        }
        by_bin
            .entry(CooccurrenceBin::from_count(*count))
            .or_default()
            .push(CooccurrenceRecord {
                bill_i: a.clone(),
                bill_j: b.clone(),
                count: *count,
                bin: CooccurrenceBin::from_count(*count),
            });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for bin in CooccurrenceBin::ALL {
        if bin == CooccurrenceBin::Zero {
            continue;
        }
        let mut bucket = by_bin.remove(&bin).unwrap_or_default();
        bucket.sort_by(|x, y| (&x.bill_i, &x.bill_j).cmp(&(&y.bill_i, &y.bill_j)));
        if bucket.len() > per_bin_cap {
            let keep = rand::seq::index::sample(&mut rng, bucket.len(), per_bin_cap);
            let mut keep: Vec<usize> = keep.into_vec();
            keep.sort_unstable();
            bucket = keep.into_iter().map(|k| bucket[k].clone()).collect();
        }
        out.extend(bucket);
    }

    // Zero bin: sample never-co-occurring pairs from the eligible universe.
    let mut bills: Vec<&String> = subsection_counts.keys().filter(|b| eligible(b)).collect();
    bills.sort();
    let universe = bills.len();
    if universe >= 2 {
        let total_pairs = universe * (universe - 1) / 2;
        let want = per_bin_cap.min(total_pairs.saturating_sub(seen.len()));
        let mut zero_pairs: HashSet<(String, String)> = HashSet::new();
        let mut attempts = 0usize;
        let max_attempts = want.saturating_mul(60).max(1000);
        while zero_pairs.len() < want && attempts < max_attempts {
            attempts += 1;
            let x = rng.gen_range(0..universe);
            let y = rng.gen_range(0..universe);
            if x == y {
                continue;
            }
            let (a, b) = if bills[x] <= bills[y] {
                (bills[x], bills[y])
            } else {
                (bills[y], bills[x])
            };
            let key = (a.clone(), b.clone());
            if seen.contains(&key) || zero_pairs.contains(&key) {
                continue;
            }
            zero_pairs.insert(key);
        }
        let mut zero_sorted: Vec<(String, String)> = zero_pairs.into_iter().collect();
        zero_sorted.sort();
        out.extend(
            zero_sorted
                .into_iter()
                .map(|(bill_i, bill_j)| CooccurrenceRecord {
                    bill_i,
                    bill_j,
                    count: 0,
                    bin: CooccurrenceBin::Zero,
                }),
        );
    }
    out
}
