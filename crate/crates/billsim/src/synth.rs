//! Class-conditioned synthetic subsection-pair generation.
//!
//! For a source subsection A and a relation label, produces a counterpart X:
//! identical copy (4), swap/synonym perturbation (3), chunk-level
//! delete/insert plus perturbation at a 20-40% (2) or 60-80% (1) modification
//! proportion, or a random pool member (0). Each pair is generated from an
//! RNG seeded by a stable hash of (global seed, subsection id, class, pair
//! index), so generation is order- and scheduling-independent.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::{LabeledPair, Provenance};
use crate::corpus::Subsection;
use crate::error::{Error, Result};

const EMBEDDED_LEXICON: &str = include_str!("../data/synonyms.tsv");

/// Common English stopwords; never targeted by synonym replacement.
const STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "cannot",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "ought",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "shall",
    "may",
    "must",
    "upon",
    "within",
    "without",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// Class-3 operation budget as a fraction of the token count.
    pub swap_syn_prop_max: f64,
    /// Hard cap on swap/synonym operations per pair.
    pub swap_syn_op_cap: usize,
    /// Modification proportion band for class 2 (Related).
    pub related_band: (f64, f64),
    /// Modification proportion band for class 1 (Partially Related).
    pub partial_band: (f64, f64),
    pub chunk_words_min: usize,
    pub chunk_words_max: usize,
    pub seed: u64,
    /// Synonym lexicon TSV path; the embedded default is used when unset.
    pub synonym_lexicon: Option<PathBuf>,
    /// Class-0 counterparts avoid the source bill unless disabled.
    pub exclude_same_bill: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            swap_syn_prop_max: 0.10,
            swap_syn_op_cap: 20,
            related_band: (0.20, 0.40),
            partial_band: (0.60, 0.80),
            chunk_words_min: 5,
            chunk_words_max: 15,
            seed: 0,
            synonym_lexicon: None,
            exclude_same_bill: true,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let band_ok = |(lo, hi): (f64, f64)| (0.0..=1.0).contains(&lo) && lo <= hi && hi <= 1.0;
        if !band_ok(self.related_band) || !band_ok(self.partial_band) {
            return Err(Error::config(
                "synth bands must satisfy 0 <= low <= high <= 1",
            ));
        }
        if self.chunk_words_min < 1 || self.chunk_words_min > self.chunk_words_max {
            return Err(Error::config(
                "synth chunk bounds must satisfy 1 <= min <= max",
            ));
        }
        if !(0.0..=1.0).contains(&self.swap_syn_prop_max) {
            return Err(Error::config("swap_syn_prop_max must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn load_lexicon(&self) -> Result<SynonymLexicon> {
        match &self.synonym_lexicon {
            Some(path) => SynonymLexicon::from_path(path),
            None => SynonymLexicon::embedded_default(),
        }
    }
}

/// Word-to-synonyms map with a stopword guard.
#[derive(Debug, Clone)]
pub struct SynonymLexicon {
    entries: HashMap<String, Vec<String>>,
    stopwords: HashSet<String>,
}

impl SynonymLexicon {
    pub fn embedded_default() -> Result<Self> {
        Self::from_tsv_str(EMBEDDED_LEXICON)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv_str(&text)
    }

    /// Parses `word \t syn1,syn2,...` lines. Self-referential synonyms are
    /// dropped; an entry that ends up empty is removed, so no entry maps a
    /// word to itself only.
    pub fn from_tsv_str(text: &str) -> Result<Self> {
        let stopwords: HashSet<String> = STOPWORDS.iter().map(|s| s.to_string()).collect();
        let mut entries = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, rest) = line.split_once('\t').ok_or_else(|| {
                Error::validation(format!(
                    "lexicon line {}: expected word\\tsynonyms",
                    lineno + 1
                ))
            })?;
            let word = word.trim().to_lowercase();
            let syns: Vec<String> = rest
                .split(',')
                .map(|s| s.trim().to_lowercase())
                .filter(|s| !s.is_empty() && *s != word)
                .collect();
            if word.is_empty() || syns.is_empty() {
                continue;
            }
            entries.insert(word, syns);
        }
        Ok(SynonymLexicon { entries, stopwords })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(&word.to_lowercase())
    }

    /// Synonyms for a non-stopword token, if any.
    pub fn synonyms(&self, word: &str) -> Option<&[String]> {
        let lower = word.to_lowercase();
        if self.stopwords.contains(&lower) {
            return None;
        }
        self.entries.get(&lower).map(|v| v.as_slice())
    }
}

/// Stable 64-bit seed from the generation coordinates; identical across
/// platforms and runs so per-pair generation can be scheduled arbitrarily.
pub fn pair_seed(global_seed: u64, subsection_id: &str, class_label: u8, pair_index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global_seed.to_le_bytes());
    hasher.update([0xfe]);
    hasher.update(subsection_id.as_bytes());
    hasher.update([0xfe, class_label]);
    hasher.update(pair_index.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Applies `min(n_ops, cap)` operations, each independently a swap or a
/// synonym replacement with probability 1/2. A swap exchanges two distinct
/// positions; a synonym replaces a random non-stopword token that has a
/// lexicon entry. When no synonym target exists the operation degrades to a
/// swap. Token count is always preserved.
pub fn swap_and_synonym(
    tokens: &[String],
    n_ops: usize,
    lexicon: &SynonymLexicon,
    config: &SynthConfig,
    rng: &mut impl Rng,
) -> Vec<String> {
    let mut out = tokens.to_vec();
    let ops = n_ops.min(config.swap_syn_op_cap);
    for _ in 0..ops {
        let do_synonym = rng.gen_bool(0.5);
        let mut applied = false;
        if do_synonym {
            let eligible: Vec<usize> = out
                .iter()
                .enumerate()
                .filter(|(_, t)| lexicon.synonyms(t).is_some())
                .map(|(i, _)| i)
                .collect();
            if let Some(&pos) = eligible.as_slice().choose(rng) {
                let syns = lexicon.synonyms(&out[pos]).expect("eligible position");
                out[pos] = syns.choose(rng).expect("nonempty synonym list").clone();
                applied = true;
            }
        }
        if !applied && out.len() >= 2 {
            let i = rng.gen_range(0..out.len());
            let mut j = rng.gen_range(0..out.len() - 1);
            if j >= i {
                j += 1;
            }
            out.swap(i, j);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentOrigin {
    /// Surviving run of the source subsection.
    Original,
    /// Contiguous chunk copied from the donor subsection.
    Inserted,
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub origin: SegmentOrigin,
    pub tokens: Vec<String>,
}

/// Chunk-level rewrite: removes `modification_prop * |A|` tokens from A as
/// disjoint chunks, backfills the insertion share of the budget with
/// contiguous chunks copied from B, and reassembles all segments in random
/// order (token order inside each segment is preserved).
///
/// The deletion/insertion split of the budget is uniform: a fraction `t` of
/// the modified mass is pure deletion and the rest is replaced by donor
/// text, so the surviving-token overlap with A lands near
/// `1 - modification_prop` for any split.
pub fn chunk_edit_segments(
    tokens_a: &[String],
    pool_subsection_b: &[String],
    modification_prop: f64,
    rng: &mut impl Rng,
    config: &SynthConfig,
) -> Result<Vec<Segment>> {
    if tokens_a.is_empty() {
        return Err(Error::validation("chunk_edit: empty source token list"));
    }
    if !(0.0..=1.0).contains(&modification_prop) {
        return Err(Error::validation(format!(
            "chunk_edit: modification proportion {modification_prop} outside [0, 1]"
        )));
    }
    let n = tokens_a.len();
    let modified_total = ((modification_prop * n as f64).round() as usize).min(n);
    let split = rng.gen::<f64>();
    let insert_total =
        ((split * modification_prop * n as f64).round() as usize).min(modified_total);

    // Delete disjoint chunks totaling the modification budget.
    let mut deleted = vec![false; n];
    let mut remaining = modified_total;
    while remaining > 0 {
        let want = rng
            .gen_range(config.chunk_words_min..=config.chunk_words_max)
            .min(remaining);
        let starts: Vec<usize> = (0..n)
            .filter(|&s| s + want <= n && deleted[s..s + want].iter().all(|d| !d))
            .collect();
        let Some(&start) = starts.as_slice().choose(rng) else {
            // No room for a chunk this long; finish with the largest free run.
            let mut best: Option<(usize, usize)> = None;
            let mut run_start = 0;
            let mut run_len = 0;
            #[allow(clippy::needless_range_loop)]
            for i in 0..=n {
                if i < n && !deleted[i] {
                    if run_len == 0 {
                        run_start = i;
                    }
                    run_len += 1;
                } else {
                    if run_len > best.map_or(0, |b| b.1) {
                        best = Some((run_start, run_len));
                    }
                    run_len = 0;
                }
            }
            match best {
                Some((s, l)) => {
                    let take = l.min(remaining);
                    for d in deleted.iter_mut().skip(s).take(take) {
                        *d = true;
                    }
                    remaining -= take;
                    continue;
                }
                None => break,
            }
        };
        for d in deleted.iter_mut().skip(start).take(want) {
            *d = true;
        }
        remaining -= want;
    }

    // Surviving maximal runs, in order.
    let mut segments: Vec<Segment> = Vec::new();
    let mut run: Vec<String> = Vec::new();
    for (token, &gone) in tokens_a.iter().zip(&deleted) {
        if gone {
            if !run.is_empty() {
                segments.push(Segment {
                    origin: SegmentOrigin::Original,
                    tokens: std::mem::take(&mut run),
                });
            }
        } else {
            run.push(token.clone());
        }
    }
    if !run.is_empty() {
        segments.push(Segment {
            origin: SegmentOrigin::Original,
            tokens: run,
        });
    }

    // Insert contiguous donor chunks totaling the insertion share.
    let mut to_insert = insert_total;
    while to_insert > 0 && !pool_subsection_b.is_empty() {
        let want = rng
            .gen_range(config.chunk_words_min..=config.chunk_words_max)
            .min(to_insert)
            .min(pool_subsection_b.len());
        let start = rng.gen_range(0..=pool_subsection_b.len() - want);
        segments.push(Segment {
            origin: SegmentOrigin::Inserted,
            tokens: pool_subsection_b[start..start + want].to_vec(),
        });
        to_insert -= want;
    }

    segments.shuffle(rng);
    Ok(segments)
}

/// Flattened [`chunk_edit_segments`].
pub fn chunk_edit(
    tokens_a: &[String],
    pool_subsection_b: &[String],
    modification_prop: f64,
    rng: &mut impl Rng,
    config: &SynthConfig,
) -> Result<Vec<String>> {
    Ok(
        chunk_edit_segments(tokens_a, pool_subsection_b, modification_prop, rng, config)?
            .into_iter()
            .flat_map(|s| s.tokens)
            .collect(),
    )
}

/// A generated pair: the label/provenance record plus both token lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub pair: LabeledPair,
    pub tokens_a: Vec<String>,
    pub tokens_x: Vec<String>,
    pub seed_used: u64,
}

/// Class-3 style perturbation: op count uniform in `[0, prop_max * len]`,
/// capped.
fn perturb<R: Rng>(
    tokens: Vec<String>,
    config: &SynthConfig,
    lexicon: &SynonymLexicon,
    rng: &mut R,
) -> Vec<String> {
    let budget = (config.swap_syn_prop_max * tokens.len() as f64).floor() as usize;
    let n_ops = rng.gen_range(0..=budget.min(config.swap_syn_op_cap));
    swap_and_synonym(&tokens, n_ops, lexicon, config, rng)
}

fn pick_donor<R: Rng>(
    source: &Subsection,
    pool: &[Subsection],
    exclude_bill: bool,
    rng: &mut R,
) -> Option<usize> {
    let candidates: Vec<usize> = pool
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            s.subsection_id != source.subsection_id
                && !s.tokens.is_empty()
                && !(exclude_bill && s.bill_id == source.bill_id)
        })
        .map(|(i, _)| i)
        .collect();
    candidates.as_slice().choose(rng).copied()
}

/// Generates the class-conditioned counterpart for `subsection_a` with a
/// caller-supplied RNG. `pool` must be nonempty for classes 0, 1, and 2.
#[allow(clippy::too_many_arguments)]
pub fn generate_pair_with_rng(
    subsection_a: &Subsection,
    class_label: u8,
    pool: &[Subsection],
    config: &SynthConfig,
    lexicon: &SynonymLexicon,
    pair_index: u64,
    seed_used: u64,
    rng: &mut impl Rng,
) -> Result<SyntheticPair> {
    if class_label > 4 {
        return Err(Error::validation(format!(
            "class label {class_label} outside 0..=4"
        )));
    }
    if subsection_a.tokens.is_empty() {
        return Err(Error::validation(format!(
            "cannot generate from empty subsection {}",
            subsection_a.subsection_id
        )));
    }
    let needs_pool = matches!(class_label, 0..=2);
    if needs_pool && pool.is_empty() {
        return Err(Error::validation(format!(
            "class {class_label} generation needs a nonempty subsection pool"
        )));
    }

    let tokens_x = match class_label {
        4 => subsection_a.tokens.clone(),
        3 => perturb(subsection_a.tokens.clone(), config, lexicon, rng),
        2 | 1 => {
            let (lo, hi) = if class_label == 2 {
                config.related_band
            } else {
                config.partial_band
            };
            let prop = rng.gen_range(lo..=hi);
            let donor = pick_donor(subsection_a, pool, false, rng).ok_or_else(|| {
                Error::validation("no eligible donor subsection in pool".to_string())
            })?;
            let edited = chunk_edit(&subsection_a.tokens, &pool[donor].tokens, prop, rng, config)?;
            perturb(edited, config, lexicon, rng)
        }
        0 => {
            let donor =
                pick_donor(subsection_a, pool, config.exclude_same_bill, rng).ok_or_else(|| {
                    Error::validation("no eligible class-0 counterpart in pool".to_string())
                })?;
            perturb(pool[donor].tokens.clone(), config, lexicon, rng)
        }
        _ => unreachable!("validated above"),
    };

    let id_x = format!(
        "{}:x{}:{}",
        subsection_a.subsection_id, class_label, pair_index
    );
    Ok(SyntheticPair {
        pair: LabeledPair {
            id_a: subsection_a.subsection_id.clone(),
            id_b: id_x,
            label: class_label,
            provenance: Provenance::Synthetic,
        },
        tokens_a: subsection_a.tokens.clone(),
        tokens_x,
        seed_used,
    })
}

/// Deterministic entry point: derives the per-pair RNG from
/// `(config.seed, subsection id, class, pair_index)`.
pub fn generate_pair(
    subsection_a: &Subsection,
    class_label: u8,
    pool: &[Subsection],
    config: &SynthConfig,
    lexicon: &SynonymLexicon,
    pair_index: u64,
) -> Result<SyntheticPair> {
    let seed = pair_seed(
        config.seed,
        &subsection_a.subsection_id,
        class_label,
        pair_index,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_pair_with_rng(
        subsection_a,
        class_label,
        pool,
        config,
        lexicon,
        pair_index,
        seed,
        &mut rng,
    )
}
