//! Candidate subsection-pair sampling by cosine similarity band.
//!
//! Vectors come from an internal TF-IDF embedding or an external embedding
//! file. Pair scoring walks an inverted index so only pairs sharing at least
//! one term are touched; with nonnegative vectors that is exact for any band
//! floor above zero.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Subsection;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSource {
    #[default]
    InternalTfidf,
    ExternalFile(std::path::PathBuf),
}

/// Builds the vector store for a corpus from the configured source.
pub fn load_vectors(source: &EmbeddingSource, corpus: &[Subsection]) -> Result<Vectors> {
    match source {
        EmbeddingSource::InternalTfidf => tfidf_embed(corpus),
        EmbeddingSource::ExternalFile(path) => load_external_embeddings(path, corpus),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub sim_low: f64,
    pub sim_high: f64,
    pub sample_size: usize,
    pub seed: u64,
    /// Pairs from the same bill are excluded unless set.
    pub include_intra_bill: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            sim_low: 0.85,
            sim_high: 1.0,
            sample_size: 5400,
            seed: 0,
            include_intra_bill: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sim_low) || !(0.0..=1.0).contains(&self.sim_high) {
            return Err(Error::config("sampler band bounds must lie in [0, 1]"));
        }
        if self.sim_low > self.sim_high {
            return Err(Error::config("sampler sim_low must not exceed sim_high"));
        }
        Ok(())
    }
}

/// L2-normalized sparse vectors over an id-indexed vocabulary, one per
/// subsection, in corpus order.
#[derive(Debug, Clone)]
pub struct Vectors {
    pub ids: Vec<String>,
    pub bill_ids: Vec<String>,
    /// Sorted (term id, weight) entries; empty for zero-token subsections.
    pub entries: Vec<Vec<(u32, f64)>>,
    /// Subsection ids that produced a zero vector; excluded from sampling.
    pub zero_flagged: Vec<String>,
}

impl Vectors {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Dot product of two stored (already normalized) vectors, clamped to
    /// [-1, 1] against accumulation round-off.
    pub fn cosine(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.entries[i], &self.entries[j]);
        let mut dot = 0.0;
        let (mut x, mut y) = (0usize, 0usize);
        while x < a.len() && y < b.len() {
            match a[x].0.cmp(&b[y].0) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    dot += a[x].1 * b[y].1;
                    x += 1;
                    y += 1;
                }
            }
        }
        dot.clamp(-1.0, 1.0)
    }
}

/// TF-IDF embedding: weight(t, d) = tf(t, d) * ln(1 + N / df(t)) over
/// lowercased tokens, L2-normalized per document.
pub fn tfidf_embed(corpus: &[Subsection]) -> Result<Vectors> {
    if corpus.is_empty() {
        return Err(Error::validation("tfidf_embed: empty corpus"));
    }
    let mut vocab: HashMap<String, u32> = HashMap::new();
    let mut doc_terms: Vec<Vec<(u32, f64)>> = Vec::with_capacity(corpus.len());
    let mut df: Vec<u32> = Vec::new();

    for sub in corpus {
        let mut counts: HashMap<u32, f64> = HashMap::new();
        for tok in &sub.tokens {
            let lower = tok.to_lowercase();
            let next = vocab.len() as u32;
            let id = *vocab.entry(lower).or_insert(next);
            if id as usize >= df.len() {
                df.push(0);
            }
            *counts.entry(id).or_insert(0.0) += 1.0;
        }
        let mut entries: Vec<(u32, f64)> = counts.into_iter().collect();
        entries.sort_unstable_by_key(|e| e.0);
        for (t, _) in &entries {
            df[*t as usize] += 1;
        }
        doc_terms.push(entries);
    }

    let n = corpus.len() as f64;
    let mut zero_flagged = Vec::new();
    for (sub, entries) in corpus.iter().zip(doc_terms.iter_mut()) {
        for (t, w) in entries.iter_mut() {
            *w *= (1.0 + n / df[*t as usize] as f64).ln();
        }
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in entries.iter_mut() {
                *w /= norm;
            }
        } else {
            zero_flagged.push(sub.subsection_id.clone());
        }
    }

    Ok(Vectors {
        ids: corpus.iter().map(|s| s.subsection_id.clone()).collect(),
        bill_ids: corpus.iter().map(|s| s.bill_id.clone()).collect(),
        entries: doc_terms,
        zero_flagged,
    })
}

/// Loads external embeddings from TSV lines `subsection_id \t v1,v2,...`.
/// Vectors are L2-normalized on load; every corpus subsection must be
/// covered, and every component must be finite.
pub fn load_external_embeddings(path: &Path, corpus: &[Subsection]) -> Result<Vectors> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut by_id: HashMap<String, Vec<(u32, f64)>> = HashMap::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, rest) = line.split_once('\t').ok_or_else(|| {
            Error::validation(format!(
                "{}:{}: expected `id\\tv1,v2,...`",
                path.display(),
                lineno + 1
            ))
        })?;
        let mut vec = Vec::new();
        for (k, part) in rest.split(',').enumerate() {
            let v: f64 = part.trim().parse().map_err(|_| {
                Error::validation(format!(
                    "{}:{}: bad component {part:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::validation(format!(
                    "{}:{}: non-finite embedding component",
                    path.display(),
                    lineno + 1
                )));
            }
            vec.push((k as u32, v));
        }
        match dim {
            None => dim = Some(vec.len()),
            Some(d) if d != vec.len() => {
                return Err(Error::validation(format!(
                    "{}:{}: dimension {} differs from {}",
                    path.display(),
                    lineno + 1,
                    vec.len(),
                    d
                )));
            }
            _ => {}
        }
        let norm = vec.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in vec.iter_mut() {
                *w /= norm;
            }
        } else {
            vec.clear();
        }
        by_id.insert(id.to_string(), vec);
    }

    let mut entries = Vec::with_capacity(corpus.len());
    let mut zero_flagged = Vec::new();
    let mut missing = Vec::new();
    for sub in corpus {
        match by_id.get(&sub.subsection_id) {
            Some(v) => {
                if v.is_empty() {
                    zero_flagged.push(sub.subsection_id.clone());
                }
                entries.push(v.clone());
            }
            None => missing.push(sub.subsection_id.clone()),
        }
    }
    if !missing.is_empty() {
        missing.truncate(5);
        return Err(Error::validation(format!(
            "external embeddings missing {} subsection(s), e.g. {:?}",
            missing.len(),
            missing
        )));
    }
    Ok(Vectors {
        ids: corpus.iter().map(|s| s.subsection_id.clone()).collect(),
        bill_ids: corpus.iter().map(|s| s.bill_id.clone()).collect(),
        entries,
        zero_flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePair {
    pub id_a: String,
    pub id_b: String,
    pub cosine: f64,
}

/// All unordered in-band pairs, plus a seeded uniform sample of
/// `min(sample_size, available)` of them. Pairs are reported once with
/// `id_a < id_b`; intra-bill pairs are excluded unless configured in.
pub fn candidate_pairs(vectors: &Vectors, config: &SamplerConfig) -> Result<Vec<CandidatePair>> {
    config.validate()?;
    if vectors.is_empty() {
        return Err(Error::validation("candidate_pairs: no vectors"));
    }
    let mut in_band = in_band_pairs(vectors, config);
    // Canonical order before sampling makes the draw independent of
    // accumulation order.
    in_band.sort_unstable_by(|x, y| {
        let ka = pair_key(vectors, x.0, x.1);
        let kb = pair_key(vectors, y.0, y.1);
        ka.cmp(&kb)
    });
    let amount = config.sample_size.min(in_band.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut chosen = rand::seq::index::sample(&mut rng, in_band.len(), amount).into_vec();
    chosen.sort_unstable();
    Ok(chosen
        .into_iter()
        .map(|k| {
            let (i, j, cos) = in_band[k];
            let (first, second) = pair_key(vectors, i, j);
            CandidatePair {
                id_a: first.to_string(),
                id_b: second.to_string(),
                cosine: cos,
            }
        })
        .collect())
}

fn pair_key(vectors: &Vectors, i: usize, j: usize) -> (&str, &str) {
    let (a, b) = (vectors.ids[i].as_str(), vectors.ids[j].as_str());
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Inverted-index accumulation of dot products for pairs sharing a term.
fn in_band_pairs(vectors: &Vectors, config: &SamplerConfig) -> Vec<(usize, usize, f64)> {
    let mut postings: HashMap<u32, Vec<(usize, f64)>> = HashMap::new();
    for (doc, entries) in vectors.entries.iter().enumerate() {
        for &(term, w) in entries {
            postings.entry(term).or_default().push((doc, w));
        }
    }
    let mut terms: Vec<u32> = postings.keys().copied().collect();
    terms.sort_unstable();

    let mut dots: HashMap<(usize, usize), f64> = HashMap::new();
    for term in terms {
        let posting = &postings[&term];
        for (x, &(i, wi)) in posting.iter().enumerate() {
            for &(j, wj) in &posting[x + 1..] {
                *dots.entry((i, j)).or_insert(0.0) += wi * wj;
            }
        }
    }

    let mut out = Vec::new();
    for ((i, j), cos) in dots {
        if !config.include_intra_bill && vectors.bill_ids[i] == vectors.bill_ids[j] {
            continue;
        }
        let cos = cos.clamp(-1.0, 1.0);
        if cos >= config.sim_low && cos <= config.sim_high {
            out.push((i, j, cos));
        }
    }
    out
}
