//! File formats and artifact metadata.
//!
//! Every machine-readable file this tool produces starts with a metadata
//! line recording the tool version, seed, and config hash:
//! JSONL files carry `{"billsim_meta": {...}}` as the first line, CSV/TSV
//! files a `# billsim_meta ...` comment. Readers accept files without the
//! line (external inputs), but artifacts with conflicting config hashes are
//! rejected when combined.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::classify::{LabeledPair, Provenance};
use crate::corpus::{tokenize, NgramCount, Subsection};
use crate::error::{Error, Result};
use crate::synth::SyntheticPair;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl ArtifactMeta {
    pub fn new(seed: u64, config_hash: &str) -> Self {
        ArtifactMeta {
            tool_version: TOOL_VERSION.to_string(),
            seed,
            config_hash: config_hash.to_string(),
        }
    }

    fn comment_line(&self) -> String {
        format!(
            "# billsim_meta tool_version={} seed={} config_hash={}",
            self.tool_version, self.seed, self.config_hash
        )
    }

    fn from_comment_line(line: &str) -> Option<ArtifactMeta> {
        let rest = line.strip_prefix("# billsim_meta ")?;
        let mut fields: HashMap<&str, &str> = HashMap::new();
        for part in rest.split_whitespace() {
            if let Some((k, v)) = part.split_once('=') {
                fields.insert(k, v);
            }
        }
        Some(ArtifactMeta {
            tool_version: fields.get("tool_version")?.to_string(),
            seed: fields.get("seed")?.parse().ok()?,
            config_hash: fields.get("config_hash")?.to_string(),
        })
    }
}

/// Rejects combining tool artifacts produced under different config hashes.
pub fn check_meta_consistency(metas: &[(&Path, &Option<ArtifactMeta>)]) -> Result<()> {
    let mut first: Option<(&Path, &ArtifactMeta)> = None;
    for (path, meta) in metas {
        let Some(meta) = meta else { continue };
        match first {
            None => first = Some((path, meta)),
            Some((fpath, fmeta)) => {
                if fmeta.config_hash != meta.config_hash {
                    return Err(Error::HashMismatch {
                        left: fmeta.config_hash.clone(),
                        left_path: fpath.to_path_buf(),
                        right: meta.config_hash.clone(),
                        right_path: path.to_path_buf(),
                    });
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaLine {
    billsim_meta: ArtifactMeta,
}

// ---------------------------------------------------------------------------
// JSONL
// ---------------------------------------------------------------------------

pub fn write_jsonl<T: Serialize>(
    path: &Path,
    meta: &ArtifactMeta,
    items: impl IntoIterator<Item = T>,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let meta_line = serde_json::to_string(&MetaLine {
        billsim_meta: meta.clone(),
    })
    .map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    writeln!(w, "{meta_line}").map_err(|e| Error::io(path, e))?;
    for item in items {
        let line = serde_json::to_string(&item).map_err(|e| Error::Json {
            path: path.into(),
            source: e,
        })?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Option<ArtifactMeta>, Vec<T>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut meta = None;
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if i == 0 {
            if let Ok(m) = serde_json::from_str::<MetaLine>(&line) {
                meta = Some(m.billsim_meta);
                continue;
            }
        }
        let item: T = serde_json::from_str(&line).map_err(|e| Error::Json {
            path: path.into(),
            source: e,
        })?;
        items.push(item);
    }
    Ok((meta, items))
}

// ---------------------------------------------------------------------------
// Subsection records
// ---------------------------------------------------------------------------

/// JSONL record schema for one subsection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsectionRecord {
    pub subsection_id: String,
    pub bill_id: String,
    pub heading: Option<String>,
    pub text: String,
    pub word_count: usize,
    pub is_quoted_block: bool,
}

impl From<&Subsection> for SubsectionRecord {
    fn from(s: &Subsection) -> Self {
        SubsectionRecord {
            subsection_id: s.subsection_id.clone(),
            bill_id: s.bill_id.clone(),
            heading: s.heading.clone(),
            text: s.text(),
            word_count: s.word_count(),
            is_quoted_block: s.is_quoted_block,
        }
    }
}

impl From<SubsectionRecord> for Subsection {
    fn from(r: SubsectionRecord) -> Self {
        Subsection {
            subsection_id: r.subsection_id,
            bill_id: r.bill_id,
            heading: r.heading,
            tokens: tokenize(&r.text),
            is_quoted_block: r.is_quoted_block,
        }
    }
}

pub fn write_subsections(
    path: &Path,
    meta: &ArtifactMeta,
    subsections: impl IntoIterator<Item = Subsection>,
) -> Result<()> {
    write_jsonl(
        path,
        meta,
        subsections.into_iter().map(|s| SubsectionRecord::from(&s)),
    )
}

pub fn read_subsections(path: &Path) -> Result<(Option<ArtifactMeta>, Vec<Subsection>)> {
    let (meta, records): (_, Vec<SubsectionRecord>) = read_jsonl(path)?;
    Ok((meta, records.into_iter().map(Subsection::from).collect()))
}

// ---------------------------------------------------------------------------
// Synthetic pair records
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthPairRecord {
    pub id_a: String,
    pub id_b: String,
    pub text_a: String,
    pub text_x: String,
    pub label: u8,
    pub provenance: Provenance,
    pub seed: u64,
}

impl From<&SyntheticPair> for SynthPairRecord {
    fn from(p: &SyntheticPair) -> Self {
        SynthPairRecord {
            id_a: p.pair.id_a.clone(),
            id_b: p.pair.id_b.clone(),
            text_a: p.tokens_a.join(" "),
            text_x: p.tokens_x.join(" "),
            label: p.pair.label,
            provenance: p.pair.provenance,
            seed: p.seed_used,
        }
    }
}

pub fn write_synth_pairs(
    path: &Path,
    meta: &ArtifactMeta,
    pairs: impl IntoIterator<Item = SyntheticPair>,
) -> Result<()> {
    write_jsonl(
        path,
        meta,
        pairs.into_iter().map(|p| SynthPairRecord::from(&p)),
    )
}

pub fn read_synth_pairs(path: &Path) -> Result<(Option<ArtifactMeta>, Vec<SynthPairRecord>)> {
    read_jsonl(path)
}

// ---------------------------------------------------------------------------
// CSV / TSV with a meta comment line
// ---------------------------------------------------------------------------

fn open_csv_writer(
    path: &Path,
    meta: &ArtifactMeta,
    delimiter: u8,
) -> Result<csv::Writer<std::fs::File>> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(file, "{}", meta.comment_line()).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(file))
}

fn read_meta_then<R: Read>(reader: R) -> Result<(Option<ArtifactMeta>, String)> {
    let mut buf = BufReader::new(reader);
    let mut first = String::new();
    buf.read_line(&mut first)
        .map_err(|e| Error::io("<stream>", e))?;
    let meta = ArtifactMeta::from_comment_line(first.trim_end());
    let mut rest = String::new();
    if meta.is_none() {
        rest.push_str(&first);
    }
    buf.read_to_string(&mut rest)
        .map_err(|e| Error::io("<stream>", e))?;
    Ok((meta, rest))
}

pub fn write_csv_records<T: Serialize>(
    path: &Path,
    meta: &ArtifactMeta,
    records: impl IntoIterator<Item = T>,
) -> Result<()> {
    let mut w = open_csv_writer(path, meta, b',')?;
    for record in records {
        w.serialize(record).map_err(|e| Error::Csv {
            path: path.into(),
            source: e,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv_records<T: DeserializeOwned>(
    path: &Path,
) -> Result<(Option<ArtifactMeta>, Vec<T>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let (meta, rest) = read_meta_then(file)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(rest.as_bytes());
    let mut out = Vec::new();
    for record in reader.deserialize() {
        out.push(record.map_err(|e| Error::Csv {
            path: path.into(),
            source: e,
        })?);
    }
    Ok((meta, out))
}

pub fn write_tsv_ngrams(path: &Path, meta: &ArtifactMeta, counts: &[NgramCount]) -> Result<()> {
    let mut w = open_csv_writer(path, meta, b'\t')?;
    w.write_record(["ngram", "n", "count"])
        .map_err(|e| Error::Csv {
            path: path.into(),
            source: e,
        })?;
    for c in counts {
        w.write_record([c.ngram.as_str(), &c.n.to_string(), &c.count.to_string()])
            .map_err(|e| Error::Csv {
                path: path.into(),
                source: e,
            })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Concrete CSV record schemas
// ---------------------------------------------------------------------------

/// `sample` output: candidate pairs in the cosine band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub id_a: String,
    pub id_b: String,
    pub cosine: f64,
}

/// Labeled pairs as exchanged with annotators and the external classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPairRecord {
    pub id_a: String,
    pub id_b: String,
    pub label: u8,
    pub provenance: String,
}

impl LabeledPairRecord {
    pub fn into_pair(self) -> Result<LabeledPair> {
        let provenance: Provenance = self.provenance.parse()?;
        let pair = LabeledPair {
            id_a: self.id_a,
            id_b: self.id_b,
            label: self.label,
            provenance,
        };
        pair.validate()?;
        Ok(pair)
    }
}

impl From<&LabeledPair> for LabeledPairRecord {
    fn from(p: &LabeledPair) -> Self {
        LabeledPairRecord {
            id_a: p.id_a.clone(),
            id_b: p.id_b.clone(),
            label: p.label,
            provenance: p.provenance.to_string(),
        }
    }
}

/// Alignment batch output: raw score plus the four features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub id_a: String,
    pub id_b: String,
    pub raw_score: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
}

/// Batch predictions; probabilities are optional on external input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id_a: String,
    pub id_b: String,
    pub label: u8,
    pub p0: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub p3: Option<f64>,
    pub p4: Option<f64>,
}

/// Reads per-pair predictions (internal batch output or the external
/// classifier's file). Labels must lie in 0..=4.
pub fn read_predictions(path: &Path) -> Result<(Option<ArtifactMeta>, Vec<PredictionRecord>)> {
    let (meta, records): (_, Vec<PredictionRecord>) = read_csv_records(path)?;
    for r in &records {
        if r.label > 4 {
            return Err(Error::validation(format!(
                "{}: pair ({}, {}) has label {} outside 0..=4",
                path.display(),
                r.id_a,
                r.id_b,
                r.label
            )));
        }
    }
    Ok((meta, records))
}

/// Co-occurrence counts from lobbying reports: `bill_i,bill_j,count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceInputRecord {
    pub bill_i: String,
    pub bill_j: String,
    pub count: u64,
}

/// `billsim` output rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BillSimRecord {
    pub bill_i: String,
    pub bill_j: String,
    pub sigma_star_ij: f64,
    pub sigma_star_ji: f64,
    pub score: f64,
    pub bin: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn meta() -> ArtifactMeta {
        ArtifactMeta::new(42, "cafebabe")
    }

    #[test]
    fn jsonl_round_trip_with_meta() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("subs.jsonl");
        let subs = vec![
            Subsection {
                subsection_id: "b:s1:a".into(),
                bill_id: "b".into(),
                heading: Some("In general".into()),
                tokens: tokenize("one two three"),
                is_quoted_block: false,
            },
            Subsection {
                subsection_id: "b:s1:q1".into(),
                bill_id: "b".into(),
                heading: None,
                tokens: tokenize("quoted text"),
                is_quoted_block: true,
            },
        ];
        write_subsections(&path, &meta(), subs.clone()).unwrap();
        let (read_meta, back) = read_subsections(&path).unwrap();
        assert_eq!(read_meta, Some(meta()));
        assert_eq!(back, subs);
        let first_line = std::fs::read_to_string(&path)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert!(first_line.contains("billsim_meta"));
    }

    #[test]
    fn jsonl_without_meta_still_reads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plain.jsonl");
        std::fs::write(
            &path,
            "{\"subsection_id\":\"x\",\"bill_id\":\"b\",\"heading\":null,\"text\":\"a b\",\"word_count\":2,\"is_quoted_block\":false}\n",
        )
        .unwrap();
        let (m, subs) = read_subsections(&path).unwrap();
        assert!(m.is_none());
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].tokens, vec!["a", "b"]);
    }

    #[test]
    fn csv_round_trip_with_meta_comment() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.csv");
        let records = vec![
            CandidateRecord {
                id_a: "a".into(),
                id_b: "b".into(),
                cosine: 0.875,
            },
            CandidateRecord {
                id_a: "c".into(),
                id_b: "d".into(),
                cosine: 1.0,
            },
        ];
        write_csv_records(&path, &meta(), records.clone()).unwrap();
        let (m, back): (_, Vec<CandidateRecord>) = read_csv_records(&path).unwrap();
        assert_eq!(m, Some(meta()));
        assert_eq!(back, records);
    }

    #[test]
    fn csv_without_meta_still_reads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ext.csv");
        std::fs::write(&path, "id_a,id_b,cosine\nx,y,0.9\n").unwrap();
        let (m, recs): (_, Vec<CandidateRecord>) = read_csv_records(&path).unwrap();
        assert!(m.is_none());
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn hash_mismatch_is_rejected() {
        let a = Some(ArtifactMeta::new(1, "aaaa"));
        let b = Some(ArtifactMeta::new(1, "bbbb"));
        let none: Option<ArtifactMeta> = None;
        let pa = PathBuf::from("a.csv");
        let pb = PathBuf::from("b.csv");
        assert!(check_meta_consistency(&[(&pa, &a), (&pb, &a)]).is_ok());
        assert!(check_meta_consistency(&[(&pa, &a), (&pb, &none)]).is_ok());
        let err = check_meta_consistency(&[(&pa, &a), (&pb, &b)]).unwrap_err();
        assert!(matches!(err, Error::HashMismatch { .. }));
    }

    #[test]
    fn predictions_validate_label_range() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pred.csv");
        std::fs::write(&path, "id_a,id_b,label,p0,p1,p2,p3,p4\nx,y,9,,,,,\n").unwrap();
        assert!(read_predictions(&path).is_err());
        std::fs::write(&path, "id_a,id_b,label,p0,p1,p2,p3,p4\nx,y,3,,,,,\n").unwrap();
        let (_, recs) = read_predictions(&path).unwrap();
        assert_eq!(recs[0].label, 3);
        assert!(recs[0].p0.is_none());
    }

    #[test]
    fn labeled_pair_record_round_trip() {
        let pair = LabeledPair {
            id_a: "a".into(),
            id_b: "b".into(),
            label: 2,
            provenance: Provenance::Human,
        };
        let rec = LabeledPairRecord::from(&pair);
        assert_eq!(rec.into_pair().unwrap(), pair);
        let bad = LabeledPairRecord {
            id_a: "a".into(),
            id_b: "b".into(),
            label: 7,
            provenance: "human".into(),
        };
        assert!(bad.into_pair().is_err());
    }

    #[test]
    fn ngram_tsv_has_three_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ngrams.tsv");
        let counts = vec![NgramCount {
            ngram: "at the end".into(),
            n: 3,
            count: 25197,
        }];
        write_tsv_ngrams(&path, &meta(), &counts).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# billsim_meta"));
        assert_eq!(lines.next().unwrap(), "ngram\tn\tcount");
        assert_eq!(lines.next().unwrap(), "at the end\t3\t25197");
    }
}
