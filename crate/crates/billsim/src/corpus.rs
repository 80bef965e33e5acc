//! Bill-to-subsection parsing, corpus filters, and n-gram statistics.
//!
//! A bill is split into subsection-level pieces: `SEC.`/`SECTION` headers open
//! sections, and within each section the shallowest-indented `(a)` / `(1)`
//! enumerators open subsections. Quoted bill text (`` ... '') is emitted as its
//! own piece, and table-like regions are dropped before structural parsing.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Section headings whose subsections are templated boilerplate.
pub const DEFAULT_BOILERPLATE_HEADINGS: [&str; 12] = [
    "Effective Date",
    "Authorization of Appropriations",
    "Vacancies",
    "Termination",
    "Table of Contents",
    "Short Title",
    "Reference",
    "Sunset",
    "Appropriation",
    "Severability",
    "Matching Requirement",
    "Definitions",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chamber {
    House,
    Senate,
}

impl Chamber {
    /// Best-effort chamber detection from ids like `111-hr-3590` or `s1728-111`.
    pub fn from_bill_id(bill_id: &str) -> Chamber {
        for part in bill_id.split(|c: char| !c.is_ascii_alphanumeric()) {
            let alpha: String = part
                .chars()
                .take_while(|c| c.is_ascii_alphabetic())
                .collect();
            match alpha.to_ascii_lowercase().as_str() {
                "s" | "sres" | "sjres" | "sconres" => return Chamber::Senate,
                "hr" | "hres" | "hjres" | "hconres" => return Chamber::House,
                _ => {}
            }
        }
        Chamber::House
    }
}

/// The atomic unit of analysis: one subsection-level piece of a bill.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsection {
    pub subsection_id: String,
    pub bill_id: String,
    pub heading: Option<String>,
    /// Word tokens in document order, original case, non-alphanumerics stripped.
    pub tokens: Vec<String>,
    pub is_quoted_block: bool,
}

impl Subsection {
    pub fn word_count(&self) -> usize {
        self.tokens.len()
    }

    /// Tokens joined with single spaces; round-trips through `tokenize`.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct Bill {
    pub bill_id: String,
    pub chamber: Chamber,
    pub raw_text: String,
    pub subsections: Vec<Subsection>,
    /// Recoverable parse diagnostics (malformed enumerators etc.).
    pub warnings: Vec<String>,
}

/// Filters applied after parsing: boilerplate headings, length floor, slicing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusFilterConfig {
    pub boilerplate_headings: Vec<String>,
    pub min_words_exclusive: usize,
    pub slice_max_words: usize,
}

impl Default for CorpusFilterConfig {
    fn default() -> Self {
        CorpusFilterConfig {
            boilerplate_headings: DEFAULT_BOILERPLATE_HEADINGS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            min_words_exclusive: 30,
            slice_max_words: 400,
        }
    }
}

impl CorpusFilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.slice_max_words <= self.min_words_exclusive {
            return Err(Error::config(format!(
                "slice_max_words ({}) must exceed min_words_exclusive ({})",
                self.slice_max_words, self.min_words_exclusive
            )));
        }
        Ok(())
    }

    fn normalized_headings(&self) -> HashSet<String> {
        self.boilerplate_headings
            .iter()
            .map(|h| normalize_heading(h))
            .collect()
    }
}

/// Splits text into word tokens: every non-alphanumeric character acts as a
/// separator, so each token is a maximal alphanumeric run. Case is preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Lowercase, collapse internal whitespace, strip trailing punctuation.
pub fn normalize_heading(heading: &str) -> String {
    let collapsed = heading.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_end_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

fn section_header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\s*(?:SEC\.|SECTION)\s+(\d+[A-Za-z]?)\.?\s*(.*)$").expect("static regex")
    })
}

fn subsection_marker_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(\s*)\(([a-z]|\d+)\)\s*(.*)$").expect("static regex"))
}

fn dot_leader_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\.{4,}").expect("static regex"))
}

fn space_run_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r" {2,}").expect("static regex"))
}

fn looks_tabular(line: &str) -> bool {
    let trimmed = line.trim();
    if dot_leader_re().is_match(trimmed) {
        return true;
    }
    space_run_re().find_iter(trimmed).count() >= 3
}

/// Drops blank-line-delimited blocks in which at least half the lines are
/// column- or leader-formatted. Returns surviving lines in order.
fn drop_table_blocks(lines: &[&str]) -> Vec<String> {
    let mut kept = Vec::with_capacity(lines.len());
    let mut block: Vec<&str> = Vec::new();
    let flush = |block: &mut Vec<&str>, kept: &mut Vec<String>| {
        if block.is_empty() {
            return;
        }
        let tabular = block.iter().filter(|l| looks_tabular(l)).count();
        let is_table = block.len() >= 2 && tabular * 2 >= block.len();
        if !is_table {
            kept.extend(block.iter().map(|l| l.to_string()));
        }
        block.clear();
    };
    for line in lines {
        if line.trim().is_empty() {
            flush(&mut block, &mut kept);
        } else {
            block.push(line);
        }
    }
    flush(&mut block, &mut kept);
    kept
}

fn count_occurrences(haystack: &str, needle: &str) -> usize {
    haystack.matches(needle).count()
}

#[derive(Debug)]
struct RawSection {
    /// Section number as printed, or "0" for the preamble.
    number: String,
    heading: Option<String>,
    lines: Vec<String>,
}

fn split_sections(lines: &[String]) -> Vec<RawSection> {
    let mut sections = Vec::new();
    let mut current = RawSection {
        number: "0".to_string(),
        heading: None,
        lines: Vec::new(),
    };
    for line in lines {
        if let Some(caps) = section_header_re().captures(line) {
            sections.push(current);
            let rest = caps.get(2).map(|m| m.as_str().trim()).unwrap_or("");
            let heading = if rest.is_empty() {
                None
            } else {
                Some(rest.to_string())
            };
            current = RawSection {
                number: caps[1].to_string(),
                heading,
                lines: Vec::new(),
            };
        } else {
            current.lines.push(line.clone());
        }
    }
    sections.push(current);
    sections
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineKind {
    Plain,
    Quoted,
}

/// Tags each line of a section as quoted-bill material or plain text.
///
/// A quoted block opens at a line whose content starts with `` and stays open
/// until the double-apostrophe closers balance the openers; isolated runs of
/// lines starting with a quote mark are also treated as quoted.
fn tag_quoted_lines(lines: &[String]) -> Vec<LineKind> {
    let mut kinds = vec![LineKind::Plain; lines.len()];
    let mut depth: isize = 0;
    for (i, line) in lines.iter().enumerate() {
        let trimmed = line.trim_start();
        let opens = count_occurrences(line, "``") as isize;
        let closes = count_occurrences(line, "''") as isize;
        if depth > 0 {
            kinds[i] = LineKind::Quoted;
            depth += opens - closes;
            if depth < 0 {
                depth = 0;
            }
        } else if trimmed.starts_with("``") {
            kinds[i] = LineKind::Quoted;
            depth = opens - closes;
            if depth < 0 {
                depth = 0;
            }
        } else if trimmed.starts_with('`') || trimmed.starts_with('\'') {
            kinds[i] = LineKind::Quoted;
        }
    }
    kinds
}

/// Extracts a heading of the form `(a) In general.--rest` from the first line
/// of a subsection. The heading phrase stays in the token stream; this only
/// captures it as metadata for the boilerplate filter.
fn split_heading(rest_of_marker_line: &str) -> Option<String> {
    if let Some(pos) = rest_of_marker_line.find(".--") {
        let head = rest_of_marker_line[..pos].trim();
        // Headings are short title phrases; anything long is body text.
        if !head.is_empty() && head.split_whitespace().count() <= 12 {
            return Some(head.to_string());
        }
    }
    None
}

fn indent_width(line: &str) -> usize {
    line.chars().take_while(|c| c.is_whitespace()).count()
}

struct UnitBuilder {
    bill_id: String,
    subsections: Vec<Subsection>,
    // Open plain-text unit.
    unit_id: Option<String>,
    unit_heading: Option<String>,
    unit_tokens: Vec<String>,
    unit_continuations: usize,
    // Open quoted block.
    quote_tokens: Vec<String>,
    quote_count: usize,
}

impl UnitBuilder {
    fn new(bill_id: &str) -> Self {
        UnitBuilder {
            bill_id: bill_id.to_string(),
            subsections: Vec::new(),
            unit_id: None,
            unit_heading: None,
            unit_tokens: Vec::new(),
            unit_continuations: 0,
            quote_tokens: Vec::new(),
            quote_count: 0,
        }
    }

    fn open_unit(&mut self, id: String, heading: Option<String>) {
        self.flush_quote();
        self.flush_unit();
        self.unit_id = Some(id);
        self.unit_heading = heading;
        self.unit_continuations = 0;
    }

    fn push_plain(&mut self, text: &str) {
        self.flush_quote();
        self.unit_tokens.extend(tokenize(text));
    }

    fn push_quoted(&mut self, text: &str) {
        // Quoted text interrupts the host unit: emit what was collected so far
        // so document order is preserved, then accumulate the quoted block.
        if self.quote_tokens.is_empty() && !self.unit_tokens.is_empty() {
            self.emit_unit_part();
        }
        self.quote_tokens.extend(tokenize(text));
    }

    fn emit_unit_part(&mut self) {
        if self.unit_tokens.is_empty() {
            return;
        }
        let base = self
            .unit_id
            .clone()
            .unwrap_or_else(|| format!("{}:s0", self.bill_id));
        let id = if self.unit_continuations == 0 {
            base
        } else {
            format!("{}:c{}", base, self.unit_continuations)
        };
        self.subsections.push(Subsection {
            subsection_id: id,
            bill_id: self.bill_id.clone(),
            heading: self.unit_heading.clone(),
            tokens: std::mem::take(&mut self.unit_tokens),
            is_quoted_block: false,
        });
        self.unit_continuations += 1;
    }

    fn flush_quote(&mut self) {
        if self.quote_tokens.is_empty() {
            return;
        }
        self.quote_count += 1;
        let base = self
            .unit_id
            .clone()
            .unwrap_or_else(|| format!("{}:s0", self.bill_id));
        self.subsections.push(Subsection {
            subsection_id: format!("{}:q{}", base, self.quote_count),
            bill_id: self.bill_id.clone(),
            heading: None,
            tokens: std::mem::take(&mut self.quote_tokens),
            is_quoted_block: true,
        });
    }

    fn flush_unit(&mut self) {
        self.flush_quote();
        self.emit_unit_part();
        self.unit_id = None;
        self.unit_heading = None;
        self.unit_continuations = 0;
    }

    fn finish(mut self) -> Vec<Subsection> {
        self.flush_unit();
        self.subsections
    }
}

/// Parses one bill's plain text into ordered subsection units.
///
/// Never hard-fails: malformed structure degrades to attaching text to the
/// nearest enclosing unit, with a note in `Bill::warnings`.
pub fn parse_bill(raw_text: &str, bill_id: &str) -> Bill {
    let mut warnings = Vec::new();
    let raw_lines: Vec<&str> = raw_text.lines().collect();
    let lines = drop_table_blocks(&raw_lines);
    let sections = split_sections(&lines);

    let mut builder = UnitBuilder::new(bill_id);
    let mut marker_seq: HashMap<String, usize> = HashMap::new();

    for section in &sections {
        let kinds = tag_quoted_lines(&section.lines);

        // Shallowest enumerator indentation among plain lines decides which
        // markers open new subsections in this section.
        let mut shallowest: Option<usize> = None;
        for (line, kind) in section.lines.iter().zip(&kinds) {
            if *kind != LineKind::Plain {
                continue;
            }
            if subsection_marker_re().is_match(line) {
                let w = indent_width(line);
                shallowest = Some(shallowest.map_or(w, |s: usize| s.min(w)));
            }
        }

        let sec_base = format!("{}:s{}", bill_id, section.number);
        builder.open_unit(sec_base.clone(), section.heading.clone());
        let mut seen_marker = false;

        for (line, kind) in section.lines.iter().zip(&kinds) {
            match kind {
                LineKind::Quoted => builder.push_quoted(line),
                LineKind::Plain => {
                    let caps = subsection_marker_re().captures(line);
                    let splits = match (&caps, shallowest) {
                        (Some(c), Some(s)) => c[1].chars().count() == s,
                        _ => false,
                    };
                    if splits {
                        let caps = caps.expect("checked above");
                        let marker = caps[2].to_string();
                        let mut id = format!("{}:{}", sec_base, marker);
                        // Repeated enumerators (misnumbered drafts) get a
                        // disambiguating suffix instead of failing.
                        let n = marker_seq.entry(id.clone()).or_insert(0);
                        *n += 1;
                        if *n > 1 {
                            warnings.push(format!(
                                "duplicate enumerator ({}) in section {} of {}",
                                marker, section.number, bill_id
                            ));
                            id = format!("{}+{}", id, *n - 1);
                        }
                        let heading = split_heading(&caps[3]);
                        builder.open_unit(id, heading);
                        builder.push_plain(&caps[3]);
                        seen_marker = true;
                    } else {
                        builder.push_plain(line);
                    }
                }
            }
        }
        let _ = seen_marker;
    }

    Bill {
        bill_id: bill_id.to_string(),
        chamber: Chamber::from_bill_id(bill_id),
        raw_text: raw_text.to_string(),
        subsections: builder.finish(),
        warnings,
    }
}

/// Removes subsections whose normalized heading matches a configured
/// boilerplate heading. Order of survivors is preserved.
pub fn filter_boilerplate(
    subsections: Vec<Subsection>,
    config: &CorpusFilterConfig,
) -> Vec<Subsection> {
    let blocked = config.normalized_headings();
    if blocked.is_empty() {
        return subsections;
    }
    subsections
        .into_iter()
        .filter(|s| {
            s.heading
                .as_deref()
                .map(|h| !blocked.contains(&normalize_heading(h)))
                .unwrap_or(true)
        })
        .collect()
}

/// Applies the length floor and greedy slicing to one subsection.
///
/// Subsections at or under `min_words_exclusive` words are dropped. Longer
/// ones are cut left-to-right into chunks of exactly `slice_max_words` words
/// with the remainder last; a trailing remainder at or under the floor is
/// dropped by the same length rule, so every surviving slice satisfies
/// `min_words_exclusive < word_count <= slice_max_words`.
pub fn normalize_and_slice(subsection: Subsection, config: &CorpusFilterConfig) -> Vec<Subsection> {
    let wc = subsection.word_count();
    if wc <= config.min_words_exclusive {
        return Vec::new();
    }
    if wc <= config.slice_max_words {
        return vec![subsection];
    }
    let mut out = Vec::new();
    let mut index = 0usize;
    let mut offset = 0usize;
    while offset < wc {
        let end = (offset + config.slice_max_words).min(wc);
        if end - offset > config.min_words_exclusive {
            out.push(Subsection {
                subsection_id: format!("{}:p{}", subsection.subsection_id, index),
                bill_id: subsection.bill_id.clone(),
                heading: subsection.heading.clone(),
                tokens: subsection.tokens[offset..end].to_vec(),
                is_quoted_block: subsection.is_quoted_block,
            });
        }
        index += 1;
        offset = end;
    }
    out
}

/// Full preprocessing for one parsed bill: boilerplate filter, then length
/// floor and slicing. Returns survivors plus the boilerplate-removed count.
pub fn preprocess_subsections(
    subsections: Vec<Subsection>,
    config: &CorpusFilterConfig,
) -> (Vec<Subsection>, usize) {
    let before = subsections.len();
    let kept = filter_boilerplate(subsections, config);
    let boilerplate_removed = before - kept.len();
    let sliced = kept
        .into_iter()
        .flat_map(|s| normalize_and_slice(s, config))
        .collect();
    (sliced, boilerplate_removed)
}

/// Corpus-level counts in the shape of the published statistics table.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub bills: usize,
    pub subsections_raw: usize,
    pub boilerplate_removed: usize,
    pub subsections_final: usize,
    pub total_words_final: u64,
}

impl CorpusStats {
    pub fn mean_words(&self) -> f64 {
        if self.subsections_final == 0 {
            0.0
        } else {
            self.total_words_final as f64 / self.subsections_final as f64
        }
    }

    pub fn absorb_bill(
        &mut self,
        raw_count: usize,
        boilerplate_removed: usize,
        survivors: &[Subsection],
    ) {
        self.bills += 1;
        self.subsections_raw += raw_count;
        self.boilerplate_removed += boilerplate_removed;
        self.subsections_final += survivors.len();
        self.total_words_final += survivors.iter().map(|s| s.word_count() as u64).sum::<u64>();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramCount {
    pub ngram: String,
    pub n: usize,
    pub count: u64,
}

/// Most frequent word n-grams per n in `[n_min, n_max]`, counted over
/// lowercased tokens within subsection boundaries. Ties break lexicographically.
pub fn top_common_ngrams(
    corpus: &[Subsection],
    n_min: usize,
    n_max: usize,
    k: usize,
) -> Result<Vec<NgramCount>> {
    if n_min < 1 || n_min > n_max {
        return Err(Error::validation(format!(
            "invalid n-gram range [{n_min}, {n_max}]"
        )));
    }
    if k < 1 {
        return Err(Error::validation("k must be at least 1"));
    }

    // Intern lowercased tokens once; n-gram keys are id slices.
    let mut vocab: HashMap<String, u32> = HashMap::new();
    let mut words: Vec<String> = Vec::new();
    let docs: Vec<Vec<u32>> = corpus
        .iter()
        .map(|s| {
            s.tokens
                .iter()
                .map(|t| {
                    let lower = t.to_lowercase();
                    *vocab.entry(lower.clone()).or_insert_with(|| {
                        words.push(lower);
                        (words.len() - 1) as u32
                    })
                })
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    for n in n_min..=n_max {
        let mut counts: HashMap<&[u32], u64> = HashMap::new();
        for doc in &docs {
            if doc.len() < n {
                continue;
            }
            for window in doc.windows(n) {
                *counts.entry(window).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(String, u64)> = counts
            .into_iter()
            .map(|(ids, c)| {
                let text = ids
                    .iter()
                    .map(|&i| words[i as usize].as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                (text, c)
            })
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out.extend(
            ranked
                .into_iter()
                .take(k)
                .map(|(ngram, count)| NgramCount { ngram, n, count }),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(id: &str, heading: Option<&str>, text: &str) -> Subsection {
        Subsection {
            subsection_id: id.to_string(),
            bill_id: "111-hr-1".to_string(),
            heading: heading.map(str::to_string),
            tokens: tokenize(text),
            is_quoted_block: false,
        }
    }

    #[test]
    fn empty_input_yields_no_subsections() {
        let bill = parse_bill("", "111-hr-1");
        assert!(bill.subsections.is_empty());
        assert_eq!(bill.chamber, Chamber::House);
    }

    #[test]
    fn crafted_three_block_text_splits_with_quoted_block() {
        let text = "\
(a) In general.--Alpha beta gamma delta epsilon.
(b) Effective date.--Gamma delta takes effect now.
``(c) quoted text one two three.''";
        let bill = parse_bill(text, "111-hr-1");
        assert_eq!(bill.subsections.len(), 3, "{:#?}", bill.subsections);
        assert_eq!(bill.subsections[0].heading.as_deref(), Some("In general"));
        assert_eq!(
            bill.subsections[0].tokens,
            tokenize("In general Alpha beta gamma delta epsilon")
        );
        assert_eq!(
            bill.subsections[1].heading.as_deref(),
            Some("Effective date")
        );
        assert!(!bill.subsections[1].is_quoted_block);
        assert!(bill.subsections[2].is_quoted_block);
        assert_eq!(
            bill.subsections[2].tokens,
            tokenize("c quoted text one two three")
        );
    }

    #[test]
    fn quoted_block_inside_subsection_preserves_order() {
        let text = "\
(a) In general.--Before the quote runs here.
``(1) inside the quote first line
continues on a second line.''
After the quote resumes the host unit.";
        let bill = parse_bill(text, "111-hr-1");
        assert_eq!(bill.subsections.len(), 3);
        assert!(!bill.subsections[0].is_quoted_block);
        assert!(bill.subsections[1].is_quoted_block);
        assert!(!bill.subsections[2].is_quoted_block);
        // Partition property: concatenation reconstructs the token stream.
        let rebuilt: Vec<String> = bill
            .subsections
            .iter()
            .flat_map(|s| s.tokens.clone())
            .collect();
        let expected = tokenize(
            "In general Before the quote runs here 1 inside the quote first line \
             continues on a second line After the quote resumes the host unit",
        );
        assert_eq!(rebuilt, expected);
    }

    #[test]
    fn sections_without_enumerators_take_section_heading() {
        let text = "\
SEC. 1. SHORT TITLE.
This Act may be cited as the Example Act of 2010.
SEC. 2. FINDINGS.
    (a) In general.--Congress finds the following things to be true.
    (b) Purpose.--The purpose of this Act is described here.";
        let bill = parse_bill(text, "111-s-42");
        assert_eq!(bill.chamber, Chamber::Senate);
        assert_eq!(bill.subsections.len(), 3);
        assert_eq!(bill.subsections[0].heading.as_deref(), Some("SHORT TITLE."));
        assert_eq!(bill.subsections[0].subsection_id, "111-s-42:s1");
        assert_eq!(bill.subsections[1].subsection_id, "111-s-42:s2:a");
        assert_eq!(bill.subsections[2].subsection_id, "111-s-42:s2:b");
    }

    #[test]
    fn shallowest_indentation_decides_subsection_level() {
        let text = "\
SEC. 3. RULES.
    (a) First rule.--Top level text here.
        (1) Nested paragraph stays with its subsection.
        (2) Another nested paragraph.
    (b) Second rule.--More top level text.";
        let bill = parse_bill(text, "111-hr-7");
        let ids: Vec<&str> = bill
            .subsections
            .iter()
            .map(|s| s.subsection_id.as_str())
            .collect();
        assert_eq!(ids, vec!["111-hr-7:s3:a", "111-hr-7:s3:b"]);
        assert!(bill.subsections[0].tokens.contains(&"Nested".to_string()));
    }

    #[test]
    fn table_blocks_are_dropped() {
        let text = "\
SEC. 4. SCHEDULE.
The schedule below controls the phase-in of this provision.

Item one....................................2010
Item two....................................2011
Item three..................................2012

The text after the table continues the subsection.";
        let bill = parse_bill(text, "111-hr-9");
        assert_eq!(bill.subsections.len(), 1);
        let joined = bill.subsections[0].text();
        assert!(!joined.contains("2011"));
        assert!(joined.contains("after the table"));
    }

    #[test]
    fn tokens_are_alphanumeric_runs() {
        let toks = tokenize("$6,000,000 for fiscal year 2010 (15 U.S.C. 638(e))");
        assert_eq!(
            toks,
            vec![
                "6", "000", "000", "for", "fiscal", "year", "2010", "15", "U", "S", "C", "638", "e"
            ]
        );
    }

    #[test]
    fn boilerplate_filter_removes_listed_headings() {
        let cfg = CorpusFilterConfig::default();
        let subs = vec![
            sub(
                "a",
                Some("Short Title"),
                "This Act may be cited as the Example Act",
            ),
            sub("b", Some("Substantive Provision"), "Real policy content"),
            sub(
                "c",
                Some("effective date."),
                "The amendments apply after enactment",
            ),
            sub("d", None, "No heading at all"),
        ];
        let kept = filter_boilerplate(subs, &cfg);
        let ids: Vec<&str> = kept.iter().map(|s| s.subsection_id.as_str()).collect();
        assert_eq!(ids, vec!["b", "d"]);
    }

    #[test]
    fn boilerplate_filter_empty_config_is_noop() {
        let cfg = CorpusFilterConfig {
            boilerplate_headings: Vec::new(),
            ..CorpusFilterConfig::default()
        };
        let subs = vec![sub("a", Some("Short Title"), "words")];
        let kept = filter_boilerplate(subs.clone(), &cfg);
        assert_eq!(kept, subs);
    }

    #[test]
    fn boilerplate_filter_is_idempotent() {
        let cfg = CorpusFilterConfig::default();
        let subs = vec![
            sub("a", Some("Definitions"), "terms defined"),
            sub("b", Some("Policy"), "content"),
        ];
        let once = filter_boilerplate(subs, &cfg);
        let twice = filter_boilerplate(once.clone(), &cfg);
        assert_eq!(once, twice);
    }

    fn n_word_subsection(n: usize) -> Subsection {
        let text: Vec<String> = (0..n).map(|i| format!("word{i}")).collect();
        sub("x", None, &text.join(" "))
    }

    #[test]
    fn thirty_word_subsection_is_excluded() {
        let cfg = CorpusFilterConfig::default();
        assert!(normalize_and_slice(n_word_subsection(30), &cfg).is_empty());
    }

    #[test]
    fn thirty_one_word_subsection_passes_unchanged() {
        let cfg = CorpusFilterConfig::default();
        let s = n_word_subsection(31);
        let out = normalize_and_slice(s.clone(), &cfg);
        assert_eq!(out, vec![s]);
    }

    #[test]
    fn nine_hundred_words_slice_into_400_400_100() {
        // Oracle: greedy left-to-right chunks of exactly 400 words, remainder last.
        let cfg = CorpusFilterConfig::default();
        let s = n_word_subsection(900);
        let out = normalize_and_slice(s.clone(), &cfg);
        assert_eq!(
            out.iter().map(Subsection::word_count).collect::<Vec<_>>(),
            vec![400, 400, 100]
        );
        assert_eq!(out[0].subsection_id, "x:p0");
        assert_eq!(out[2].subsection_id, "x:p2");
        let rebuilt: Vec<String> = out.iter().flat_map(|s| s.tokens.clone()).collect();
        assert_eq!(rebuilt, s.tokens);
    }

    #[test]
    fn short_trailing_remainder_is_dropped_by_length_rule() {
        let cfg = CorpusFilterConfig::default();
        let out = normalize_and_slice(n_word_subsection(430), &cfg);
        assert_eq!(
            out.iter().map(Subsection::word_count).collect::<Vec<_>>(),
            vec![400]
        );
    }

    #[test]
    fn normalize_and_slice_is_idempotent() {
        let cfg = CorpusFilterConfig::default();
        for n in [31, 400, 401, 900, 1201] {
            let once: Vec<Subsection> = normalize_and_slice(n_word_subsection(n), &cfg);
            let twice: Vec<Subsection> = once
                .clone()
                .into_iter()
                .flat_map(|s| normalize_and_slice(s, &cfg))
                .collect();
            assert_eq!(once, twice, "n = {n}");
        }
    }

    #[test]
    fn survivors_satisfy_length_bounds() {
        let cfg = CorpusFilterConfig::default();
        for n in 0..1000 {
            for s in normalize_and_slice(n_word_subsection(n), &cfg) {
                assert!(s.word_count() > cfg.min_words_exclusive);
                assert!(s.word_count() <= cfg.slice_max_words);
            }
        }
    }

    /// Brute-force n-gram counting oracle, independent of the interned path.
    fn ngram_oracle(corpus: &[Subsection], n: usize, k: usize) -> Vec<(String, u64)> {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for s in corpus {
            let lower: Vec<String> = s.tokens.iter().map(|t| t.to_lowercase()).collect();
            if lower.len() < n {
                continue;
            }
            for i in 0..=(lower.len() - n) {
                *counts.entry(lower[i..i + n].join(" ")).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }

    #[test]
    fn ngram_too_short_corpus_yields_empty() {
        let corpus = vec![sub("a", None, "two words")];
        let out = top_common_ngrams(&corpus, 3, 3, 5).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn ngram_toy_corpus_matches_oracle() {
        let corpus = vec![sub("a", None, "a b c a b c"), sub("b", None, "a b d")];
        let out = top_common_ngrams(&corpus, 3, 3, 2).unwrap();
        let expected = ngram_oracle(&corpus, 3, 2);
        let got: Vec<(String, u64)> = out.into_iter().map(|e| (e.ngram, e.count)).collect();
        assert_eq!(got, expected);
        // Frozen oracle output: "a b c" twice, then the count-1 tie breaks
        // lexicographically to "a b d".
        assert_eq!(
            got,
            vec![("a b c".to_string(), 2), ("a b d".to_string(), 1)]
        );
    }

    #[test]
    fn ngram_counts_match_oracle_exactly_on_small_corpora() {
        let texts = [
            "at the end of the act at the end",
            "the end of the Act is Amended at the end",
            "strike the period at the end and insert",
            "one two three four five six seven",
        ];
        let corpus: Vec<Subsection> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| sub(&format!("d{i}"), None, t))
            .collect();
        for n in 1..=4 {
            let got: Vec<(String, u64)> = top_common_ngrams(&corpus, n, n, 50)
                .unwrap()
                .into_iter()
                .map(|e| (e.ngram, e.count))
                .collect();
            assert_eq!(got, ngram_oracle(&corpus, n, 50), "n = {n}");
        }
    }

    #[test]
    fn ngram_rejects_bad_range() {
        assert!(top_common_ngrams(&[], 3, 2, 5).is_err());
        assert!(top_common_ngrams(&[], 0, 2, 5).is_err());
        assert!(top_common_ngrams(&[], 1, 2, 0).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn every_output_token_is_an_alphanumeric_run(text in "\\PC{0,400}") {
                let bill = parse_bill(&text, "111-hr-999");
                for sub in &bill.subsections {
                    for token in &sub.tokens {
                        prop_assert!(!token.is_empty());
                        prop_assert!(token.chars().all(char::is_alphanumeric), "{token:?}");
                    }
                    prop_assert_eq!(sub.word_count(), sub.tokens.len());
                }
            }

            #[test]
            fn filters_are_idempotent_on_arbitrary_text(text in "\\PC{0,400}") {
                let cfg = CorpusFilterConfig::default();
                let bill = parse_bill(&text, "111-s-999");
                let (once, _) = preprocess_subsections(bill.subsections.clone(), &cfg);
                let (twice, removed_again) = preprocess_subsections(once.clone(), &cfg);
                prop_assert_eq!(once, twice);
                prop_assert_eq!(removed_again, 0);
            }
        }
    }

    #[test]
    fn preprocess_counts_match_parts() {
        let cfg = CorpusFilterConfig::default();
        let long: String = (0..450).map(|i| format!("w{i} ")).collect();
        let subs = vec![
            sub("a", Some("Short Title"), "cite as act"),
            sub("b", None, &long),
            sub("c", None, "too short"),
        ];
        let (kept, removed) = preprocess_subsections(subs, &cfg);
        assert_eq!(removed, 1);
        // b slices into a 400-word piece plus a 50-word remainder.
        assert_eq!(kept.len(), 2);
        assert!(kept
            .iter()
            .all(|s| s.word_count() > cfg.min_words_exclusive));
    }
}
