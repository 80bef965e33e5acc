//! Rendering of evaluation reports and per-bin summaries as aligned text
//! tables and as CSV rows that round-trip losslessly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EvalReport;

/// One metric row of a rendered evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCsvRow {
    pub metric: String,
    pub value: f64,
}

/// Flattens an evaluation report into (metric, value) rows: one per class F1
/// (highest class first, matching the published table order), then average
/// accuracy, macro F1, and the Pearson correlation.
pub fn eval_to_rows(report: &EvalReport, class_names: &[&str]) -> Result<Vec<EvalCsvRow>> {
    if class_names.len() != report.per_class_f1.len() {
        return Err(Error::validation(format!(
            "report: {} class names for {} classes",
            class_names.len(),
            report.per_class_f1.len()
        )));
    }
    let mut rows = Vec::with_capacity(class_names.len() + 3);
    for idx in (0..class_names.len()).rev() {
        rows.push(EvalCsvRow {
            metric: format!("f1_{idx}_{}", slug(class_names[idx])),
            value: report.per_class_f1[idx],
        });
    }
    rows.push(EvalCsvRow {
        metric: "accuracy".into(),
        value: report.accuracy,
    });
    rows.push(EvalCsvRow {
        metric: "macro_f1".into(),
        value: report.macro_f1,
    });
    rows.push(EvalCsvRow {
        metric: "pearson".into(),
        value: report.pearson,
    });
    Ok(rows)
}

/// Rebuilds the summary metrics from rows produced by [`eval_to_rows`].
/// Used to verify that rendered reports parse back to the source values.
pub fn rows_to_summary(rows: &[EvalCsvRow]) -> Result<(Vec<f64>, f64, f64, f64)> {
    let mut f1: Vec<(usize, f64)> = Vec::new();
    let mut accuracy = None;
    let mut macro_f1 = None;
    let mut pearson = None;
    for row in rows {
        if let Some(rest) = row.metric.strip_prefix("f1_") {
            let idx: usize = rest
                .split('_')
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::validation(format!("bad f1 row {:?}", row.metric)))?;
            f1.push((idx, row.value));
        } else {
            match row.metric.as_str() {
                "accuracy" => accuracy = Some(row.value),
                "macro_f1" => macro_f1 = Some(row.value),
                "pearson" => pearson = Some(row.value),
                other => return Err(Error::validation(format!("unknown metric row {other:?}"))),
            }
        }
    }
    f1.sort_by_key(|(idx, _)| *idx);
    let per_class: Vec<f64> = f1.into_iter().map(|(_, v)| v).collect();
    let field = |o: Option<f64>, name: &str| {
        o.ok_or_else(|| Error::validation(format!("missing metric row {name}")))
    };
    Ok((
        per_class,
        field(accuracy, "accuracy")?,
        field(macro_f1, "macro_f1")?,
        field(pearson, "pearson")?,
    ))
}

fn slug(name: &str) -> String {
    name.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '-' })
        .collect::<String>()
        .split('-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

/// Aligned-text evaluation table, highest class first.
pub fn render_eval_text(report: &EvalReport, class_names: &[&str]) -> String {
    let mut out = String::new();
    let width = class_names
        .iter()
        .map(|n| n.len() + 2)
        .max()
        .unwrap_or(10)
        .max(18);
    for idx in (0..report.per_class_f1.len()).rev() {
        let label = format!("{idx} {}", class_names.get(idx).copied().unwrap_or("?"));
        out.push_str(&format!(
            "{label:<width$} {:>7.1}\n",
            report.per_class_f1[idx] * 100.0
        ));
    }
    out.push_str(&format!(
        "{:<width$} {:>7.1}\n",
        "Average Accuracy",
        report.accuracy * 100.0
    ));
    out.push_str(&format!(
        "{:<width$} {:>7.1}\n",
        "Average Macro F1",
        report.macro_f1 * 100.0
    ));
    out.push_str(&format!(
        "{:<width$} {:>7.1}\n",
        "Pearson correlation",
        report.pearson * 100.0
    ));
    out
}

/// Per-bin score summary (mean and median of the bill-level similarity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub bin: String,
    pub pairs: usize,
    pub mean: f64,
    pub median: f64,
}

pub fn summarize_bins(rows: &[(String, f64)], bin_order: &[&str]) -> Vec<BinSummary> {
    bin_order
        .iter()
        .map(|bin| {
            let mut scores: Vec<f64> = rows
                .iter()
                .filter(|(b, _)| b == bin)
                .map(|(_, score)| *score)
                .collect();
            scores.sort_by(|a, b| a.total_cmp(b));
            let pairs = scores.len();
            let mean = if pairs == 0 {
                0.0
            } else {
                scores.iter().sum::<f64>() / pairs as f64
            };
            let median = match pairs {
                0 => 0.0,
                n if n % 2 == 1 => scores[n / 2],
                n => (scores[n / 2 - 1] + scores[n / 2]) / 2.0,
            };
            BinSummary {
                bin: bin.to_string(),
                pairs,
                mean,
                median,
            }
        })
        .collect()
}

pub fn render_bin_summary_text(summaries: &[BinSummary]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:>7} {:>9} {:>9}\n",
        "Range", "Pairs", "Average", "Median"
    ));
    for s in summaries {
        out.push_str(&format!(
            "{:<10} {:>7} {:>9.1} {:>9.1}\n",
            s.bin,
            s.pairs,
            s.mean * 100.0,
            s.median * 100.0
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::label_name;
    use crate::metrics::evaluate;

    fn names() -> Vec<&'static str> {
        (0u8..5).map(label_name).collect()
    }

    #[test]
    fn rows_round_trip_matches_report() {
        let gold = vec![0u8, 1, 2, 3, 4, 0, 2, 4];
        let pred = vec![0u8, 2, 2, 3, 4, 1, 2, 0];
        let report = evaluate(&gold, &pred, 5).unwrap();
        let rows = eval_to_rows(&report, &names()).unwrap();
        let (per_class, accuracy, macro_f1, pearson) = rows_to_summary(&rows).unwrap();
        assert_eq!(per_class, report.per_class_f1);
        assert_eq!(accuracy, report.accuracy);
        assert_eq!(macro_f1, report.macro_f1);
        assert_eq!(pearson, report.pearson);
    }

    #[test]
    fn eval_text_has_expected_row_set() {
        let gold = vec![0u8, 1, 2, 3, 4];
        let report = evaluate(&gold, &gold, 5).unwrap();
        let text = render_eval_text(&report, &names());
        assert!(text.contains("4 Identical"));
        assert!(text.contains("3 Almost Identical"));
        assert!(text.contains("2 Related"));
        assert!(text.contains("1 Partially Related"));
        assert!(text.contains("0 Unrelated"));
        assert!(text.contains("Average Accuracy"));
        assert!(text.contains("Average Macro F1"));
        assert_eq!(text.lines().count(), 8);
    }

    #[test]
    fn empty_results_render_empty_table() {
        let summaries = summarize_bins(&[], &["300-3000", "0"]);
        assert_eq!(summaries.len(), 2);
        assert_eq!(summaries[0].pairs, 0);
        let text = render_bin_summary_text(&summaries);
        assert!(text.contains("Range"));
    }

    #[test]
    fn bin_summary_mean_and_median() {
        let rows = vec![
            ("5-49".to_string(), 0.2),
            ("5-49".to_string(), 0.4),
            ("5-49".to_string(), 0.9),
            ("0".to_string(), 0.1),
        ];
        let s = summarize_bins(&rows, &["5-49", "0"]);
        assert_eq!(s[0].pairs, 3);
        assert!((s[0].mean - 0.5).abs() < 1e-12);
        assert_eq!(s[0].median, 0.4);
        assert_eq!(s[1].median, 0.1);
    }
}
