//! End-to-end command-line tests over a crafted miniature corpus.

mod common;

use std::path::{Path, PathBuf};

use billsim::cli::dispatch;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["billsim".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    dispatch(argv)
}

struct Pipeline {
    #[allow(dead_code)]
    tmp: tempfile::TempDir,
    corpus_dir: PathBuf,
    out_dir: PathBuf,
}

impl Pipeline {
    fn new() -> Pipeline {
        let tmp = tempfile::tempdir().unwrap();
        let corpus_dir = tmp.path().join("bills");
        let out_dir = tmp.path().join("out");
        common::write_mini_corpus(&corpus_dir);
        std::fs::create_dir_all(&out_dir).unwrap();
        Pipeline {
            tmp,
            corpus_dir,
            out_dir,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn arg(&self, path: &Path) -> String {
        path.to_str().unwrap().to_string()
    }

    fn ingest(&self) {
        let code = run(&[
            "ingest",
            "--corpus",
            &self.arg(&self.corpus_dir),
            "--out",
            &self.arg(&self.out_dir),
        ]);
        assert_eq!(code, 0, "ingest failed");
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["--version"]), 0);
}

#[test]
fn unknown_subcommand_exits_one() {
    assert_eq!(run(&["frobnicate"]), 1);
}

#[test]
fn missing_required_flag_exits_one() {
    assert_eq!(run(&["ingest", "--corpus", "/nonexistent"]), 1);
}

#[test]
fn missing_corpus_dir_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(
        run(&[
            "ingest",
            "--corpus",
            "/definitely/not/here",
            "--out",
            out.to_str().unwrap()
        ]),
        2
    );
}

#[test]
fn ingest_writes_stats_and_records() {
    let p = Pipeline::new();
    p.ingest();

    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.path("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["bills"], 4);
    assert_eq!(stats["boilerplate_removed"], 1);
    assert!(stats["subsections_final"].as_u64().unwrap() >= 10);
    assert!(stats["mean_words_final"].as_f64().unwrap() > 30.0);

    let jsonl = std::fs::read_to_string(p.path("subsections.jsonl")).unwrap();
    let first = jsonl.lines().next().unwrap();
    assert!(first.contains("billsim_meta"));
    assert!(first.contains("config_hash"));

    let (meta, subs) = billsim::io::read_subsections(&p.path("subsections.jsonl")).unwrap();
    assert!(meta.is_some());
    let ids: Vec<&str> = subs.iter().map(|s| s.subsection_id.as_str()).collect();
    assert!(ids.contains(&"111-hr-1:s2:a"));
    assert!(ids.contains(&"111-s-2:s1:b"));
    assert!(subs.iter().any(|s| s.is_quoted_block));
    assert!(subs
        .iter()
        .all(|s| s.word_count() > 30 && s.word_count() <= 400));

    let table = std::fs::read_to_string(p.path("stats.txt")).unwrap();
    assert!(table.contains("Bills"));
    assert!(table.contains("Average # words in subsection"));
}

#[test]
fn full_pipeline_runs_and_artifacts_parse() {
    let p = Pipeline::new();
    p.ingest();
    let corpus = p.path("subsections.jsonl");

    // ngrams
    let ngrams = p.path("ngrams.tsv");
    assert_eq!(
        run(&[
            "ngrams",
            "--corpus",
            &p.arg(&corpus),
            "--out",
            &p.arg(&ngrams),
            "--n-min",
            "3",
            "--n-max",
            "4",
            "--top",
            "10"
        ]),
        0
    );
    let tsv = std::fs::read_to_string(&ngrams).unwrap();
    assert!(tsv.lines().count() > 10);

    // sample
    let candidates = p.path("candidates.csv");
    assert_eq!(
        run(&[
            "sample",
            "--corpus",
            &p.arg(&corpus),
            "--out",
            &p.arg(&candidates),
            "--low",
            "0.3",
            "--size",
            "50"
        ]),
        0
    );
    let (_, cand): (_, Vec<billsim::io::CandidateRecord>) =
        billsim::io::read_csv_records(&candidates).unwrap();
    assert!(!cand.is_empty());
    assert!(cand
        .iter()
        .all(|c| c.cosine >= 0.3 && c.cosine <= 1.0 && c.id_a < c.id_b));

    // synth
    let synthetic = p.path("synthetic.jsonl");
    assert_eq!(
        run(&[
            "synth",
            "--corpus",
            &p.arg(&corpus),
            "--out",
            &p.arg(&synthetic),
            "--per-class",
            "12"
        ]),
        0
    );
    let (_, synth_records) = billsim::io::read_synth_pairs(&synthetic).unwrap();
    assert_eq!(synth_records.len(), 60);
    for class in 0u8..5 {
        assert_eq!(
            synth_records.iter().filter(|r| r.label == class).count(),
            12
        );
    }

    // gold labels (external file, no meta line)
    let gold = p.path("gold.csv");
    common::write_mini_gold(&gold);

    // train (two-stage, no split so every gold pair trains)
    let model = p.path("model.json");
    assert_eq!(
        run(&[
            "train",
            "--pairs",
            &p.arg(&gold),
            "--corpus",
            &p.arg(&corpus),
            "--synthetic",
            &p.arg(&synthetic),
            "--model-out",
            &p.arg(&model),
            "--no-split"
        ]),
        0
    );
    let loaded =
        billsim::classify::PairClassifier::from_json(&std::fs::read_to_string(&model).unwrap())
            .unwrap();
    assert_eq!(loaded.train_meta.stages.len(), 2);
    assert_eq!(loaded.train_meta.stages[0].name, "synthetic");

    // classify the gold pairs (extra CSV columns are ignored)
    let predictions = p.path("predictions.csv");
    let features = p.path("features.csv");
    assert_eq!(
        run(&[
            "classify",
            "--pairs",
            &p.arg(&gold),
            "--corpus",
            &p.arg(&corpus),
            "--model",
            &p.arg(&model),
            "--out",
            &p.arg(&predictions),
            "--features-out",
            &p.arg(&features)
        ]),
        0
    );
    let (_, preds) = billsim::io::read_predictions(&predictions).unwrap();
    assert_eq!(preds.len(), common::mini_gold_rows().len());
    for pr in &preds {
        let probs = [
            pr.p0.unwrap(),
            pr.p1.unwrap(),
            pr.p2.unwrap(),
            pr.p3.unwrap(),
            pr.p4.unwrap(),
        ];
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    let (_, feats): (_, Vec<billsim::io::FeatureRecord>) =
        billsim::io::read_csv_records(&features).unwrap();
    let identical = feats
        .iter()
        .find(|f| f.id_a == "111-hr-1:s2:a" && f.id_b == "111-s-2:s1:a")
        .expect("identical pair present");
    assert!(
        (identical.f1 - 1.0).abs() < 1e-12,
        "identical pair f1 = {}",
        identical.f1
    );

    // eval against gold
    let eval_json = p.path("eval.json");
    let rows_csv = p.path("eval_rows.csv");
    assert_eq!(
        run(&[
            "eval",
            "--gold",
            &p.arg(&gold),
            "--predictions",
            &p.arg(&predictions),
            "--out",
            &p.arg(&eval_json),
            "--rows-out",
            &p.arg(&rows_csv)
        ]),
        0
    );
    let report: billsim::metrics::EvalReport =
        serde_json::from_str(&std::fs::read_to_string(&eval_json).unwrap()).unwrap();
    assert_eq!(report.per_class_f1.len(), 5);
    assert!(report.accuracy > 0.0);
    let (_, rows): (_, Vec<billsim::report::EvalCsvRow>) =
        billsim::io::read_csv_records(&rows_csv).unwrap();
    let (per_class, accuracy, macro_f1, pearson) = billsim::report::rows_to_summary(&rows).unwrap();
    assert_eq!(per_class, report.per_class_f1);
    assert_eq!(accuracy, report.accuracy);
    assert_eq!(macro_f1, report.macro_f1);
    assert_eq!(pearson, report.pearson);

    // sections: reuse the subsection units as section units
    let section_pairs = p.path("section_pairs.csv");
    let mut text = String::from("id_a,id_b,category\n");
    for (a, b, label) in common::mini_gold_rows() {
        let category = match label {
            4 | 3 => 3,
            2 => 2,
            1 => 1,
            _ => 0,
        };
        text.push_str(&format!("{a},{b},{category}\n"));
    }
    std::fs::write(&section_pairs, text).unwrap();
    let sections_report = p.path("sections.json");
    assert_eq!(
        run(&[
            "sections",
            "--sections",
            &p.arg(&corpus),
            "--pairs",
            &p.arg(&section_pairs),
            "--model",
            &p.arg(&model),
            "--out",
            &p.arg(&sections_report)
        ]),
        0
    );
    let sec: billsim::metrics::EvalReport =
        serde_json::from_str(&std::fs::read_to_string(&sections_report).unwrap()).unwrap();
    assert_eq!(sec.per_class_f1.len(), 4);

    // billsim over explicit pairs
    let bill_pairs = p.path("bill_pairs.csv");
    std::fs::write(
        &bill_pairs,
        "bill_i,bill_j\n111-hr-1,111-s-2\n111-hr-1,111-hr-3\n",
    )
    .unwrap();
    let billsim_out = p.path("billsim.csv");
    assert_eq!(
        run(&[
            "billsim",
            "--corpus",
            &p.arg(&corpus),
            "--model",
            &p.arg(&model),
            "--pairs",
            &p.arg(&bill_pairs),
            "--out",
            &p.arg(&billsim_out)
        ]),
        0
    );
    let (_, sims): (_, Vec<billsim::io::BillSimRecord>) =
        billsim::io::read_csv_records(&billsim_out).unwrap();
    assert_eq!(sims.len(), 2);
    for s in &sims {
        assert!((0.0..=1.0).contains(&s.score));
        assert!(s.score >= s.sigma_star_ij.max(s.sigma_star_ji) - 1e-12);
    }
    let related = sims.iter().find(|s| s.bill_j == "111-s-2").unwrap();
    let unrelated = sims.iter().find(|s| s.bill_j == "111-hr-3").unwrap();
    assert!(
        related.score >= unrelated.score,
        "shared-text pair should score at least as high: {} vs {}",
        related.score,
        unrelated.score
    );

    // billsim over co-occurrence bins
    let cooc = p.path("cooc.csv");
    std::fs::write(
        &cooc,
        "bill_i,bill_j,count\n111-hr-1,111-s-2,350\n111-hr-1,111-hr-3,7\n111-s-2,111-s-4,2\n",
    )
    .unwrap();
    let binned_out = p.path("billsim_binned.csv");
    let summary_out = p.path("bin_summary.csv");
    assert_eq!(
        run(&[
            "billsim",
            "--corpus",
            &p.arg(&corpus),
            "--model",
            &p.arg(&model),
            "--cooccurrence",
            &p.arg(&cooc),
            "--out",
            &p.arg(&binned_out),
            "--summary-out",
            &p.arg(&summary_out),
            "--min-subsections",
            "1",
            "--per-bin-cap",
            "5"
        ]),
        0
    );
    let (_, binned): (_, Vec<billsim::io::BillSimRecord>) =
        billsim::io::read_csv_records(&binned_out).unwrap();
    assert!(binned.iter().any(|r| r.bin == "300-3000"));
    assert!(
        binned.iter().any(|r| r.bin == "0"),
        "zero bin should be sampled"
    );
    let (_, summary): (_, Vec<billsim::report::BinSummary>) =
        billsim::io::read_csv_records(&summary_out).unwrap();
    assert_eq!(summary.len(), 7);
}

#[test]
fn classify_without_model_or_features_is_rejected() {
    let p = Pipeline::new();
    p.ingest();
    let gold = p.path("gold.csv");
    common::write_mini_gold(&gold);
    let corpus = p.path("subsections.jsonl");
    let out = p.path("pred.csv");
    // --out without --model
    assert_eq!(
        run(&[
            "classify",
            "--pairs",
            &p.arg(&gold),
            "--corpus",
            &p.arg(&corpus),
            "--out",
            &p.arg(&out)
        ]),
        2
    );
    // neither --out nor --features-out
    assert_eq!(
        run(&[
            "classify",
            "--pairs",
            &p.arg(&gold),
            "--corpus",
            &p.arg(&corpus)
        ]),
        2
    );
}

#[test]
fn mixing_config_hashes_is_rejected() {
    let p = Pipeline::new();
    p.ingest(); // seed 0 artifacts
    let corpus = p.path("subsections.jsonl");
    let synthetic = p.path("synthetic_other_seed.jsonl");
    assert_eq!(
        run(&[
            "--seed",
            "1",
            "synth",
            "--corpus",
            &p.arg(&corpus),
            "--out",
            &p.arg(&synthetic),
            "--per-class",
            "6"
        ]),
        0
    );
    let gold = p.path("gold.csv");
    common::write_mini_gold(&gold);
    let model = p.path("model.json");
    let code = run(&[
        "train",
        "--pairs",
        &p.arg(&gold),
        "--corpus",
        &p.arg(&corpus),
        "--synthetic",
        &p.arg(&synthetic),
        "--model-out",
        &p.arg(&model),
        "--no-split",
    ]);
    assert_eq!(code, 2, "different config hashes must be rejected");
}

#[test]
fn external_embeddings_drive_sampling() {
    let p = Pipeline::new();
    p.ingest();
    let corpus = p.path("subsections.jsonl");
    let (_, subs) = billsim::io::read_subsections(&corpus).unwrap();
    // Hand embeddings: two orthogonal groups.
    let emb = p.path("embeddings.tsv");
    let mut text = String::new();
    for (i, s) in subs.iter().enumerate() {
        let v = if i % 2 == 0 { "1.0,0.0" } else { "0.0,1.0" };
        text.push_str(&format!("{}\t{v}\n", s.subsection_id));
    }
    std::fs::write(&emb, text).unwrap();
    let out = p.path("ext_candidates.csv");
    assert_eq!(
        run(&[
            "sample",
            "--corpus",
            &p.arg(&corpus),
            "--embeddings",
            &p.arg(&emb),
            "--out",
            &p.arg(&out),
            "--low",
            "0.99",
            "--size",
            "1000",
            "--include-intra-bill"
        ]),
        0
    );
    let (_, cands): (_, Vec<billsim::io::CandidateRecord>) =
        billsim::io::read_csv_records(&out).unwrap();
    // Same-group pairs have cosine exactly 1.0; cross-group pairs 0.0.
    assert!(!cands.is_empty());
    assert!(cands.iter().all(|c| (c.cosine - 1.0).abs() < 1e-9));
}
