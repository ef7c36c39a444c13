mod common;

use std::collections::HashMap;

use parafuse::lexical::{lexical_profile, LexicalProfiler, Meteor, SynonymLexicon};
use parafuse::report::{evaluate_with_dump, EvalConfig, EvalInputs, GroupBy, MetricSet};

#[test]
fn functions_match_recorded_values() {
    let bad = common::metric_fixture_mismatches(1e-6);
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn profile_agrees_with_functions() {
    let expected = common::fixture_json("lexical_expected.json");
    for p in common::fixture_pairs().iter() {
        let s = lexical_profile(p).unwrap();
        let e = &expected["pairs"][&p.id];
        assert!((s.sentence_bleu - e["sentence_bleu_method1"].as_f64().unwrap()).abs() < 1e-9);
        assert!((s.corpus_bleu - e["sentence_bleu_none"].as_f64().unwrap()).abs() < 1e-9);
        assert!((s.corpus_bleu2 - e["sentence_bleu_method1"].as_f64().unwrap()).abs() < 1e-9);
        assert!((s.rouge_l - e["rougeL"].as_f64().unwrap()).abs() < 1e-9);
    }
}

#[test]
fn report_pools_corpus_bleu_and_averages_the_rest() {
    let corpus = common::fixture_pairs();
    let expected = common::fixture_json("lexical_expected.json");
    let config = EvalConfig {
        metrics: MetricSet::LEXICAL,
        group_by: GroupBy::All,
        ..EvalConfig::default()
    };
    let inputs = EvalInputs {
        corpus: &corpus,
        trees: None,
        providers: &[],
    };
    let (reports, dump) = evaluate_with_dump(&inputs, &config).unwrap();
    assert_eq!(reports.len(), 1);
    let r = &reports[0];
    assert_eq!(r.count, 10);
    assert!((r.metrics["corpus_bleu"] - expected["corpus_bleu_none"].as_f64().unwrap()).abs() < 1e-6);
    assert!((r.metrics["corpus_bleu2"] - expected["corpus_bleu_method1"].as_f64().unwrap()).abs() < 1e-6);

    let mean_meteor: f64 = expected["pairs"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v["meteor"].as_f64().unwrap())
        .sum::<f64>()
        / 10.0;
    assert!((r.metrics["meteor"] - mean_meteor).abs() < 1e-6);

    let by_id: HashMap<_, _> = dump.iter().map(|d| (d.id.as_str(), d)).collect();
    assert!(!by_id["lex-01"].metrics.contains_key("corpus_bleu"));
    assert_eq!(by_id["lex-09"].metrics["wer"], 1.0);
}

#[test]
fn synonyms_raise_meteor_similarity() {
    let p = common::fixture_pairs().pairs()[0].clone();
    let plain = LexicalProfiler::default().profile(&p).unwrap().meteor;
    let lex = SynonymLexicon::parse("quickly fastest\nhow what\n");
    let with = LexicalProfiler::new(Meteor::with_synonyms(lex))
        .profile(&p)
        .unwrap()
        .meteor;
    assert!(with < plain, "{with} !< {plain}");
}
