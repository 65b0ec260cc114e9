//! Worked examples through the public API. Expected values are either
//! literal published figures or recomputed here from first principles.

use tcm_stance::corpus::{split_retweets, timestamp, RawTweet, Tweet, UserProfile};
use tcm_stance::evaluation::{adjust, f1, gamma_of, PredictionRecord};
use tcm_stance::features::{chi_square, collect_stats, select_features, SparseVector, TermStats};
use tcm_stance::pipeline::build_dataset;
use tcm_stance::preprocess::{is_advertisement, preprocess_tweet, remove_stopwords, Document};
use tcm_stance::report::keyword_report;
use tcm_stance::resources::{Resources, TagLexicon, TermList};
use tcm_stance::supervision::{is_tcm_topic, label_corpus, user_stance};
use tcm_stance::svm::{Model, Problem, TrainMeta};
use tcm_stance::synth::{generate, SynthConfig, OPPOSE_KEYWORDS, SUPPORT_KEYWORDS};
use tcm_stance::Stance;

fn toks(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn doc(tokens: &[&str], label: Option<Stance>) -> Document {
    Document {
        tweet_id: "1#0".into(),
        user_id: "u1".into(),
        created_at: timestamp::parse("2013-11-02T08:00:00").unwrap(),
        tokens: toks(tokens),
        label,
    }
}

#[test]
fn a_retweet_yields_two_posts() {
    let at = timestamp::parse("2013-11-02T08:00:00").unwrap();
    let raw = RawTweet {
        id: "10".into(),
        user_id: "a".into(),
        text: "转发 中医".into(),
        created_at: at,
        retweet: Some(Box::new(RawTweet {
            id: "9".into(),
            user_id: "b".into(),
            text: "针灸 养生".into(),
            created_at: at,
            retweet: None,
        })),
    };
    let split = split_retweets(&[raw]);
    assert_eq!(split.tweets.len(), 2);
    assert_eq!(split.tweets[1].user_id, "b");
    assert_eq!(split.tweets[1].text, "针灸 养生");
}

#[test]
fn tag_lexicon_lines() {
    let lex = TagLexicon::parse("tags", "中医爱好\tsupport\n反中医\toppose\n").unwrap();
    assert_eq!(lex.stance_of("中医爱好"), Some(Stance::Supporting));
    assert_eq!(lex.stance_of("反中医"), Some(Stance::Opposing));
    let builtin = &Resources::builtin().tag_lexicon;
    assert_eq!(
        user_stance(&["中医爱好"], builtin),
        Some(Stance::Supporting)
    );
    assert_eq!(user_stance(&["反中医"], builtin), Some(Stance::Opposing));
}

#[test]
fn stopword_and_ad_filters() {
    let stop: TermList = ["哦"].into_iter().collect();
    assert_eq!(
        remove_stopwords(toks(&["哦", "中医"]), &stop),
        toks(&["中医"])
    );
    let ads: TermList = ["促销"].into_iter().collect();
    assert!(is_advertisement(&["大", "促销"], &ads));
}

#[test]
fn preprocessing_composes_the_steps() {
    let tweet = Tweet {
        id: "1#0".into(),
        user_id: "a".into(),
        text: "@a 中医爱好 http://x.co".into(),
        created_at: timestamp::parse("2013-11-02T08:00:00").unwrap(),
    };
    let d = preprocess_tweet(&tweet, &Resources::builtin()).unwrap();
    assert_eq!(d.tokens, toks(&["中医", "爱好"]));
}

#[test]
fn topic_filter_and_user_labels() {
    let res = Resources::builtin();
    assert!(is_tcm_topic(
        &doc(&["中药", "针灸"], None),
        &res.terminology
    ));
    let users = vec![UserProfile {
        user_id: "u1".into(),
        tags: toks(&["中医爱好"]),
    }];
    let (ds, rest) = label_corpus(vec![doc(&["中药", "针灸"], None)], &users, &res.tag_lexicon);
    assert!(rest.is_empty());
    assert_eq!(ds.label(0), Stance::Supporting);
}

/// χ² from the joint and marginal probabilities, written out longhand.
fn chi_square_by_hand(n: f64, df_pos: f64, df_neg: f64, n_pos: f64) -> f64 {
    let (a, b) = (df_pos / n, df_neg / n);
    let (c, d) = ((n_pos - df_pos) / n, (n - n_pos - df_neg) / n);
    n * (a * d - c * b).powi(2) / ((a + c) * (b + d) * (a + b) * (c + d))
}

#[test]
fn chi_square_hand_evaluation() {
    let s = TermStats {
        term: "t".into(),
        n_total: 4,
        df_pos: 2,
        df_neg: 0,
        n_pos: 2,
        n_neg: 2,
    };
    let expected = chi_square_by_hand(4.0, 2.0, 0.0, 2.0);
    assert!((expected - 4.0).abs() < 1e-12);
    assert!((chi_square(&s).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn positively_correlated_term_points_to_supporting() {
    let docs = vec![
        doc(&["养生", "a"], Some(Stance::Supporting)),
        doc(&["养生", "b"], Some(Stance::Supporting)),
        doc(&["a"], Some(Stance::Opposing)),
        doc(&["b"], Some(Stance::Opposing)),
    ];
    let stats = collect_stats(&docs).unwrap();
    let s = stats.iter().find(|s| s.term == "养生").unwrap();
    assert_eq!(s.direction(), Stance::Supporting);
    let fs = select_features(&stats, 10).unwrap();
    assert_eq!(fs.entries()[0].term, "养生");
}

fn one_d(scale: f64) -> Problem {
    Problem::new(
        vec![vec![(0, scale)], vec![(0, -scale)]],
        vec![1.0, -1.0],
        vec![1.0, 1.0],
        1,
    )
    .unwrap()
}

#[test]
fn one_d_analytic_solutions() {
    let s = one_d(1.0).solve(1e-10, 100_000, 42).unwrap();
    assert!((s.weights[0] - 1.0).abs() < 1e-3);
    // KKT: any α₁ + α₂ = 1 inside the box
    assert!((s.alphas[0] + s.alphas[1] - 1.0).abs() < 1e-3);

    let scaled = one_d(2.0).solve(1e-10, 100_000, 42).unwrap();
    assert!((scaled.weights[0] - 0.5).abs() < 1e-3);
    assert!(scaled.weights[0] > 0.0);
}

#[test]
fn one_d_model_prediction() {
    let meta = TrainMeta {
        c: 1.0,
        wi: 1.0,
        seed: 42,
        epochs: None,
        max_violation: None,
    };
    let model = Model::from_weights(vec![1.0, 0.0], "d".into(), meta).unwrap();
    let p = model.predict(&SparseVector::from_indices(vec![0])).unwrap();
    assert_eq!(p.stance, Stance::Supporting);
    assert!((p.margin - 1.0).abs() < 1e-12);
}

#[test]
fn dual_objective_at_half() {
    let p = one_d(1.0);
    // ½·s·(α₁+α₂)² − (α₁+α₂) with s = 1
    let by_hand = |a1: f64, a2: f64| 0.5 * (a1 + a2).powi(2) - (a1 + a2);
    assert!((p.dual_objective(&[0.5, 0.5]).unwrap() - by_hand(0.5, 0.5)).abs() < 1e-12);
    assert!((p.dual_objective(&[0.5, 0.5]).unwrap() + 0.5).abs() < 1e-12);
}

#[test]
fn f1_at_sweep_endpoint() {
    let harmonic = 2.0 * 0.96 * 0.98 / (0.96 + 0.98);
    assert!((f1(0.96, 0.98) - harmonic).abs() < 1e-12);
    assert!((f1(0.96, 0.98) - 0.96990).abs() < 1e-5);
}

fn record(i: usize, stance: Stance) -> PredictionRecord {
    PredictionRecord {
        tweet_id: format!("t{i}"),
        user_id: "u".into(),
        created_at: timestamp::parse("2013-11-02T08:00:00").unwrap(),
        gold: None,
        stance,
        margin: 0.0,
    }
}

#[test]
fn consistency_ratio_and_adjustment() {
    assert_eq!(gamma_of(0, 7).unwrap(), 1.0);
    let (s, o) = (Stance::Supporting, Stance::Opposing);
    let three_one: Vec<_> = [s, s, o, s]
        .iter()
        .enumerate()
        .map(|(i, &x)| record(i, x))
        .collect();
    assert!(adjust(&three_one, 0.5)
        .unwrap()
        .iter()
        .all(|r| r.stance == s));
    let tied: Vec<_> = [s, o, s, o]
        .iter()
        .enumerate()
        .map(|(i, &x)| record(i, x))
        .collect();
    for g in [0.5, 0.75, 1.0] {
        assert_eq!(adjust(&tied, g).unwrap(), tied);
    }
}

#[test]
fn planted_keywords_lead_the_keyword_report() {
    let corpus = generate(&SynthConfig::default()).unwrap();
    let ds = build_dataset(&corpus.tweets, &corpus.users, &Resources::builtin());
    let fs = select_features(&collect_stats(&ds.documents).unwrap(), 3000).unwrap();
    let report = keyword_report(&fs, 10);
    assert_eq!(report.support.len(), 10);
    assert_eq!(report.oppose.len(), 10);
    for (term, _) in &report.support {
        assert!(
            SUPPORT_KEYWORDS.contains(&term.as_str()),
            "unexpected supporting keyword {term}"
        );
    }
    for (term, _) in &report.oppose {
        assert!(
            OPPOSE_KEYWORDS.contains(&term.as_str()),
            "unexpected opposing keyword {term}"
        );
    }
}
