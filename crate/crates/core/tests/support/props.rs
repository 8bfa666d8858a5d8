//! Property suites, each run for [`CASES`] generated cases with a fixed seed.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use kgdedup::compare::{levenshtein_similarity, pair_key, weighted_mean};
use kgdedup::kg::{Graph, Literal, Term, Triple};
use kgdedup::learn::{
    analyze, analyze_closed_world, better_than, default_config, IgnoreList, LabelSet, Metric, MetricPrefs,
    MetricsReport,
};
use kgdedup::{
    compare_literal, parse_ntriples, run_duplicate_detection, standardize_list, standardize_value, Aggregation,
    Comparator, DDConfig, FlatValue, Hundredths, PreFilterConfig, RunOptions, ScoredPair, Standardizer, TypeIndex,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use super::fixtures::{levenshtein_dp, synth_index};

pub const CASES: u32 = 256;

fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<u32, String> {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map(|()| CASES).map_err(|e| e.to_string())
}

fn small_index() -> &'static TypeIndex {
    static INDEX: OnceLock<TypeIndex> = OnceLock::new();
    INDEX.get_or_init(|| synth_index(40, 11).1)
}

fn flat_value() -> impl Strategy<Value = FlatValue> {
    prop_oneof![
        "[a-zA-Z0-9 ,.éüß-]{0,14}".prop_map(FlatValue::Text),
        (-1.0e6..1.0e6f64).prop_map(FlatValue::Number),
        prop_oneof![Just(0.0), Just(-3.5), Just(7.0)].prop_map(FlatValue::Number),
        any::<bool>().prop_map(FlatValue::Bool),
        "[a-z]{1,5}".prop_map(|s| FlatValue::Ref(format!("http://x/{s}"))),
    ]
}

fn comparator() -> impl Strategy<Value = Comparator> {
    prop_oneof![
        Just(Comparator::Levenshtein),
        Just(Comparator::Exact),
        Just(Comparator::JaccardTokens),
        Just(Comparator::NumberRatio),
        (0.0..10.0f64).prop_map(|tolerance| Comparator::NumberAbs { tolerance }),
        Just(Comparator::BooleanEq),
        Just(Comparator::UriEq),
    ]
}

/// Whether `c` is meant for values of `v`'s kind.
fn applicable(c: &Comparator, v: &FlatValue) -> bool {
    match c {
        Comparator::Levenshtein | Comparator::Exact | Comparator::JaccardTokens => true,
        Comparator::NumberRatio | Comparator::NumberAbs { .. } => matches!(v, FlatValue::Number(_)),
        Comparator::BooleanEq => matches!(v, FlatValue::Bool(_)),
        Comparator::UriEq => matches!(v, FlatValue::Ref(_)),
    }
}

pub fn comparators() -> Result<u32, String> {
    run((flat_value(), flat_value(), comparator()), |(a, b, c)| {
        let ab = compare_literal(&a, &b, &c);
        let ba = compare_literal(&b, &a, &c);
        prop_assert_eq!(ab, ba, "symmetry");
        prop_assert!((0.0..=1.0).contains(&ab), "range: {}", ab);
        if applicable(&c, &a) {
            prop_assert_eq!(compare_literal(&a, &a, &c), 1.0, "identity");
        }
        Ok(())
    })
}

pub fn levenshtein_oracle() -> Result<u32, String> {
    run(("[a-cé ]{0,12}", "[a-cé ]{0,12}"), |(a, b)| {
        let longest = a.chars().count().max(b.chars().count());
        let expected = if longest == 0 {
            1.0
        } else {
            1.0 - levenshtein_dp(&a, &b) as f64 / longest as f64
        };
        prop_assert!((levenshtein_similarity(&a, &b) - expected).abs() < 1e-12);
        Ok(())
    })
}

fn element_standardizer() -> impl Strategy<Value = Standardizer> {
    prop_oneof![
        Just(Standardizer::Lowercase),
        Just(Standardizer::Trim),
        Just(Standardizer::CollapseWhitespace),
        Just(Standardizer::StripPunctuation),
        Just(Standardizer::StripDiacritics),
        (0u32..4).prop_map(|decimals| Standardizer::Round { decimals }),
        Just(Standardizer::Identity),
    ]
}

fn list_standardizer() -> impl Strategy<Value = Standardizer> {
    prop_oneof![
        Just(Standardizer::Setify),
        Just(Standardizer::Sort),
        (0usize..4).prop_map(|k| Standardizer::TakeFirst { k }),
    ]
}

pub fn standardizer_idempotence() -> Result<u32, String> {
    let text = "[ \tA-Za-zÀ-ÿ0-9,.;!?-]{0,16}".prop_map(FlatValue::Text);
    let value = prop_oneof![text, flat_value()];
    let list = prop::collection::vec(flat_value(), 0..6);
    run(
        (value, element_standardizer(), list, list_standardizer()),
        |(v, s, values, ls)| {
            let once = standardize_value(&v, &[s]);
            prop_assert_eq!(standardize_value(&once, &[s]), once.clone(), "{:?} on {:?}", s, v);
            let once = standardize_list(&values, &[ls]);
            prop_assert_eq!(standardize_list(&once, &[ls]), once.clone(), "{:?}", ls);
            Ok(())
        },
    )
}

pub fn aggregation_order() -> Result<u32, String> {
    run(prop::collection::vec(0.0..=1.0f64, 1..10), |sims| {
        let min = Aggregation::Min.reduce(&sims);
        let avg = Aggregation::Avg.reduce(&sims);
        let max = Aggregation::Max.reduce(&sims);
        prop_assert!(min <= avg + 1e-12 && avg <= max + 1e-12, "{} {} {}", min, avg, max);
        prop_assert!(sims.contains(&min) && sims.contains(&max));
        Ok(())
    })
}

pub fn prefilter_monotonicity() -> Result<u32, String> {
    let index = small_index();
    let ids: Vec<String> = index.documents().map(|d| d.id.clone()).collect();
    let fields: Vec<String> = index.spec().fields().map(str::to_string).collect();
    let n_fields = fields.len();
    run(
        (0..ids.len(), 0u8..=100, 0u8..=100, 1u32..(1 << n_fields)),
        |(doc, p, q, mask)| {
            let props: Vec<String> = (0..n_fields)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| fields[i].clone())
                .collect();
            let (lo, hi) = (p.min(q), p.max(q));
            let sample = index.get(&ids[doc]).unwrap();
            let hits = |pct| -> BTreeSet<String> {
                index
                    .more_like_this(sample, &PreFilterConfig::new(props.clone(), pct), None, Some(&ids[doc]))
                    .unwrap()
                    .into_iter()
                    .map(|c| c.id)
                    .collect()
            };
            let strict = hits(hi);
            let loose = hits(lo);
            prop_assert!(strict.is_subset(&loose), "pct {} vs {}", hi, lo);
            Ok(())
        },
    )
}

fn base_config() -> DDConfig {
    let spec = small_index().spec();
    default_config(spec, spec, &IgnoreList::default(), false).unwrap()
}

pub fn decision_antitonicity() -> Result<u32, String> {
    let index = small_index();
    let base = base_config();
    let n_paths = base.comparison.paths.len();
    let weights = prop::collection::vec(1u8..=100, n_paths);
    run((0u8..=100, 0u8..=100, weights), |(t1, t2, weights)| {
        let mut cfg = base.clone();
        for (pc, w) in cfg.comparison.paths.values_mut().zip(&weights) {
            pc.weight = Hundredths::new(*w).unwrap();
        }
        let accepted = |t: u8| -> Result<BTreeSet<(String, String)>, TestCaseError> {
            let mut c = cfg.clone();
            c.decision.threshold = Hundredths::new(t).unwrap();
            let results = run_duplicate_detection(index, index, &c, &RunOptions::default())
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            Ok(results.iter().filter(|p| p.accepted).map(ScoredPair::key).collect())
        };
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        prop_assert!(accepted(hi)?.is_subset(&accepted(lo)?), "threshold {} vs {}", hi, lo);
        Ok(())
    })
}

pub fn weighted_mean_scale_invariance() -> Result<u32, String> {
    let entry = (0.01..1.0f64, prop::option::of(0.0..=1.0f64));
    run((prop::collection::vec(entry, 1..8), 0.1..10.0f64), |(scores, k)| {
        let plain = weighted_mean(scores.iter().copied());
        let scaled = weighted_mean(scores.iter().map(|(w, s)| (w * k, *s)));
        prop_assert!((plain - scaled).abs() < 1e-9, "{} vs {}", plain, scaled);
        prop_assert!((0.0..=1.0).contains(&plain));
        Ok(())
    })
}

/// Random results and labels over a small id universe.
fn results_and_labels() -> impl Strategy<Value = (Vec<ScoredPair>, LabelSet)> {
    let pairs: Vec<(String, String)> = (0..7)
        .flat_map(|i| ((i + 1)..7).map(move |j| (format!("n{i}"), format!("n{j}"))))
        .collect();
    let n = pairs.len();
    (
        prop::collection::vec(prop::option::of(any::<bool>()), n),
        prop::collection::vec(prop::option::of(any::<bool>()), n),
    )
        .prop_map(move |(results, labels)| {
            let mut scored = Vec::new();
            let mut set = LabelSet::new();
            for (i, (a, b)) in pairs.iter().enumerate() {
                if let Some(accepted) = results[i] {
                    scored.push(ScoredPair {
                        source_id: b.clone(),
                        target_id: a.clone(),
                        similarity: if accepted { 0.9 } else { 0.1 },
                        accepted,
                        per_path: Default::default(),
                    });
                }
                if let Some(dup) = labels[i] {
                    set.insert(a, b, dup);
                }
            }
            (scored, set)
        })
}

fn check_report(r: &MetricsReport) -> Result<(), TestCaseError> {
    let (tp, fp, fn_) = (r.true_pos as f64, r.false_pos as f64, r.false_neg as f64);
    let precision = if r.true_pos + r.false_pos == 0 {
        1.0
    } else {
        tp / (tp + fp)
    };
    let recall = if r.true_pos + r.false_neg == 0 {
        1.0
    } else {
        tp / (tp + fn_)
    };
    prop_assert_eq!(r.precision, precision);
    prop_assert_eq!(r.recall, recall);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    prop_assert!((r.f1 - f1).abs() < 1e-12);
    prop_assert!(r.f1 <= r.precision.max(r.recall) + 1e-12 && r.f1 >= r.precision.min(r.recall) - 1e-12);
    prop_assert_eq!(
        r.degenerate,
        r.true_pos + r.false_pos == 0 || r.true_pos + r.false_neg == 0
    );
    Ok(())
}

pub fn metric_identities() -> Result<u32, String> {
    run(results_and_labels(), |(results, labels)| {
        let r = analyze(&results, &labels);
        check_report(&r)?;
        prop_assert_eq!(r.true_pos + r.false_pos + r.false_neg + r.true_neg, labels.len());
        prop_assert_eq!(r.labelled_total, labels.len());
        prop_assert_eq!(r.true_pos + r.false_neg, labels.positives());
        let accepted: BTreeSet<_> = results
            .iter()
            .filter(|p| p.accepted)
            .map(|p| pair_key(&p.source_id, &p.target_id))
            .collect();
        let tp = accepted.iter().filter(|(a, b)| labels.get(a, b) == Some(true)).count();
        prop_assert_eq!(r.true_pos, tp);

        let closed = analyze_closed_world(&results, &labels);
        check_report(&closed)?;
        prop_assert_eq!(closed.true_pos, r.true_pos);
        prop_assert_eq!(closed.true_pos + closed.false_pos, accepted.len());
        Ok(())
    })
}

fn report() -> impl Strategy<Value = MetricsReport> {
    (0usize..6, 0usize..6, 0usize..6, 0usize..6)
        .prop_map(|(tp, fp, fn_, tn)| MetricsReport::from_counts(tp, fp, fn_, tn, tp + fp + fn_ + tn))
}

fn prefs() -> impl Strategy<Value = MetricPrefs> {
    let metric = prop_oneof![Just(Metric::F1), Just(Metric::Precision), Just(Metric::Recall)];
    (metric.clone(), metric).prop_filter_map("distinct metrics", |(a, b)| MetricPrefs::new(a, b))
}

pub fn better_than_order() -> Result<u32, String> {
    run((report(), report(), report(), prefs()), |(a, b, c, p)| {
        prop_assert!(!better_than(&a, &a, &p), "irreflexive");
        if better_than(&a, &b, &p) {
            prop_assert!(!better_than(&b, &a, &p), "asymmetric");
            if better_than(&b, &c, &p) {
                prop_assert!(better_than(&a, &c, &p), "transitive");
            }
        }
        Ok(())
    })
}

pub fn hundredths() -> Result<u32, String> {
    run((0u8..=100, 1u32..10, 101u8..=255), |(k, extra, over)| {
        let x = f64::from(k) / 100.0;
        let h = Hundredths::from_f64(x).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(h.get(), k);
        let json = serde_json::to_string(&h).unwrap();
        prop_assert_eq!(serde_json::from_str::<Hundredths>(&json).unwrap(), h);
        if k < 100 {
            prop_assert!(Hundredths::from_f64(x + f64::from(extra) / 1000.0).is_err());
        }
        prop_assert!(Hundredths::new(over).is_none());
        Ok(())
    })
}

fn term_iri() -> impl Strategy<Value = String> {
    "[a-z]{1,6}(/[a-zA-Z0-9_]{1,4})?".prop_map(|s| format!("http://example.org/{s}"))
}

fn object() -> impl Strategy<Value = Term> {
    let text = "[a-zA-Z0-9 \"\\\\\n\t\r'#.<>àé€😀\u{1}]{0,12}";
    prop_oneof![
        term_iri().prop_map(Term::Iri),
        "[a-z][a-z0-9]{0,5}".prop_map(Term::Blank),
        text.prop_map(|s| Term::Literal(Literal::string(s))),
        (text, "[a-z]{2}(-[A-Z]{2})?").prop_map(|(s, l)| Term::Literal(Literal::lang(s, l))),
        (text, term_iri()).prop_map(|(s, d)| Term::Literal(Literal::typed(s, d))),
    ]
}

fn triple() -> impl Strategy<Value = Triple> {
    let subject = prop_oneof![
        term_iri().prop_map(Term::Iri),
        "[a-z][a-z0-9]{0,5}".prop_map(Term::Blank)
    ];
    (subject, term_iri(), object()).prop_map(|(s, p, o)| Triple::new(s, p, o))
}

pub fn ntriples_round_trip() -> Result<u32, String> {
    run(prop::collection::vec(triple(), 0..12), |triples| {
        let graph: Graph = triples.into_iter().collect();
        let text = graph.to_ntriples();
        let parsed = parse_ntriples(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert!(parsed == graph);
        prop_assert_eq!(parsed.to_ntriples(), text);
        Ok(())
    })
}

pub fn config_round_trip() -> Result<u32, String> {
    let base = base_config();
    let n_paths = base.comparison.paths.len();
    run(
        (
            0u8..=100,
            0u8..=100,
            prop::collection::vec((0u8..=100, comparator()), n_paths),
        ),
        |(pct, t, paths)| {
            let mut cfg = base.clone();
            cfg.pre_filter.threshold_pct = pct;
            cfg.decision.threshold = Hundredths::new(t).unwrap();
            for (pc, (w, c)) in cfg.comparison.paths.values_mut().zip(&paths) {
                pc.weight = Hundredths::new(*w).unwrap();
                pc.comparator = *c;
            }
            let back: DDConfig =
                serde_json::from_str(&cfg.to_json()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.hash(), cfg.hash());
            Ok(())
        },
    )
}

type Suite = (&'static str, fn() -> Result<u32, String>);

pub fn suites() -> Vec<Suite> {
    vec![
        ("comparator symmetry, identity and range", comparators),
        ("levenshtein against dynamic programming", levenshtein_oracle),
        ("standardizer idempotence", standardizer_idempotence),
        ("aggregation order min <= avg <= max", aggregation_order),
        ("pre-filter threshold monotonicity", prefilter_monotonicity),
        ("decision threshold antitonicity", decision_antitonicity),
        ("weighted average scale invariance", weighted_mean_scale_invariance),
        ("metric identities", metric_identities),
        ("better_than is a strict order", better_than_order),
        ("two-decimal quantization", hundredths),
        ("n-triples round trip", ntriples_round_trip),
        ("configuration json round trip", config_round_trip),
    ]
}
