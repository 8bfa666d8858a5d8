//! Standardizers and comparators on a few hand-picked values.
//!
//! cargo run --example standardize_compare

use kgdedup::{compare_literal, standardize_list, standardize_value, Comparator, FlatValue, Standardizer};

fn main() {
    let text = FlatValue::Text("  Café   Müller, Berlin! ".into());
    let steps = [
        Standardizer::Trim,
        Standardizer::Lowercase,
        Standardizer::CollapseWhitespace,
        Standardizer::StripDiacritics,
        Standardizer::StripPunctuation,
    ];
    let mut v = text.clone();
    println!("{:<20} {:?}", "input", v.canonical());
    for s in steps {
        v = standardize_value(&v, &[s]);
        println!("{:<20} {:?}", s.name(), v.canonical());
    }

    let names: Vec<FlatValue> = ["b", "a", "b", "c"]
        .iter()
        .map(|s| FlatValue::Text(s.to_string()))
        .collect();
    let set = standardize_list(&names, &[Standardizer::Setify, Standardizer::Sort]);
    println!(
        "setify+sort          {:?}",
        set.iter().map(FlatValue::canonical).collect::<Vec<_>>()
    );

    let pairs = [
        (
            FlatValue::Text("Musterstraße 1".into()),
            FlatValue::Text("Musterstrasse 1".into()),
        ),
        (
            FlatValue::Text("open air festival".into()),
            FlatValue::Text("festival open air".into()),
        ),
        (FlatValue::Number(19.99), FlatValue::Number(20.0)),
        (FlatValue::Bool(true), FlatValue::Bool(false)),
    ];
    let comparators = [
        Comparator::Levenshtein,
        Comparator::JaccardTokens,
        Comparator::Exact,
        Comparator::NumberRatio,
        Comparator::NumberAbs { tolerance: 1.0 },
        Comparator::BooleanEq,
    ];
    for (a, b) in &pairs {
        println!("{} vs {}", a.canonical(), b.canonical());
        for c in &comparators {
            println!("  {:<18} {:.3}", c.to_string(), compare_literal(a, b, c));
        }
    }
}
