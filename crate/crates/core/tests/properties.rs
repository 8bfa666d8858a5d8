mod support;

use support::props;

macro_rules! suites {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                let cases = props::$name().unwrap_or_else(|e| panic!("{e}"));
                assert!(cases >= 200);
            }
        )*
    };
}

suites!(
    comparators,
    levenshtein_oracle,
    standardizer_idempotence,
    aggregation_order,
    prefilter_monotonicity,
    decision_antitonicity,
    weighted_mean_scale_invariance,
    metric_identities,
    better_than_order,
    hundredths,
    ntriples_round_trip,
    config_round_trip,
);
