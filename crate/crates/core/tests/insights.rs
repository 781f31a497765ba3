use gazelens::insight::{
    default_rules, derive_insights, metric_catalog, render_report, validate_rules, Comparator, Insight, Rule,
    RuleError, Severity, KNOWN_METRICS,
};
use gazelens::pipeline::{analyze, AnalysisConfig};
use gazelens_oracles::fuzz_case;
use proptest::prelude::*;

fn rule(metric: &str, comparator: Comparator, threshold: f64) -> Rule {
    Rule {
        code: format!("R_{metric}_{comparator:?}_{threshold}"),
        metric: metric.into(),
        comparator,
        threshold,
        severity: Severity::Notice,
        narrative: "{metric} at {value} against {threshold}".into(),
        version: "test".into(),
    }
}

fn tighten(r: &Rule, by: f64) -> Rule {
    let threshold = match r.comparator {
        Comparator::Gt | Comparator::Ge => r.threshold + by,
        Comparator::Lt | Comparator::Le => r.threshold - by,
    };
    Rule { threshold, ..r.clone() }
}

fn comparator() -> impl Strategy<Value = Comparator> {
    prop_oneof![Just(Comparator::Gt), Just(Comparator::Ge), Just(Comparator::Lt), Just(Comparator::Le)]
}

fn rules() -> impl Strategy<Value = Vec<Rule>> {
    prop::collection::vec(
        (0..KNOWN_METRICS.len(), comparator(), -0.5f64..1.5).prop_map(|(m, c, t)| rule(KNOWN_METRICS[m], c, t)),
        1..12,
    )
}

fn self_contained(i: &Insight) -> bool {
    // only what travels with the insight
    let json = serde_json::to_string(i).unwrap();
    let back: Insight = serde_json::from_str(&json).unwrap();
    back.re_evaluate()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn evidence_reproduces_every_decision(seed in 0u64..5000, rules in rules(), by in 0.0f64..0.5) {
        let (session, aois) = fuzz_case(seed, 600);
        let config = AnalysisConfig { rules: rules.clone(), ..AnalysisConfig::default() };
        let a = analyze(&session, &aois, &config).unwrap();
        let catalog = metric_catalog(&a.metrics, &a.dwell);
        for r in &rules {
            let fired = a.insights.iter().any(|i| i.code == r.code);
            let value = catalog[r.metric.as_str()].value;
            prop_assert_eq!(fired, value.is_some_and(|v| r.comparator.holds(v, r.threshold)));
        }
        for i in &a.insights {
            prop_assert!(self_contained(i), "{i:?}");
        }
        for s in &a.signals {
            prop_assert!(s.re_evaluate(), "{s:?}");
        }
        // tightening a threshold never adds insights
        let tight: Vec<Rule> = rules.iter().map(|r| tighten(r, by)).collect();
        let fewer = derive_insights(&a.metrics, &a.dwell, &tight).unwrap();
        for i in &fewer {
            prop_assert!(a.insights.iter().any(|j| j.code == i.code));
        }
    }
}

#[test]
fn default_rules_on_corpus() {
    let mut fired = 0;
    for seed in 0..100 {
        let (session, aois) = fuzz_case(seed, 800);
        let a = analyze(&session, &aois, &AnalysisConfig::default()).unwrap();
        fired += a.insights.len();
        let report = a.report();
        for i in &a.insights {
            assert!(self_contained(i));
            assert!(!i.narrative.contains('{'), "unfilled template in {}", i.narrative);
            assert_eq!(report.markdown.matches(&format!("### {} ", i.code)).count(), 1);
        }
    }
    assert!(fired > 0);
}

#[test]
fn unknown_metric_is_a_config_error() {
    let mut rules = default_rules();
    rules.push(rule("happiness", Comparator::Gt, 0.5));
    let err = validate_rules(&rules).unwrap_err();
    assert!(matches!(err, RuleError::UnknownMetricInRule { .. }));
}

#[test]
fn quiet_session_reports_no_flags() {
    let (session, aois) = fuzz_case(1, 300);
    let a = analyze(&session, &aois, &AnalysisConfig { rules: vec![], ..AnalysisConfig::default() }).unwrap();
    let r = render_report(&a.insights, &a.metrics, &a.dwell, &a.report_meta());
    assert!(r.markdown.contains("No flags raised."));
    let v: serde_json::Value = serde_json::from_str(&r.json).unwrap();
    assert_eq!(v["flags_raised"], 0);
}
