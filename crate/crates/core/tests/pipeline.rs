use gazelens::export::{build_manifest, render_artifacts};
use gazelens::fixtures::{EXPECTED_QUADRANTS, REFERENCE_AOI_JSON, REFERENCE_LOG_CSV};
use gazelens::pipeline::{analyze, AnalysisConfig};
use gazelens::session::{parse_session, AoiConfig, FormatOptions};
use gazelens::synth::{synthetic_session, SessionShape};
use gazelens_oracles::fuzz_case;

#[test]
fn reference_log_relabels_five_of_five() {
    let parsed = parse_session(REFERENCE_LOG_CSV.as_bytes(), &FormatOptions::default()).unwrap();
    assert_eq!(parsed.ledger.rows_rejected, 0);
    let aois = AoiConfig::from_json(REFERENCE_AOI_JSON).unwrap();
    let a = analyze(&parsed.session, &aois, &AnalysisConfig::default()).unwrap();
    let quadrants: Vec<String> = a.labels.iter().map(|l| l.quadrant.to_string()).collect();
    assert_eq!(quadrants, EXPECTED_QUADRANTS);
    let c = a.consistency.unwrap();
    assert_eq!((c.agree, c.disagree), (5, 0));
}

#[test]
fn flipped_geometry_breaks_agreement() {
    let opts = FormatOptions { screen_width: 1280, screen_height: 1440, ..FormatOptions::default() };
    let parsed = parse_session(REFERENCE_LOG_CSV.as_bytes(), &opts).unwrap();
    let aois = AoiConfig::from_json(REFERENCE_AOI_JSON).unwrap();
    let a = analyze(&parsed.session, &aois, &AnalysisConfig::default()).unwrap();
    assert!(a.consistency.unwrap().disagree > 0);
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    for seed in [3, 17, 99] {
        let (session, aois) = fuzz_case(seed, 800);
        let config = AnalysisConfig::default();
        let first = render_artifacts(&analyze(&session, &aois, &config).unwrap());
        let second = render_artifacts(&analyze(&session, &aois, &config).unwrap());
        assert_eq!(first, second);
        assert_eq!(build_manifest("h", &first), build_manifest("h", &second));
    }
}

#[test]
fn missing_events_mark_scores_absent() {
    let mut session = synthetic_session(&SessionShape { samples: 400, ..SessionShape::default() }, 5);
    session.events.clear();
    let a = analyze(&session, &AoiConfig::default(), &AnalysisConfig::default()).unwrap();
    let metrics = render_artifacts(&a).into_iter().find(|x| x.path == "metrics.json").unwrap();
    let v: serde_json::Value = serde_json::from_slice(&metrics.bytes).unwrap();
    assert_eq!(v["metrics"]["sustained_attention_score"], "absent");
    assert_eq!(v["metrics"]["inhibitory_control_score"], "absent");
    assert!(a.signals.is_empty());
}

#[test]
fn config_hash_tracks_configuration() {
    let a = AnalysisConfig::default();
    let b = AnalysisConfig { seed: 7, ..AnalysisConfig::default() };
    assert_eq!(a.config_hash(), AnalysisConfig::default().config_hash());
    assert_ne!(a.config_hash(), b.config_hash());
}
