use gazelens_web::{cluster_demo, fixation_demo, label_demo, reference_aois, DEMO_HEIGHT, DEMO_WIDTH};
use serde_json::Value;

fn parse(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn cluster_demo_is_deterministic() {
    let a = cluster_demo(4, 25.0, 42).unwrap();
    assert_eq!(a, cluster_demo(4, 25.0, 42).unwrap());
    let v = parse(&a);
    assert_eq!(v["points"].as_array().unwrap().len(), 2000);
    assert_eq!(v["model"]["centroids"].as_array().unwrap().len(), 4);
    // largest blob first
    let counts: Vec<u64> = v["model"]["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).collect();
    let first = v["model"]["rank_order"][0].as_u64().unwrap() as usize;
    assert_eq!(counts[first], 650);
}

#[test]
fn cluster_demo_rejects_bad_input() {
    assert!(cluster_demo(0, 10.0, 1).is_err());
    assert!(cluster_demo(3, f64::NAN, 1).is_err());
}

#[test]
fn fixation_threshold_changes_count() {
    let loose = parse(&fixation_demo(60.0, 80.0, 3).unwrap());
    let strict = parse(&fixation_demo(60.0, 400.0, 3).unwrap());
    let n = |v: &Value| v["fixations"].as_array().unwrap().len();
    assert!(n(&loose) > n(&strict));
    assert!(n(&strict) > 0);
    assert!(fixation_demo(0.0, 100.0, 3).is_err());
}

#[test]
fn label_demo_agrees_on_reference_layout() {
    let v = parse(&label_demo("", DEMO_WIDTH, DEMO_HEIGHT).unwrap());
    assert_eq!(v["agree"], 5);
    assert_eq!(v["disagree"], 0);
    assert_eq!(label_demo(reference_aois(), DEMO_WIDTH, DEMO_HEIGHT).unwrap(), label_demo("", DEMO_WIDTH, DEMO_HEIGHT).unwrap());
}

#[test]
fn label_demo_flags_wrong_geometry() {
    let v = parse(&label_demo("", 1280, 1440).unwrap());
    assert!(v["disagree"].as_u64().unwrap() > 0);
    assert!(label_demo("not json", DEMO_WIDTH, DEMO_HEIGHT).is_err());
}
