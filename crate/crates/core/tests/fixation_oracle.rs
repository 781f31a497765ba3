use gazelens::fixation::{detect_fixations, FixationParams};
use gazelens::session::GazeSample;
use gazelens_oracles::{fixations_by_enumeration, fuzz_case, same_fixations};
use proptest::prelude::*;

fn samples_strategy() -> impl Strategy<Value = Vec<GazeSample>> {
    // small coordinate range so fixations actually occur
    prop::collection::vec((1u32..40, 0.0f64..120.0, 0.0f64..120.0, 0u8..20), 0..200).prop_map(|raw| {
        let mut t = 0.0;
        raw.into_iter()
            .map(|(dt, x, y, flag)| {
                t += f64::from(dt);
                GazeSample { timestamp_ms: t, x, y, valid: flag != 0, off_screen: flag == 1 }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_enumeration(samples in samples_strategy(), d in 5.0f64..80.0, m in 0.0f64..300.0) {
        let params = FixationParams { dispersion_px: d, min_duration_ms: m };
        let fast = detect_fixations(&samples, &params);
        let slow = fixations_by_enumeration(&samples, &params);
        prop_assert!(same_fixations(&fast, &slow, 1e-9), "{fast:?}\n{slow:?}");
    }

    #[test]
    fn fixations_are_disjoint_and_ordered(samples in samples_strategy()) {
        let fx = detect_fixations(&samples, &FixationParams::default());
        for w in fx.windows(2) {
            prop_assert!(w[0].last_sample < w[1].first_sample);
        }
        for f in &fx {
            prop_assert!(f.duration_ms >= 100.0);
        }
    }
}

#[test]
fn matches_enumeration_on_synthetic_sessions() {
    for seed in 0..60 {
        let (session, _) = fuzz_case(seed, 200);
        let params = FixationParams::default();
        let fast = detect_fixations(&session.samples, &params);
        let slow = fixations_by_enumeration(&session.samples, &params);
        assert!(same_fixations(&fast, &slow, 1e-9), "seed {seed}");
    }
}
