use gazelens::fixation::{detect_fixations, FixationParams};
use gazelens::labeling::{label_samples, visibility_windows, QuadrantMap, StimulusWindow};
use gazelens::metrics::{
    attention_episodes, inhibitory_control, loss_of_focus, stimuli_expectancy, sustained_attention, Timeline,
};
use gazelens::session::{
    derive_disappearances, AoiConfig, EventKind, GazeSample, SessionLog, StimulusEvent, StimulusRole,
};
use gazelens_oracles::{
    anticipated_by_ms, attended_by_ms, focus_loss_by_ms, fuzz_case, looked_by_ms, share,
};

struct Case {
    session: SessionLog,
    aois: AoiConfig,
    windows: Vec<StimulusWindow>,
    timeline: Timeline,
}

fn case(seed: u64) -> Case {
    let (session, aois) = fuzz_case(seed, 1000);
    let timeline = Timeline::new(&session);
    let events = derive_disappearances(&session.events, 3000.0, timeline.end_ms);
    let windows = visibility_windows(&events, &aois, timeline.end_ms);
    Case { session, aois, windows, timeline }
}

#[test]
fn attention_metrics_match_millisecond_replay() {
    let mut seen = [0usize; 4];
    for seed in 0..400 {
        let c = case(seed);
        let fixations = detect_fixations(&c.session.samples, &FixationParams::default());
        let slack = c.timeline.max_interval_ms();

        let episodes = attention_episodes(&c.windows, &fixations);
        let attended: Vec<bool> = episodes.iter().map(|e| e.attended).collect();
        let oracle = attended_by_ms(&c.windows, &fixations);
        assert_eq!(attended, oracle, "seed {seed}");
        assert_eq!(sustained_attention(&episodes), share(&oracle, true));
        seen[0] += attended.iter().filter(|a| **a).count();

        let (rate, outcomes) = stimuli_expectancy(&c.windows, &c.session, &c.timeline, 500.0);
        let anticipated: Vec<bool> = outcomes.iter().map(|o| o.anticipated).collect();
        let oracle = anticipated_by_ms(&c.session, &c.windows, 500.0);
        assert_eq!(anticipated, oracle, "seed {seed}");
        assert_eq!(rate, share(&oracle, true));
        seen[1] += anticipated.iter().filter(|a| **a).count();

        let (score, distractors) = inhibitory_control(&c.windows, &fixations, 1000.0);
        let looked: Vec<bool> = distractors.iter().map(|d| d.looked).collect();
        let oracle = looked_by_ms(&c.windows, &fixations, 1000.0);
        assert_eq!(looked, oracle, "seed {seed}");
        assert_eq!(score, share(&oracle, false));
        seen[2] += looked.iter().filter(|a| **a).count();

        let labels = label_samples(&c.session, &c.aois, &c.windows, &QuadrantMap::default()).labels;
        let loss = loss_of_focus(&c.session, &labels, &c.windows, &c.timeline, 300.0);
        let oracle = focus_loss_by_ms(&c.session, &c.aois, &c.windows, 300.0);
        assert_eq!(loss.len(), oracle.len(), "seed {seed}: {loss:?} vs {oracle:?}");
        for (e, (start, dur)) in loss.iter().zip(&oracle) {
            assert!((e.start_ms - start).abs() <= slack, "seed {seed}");
            assert!((e.duration_ms - dur).abs() <= slack, "seed {seed}");
        }
        seen[3] += loss.len();
    }
    assert!(seen.iter().all(|n| *n > 0), "corpus never exercised a branch: {seen:?}");
}

#[test]
fn windows_widen_monotonically() {
    for seed in 0..200 {
        let c = case(seed + 10_000);
        let fixations = detect_fixations(&c.session.samples, &FixationParams::default());
        let mut last_rate = None;
        for w in [0.0, 100.0, 250.0, 500.0, 1000.0, 3000.0] {
            let (rate, _) = stimuli_expectancy(&c.windows, &c.session, &c.timeline, w);
            if let (Some(prev), Some(now)) = (last_rate, rate) {
                assert!(now >= prev, "seed {seed}: expectancy fell from {prev} to {now} at {w} ms");
            }
            last_rate = rate;
        }
        let mut last_score = None;
        for r in [0.0, 200.0, 500.0, 1000.0, 2500.0, 10_000.0] {
            let (score, _) = inhibitory_control(&c.windows, &fixations, r);
            if let (Some(prev), Some(now)) = (last_score, score) {
                assert!(now <= prev, "seed {seed}: inhibitory control rose from {prev} to {now} at {r} ms");
            }
            last_score = score;
        }
    }
}

fn sample(t: f64, x: f64, y: f64) -> GazeSample {
    GazeSample { timestamp_ms: t, x, y, valid: true, off_screen: false }
}

fn appear(t: f64, id: &str, x: f64, y: f64, role: StimulusRole) -> StimulusEvent {
    StimulusEvent {
        timestamp_ms: t,
        kind: EventKind::Appear,
        object_id: id.into(),
        obj_x: x,
        obj_y: y,
        obj_z: 0.0,
        role,
        synthetic: false,
    }
}

fn log(samples: Vec<GazeSample>, events: Vec<StimulusEvent>) -> SessionLog {
    SessionLog {
        participant_pseudonym: String::new(),
        screen_width: 1920,
        screen_height: 1080,
        samples,
        events,
        source_messages: None,
    }
}

#[test]
fn one_of_four_appearances_anticipated() {
    // Gaze rests at (200,200) throughout; targets appear every 2 s, only the
    // third one where the gaze already is.
    let samples = (0..500).map(|i| sample(f64::from(i) * 20.0, 200.0, 200.0)).collect();
    let events = vec![
        appear(1000.0, "a", 1500.0, 800.0, StimulusRole::Target),
        appear(3000.0, "b", 1500.0, 300.0, StimulusRole::Target),
        appear(5000.0, "c", 210.0, 190.0, StimulusRole::Target),
        appear(7000.0, "d", 700.0, 800.0, StimulusRole::Target),
    ];
    let s = log(samples, events);
    let tl = Timeline::new(&s);
    let windows = visibility_windows(&derive_disappearances(&s.events, 1500.0, tl.end_ms), &AoiConfig::default(), tl.end_ms);
    let (rate, _) = stimuli_expectancy(&windows, &s, &tl, 500.0);
    assert_eq!(rate, Some(0.25));
}

#[test]
fn two_of_five_distractors_looked_at() {
    let mut samples = Vec::new();
    // fixate each of the first two distractors shortly after it appears
    for i in 0..600 {
        let t = f64::from(i) * 20.0;
        let (x, y) = if (1200.0..1600.0).contains(&t) {
            (400.0, 400.0)
        } else if (3300.0..3700.0).contains(&t) {
            (1400.0, 400.0)
        } else {
            (960.0, 1000.0)
        };
        samples.push(sample(t, x, y));
    }
    let events = vec![
        appear(1000.0, "d1", 400.0, 400.0, StimulusRole::Distractor),
        appear(3000.0, "d2", 1400.0, 400.0, StimulusRole::Distractor),
        appear(5000.0, "d3", 400.0, 700.0, StimulusRole::Distractor),
        appear(7000.0, "d4", 1400.0, 700.0, StimulusRole::Distractor),
        appear(9000.0, "d5", 200.0, 200.0, StimulusRole::Distractor),
    ];
    let s = log(samples, events);
    let tl = Timeline::new(&s);
    let windows = visibility_windows(&derive_disappearances(&s.events, 1500.0, tl.end_ms), &AoiConfig::default(), tl.end_ms);
    let fixations = detect_fixations(&s.samples, &FixationParams::default());
    let (score, _) = inhibitory_control(&windows, &fixations, 1000.0);
    assert_eq!(score, Some(0.6));
}

#[test]
fn no_events_means_absent_scores() {
    let s = log((0..50).map(|i| sample(f64::from(i) * 20.0, 500.0, 500.0)).collect(), vec![]);
    let tl = Timeline::new(&s);
    let fixations = detect_fixations(&s.samples, &FixationParams::default());
    assert_eq!(sustained_attention(&attention_episodes(&[], &fixations)), None);
    assert_eq!(stimuli_expectancy(&[], &s, &tl, 500.0).0, None);
    assert_eq!(inhibitory_control(&[], &fixations, 1000.0).0, None);
}
