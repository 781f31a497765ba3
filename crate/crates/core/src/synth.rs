//! Seeded synthetic data: gaze blobs for clustering and whole game sessions
//! for load and property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::session::{
    AoiConfig, AoiDefinition, AoiRole, EventKind, GazeSample, SessionLog, StimulusEvent, StimulusRole,
};

/// Isotropic Gaussian blobs. Returns the points and the blob each came from.
pub fn gaussian_blobs(centers: &[[f64; 2]], counts: &[usize], sigma: f64, seed: u64) -> (Vec<[f64; 2]>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (b, (c, &n)) in centers.iter().zip(counts).enumerate() {
        for _ in 0..n {
            points.push([c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]);
            labels.push(b);
        }
    }
    (points, labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionShape {
    pub samples: usize,
    pub interval_ms: f64,
    /// Uniform extra delay added to each interval, in `[0, jitter_ms)`.
    pub jitter_ms: f64,
    pub screen_width: u32,
    pub screen_height: u32,
    /// Mean time between stimulus appearances.
    pub stimulus_gap_ms: f64,
    pub distractor_share: f64,
    /// Chance that an appearance gets an explicit disappearance.
    pub explicit_disappear: f64,
    /// Chance that a new fixation target is a visible stimulus.
    pub follow_stimulus: f64,
    /// Chance per sample of a tracking loss starting.
    pub blink_rate: f64,
    /// Chance that a new fixation target lies off screen.
    pub off_screen: f64,
}

impl Default for SessionShape {
    fn default() -> Self {
        SessionShape {
            samples: 2000,
            interval_ms: 16.0,
            jitter_ms: 2.0,
            screen_width: 1920,
            screen_height: 1080,
            stimulus_gap_ms: 1500.0,
            distractor_share: 0.3,
            explicit_disappear: 0.6,
            follow_stimulus: 0.6,
            blink_rate: 0.004,
            off_screen: 0.03,
        }
    }
}

/// A plausible play session: fixations with small noise, saccades between
/// them, blinks, occasional off-screen looks, and stimuli that gaze tends to
/// follow.
pub fn synthetic_session(shape: &SessionShape, seed: u64) -> SessionLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = f64::from(shape.screen_width);
    let h = f64::from(shape.screen_height);
    let mut times = Vec::with_capacity(shape.samples);
    let mut t = 0.0;
    for _ in 0..shape.samples {
        times.push(t);
        t += shape.interval_ms + if shape.jitter_ms > 0.0 { rng.random_range(0.0..shape.jitter_ms) } else { 0.0 };
    }
    let end = times.last().copied().unwrap_or(0.0);

    let mut events = Vec::new();
    let mut shown: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut at = rng.random_range(0.0..shape.stimulus_gap_ms.max(1.0));
    let mut n = 0;
    while at < end {
        let role = if rng.random_bool(shape.distractor_share) { StimulusRole::Distractor } else { StimulusRole::Target };
        let (ox, oy) = (rng.random_range(120.0..w - 120.0), rng.random_range(120.0..h - 120.0));
        let object_id = match role {
            StimulusRole::Target => format!("mushroom{n}"),
            StimulusRole::Distractor => format!("leaf{n}"),
        };
        let visible = rng.random_range(400.0..5000.0);
        let appear = StimulusEvent {
            timestamp_ms: at,
            kind: EventKind::Appear,
            object_id: object_id.clone(),
            obj_x: ox,
            obj_y: oy,
            obj_z: -3.5,
            role,
            synthetic: false,
        };
        if rng.random_bool(shape.explicit_disappear) && at + visible <= end {
            events.push(StimulusEvent { timestamp_ms: at + visible, kind: EventKind::Disappear, ..appear.clone() });
        }
        events.push(appear);
        shown.push((at, at + visible, ox, oy));
        n += 1;
        at += rng.random_range(0.2 * shape.stimulus_gap_ms..1.8 * shape.stimulus_gap_ms).max(1.0);
    }
    events.sort_by(|a, b| a.timestamp_ms.total_cmp(&b.timestamp_ms));

    let jitter = Normal::new(0.0, 4.0).expect("valid");
    let mut samples = Vec::with_capacity(shape.samples);
    let mut target = (w / 2.0, h / 2.0);
    let mut hold_until = 0.0;
    let mut blink_left = 0usize;
    for &ts in &times {
        if ts >= hold_until {
            let visible: Vec<_> = shown.iter().filter(|s| s.0 <= ts && ts < s.1).collect();
            target = if !visible.is_empty() && rng.random_bool(shape.follow_stimulus) {
                let s = visible[rng.random_range(0..visible.len())];
                (s.2 + rng.random_range(-40.0..40.0), s.3 + rng.random_range(-40.0..40.0))
            } else if rng.random_bool(shape.off_screen) {
                (rng.random_range(-200.0..w + 200.0), h + rng.random_range(10.0..300.0))
            } else {
                (rng.random_range(0.0..w), rng.random_range(0.0..h))
            };
            hold_until = ts + rng.random_range(60.0..900.0);
        }
        if blink_left == 0 && rng.random_bool(shape.blink_rate) {
            blink_left = rng.random_range(3..20);
        }
        if blink_left > 0 {
            blink_left -= 1;
            samples.push(GazeSample { timestamp_ms: ts, x: 0.0, y: 0.0, valid: false, off_screen: false });
            continue;
        }
        let x = target.0 + jitter.sample(&mut rng);
        let y = target.1 + jitter.sample(&mut rng);
        let off_screen = !(0.0..=w).contains(&x) || !(0.0..=h).contains(&y);
        samples.push(GazeSample {
            timestamp_ms: ts,
            x: x.clamp(0.0, w),
            y: y.clamp(0.0, h),
            valid: true,
            off_screen,
        });
    }

    SessionLog {
        participant_pseudonym: "synthetic".into(),
        screen_width: shape.screen_width,
        screen_height: shape.screen_height,
        samples,
        events,
        source_messages: None,
    }
}

/// A few random AoIs, possibly overlapping, with mixed roles.
pub fn synthetic_aois(screen_width: u32, screen_height: u32, count: usize, seed: u64) -> AoiConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = f64::from(screen_width);
    let h = f64::from(screen_height);
    let roles = [AoiRole::Target, AoiRole::Distractor, AoiRole::Neutral];
    let aois = (0..count)
        .map(|i| {
            let width = rng.random_range(50.0..w / 2.0);
            let height = rng.random_range(50.0..h / 2.0);
            AoiDefinition {
                aoi_id: format!("aoi{i}"),
                x: rng.random_range(0.0..w - width),
                y: rng.random_range(0.0..h - height),
                width,
                height,
                role: roles[rng.random_range(0..roles.len())],
            }
        })
        .collect();
    AoiConfig::new(aois).expect("generated AoIs are valid")
}
