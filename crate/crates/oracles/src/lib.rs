//! Slow, obviously-correct reference implementations. Each one recomputes a
//! library result by enumeration or by replaying the session one
//! millisecond at a time, sharing no code with the routine it checks.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gazelens::fixation::{Fixation, FixationParams};
use gazelens::labeling::StimulusWindow;
use gazelens::session::{AoiConfig, GazeSample, Rect, SessionLog, StimulusRole};

fn inside(r: &Rect, x: f64, y: f64) -> bool {
    x >= r.x && x <= r.x + r.width && y >= r.y && y <= r.y + r.height
}

fn usable(s: &GazeSample) -> bool {
    s.valid && !s.off_screen
}

/// I-DT by enumerating every candidate window from scratch.
pub fn fixations_by_enumeration(samples: &[GazeSample], params: &FixationParams) -> Vec<Fixation> {
    let passes = |i: usize, j: usize| {
        let w = &samples[i..=j];
        if !w.iter().all(usable) {
            return false;
        }
        let spread = |v: Vec<f64>| {
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        spread(w.iter().map(|s| s.x).collect()) <= params.dispersion_px
            && spread(w.iter().map(|s| s.y).collect()) <= params.dispersion_px
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        let mut best = None;
        for j in i..samples.len() {
            if !passes(i, j) {
                break;
            }
            if samples[j].timestamp_ms - samples[i].timestamp_ms >= params.min_duration_ms {
                best = Some(j);
            }
        }
        match best {
            Some(j) => {
                let w = &samples[i..=j];
                let n = w.len() as f64;
                out.push(Fixation {
                    start_ms: samples[i].timestamp_ms,
                    duration_ms: samples[j].timestamp_ms - samples[i].timestamp_ms,
                    centroid_x: w.iter().map(|s| s.x).sum::<f64>() / n,
                    centroid_y: w.iter().map(|s| s.y).sum::<f64>() / n,
                    sample_count: w.len(),
                    first_sample: i,
                    last_sample: j,
                });
                i = j + 1;
            }
            None => i += 1,
        }
    }
    out
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

pub fn same_fixations(a: &[Fixation], b: &[Fixation], rel: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(p, q)| {
            p.first_sample == q.first_sample
                && p.last_sample == q.last_sample
                && p.sample_count == q.sample_count
                && p.start_ms == q.start_ms
                && p.duration_ms == q.duration_ms
                && close(p.centroid_x, q.centroid_x, rel)
                && close(p.centroid_y, q.centroid_y, rel)
        })
}

/// Sample-hold replay: the sample in force at each instant is the latest
/// one recorded at or before it; the last sample lasts one median interval.
pub struct Replay<'s> {
    pub session: &'s SessionLog,
    pub start_ms: f64,
    pub end_ms: f64,
}

impl<'s> Replay<'s> {
    pub fn new(session: &'s SessionLog) -> Self {
        let ts: Vec<f64> = session.samples.iter().map(|s| s.timestamp_ms).collect();
        let mut gaps: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if gaps.is_empty() {
            0.0
        } else if gaps.len() % 2 == 1 {
            gaps[gaps.len() / 2]
        } else {
            (gaps[gaps.len() / 2 - 1] + gaps[gaps.len() / 2]) / 2.0
        };
        Replay { session, start_ms: ts.first().copied().unwrap_or(0.0), end_ms: ts.last().map_or(0.0, |t| t + median) }
    }

    /// Index of the sample holding at `t`.
    pub fn held_at(&self, t: f64) -> Option<usize> {
        if t < self.start_ms || t >= self.end_ms {
            return None;
        }
        self.session.samples.iter().rposition(|s| s.timestamp_ms <= t)
    }

    /// Integer instants covering the session.
    pub fn millis(&self) -> impl Iterator<Item = f64> + '_ {
        let a = self.start_ms.ceil() as i64;
        let b = self.end_ms.ceil() as i64;
        (a..b).map(|t| t as f64)
    }
}

/// Exclusive dwell per AoI, non-AoI, invalid and total.
pub struct DwellTally {
    pub aoi_ms: BTreeMap<String, f64>,
    pub non_aoi_ms: f64,
    pub invalid_ms: f64,
    pub total_ms: f64,
}

/// Dwell attribution computed sample by sample from the raw definitions.
pub fn dwell_by_hold(session: &SessionLog, aois: &AoiConfig) -> DwellTally {
    let replay = Replay::new(session);
    let n = session.samples.len();
    let mut tally = DwellTally {
        aoi_ms: aois.iter().map(|a| (a.aoi_id.clone(), 0.0)).collect(),
        non_aoi_ms: 0.0,
        invalid_ms: 0.0,
        total_ms: replay.end_ms - replay.start_ms,
    };
    for (i, s) in session.samples.iter().enumerate() {
        let next = if i + 1 < n { session.samples[i + 1].timestamp_ms } else { replay.end_ms };
        let d = next - s.timestamp_ms;
        if !s.valid {
            tally.invalid_ms += d;
            continue;
        }
        // highest role priority wins, then configuration order
        let rank = |r: gazelens::session::AoiRole| match r {
            gazelens::session::AoiRole::Target => 0,
            gazelens::session::AoiRole::Distractor => 1,
            gazelens::session::AoiRole::Neutral => 2,
        };
        let owner = aois
            .iter()
            .enumerate()
            .filter(|(_, a)| inside(&a.rect(), s.x, s.y))
            .min_by_key(|(i, a)| (rank(a.role), *i))
            .map(|(_, a)| a.aoi_id.clone());
        match owner {
            Some(id) => *tally.aoi_ms.get_mut(&id).unwrap() += d,
            None => tally.non_aoi_ms += d,
        }
    }
    tally
}

fn fixation_active(f: &Fixation, t: f64) -> bool {
    f.start_ms <= t && t <= f.start_ms + f.duration_ms
}

/// Per target appearance: is there an instant of visibility at which a
/// fixation centred in the target region is under way?
pub fn attended_by_ms(windows: &[StimulusWindow], fixations: &[Fixation]) -> Vec<bool> {
    windows
        .iter()
        .filter(|w| w.role == StimulusRole::Target)
        .map(|w| {
            let rect = w.region.rect;
            let hits: Vec<&Fixation> =
                fixations.iter().filter(|f| inside(&rect, f.centroid_x, f.centroid_y)).collect();
            let (a, d) = (w.appear_ms.ceil() as i64, w.disappear_ms.ceil() as i64);
            (a..d).any(|t| hits.iter().any(|f| fixation_active(f, t as f64)))
        })
        .collect()
}

/// Per target appearance: did the held gaze sit in the region at some
/// instant of `[appear - window_ms, appear)`?
pub fn anticipated_by_ms(session: &SessionLog, windows: &[StimulusWindow], window_ms: f64) -> Vec<bool> {
    let replay = Replay::new(session);
    windows
        .iter()
        .filter(|w| w.role == StimulusRole::Target)
        .map(|w| {
            let (a, b) = ((w.appear_ms - window_ms).ceil() as i64, w.appear_ms.ceil() as i64);
            (a..b).any(|t| {
                replay.held_at(t as f64).is_some_and(|i| {
                    let s = &session.samples[i];
                    s.valid && inside(&w.region.rect, s.x, s.y)
                })
            })
        })
        .collect()
}

/// Per distractor appearance: was a fixation centred in its region under
/// way at some instant of `[appear, appear + response_ms]`?
pub fn looked_by_ms(windows: &[StimulusWindow], fixations: &[Fixation], response_ms: f64) -> Vec<bool> {
    windows
        .iter()
        .filter(|w| w.role == StimulusRole::Distractor)
        .map(|w| {
            let hits: Vec<&Fixation> =
                fixations.iter().filter(|f| inside(&w.region.rect, f.centroid_x, f.centroid_y)).collect();
            let (a, b) = (w.appear_ms.ceil() as i64, (w.appear_ms + response_ms).floor() as i64);
            (a..=b).any(|t| hits.iter().any(|f| fixation_active(f, t as f64)))
        })
        .collect()
}

/// Focus-loss episodes `(start_ms, duration_ms)` from a millisecond scan.
pub fn focus_loss_by_ms(
    session: &SessionLog,
    aois: &AoiConfig,
    windows: &[StimulusWindow],
    gap_ms: f64,
) -> Vec<(f64, f64)> {
    let replay = Replay::new(session);
    let mut episodes = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for t in replay.millis() {
        let visible: Vec<&StimulusWindow> =
            windows.iter().filter(|w| w.appear_ms <= t && t < w.disappear_ms).collect();
        let lost = !visible.is_empty()
            && replay.held_at(t).is_some_and(|i| {
                let s = &session.samples[i];
                !s.valid
                    || s.off_screen
                    || (!aois.iter().any(|a| inside(&a.rect(), s.x, s.y))
                        && !visible.iter().any(|w| inside(&w.region.rect, s.x, s.y)))
            });
        match (&mut open, lost) {
            (Some((_, len)), true) => *len += 1.0,
            (None, true) => open = Some((t, 1.0)),
            (Some(_), false) => {
                let ep = open.take().unwrap();
                if ep.1 >= gap_ms {
                    episodes.push(ep);
                }
            }
            (None, false) => {}
        }
    }
    if let Some(ep) = open {
        if ep.1 >= gap_ms {
            episodes.push(ep);
        }
    }
    episodes
}

pub fn share(flags: &[bool], positive: bool) -> Option<f64> {
    (!flags.is_empty()).then(|| flags.iter().filter(|f| **f == positive).count() as f64 / flags.len() as f64)
}

/// Descending-count ranking by exhaustive pairwise comparison.
pub fn rank_by_comparison(counts: &[usize]) -> Vec<usize> {
    let mut order = Vec::new();
    let mut left: Vec<usize> = (0..counts.len()).collect();
    while !left.is_empty() {
        let mut best = left[0];
        for &c in &left {
            if counts[c] > counts[best] || (counts[c] == counts[best] && c < best) {
                best = c;
            }
        }
        order.push(best);
        left.retain(|&c| c != best);
    }
    order
}

/// Every regular file below `dir` whose bytes contain `needle`.
pub fn files_containing(dir: &Path, needle: &str) -> Vec<PathBuf> {
    let mut hits = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let Ok(entries) = fs::read_dir(&d) else { continue };
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if let Ok(bytes) = fs::read(&p) {
                if bytes.windows(needle.len()).any(|w| w == needle.as_bytes()) {
                    hits.push(p);
                }
            }
        }
    }
    hits.sort();
    hits
}

/// A small session with integral timestamps plus a random AoI layout,
/// reproducible from `seed`. Shapes vary with the seed so a corpus covers
/// dense and sparse stimuli, long blinks and off-screen looks.
pub fn fuzz_case(seed: u64, max_samples: usize) -> (SessionLog, AoiConfig) {
    use gazelens::synth::{synthetic_aois, synthetic_session, SessionShape};
    let pick = |k: u64, n: u64| (seed.wrapping_mul(6364136223846793005).wrapping_add(k * 1442695040888963407) >> 33) % n;
    let shape = SessionShape {
        samples: 20 + pick(1, (max_samples.max(21) - 20) as u64) as usize,
        interval_ms: (8 + pick(2, 25)) as f64,
        jitter_ms: 0.0,
        stimulus_gap_ms: (200 + pick(3, 2500)) as f64,
        distractor_share: pick(4, 100) as f64 / 100.0,
        explicit_disappear: pick(5, 100) as f64 / 100.0,
        follow_stimulus: pick(6, 100) as f64 / 100.0,
        blink_rate: pick(7, 30) as f64 / 1000.0,
        off_screen: pick(8, 20) as f64 / 100.0,
        ..SessionShape::default()
    };
    let mut session = synthetic_session(&shape, seed);
    for e in &mut session.events {
        e.timestamp_ms = e.timestamp_ms.round();
    }
    // some logs repeat timestamps
    if pick(10, 4) == 0 {
        for i in (7..session.samples.len()).step_by(7) {
            session.samples[i].timestamp_ms = session.samples[i - 1].timestamp_ms;
        }
    }
    let aois = synthetic_aois(shape.screen_width, shape.screen_height, pick(9, 5) as usize, seed ^ 0x5eed);
    (session, aois)
}
