//! Stimulus-aligned attention measures. Every definition here is an
//! engine convention and is versioned through [`super::DEFINITION_VERSION`].

use serde::{Deserialize, Serialize};

use super::dwell::Timeline;
use crate::fixation::Fixation;
use crate::labeling::{ActiveSet, SampleLabel, StimulusWindow};
use crate::session::{Rect, SessionLog, StimulusRole};

fn in_region(f: &Fixation, rect: &Rect) -> bool {
    rect.contains(f.centroid_x, f.centroid_y)
}

/// Fixation `[start, end]` touches the half-open interval `[from, to)`.
fn touches(f: &Fixation, from: f64, to: f64) -> bool {
    f.start_ms < to && f.end_ms() >= from
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionEpisode {
    pub event_ref: String,
    pub object_id: String,
    pub region_id: String,
    pub appear_ms: f64,
    pub disappear_ms: f64,
    pub time_to_first_fixation_ms: Option<f64>,
    pub dwell_on_target_ms: f64,
    pub attended: bool,
}

/// One episode per target appearance. A target is attended when a fixation
/// whose centroid lies in the stimulus region overlaps its visibility window.
pub fn attention_episodes(windows: &[StimulusWindow], fixations: &[Fixation]) -> Vec<AttentionEpisode> {
    windows
        .iter()
        .filter(|w| w.role == StimulusRole::Target)
        .map(|w| {
            let mut first = None;
            let mut dwell = 0.0;
            for f in fixations.iter().filter(|f| in_region(f, &w.region.rect)) {
                if !touches(f, w.appear_ms, w.disappear_ms) {
                    continue;
                }
                let from = f.start_ms.max(w.appear_ms);
                let to = f.end_ms().min(w.disappear_ms);
                first.get_or_insert(from - w.appear_ms);
                dwell += (to - from).max(0.0);
            }
            AttentionEpisode {
                event_ref: w.event_ref.clone(),
                object_id: w.object_id.clone(),
                region_id: w.region.region_id.clone(),
                appear_ms: w.appear_ms,
                disappear_ms: w.disappear_ms,
                time_to_first_fixation_ms: first,
                dwell_on_target_ms: dwell,
                attended: first.is_some(),
            }
        })
        .collect()
}

/// Attended share of target appearances; absent without appearances.
pub fn sustained_attention(episodes: &[AttentionEpisode]) -> Option<f64> {
    if episodes.is_empty() {
        return None;
    }
    Some(episodes.iter().filter(|e| e.attended).count() as f64 / episodes.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectancyOutcome {
    pub event_ref: String,
    pub anticipated: bool,
}

/// A target appearance is anticipated when gaze rests inside its region at
/// any instant of `[appear - window_ms, appear)`. A sample holds its position
/// until the next sample.
pub fn stimuli_expectancy(
    windows: &[StimulusWindow],
    session: &SessionLog,
    timeline: &Timeline,
    window_ms: f64,
) -> (Option<f64>, Vec<ExpectancyOutcome>) {
    let samples = &session.samples;
    let outcomes: Vec<ExpectancyOutcome> = windows
        .iter()
        .filter(|w| w.role == StimulusRole::Target)
        .map(|w| {
            let from = w.appear_ms - window_ms;
            let to = w.appear_ms;
            // samples strictly before the appearance
            let upper = samples.partition_point(|s| s.timestamp_ms < to);
            let mut anticipated = false;
            for i in (0..upper).rev() {
                let s = &samples[i];
                let hold_end = s.timestamp_ms + timeline.durations[i];
                if hold_end <= from && s.timestamp_ms < from {
                    break;
                }
                if timeline.durations[i] > 0.0 && s.valid && w.region.rect.contains(s.x, s.y) {
                    anticipated = true;
                    break;
                }
            }
            ExpectancyOutcome { event_ref: w.event_ref.clone(), anticipated }
        })
        .collect();
    let rate = (!outcomes.is_empty())
        .then(|| outcomes.iter().filter(|o| o.anticipated).count() as f64 / outcomes.len() as f64);
    (rate, outcomes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusLossEpisode {
    pub start_ms: f64,
    pub duration_ms: f64,
    pub first_sample: usize,
    pub last_sample: usize,
}

/// Maximal intervals in which some stimulus is visible while gaze is lost,
/// off-screen, or outside every configured AoI and every visible stimulus
/// region. Only intervals lasting at least `gap_threshold_ms` are reported.
pub fn loss_of_focus(
    session: &SessionLog,
    labels: &[SampleLabel],
    windows: &[StimulusWindow],
    timeline: &Timeline,
    gap_threshold_ms: f64,
) -> Vec<FocusLossEpisode> {
    let mut boundaries: Vec<f64> = windows.iter().flat_map(|w| [w.appear_ms, w.disappear_ms]).collect();
    boundaries.sort_by(f64::total_cmp);
    boundaries.dedup();

    let mut in_aoi = vec![false; session.samples.len()];
    for l in labels {
        in_aoi[l.sample_index] = !l.aoi_hits.is_empty();
    }

    let mut active = ActiveSet::new(windows);
    let mut episodes = Vec::new();
    let mut open: Option<FocusLossEpisode> = None;

    let close = |open: &mut Option<FocusLossEpisode>, episodes: &mut Vec<FocusLossEpisode>| {
        if let Some(ep) = open.take() {
            if ep.duration_ms >= gap_threshold_ms {
                episodes.push(ep);
            }
        }
    };

    for (i, (s, &dur)) in session.samples.iter().zip(&timeline.durations).enumerate() {
        let seg_start = s.timestamp_ms;
        let seg_end = seg_start + dur;
        if dur <= 0.0 {
            continue;
        }
        // cut the hold interval at visibility changes
        let lo = boundaries.partition_point(|b| *b <= seg_start);
        let hi = boundaries.partition_point(|b| *b < seg_end);
        let cuts = std::iter::once(seg_start).chain(boundaries[lo..hi].iter().copied()).chain(std::iter::once(seg_end));
        let cuts: Vec<f64> = cuts.collect();
        for piece in cuts.windows(2) {
            let (a, b) = (piece[0], piece[1]);
            if b <= a {
                continue;
            }
            let visible = active.at(a);
            let lost = !visible.is_empty()
                && (!s.valid
                    || s.off_screen
                    || (!in_aoi[i] && !visible.iter().any(|w| w.region.rect.contains(s.x, s.y))));
            match (&mut open, lost) {
                (Some(ep), true) => {
                    ep.duration_ms = b - ep.start_ms;
                    ep.last_sample = i;
                }
                (None, true) => {
                    open = Some(FocusLossEpisode { start_ms: a, duration_ms: b - a, first_sample: i, last_sample: i });
                }
                (_, false) => close(&mut open, &mut episodes),
            }
        }
    }
    close(&mut open, &mut episodes);
    episodes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistractorEpisode {
    pub event_ref: String,
    pub object_id: String,
    pub region_id: String,
    pub appear_ms: f64,
    pub looked: bool,
    pub first_look_ms: Option<f64>,
}

/// Share of distractor appearances that drew no fixation into their region
/// within `response_window_ms` of appearing. Absent without distractors.
pub fn inhibitory_control(
    windows: &[StimulusWindow],
    fixations: &[Fixation],
    response_window_ms: f64,
) -> (Option<f64>, Vec<DistractorEpisode>) {
    let episodes: Vec<DistractorEpisode> = windows
        .iter()
        .filter(|w| w.role == StimulusRole::Distractor)
        .map(|w| {
            let deadline = w.appear_ms + response_window_ms;
            let first = fixations
                .iter()
                .filter(|f| in_region(f, &w.region.rect))
                .find(|f| f.start_ms <= deadline && f.end_ms() >= w.appear_ms)
                .map(|f| f.start_ms.max(w.appear_ms));
            DistractorEpisode {
                event_ref: w.event_ref.clone(),
                object_id: w.object_id.clone(),
                region_id: w.region.region_id.clone(),
                appear_ms: w.appear_ms,
                looked: first.is_some(),
                first_look_ms: first,
            }
        })
        .collect();
    let score = (!episodes.is_empty())
        .then(|| episodes.iter().filter(|e| !e.looked).count() as f64 / episodes.len() as f64);
    (score, episodes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length_ms: f64,
    pub step_ms: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { length_ms: 10_000.0, step_ms: 2_000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMetrics {
    pub window_id: String,
    pub start_ms: f64,
    pub end_ms: f64,
    pub events: usize,
    pub attended: usize,
    pub sustained_attention_score: Option<f64>,
}

/// Sustained attention over complete sliding windows `[start, start + length)`
/// laid from the session start. A target counts in a window when its
/// visibility overlaps the window, and as attended when a fixation contact
/// falls inside that overlap.
pub fn windowed_attention(
    windows: &[StimulusWindow],
    fixations: &[Fixation],
    session_start_ms: f64,
    session_end_ms: f64,
    spec: &WindowSpec,
) -> Vec<WindowMetrics> {
    let mut out = Vec::new();
    if spec.step_ms <= 0.0 || spec.length_ms <= 0.0 {
        return out;
    }
    let targets: Vec<(&StimulusWindow, Vec<&Fixation>)> = windows
        .iter()
        .filter(|w| w.role == StimulusRole::Target)
        .map(|w| {
            let contacts = fixations
                .iter()
                .filter(|f| in_region(f, &w.region.rect) && touches(f, w.appear_ms, w.disappear_ms))
                .collect();
            (w, contacts)
        })
        .collect();
    let mut k = 0u64;
    loop {
        let w0 = session_start_ms + k as f64 * spec.step_ms;
        let w1 = w0 + spec.length_ms;
        if w1 > session_end_ms {
            break;
        }
        let mut events = 0;
        let mut attended = 0;
        for (t, contacts) in &targets {
            let from = t.appear_ms.max(w0);
            let to = t.disappear_ms.min(w1);
            if from >= to {
                continue;
            }
            events += 1;
            if contacts.iter().any(|f| touches(f, from, to)) {
                attended += 1;
            }
        }
        out.push(WindowMetrics {
            window_id: format!("window@{w0}-{w1}"),
            start_ms: w0,
            end_ms: w1,
            events,
            attended,
            sustained_attention_score: (events > 0).then(|| attended as f64 / events as f64),
        });
        k += 1;
    }
    out
}
