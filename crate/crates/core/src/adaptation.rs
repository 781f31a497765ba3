//! Game-adaptation signals: stimulus highlighting and difficulty changes.
//!
//! Two evaluators produce the same signal list. [`AdaptationEvaluator`]
//! consumes a time-ordered stream one input at a time; [`replay_batch`]
//! works from the whole trace at once. Signals are ordered by timestamp,
//! then kind, then target.

use std::cmp::Ordering;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixation::Fixation;
use crate::insight::{Comparator, Evidence};
use crate::labeling::StimulusWindow;
use crate::metrics::{WindowMetrics, WindowSpec};
use crate::session::{Rect, StimulusRole};

pub const POLICY_VERSION: &str = "adaptation policy v1";
pub const WINDOW_METRIC: &str = "windowed_sustained_attention_score";
pub const NO_CONTACT_METRIC: &str = "no_contact_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptationPolicy {
    pub version: String,
    pub highlight_delay_ms: f64,
    pub window: WindowSpec,
    pub low_threshold: f64,
    pub low_windows: usize,
    pub high_threshold: f64,
    pub high_windows: usize,
    /// Minimum spacing between two difficulty signals.
    pub refractory_ms: f64,
}

impl Default for AdaptationPolicy {
    fn default() -> Self {
        AdaptationPolicy {
            version: POLICY_VERSION.into(),
            highlight_delay_ms: 1500.0,
            window: WindowSpec::default(),
            low_threshold: 0.3,
            low_windows: 2,
            high_threshold: 0.85,
            high_windows: 3,
            refractory_ms: 30_000.0,
        }
    }
}

impl AdaptationPolicy {
    pub fn validate(&self) -> Result<(), AdaptationError> {
        let ok = self.highlight_delay_ms > 0.0
            && self.low_windows > 0
            && self.high_windows > 0
            && self.refractory_ms >= 0.0
            && self.window.length_ms > 0.0
            && self.window.step_ms > 0.0;
        if ok {
            Ok(())
        } else {
            Err(AdaptationError::InvalidPolicy)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdaptationError {
    #[error("input at {got} ms arrived after {clock} ms; streams must be time-ordered")]
    OutOfOrder { got: f64, clock: f64 },
    #[error("adaptation policy needs positive delay, window counts and window geometry")]
    InvalidPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SignalKind {
    DifficultyDown,
    DifficultyUp,
    HighlightStimulus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationSignal {
    pub timestamp_ms: f64,
    pub kind: SignalKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_aoi: Option<String>,
    pub reason: Evidence,
}

impl AdaptationSignal {
    pub fn re_evaluate(&self) -> bool {
        let target_ok = match self.kind {
            SignalKind::HighlightStimulus => self.target_aoi.is_some(),
            _ => true,
        };
        target_ok && self.reason.holds()
    }
}

fn canonical(a: &AdaptationSignal, b: &AdaptationSignal) -> Ordering {
    a.timestamp_ms
        .total_cmp(&b.timestamp_ms)
        .then(a.kind.cmp(&b.kind))
        .then(a.target_aoi.cmp(&b.target_aoi))
        .then(a.reason.event_refs.cmp(&b.reason.event_refs))
}

/// A target stimulus as the adaptation engine sees it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedStimulus {
    pub event_ref: String,
    pub region_id: String,
    pub rect: Rect,
    pub appear_ms: f64,
    pub disappear_ms: f64,
}

/// Everything the adaptation engine consumes for one session.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdaptationTrace {
    pub stimuli: Vec<TrackedStimulus>,
    pub fixations: Vec<Fixation>,
    pub windows: Vec<WindowMetrics>,
}

impl AdaptationTrace {
    pub fn new(windows: &[StimulusWindow], fixations: &[Fixation], window_metrics: &[WindowMetrics]) -> Self {
        AdaptationTrace {
            stimuli: windows
                .iter()
                .filter(|w| w.role == StimulusRole::Target && w.disappear_ms > w.appear_ms)
                .map(|w| TrackedStimulus {
                    event_ref: w.event_ref.clone(),
                    region_id: w.region.region_id.clone(),
                    rect: w.region.rect,
                    appear_ms: w.appear_ms,
                    disappear_ms: w.disappear_ms,
                })
                .collect(),
            fixations: fixations.to_vec(),
            windows: window_metrics.to_vec(),
        }
    }

    /// The trace as a time-ordered input stream. At equal times, hides come
    /// before shows, shows before fixations, fixations before window closes.
    pub fn to_stream(&self) -> Vec<AdaptationInput> {
        let mut items: Vec<AdaptationInput> = Vec::new();
        for s in &self.stimuli {
            items.push(AdaptationInput::StimulusShown { stimulus: s.clone() });
            items.push(AdaptationInput::StimulusHidden { at_ms: s.disappear_ms, event_ref: s.event_ref.clone() });
        }
        items.extend(self.fixations.iter().cloned().map(|fixation| AdaptationInput::Fixation { fixation }));
        items.extend(self.windows.iter().cloned().map(|window| AdaptationInput::WindowClosed { window }));
        items.sort_by(|a, b| a.time_ms().total_cmp(&b.time_ms()).then(a.rank().cmp(&b.rank())));
        items
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AdaptationInput {
    StimulusShown { stimulus: TrackedStimulus },
    StimulusHidden { at_ms: f64, event_ref: String },
    Fixation { fixation: Fixation },
    WindowClosed { window: WindowMetrics },
}

impl AdaptationInput {
    pub fn time_ms(&self) -> f64 {
        match self {
            AdaptationInput::StimulusShown { stimulus } => stimulus.appear_ms,
            AdaptationInput::StimulusHidden { at_ms, .. } => *at_ms,
            AdaptationInput::Fixation { fixation } => fixation.start_ms,
            AdaptationInput::WindowClosed { window } => window.end_ms,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            AdaptationInput::StimulusHidden { .. } => 0,
            AdaptationInput::StimulusShown { .. } => 1,
            AdaptationInput::Fixation { .. } => 2,
            AdaptationInput::WindowClosed { .. } => 3,
        }
    }
}

fn highlight(policy: &AdaptationPolicy, at: f64, region_id: &str, event_ref: &str) -> AdaptationSignal {
    AdaptationSignal {
        timestamp_ms: at,
        kind: SignalKind::HighlightStimulus,
        target_aoi: Some(region_id.to_string()),
        reason: Evidence {
            metric_name: NO_CONTACT_METRIC.into(),
            value: policy.highlight_delay_ms,
            comparator: Comparator::Ge,
            threshold: policy.highlight_delay_ms,
            observations: Vec::new(),
            sample_range: None,
            event_refs: vec![event_ref.to_string()],
        },
    }
}

fn difficulty(policy: &AdaptationPolicy, at: f64, down: bool, run: &[(f64, String)]) -> AdaptationSignal {
    let scores: Vec<f64> = run.iter().map(|(s, _)| *s).collect();
    let (kind, comparator, threshold, value) = if down {
        (SignalKind::DifficultyDown, Comparator::Lt, policy.low_threshold, scores.iter().copied().fold(f64::MIN, f64::max))
    } else {
        (SignalKind::DifficultyUp, Comparator::Gt, policy.high_threshold, scores.iter().copied().fold(f64::MAX, f64::min))
    };
    AdaptationSignal {
        timestamp_ms: at,
        kind,
        target_aoi: None,
        reason: Evidence {
            metric_name: WINDOW_METRIC.into(),
            value,
            comparator,
            threshold,
            observations: scores,
            sample_range: None,
            event_refs: run.iter().map(|(_, id)| id.clone()).collect(),
        },
    }
}

struct ActiveStimulus {
    stimulus: TrackedStimulus,
    /// Start of the current stretch without fixation contact.
    gap_start: f64,
    fired: bool,
}

/// Single-consumer streaming evaluator. Signals are released once the input
/// clock has moved past their timestamp, so the concatenated output of
/// [`push`](Self::push) and [`finish`](Self::finish) is canonically ordered.
pub struct AdaptationEvaluator {
    policy: AdaptationPolicy,
    clock: f64,
    active: Vec<ActiveStimulus>,
    last_fixation: Option<Fixation>,
    low_run: Vec<(f64, String)>,
    high_run: Vec<(f64, String)>,
    last_difficulty_ms: Option<f64>,
    pending: Vec<AdaptationSignal>,
}

impl AdaptationEvaluator {
    pub fn new(policy: AdaptationPolicy) -> Result<Self, AdaptationError> {
        policy.validate()?;
        Ok(AdaptationEvaluator {
            policy,
            clock: f64::NEG_INFINITY,
            active: Vec::new(),
            last_fixation: None,
            low_run: Vec::new(),
            high_run: Vec::new(),
            last_difficulty_ms: None,
            pending: Vec::new(),
        })
    }

    pub fn push(&mut self, input: &AdaptationInput) -> Result<Vec<AdaptationSignal>, AdaptationError> {
        let now = input.time_ms();
        if now < self.clock {
            return Err(AdaptationError::OutOfOrder { got: now, clock: self.clock });
        }
        self.clock = now;
        let delay = self.policy.highlight_delay_ms;
        for a in self.active.iter_mut().filter(|a| !a.fired && a.gap_start + delay < now) {
            a.fired = true;
            self.pending.push(highlight(&self.policy, a.gap_start + delay, &a.stimulus.region_id, &a.stimulus.event_ref));
        }
        let released = self.release(|ts| ts < now);

        match input {
            AdaptationInput::StimulusHidden { event_ref, .. } => {
                self.active.retain(|a| &a.stimulus.event_ref != event_ref);
            }
            AdaptationInput::StimulusShown { stimulus } => {
                let mut gap_start = stimulus.appear_ms;
                if let Some(f) = &self.last_fixation {
                    if f.end_ms() >= stimulus.appear_ms && stimulus.rect.contains(f.centroid_x, f.centroid_y) {
                        gap_start = gap_start.max(f.end_ms());
                    }
                }
                self.active.push(ActiveStimulus { stimulus: stimulus.clone(), gap_start, fired: false });
            }
            AdaptationInput::Fixation { fixation } => {
                for a in self.active.iter_mut() {
                    if !a.stimulus.rect.contains(fixation.centroid_x, fixation.centroid_y) {
                        continue;
                    }
                    if !a.fired && a.gap_start + delay <= fixation.start_ms {
                        self.pending.push(highlight(
                            &self.policy,
                            a.gap_start + delay,
                            &a.stimulus.region_id,
                            &a.stimulus.event_ref,
                        ));
                    }
                    a.gap_start = a.gap_start.max(fixation.end_ms());
                    a.fired = false;
                }
                self.last_fixation = Some(fixation.clone());
            }
            AdaptationInput::WindowClosed { window } => self.close_window(window),
        }
        Ok(released)
    }

    fn close_window(&mut self, window: &WindowMetrics) {
        let p = &self.policy;
        let score = window.sustained_attention_score;
        match score {
            Some(s) if s < p.low_threshold => self.low_run.push((s, window.window_id.clone())),
            _ => self.low_run.clear(),
        }
        match score {
            Some(s) if s > p.high_threshold => self.high_run.push((s, window.window_id.clone())),
            _ => self.high_run.clear(),
        }
        let now = window.end_ms;
        let allowed = |last: Option<f64>| last.is_none_or(|l| now - l >= p.refractory_ms);
        if self.low_run.len() >= p.low_windows && allowed(self.last_difficulty_ms) {
            let run = &self.low_run[self.low_run.len() - p.low_windows..];
            self.pending.push(difficulty(p, now, true, run));
            self.low_run.clear();
            self.last_difficulty_ms = Some(now);
        }
        if self.high_run.len() >= p.high_windows && allowed(self.last_difficulty_ms) {
            let run = &self.high_run[self.high_run.len() - p.high_windows..];
            self.pending.push(difficulty(p, now, false, run));
            self.high_run.clear();
            self.last_difficulty_ms = Some(now);
        }
    }

    fn release(&mut self, ready: impl Fn(f64) -> bool) -> Vec<AdaptationSignal> {
        let (mut out, keep): (Vec<_>, Vec<_>) = self.pending.drain(..).partition(|s| ready(s.timestamp_ms));
        self.pending = keep;
        out.sort_by(canonical);
        out
    }

    /// End of stream: stimuli still visible fire if their delay elapsed.
    pub fn finish(mut self) -> Vec<AdaptationSignal> {
        let delay = self.policy.highlight_delay_ms;
        for a in self.active.iter_mut().filter(|a| !a.fired) {
            a.fired = true;
            self.pending.push(highlight(&self.policy, a.gap_start + delay, &a.stimulus.region_id, &a.stimulus.event_ref));
        }
        self.release(|_| true)
    }
}

/// Feed a whole input stream through [`AdaptationEvaluator`].
pub fn evaluate_stream(inputs: &[AdaptationInput], policy: &AdaptationPolicy) -> Result<Vec<AdaptationSignal>, AdaptationError> {
    let mut ev = AdaptationEvaluator::new(policy.clone())?;
    let mut out = Vec::new();
    for input in inputs {
        out.extend(ev.push(input)?);
    }
    out.extend(ev.finish());
    Ok(out)
}

/// Offline evaluation over the complete trace.
pub fn replay_batch(trace: &AdaptationTrace, policy: &AdaptationPolicy) -> Result<Vec<AdaptationSignal>, AdaptationError> {
    policy.validate()?;
    let mut out = Vec::new();
    let delay = policy.highlight_delay_ms;

    for s in &trace.stimuli {
        let mut contacts: Vec<&Fixation> = trace
            .fixations
            .iter()
            .filter(|f| s.rect.contains(f.centroid_x, f.centroid_y))
            .filter(|f| f.end_ms() >= s.appear_ms && f.start_ms < s.disappear_ms)
            .collect();
        contacts.sort_by(|a, b| a.start_ms.total_cmp(&b.start_ms));
        let mut gap = s.appear_ms;
        for c in contacts {
            if c.start_ms > gap && gap + delay <= c.start_ms {
                out.push(highlight(policy, gap + delay, &s.region_id, &s.event_ref));
            }
            gap = gap.max(c.end_ms());
        }
        if gap + delay < s.disappear_ms {
            out.push(highlight(policy, gap + delay, &s.region_id, &s.event_ref));
        }
    }

    let windows = &trace.windows;
    let qualifies_low = |w: &WindowMetrics| w.sustained_attention_score.is_some_and(|v| v < policy.low_threshold);
    let qualifies_high = |w: &WindowMetrics| w.sustained_attention_score.is_some_and(|v| v > policy.high_threshold);
    // index of the first window that may count towards the next run
    let mut low_floor = 0;
    let mut high_floor = 0;
    let mut last_change: Option<f64> = None;
    for i in 0..windows.len() {
        let run_len = |floor: usize, q: &dyn Fn(&WindowMetrics) -> bool| {
            (floor..=i).rev().take_while(|&j| q(&windows[j])).count()
        };
        let now = windows[i].end_ms;
        let allowed = last_change.is_none_or(|l| now - l >= policy.refractory_ms);
        let low = run_len(low_floor, &qualifies_low);
        if low >= policy.low_windows && allowed {
            let run: Vec<(f64, String)> = (i + 1 - policy.low_windows..=i)
                .map(|j| (windows[j].sustained_attention_score.unwrap(), windows[j].window_id.clone()))
                .collect();
            out.push(difficulty(policy, now, true, &run));
            low_floor = i + 1;
            last_change = Some(now);
        }
        let allowed = last_change.is_none_or(|l| now - l >= policy.refractory_ms);
        let high = run_len(high_floor, &qualifies_high);
        if high >= policy.high_windows && allowed {
            let run: Vec<(f64, String)> = (i + 1 - policy.high_windows..=i)
                .map(|j| (windows[j].sustained_attention_score.unwrap(), windows[j].window_id.clone()))
                .collect();
            out.push(difficulty(policy, now, false, &run));
            high_floor = i + 1;
            last_change = Some(now);
        }
    }

    out.sort_by(canonical);
    Ok(out)
}

/// Line-delimited JSON sink, one signal per line, flushed per signal.
pub struct SignalWriter<W: Write> {
    inner: W,
}

impl<W: Write> SignalWriter<W> {
    pub fn new(inner: W) -> Self {
        SignalWriter { inner }
    }

    pub fn write(&mut self, signal: &AdaptationSignal) -> io::Result<()> {
        serde_json::to_writer(&mut self.inner, signal)?;
        self.inner.write_all(b"\n")?;
        self.inner.flush()
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

pub fn signals_to_ndjson(signals: &[AdaptationSignal]) -> Vec<u8> {
    let mut w = SignalWriter::new(Vec::new());
    for s in signals {
        w.write(s).expect("writing to Vec cannot fail");
    }
    w.into_inner()
}
