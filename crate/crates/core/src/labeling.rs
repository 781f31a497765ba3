//! Per-sample geometric labeling: screen quadrant, AoI membership, active
//! stimulus, and the rendered `Qn-In AoI-<stimulus>` message.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::{AoiConfig, AoiDefinition, EventKind, Rect, SessionLog, StimulusEvent, StimulusRole};

/// Side of the square used as a stimulus region when no configured AoI
/// contains the stimulus position.
pub const DEFAULT_STIMULUS_SIDE_PX: f64 = 160.0;

pub const NO_STIMULI: &str = "No Stimuli";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrant {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4];

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::Q1 => "Q1",
            Quadrant::Q2 => "Q2",
            Quadrant::Q3 => "Q3",
            Quadrant::Q4 => "Q4",
        }
    }

    fn from_digit(d: u8) -> Option<Quadrant> {
        match d {
            b'1' => Some(Quadrant::Q1),
            b'2' => Some(Quadrant::Q2),
            b'3' => Some(Quadrant::Q3),
            b'4' => Some(Quadrant::Q4),
            _ => None,
        }
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which quadrant name each screen corner carries. The default puts Q3
/// top-left and Q4 top-right, matching the game's logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrantMap {
    pub top_left: Quadrant,
    pub top_right: Quadrant,
    pub bottom_left: Quadrant,
    pub bottom_right: Quadrant,
}

impl Default for QuadrantMap {
    fn default() -> Self {
        QuadrantMap {
            top_left: Quadrant::Q3,
            top_right: Quadrant::Q4,
            bottom_left: Quadrant::Q1,
            bottom_right: Quadrant::Q2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("point ({x}, {y}) outside {width}x{height} screen")]
    OutOfBounds { x: f64, y: f64, width: f64, height: f64 },
}

pub fn quadrant_of(x: f64, y: f64, screen_w: f64, screen_h: f64) -> Result<Quadrant, GeometryError> {
    quadrant_with_map(&QuadrantMap::default(), x, y, screen_w, screen_h)
}

/// Points on the vertical midline belong to the right half, points on the
/// horizontal midline to the bottom half.
pub fn quadrant_with_map(
    map: &QuadrantMap,
    x: f64,
    y: f64,
    screen_w: f64,
    screen_h: f64,
) -> Result<Quadrant, GeometryError> {
    let inside = (0.0..=screen_w).contains(&x) && (0.0..=screen_h).contains(&y);
    if !inside {
        return Err(GeometryError::OutOfBounds { x, y, width: screen_w, height: screen_h });
    }
    let left = x < screen_w / 2.0;
    let top = y < screen_h / 2.0;
    Ok(match (top, left) {
        (true, true) => map.top_left,
        (true, false) => map.top_right,
        (false, true) => map.bottom_left,
        (false, false) => map.bottom_right,
    })
}

/// Ids of every AoI whose closed rectangle contains the point, in
/// configuration order.
pub fn aoi_hits(x: f64, y: f64, aois: &AoiConfig) -> Vec<String> {
    aois.iter().filter(|a| a.rect().contains(x, y)).map(|a| a.aoi_id.clone()).collect()
}

/// Highest-priority AoI containing the point: Target before Distractor
/// before Neutral, then configuration order.
pub fn primary_hit(x: f64, y: f64, aois: &AoiConfig) -> Option<&AoiDefinition> {
    aois.iter()
        .enumerate()
        .filter(|(_, a)| a.rect().contains(x, y))
        .min_by_key(|(i, a)| (a.role.priority(), *i))
        .map(|(_, a)| a)
}

/// Screen region that counts as "looking at" a stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusRegion {
    /// Configured AoI id, or `stimulus:<object_id>` for the default square.
    pub region_id: String,
    pub configured: bool,
    pub rect: Rect,
}

pub fn stimulus_region(object_id: &str, obj_x: f64, obj_y: f64, aois: &AoiConfig) -> StimulusRegion {
    match primary_hit(obj_x, obj_y, aois) {
        Some(aoi) => StimulusRegion { region_id: aoi.aoi_id.clone(), configured: true, rect: aoi.rect() },
        None => StimulusRegion {
            region_id: format!("stimulus:{object_id}"),
            configured: false,
            rect: Rect::centered(obj_x, obj_y, DEFAULT_STIMULUS_SIDE_PX),
        },
    }
}

/// One visibility interval `[appear_ms, disappear_ms)` of a stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusWindow {
    pub event_ref: String,
    pub object_id: String,
    pub role: StimulusRole,
    pub appear_ms: f64,
    pub disappear_ms: f64,
    pub synthetic_end: bool,
    pub obj_x: f64,
    pub obj_y: f64,
    pub region: StimulusRegion,
}

impl StimulusWindow {
    pub fn visible_at(&self, t: f64) -> bool {
        self.appear_ms <= t && t < self.disappear_ms
    }
}

pub fn event_ref(object_id: &str, appear_ms: f64) -> String {
    format!("{object_id}@{appear_ms}")
}

/// Pair appearances with their disappearances. Expects the output of
/// [`crate::session::derive_disappearances`]; an appearance still open at the
/// end is closed at `session_end_ms`. Result is ordered by appearance.
pub fn visibility_windows(events: &[StimulusEvent], aois: &AoiConfig, session_end_ms: f64) -> Vec<StimulusWindow> {
    let mut out = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        if ev.kind != EventKind::Appear {
            continue;
        }
        let close = events[i + 1..]
            .iter()
            .find(|e| e.object_id == ev.object_id && e.kind == EventKind::Disappear);
        let (disappear_ms, synthetic_end) = match close {
            Some(e) => (e.timestamp_ms, e.synthetic),
            None => (session_end_ms.max(ev.timestamp_ms), true),
        };
        out.push(StimulusWindow {
            event_ref: event_ref(&ev.object_id, ev.timestamp_ms),
            object_id: ev.object_id.clone(),
            role: ev.role,
            appear_ms: ev.timestamp_ms,
            disappear_ms,
            synthetic_end,
            obj_x: ev.obj_x,
            obj_y: ev.obj_y,
            region: stimulus_region(&ev.object_id, ev.obj_x, ev.obj_y, aois),
        });
    }
    out
}

/// Sweeps a time-sorted query sequence over visibility windows.
pub(crate) struct ActiveSet<'w> {
    windows: Vec<&'w StimulusWindow>,
    next: usize,
    active: Vec<&'w StimulusWindow>,
}

impl<'w> ActiveSet<'w> {
    pub(crate) fn new(windows: &'w [StimulusWindow]) -> Self {
        let mut sorted: Vec<&StimulusWindow> = windows.iter().collect();
        sorted.sort_by(|a, b| a.appear_ms.total_cmp(&b.appear_ms));
        ActiveSet { windows: sorted, next: 0, active: Vec::new() }
    }

    /// Windows visible at `t`. Successive calls must not go back in time.
    pub(crate) fn at(&mut self, t: f64) -> &[&'w StimulusWindow] {
        while self.next < self.windows.len() && self.windows[self.next].appear_ms <= t {
            self.active.push(self.windows[self.next]);
            self.next += 1;
        }
        self.active.retain(|w| w.disappear_ms > t);
        &self.active
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleLabel {
    pub sample_index: usize,
    pub timestamp_ms: f64,
    pub x: f64,
    pub y: f64,
    pub quadrant: Quadrant,
    pub aoi_hits: Vec<String>,
    pub primary_aoi: Option<String>,
    /// Object id of the stimulus named in the message, if any is visible.
    pub stimulus: Option<String>,
    pub message: String,
}

pub fn render_message(quadrant: Quadrant, in_aoi: bool, stimulus: Option<&str>) -> String {
    let membership = if in_aoi { "In AoI" } else { "Not in AoI" };
    format!("{quadrant}-{membership}-{}", stimulus.unwrap_or(NO_STIMULI))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StimulusPart {
    Named(String),
    NoStimulus,
}

/// Tolerant reading of a logged message. Case, spacing and the
/// `In AoI` / `Not in AoI` / bare `AoI` variants are folded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedMessage {
    pub quadrant: Option<Quadrant>,
    /// `None` when the message does not say (e.g. `Q4-AoI-Mushroom`).
    pub in_aoi: Option<bool>,
    pub stimulus: Option<StimulusPart>,
}

impl ParsedMessage {
    pub fn parse(message: &str) -> ParsedMessage {
        let text = message.trim();
        let bytes = text.as_bytes();
        let quadrant = if bytes.len() >= 2 && bytes[0].eq_ignore_ascii_case(&b'q') {
            Quadrant::from_digit(bytes[1])
        } else {
            None
        };
        let rest = if quadrant.is_some() { &text[2..] } else { text };
        let folded: String = rest.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        let in_aoi = if folded.contains("notinaoi") {
            Some(false)
        } else if folded.contains("inaoi") {
            Some(true)
        } else {
            None
        };
        let lower = rest.to_ascii_lowercase();
        let tail = match lower.rfind("aoi") {
            Some(pos) => &rest[pos + 3..],
            None => "",
        };
        let tail = tail.trim_matches(|c: char| c == '-' || c.is_whitespace());
        let stimulus = if tail.is_empty() {
            None
        } else if tail.split_whitespace().collect::<String>().eq_ignore_ascii_case("nostimuli") {
            Some(StimulusPart::NoStimulus)
        } else {
            Some(StimulusPart::Named(tail.to_string()))
        };
        ParsedMessage { quadrant, in_aoi, stimulus }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowConsistency {
    pub sample_index: usize,
    pub source: String,
    pub recomputed: String,
    pub quadrant_agrees: bool,
    /// `None` when the source message does not state membership.
    pub membership_agrees: Option<bool>,
    /// Informational only; not part of `agrees`.
    pub stimulus_agrees: Option<bool>,
    pub agrees: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub agree: usize,
    pub disagree: usize,
    /// Rows with an empty message or an invalid sample.
    pub skipped: usize,
    pub rows: Vec<RowConsistency>,
}

impl ConsistencyReport {
    pub fn all_agree(&self) -> bool {
        self.disagree == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelOutput {
    pub labels: Vec<SampleLabel>,
    pub consistency: Option<ConsistencyReport>,
}

/// Label every valid sample. When the session carries source messages, each
/// is compared against the recomputed label on quadrant and, where the
/// source states it, AoI membership.
pub fn label_samples(
    session: &SessionLog,
    aois: &AoiConfig,
    windows: &[StimulusWindow],
    map: &QuadrantMap,
) -> LabelOutput {
    let w = f64::from(session.screen_width);
    let h = f64::from(session.screen_height);
    let mut active = ActiveSet::new(windows);
    let mut labels = Vec::with_capacity(session.samples.len());

    for (i, s) in session.samples.iter().enumerate() {
        if !s.valid {
            continue;
        }
        let quadrant = quadrant_with_map(map, s.x, s.y, w, h).expect("ingest clamps samples on screen");
        let hits = aoi_hits(s.x, s.y, aois);
        let primary = primary_hit(s.x, s.y, aois).map(|a| a.aoi_id.clone());
        let visible = active.at(s.timestamp_ms);
        // Prefer the latest-appearing stimulus under gaze, else the latest visible.
        let under_gaze = latest_appearing(visible.iter().copied().filter(|w| w.region.rect.contains(s.x, s.y)));
        let stimulus = under_gaze.or_else(|| latest_appearing(visible.iter().copied())).map(|w| w.object_id.clone());
        let message = render_message(quadrant, !hits.is_empty(), stimulus.as_deref());
        labels.push(SampleLabel {
            sample_index: i,
            timestamp_ms: s.timestamp_ms,
            x: s.x,
            y: s.y,
            quadrant,
            aoi_hits: hits,
            primary_aoi: primary,
            stimulus,
            message,
        });
    }

    let consistency = session.source_messages.as_ref().map(|msgs| check_consistency(msgs, &labels));
    LabelOutput { labels, consistency }
}

fn latest_appearing<'w>(windows: impl Iterator<Item = &'w StimulusWindow>) -> Option<&'w StimulusWindow> {
    windows.fold(None, |best: Option<&StimulusWindow>, w| match best {
        Some(b) if b.appear_ms >= w.appear_ms => Some(b),
        _ => Some(w),
    })
}

fn check_consistency(messages: &[String], labels: &[SampleLabel]) -> ConsistencyReport {
    let mut report = ConsistencyReport::default();
    let mut by_index = labels.iter().peekable();
    for (i, source) in messages.iter().enumerate() {
        while by_index.peek().is_some_and(|l| l.sample_index < i) {
            by_index.next();
        }
        let label = match by_index.peek() {
            Some(l) if l.sample_index == i => *l,
            _ => {
                report.skipped += 1;
                continue;
            }
        };
        if source.trim().is_empty() {
            report.skipped += 1;
            continue;
        }
        let parsed = ParsedMessage::parse(source);
        let quadrant_agrees = parsed.quadrant == Some(label.quadrant);
        let membership_agrees = parsed.in_aoi.map(|m| m == !label.aoi_hits.is_empty());
        let stimulus_agrees = parsed.stimulus.as_ref().map(|part| match (part, &label.stimulus) {
            (StimulusPart::NoStimulus, None) => true,
            (StimulusPart::Named(n), Some(s)) => n.eq_ignore_ascii_case(s),
            _ => false,
        });
        let agrees = quadrant_agrees && membership_agrees.unwrap_or(true);
        if agrees {
            report.agree += 1;
        } else {
            report.disagree += 1;
        }
        report.rows.push(RowConsistency {
            sample_index: i,
            source: source.clone(),
            recomputed: label.message.clone(),
            quadrant_agrees,
            membership_agrees,
            stimulus_agrees,
            agrees,
        });
    }
    report
}
