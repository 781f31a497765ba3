//! Dwell analysis and the attention metric suite.

mod attention;
mod dwell;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use attention::{
    attention_episodes, inhibitory_control, loss_of_focus, stimuli_expectancy, sustained_attention,
    windowed_attention, AttentionEpisode, DistractorEpisode, ExpectancyOutcome, FocusLossEpisode, WindowMetrics,
    WindowSpec,
};
pub use dwell::{dwell_analysis, DwellReport, Side, Timeline};

use crate::fixation::Fixation;
use crate::labeling::{SampleLabel, StimulusWindow};
use crate::session::SessionLog;

pub const DEFINITION_VERSION: &str = "engine definition v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricParams {
    pub expectancy_window_ms: f64,
    pub focus_gap_ms: f64,
    pub response_window_ms: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams { expectancy_window_ms: 500.0, focus_gap_ms: 2000.0, response_window_ms: 1000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSuite {
    pub definition_version: String,
    /// Plain-language statement of each metric's operational definition.
    pub definitions: BTreeMap<String, String>,
    pub session_ms: f64,
    pub fixation_count: usize,
    #[serde(with = "absent")]
    pub mean_fixation_ms: Option<f64>,
    #[serde(with = "absent")]
    pub sustained_attention_score: Option<f64>,
    #[serde(with = "absent")]
    pub expectancy_rate: Option<f64>,
    #[serde(with = "absent")]
    pub inhibitory_control_score: Option<f64>,
    pub focus_loss_episodes: Vec<FocusLossEpisode>,
    pub focus_loss_ms: f64,
    pub attention_episodes: Vec<AttentionEpisode>,
    pub expectancy_outcomes: Vec<ExpectancyOutcome>,
    pub distractor_episodes: Vec<DistractorEpisode>,
}

/// Undefined scores serialize as the string `"absent"` rather than `null`.
pub mod absent {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub const MARKER: &str = "absent";

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Value(f64),
        Marker(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => x.serialize(s),
            None => s.serialize_str(MARKER),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            Some(Repr::Value(x)) => Ok(Some(x)),
            Some(Repr::Marker(m)) if m == MARKER => Ok(None),
            None => Ok(None),
            Some(Repr::Marker(m)) => Err(serde::de::Error::custom(format!("expected a number or \"absent\", got {m:?}"))),
        }
    }
}

fn definitions(params: &MetricParams) -> BTreeMap<String, String> {
    let mut d = BTreeMap::new();
    d.insert(
        "sustained_attention_score".into(),
        format!(
            "{DEFINITION_VERSION}: share of target appearances during whose visibility a fixation landed in the target region"
        ),
    );
    d.insert(
        "expectancy_rate".into(),
        format!(
            "{DEFINITION_VERSION}: share of target appearances preceded by gaze inside the target region within {} ms before onset",
            params.expectancy_window_ms
        ),
    );
    d.insert(
        "focus_loss_episodes".into(),
        format!(
            "{DEFINITION_VERSION}: intervals of at least {} ms with a stimulus visible while gaze was lost, off-screen, or outside every AoI",
            params.focus_gap_ms
        ),
    );
    d.insert(
        "inhibitory_control_score".into(),
        format!(
            "{DEFINITION_VERSION}: share of distractor appearances that drew no fixation into their region within {} ms",
            params.response_window_ms
        ),
    );
    d
}

pub fn compute_metrics(
    session: &SessionLog,
    labels: &[SampleLabel],
    windows: &[StimulusWindow],
    fixations: &[Fixation],
    timeline: &Timeline,
    params: &MetricParams,
) -> MetricSuite {
    let attention_episodes = attention_episodes(windows, fixations);
    let (expectancy_rate, expectancy_outcomes) =
        stimuli_expectancy(windows, session, timeline, params.expectancy_window_ms);
    let focus_loss_episodes = loss_of_focus(session, labels, windows, timeline, params.focus_gap_ms);
    let (inhibitory_control_score, distractor_episodes) =
        inhibitory_control(windows, fixations, params.response_window_ms);
    let mean_fixation_ms = (!fixations.is_empty())
        .then(|| fixations.iter().map(|f| f.duration_ms).sum::<f64>() / fixations.len() as f64);
    MetricSuite {
        definition_version: DEFINITION_VERSION.into(),
        definitions: definitions(params),
        session_ms: timeline.end_ms - timeline.start_ms,
        fixation_count: fixations.len(),
        mean_fixation_ms,
        sustained_attention_score: sustained_attention(&attention_episodes),
        expectancy_rate,
        inhibitory_control_score,
        focus_loss_ms: focus_loss_episodes.iter().fold(0.0, |acc, e| acc + e.duration_ms),
        focus_loss_episodes,
        attention_episodes,
        expectancy_outcomes,
        distractor_episodes,
    }
}
