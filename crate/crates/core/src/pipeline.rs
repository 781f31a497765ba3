//! One-session analysis: everything from a parsed log to insights and
//! adaptation signals.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adaptation::{replay_batch, AdaptationError, AdaptationPolicy, AdaptationSignal, AdaptationTrace};
use crate::cluster::{cluster_gaze, ClusterError, ClusterModel, DEFAULT_K};
use crate::fixation::{detect_fixations, Fixation, FixationParams};
use crate::insight::{default_rules, derive_insights, render_report, Insight, Report, ReportMeta, Rule, RuleError};
use crate::labeling::{label_samples, visibility_windows, ConsistencyReport, QuadrantMap, SampleLabel, StimulusWindow};
use crate::metrics::{
    compute_metrics, dwell_analysis, windowed_attention, DwellReport, MetricParams, MetricSuite, Timeline,
    WindowMetrics,
};
use crate::session::{derive_disappearances, AoiConfig, SessionLog, DEFAULT_VISIBILITY_TIMEOUT_MS};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterSource {
    Samples,
    Fixations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub fixation: FixationParams,
    pub visibility_timeout_ms: f64,
    pub metrics: MetricParams,
    pub k: usize,
    pub seed: u64,
    pub cluster_source: ClusterSource,
    pub quadrant_map: QuadrantMap,
    pub rules: Vec<Rule>,
    pub policy: AdaptationPolicy,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            fixation: FixationParams::default(),
            visibility_timeout_ms: DEFAULT_VISIBILITY_TIMEOUT_MS,
            metrics: MetricParams::default(),
            k: DEFAULT_K,
            seed: DEFAULT_SEED,
            cluster_source: ClusterSource::Samples,
            quadrant_map: QuadrantMap::default(),
            rules: default_rules(),
            policy: AdaptationPolicy::default(),
        }
    }
}

impl AnalysisConfig {
    /// SHA-256 over the canonical JSON form of the configuration.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config is serializable");
        hex::encode(Sha256::digest(json))
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Adaptation(#[from] AdaptationError),
}

/// A point handed to clustering, with the time it was recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterPoint {
    pub timestamp_ms: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub config: AnalysisConfig,
    pub config_hash: String,
    pub session: SessionLog,
    pub aois: AoiConfig,
    pub stimulus_windows: Vec<StimulusWindow>,
    pub labels: Vec<SampleLabel>,
    pub consistency: Option<ConsistencyReport>,
    pub fixations: Vec<Fixation>,
    pub timeline: Timeline,
    pub dwell: DwellReport,
    pub metrics: MetricSuite,
    pub cluster_points: Vec<ClusterPoint>,
    /// Absent, with the reason, when there are fewer points than clusters.
    pub clusters: Result<ClusterModel, ClusterError>,
    pub window_metrics: Vec<WindowMetrics>,
    pub trace: AdaptationTrace,
    pub signals: Vec<AdaptationSignal>,
    pub insights: Vec<Insight>,
}

impl Analysis {
    pub fn report_meta(&self) -> ReportMeta {
        ReportMeta {
            participant_pseudonym: self.session.participant_pseudonym.clone(),
            config_hash: self.config_hash.clone(),
            sample_count: self.session.samples.len(),
            valid_sample_count: self.session.valid_count(),
            cluster_ranking: self.clusters.as_ref().ok().map(ClusterModel::ranking_statement),
        }
    }

    pub fn report(&self) -> Report {
        render_report(&self.insights, &self.metrics, &self.dwell, &self.report_meta())
    }
}

pub fn analyze(session: &SessionLog, aois: &AoiConfig, config: &AnalysisConfig) -> Result<Analysis, AnalysisError> {
    config.policy.validate()?;
    let timeline = Timeline::new(session);
    let events = derive_disappearances(&session.events, config.visibility_timeout_ms, timeline.end_ms);
    let stimulus_windows = visibility_windows(&events, aois, timeline.end_ms);
    let labelled = label_samples(session, aois, &stimulus_windows, &config.quadrant_map);
    let fixations = detect_fixations(&session.samples, &config.fixation);
    let dwell = dwell_analysis(session, &labelled.labels, aois, &timeline);
    let metrics = compute_metrics(session, &labelled.labels, &stimulus_windows, &fixations, &timeline, &config.metrics);

    let cluster_points: Vec<ClusterPoint> = match config.cluster_source {
        ClusterSource::Samples => session
            .samples
            .iter()
            .filter(|s| s.valid)
            .map(|s| ClusterPoint { timestamp_ms: s.timestamp_ms, x: s.x, y: s.y })
            .collect(),
        ClusterSource::Fixations => fixations
            .iter()
            .map(|f| ClusterPoint { timestamp_ms: f.start_ms, x: f.centroid_x, y: f.centroid_y })
            .collect(),
    };
    let coords: Vec<[f64; 2]> = cluster_points.iter().map(|p| [p.x, p.y]).collect();
    let clusters = cluster_gaze(&coords, config.k, config.seed);

    let window_metrics =
        windowed_attention(&stimulus_windows, &fixations, timeline.start_ms, timeline.end_ms, &config.policy.window);
    let trace = AdaptationTrace::new(&stimulus_windows, &fixations, &window_metrics);
    let signals = replay_batch(&trace, &config.policy)?;
    let insights = derive_insights(&metrics, &dwell, &config.rules)?;

    Ok(Analysis {
        config: config.clone(),
        config_hash: config.config_hash(),
        session: session.clone(),
        aois: aois.clone(),
        stimulus_windows,
        labels: labelled.labels,
        consistency: labelled.consistency,
        fixations,
        timeline,
        dwell,
        metrics,
        cluster_points,
        clusters,
        window_metrics,
        trace,
        signals,
        insights,
    })
}
