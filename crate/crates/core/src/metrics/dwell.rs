use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::labeling::{Quadrant, SampleLabel};
use crate::session::{AoiConfig, SessionLog};

/// Per-sample time attribution. Each sample owns the interval up to the next
/// sample; the last one gets the median inter-sample interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub durations: Vec<f64>,
    pub start_ms: f64,
    pub end_ms: f64,
    pub median_interval_ms: f64,
}

impl Timeline {
    pub fn new(session: &SessionLog) -> Self {
        let ts: Vec<f64> = session.samples.iter().map(|s| s.timestamp_ms).collect();
        let mut gaps: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).collect();
        let mut durations = gaps.clone();
        gaps.sort_by(f64::total_cmp);
        let median = match gaps.len() {
            0 => 0.0,
            n if n % 2 == 1 => gaps[n / 2],
            n => (gaps[n / 2 - 1] + gaps[n / 2]) / 2.0,
        };
        if !ts.is_empty() {
            durations.push(median);
        }
        let start_ms = ts.first().copied().unwrap_or(0.0);
        let end_ms = ts.last().map_or(0.0, |t| t + median);
        Timeline { durations, start_ms, end_ms, median_interval_ms: median }
    }

    /// Largest gap between consecutive samples; the slack allowed when
    /// comparing interval metrics against sampled replays.
    pub fn max_interval_ms(&self) -> f64 {
        self.durations.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwellReport {
    pub total_ms: f64,
    pub invalid_ms: f64,
    /// Valid gaze outside every configured AoI.
    pub non_aoi_ms: f64,
    /// Inclusive dwell: a sample inside overlapping AoIs counts for each.
    pub aoi_ms: BTreeMap<String, f64>,
    /// Exclusive dwell: each sample counts once, for its highest-priority AoI.
    pub aoi_exclusive_ms: BTreeMap<String, f64>,
    pub quadrant_ms: BTreeMap<Quadrant, f64>,
    pub left_ms: f64,
    pub right_ms: f64,
    /// Share of valid gaze time on the left half of the screen.
    pub left_fraction: Option<f64>,
    pub right_fraction: Option<f64>,
    pub dominant_side: Option<Side>,
    pub dominant_quadrant: Option<Quadrant>,
    pub dominant_quadrant_fraction: Option<f64>,
}

impl DwellReport {
    /// `sum(exclusive AoI) + non-AoI + invalid - total`; zero up to rounding.
    pub fn conservation_error(&self) -> f64 {
        self.aoi_exclusive_ms.values().sum::<f64>() + self.non_aoi_ms + self.invalid_ms - self.total_ms
    }

    pub fn valid_ms(&self) -> f64 {
        self.total_ms - self.invalid_ms
    }
}

pub fn dwell_analysis(session: &SessionLog, labels: &[SampleLabel], aois: &AoiConfig, timeline: &Timeline) -> DwellReport {
    let mut aoi_ms: BTreeMap<String, f64> = aois.iter().map(|a| (a.aoi_id.clone(), 0.0)).collect();
    let mut aoi_exclusive_ms = aoi_ms.clone();
    let mut quadrant_ms: BTreeMap<Quadrant, f64> = Quadrant::ALL.iter().map(|q| (*q, 0.0)).collect();
    let (mut total, mut invalid, mut non_aoi, mut left, mut right) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let half_w = f64::from(session.screen_width) / 2.0;

    let mut labels = labels.iter().peekable();
    for (i, (s, &dur)) in session.samples.iter().zip(&timeline.durations).enumerate() {
        total += dur;
        let label = match labels.peek() {
            Some(l) if l.sample_index == i => labels.next(),
            _ => None,
        };
        let Some(label) = label.filter(|_| s.valid) else {
            invalid += dur;
            continue;
        };
        *quadrant_ms.get_mut(&label.quadrant).expect("all quadrants present") += dur;
        if s.x < half_w {
            left += dur;
        } else {
            right += dur;
        }
        for id in &label.aoi_hits {
            *aoi_ms.get_mut(id).expect("hit ids come from config") += dur;
        }
        match &label.primary_aoi {
            Some(id) => *aoi_exclusive_ms.get_mut(id).expect("hit ids come from config") += dur,
            None => non_aoi += dur,
        }
    }

    let valid = left + right;
    let (left_fraction, right_fraction, dominant_side) = if valid > 0.0 {
        let lf = left / valid;
        let side = if left > right {
            Side::Left
        } else if right > left {
            Side::Right
        } else {
            Side::Balanced
        };
        (Some(lf), Some(right / valid), Some(side))
    } else {
        (None, None, None)
    };
    let (dominant_quadrant, dominant_quadrant_fraction) = if valid > 0.0 {
        let (q, ms) = quadrant_ms
            .iter()
            .fold((Quadrant::Q1, f64::NEG_INFINITY), |best, (q, ms)| if *ms > best.1 { (*q, *ms) } else { best });
        (Some(q), Some(ms / valid))
    } else {
        (None, None)
    };

    DwellReport {
        total_ms: total,
        invalid_ms: invalid,
        non_aoi_ms: non_aoi,
        aoi_ms,
        aoi_exclusive_ms,
        quadrant_ms,
        left_ms: left,
        right_ms: right,
        left_fraction,
        right_fraction,
        dominant_side,
        dominant_quadrant,
        dominant_quadrant_fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::{label_samples, QuadrantMap};
    use crate::session::{AoiDefinition, AoiRole, GazeSample};

    fn session(points: &[(f64, f64, f64)]) -> SessionLog {
        SessionLog {
            participant_pseudonym: String::new(),
            screen_width: 1920,
            screen_height: 1080,
            samples: points
                .iter()
                .map(|&(t, x, y)| GazeSample { timestamp_ms: t, x, y, valid: true, off_screen: false })
                .collect(),
            events: vec![],
            source_messages: None,
        }
    }

    fn one_aoi() -> AoiConfig {
        AoiConfig::new(vec![AoiDefinition {
            aoi_id: "A".into(),
            x: 0.0,
            y: 0.0,
            width: 500.0,
            height: 500.0,
            role: AoiRole::Target,
        }])
        .unwrap()
    }

    #[test]
    fn timeline_median_for_last_sample() {
        let s = session(&[(0.0, 1.0, 1.0), (10.0, 1.0, 1.0), (30.0, 1.0, 1.0), (40.0, 1.0, 1.0)]);
        let tl = Timeline::new(&s);
        assert_eq!(tl.durations, vec![10.0, 20.0, 10.0, 10.0]);
        assert_eq!(tl.end_ms, 50.0);
    }

    #[test]
    fn all_in_one_aoi() {
        let s = session(&(0..10).map(|i| (i as f64 * 20.0, 100.0, 100.0)).collect::<Vec<_>>());
        let aois = one_aoi();
        let labels = label_samples(&s, &aois, &[], &QuadrantMap::default()).labels;
        let d = dwell_analysis(&s, &labels, &aois, &Timeline::new(&s));
        assert_eq!(d.aoi_exclusive_ms["A"], d.total_ms);
        assert_eq!(d.non_aoi_ms, 0.0);
        assert_eq!(d.total_ms, 200.0);
    }

    #[test]
    fn half_left_half_right() {
        // 25 samples left then 25 right at 10 ms: hand sum left = 250 ms of 500.
        let pts: Vec<_> = (0..50)
            .map(|i| (i as f64 * 10.0, if i < 25 { 400.0 } else { 1500.0 }, 700.0))
            .collect();
        let s = session(&pts);
        let aois = AoiConfig::default();
        let labels = label_samples(&s, &aois, &[], &QuadrantMap::default()).labels;
        let d = dwell_analysis(&s, &labels, &aois, &Timeline::new(&s));
        assert!((d.left_fraction.unwrap() - 0.5).abs() <= 10.0 / 500.0);
        assert_eq!(d.left_ms, 250.0);
        assert_eq!(d.dominant_side, Some(Side::Balanced));
    }

    #[test]
    fn left_dominance_marked() {
        let pts: Vec<_> = (0..40).map(|i| (i as f64 * 10.0, if i < 30 { 300.0 } else { 1500.0 }, 300.0)).collect();
        let s = session(&pts);
        let aois = AoiConfig::default();
        let labels = label_samples(&s, &aois, &[], &QuadrantMap::default()).labels;
        let d = dwell_analysis(&s, &labels, &aois, &Timeline::new(&s));
        assert_eq!(d.dominant_side, Some(Side::Left));
        assert_eq!(d.left_fraction, Some(0.75));
        assert_eq!(d.dominant_quadrant, Some(Quadrant::Q3));
    }

    #[test]
    fn invalid_time_is_accounted() {
        let mut s = session(&(0..10).map(|i| (i as f64 * 10.0, 100.0, 100.0)).collect::<Vec<_>>());
        s.samples[3].valid = false;
        let aois = one_aoi();
        let labels = label_samples(&s, &aois, &[], &QuadrantMap::default()).labels;
        let d = dwell_analysis(&s, &labels, &aois, &Timeline::new(&s));
        assert_eq!(d.invalid_ms, 10.0);
        assert!(d.conservation_error().abs() < 1e-9);
    }
}
