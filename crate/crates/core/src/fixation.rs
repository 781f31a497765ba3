//! Dispersion-threshold fixation identification (I-DT).

use serde::{Deserialize, Serialize};

use crate::session::GazeSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixationParams {
    /// Maximum extent of a fixation along each axis, px.
    pub dispersion_px: f64,
    pub min_duration_ms: f64,
}

impl Default for FixationParams {
    fn default() -> Self {
        FixationParams { dispersion_px: 50.0, min_duration_ms: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub start_ms: f64,
    /// Timestamp of the last member minus the first.
    pub duration_ms: f64,
    pub centroid_x: f64,
    pub centroid_y: f64,
    pub sample_count: usize,
    /// Index range `[first_sample, last_sample]` into the session samples.
    pub first_sample: usize,
    pub last_sample: usize,
}

impl Fixation {
    pub fn end_ms(&self) -> f64 {
        self.start_ms + self.duration_ms
    }
}

#[derive(Clone, Copy)]
struct Extent {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Extent {
    fn of(s: &GazeSample) -> Self {
        Extent { min_x: s.x, max_x: s.x, min_y: s.y, max_y: s.y }
    }

    fn with(mut self, s: &GazeSample) -> Self {
        self.min_x = self.min_x.min(s.x);
        self.max_x = self.max_x.max(s.x);
        self.min_y = self.min_y.min(s.y);
        self.max_y = self.max_y.max(s.y);
        self
    }

    fn within(&self, threshold: f64) -> bool {
        self.max_x - self.min_x <= threshold && self.max_y - self.min_y <= threshold
    }
}

/// Detect fixations over time-sorted samples.
///
/// Only on-screen valid samples take part; an invalid or clamped sample ends
/// the current candidate run. Within a run, windows are grown greedily left
/// to right: a window opens at the first start whose minimum-duration span
/// passes the dispersion test, and is then extended while it keeps passing.
pub fn detect_fixations(samples: &[GazeSample], params: &FixationParams) -> Vec<Fixation> {
    let mut out = Vec::new();
    let mut run_start = 0;
    while run_start < samples.len() {
        if !samples[run_start].on_screen() {
            run_start += 1;
            continue;
        }
        let mut run_end = run_start;
        while run_end < samples.len() && samples[run_end].on_screen() {
            run_end += 1;
        }
        detect_in_run(samples, run_start, run_end, params, &mut out);
        run_start = run_end;
    }
    out
}

fn detect_in_run(samples: &[GazeSample], start: usize, end: usize, params: &FixationParams, out: &mut Vec<Fixation>) {
    let mut i = start;
    // `j0` is the first index whose span from `i` reaches the minimum duration;
    // it only moves forward as `i` advances.
    let mut j0 = start;
    while i < end {
        j0 = j0.max(i);
        while j0 < end && samples[j0].timestamp_ms - samples[i].timestamp_ms < params.min_duration_ms {
            j0 += 1;
        }
        if j0 >= end {
            break;
        }
        let extent = samples[i + 1..=j0].iter().fold(Extent::of(&samples[i]), Extent::with);
        if !extent.within(params.dispersion_px) {
            i += 1;
            continue;
        }
        let mut extent = extent;
        let mut j = j0;
        while j + 1 < end {
            let grown = extent.with(&samples[j + 1]);
            if !grown.within(params.dispersion_px) {
                break;
            }
            extent = grown;
            j += 1;
        }
        out.push(make_fixation(samples, i, j));
        i = j + 1;
    }
}

fn make_fixation(samples: &[GazeSample], first: usize, last: usize) -> Fixation {
    let members = &samples[first..=last];
    let n = members.len() as f64;
    let (sx, sy) = members.iter().fold((0.0, 0.0), |(ax, ay), s| (ax + s.x, ay + s.y));
    Fixation {
        start_ms: members[0].timestamp_ms,
        duration_ms: members[members.len() - 1].timestamp_ms - members[0].timestamp_ms,
        centroid_x: sx / n,
        centroid_y: sy / n,
        sample_count: members.len(),
        first_sample: first,
        last_sample: last,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(t: f64, x: f64, y: f64) -> GazeSample {
        GazeSample { timestamp_ms: t, x, y, valid: true, off_screen: false }
    }

    #[test]
    fn stationary_gaze_is_one_fixation() {
        let samples: Vec<_> = (0..20).map(|i| at(i as f64 * 10.0, 500.0, 500.0)).collect();
        let fx = detect_fixations(&samples, &FixationParams::default());
        assert_eq!(fx.len(), 1);
        assert_eq!((fx[0].centroid_x, fx[0].centroid_y), (500.0, 500.0));
        assert_eq!(fx[0].duration_ms, 190.0);
        assert_eq!(fx[0].sample_count, 20);
    }

    #[test]
    fn alternating_gaze_has_no_fixation() {
        let samples: Vec<_> = (0..40)
            .map(|i| if i % 2 == 0 { at(i as f64 * 10.0, 0.0, 0.0) } else { at(i as f64 * 10.0, 1000.0, 1000.0) })
            .collect();
        assert!(detect_fixations(&samples, &FixationParams::default()).is_empty());
    }

    #[test]
    fn empty_input() {
        assert!(detect_fixations(&[], &FixationParams::default()).is_empty());
    }

    #[test]
    fn invalid_sample_splits_window() {
        let mut samples: Vec<_> = (0..20).map(|i| at(i as f64 * 10.0, 500.0, 500.0)).collect();
        samples[10].valid = false;
        let fx = detect_fixations(&samples, &FixationParams { dispersion_px: 50.0, min_duration_ms: 50.0 });
        assert_eq!(fx.len(), 2);
        assert_eq!((fx[0].first_sample, fx[0].last_sample), (0, 9));
        assert_eq!((fx[1].first_sample, fx[1].last_sample), (11, 19));
    }

    #[test]
    fn saccade_separates_two_fixations() {
        let mut samples: Vec<_> = (0..15).map(|i| at(i as f64 * 10.0, 300.0 + (i % 3) as f64, 300.0)).collect();
        samples.extend((15..30).map(|i| at(i as f64 * 10.0, 900.0, 700.0 - (i % 2) as f64)));
        let fx = detect_fixations(&samples, &FixationParams::default());
        assert_eq!(fx.len(), 2);
        assert_eq!(fx[0].last_sample, 14);
        assert_eq!(fx[1].first_sample, 15);
        assert!((fx[0].centroid_x - 301.0).abs() < 1e-12);
    }

    #[test]
    fn dispersion_is_per_axis() {
        // 40 px in x and 40 px in y is within 50 on each axis even though the
        // diagonal exceeds it.
        let samples: Vec<_> = (0..12)
            .map(|i| if i % 2 == 0 { at(i as f64 * 10.0, 100.0, 100.0) } else { at(i as f64 * 10.0, 140.0, 140.0) })
            .collect();
        assert_eq!(detect_fixations(&samples, &FixationParams::default()).len(), 1);
    }
}
