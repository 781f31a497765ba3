//! Artifact rendering and the hashed manifest of an output directory.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adaptation::{signals_to_ndjson, AdaptationPolicy, AdaptationTrace};
use crate::insight::format_number;
use crate::metrics::{DwellReport, MetricSuite, WindowMetrics};
use crate::pipeline::Analysis;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA: &str = "gazelens.manifest/1";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_MD: &str = "report.md";
pub const SIGNALS_FILE: &str = "adaptation.ndjson";
pub const TRACE_FILE: &str = "adaptation_trace.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(path: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Artifact { path: path.into(), bytes: bytes.into() }
    }

    pub fn json<T: Serialize>(path: impl Into<String>, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("artifact is serializable");
        bytes.push(b'\n');
        Artifact::new(path, bytes)
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub config_hash: String,
    pub artifacts: Vec<ManifestEntry>,
}

/// Stored next to the signal stream so a replay needs nothing else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub policy: AdaptationPolicy,
    pub trace: AdaptationTrace,
}

#[derive(Serialize)]
struct MetricsDocument<'a> {
    metrics: &'a MetricSuite,
    dwell: &'a DwellReport,
    windows: &'a [WindowMetrics],
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| crate::metrics::absent::MARKER.to_string(), |x| x.to_string())
}

pub fn render_artifacts(a: &Analysis) -> Vec<Artifact> {
    let mut out = Vec::new();

    out.push(Artifact::new(
        "labeled_samples.csv",
        csv_bytes(
            &["timestamp_ms", "x", "y", "quadrant", "aoi_ids", "message"],
            a.labels.iter().map(|l| {
                vec![
                    l.timestamp_ms.to_string(),
                    l.x.to_string(),
                    l.y.to_string(),
                    l.quadrant.to_string(),
                    l.aoi_hits.join(";"),
                    l.message.clone(),
                ]
            }),
        ),
    ));

    out.push(Artifact::new(
        "fixations.csv",
        csv_bytes(
            &["start_ms", "duration_ms", "centroid_x", "centroid_y", "sample_count", "first_sample", "last_sample"],
            a.fixations.iter().map(|f| {
                vec![
                    f.start_ms.to_string(),
                    f.duration_ms.to_string(),
                    f.centroid_x.to_string(),
                    f.centroid_y.to_string(),
                    f.sample_count.to_string(),
                    f.first_sample.to_string(),
                    f.last_sample.to_string(),
                ]
            }),
        ),
    ));

    match &a.clusters {
        Ok(model) => {
            out.push(Artifact::new(
                "clusters.csv",
                csv_bytes(
                    &["timestamp_ms", "x", "y", "cluster"],
                    a.cluster_points.iter().zip(&model.assignments).map(|(p, c)| {
                        vec![p.timestamp_ms.to_string(), p.x.to_string(), p.y.to_string(), c.to_string()]
                    }),
                ),
            ));
            out.push(Artifact::json(
                "clusters.json",
                &serde_json::json!({
                    "k": model.k,
                    "centroids": model.centroids,
                    "counts": model.counts,
                    "rank_order": model.rank_order,
                    "ranking": model.ranking_statement(),
                    "inertia": model.inertia,
                    "iterations": model.iterations,
                    "seed": a.config.seed,
                    "source": a.config.cluster_source,
                }),
            ));
            out.push(Artifact::new(
                "plot/cluster_scatter.csv",
                csv_bytes(
                    &["x", "y", "cluster", "is_centroid"],
                    a.cluster_points
                        .iter()
                        .zip(&model.assignments)
                        .map(|(p, c)| vec![p.x.to_string(), p.y.to_string(), c.to_string(), "0".into()])
                        .chain(model.centroids.iter().enumerate().map(|(c, m)| {
                            vec![m[0].to_string(), m[1].to_string(), c.to_string(), "1".into()]
                        })),
                ),
            ));
        }
        Err(e) => out.push(Artifact::json(
            "clusters.json",
            &serde_json::json!({ "k": a.config.k, "absent": e.to_string() }),
        )),
    }

    out.push(Artifact::new(
        "plot/fixation_durations.csv",
        csv_bytes(
            &["fixation", "start_ms", "duration_ms"],
            a.fixations
                .iter()
                .enumerate()
                .map(|(i, f)| vec![i.to_string(), f.start_ms.to_string(), f.duration_ms.to_string()]),
        ),
    ));

    let aoi_rows = a.aois.iter().map(|d| {
        vec![
            "aoi".into(),
            d.aoi_id.clone(),
            format!("{:?}", d.role).to_lowercase(),
            d.x.to_string(),
            d.y.to_string(),
            d.width.to_string(),
            d.height.to_string(),
        ]
    });
    let stimulus_rows = a.stimulus_windows.iter().filter(|w| !w.region.configured).map(|w| {
        let r = w.region.rect;
        vec![
            "stimulus".into(),
            w.event_ref.clone(),
            format!("{:?}", w.role).to_lowercase(),
            r.x.to_string(),
            r.y.to_string(),
            r.width.to_string(),
            r.height.to_string(),
        ]
    });
    out.push(Artifact::new(
        "plot/aoi_overlay.csv",
        csv_bytes(&["kind", "id", "role", "x", "y", "width", "height"], aoi_rows.chain(stimulus_rows)),
    ));
    out.push(Artifact::new(
        "plot/aoi_fixations.csv",
        csv_bytes(
            &["x", "y", "duration_ms", "aoi_id"],
            a.fixations.iter().map(|f| {
                let aoi = crate::labeling::primary_hit(f.centroid_x, f.centroid_y, &a.aois)
                    .map(|d| d.aoi_id.clone())
                    .unwrap_or_default();
                vec![f.centroid_x.to_string(), f.centroid_y.to_string(), f.duration_ms.to_string(), aoi]
            }),
        ),
    ));

    out.push(Artifact::json(
        "metrics.json",
        &MetricsDocument { metrics: &a.metrics, dwell: &a.dwell, windows: &a.window_metrics },
    ));
    out.push(Artifact::new("metrics.csv", metrics_csv(&a.metrics, &a.dwell)));

    let report = a.report();
    out.push(Artifact::new(REPORT_JSON, report.json));
    out.push(Artifact::new(REPORT_MD, report.markdown));
    out.push(Artifact::new(SIGNALS_FILE, signals_to_ndjson(&a.signals)));
    out.push(Artifact::json(TRACE_FILE, &TraceFile { policy: a.config.policy.clone(), trace: a.trace.clone() }));
    out.push(Artifact::json("config.json", &serde_json::json!({ "config_hash": a.config_hash, "config": a.config })));
    if let Some(c) = &a.consistency {
        out.push(Artifact::json("consistency.json", c));
    }
    out
}

fn metrics_csv(m: &MetricSuite, d: &DwellReport) -> Vec<u8> {
    let mut rows: Vec<(String, String)> = vec![
        ("session_ms".into(), m.session_ms.to_string()),
        ("fixation_count".into(), m.fixation_count.to_string()),
        ("mean_fixation_ms".into(), opt(m.mean_fixation_ms)),
        ("sustained_attention_score".into(), opt(m.sustained_attention_score)),
        ("expectancy_rate".into(), opt(m.expectancy_rate)),
        ("inhibitory_control_score".into(), opt(m.inhibitory_control_score)),
        ("focus_loss_episodes".into(), m.focus_loss_episodes.len().to_string()),
        ("focus_loss_ms".into(), m.focus_loss_ms.to_string()),
        ("dwell_total_ms".into(), d.total_ms.to_string()),
        ("dwell_invalid_ms".into(), d.invalid_ms.to_string()),
        ("dwell_non_aoi_ms".into(), d.non_aoi_ms.to_string()),
        ("left_fraction".into(), opt(d.left_fraction)),
        ("right_fraction".into(), opt(d.right_fraction)),
    ];
    for (id, ms) in &d.aoi_exclusive_ms {
        rows.push((format!("dwell_aoi_exclusive_ms:{id}"), ms.to_string()));
    }
    for (q, ms) in &d.quadrant_ms {
        rows.push((format!("dwell_quadrant_ms:{q}"), ms.to_string()));
    }
    csv_bytes(&["metric", "value"], rows.into_iter().map(|(k, v)| vec![k, v]))
}

pub fn build_manifest(config_hash: &str, artifacts: &[Artifact]) -> Manifest {
    let mut entries: Vec<ManifestEntry> = artifacts
        .iter()
        .map(|a| ManifestEntry { path: a.path.clone(), bytes: a.bytes.len(), sha256: a.sha256() })
        .collect();
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    Manifest { schema: MANIFEST_SCHEMA.into(), config_hash: config_hash.into(), artifacts: entries }
}

/// Write every artifact below `dir` plus `manifest.json`.
pub fn write_artifacts(dir: &Path, config_hash: &str, artifacts: &[Artifact]) -> io::Result<Manifest> {
    for a in artifacts {
        let path = dir.join(&a.path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, &a.bytes)?;
    }
    let manifest = build_manifest(config_hash, artifacts);
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest is serializable");
    bytes.push(b'\n');
    fs::create_dir_all(dir)?;
    fs::write(dir.join(MANIFEST_FILE), bytes)?;
    Ok(manifest)
}

/// Short human summary of an analysis, used on the command line.
pub fn summary_line(a: &Analysis) -> String {
    format!(
        "{} samples, {} fixations, {} insights, {} adaptation signals, sustained attention {}",
        a.session.samples.len(),
        a.fixations.len(),
        a.insights.len(),
        a.signals.len(),
        a.metrics.sustained_attention_score.map_or_else(|| "absent".into(), format_number)
    )
}
