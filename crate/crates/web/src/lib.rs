//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each operation is a plain function returning JSON so it can be tested
//! natively; the `#[wasm_bindgen]` wrappers only forward.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gazelens::cluster::{cluster_gaze, ClusterModel};
use gazelens::fixation::{detect_fixations, Fixation, FixationParams};
use gazelens::fixtures::{REFERENCE_AOI_JSON, REFERENCE_LOG_CSV};
use gazelens::labeling::RowConsistency;
use gazelens::pipeline::{analyze, AnalysisConfig};
use gazelens::session::{parse_session, AoiConfig, AoiDefinition, FormatOptions};
use gazelens::synth::{gaussian_blobs, synthetic_session, SessionShape};

pub const DEMO_WIDTH: u32 = 1920;
pub const DEMO_HEIGHT: u32 = 1080;

const BLOB_CENTERS: [[f64; 2]; 4] = [[420.0, 300.0], [1380.0, 260.0], [520.0, 820.0], [1450.0, 780.0]];
const BLOB_COUNTS: [usize; 4] = [650, 300, 550, 500];

#[derive(Serialize)]
struct ClusterDemo {
    width: u32,
    height: u32,
    points: Vec<[f64; 2]>,
    model: ClusterModel,
}

#[derive(Serialize)]
struct FixationDemo {
    width: u32,
    height: u32,
    /// `[x, y]` per valid on-screen sample, in time order.
    gaze: Vec<[f64; 2]>,
    fixations: Vec<Fixation>,
}

#[derive(Serialize)]
struct LabelDemo {
    width: u32,
    height: u32,
    aois: Vec<AoiDefinition>,
    samples: Vec<[f64; 2]>,
    rows: Vec<RowConsistency>,
    agree: usize,
    disagree: usize,
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Four Gaussian gaze blobs clustered with k-means++.
pub fn cluster_demo(k: usize, sigma: f64, seed: u64) -> Result<String, String> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(format!("sigma must be a non-negative number, got {sigma}"));
    }
    let (points, _) = gaussian_blobs(&BLOB_CENTERS, &BLOB_COUNTS, sigma, seed);
    let model = cluster_gaze(&points, k, seed).map_err(|e| e.to_string())?;
    to_json(&ClusterDemo { width: DEMO_WIDTH, height: DEMO_HEIGHT, points, model })
}

/// A short synthetic session and the fixations found in it.
pub fn fixation_demo(dispersion_px: f64, min_duration_ms: f64, seed: u64) -> Result<String, String> {
    if !(dispersion_px > 0.0 && min_duration_ms >= 0.0) {
        return Err("dispersion must be positive and minimum duration non-negative".into());
    }
    let shape = SessionShape { samples: 900, ..SessionShape::default() };
    let session = synthetic_session(&shape, seed);
    let params = FixationParams { dispersion_px, min_duration_ms };
    let fixations = detect_fixations(&session.samples, &params);
    let gaze = session.samples.iter().filter(|s| s.on_screen()).map(|s| [s.x, s.y]).collect();
    to_json(&FixationDemo { width: shape.screen_width, height: shape.screen_height, gaze, fixations })
}

/// Relabel the five reference log rows against `aoi_json` (empty for the
/// reference layout) on a screen of the given size.
pub fn label_demo(aoi_json: &str, width: u32, height: u32) -> Result<String, String> {
    let aois = if aoi_json.trim().is_empty() { REFERENCE_AOI_JSON } else { aoi_json };
    let aois = AoiConfig::from_json(aois).map_err(|e| e.to_string())?;
    let opts = FormatOptions { screen_width: width, screen_height: height, ..FormatOptions::default() };
    let parsed = parse_session(REFERENCE_LOG_CSV.as_bytes(), &opts).map_err(|e| e.to_string())?;
    let a = analyze(&parsed.session, &aois, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let consistency = a.consistency.ok_or("no source messages to compare")?;
    to_json(&LabelDemo {
        width,
        height,
        aois: aois.iter().cloned().collect(),
        samples: a.session.samples.iter().map(|s| [s.x, s.y]).collect(),
        rows: consistency.rows,
        agree: consistency.agree,
        disagree: consistency.disagree,
    })
}

pub fn reference_aois() -> &'static str {
    REFERENCE_AOI_JSON
}

#[wasm_bindgen(js_name = clusterDemo)]
pub fn cluster_demo_js(k: usize, sigma: f64, seed: u32) -> Result<String, JsError> {
    cluster_demo(k, sigma, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = fixationDemo)]
pub fn fixation_demo_js(dispersion_px: f64, min_duration_ms: f64, seed: u32) -> Result<String, JsError> {
    fixation_demo(dispersion_px, min_duration_ms, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = labelDemo)]
pub fn label_demo_js(aoi_json: &str, width: u32, height: u32) -> Result<String, JsError> {
    label_demo(aoi_json, width, height).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = referenceAois)]
pub fn reference_aois_js() -> String {
    reference_aois().to_string()
}
