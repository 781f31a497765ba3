//! Session ingest: gaze log parsing, AoI configuration, and stimulus event
//! bookkeeping.
//!
//! Input logs are delimiter-separated text with a header row. The required
//! columns are `Timestamp`, `X` and `Y`; `Message`, `Obj-X`, `Obj-Y`, `Obj-Z`
//! and the extension columns `Kind`, `Object`, `Role` and `OffScreen` are
//! optional. Header names are matched case-insensitively with punctuation
//! ignored, so `Obj-X`, `obj_x` and `OBJX` all name the same column.

use std::collections::{HashMap, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeling::{ParsedMessage, StimulusPart};

pub const DEFAULT_SCREEN_WIDTH: u32 = 1920;
pub const DEFAULT_SCREEN_HEIGHT: u32 = 1080;
pub const DEFAULT_VISIBILITY_TIMEOUT_MS: f64 = 3000.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed header: required column `{0}` missing")]
    MalformedHeader(&'static str),
    #[error("session contains no usable rows")]
    EmptySession,
    #[error("csv read error: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid AoI configuration: {0}")]
    InvalidAoi(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Reason a single log row was rejected. Rejected rows are counted in the
/// [`ParseLedger`]; they never abort the parse.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum RowError {
    #[error("non-numeric {column}: {value:?}")]
    NonNumeric { column: &'static str, value: String },
    #[error("unknown event kind {0:?}")]
    UnknownKind(String),
    #[error("unknown stimulus role {0:?}")]
    UnknownRole(String),
    #[error("object coordinates incomplete")]
    IncompleteObject,
    #[error("disappearance of {0:?} without a preceding appearance")]
    UnmatchedDisappear(String),
    #[error("event row carries no object identity")]
    MissingObject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub timestamp_ms: f64,
    pub x: f64,
    pub y: f64,
    /// False for tracking-loss rows (empty coordinates).
    pub valid: bool,
    /// True when the raw coordinates fell outside the screen and were clamped.
    pub off_screen: bool,
}

impl GazeSample {
    pub fn on_screen(&self) -> bool {
        self.valid && !self.off_screen
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Appear,
    Disappear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum StimulusRole {
    Target,
    Distractor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusEvent {
    pub timestamp_ms: f64,
    pub kind: EventKind,
    pub object_id: String,
    pub obj_x: f64,
    pub obj_y: f64,
    /// Depth as logged by the game. Carried through, never used for hit-testing.
    pub obj_z: f64,
    pub role: StimulusRole,
    /// Set on disappearances inserted by [`derive_disappearances`].
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub participant_pseudonym: String,
    pub screen_width: u32,
    pub screen_height: u32,
    pub samples: Vec<GazeSample>,
    pub events: Vec<StimulusEvent>,
    /// Per-sample `Message` column, index-aligned with `samples`.
    pub source_messages: Option<Vec<String>>,
}

impl SessionLog {
    pub fn start_ms(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.timestamp_ms)
    }

    pub fn end_ms(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.timestamp_ms)
    }

    pub fn valid_count(&self) -> usize {
        self.samples.iter().filter(|s| s.valid).count()
    }
}

/// Participant metadata accompanying a session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub participant_id: String,
    #[serde(default = "default_width")]
    pub screen_width: u32,
    #[serde(default = "default_height")]
    pub screen_height: u32,
}

fn default_width() -> u32 {
    DEFAULT_SCREEN_WIDTH
}

fn default_height() -> u32 {
    DEFAULT_SCREEN_HEIGHT
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum AoiRole {
    #[serde(alias = "Target")]
    Target,
    #[serde(alias = "Distractor")]
    Distractor,
    #[serde(alias = "Neutral")]
    Neutral,
}

impl AoiRole {
    /// Lower is more important when several AoIs are hit at once.
    pub fn priority(self) -> u8 {
        match self {
            AoiRole::Target => 0,
            AoiRole::Distractor => 1,
            AoiRole::Neutral => 2,
        }
    }
}

/// Axis-aligned screen rectangle, origin top-left. Containment is closed on
/// all four edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn centered(cx: f64, cy: f64, side: f64) -> Self {
        Rect { x: cx - side / 2.0, y: cy - side / 2.0, width: side, height: side }
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= self.x && px <= self.x + self.width && py >= self.y && py <= self.y + self.height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoiDefinition {
    pub aoi_id: String,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    pub role: AoiRole,
}

impl AoiDefinition {
    pub fn rect(&self) -> Rect {
        Rect { x: self.x, y: self.y, width: self.width, height: self.height }
    }
}

/// Validated list of areas of interest, in configuration order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct AoiConfig {
    aois: Vec<AoiDefinition>,
}

impl AoiConfig {
    pub fn new(aois: Vec<AoiDefinition>) -> Result<Self, IngestError> {
        let mut seen = HashSet::new();
        for aoi in &aois {
            if !(aoi.width > 0.0 && aoi.height > 0.0) {
                return Err(IngestError::InvalidAoi(format!(
                    "{}: width and height must be positive",
                    aoi.aoi_id
                )));
            }
            if ![aoi.x, aoi.y, aoi.width, aoi.height].iter().all(|v| v.is_finite()) {
                return Err(IngestError::InvalidAoi(format!("{}: non-finite geometry", aoi.aoi_id)));
            }
            if !seen.insert(aoi.aoi_id.as_str()) {
                return Err(IngestError::InvalidAoi(format!("duplicate aoi_id {}", aoi.aoi_id)));
            }
        }
        Ok(AoiConfig { aois })
    }

    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let aois: Vec<AoiDefinition> = serde_json::from_str(text)?;
        AoiConfig::new(aois)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AoiDefinition> {
        self.aois.iter()
    }

    pub fn len(&self) -> usize {
        self.aois.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aois.is_empty()
    }

    pub fn get(&self, aoi_id: &str) -> Option<&AoiDefinition> {
        self.aois.iter().find(|a| a.aoi_id == aoi_id)
    }
}

impl<'de> Deserialize<'de> for AoiConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let aois = Vec::<AoiDefinition>::deserialize(d)?;
        AoiConfig::new(aois).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormatOptions {
    pub delimiter: u8,
    pub screen_width: u32,
    pub screen_height: u32,
}

impl Default for FormatOptions {
    fn default() -> Self {
        FormatOptions {
            delimiter: b',',
            screen_width: DEFAULT_SCREEN_WIDTH,
            screen_height: DEFAULT_SCREEN_HEIGHT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRow {
    /// 1-based line number in the input, header is line 1.
    pub line: u64,
    pub reason: RowError,
}

/// Row accounting for one parse. `rows_total == rows_accepted + rows_rejected`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParseLedger {
    pub rows_total: usize,
    pub rows_accepted: usize,
    pub rows_rejected: usize,
    /// Accepted rows that carried only a stimulus event and no gaze sample.
    pub event_only_rows: usize,
    pub samples_invalid: usize,
    pub samples_clamped: usize,
    pub rejected: Vec<RejectedRow>,
}

#[derive(Debug, Clone)]
pub struct ParsedSession {
    pub session: SessionLog,
    pub ledger: ParseLedger,
}

#[derive(Clone, Copy)]
struct Columns {
    timestamp: usize,
    x: usize,
    y: usize,
    message: Option<usize>,
    obj_x: Option<usize>,
    obj_y: Option<usize>,
    obj_z: Option<usize>,
    kind: Option<usize>,
    object: Option<usize>,
    role: Option<usize>,
    off_screen: Option<usize>,
}

fn fold_header(name: &str) -> String {
    name.chars().filter(|c| c.is_ascii_alphanumeric()).map(|c| c.to_ascii_lowercase()).collect()
}

impl Columns {
    fn from_header(header: &csv::StringRecord) -> Result<Self, IngestError> {
        let mut index: HashMap<String, usize> = HashMap::new();
        for (i, name) in header.iter().enumerate() {
            index.entry(fold_header(name)).or_insert(i);
        }
        let find = |key: &str| index.get(key).copied();
        Ok(Columns {
            timestamp: find("timestamp").ok_or(IngestError::MalformedHeader("Timestamp"))?,
            x: find("x").ok_or(IngestError::MalformedHeader("X"))?,
            y: find("y").ok_or(IngestError::MalformedHeader("Y"))?,
            message: find("message"),
            obj_x: find("objx"),
            obj_y: find("objy"),
            obj_z: find("objz"),
            kind: find("kind"),
            object: find("object").or_else(|| find("objectid")),
            role: find("role"),
            off_screen: find("offscreen"),
        })
    }
}

fn field(record: &csv::StringRecord, col: Option<usize>) -> &str {
    col.and_then(|c| record.get(c)).unwrap_or("")
}

fn number(value: &str, column: &'static str) -> Result<Option<f64>, RowError> {
    if value.is_empty() {
        return Ok(None);
    }
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(RowError::NonNumeric { column, value: value.to_string() }),
    }
}

struct RowRecord {
    line: u64,
    timestamp_ms: f64,
    sample: Option<GazeSample>,
    message: String,
    event: Option<StimulusEvent>,
}

#[derive(Clone, Copy, PartialEq)]
enum RowKind {
    Implicit,
    Appear,
    Disappear,
    SyntheticDisappear,
}

fn parse_row(
    record: &csv::StringRecord,
    cols: &Columns,
    opts: &FormatOptions,
    line: u64,
) -> Result<RowRecord, RowError> {
    let timestamp_ms = number(field(record, Some(cols.timestamp)), "Timestamp")?
        .ok_or_else(|| RowError::NonNumeric { column: "Timestamp", value: String::new() })?;
    let raw_x = number(field(record, Some(cols.x)), "X")?;
    let raw_y = number(field(record, Some(cols.y)), "Y")?;
    let message = field(record, cols.message).to_string();

    let kind_text = field(record, cols.kind);
    let kind = match kind_text.to_ascii_lowercase().as_str() {
        "" => RowKind::Implicit,
        "appear" => RowKind::Appear,
        "disappear" => RowKind::Disappear,
        "syntheticdisappear" => RowKind::SyntheticDisappear,
        _ => return Err(RowError::UnknownKind(kind_text.to_string())),
    };
    let role = match field(record, cols.role).to_ascii_lowercase().as_str() {
        "" | "target" => StimulusRole::Target,
        "distractor" => StimulusRole::Distractor,
        other => return Err(RowError::UnknownRole(other.to_string())),
    };
    let obj_x = number(field(record, cols.obj_x), "Obj-X")?;
    let obj_y = number(field(record, cols.obj_y), "Obj-Y")?;
    let obj_z = number(field(record, cols.obj_z), "Obj-Z")?;
    let object_col = field(record, cols.object);

    let event = match (kind, obj_x, obj_y) {
        (RowKind::Implicit, None, None) => None,
        (RowKind::Implicit | RowKind::Appear, Some(ox), Some(oy)) => {
            let object_id = if !object_col.is_empty() {
                object_col.to_string()
            } else {
                match ParsedMessage::parse(&message).stimulus {
                    Some(StimulusPart::Named(name)) => name,
                    _ => format!("object@{ox}x{oy}"),
                }
            };
            Some(StimulusEvent {
                timestamp_ms,
                kind: EventKind::Appear,
                object_id,
                obj_x: ox,
                obj_y: oy,
                obj_z: obj_z.unwrap_or(0.0),
                role,
                synthetic: false,
            })
        }
        (RowKind::Disappear | RowKind::SyntheticDisappear, ox, oy) => {
            let object_id = if !object_col.is_empty() {
                object_col.to_string()
            } else if let (Some(ox), Some(oy)) = (ox, oy) {
                format!("object@{ox}x{oy}")
            } else {
                return Err(RowError::MissingObject);
            };
            // Coordinates are filled from the matching appearance after sorting.
            Some(StimulusEvent {
                timestamp_ms,
                kind: EventKind::Disappear,
                object_id,
                obj_x: ox.unwrap_or(f64::NAN),
                obj_y: oy.unwrap_or(f64::NAN),
                obj_z: obj_z.unwrap_or(f64::NAN),
                role,
                synthetic: kind == RowKind::SyntheticDisappear,
            })
        }
        _ => return Err(RowError::IncompleteObject),
    };

    let event_only = raw_x.is_none() && raw_y.is_none() && !kind_text.is_empty() && event.is_some();
    let sample = if event_only {
        None
    } else {
        let flagged = matches!(
            field(record, cols.off_screen).to_ascii_lowercase().as_str(),
            "1" | "true" | "yes"
        );
        Some(match (raw_x, raw_y) {
            (Some(x), Some(y)) => {
                let w = f64::from(opts.screen_width);
                let h = f64::from(opts.screen_height);
                let cx = x.clamp(0.0, w);
                let cy = y.clamp(0.0, h);
                GazeSample {
                    timestamp_ms,
                    x: cx,
                    y: cy,
                    valid: true,
                    off_screen: flagged || cx != x || cy != y,
                }
            }
            _ => GazeSample { timestamp_ms, x: 0.0, y: 0.0, valid: false, off_screen: false },
        })
    };

    Ok(RowRecord { line, timestamp_ms, sample, message, event })
}

/// Parse a raw session log.
///
/// Rows are stably sorted by timestamp. Rows with `Obj-X`/`Obj-Y` produce an
/// appearance event at the row's timestamp. A row whose coordinates are empty
/// is a tracking-loss sample, unless it names a `Kind`, in which case it is an
/// event-only row. Malformed rows are skipped and recorded in the ledger.
/// The returned session has an empty pseudonym; see [`crate::privacy`].
pub fn parse_session<R: Read>(reader: R, opts: &FormatOptions) -> Result<ParsedSession, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .has_headers(false)
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(IngestError::EmptySession),
        Some(h) => h?,
    };
    if header.iter().all(str::is_empty) {
        return Err(IngestError::EmptySession);
    }
    let cols = Columns::from_header(&header)?;
    let has_messages = cols.message.is_some();

    let mut ledger = ParseLedger::default();
    let mut rows = Vec::new();
    for (i, record) in records.enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 2, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        ledger.rows_total += 1;
        match parse_row(&record, &cols, opts, line) {
            Ok(row) => rows.push(row),
            Err(reason) => ledger.rejected.push(RejectedRow { line, reason }),
        }
    }

    rows.sort_by(|a, b| a.timestamp_ms.total_cmp(&b.timestamp_ms));

    // Disappearances must follow an open appearance of the same object.
    let mut open: HashMap<String, (f64, f64, f64)> = HashMap::new();
    let mut kept = Vec::with_capacity(rows.len());
    for mut row in rows {
        if let Some(ev) = row.event.as_mut() {
            match ev.kind {
                EventKind::Appear => {
                    open.insert(ev.object_id.clone(), (ev.obj_x, ev.obj_y, ev.obj_z));
                }
                EventKind::Disappear => match open.remove(&ev.object_id) {
                    Some((ox, oy, oz)) => {
                        if ev.obj_x.is_nan() || ev.obj_y.is_nan() {
                            ev.obj_x = ox;
                            ev.obj_y = oy;
                        }
                        if ev.obj_z.is_nan() {
                            ev.obj_z = oz;
                        }
                    }
                    None => {
                        ledger.rejected.push(RejectedRow {
                            line: row.line,
                            reason: RowError::UnmatchedDisappear(ev.object_id.clone()),
                        });
                        continue;
                    }
                },
            }
        }
        kept.push(row);
    }
    ledger.rejected.sort_by_key(|r| r.line);
    ledger.rows_rejected = ledger.rejected.len();
    ledger.rows_accepted = kept.len();

    let mut samples = Vec::with_capacity(kept.len());
    let mut messages = Vec::new();
    let mut events = Vec::new();
    for row in kept {
        match row.sample {
            Some(s) => {
                ledger.samples_invalid += usize::from(!s.valid);
                ledger.samples_clamped += usize::from(s.off_screen);
                samples.push(s);
                if has_messages {
                    messages.push(row.message);
                }
            }
            None => ledger.event_only_rows += 1,
        }
        if let Some(ev) = row.event {
            events.push(ev);
        }
    }
    if samples.is_empty() {
        return Err(IngestError::EmptySession);
    }

    Ok(ParsedSession {
        session: SessionLog {
            participant_pseudonym: String::new(),
            screen_width: opts.screen_width,
            screen_height: opts.screen_height,
            samples,
            events,
            source_messages: has_messages.then_some(messages),
        },
        ledger,
    })
}

/// Render a session back to the extended log format accepted by
/// [`parse_session`]. Stimulus events are written as event-only rows.
pub fn serialize_session(session: &SessionLog, delimiter: u8) -> String {
    let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
    let with_messages = session.source_messages.is_some();
    let mut header = vec!["Timestamp", "X", "Y"];
    if with_messages {
        header.push("Message");
    }
    header.extend(["Obj-X", "Obj-Y", "Obj-Z", "Kind", "Object", "Role", "OffScreen"]);
    wtr.write_record(&header).expect("write to Vec");

    let mut si = 0;
    let mut ei = 0;
    let samples = &session.samples;
    let events = &session.events;
    while si < samples.len() || ei < events.len() {
        let take_sample = match (samples.get(si), events.get(ei)) {
            (Some(s), Some(e)) => s.timestamp_ms <= e.timestamp_ms,
            (Some(_), None) => true,
            _ => false,
        };
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        if take_sample {
            let s = &samples[si];
            row.push(s.timestamp_ms.to_string());
            if s.valid {
                row.push(s.x.to_string());
                row.push(s.y.to_string());
            } else {
                row.extend([String::new(), String::new()]);
            }
            if let Some(msgs) = &session.source_messages {
                row.push(msgs[si].clone());
            }
            row.extend(std::iter::repeat_n(String::new(), 6));
            row.push(if s.off_screen { "1".into() } else { String::new() });
            si += 1;
        } else {
            let e = &events[ei];
            row.push(e.timestamp_ms.to_string());
            row.extend([String::new(), String::new()]);
            if with_messages {
                row.push(String::new());
            }
            row.push(e.obj_x.to_string());
            row.push(e.obj_y.to_string());
            row.push(e.obj_z.to_string());
            row.push(
                match (e.kind, e.synthetic) {
                    (EventKind::Appear, _) => "Appear",
                    (EventKind::Disappear, false) => "Disappear",
                    (EventKind::Disappear, true) => "SyntheticDisappear",
                }
                .into(),
            );
            row.push(e.object_id.clone());
            row.push(
                match e.role {
                    StimulusRole::Target => "Target",
                    StimulusRole::Distractor => "Distractor",
                }
                .into(),
            );
            row.push(String::new());
            ei += 1;
        }
        wtr.write_record(&row).expect("write to Vec");
    }
    String::from_utf8(wtr.into_inner().expect("flush Vec")).expect("csv output is utf-8")
}

/// Close every appearance that has no explicit disappearance.
///
/// The synthetic disappearance lands at the earliest of `appear + timeout`,
/// the next appearance of the same object, and `session_end_ms` (never before
/// the appearance itself). `events` must be sorted by timestamp.
pub fn derive_disappearances(
    events: &[StimulusEvent],
    visibility_timeout_ms: f64,
    session_end_ms: f64,
) -> Vec<StimulusEvent> {
    // (timestamp, sequence) orders the merged output; originals sit on odd
    // sequence numbers so a synthetic event can be slotted before or after.
    let mut keyed: Vec<(f64, usize, StimulusEvent)> =
        events.iter().enumerate().map(|(i, e)| (e.timestamp_ms, 2 * i + 1, e.clone())).collect();

    for (i, ev) in events.iter().enumerate() {
        if ev.kind != EventKind::Appear {
            continue;
        }
        let next = events[i + 1..]
            .iter()
            .enumerate()
            .find(|(_, e)| e.object_id == ev.object_id)
            .map(|(off, e)| (i + 1 + off, e));
        let next_appear = match next {
            Some((_, e)) if e.kind == EventKind::Disappear => continue,
            Some((j, e)) => Some((j, e.timestamp_ms)),
            None => None,
        };
        let mut t = (ev.timestamp_ms + visibility_timeout_ms).min(session_end_ms);
        if let Some((_, nt)) = next_appear {
            t = t.min(nt);
        }
        let t = t.max(ev.timestamp_ms);
        let seq = match next_appear {
            Some((j, nt)) if nt == t => 2 * j,
            _ => 2 * i + 2,
        };
        keyed.push((
            t,
            seq,
            StimulusEvent { timestamp_ms: t, kind: EventKind::Disappear, synthetic: true, ..ev.clone() },
        ));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, _, e)| e).collect()
}
