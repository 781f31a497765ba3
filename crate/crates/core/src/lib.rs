//! Eye-tracking analytics for serious-game play sessions.
//!
//! The pipeline runs: [`session`] parsing, [`labeling`] of samples against
//! screen quadrants and AoIs, [`fixation`] detection, [`cluster`] analysis,
//! [`metrics`], rule-based [`insight`]s and [`adaptation`] signals.
//! [`pipeline::analyze`] chains them for one session and [`export`] turns
//! the result into files.

pub mod adaptation;
pub mod cluster;
pub mod export;
pub mod fixation;
pub mod fixtures;
pub mod insight;
pub mod labeling;
pub mod metrics;
pub mod pipeline;
pub mod privacy;
pub mod session;
pub mod synth;

pub use pipeline::{analyze, Analysis, AnalysisConfig};
pub use session::{parse_session, AoiConfig, FormatOptions, SessionLog, SessionMeta};
