//! The `gazelens` command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |---|---|
//! | 0 | success |
//! | 1 | usage, configuration or I/O error |
//! | 2 | session log could not be parsed, or rows were rejected (`validate`) |
//! | 3 | recomputed labels disagree with the log's `Message` column (`validate`) |
//! | 4 | an artifact needed by `report` or `replay` is missing |
//! | 5 | refused for privacy: no usable salt, or pseudonymization switched off |

pub mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use gazelens::adaptation::{evaluate_stream, replay_batch, SignalWriter};
use gazelens::export::{render_artifacts, summary_line, write_artifacts, Artifact, TraceFile, REPORT_JSON, TRACE_FILE};
use gazelens::insight::{derive_insights, render_report, rules_from_json, validate_rules, MachineReport};
use gazelens::pipeline::analyze;
use gazelens::privacy::pseudonymize;
use gazelens::session::{parse_session, AoiConfig, FormatOptions, IngestError, ParsedSession, SessionMeta};

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DISAGREE: i32 = 3;
pub const EXIT_MISSING_ARTIFACT: i32 = 4;
pub const EXIT_PRIVACY: i32 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_USAGE, message)
    }
}

#[derive(Debug, Parser)]
#[command(name = "gazelens", version, about = "Eye-tracking analytics for serious-game sessions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a session log and check its Message column against recomputed labels
    Validate {
        #[command(flatten)]
        run: RunConfig,
        /// JSON file supplying any of the flags
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the full pipeline and write the artifact directory
    Analyze {
        #[command(flatten)]
        run: RunConfig,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Not supported; outputs always carry a salted pseudonym
        #[arg(long)]
        no_pseudonym: bool,
    },
    /// Render the insight report of an analyzed session
    Report {
        /// Directory written by `analyze`
        #[arg(long)]
        out: PathBuf,
        /// Re-evaluate with these rules instead of the stored insights
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, default_value = "markdown", value_parser = ["markdown", "json"])]
        format: String,
        /// Not supported; reports always carry a salted pseudonym
        #[arg(long)]
        no_pseudonym: bool,
    },
    /// Replay the adaptation engine over an analyzed session
    Replay {
        /// Directory written by `analyze`
        #[arg(long)]
        out: PathBuf,
        /// Policy to replay with instead of the one stored with the trace
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Evaluate with the batch replay or feed the streaming evaluator
        #[arg(long, default_value = "batch", value_parser = ["batch", "stream"])]
        mode: String,
    },
}

/// Run the command line. `env` looks up environment variables, so tests can
/// supply a salt without touching the process environment.
pub fn run<I, T>(args: I, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Validate { run, config } => with_config(run, config).and_then(|r| cmd_validate(&r, out)),
        Command::Analyze { run, config, no_pseudonym } => {
            if no_pseudonym {
                Err(refuse_no_pseudonym())
            } else {
                with_config(run, config).and_then(|r| cmd_analyze(&r, env, out, err))
            }
        }
        Command::Report { out: dir, rules, format, no_pseudonym } => {
            if no_pseudonym {
                Err(refuse_no_pseudonym())
            } else {
                cmd_report(&dir, rules.as_deref(), &format, out)
            }
        }
        Command::Replay { out: dir, policy, mode } => cmd_replay(&dir, policy.as_deref(), &mode, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn refuse_no_pseudonym() -> Failure {
    Failure::new(EXIT_PRIVACY, "--no-pseudonym is refused: outputs never carry the raw participant identifier")
}

fn with_config(run: RunConfig, config: Option<PathBuf>) -> Result<RunConfig, Failure> {
    match config {
        None => Ok(run),
        Some(path) => {
            let file = RunConfig::load_file(&path)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok(run.merged_over(file, &base))
        }
    }
}

fn format_options(run: &RunConfig, meta: Option<&SessionMeta>) -> Result<FormatOptions, Failure> {
    let mut opts = FormatOptions { delimiter: run.delimiter_byte()?, ..FormatOptions::default() };
    if let Some(m) = meta {
        opts.screen_width = m.screen_width;
        opts.screen_height = m.screen_height;
    }
    if let Some((w, h)) = run.screen_override()? {
        opts.screen_width = w;
        opts.screen_height = h;
    }
    Ok(opts)
}

fn load_aois(run: &RunConfig) -> Result<AoiConfig, Failure> {
    match &run.aoi {
        None => Ok(AoiConfig::default()),
        Some(p) => AoiConfig::from_json(&config::read(p)?).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
    }
}

fn load_meta(path: &Path) -> Result<SessionMeta, Failure> {
    serde_json::from_str(&config::read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn parse_file(path: &Path, opts: &FormatOptions) -> Result<ParsedSession, Failure> {
    let file = File::open(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_session(file, opts).map_err(|e| {
        let code = match e {
            IngestError::Json(_) | IngestError::InvalidAoi(_) => EXIT_USAGE,
            _ => EXIT_PARSE,
        };
        Failure::new(code, format!("{}: {e}", path.display()))
    })
}

fn cmd_validate(run: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    if run.session.is_empty() {
        return Err(Failure::usage("validate needs --session"));
    }
    run.check_inputs_exist()?;
    let aois = load_aois(run)?;
    let config = run.analysis_config()?;
    let mut worst = EXIT_OK;
    for (i, path) in run.session.iter().enumerate() {
        let meta = run.meta.get(i).or(run.meta.first()).map(|p| load_meta(p)).transpose()?;
        let opts = format_options(run, meta.as_ref())?;
        let parsed = match parse_file(path, &opts) {
            Ok(p) => p,
            Err(f) => {
                let _ = writeln!(out, "{}: {}", path.display(), f.message);
                worst = worst.max(f.code);
                continue;
            }
        };
        let l = &parsed.ledger;
        let _ = writeln!(out, "{}", path.display());
        let _ = writeln!(
            out,
            "  rows: {} total, {} accepted, {} rejected ({} event-only, {} invalid samples, {} clamped)",
            l.rows_total, l.rows_accepted, l.rows_rejected, l.event_only_rows, l.samples_invalid, l.samples_clamped
        );
        for r in &l.rejected {
            let _ = writeln!(out, "  rejected line {}: {}", r.line, r.reason);
        }
        let mut code = if l.rows_rejected > 0 { EXIT_PARSE } else { EXIT_OK };
        let analysis = analyze(&parsed.session, &aois, &config).map_err(|e| Failure::usage(e.to_string()))?;
        match &analysis.consistency {
            None => {
                let _ = writeln!(out, "  labels: no Message column to compare");
            }
            Some(c) => {
                let _ = writeln!(out, "  labels: {}/{} agree, {} skipped", c.agree, c.agree + c.disagree, c.skipped);
                for row in c.rows.iter().filter(|r| !r.agrees) {
                    let _ = writeln!(
                        out,
                        "  sample {}: log says {:?}, recomputed {:?}",
                        row.sample_index, row.source, row.recomputed
                    );
                }
                if !c.all_agree() && code == EXIT_OK {
                    code = EXIT_DISAGREE;
                }
            }
        }
        worst = worst.max(code);
    }
    Ok(worst)
}

struct SessionOutcome {
    path: PathBuf,
    result: Result<String, Failure>,
}

fn session_dirs(sessions: &[PathBuf], out: &Path) -> Vec<PathBuf> {
    if sessions.len() == 1 {
        return vec![out.to_path_buf()];
    }
    let mut used = std::collections::HashSet::new();
    sessions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let stem = p.file_stem().map_or_else(|| format!("session{i}"), |s| s.to_string_lossy().into_owned());
            let name = if used.insert(stem.clone()) { stem } else { format!("{stem}-{i}") };
            used.insert(name.clone());
            out.join(name)
        })
        .collect()
}

fn cmd_analyze(
    run: &RunConfig,
    env: &dyn Fn(&str) -> Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    if run.session.is_empty() {
        return Err(Failure::usage("analyze needs --session"));
    }
    if run.meta.is_empty() {
        return Err(Failure::usage("analyze needs --meta with the participant identifier"));
    }
    if run.meta.len() != 1 && run.meta.len() != run.session.len() {
        return Err(Failure::usage("give one --meta for all sessions or one per session"));
    }
    run.check_inputs_exist()?;
    let salt_var = run.salt_env_name();
    let salt = env(salt_var).filter(|s| !s.is_empty()).ok_or_else(|| {
        Failure::new(EXIT_PRIVACY, format!("environment variable {salt_var} is not set; refusing to run without a pseudonym salt"))
    })?;
    let aois = load_aois(run)?;
    let config = run.analysis_config()?;
    let dirs = session_dirs(&run.session, &run.out_dir());

    let outcomes: Vec<SessionOutcome> = std::thread::scope(|scope| {
        let workers: Vec<_> = run
            .session
            .iter()
            .zip(&dirs)
            .enumerate()
            .map(|(i, (path, dir))| {
                let meta_path = if run.meta.len() == 1 { &run.meta[0] } else { &run.meta[i] };
                let (aois, config, salt) = (&aois, &config, salt.as_bytes());
                scope.spawn(move || SessionOutcome {
                    path: path.clone(),
                    result: analyze_one(run, path, meta_path, dir, aois, config, salt),
                })
            })
            .collect();
        workers.into_iter().map(|w| w.join().expect("session worker panicked")).collect()
    });

    let mut worst = EXIT_OK;
    for o in outcomes {
        match o.result {
            Ok(line) => {
                let _ = writeln!(out, "{}: {line}", o.path.display());
            }
            Err(f) => {
                let _ = writeln!(err, "error: {}", f.message);
                worst = worst.max(f.code);
            }
        }
    }
    Ok(worst)
}

fn analyze_one(
    run: &RunConfig,
    path: &Path,
    meta_path: &Path,
    dir: &Path,
    aois: &AoiConfig,
    config: &gazelens::AnalysisConfig,
    salt: &[u8],
) -> Result<String, Failure> {
    let meta = load_meta(meta_path)?;
    let pseudonym = pseudonymize(&meta.participant_id, salt).map_err(|e| Failure::new(EXIT_PRIVACY, e.to_string()))?;
    let opts = format_options(run, Some(&meta))?;
    let mut parsed = parse_file(path, &opts)?;
    parsed.session.participant_pseudonym = pseudonym;
    let analysis = analyze(&parsed.session, aois, config).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let mut artifacts = render_artifacts(&analysis);
    artifacts.push(Artifact::json("ingest_ledger.json", &parsed.ledger));
    write_artifacts(dir, &analysis.config_hash, &artifacts)
        .map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    Ok(format!("{} -> {}", summary_line(&analysis), dir.display()))
}

fn read_artifact(dir: &Path, name: &str) -> Result<String, Failure> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|_| {
        Failure::new(EXIT_MISSING_ARTIFACT, format!("{} is missing; run `gazelens analyze --out {}` first", path.display(), dir.display()))
    })
}

fn cmd_report(dir: &Path, rules: Option<&Path>, format: &str, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = read_artifact(dir, REPORT_JSON)?;
    let stored: MachineReport =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", dir.join(REPORT_JSON).display())))?;
    let insights = match rules {
        None => stored.insights.clone(),
        Some(p) => {
            let rules = rules_from_json(&config::read(p)?).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
            validate_rules(&rules).map_err(|e| Failure::usage(e.to_string()))?;
            derive_insights(&stored.metrics, &stored.dwell, &rules).map_err(|e| Failure::usage(e.to_string()))?
        }
    };
    let report = render_report(&insights, &stored.metrics, &stored.dwell, &stored.meta);
    let body = if format == "json" { report.json } else { report.markdown };
    out.write_all(body.as_bytes()).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(EXIT_OK)
}

fn cmd_replay(dir: &Path, policy: Option<&Path>, mode: &str, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = read_artifact(dir, TRACE_FILE)?;
    let stored: TraceFile =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", dir.join(TRACE_FILE).display())))?;
    let policy = match policy {
        None => stored.policy,
        Some(p) => serde_json::from_str(&config::read(p)?).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
    };
    let signals = if mode == "stream" {
        evaluate_stream(&stored.trace.to_stream(), &policy)
    } else {
        replay_batch(&stored.trace, &policy)
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    let mut writer = SignalWriter::new(out);
    for s in &signals {
        writer.write(s).map_err(|e| Failure::usage(e.to_string()))?;
    }
    Ok(EXIT_OK)
}
