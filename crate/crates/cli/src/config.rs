//! Run configuration: command-line flags merged over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use gazelens::adaptation::AdaptationPolicy;
use gazelens::insight::{default_rules, rules_from_json, validate_rules};
use gazelens::pipeline::{AnalysisConfig, ClusterSource};

use crate::Failure;

pub const DEFAULT_SALT_ENV: &str = "GAZELENS_SALT";
pub const DEFAULT_OUT: &str = "gazelens-out";

/// Flags shared by `analyze` and, in part, `validate`. Every field may also
/// come from `--config`; a flag given on the command line wins.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Session log CSV; repeat for several sessions
    #[arg(long)]
    pub session: Vec<PathBuf>,
    /// Participant metadata JSON; one for all sessions or one per session
    #[arg(long)]
    pub meta: Vec<PathBuf>,
    /// AoI definitions JSON
    #[arg(long)]
    pub aoi: Option<PathBuf>,
    /// Insight rules JSON (defaults to the shipped rule set)
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Adaptation policy JSON
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Screen geometry override, e.g. 1920x1080
    #[arg(long)]
    pub screen: Option<String>,
    /// CSV field delimiter
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Number of gaze clusters
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cluster raw samples or fixation centroids
    #[arg(long, value_parser = ["samples", "fixations"])]
    pub cluster_source: Option<String>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Environment variable holding the pseudonym salt
    #[arg(long)]
    pub salt_env: Option<String>,
    #[arg(long)]
    pub dispersion_px: Option<f64>,
    #[arg(long)]
    pub min_fixation_ms: Option<f64>,
    #[arg(long)]
    pub visibility_timeout_ms: Option<f64>,
    #[arg(long)]
    pub expectancy_window_ms: Option<f64>,
    #[arg(long)]
    pub focus_gap_ms: Option<f64>,
    #[arg(long)]
    pub response_window_ms: Option<f64>,
    #[arg(long)]
    pub highlight_delay_ms: Option<f64>,
    #[arg(long)]
    pub low_threshold: Option<f64>,
    #[arg(long)]
    pub high_threshold: Option<f64>,
}

macro_rules! prefer {
    ($flags:ident, $file:ident, $($field:ident),*) => {
        RunConfig { $($field: $flags.$field.or($file.$field),)* ..$flags }
    };
}

impl RunConfig {
    /// Fill every flag left unset from `file`. Relative paths in the file
    /// resolve against the file's directory.
    pub fn merged_over(self, file: RunConfig, base: &Path) -> RunConfig {
        let rebase = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };
        let file = RunConfig {
            session: file.session.into_iter().map(rebase).collect(),
            meta: file.meta.into_iter().map(rebase).collect(),
            aoi: file.aoi.map(rebase),
            rules: file.rules.map(rebase),
            policy: file.policy.map(rebase),
            out: file.out.map(rebase),
            ..file
        };
        let session = if self.session.is_empty() { file.session.clone() } else { self.session.clone() };
        let meta = if self.meta.is_empty() { file.meta.clone() } else { self.meta.clone() };
        let flags = RunConfig { session, meta, ..self };
        prefer!(
            flags,
            file,
            aoi,
            rules,
            policy,
            screen,
            delimiter,
            k,
            seed,
            cluster_source,
            out,
            salt_env,
            dispersion_px,
            min_fixation_ms,
            visibility_timeout_ms,
            expectancy_window_ms,
            focus_gap_ms,
            response_window_ms,
            highlight_delay_ms,
            low_threshold,
            high_threshold
        )
    }

    pub fn load_file(path: &Path) -> Result<RunConfig, Failure> {
        let text = read(path)?;
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
    }

    /// Every input file this run will read.
    pub fn inputs(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = self.session.iter().map(PathBuf::as_path).collect();
        v.extend(self.meta.iter().map(PathBuf::as_path));
        v.extend([&self.aoi, &self.rules, &self.policy].into_iter().flatten().map(PathBuf::as_path));
        v
    }

    pub fn check_inputs_exist(&self) -> Result<(), Failure> {
        let missing: Vec<String> =
            self.inputs().into_iter().filter(|p| !p.is_file()).map(|p| p.display().to_string()).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Failure::usage(format!("input file(s) not found: {}", missing.join(", "))))
        }
    }

    pub fn screen_override(&self) -> Result<Option<(u32, u32)>, Failure> {
        self.screen.as_deref().map(parse_screen).transpose()
    }

    pub fn delimiter_byte(&self) -> Result<u8, Failure> {
        match self.delimiter {
            None => Ok(b','),
            Some(c) if c.is_ascii() => Ok(c as u8),
            Some(c) => Err(Failure::usage(format!("delimiter {c:?} must be a single ASCII character"))),
        }
    }

    pub fn salt_env_name(&self) -> &str {
        self.salt_env.as_deref().unwrap_or(DEFAULT_SALT_ENV)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    pub fn analysis_config(&self) -> Result<AnalysisConfig, Failure> {
        let mut c = AnalysisConfig::default();
        if let Some(p) = &self.policy {
            let text = read(p)?;
            c.policy = serde_json::from_str::<AdaptationPolicy>(&text)
                .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
        }
        c.rules = match &self.rules {
            Some(p) => rules_from_json(&read(p)?).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
            None => default_rules(),
        };
        validate_rules(&c.rules).map_err(|e| Failure::usage(e.to_string()))?;
        if let Some(k) = self.k {
            c.k = k;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(src) = &self.cluster_source {
            c.cluster_source = if src == "fixations" { ClusterSource::Fixations } else { ClusterSource::Samples };
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut c.fixation.dispersion_px, self.dispersion_px);
        set(&mut c.fixation.min_duration_ms, self.min_fixation_ms);
        set(&mut c.visibility_timeout_ms, self.visibility_timeout_ms);
        set(&mut c.metrics.expectancy_window_ms, self.expectancy_window_ms);
        set(&mut c.metrics.focus_gap_ms, self.focus_gap_ms);
        set(&mut c.metrics.response_window_ms, self.response_window_ms);
        set(&mut c.policy.highlight_delay_ms, self.highlight_delay_ms);
        set(&mut c.policy.low_threshold, self.low_threshold);
        set(&mut c.policy.high_threshold, self.high_threshold);
        c.policy.validate().map_err(|e| Failure::usage(e.to_string()))?;
        Ok(c)
    }
}

pub fn parse_screen(text: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::usage(format!("screen geometry {text:?} is not of the form WIDTHxHEIGHT"));
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: u32 = w.trim().parse().map_err(|_| bad())?;
    let h: u32 = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let flags = RunConfig { k: Some(3), session: vec!["a.csv".into()], ..RunConfig::default() };
        let file = RunConfig {
            k: Some(6),
            seed: Some(9),
            session: vec!["b.csv".into()],
            aoi: Some("aoi.json".into()),
            ..RunConfig::default()
        };
        let m = flags.merged_over(file, Path::new("/cfg"));
        assert_eq!(m.k, Some(3));
        assert_eq!(m.seed, Some(9));
        assert_eq!(m.session, vec![PathBuf::from("a.csv")]);
        assert_eq!(m.aoi, Some(PathBuf::from("/cfg/aoi.json")));
    }

    #[test]
    fn screen_geometry() {
        assert_eq!(parse_screen("1920x1080").unwrap(), (1920, 1080));
        assert!(parse_screen("1920").is_err());
        assert!(parse_screen("0x5").is_err());
    }
}
