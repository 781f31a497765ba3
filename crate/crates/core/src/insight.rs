//! Declarative threshold rules that turn metrics into teacher-facing
//! insights. Each insight carries the evidence needed to re-check it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{DwellReport, MetricSuite};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {code} refers to unknown metric `{metric}`")]
    UnknownMetricInRule { code: String, metric: String },
    #[error("rule {0} has a non-finite threshold")]
    BadThreshold(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparator {
    #[serde(alias = ">")]
    Gt,
    #[serde(alias = ">=")]
    Ge,
    #[serde(alias = "<")]
    Lt,
    #[serde(alias = "<=")]
    Le,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Gt => value > threshold,
            Comparator::Ge => value >= threshold,
            Comparator::Lt => value < threshold,
            Comparator::Le => value <= threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Notice,
    Concern,
}

/// One comparison that justified a decision, with the data it rests on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub metric_name: String,
    pub value: f64,
    pub comparator: Comparator,
    pub threshold: f64,
    /// Individual observations that each satisfied the comparison, when the
    /// decision needed several (e.g. consecutive windows).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observations: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_range: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub event_refs: Vec<String>,
}

impl Evidence {
    /// Re-evaluate the comparison from the recorded values alone.
    pub fn holds(&self) -> bool {
        self.comparator.holds(self.value, self.threshold)
            && self.observations.iter().all(|o| self.comparator.holds(*o, self.threshold))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub code: String,
    pub metric: String,
    pub comparator: Comparator,
    pub threshold: f64,
    pub severity: Severity,
    /// Template; `{value}`, `{threshold}` and `{metric}` are substituted.
    pub narrative: String,
    #[serde(default = "default_rule_version")]
    pub version: String,
}

fn default_rule_version() -> String {
    "v1".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Insight {
    pub code: String,
    pub severity: Severity,
    pub narrative: String,
    pub evidence: Vec<Evidence>,
    pub rule_version: String,
}

impl Insight {
    pub fn re_evaluate(&self) -> bool {
        !self.evidence.is_empty() && self.evidence.iter().all(Evidence::holds)
    }
}

pub const KNOWN_METRICS: &[&str] = &[
    "dominant_quadrant_fraction",
    "expectancy_rate",
    "fixation_count",
    "focus_loss_count",
    "focus_loss_fraction",
    "inhibitory_control_score",
    "invalid_fraction",
    "left_fraction",
    "mean_fixation_ms",
    "non_aoi_fraction",
    "right_fraction",
    "sustained_attention_score",
];

#[derive(Debug, Clone, PartialEq)]
pub struct MetricValue {
    pub value: Option<f64>,
    pub sample_range: Option<[usize; 2]>,
    pub event_refs: Vec<String>,
}

impl MetricValue {
    fn plain(value: Option<f64>) -> Self {
        MetricValue { value, sample_range: None, event_refs: Vec::new() }
    }
}

/// Every rule-addressable metric with the references backing it.
pub fn metric_catalog(metrics: &MetricSuite, dwell: &DwellReport) -> BTreeMap<&'static str, MetricValue> {
    let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);
    let loss_range = match (metrics.focus_loss_episodes.first(), metrics.focus_loss_episodes.last()) {
        (Some(a), Some(b)) => Some([a.first_sample, b.last_sample]),
        _ => None,
    };
    let mut c = BTreeMap::new();
    c.insert("dominant_quadrant_fraction", MetricValue::plain(dwell.dominant_quadrant_fraction));
    c.insert(
        "expectancy_rate",
        MetricValue {
            value: metrics.expectancy_rate,
            sample_range: None,
            event_refs: metrics.expectancy_outcomes.iter().filter(|o| o.anticipated).map(|o| o.event_ref.clone()).collect(),
        },
    );
    c.insert("fixation_count", MetricValue::plain(Some(metrics.fixation_count as f64)));
    c.insert(
        "focus_loss_count",
        MetricValue { value: Some(metrics.focus_loss_episodes.len() as f64), sample_range: loss_range, event_refs: vec![] },
    );
    c.insert(
        "focus_loss_fraction",
        MetricValue { value: ratio(metrics.focus_loss_ms, metrics.session_ms), sample_range: loss_range, event_refs: vec![] },
    );
    c.insert(
        "inhibitory_control_score",
        MetricValue {
            value: metrics.inhibitory_control_score,
            sample_range: None,
            event_refs: metrics.distractor_episodes.iter().filter(|e| e.looked).map(|e| e.event_ref.clone()).collect(),
        },
    );
    c.insert("invalid_fraction", MetricValue::plain(ratio(dwell.invalid_ms, dwell.total_ms)));
    c.insert("left_fraction", MetricValue::plain(dwell.left_fraction));
    c.insert("mean_fixation_ms", MetricValue::plain(metrics.mean_fixation_ms));
    c.insert("non_aoi_fraction", MetricValue::plain(ratio(dwell.non_aoi_ms, dwell.valid_ms())));
    c.insert("right_fraction", MetricValue::plain(dwell.right_fraction));
    c.insert(
        "sustained_attention_score",
        MetricValue {
            value: metrics.sustained_attention_score,
            sample_range: None,
            event_refs: metrics.attention_episodes.iter().filter(|e| e.attended).map(|e| e.event_ref.clone()).collect(),
        },
    );
    debug_assert_eq!(c.len(), KNOWN_METRICS.len());
    c
}

pub fn validate_rules(rules: &[Rule]) -> Result<(), RuleError> {
    for r in rules {
        if !KNOWN_METRICS.contains(&r.metric.as_str()) {
            return Err(RuleError::UnknownMetricInRule { code: r.code.clone(), metric: r.metric.clone() });
        }
        if !r.threshold.is_finite() {
            return Err(RuleError::BadThreshold(r.code.clone()));
        }
    }
    Ok(())
}

/// Integers print bare, everything else with two decimals.
pub fn format_number(v: f64) -> String {
    let v = v + 0.0;
    if v.fract() == 0.0 && v.abs() < 1e12 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn render_narrative(template: &str, metric: &str, value: f64, threshold: f64) -> String {
    template
        .replace("{value}", &format_number(value))
        .replace("{threshold}", &format_number(threshold))
        .replace("{metric}", metric)
}

/// Evaluate each rule once against the metric catalogue. Rules whose metric
/// is absent for this session do not fire.
pub fn derive_insights(metrics: &MetricSuite, dwell: &DwellReport, rules: &[Rule]) -> Result<Vec<Insight>, RuleError> {
    validate_rules(rules)?;
    let catalog = metric_catalog(metrics, dwell);
    let mut out = Vec::new();
    for rule in rules {
        let entry = &catalog[rule.metric.as_str()];
        let Some(value) = entry.value else { continue };
        if !rule.comparator.holds(value, rule.threshold) {
            continue;
        }
        out.push(Insight {
            code: rule.code.clone(),
            severity: rule.severity,
            narrative: render_narrative(&rule.narrative, &rule.metric, value, rule.threshold),
            evidence: vec![Evidence {
                metric_name: rule.metric.clone(),
                value,
                comparator: rule.comparator,
                threshold: rule.threshold,
                observations: Vec::new(),
                sample_range: entry.sample_range,
                event_refs: entry.event_refs.clone(),
            }],
            rule_version: rule.version.clone(),
        });
    }
    Ok(out)
}

/// Shipped rule set, ordered alphabetically by code.
pub fn default_rules() -> Vec<Rule> {
    let rule = |code: &str, metric: &str, comparator, threshold, severity, narrative: &str| Rule {
        code: code.into(),
        metric: metric.into(),
        comparator,
        threshold,
        severity,
        narrative: narrative.into(),
        version: default_rule_version(),
    };
    vec![
        rule(
            "FREQUENT_FOCUS_LOSS",
            "focus_loss_fraction",
            Comparator::Ge,
            0.25,
            Severity::Concern,
            "Gaze was away from the visible stimuli for a share of {value} of the session (threshold {threshold}). \
             This could indicate loss of focus or motivation during play.",
        ),
        rule(
            "LIMITED_VISUAL_EXPLORATION",
            "dominant_quadrant_fraction",
            Comparator::Ge,
            0.6,
            Severity::Notice,
            "A share of {value} of valid gaze time stayed in a single screen quadrant (threshold {threshold}). \
             This could indicate limited visual exploration.",
        ),
        rule(
            "LOW_INHIBITORY_CONTROL",
            "inhibitory_control_score",
            Comparator::Lt,
            0.5,
            Severity::Concern,
            "Only a share of {value} of distractor appearances were left unattended (threshold {threshold}). \
             This could indicate difficulty holding back looks toward distractors.",
        ),
        rule(
            "POSITIVE_SUSTAINED_ATTENTION",
            "sustained_attention_score",
            Comparator::Ge,
            0.8,
            Severity::Info,
            "Targets were fixated while visible in a share of {value} of appearances (threshold {threshold}). \
             This suggests attention was sustained on the task.",
        ),
        rule(
            "SIDE_PREFERENCE_LEFT",
            "left_fraction",
            Comparator::Ge,
            0.7,
            Severity::Notice,
            "A share of {value} of valid gaze time fell on the left half of the screen (threshold {threshold}). \
             This could indicate a preference for stimuli on that side.",
        ),
    ]
}

pub fn rules_from_json(text: &str) -> Result<Vec<Rule>, serde_json::Error> {
    serde_json::from_str(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub participant_pseudonym: String,
    pub config_hash: String,
    pub sample_count: usize,
    pub valid_sample_count: usize,
    pub cluster_ranking: Option<String>,
}

pub const REPORT_SCHEMA: &str = "gazelens.report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineReport {
    pub schema: String,
    pub meta: ReportMeta,
    pub definition_version: String,
    pub flags_raised: usize,
    pub insights: Vec<Insight>,
    pub metrics: MetricSuite,
    pub dwell: DwellReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub markdown: String,
    pub json: String,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "absent".to_string(), format_number)
}

pub fn evidence_table(evidence: &[Evidence]) -> String {
    let mut t = String::from("| metric | value | test | threshold | references |\n|---|---|---|---|---|\n");
    for e in evidence {
        let mut refs: Vec<String> = e.event_refs.clone();
        if let Some([a, b]) = e.sample_range {
            refs.push(format!("samples {a}..={b}"));
        }
        let _ = writeln!(
            t,
            "| {} | {} | {} | {} | {} |",
            e.metric_name,
            format_number(e.value),
            e.comparator.symbol(),
            format_number(e.threshold),
            if refs.is_empty() { "-".into() } else { refs.join(", ") }
        );
    }
    t
}

/// Render the human (markdown) and machine (JSON) reports. Output depends
/// only on the arguments.
pub fn render_report(insights: &[Insight], metrics: &MetricSuite, dwell: &DwellReport, meta: &ReportMeta) -> Report {
    let mut md = String::new();
    let _ = writeln!(md, "# Session insight report\n");
    let _ = writeln!(md, "- participant: `{}`", meta.participant_pseudonym);
    let _ = writeln!(md, "- metric definitions: {}", metrics.definition_version);
    let _ = writeln!(md, "- engine configuration: `{}`", meta.config_hash);
    let _ = writeln!(md, "- samples: {} ({} valid)", meta.sample_count, meta.valid_sample_count);
    if let Some(r) = &meta.cluster_ranking {
        let _ = writeln!(md, "- gaze clusters: {r}");
    }
    let _ = writeln!(md, "\n## Metrics\n");
    let _ = writeln!(md, "| metric | value |\n|---|---|");
    let rows = [
        ("session duration (ms)", Some(metrics.session_ms)),
        ("fixations", Some(metrics.fixation_count as f64)),
        ("mean fixation duration (ms)", metrics.mean_fixation_ms),
        ("sustained attention score", metrics.sustained_attention_score),
        ("stimuli expectancy rate", metrics.expectancy_rate),
        ("inhibitory control score", metrics.inhibitory_control_score),
        ("focus-loss episodes", Some(metrics.focus_loss_episodes.len() as f64)),
        ("focus-loss time (ms)", Some(metrics.focus_loss_ms)),
        ("left-half gaze share", dwell.left_fraction),
        ("right-half gaze share", dwell.right_fraction),
    ];
    for (name, v) in rows {
        let _ = writeln!(md, "| {name} | {} |", opt(v));
    }
    let _ = writeln!(md, "\n### Dwell by area of interest (ms)\n");
    let _ = writeln!(md, "| area | inclusive | exclusive |\n|---|---|---|");
    for (id, ms) in &dwell.aoi_ms {
        let _ = writeln!(md, "| {id} | {} | {} |", format_number(*ms), format_number(dwell.aoi_exclusive_ms[id]));
    }
    let _ = writeln!(md, "| outside all areas | - | {} |", format_number(dwell.non_aoi_ms));
    let _ = writeln!(md, "| tracking lost | - | {} |", format_number(dwell.invalid_ms));

    let _ = writeln!(md, "\n## Insights\n");
    if insights.is_empty() {
        let _ = writeln!(md, "No flags raised.");
    }
    for ins in insights {
        let sev = match ins.severity {
            Severity::Info => "info",
            Severity::Notice => "notice",
            Severity::Concern => "concern",
        };
        let _ = writeln!(md, "### {} ({sev}, rule {})\n", ins.code, ins.rule_version);
        let _ = writeln!(md, "{}\n", ins.narrative);
        let _ = writeln!(md, "{}", evidence_table(&ins.evidence));
    }
    let _ = writeln!(md, "## Definitions\n");
    for (name, def) in &metrics.definitions {
        let _ = writeln!(md, "- {name}: {def}");
    }

    let machine = MachineReport {
        schema: REPORT_SCHEMA.into(),
        meta: meta.clone(),
        definition_version: metrics.definition_version.clone(),
        flags_raised: insights.len(),
        insights: insights.to_vec(),
        metrics: metrics.clone(),
        dwell: dwell.clone(),
    };
    let json = serde_json::to_string_pretty(&machine).expect("report is serializable") + "\n";
    Report { markdown: md, json }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparators() {
        assert!(Comparator::Gt.holds(1.0, 0.5));
        assert!(!Comparator::Gt.holds(0.5, 0.5));
        assert!(Comparator::Ge.holds(0.5, 0.5));
        assert!(Comparator::Lt.holds(0.4, 0.5));
        assert!(Comparator::Le.holds(0.5, 0.5));
    }

    #[test]
    fn unknown_metric_rejected() {
        let mut rules = default_rules();
        rules[0].metric = "mood".into();
        assert_eq!(
            validate_rules(&rules),
            Err(RuleError::UnknownMetricInRule { code: "FREQUENT_FOCUS_LOSS".into(), metric: "mood".into() })
        );
    }

    #[test]
    fn defaults_are_alphabetical_and_known() {
        let rules = default_rules();
        let codes: Vec<_> = rules.iter().map(|r| r.code.clone()).collect();
        let mut sorted = codes.clone();
        sorted.sort();
        assert_eq!(codes, sorted);
        validate_rules(&rules).unwrap();
    }

    #[test]
    fn rules_json_accepts_symbols() {
        let text = r#"[{"code":"X","metric":"left_fraction","comparator":">=","threshold":0.7,
                        "severity":"notice","narrative":"left {value}"}]"#;
        let rules = rules_from_json(text).unwrap();
        assert_eq!(rules[0].comparator, Comparator::Ge);
        assert_eq!(rules[0].version, "v1");
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(0.8), "0.80");
        assert_eq!(format_number(2.0 / 3.0), "0.67");
    }
}
