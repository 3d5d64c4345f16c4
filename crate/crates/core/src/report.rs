//! Rendering coverage reports and running the analysis pipeline end to end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::matcher::match_log;
use crate::metrics::{compute_report, CoverageReport, Metric, MetricValue};
use crate::spec_model::load_spec_file;
use crate::traffic_log::{read_log_file, InteractionLog};

pub const REPORT_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_THRESHOLD: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Table,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "table" => Ok(OutputFormat::Table),
            other => Err(format!(
                "unknown format {other:?} (expected json, csv or table)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThresholdError {
    #[error("threshold {0:?} is not of the form metric=ratio")]
    Syntax(String),
    #[error(transparent)]
    UnknownMetric(#[from] crate::metrics::UnknownMetric),
    #[error("threshold for {metric} must be within [0, 1], got {value}")]
    OutOfRange { metric: Metric, value: f64 },
}

/// Minimum ratios per metric.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Thresholds(BTreeMap<Metric, f64>);

impl Thresholds {
    pub fn new() -> Self {
        Thresholds::default()
    }

    pub fn insert(&mut self, metric: Metric, minimum: f64) -> Result<(), ThresholdError> {
        if !(0.0..=1.0).contains(&minimum) {
            return Err(ThresholdError::OutOfRange {
                metric,
                value: minimum,
            });
        }
        self.0.insert(metric, minimum);
        Ok(())
    }

    /// Parses `name=ratio`, e.g. `path=0.8`.
    pub fn parse_entry(&mut self, entry: &str) -> Result<(), ThresholdError> {
        let (name, value) = entry
            .split_once('=')
            .ok_or_else(|| ThresholdError::Syntax(entry.to_string()))?;
        let metric: Metric = name.trim().parse()?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| ThresholdError::Syntax(entry.to_string()))?;
        self.insert(metric, value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Metric, f64)> + '_ {
        self.0.iter().map(|(m, v)| (*m, *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdViolation {
    pub metric: Metric,
    pub minimum: f64,
    pub actual: MetricValue,
}

/// Thresholded metrics that are below their minimum or not computable.
pub fn check_thresholds(
    report: &CoverageReport,
    thresholds: &Thresholds,
) -> Vec<ThresholdViolation> {
    thresholds
        .iter()
        .filter_map(|(metric, minimum)| {
            let actual = report.metrics.get(metric);
            let ok = actual.ratio().is_some_and(|r| r >= minimum);
            (!ok).then(|| ThresholdViolation {
                metric,
                minimum,
                actual: actual.clone(),
            })
        })
        .collect()
}

pub fn exit_code_for(report: &CoverageReport, thresholds: &Thresholds) -> i32 {
    if check_thresholds(report, thresholds).is_empty() {
        EXIT_OK
    } else {
        EXIT_THRESHOLD
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec_path: PathBuf,
    pub log_paths: Vec<PathBuf>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub thresholds: Thresholds,
    /// ANSI colors in table output.
    pub color: bool,
}

impl RunConfig {
    pub fn new(spec_path: impl Into<PathBuf>, log_paths: Vec<PathBuf>) -> Self {
        RunConfig {
            spec_path: spec_path.into(),
            log_paths,
            output_format: OutputFormat::Json,
            output_path: None,
            thresholds: Thresholds::new(),
            color: false,
        }
    }
}

#[derive(Serialize)]
struct VersionedRef<'a> {
    restcov_report_version: u32,
    #[serde(flatten)]
    report: &'a CoverageReport,
}

#[derive(Deserialize)]
struct Versioned {
    restcov_report_version: u32,
    #[serde(flatten)]
    report: CoverageReport,
}

pub fn render(report: &CoverageReport, format: OutputFormat) -> Vec<u8> {
    render_with(report, format, false)
}

pub fn render_with(report: &CoverageReport, format: OutputFormat, color: bool) -> Vec<u8> {
    match format {
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(&VersionedRef {
                restcov_report_version: REPORT_VERSION,
                report,
            })
            .expect("report serializes");
            out.push(b'\n');
            out
        }
        OutputFormat::Csv => render_csv(report),
        OutputFormat::Table => render_table(report, color).into_bytes(),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportParseError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported report version {0}")]
    Version(u32),
}

pub fn parse_json_report(bytes: &[u8]) -> Result<CoverageReport, ReportParseError> {
    let v: Versioned = serde_json::from_slice(bytes)?;
    if v.restcov_report_version != REPORT_VERSION {
        return Err(ReportParseError::Version(v.restcov_report_version));
    }
    Ok(v.report)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn render_csv(report: &CoverageReport) -> Vec<u8> {
    let metrics = csv_section(|w| {
        w.write_record([
            "metric",
            "status",
            "numerator",
            "denominator",
            "ratio",
            "reason",
        ])?;
        for (metric, value) in report.metrics.iter() {
            match value {
                MetricValue::Computed {
                    numerator,
                    denominator,
                } => w.write_record([
                    metric.name(),
                    "computed",
                    &numerator.to_string(),
                    &denominator.to_string(),
                    &format!("{:.6}", *numerator as f64 / *denominator as f64),
                    "",
                ])?,
                MetricValue::NotComputable { reason } => {
                    w.write_record([metric.name(), "not_computable", "", "", "", reason])?
                }
            }
        }
        Ok(())
    });
    let operations = csv_section(|w| {
        w.write_record([
            "method",
            "path",
            "operation_id",
            "matched_interactions",
            "parameters_covered",
            "parameters_total",
            "values_covered",
            "values_total",
            "status_codes_documented",
            "status_codes_observed",
            "request_types_documented",
            "request_types_observed",
            "response_types_documented",
            "response_types_observed",
        ])?;
        for op in &report.per_operation {
            let params_covered = op.parameters.iter().filter(|p| p.covered).count();
            let values_covered = op.parameter_values.iter().filter(|v| v.covered).count();
            let (req_doc, req_obs) = op
                .request_content_types
                .as_ref()
                .map(|c| (join(&c.documented), join(&c.observed)))
                .unwrap_or_default();
            w.write_record([
                op.method.as_str(),
                &op.path,
                op.operation_id.as_deref().unwrap_or(""),
                &op.matched_interactions.to_string(),
                &params_covered.to_string(),
                &op.parameters.len().to_string(),
                &values_covered.to_string(),
                &op.parameter_values.len().to_string(),
                &join(&op.status_codes.documented_keys),
                &join(&op.status_codes.observed),
                &req_doc,
                &req_obs,
                &join(&op.response_content_types.documented),
                &join(&op.response_content_types.observed),
            ])?;
        }
        Ok(())
    });
    // A blank line separates the two sections.
    let mut out = metrics;
    out.push(b'\n');
    out.extend(operations);
    out
}

fn csv_section<F>(fill: F) -> Vec<u8>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    fill(&mut w).expect("writing CSV to memory cannot fail");
    w.into_inner().expect("in-memory writer")
}

fn paint(text: &str, value: &MetricValue, color: bool) -> String {
    if !color {
        return text.to_string();
    }
    let code = match value.ratio() {
        None => "2",
        Some(r) if r >= 0.8 => "32",
        Some(r) if r >= 0.5 => "33",
        Some(_) => "31",
    };
    format!("\x1b[{code}m{text}\x1b[0m")
}

fn render_table(report: &CoverageReport, color: bool) -> String {
    let width = Metric::ALL
        .iter()
        .map(|m| m.name().len())
        .max()
        .unwrap_or(0);
    let counts: Vec<String> = report
        .metrics
        .iter()
        .map(|(_, v)| match v.counts() {
            Some((n, d)) => format!("{n}/{d}"),
            None => String::new(),
        })
        .collect();
    let count_width = counts
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max("covered".len());

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>count_width$}  {:>6}",
        "metric", "covered", "ratio"
    );
    for ((metric, value), count) in report.metrics.iter().zip(&counts) {
        let cell = match value {
            MetricValue::Computed { .. } => format!(
                "{count:>count_width$}  {:>5.1}%",
                100.0 * value.ratio().unwrap_or_default()
            ),
            MetricValue::NotComputable { reason } => format!("n/a ({reason})"),
        };
        let _ = writeln!(
            out,
            "{:<width$}  {}",
            metric.name(),
            paint(&cell, value, color)
        );
    }

    let d = &report.diagnostics;
    let _ = writeln!(
        out,
        "\n{} of {} interactions matched; unmatched: {} no_server_prefix, {} no_path, {} no_method",
        d.matched_interactions,
        d.total_interactions,
        d.unmatched.no_server_prefix,
        d.unmatched.no_path,
        d.unmatched.no_method
    );
    if !d.undocumented_status_codes.is_empty() {
        let list: Vec<String> = d
            .undocumented_status_codes
            .iter()
            .map(|u| format!("{} {} -> {}", u.method, u.path, u.status))
            .collect();
        let _ = writeln!(out, "undocumented status codes: {}", list.join(", "));
    }
    if !d.undocumented_parameters.is_empty() {
        let list: Vec<String> = d
            .undocumented_parameters
            .iter()
            .map(|u| format!("{} {} {}:{}", u.method, u.path, u.location, u.name))
            .collect();
        let _ = writeln!(out, "undocumented parameters: {}", list.join(", "));
    }
    out
}

/// Loads the spec and every log, matches, computes and renders. Returns the
/// process exit code: 0 on success, 1 on input errors, 2 when a threshold
/// is not met.
pub fn run_analyze(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match analyze(config, stderr) {
        Ok(report) => {
            let rendered = render_with(&report, config.output_format, config.color);
            let written = match &config.output_path {
                Some(path) => std::fs::write(path, &rendered)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout.write_all(&rendered).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_INPUT_ERROR;
            }
            let violations = check_thresholds(&report, &config.thresholds);
            for v in &violations {
                let _ = writeln!(
                    stderr,
                    "threshold not met: {} = {} (minimum {})",
                    v.metric, v.actual, v.minimum
                );
            }
            if violations.is_empty() {
                EXIT_OK
            } else {
                EXIT_THRESHOLD
            }
        }
        Err(message) => {
            let _ = writeln!(stderr, "error: {message}");
            EXIT_INPUT_ERROR
        }
    }
}

fn analyze(config: &RunConfig, stderr: &mut dyn Write) -> Result<CoverageReport, String> {
    if config.log_paths.is_empty() {
        return Err("at least one log file is required".to_string());
    }
    let model = load_spec_file(&config.spec_path)
        .map_err(|e| format!("spec {}: {e}", config.spec_path.display()))?;
    for w in &model.warnings {
        let _ = writeln!(stderr, "warning: spec {w}");
    }
    let mut log = InteractionLog::default();
    for path in &config.log_paths {
        let (part, warnings) =
            read_log_file(path).map_err(|e| format!("log {}: {e}", path.display()))?;
        for w in warnings {
            let _ = writeln!(stderr, "warning: log {}: {w}", path.display());
        }
        log.extend(part);
    }
    let outcome = match_log(&model, &log);
    Ok(compute_report(&model, &outcome))
}
