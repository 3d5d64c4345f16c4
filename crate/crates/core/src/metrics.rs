//! The eight interface coverage metrics.
//!
//! Every metric is a micro-averaged ratio: documented elements are pooled
//! across all operations, and an element counts as covered as soon as one
//! matched interaction exercises it. Element sets are built from the model
//! alone, so denominators never depend on the traffic; numerators only ever
//! look at matched interactions, so unmatched traffic can lower nothing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::matcher::{MatchOutcome, StatusClass, UndocumentedInput, UnmatchReason};
use crate::method::HttpMethod;
use crate::spec_model::{ApiModel, OperationSpec, ParameterLocation, StatusKey};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricValue {
    Computed { numerator: u64, denominator: u64 },
    NotComputable { reason: String },
}

impl MetricValue {
    /// `NotComputable` with `reason` when the denominator is zero.
    pub fn from_counts(numerator: u64, denominator: u64, reason: &str) -> MetricValue {
        if denominator == 0 {
            return MetricValue::NotComputable {
                reason: reason.to_string(),
            };
        }
        assert!(numerator <= denominator, "{numerator}/{denominator}");
        MetricValue::Computed {
            numerator,
            denominator,
        }
    }

    pub fn ratio(&self) -> Option<f64> {
        match self {
            MetricValue::Computed {
                numerator,
                denominator,
            } => Some(*numerator as f64 / *denominator as f64),
            MetricValue::NotComputable { .. } => None,
        }
    }

    pub fn counts(&self) -> Option<(u64, u64)> {
        match self {
            MetricValue::Computed {
                numerator,
                denominator,
            } => Some((*numerator, *denominator)),
            MetricValue::NotComputable { .. } => None,
        }
    }

    pub fn is_computed(&self) -> bool {
        matches!(self, MetricValue::Computed { .. })
    }
}

impl fmt::Display for MetricValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricValue::Computed {
                numerator,
                denominator,
            } => write!(
                f,
                "{numerator}/{denominator} {:.1}%",
                100.0 * *numerator as f64 / *denominator as f64
            ),
            MetricValue::NotComputable { reason } => write!(f, "n/a ({reason})"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MetricStatus {
    Computed,
    NotComputable,
}

#[derive(Serialize, Deserialize)]
struct MetricRepr {
    status: MetricStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    numerator: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    denominator: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    reason: Option<String>,
}

impl Serialize for MetricValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            MetricValue::Computed {
                numerator,
                denominator,
            } => MetricRepr {
                status: MetricStatus::Computed,
                ratio: self.ratio(),
                numerator: Some(*numerator),
                denominator: Some(*denominator),
                reason: None,
            },
            MetricValue::NotComputable { reason } => MetricRepr {
                status: MetricStatus::NotComputable,
                ratio: None,
                numerator: None,
                denominator: None,
                reason: Some(reason.clone()),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MetricValue {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = MetricRepr::deserialize(deserializer)?;
        match repr.status {
            MetricStatus::Computed => {
                let (Some(n), Some(d)) = (repr.numerator, repr.denominator) else {
                    return Err(D::Error::custom(
                        "computed metric without numerator/denominator",
                    ));
                };
                if d == 0 || n > d {
                    return Err(D::Error::custom(format!("invalid ratio {n}/{d}")));
                }
                Ok(MetricValue::Computed {
                    numerator: n,
                    denominator: d,
                })
            }
            MetricStatus::NotComputable => Ok(MetricValue::NotComputable {
                reason: repr.reason.unwrap_or_default(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Path,
    Operation,
    Parameter,
    ParameterValue,
    RequestContentType,
    StatusCodeClass,
    StatusCode,
    ResponseContentType,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Path,
        Metric::Operation,
        Metric::Parameter,
        Metric::ParameterValue,
        Metric::RequestContentType,
        Metric::StatusCodeClass,
        Metric::StatusCode,
        Metric::ResponseContentType,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Path => "path",
            Metric::Operation => "operation",
            Metric::Parameter => "parameter",
            Metric::ParameterValue => "parameter_value",
            Metric::RequestContentType => "request_content_type",
            Metric::StatusCodeClass => "status_code_class",
            Metric::StatusCode => "status_code",
            Metric::ResponseContentType => "response_content_type",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown metric {0:?}")]
pub struct UnknownMetric(pub String);

impl FromStr for Metric {
    type Err = UnknownMetric;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSet {
    pub path: MetricValue,
    pub operation: MetricValue,
    pub parameter: MetricValue,
    pub parameter_value: MetricValue,
    pub request_content_type: MetricValue,
    pub status_code_class: MetricValue,
    pub status_code: MetricValue,
    pub response_content_type: MetricValue,
}

impl MetricSet {
    pub fn get(&self, metric: Metric) -> &MetricValue {
        match metric {
            Metric::Path => &self.path,
            Metric::Operation => &self.operation,
            Metric::Parameter => &self.parameter,
            Metric::ParameterValue => &self.parameter_value,
            Metric::RequestContentType => &self.request_content_type,
            Metric::StatusCodeClass => &self.status_code_class,
            Metric::StatusCode => &self.status_code,
            Metric::ResponseContentType => &self.response_content_type,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Metric, &MetricValue)> {
        Metric::ALL.into_iter().map(move |m| (m, self.get(m)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParameterCoverage {
    pub name: String,
    pub location: ParameterLocation,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValueCoverage {
    pub name: String,
    pub location: ParameterLocation,
    pub literal: String,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCodeDetail {
    /// Every response key as documented, including `default` and ranges.
    pub documented_keys: Vec<String>,
    /// Observed codes, documented or not.
    pub observed: Vec<u16>,
    pub covered: Vec<u16>,
    pub uncovered: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentTypeDetail {
    pub documented: Vec<String>,
    pub has_wildcard: bool,
    pub observed: Vec<String>,
    pub covered: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationDetail {
    pub method: HttpMethod,
    pub path: String,
    pub operation_id: Option<String>,
    pub matched_interactions: u64,
    pub parameters: Vec<ParameterCoverage>,
    pub parameter_values: Vec<ValueCoverage>,
    pub status_codes: StatusCodeDetail,
    /// Shown for inspection only; the class metric is global.
    pub status_classes: Vec<StatusClass>,
    /// `None` when no request body is documented.
    pub request_content_types: Option<ContentTypeDetail>,
    pub response_content_types: ContentTypeDetail,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OperationRef {
    pub method: HttpMethod,
    pub path: String,
}

impl OperationRef {
    fn of(op: &OperationSpec) -> Self {
        OperationRef {
            method: op.method,
            path: op.path().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UnmatchedCounts {
    pub no_server_prefix: u64,
    pub no_path: u64,
    pub no_method: u64,
}

impl UnmatchedCounts {
    pub fn total(&self) -> u64 {
        self.no_server_prefix + self.no_path + self.no_method
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UndocumentedStatus {
    pub method: HttpMethod,
    pub path: String,
    pub status: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UndocumentedParameter {
    pub method: HttpMethod,
    pub path: String,
    pub location: ParameterLocation,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExcludedStatusKey {
    pub method: HttpMethod,
    pub path: String,
    pub key: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub total_interactions: u64,
    pub matched_interactions: u64,
    pub unmatched: UnmatchedCounts,
    pub undocumented_status_codes: Vec<UndocumentedStatus>,
    pub undocumented_parameters: Vec<UndocumentedParameter>,
    /// `default` and `NXX` keys, left out of the status code denominator.
    pub excluded_status_keys: Vec<ExcludedStatusKey>,
    pub wildcard_request_operations: Vec<OperationRef>,
    pub wildcard_response_operations: Vec<OperationRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub metrics: MetricSet,
    pub per_operation: Vec<OperationDetail>,
    pub diagnostics: Diagnostics,
}

const NO_PATHS: &str = "no documented paths";
const NO_OPERATIONS: &str = "no documented operations";
const NO_PARAMETERS: &str = "no documented parameters";
const NO_LIMITED: &str = "no domain-limited parameters";
const NO_REQUEST_TYPES: &str = "no operation documents a request body with concrete content types";
const NO_CODES: &str = "no operation documents a numeric status code";
const NO_RESPONSE_TYPES: &str = "no operation documents concrete response content types";

/// What the matched traffic did to one operation.
#[derive(Debug, Default)]
struct OperationUsage {
    hits: u64,
    params: BTreeSet<(String, ParameterLocation)>,
    values: BTreeSet<(String, ParameterLocation, String)>,
    request_types: BTreeSet<String>,
    response_types: BTreeSet<String>,
    statuses: BTreeSet<u16>,
    classes: BTreeSet<StatusClass>,
    undocumented: BTreeSet<UndocumentedInput>,
}

struct Usage<'a> {
    model: &'a ApiModel,
    /// Parallel to `model.operations`.
    per_op: Vec<OperationUsage>,
    classes: BTreeSet<StatusClass>,
}

impl<'a> Usage<'a> {
    fn collect(model: &'a ApiModel, outcome: &MatchOutcome<'_>) -> Usage<'a> {
        let index: BTreeMap<(&str, HttpMethod), usize> = model
            .operations
            .iter()
            .enumerate()
            .map(|(i, op)| ((op.path(), op.method), i))
            .collect();
        let mut per_op: Vec<OperationUsage> = model
            .operations
            .iter()
            .map(|_| OperationUsage::default())
            .collect();
        let mut classes = BTreeSet::new();

        for m in &outcome.matched {
            let Some(&i) = index.get(&(m.operation.path(), m.operation.method)) else {
                continue;
            };
            let usage = &mut per_op[i];
            usage.hits += 1;
            for obs in &m.observed_params {
                let key = (obs.spec.name.clone(), obs.spec.location);
                if obs.spec.domain.is_limited() {
                    let value = obs.spec.domain.canonicalize_observed(&obs.raw_value);
                    usage.values.insert((key.0.clone(), key.1, value));
                }
                usage.params.insert(key);
            }
            usage.request_types.extend(m.request_media_type.clone());
            usage.response_types.extend(m.response_media_type.clone());
            usage.statuses.insert(m.interaction.status);
            usage.classes.insert(m.status_class);
            usage
                .undocumented
                .extend(m.undocumented_inputs.iter().cloned());
            classes.insert(m.status_class);
        }
        Usage {
            model,
            per_op,
            classes,
        }
    }

    fn ops(&self) -> impl Iterator<Item = (&'a OperationSpec, &OperationUsage)> {
        self.model.operations.iter().zip(&self.per_op)
    }

    fn path(&self) -> MetricValue {
        let mut hit: BTreeMap<&str, bool> = BTreeMap::new();
        for (op, usage) in self.ops() {
            *hit.entry(op.path()).or_default() |= usage.hits > 0;
        }
        let covered = hit.values().filter(|h| **h).count() as u64;
        MetricValue::from_counts(covered, hit.len() as u64, NO_PATHS)
    }

    fn operation(&self) -> MetricValue {
        let covered = self.per_op.iter().filter(|u| u.hits > 0).count() as u64;
        MetricValue::from_counts(covered, self.per_op.len() as u64, NO_OPERATIONS)
    }

    fn parameter(&self) -> MetricValue {
        let (mut n, mut d) = (0, 0);
        for (op, usage) in self.ops() {
            for p in &op.parameters {
                d += 1;
                if usage.params.contains(&(p.name.clone(), p.location)) {
                    n += 1;
                }
            }
        }
        MetricValue::from_counts(n, d, NO_PARAMETERS)
    }

    fn parameter_value(&self) -> MetricValue {
        let (mut n, mut d) = (0, 0);
        for (op, usage) in self.ops() {
            for p in op.parameters.iter().filter(|p| p.domain.is_limited()) {
                for lit in p.domain.literals() {
                    d += 1;
                    if usage
                        .values
                        .contains(&(p.name.clone(), p.location, lit.clone()))
                    {
                        n += 1;
                    }
                }
            }
        }
        MetricValue::from_counts(n, d, NO_LIMITED)
    }

    fn request_content_type(&self) -> MetricValue {
        let (mut n, mut d) = (0, 0);
        for (op, usage) in self.ops() {
            let Some(types) = &op.request_media_types else {
                continue;
            };
            if types.has_wildcard() {
                continue;
            }
            for t in types.media_types() {
                d += 1;
                if usage.request_types.contains(t) {
                    n += 1;
                }
            }
        }
        MetricValue::from_counts(n, d, NO_REQUEST_TYPES)
    }

    fn status_code_class(&self) -> MetricValue {
        class_metric(&self.classes)
    }

    fn status_code(&self) -> MetricValue {
        let (mut n, mut d) = (0, 0);
        for (op, usage) in self.ops() {
            for code in op.documented_codes() {
                d += 1;
                if usage.statuses.contains(&code) {
                    n += 1;
                }
            }
        }
        MetricValue::from_counts(n, d, NO_CODES)
    }

    fn response_content_type(&self) -> MetricValue {
        let (mut n, mut d) = (0, 0);
        for (op, usage) in self.ops() {
            let types = op.response_media_types();
            if types.has_wildcard() {
                continue;
            }
            for t in types.media_types() {
                d += 1;
                if usage.response_types.contains(t) {
                    n += 1;
                }
            }
        }
        MetricValue::from_counts(n, d, NO_RESPONSE_TYPES)
    }

    fn metrics(&self) -> MetricSet {
        MetricSet {
            path: self.path(),
            operation: self.operation(),
            parameter: self.parameter(),
            parameter_value: self.parameter_value(),
            request_content_type: self.request_content_type(),
            status_code_class: self.status_code_class(),
            status_code: self.status_code(),
            response_content_type: self.response_content_type(),
        }
    }

    fn detail(op: &OperationSpec, usage: &OperationUsage) -> OperationDetail {
        let parameters = op
            .parameters
            .iter()
            .map(|p| ParameterCoverage {
                name: p.name.clone(),
                location: p.location,
                covered: usage.params.contains(&(p.name.clone(), p.location)),
            })
            .collect();
        let parameter_values = op
            .parameters
            .iter()
            .filter(|p| p.domain.is_limited())
            .flat_map(|p| {
                p.domain.literals().iter().map(move |lit| ValueCoverage {
                    name: p.name.clone(),
                    location: p.location,
                    literal: lit.clone(),
                    covered: usage
                        .values
                        .contains(&(p.name.clone(), p.location, lit.clone())),
                })
            })
            .collect();
        let (covered, uncovered) = op
            .documented_codes()
            .partition(|c| usage.statuses.contains(c));
        let content = |documented: &[String], has_wildcard: bool, observed: &BTreeSet<String>| {
            ContentTypeDetail {
                documented: documented.to_vec(),
                has_wildcard,
                observed: observed.iter().cloned().collect(),
                covered: documented
                    .iter()
                    .filter(|t| !has_wildcard && observed.contains(*t))
                    .cloned()
                    .collect(),
            }
        };
        let response_types = op.response_media_types();
        OperationDetail {
            method: op.method,
            path: op.path().to_string(),
            operation_id: op.operation_id.clone(),
            matched_interactions: usage.hits,
            parameters,
            parameter_values,
            status_codes: StatusCodeDetail {
                documented_keys: op
                    .responses
                    .iter()
                    .map(|r| r.status_key.to_string())
                    .collect(),
                observed: usage.statuses.iter().copied().collect(),
                covered,
                uncovered,
            },
            status_classes: usage.classes.iter().copied().collect(),
            request_content_types: op
                .request_media_types
                .as_ref()
                .map(|t| content(t.media_types(), t.has_wildcard(), &usage.request_types)),
            response_content_types: content(
                response_types.media_types(),
                response_types.has_wildcard(),
                &usage.response_types,
            ),
        }
    }

    fn diagnostics(&self, outcome: &MatchOutcome<'_>) -> Diagnostics {
        let mut d = Diagnostics {
            total_interactions: (outcome.matched.len() + outcome.unmatched.len()) as u64,
            matched_interactions: outcome.matched.len() as u64,
            ..Diagnostics::default()
        };
        for u in &outcome.unmatched {
            match u.reason {
                UnmatchReason::NoServerPrefix => d.unmatched.no_server_prefix += 1,
                UnmatchReason::NoPath => d.unmatched.no_path += 1,
                UnmatchReason::NoMethod => d.unmatched.no_method += 1,
            }
        }
        for (op, usage) in self.ops() {
            let documented: BTreeSet<u16> = op.documented_codes().collect();
            for status in usage.statuses.difference(&documented) {
                d.undocumented_status_codes.push(UndocumentedStatus {
                    method: op.method,
                    path: op.path().to_string(),
                    status: *status,
                });
            }
            for input in &usage.undocumented {
                d.undocumented_parameters.push(UndocumentedParameter {
                    method: op.method,
                    path: op.path().to_string(),
                    location: input.location,
                    name: input.name.clone(),
                });
            }
            for r in &op.responses {
                if !matches!(r.status_key, StatusKey::Code(_)) {
                    d.excluded_status_keys.push(ExcludedStatusKey {
                        method: op.method,
                        path: op.path().to_string(),
                        key: r.status_key.to_string(),
                    });
                }
            }
            if op
                .request_media_types
                .as_ref()
                .is_some_and(|t| t.has_wildcard())
            {
                d.wildcard_request_operations.push(OperationRef::of(op));
            }
            if op.response_media_types().has_wildcard() {
                d.wildcard_response_operations.push(OperationRef::of(op));
            }
        }
        d
    }
}

pub fn path_coverage(model: &ApiModel, outcome: &MatchOutcome<'_>) -> MetricValue {
    Usage::collect(model, outcome).path()
}

pub fn operation_coverage(model: &ApiModel, outcome: &MatchOutcome<'_>) -> MetricValue {
    Usage::collect(model, outcome).operation()
}

pub fn parameter_coverage(model: &ApiModel, outcome: &MatchOutcome<'_>) -> MetricValue {
    Usage::collect(model, outcome).parameter()
}

pub fn parameter_value_coverage(model: &ApiModel, outcome: &MatchOutcome<'_>) -> MetricValue {
    Usage::collect(model, outcome).parameter_value()
}

pub fn request_content_type_coverage(model: &ApiModel, outcome: &MatchOutcome<'_>) -> MetricValue {
    Usage::collect(model, outcome).request_content_type()
}

/// Test-suite level: 2XX is the correct class, 4XX and 5XX the erroneous
/// one. Anything else counts towards neither.
pub fn status_code_class_coverage(outcome: &MatchOutcome<'_>) -> MetricValue {
    let classes: BTreeSet<StatusClass> = outcome.matched.iter().map(|m| m.status_class).collect();
    class_metric(&classes)
}

fn class_metric(observed: &BTreeSet<StatusClass>) -> MetricValue {
    let n = [StatusClass::Correct, StatusClass::Erroneous]
        .iter()
        .filter(|c| observed.contains(c))
        .count() as u64;
    MetricValue::from_counts(n, 2, "")
}

pub fn status_code_coverage(model: &ApiModel, outcome: &MatchOutcome<'_>) -> MetricValue {
    Usage::collect(model, outcome).status_code()
}

pub fn response_content_type_coverage(model: &ApiModel, outcome: &MatchOutcome<'_>) -> MetricValue {
    Usage::collect(model, outcome).response_content_type()
}

pub fn compute_report(model: &ApiModel, outcome: &MatchOutcome<'_>) -> CoverageReport {
    let usage = Usage::collect(model, outcome);
    CoverageReport {
        metrics: usage.metrics(),
        per_operation: usage.ops().map(|(op, u)| Usage::detail(op, u)).collect(),
        diagnostics: usage.diagnostics(outcome),
    }
}
