//! Binding recorded interactions to documented operations.

use std::collections::BTreeMap;

use percent_encoding::percent_decode_str;
use serde::{Deserialize, Serialize};
use url::Url;

use crate::method::HttpMethod;
use crate::spec_model::{
    normalize_media_type, ApiModel, OperationSpec, ParameterLocation, ParameterSpec,
};
use crate::template::split_request_path;
use crate::traffic_log::{Interaction, InteractionLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusClass {
    Correct,
    Erroneous,
    Other,
}

impl StatusClass {
    pub fn of(status: u16) -> StatusClass {
        match status {
            200..=299 => StatusClass::Correct,
            400..=599 => StatusClass::Erroneous,
            _ => StatusClass::Other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnmatchReason {
    NoServerPrefix,
    NoPath,
    NoMethod,
}

impl UnmatchReason {
    pub fn as_str(self) -> &'static str {
        match self {
            UnmatchReason::NoServerPrefix => "no_server_prefix",
            UnmatchReason::NoPath => "no_path",
            UnmatchReason::NoMethod => "no_method",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterObservation<'a> {
    pub spec: &'a ParameterSpec,
    pub raw_value: String,
}

/// An input the request carried that the operation does not document.
/// Only query parameters and cookies are tracked; undocumented headers are
/// the norm (Host, User-Agent, ...) and would only be noise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UndocumentedInput {
    pub location: ParameterLocation,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchedInteraction<'a> {
    pub interaction: &'a Interaction,
    pub operation: &'a OperationSpec,
    pub path_values: BTreeMap<String, String>,
    pub observed_params: Vec<ParameterObservation<'a>>,
    pub undocumented_inputs: Vec<UndocumentedInput>,
    pub request_media_type: Option<String>,
    pub response_media_type: Option<String>,
    pub status_class: StatusClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnmatchedInteraction<'a> {
    pub interaction: &'a Interaction,
    pub reason: UnmatchReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchOutcome<'a> {
    pub matched: Vec<MatchedInteraction<'a>>,
    pub unmatched: Vec<UnmatchedInteraction<'a>>,
}

pub fn match_log<'a>(model: &'a ApiModel, log: &'a InteractionLog) -> MatchOutcome<'a> {
    let bases = model.server_base_paths();
    let mut outcome = MatchOutcome::default();
    for interaction in &log.interactions {
        match match_with_bases(model, &bases, interaction.method, &interaction.url) {
            Ok((operation, path_values)) => {
                let observed_params = extract_parameters(operation, interaction, &path_values);
                outcome.matched.push(MatchedInteraction {
                    interaction,
                    operation,
                    observed_params,
                    undocumented_inputs: undocumented_inputs(operation, interaction),
                    path_values,
                    request_media_type: media_type_of(&interaction.request_headers),
                    response_media_type: media_type_of(&interaction.response_headers),
                    status_class: StatusClass::of(interaction.status),
                });
            }
            Err(reason) => outcome.unmatched.push(UnmatchedInteraction {
                interaction,
                reason,
            }),
        }
    }
    outcome
}

/// Finds the operation a request exercised.
///
/// The longest server base path that prefixes the URL path (on a segment
/// boundary) is stripped, then the remainder is matched against every
/// template. Among templates that match and document `method`, the one with
/// the most concrete segments wins, ties going to the lexicographically
/// smallest template.
pub fn match_operation<'a>(
    model: &'a ApiModel,
    method: HttpMethod,
    url: &Url,
) -> Result<(&'a OperationSpec, BTreeMap<String, String>), UnmatchReason> {
    match_with_bases(model, &model.server_base_paths(), method, url)
}

fn match_with_bases<'a>(
    model: &'a ApiModel,
    bases: &[String],
    method: HttpMethod,
    url: &Url,
) -> Result<(&'a OperationSpec, BTreeMap<String, String>), UnmatchReason> {
    let path = url.path();
    let rest = bases
        .iter()
        .filter_map(|base| strip_base(path, base))
        .min_by_key(|rest| rest.len())
        .ok_or(UnmatchReason::NoServerPrefix)?;
    let segments = split_request_path(rest);

    let mut any_path = false;
    let mut best: Option<(&OperationSpec, BTreeMap<String, String>)> = None;
    for op in &model.operations {
        let Some(values) = op.path_template.match_segments(&segments) else {
            continue;
        };
        any_path = true;
        if op.method != method {
            continue;
        }
        let better = match &best {
            None => true,
            Some((current, _)) => {
                let (a, b) = (
                    op.path_template.concrete_count(),
                    current.path_template.concrete_count(),
                );
                a > b || (a == b && op.path() < current.path())
            }
        };
        if better {
            best = Some((op, values));
        }
    }
    match best {
        Some(found) => Ok(found),
        None if any_path => Err(UnmatchReason::NoMethod),
        None => Err(UnmatchReason::NoPath),
    }
}

fn strip_base<'p>(path: &'p str, base: &str) -> Option<&'p str> {
    let rest = path.strip_prefix(base)?;
    (rest.is_empty() || rest.starts_with('/')).then_some(rest)
}

fn decode(raw: &str) -> String {
    percent_decode_str(raw).decode_utf8_lossy().into_owned()
}

fn cookies(headers: &[(String, String)]) -> impl Iterator<Item = (&str, &str)> {
    headers
        .iter()
        .filter(|(n, _)| n.eq_ignore_ascii_case("cookie"))
        .flat_map(|(_, v)| v.split(';'))
        .filter_map(|pair| {
            let (name, value) = pair.split_once('=')?;
            Some((name.trim(), value.trim()))
        })
}

/// Observations for every documented parameter the request supplied: path
/// parameters first, then query, header and cookie occurrences in wire order.
pub fn extract_parameters<'a>(
    op: &'a OperationSpec,
    interaction: &Interaction,
    path_values: &BTreeMap<String, String>,
) -> Vec<ParameterObservation<'a>> {
    let mut out = Vec::new();
    for spec in op
        .parameters
        .iter()
        .filter(|p| p.location == ParameterLocation::Path)
    {
        if let Some(raw) = path_values.get(&spec.name) {
            out.push(ParameterObservation {
                spec,
                raw_value: decode(raw),
            });
        }
    }
    for (name, value) in interaction.url.query_pairs() {
        if let Some(spec) = op.parameter(&name, ParameterLocation::Query) {
            out.push(ParameterObservation {
                spec,
                raw_value: value.into_owned(),
            });
        }
    }
    for (name, value) in &interaction.request_headers {
        let spec = op
            .parameters
            .iter()
            .find(|p| p.location == ParameterLocation::Header && p.name.eq_ignore_ascii_case(name));
        if let Some(spec) = spec {
            out.push(ParameterObservation {
                spec,
                raw_value: value.clone(),
            });
        }
    }
    for (name, value) in cookies(&interaction.request_headers) {
        if let Some(spec) = op.parameter(name, ParameterLocation::Cookie) {
            out.push(ParameterObservation {
                spec,
                raw_value: value.to_string(),
            });
        }
    }
    out
}

pub fn undocumented_inputs(
    op: &OperationSpec,
    interaction: &Interaction,
) -> Vec<UndocumentedInput> {
    let mut out: Vec<UndocumentedInput> = interaction
        .url
        .query_pairs()
        .filter(|(name, _)| op.parameter(name, ParameterLocation::Query).is_none())
        .map(|(name, _)| UndocumentedInput {
            location: ParameterLocation::Query,
            name: name.into_owned(),
        })
        .chain(
            cookies(&interaction.request_headers)
                .filter(|(name, _)| op.parameter(name, ParameterLocation::Cookie).is_none())
                .map(|(name, _)| UndocumentedInput {
                    location: ParameterLocation::Cookie,
                    name: name.to_string(),
                }),
        )
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Essence (`type/subtype`) of the first `Content-Type` header.
pub fn media_type_of(headers: &[(String, String)]) -> Option<String> {
    headers
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case("content-type"))
        .and_then(|(_, v)| normalize_media_type(v))
}
