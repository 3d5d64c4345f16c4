//! Normalized view of an OpenAPI 3 document.
//!
//! [`load_spec`] parses JSON or YAML, resolves local `$ref` chains and builds
//! an [`ApiModel`]: the list of documented operations with their parameters,
//! request/response media types and documented status keys. Nothing
//! downstream needs to look at the raw document again.
//!
//! Irregularities that can be tolerated (a path variable without a matching
//! parameter, a malformed response key, duplicate enum literals) are collected
//! as [`SpecWarning`]s instead of being repaired.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::method::HttpMethod;
use crate::template::{PathTemplate, TemplateError};

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Parse(String),
    #[error("unsupported document version: {0}")]
    UnsupportedVersion(String),
    #[error("unresolvable reference {reference:?}: {reason}")]
    UnresolvableRef { reference: String, reason: String },
    #[error("external reference {0:?} is not supported")]
    ExternalRef(String),
    #[error(transparent)]
    InvalidTemplate(#[from] TemplateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecFormat {
    Json,
    Yaml,
}

impl SpecFormat {
    /// `{` as the first non-whitespace character means JSON, anything else YAML.
    pub fn sniff(document: &[u8]) -> SpecFormat {
        match document.iter().find(|b| !b.is_ascii_whitespace()) {
            Some(b'{') => SpecFormat::Json,
            _ => SpecFormat::Yaml,
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum ParameterLocation {
    Path,
    Query,
    Header,
    Cookie,
}

impl ParameterLocation {
    pub fn as_str(self) -> &'static str {
        match self {
            ParameterLocation::Path => "path",
            ParameterLocation::Query => "query",
            ParameterLocation::Header => "header",
            ParameterLocation::Cookie => "cookie",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "path" => Some(ParameterLocation::Path),
            "query" => Some(ParameterLocation::Query),
            "header" => Some(ParameterLocation::Header),
            "cookie" => Some(ParameterLocation::Cookie),
            _ => None,
        }
    }
}

impl fmt::Display for ParameterLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Boolean,
    Enum,
    Unbounded,
}

/// The set of values a parameter may take, as far as value coverage cares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueDomain {
    kind: DomainKind,
    literals: Vec<String>,
}

impl ValueDomain {
    pub fn boolean() -> Self {
        ValueDomain {
            kind: DomainKind::Boolean,
            literals: vec!["true".to_string(), "false".to_string()],
        }
    }

    pub fn unbounded() -> Self {
        ValueDomain {
            kind: DomainKind::Unbounded,
            literals: Vec::new(),
        }
    }

    /// Builds an enum domain from already-canonical literals. Duplicates are
    /// dropped (first occurrence wins); an empty list yields `None`.
    pub fn enumeration<I: IntoIterator<Item = String>>(literals: I) -> Option<Self> {
        let mut out: Vec<String> = Vec::new();
        for lit in literals {
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        (!out.is_empty()).then_some(ValueDomain {
            kind: DomainKind::Enum,
            literals: out,
        })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn literals(&self) -> &[String] {
        &self.literals
    }

    pub fn is_limited(&self) -> bool {
        self.kind != DomainKind::Unbounded
    }

    /// Maps an observed wire value onto the form literals are stored in.
    pub fn canonicalize_observed(&self, raw: &str) -> String {
        match self.kind {
            DomainKind::Boolean => raw.to_ascii_lowercase(),
            _ => raw.to_string(),
        }
    }
}

/// Renders an enum literal in minimal JSON text form, with strings unquoted.
pub fn canonical_literal(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => "null".to_string(),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                n.to_string()
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if f.is_finite() && f.fract() == 0.0 && f.abs() < 9.007_199_254_740_992e15 {
                    format!("{}", f as i64)
                } else {
                    n.to_string()
                }
            }
        }
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MediaTypeSet {
    media_types: Vec<String>,
    has_wildcard: bool,
}

impl MediaTypeSet {
    pub fn media_types(&self) -> &[String] {
        &self.media_types
    }

    pub fn has_wildcard(&self) -> bool {
        self.has_wildcard
    }

    pub fn is_empty(&self) -> bool {
        self.media_types.is_empty()
    }

    pub fn contains(&self, media_type: &str) -> bool {
        self.media_types.iter().any(|m| m == media_type)
    }

    pub fn union<'a, I: IntoIterator<Item = &'a MediaTypeSet>>(sets: I) -> MediaTypeSet {
        sets.into_iter()
            .flat_map(|s| s.media_types.iter().cloned())
            .collect()
    }
}

impl<S: AsRef<str>> FromIterator<S> for MediaTypeSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let set: BTreeSet<String> = iter
            .into_iter()
            .filter_map(|m| normalize_media_type(m.as_ref()))
            .collect();
        let media_types: Vec<String> = set.into_iter().collect();
        let has_wildcard = media_types.iter().any(|m| m.contains('*'));
        MediaTypeSet {
            media_types,
            has_wildcard,
        }
    }
}

/// Lowercases a media type and drops any `;`-parameters.
pub fn normalize_media_type(raw: &str) -> Option<String> {
    let essence = raw.split(';').next().unwrap_or("").trim();
    (!essence.is_empty()).then(|| essence.to_ascii_lowercase())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterSpec {
    pub name: String,
    pub location: ParameterLocation,
    pub required: bool,
    pub domain: ValueDomain,
}

/// A documented response key: an exact code, a class range like `4XX`, or `default`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StatusKey {
    Code(u16),
    Range(u8),
    Default,
}

impl StatusKey {
    pub fn parse(raw: &str) -> Option<StatusKey> {
        let raw = raw.trim();
        if raw == "default" {
            return Some(StatusKey::Default);
        }
        let bytes = raw.as_bytes();
        if bytes.len() != 3 || !(b'1'..=b'5').contains(&bytes[0]) {
            return None;
        }
        if bytes[1..].iter().all(u8::is_ascii_digit) {
            return raw.parse().ok().map(StatusKey::Code);
        }
        if bytes[1..] == *b"XX" {
            return Some(StatusKey::Range(bytes[0] - b'0'));
        }
        None
    }

    pub fn code(self) -> Option<u16> {
        match self {
            StatusKey::Code(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for StatusKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatusKey::Code(c) => write!(f, "{c}"),
            StatusKey::Range(d) => write!(f, "{d}XX"),
            StatusKey::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseSpec {
    pub status_key: StatusKey,
    pub media_types: MediaTypeSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationSpec {
    pub path_template: PathTemplate,
    pub method: HttpMethod,
    pub operation_id: Option<String>,
    pub parameters: Vec<ParameterSpec>,
    /// `None` when the operation documents no request body at all.
    pub request_media_types: Option<MediaTypeSet>,
    pub responses: Vec<ResponseSpec>,
}

impl OperationSpec {
    pub fn path(&self) -> &str {
        self.path_template.as_str()
    }

    pub fn label(&self) -> String {
        format!("{} {}", self.method, self.path_template)
    }

    pub fn documented_codes(&self) -> impl Iterator<Item = u16> + '_ {
        self.responses.iter().filter_map(|r| r.status_key.code())
    }

    pub fn response_media_types(&self) -> MediaTypeSet {
        MediaTypeSet::union(self.responses.iter().map(|r| &r.media_types))
    }

    pub fn parameter(&self, name: &str, location: ParameterLocation) -> Option<&ParameterSpec> {
        self.parameters
            .iter()
            .find(|p| p.name == name && p.location == location)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecWarning {
    pub location: String,
    pub message: String,
}

impl fmt::Display for SpecWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiModel {
    pub servers: Vec<String>,
    /// Sorted by (path template, method).
    pub operations: Vec<OperationSpec>,
    pub source_version: String,
    pub warnings: Vec<SpecWarning>,
}

impl ApiModel {
    /// Path components of the server URLs, without trailing slash; the
    /// root server yields the empty string.
    pub fn server_base_paths(&self) -> Vec<String> {
        if self.servers.is_empty() {
            return vec![String::new()];
        }
        let mut out: Vec<String> = self.servers.iter().map(|s| server_base_path(s)).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn path_templates(&self) -> BTreeSet<&str> {
        self.operations.iter().map(|o| o.path()).collect()
    }

    pub fn find_operation(&self, method: HttpMethod, template: &str) -> Option<&OperationSpec> {
        self.operations
            .iter()
            .find(|o| o.method == method && o.path() == template)
    }
}

fn server_base_path(server: &str) -> String {
    let path = match url::Url::parse(server) {
        Ok(u) if u.has_host() || u.scheme() == "file" => u.path().to_string(),
        _ => {
            // Relative server URL such as "/v1" or "v1".
            let end = server.find(['?', '#']).unwrap_or(server.len());
            let p = &server[..end];
            if p.starts_with('/') {
                p.to_string()
            } else {
                format!("/{p}")
            }
        }
    };
    path.trim_end_matches('/').to_string()
}

/// Operations and their domain-limited (boolean or enum) parameters, in
/// (path, method, parameter name) order.
pub fn list_domain_limited_parameters(model: &ApiModel) -> Vec<(&OperationSpec, &ParameterSpec)> {
    let mut out: Vec<_> = model
        .operations
        .iter()
        .flat_map(|op| {
            op.parameters
                .iter()
                .filter(|p| p.domain.is_limited())
                .map(move |p| (op, p))
        })
        .collect();
    out.sort_by(|(a, pa), (b, pb)| {
        (a.path(), a.method, &pa.name, pa.location).cmp(&(
            b.path(),
            b.method,
            &pb.name,
            pb.location,
        ))
    });
    out
}

pub fn load_spec_file(path: impl AsRef<Path>) -> Result<ApiModel, SpecError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let hint = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Some(SpecFormat::Json),
        Some("yaml" | "yml") => Some(SpecFormat::Yaml),
        _ => None,
    };
    load_spec(&bytes, hint)
}

pub fn load_spec(document: &[u8], format_hint: Option<SpecFormat>) -> Result<ApiModel, SpecError> {
    let format = format_hint.unwrap_or_else(|| SpecFormat::sniff(document));
    let root = match format {
        SpecFormat::Json => {
            serde_json::from_slice(document).map_err(|e| SpecError::Parse(e.to_string()))?
        }
        SpecFormat::Yaml => {
            let yaml: serde_yaml::Value =
                serde_yaml::from_slice(document).map_err(|e| SpecError::Parse(e.to_string()))?;
            yaml_to_json(yaml)?
        }
    };
    Loader::new(&root)?.build()
}

fn yaml_to_json(value: serde_yaml::Value) -> Result<Value, SpecError> {
    use serde_yaml::Value as Y;
    Ok(match value {
        Y::Null => Value::Null,
        Y::Bool(b) => Value::Bool(b),
        Y::Number(n) => {
            if let Some(i) = n.as_i64() {
                Value::from(i)
            } else if let Some(u) = n.as_u64() {
                Value::from(u)
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                serde_json::Number::from_f64(f)
                    .map(Value::Number)
                    .ok_or_else(|| SpecError::Parse(format!("non-finite number {f}")))?
            }
        }
        Y::String(s) => Value::String(s),
        Y::Sequence(items) => Value::Array(
            items
                .into_iter()
                .map(yaml_to_json)
                .collect::<Result<_, _>>()?,
        ),
        Y::Mapping(map) => {
            let mut out = serde_json::Map::new();
            for (k, v) in map {
                let key = match k {
                    Y::String(s) => s,
                    Y::Number(n) => n.to_string(),
                    Y::Bool(b) => b.to_string(),
                    Y::Null => "null".to_string(),
                    other => {
                        return Err(SpecError::Parse(format!(
                            "unsupported mapping key {other:?}"
                        )))
                    }
                };
                out.insert(key, yaml_to_json(v)?);
            }
            Value::Object(out)
        }
        Y::Tagged(tagged) => yaml_to_json(tagged.value)?,
    })
}

struct Loader<'a> {
    root: &'a Value,
    warnings: Vec<SpecWarning>,
}

impl<'a> Loader<'a> {
    fn new(root: &'a Value) -> Result<Self, SpecError> {
        if !root.is_object() {
            return Err(SpecError::Parse("top level is not an object".to_string()));
        }
        let loader = Loader {
            root,
            warnings: Vec::new(),
        };
        loader.check_all_refs(root)?;
        Ok(loader)
    }

    fn warn(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(SpecWarning {
            location: location.into(),
            message: message.into(),
        });
    }

    /// Rejects external references anywhere in the document and verifies
    /// that every local reference chain ends at a real, non-reference value.
    fn check_all_refs(&self, value: &'a Value) -> Result<(), SpecError> {
        match value {
            Value::Object(map) => {
                if let Some(Value::String(_)) = map.get("$ref") {
                    self.deref(value)?;
                }
                map.values().try_for_each(|v| self.check_all_refs(v))
            }
            Value::Array(items) => items.iter().try_for_each(|v| self.check_all_refs(v)),
            _ => Ok(()),
        }
    }

    fn lookup(&self, reference: &str) -> Result<&'a Value, SpecError> {
        let fragment = reference
            .strip_prefix('#')
            .ok_or_else(|| SpecError::ExternalRef(reference.to_string()))?;
        let pointer = percent_encoding::percent_decode_str(fragment)
            .decode_utf8()
            .map_err(|_| SpecError::UnresolvableRef {
                reference: reference.to_string(),
                reason: "pointer is not valid UTF-8".to_string(),
            })?;
        self.root
            .pointer(&pointer)
            .ok_or_else(|| SpecError::UnresolvableRef {
                reference: reference.to_string(),
                reason: "target does not exist".to_string(),
            })
    }

    /// Follows a chain of `$ref` objects to the value it finally names.
    fn deref(&self, mut value: &'a Value) -> Result<&'a Value, SpecError> {
        let mut visited: Vec<&str> = Vec::new();
        while let Some(Value::String(reference)) = value.get("$ref") {
            if visited.contains(&reference.as_str()) {
                return Err(SpecError::UnresolvableRef {
                    reference: reference.clone(),
                    reason: "reference cycle".to_string(),
                });
            }
            visited.push(reference);
            value = self.lookup(reference)?;
        }
        Ok(value)
    }

    fn build(mut self) -> Result<ApiModel, SpecError> {
        let root = self.root;
        let source_version = check_version(root)?;
        let servers = self.servers();

        let mut operations = Vec::new();
        match root.get("paths") {
            None | Some(Value::Null) => {}
            Some(Value::Object(paths)) => {
                for (raw_path, item) in paths {
                    if raw_path.starts_with("x-") {
                        continue;
                    }
                    let template = PathTemplate::parse(raw_path)?;
                    let item = self.deref(item)?;
                    self.path_item(&template, item, &mut operations)?;
                }
            }
            Some(_) => return Err(SpecError::Parse("`paths` is not an object".to_string())),
        }
        operations.sort_by(|a, b| (a.path(), a.method).cmp(&(b.path(), b.method)));

        Ok(ApiModel {
            servers,
            operations,
            source_version,
            warnings: self.warnings,
        })
    }

    fn servers(&mut self) -> Vec<String> {
        let Some(Value::Array(list)) = self.root.get("servers") else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for server in list {
            let Some(url) = server.get("url").and_then(Value::as_str) else {
                self.warn("servers", "server entry without a url");
                continue;
            };
            out.push(substitute_server_variables(url, server.get("variables")));
        }
        out
    }

    fn path_item(
        &mut self,
        template: &PathTemplate,
        item: &'a Value,
        out: &mut Vec<OperationSpec>,
    ) -> Result<(), SpecError> {
        let shared = self.parameters(template.as_str(), item.get("parameters"))?;
        for method in HttpMethod::ALL {
            let Some(key) = method.openapi_key() else {
                continue;
            };
            let Some(op) = item.get(key) else {
                continue;
            };
            let op = self.deref(op)?;
            let label = format!("{} {}", method, template);

            let mut parameters = shared.clone();
            for p in self.parameters(&label, op.get("parameters"))? {
                match parameters
                    .iter_mut()
                    .find(|q| q.name == p.name && q.location == p.location)
                {
                    Some(existing) => *existing = p,
                    None => parameters.push(p),
                }
            }
            self.check_path_parameters(&label, template, &parameters);

            let request_media_types = match op.get("requestBody") {
                None | Some(Value::Null) => None,
                Some(body) => {
                    let body = self.deref(body)?;
                    Some(self.media_types(body.get("content")))
                }
            };
            let responses = self.responses(&label, op.get("responses"))?;

            out.push(OperationSpec {
                path_template: template.clone(),
                method,
                operation_id: op
                    .get("operationId")
                    .and_then(Value::as_str)
                    .map(str::to_string),
                parameters,
                request_media_types,
                responses,
            });
        }
        Ok(())
    }

    fn parameters(
        &mut self,
        label: &str,
        list: Option<&'a Value>,
    ) -> Result<Vec<ParameterSpec>, SpecError> {
        let items = match list {
            None | Some(Value::Null) => return Ok(Vec::new()),
            Some(Value::Array(items)) => items,
            Some(_) => {
                self.warn(label, "`parameters` is not a list; ignored");
                return Ok(Vec::new());
            }
        };
        let mut out: Vec<ParameterSpec> = Vec::new();
        for item in items {
            let item = self.deref(item)?;
            let Some(name) = item.get("name").and_then(Value::as_str) else {
                self.warn(label, "parameter without a name; ignored");
                continue;
            };
            let Some(location) = item
                .get("in")
                .and_then(Value::as_str)
                .and_then(ParameterLocation::parse)
            else {
                self.warn(
                    label,
                    format!("parameter {name:?} has no valid `in`; ignored"),
                );
                continue;
            };
            let mut required = item
                .get("required")
                .and_then(Value::as_bool)
                .unwrap_or(false);
            if location == ParameterLocation::Path && !required {
                self.warn(
                    label,
                    format!("path parameter {name:?} is not marked required"),
                );
                required = true;
            }
            let domain = match item.get("schema") {
                Some(schema) => {
                    let schema = self.deref(schema)?;
                    self.value_domain(label, name, schema)
                }
                None => ValueDomain::unbounded(),
            };
            let spec = ParameterSpec {
                name: name.to_string(),
                location,
                required,
                domain,
            };
            if let Some(dup) = out
                .iter_mut()
                .find(|p| p.name == spec.name && p.location == spec.location)
            {
                self.warn(
                    label,
                    format!("parameter {name:?} in {location} declared twice"),
                );
                *dup = spec;
            } else {
                out.push(spec);
            }
        }
        Ok(out)
    }

    fn value_domain(&mut self, label: &str, name: &str, schema: &Value) -> ValueDomain {
        if let Some(list) = schema.get("enum") {
            let Value::Array(values) = list else {
                self.warn(label, format!("parameter {name:?}: `enum` is not a list"));
                return ValueDomain::unbounded();
            };
            let literals: Vec<String> = values.iter().map(canonical_literal).collect();
            let distinct: BTreeSet<&String> = literals.iter().collect();
            if distinct.len() != literals.len() {
                self.warn(
                    label,
                    format!("parameter {name:?}: duplicate enum literals"),
                );
            }
            return match ValueDomain::enumeration(literals) {
                Some(domain) => domain,
                None => {
                    self.warn(label, format!("parameter {name:?}: empty enum"));
                    ValueDomain::unbounded()
                }
            };
        }
        let composite = ["oneOf", "anyOf", "allOf"]
            .iter()
            .any(|k| schema.get(*k).is_some());
        if !composite && schema.get("type").and_then(Value::as_str) == Some("boolean") {
            ValueDomain::boolean()
        } else {
            ValueDomain::unbounded()
        }
    }

    fn check_path_parameters(
        &mut self,
        label: &str,
        template: &PathTemplate,
        parameters: &[ParameterSpec],
    ) {
        let vars: BTreeSet<&str> = template.variables().collect();
        let declared: BTreeSet<&str> = parameters
            .iter()
            .filter(|p| p.location == ParameterLocation::Path)
            .map(|p| p.name.as_str())
            .collect();
        for missing in vars.difference(&declared) {
            self.warn(
                label,
                format!("path variable {missing:?} has no path parameter"),
            );
        }
        for extra in declared.difference(&vars) {
            self.warn(
                label,
                format!("path parameter {extra:?} does not appear in the template"),
            );
        }
    }

    fn media_types(&mut self, content: Option<&Value>) -> MediaTypeSet {
        match content {
            Some(Value::Object(map)) => map.keys().collect(),
            _ => MediaTypeSet::default(),
        }
    }

    fn responses(
        &mut self,
        label: &str,
        responses: Option<&'a Value>,
    ) -> Result<Vec<ResponseSpec>, SpecError> {
        let Some(Value::Object(map)) = responses else {
            return Ok(Vec::new());
        };
        let mut out = BTreeMap::new();
        for (key, response) in map {
            if key.starts_with("x-") {
                continue;
            }
            let normalized = key
                .trim()
                .to_ascii_uppercase()
                .replace("DEFAULT", "default");
            let Some(status_key) = StatusKey::parse(&normalized) else {
                self.warn(
                    label,
                    format!("response key {key:?} is not a status code; ignored"),
                );
                continue;
            };
            let response = self.deref(response)?;
            let media_types = self.media_types(response.get("content"));
            if out.insert(status_key, media_types).is_some() {
                self.warn(label, format!("response key {key:?} declared twice"));
            }
        }
        Ok(out
            .into_iter()
            .map(|(status_key, media_types)| ResponseSpec {
                status_key,
                media_types,
            })
            .collect())
    }
}

fn check_version(root: &Value) -> Result<String, SpecError> {
    if let Some(v) = root.get("swagger") {
        return Err(SpecError::UnsupportedVersion(format!(
            "swagger {}",
            version_text(v)
        )));
    }
    let version = root
        .get("openapi")
        .map(version_text)
        .ok_or_else(|| SpecError::UnsupportedVersion("missing `openapi` field".to_string()))?;
    if version.starts_with("3.0") || version.starts_with("3.1") {
        Ok(version)
    } else {
        Err(SpecError::UnsupportedVersion(version))
    }
}

fn version_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn substitute_server_variables(url: &str, variables: Option<&Value>) -> String {
    let Some(Value::Object(vars)) = variables else {
        return url.to_string();
    };
    let mut out = url.to_string();
    for (name, var) in vars {
        if let Some(default) = var.get("default").and_then(Value::as_str) {
            out = out.replace(&format!("{{{name}}}"), default);
        }
    }
    out
}
