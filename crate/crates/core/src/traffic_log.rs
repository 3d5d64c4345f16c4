//! Recorded HTTP traffic.
//!
//! Two on-disk formats are understood:
//!
//! * the native JSON Lines format, one interaction per `\n`-terminated line:
//!
//!   ```text
//!   {"ts":"2024-05-01T10:00:00.000Z","method":"GET","url":"http://h/pets",
//!    "req_headers":[["accept","*/*"]],"status":200,
//!    "resp_headers":[["content-type","application/json"]],"resp_body_b64":"W10="}
//!   ```
//!
//!   Bodies are base64. An omitted `*_body_b64` field means "no body", an
//!   empty string means "empty body". `"truncated":true` marks a record whose
//!   bodies were cut by the capture proxy.
//!
//! * HAR 1.2 (`log.entries[]`), read-only.

use std::io::{self, BufRead, Read, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
use serde_json::{json, Map, Value};
use url::Url;

use crate::method::HttpMethod;

pub type Headers = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    pub timestamp: DateTime<Utc>,
    pub method: HttpMethod,
    pub url: Url,
    pub request_headers: Headers,
    pub request_body: Option<Vec<u8>>,
    pub status: u16,
    pub response_headers: Headers,
    pub response_body: Option<Vec<u8>>,
    /// Set when a body was cut to the capture limit.
    pub truncated: bool,
}

impl Interaction {
    /// A bodiless, headerless exchange; mostly useful in tests and examples.
    pub fn new(method: HttpMethod, url: Url, status: u16) -> Self {
        Interaction {
            timestamp: DateTime::<Utc>::UNIX_EPOCH,
            method,
            url,
            request_headers: Vec::new(),
            request_body: None,
            status,
            response_headers: Vec::new(),
            response_body: None,
            truncated: false,
        }
    }

    pub fn with_request_header(mut self, name: &str, value: &str) -> Self {
        self.request_headers
            .push((name.to_string(), value.to_string()));
        self
    }

    pub fn with_response_header(mut self, name: &str, value: &str) -> Self {
        self.response_headers
            .push((name.to_string(), value.to_string()));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InteractionLog {
    pub interactions: Vec<Interaction>,
    pub source: String,
}

impl InteractionLog {
    pub fn new(source: impl Into<String>) -> Self {
        InteractionLog {
            interactions: Vec::new(),
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    /// Appends another log's interactions, keeping their order.
    pub fn extend(&mut self, other: InteractionLog) {
        self.interactions.extend(other.interactions);
        if self.source.is_empty() {
            self.source = other.source;
        } else if !other.source.is_empty() {
            self.source = format!("{}+{}", self.source, other.source);
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: malformed JSON: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Schema {
        line: usize,
        field: String,
        message: String,
    },
    #[error("not a HAR document: {0}")]
    NotHar(String),
}

/// Outcome of a HAR import: the log plus one warning per dropped entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarImport {
    pub log: InteractionLog,
    pub warnings: Vec<String>,
}

pub(crate) fn truncate_to_millis(ts: DateTime<Utc>) -> DateTime<Utc> {
    ts.trunc_subsecs(3)
}

fn format_ts(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn parse_ts(raw: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(raw)
        .ok()
        .map(|t| truncate_to_millis(t.with_timezone(&Utc)))
}

pub(crate) fn parse_http_url(raw: &str) -> Result<Url, String> {
    let url = Url::parse(raw).map_err(|e| e.to_string())?;
    match url.scheme() {
        "http" | "https" => Ok(url),
        other => Err(format!("scheme {other:?} is not http or https")),
    }
}

pub fn valid_status(status: u64) -> Option<u16> {
    (100..=599).contains(&status).then_some(status as u16)
}

// ---------------------------------------------------------------------------
// Native JSONL

/// Serializes one interaction as a single JSON line (without terminator).
pub fn interaction_to_json_line(interaction: &Interaction) -> String {
    let headers =
        |h: &Headers| -> Value { Value::Array(h.iter().map(|(n, v)| json!([n, v])).collect()) };
    let mut obj = Map::new();
    obj.insert("ts".into(), format_ts(&interaction.timestamp).into());
    obj.insert("method".into(), interaction.method.as_str().into());
    obj.insert("url".into(), interaction.url.as_str().into());
    obj.insert("req_headers".into(), headers(&interaction.request_headers));
    if let Some(body) = &interaction.request_body {
        obj.insert("req_body_b64".into(), BASE64.encode(body).into());
    }
    obj.insert("status".into(), interaction.status.into());
    obj.insert(
        "resp_headers".into(),
        headers(&interaction.response_headers),
    );
    if let Some(body) = &interaction.response_body {
        obj.insert("resp_body_b64".into(), BASE64.encode(body).into());
    }
    if interaction.truncated {
        obj.insert("truncated".into(), true.into());
    }
    Value::Object(obj).to_string()
}

pub fn write_jsonl<W: Write>(log: &InteractionLog, mut sink: W) -> io::Result<()> {
    for interaction in &log.interactions {
        sink.write_all(interaction_to_json_line(interaction).as_bytes())?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

pub fn read_jsonl<R: Read>(
    document: R,
    source: impl Into<String>,
) -> Result<InteractionLog, LogError> {
    let mut log = InteractionLog::new(source);
    let reader = io::BufReader::new(document);
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(trimmed).map_err(|e| LogError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        log.interactions
            .push(interaction_from_json(&value, line_no)?);
    }
    Ok(log)
}

fn interaction_from_json(value: &Value, line: usize) -> Result<Interaction, LogError> {
    let schema = |field: &str, message: &str| LogError::Schema {
        line,
        field: field.to_string(),
        message: message.to_string(),
    };
    let obj = value
        .as_object()
        .ok_or_else(|| schema("<record>", "expected a JSON object"))?;
    let string_field = |field: &str| -> Result<&str, LogError> {
        obj.get(field)
            .ok_or_else(|| schema(field, "missing"))?
            .as_str()
            .ok_or_else(|| schema(field, "expected a string"))
    };
    let headers_field = |field: &str| -> Result<Headers, LogError> {
        let Some(v) = obj.get(field) else {
            return Ok(Vec::new());
        };
        let items = v
            .as_array()
            .ok_or_else(|| schema(field, "expected a list"))?;
        items
            .iter()
            .map(|pair| match pair.as_array().map(Vec::as_slice) {
                Some([Value::String(n), Value::String(v)]) => Ok((n.clone(), v.clone())),
                _ => Err(schema(field, "expected [name, value] string pairs")),
            })
            .collect()
    };
    let body_field = |field: &str| -> Result<Option<Vec<u8>>, LogError> {
        match obj.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => BASE64
                .decode(s)
                .map(Some)
                .map_err(|e| schema(field, &format!("invalid base64: {e}"))),
            Some(_) => Err(schema(field, "expected a base64 string")),
        }
    };

    let timestamp = parse_ts(string_field("ts")?)
        .ok_or_else(|| schema("ts", "expected an RFC 3339 timestamp"))?;
    let method = string_field("method")?
        .parse()
        .map_err(|e: crate::method::UnknownMethod| schema("method", &e.to_string()))?;
    let url = parse_http_url(string_field("url")?).map_err(|e| schema("url", &e))?;
    let status = obj
        .get("status")
        .ok_or_else(|| schema("status", "missing"))?
        .as_u64()
        .and_then(valid_status)
        .ok_or_else(|| schema("status", "expected an integer in 100..=599"))?;
    let truncated = match obj.get("truncated") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(schema("truncated", "expected a boolean")),
    };

    Ok(Interaction {
        timestamp,
        method,
        url,
        request_headers: headers_field("req_headers")?,
        request_body: body_field("req_body_b64")?,
        status,
        response_headers: headers_field("resp_headers")?,
        response_body: body_field("resp_body_b64")?,
        truncated,
    })
}

// ---------------------------------------------------------------------------
// HAR

pub fn read_har<R: Read>(
    mut document: R,
    source: impl Into<String>,
) -> Result<HarImport, LogError> {
    let mut text = Vec::new();
    document.read_to_end(&mut text)?;
    let root: Value = serde_json::from_slice(&text).map_err(|e| LogError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let entries = root
        .get("log")
        .and_then(|l| l.get("entries"))
        .and_then(Value::as_array)
        .ok_or_else(|| LogError::NotHar("missing log.entries".to_string()))?;

    let mut log = InteractionLog::new(source);
    let mut warnings = Vec::new();
    for (idx, entry) in entries.iter().enumerate() {
        match har_entry(entry) {
            Ok(interaction) => log.interactions.push(interaction),
            Err(reason) => warnings.push(format!("entry {idx}: {reason}; dropped")),
        }
    }
    Ok(HarImport { log, warnings })
}

fn har_entry(entry: &Value) -> Result<Interaction, String> {
    let request = entry.get("request").ok_or("missing request")?;
    let response = entry.get("response").ok_or("missing response")?;

    let status = response
        .get("status")
        .ok_or("missing response.status")?
        .as_u64()
        .ok_or("response.status is not an integer")?;
    let status =
        valid_status(status).ok_or_else(|| format!("response.status {status} out of range"))?;

    let method = request
        .get("method")
        .and_then(Value::as_str)
        .ok_or("missing request.method")?
        .parse::<HttpMethod>()
        .map_err(|e| e.to_string())?;
    let url = request
        .get("url")
        .and_then(Value::as_str)
        .ok_or("missing request.url")?;
    let url = parse_http_url(url).map_err(|e| format!("request.url: {e}"))?;

    let timestamp = entry
        .get("startedDateTime")
        .and_then(Value::as_str)
        .and_then(parse_ts)
        .unwrap_or(DateTime::<Utc>::UNIX_EPOCH);

    Ok(Interaction {
        timestamp,
        method,
        url,
        request_headers: har_headers(request.get("headers")),
        request_body: har_body(request.get("postData"))?,
        status,
        response_headers: har_headers(response.get("headers")),
        response_body: har_body(response.get("content"))?,
        truncated: false,
    })
}

fn har_headers(headers: Option<&Value>) -> Headers {
    headers
        .and_then(Value::as_array)
        .map(|items| {
            items
                .iter()
                .filter_map(|h| {
                    let name = h.get("name")?.as_str()?;
                    let value = h.get("value")?.as_str().unwrap_or_default();
                    Some((name.to_string(), value.to_string()))
                })
                .collect()
        })
        .unwrap_or_default()
}

/// `postData` and `content` share the `text` + optional `encoding` shape.
fn har_body(content: Option<&Value>) -> Result<Option<Vec<u8>>, String> {
    let Some(text) = content.and_then(|c| c.get("text")).and_then(Value::as_str) else {
        return Ok(None);
    };
    match content
        .and_then(|c| c.get("encoding"))
        .and_then(Value::as_str)
    {
        Some("base64") => BASE64
            .decode(text.trim())
            .map(Some)
            .map_err(|e| format!("invalid base64 body: {e}")),
        _ => Ok(Some(text.as_bytes().to_vec())),
    }
}

// ---------------------------------------------------------------------------
// Format detection

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Har,
    Jsonl,
}

impl LogFormat {
    /// Decides by extension first (`.har`, `.jsonl`, `.ndjson`), then by
    /// looking for a top-level `log` object in the content.
    pub fn detect(path: &Path, content: &[u8]) -> LogFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("har") => return LogFormat::Har,
            Some("jsonl" | "ndjson") => return LogFormat::Jsonl,
            _ => {}
        }
        match serde_json::from_slice::<Value>(content) {
            Ok(v) if v.get("log").is_some_and(Value::is_object) => LogFormat::Har,
            _ => LogFormat::Jsonl,
        }
    }
}

/// Reads a log file in either format; HAR warnings are returned alongside.
pub fn read_log_file(path: impl AsRef<Path>) -> Result<(InteractionLog, Vec<String>), LogError> {
    let path = path.as_ref();
    let content = std::fs::read(path)?;
    let source = path.display().to_string();
    match LogFormat::detect(path, &content) {
        LogFormat::Har => read_har(content.as_slice(), source).map(|h| (h.log, h.warnings)),
        LogFormat::Jsonl => read_jsonl(content.as_slice(), source).map(|l| (l, Vec::new())),
    }
}
