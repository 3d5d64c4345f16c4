//! OpenAPI path templates such as `/pets/{petId}`.
//!
//! A template is split into `/`-separated segments. A segment is either fully
//! concrete (`pets`), a single variable (`{petId}`), or a mix of literal text
//! and variables (`{name}.{ext}`). Only fully concrete segments count towards
//! a template's specificity when several templates match the same path.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid path template {template:?}: {reason}")]
pub struct TemplateError {
    pub template: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SegmentPart {
    Literal(String),
    Variable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateSegment {
    Concrete(String),
    Pattern(Vec<SegmentPart>),
}

impl TemplateSegment {
    pub fn is_concrete(&self) -> bool {
        matches!(self, TemplateSegment::Concrete(_))
    }

    fn matches(&self, segment: &str, captures: &mut Vec<(String, String)>) -> bool {
        match self {
            TemplateSegment::Concrete(lit) => lit == segment,
            TemplateSegment::Pattern(parts) => {
                let mark = captures.len();
                if match_parts(parts, segment, captures) {
                    true
                } else {
                    captures.truncate(mark);
                    false
                }
            }
        }
    }
}

/// Backtracking match of literal/variable parts against one path segment.
/// Every variable must capture at least one character; shorter captures are
/// tried first.
fn match_parts(parts: &[SegmentPart], input: &str, captures: &mut Vec<(String, String)>) -> bool {
    match parts.split_first() {
        None => input.is_empty(),
        Some((SegmentPart::Literal(lit), rest)) => input
            .strip_prefix(lit.as_str())
            .is_some_and(|tail| match_parts(rest, tail, captures)),
        Some((SegmentPart::Variable(name), rest)) => {
            for (idx, ch) in input.char_indices() {
                let end = idx + ch.len_utf8();
                captures.push((name.clone(), input[..end].to_string()));
                if match_parts(rest, &input[end..], captures) {
                    return true;
                }
                captures.pop();
            }
            false
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTemplate {
    raw: String,
    segments: Vec<TemplateSegment>,
}

impl PathTemplate {
    pub fn parse(raw: &str) -> Result<Self, TemplateError> {
        let err = |reason: &str| TemplateError {
            template: raw.to_string(),
            reason: reason.to_string(),
        };
        let body = raw
            .strip_prefix('/')
            .ok_or_else(|| err("must start with '/'"))?;
        // A single trailing slash is tolerated and ignored for matching.
        let body = body.strip_suffix('/').unwrap_or(body);

        let mut segments = Vec::new();
        let mut seen = Vec::<String>::new();
        if !body.is_empty() {
            for seg in body.split('/') {
                if seg.is_empty() {
                    return Err(err("empty path segment"));
                }
                let segment = parse_segment(seg).map_err(|r| err(&r))?;
                if let TemplateSegment::Pattern(parts) = &segment {
                    for part in parts {
                        if let SegmentPart::Variable(name) = part {
                            if seen.contains(name) {
                                return Err(err(&format!("variable {name:?} appears twice")));
                            }
                            seen.push(name.clone());
                        }
                    }
                }
                segments.push(segment);
            }
        }
        Ok(PathTemplate {
            raw: raw.to_string(),
            segments,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    pub fn segments(&self) -> &[TemplateSegment] {
        &self.segments
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.segments
            .iter()
            .flat_map(|s| match s {
                TemplateSegment::Concrete(_) => [].iter(),
                TemplateSegment::Pattern(parts) => parts.iter(),
            })
            .filter_map(|p| match p {
                SegmentPart::Variable(name) => Some(name.as_str()),
                SegmentPart::Literal(_) => None,
            })
    }

    pub fn concrete_count(&self) -> usize {
        self.segments.iter().filter(|s| s.is_concrete()).count()
    }

    /// Matches already-split request path segments (raw, still
    /// percent-encoded) and returns the variable captures on success.
    pub fn match_segments(&self, path: &[&str]) -> Option<BTreeMap<String, String>> {
        if path.len() != self.segments.len() {
            return None;
        }
        let mut captures = Vec::new();
        for (tpl, seg) in self.segments.iter().zip(path) {
            if !tpl.matches(seg, &mut captures) {
                return None;
            }
        }
        Some(captures.into_iter().collect())
    }
}

impl fmt::Display for PathTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

fn parse_segment(seg: &str) -> Result<TemplateSegment, String> {
    if !seg.contains(['{', '}']) {
        return Ok(TemplateSegment::Concrete(seg.to_string()));
    }
    let mut parts = Vec::new();
    let mut rest = seg;
    while !rest.is_empty() {
        match rest.find(['{', '}']) {
            None => {
                parts.push(SegmentPart::Literal(rest.to_string()));
                rest = "";
            }
            Some(pos) if rest.as_bytes()[pos] == b'}' => {
                return Err("unbalanced '}'".to_string());
            }
            Some(pos) => {
                if pos > 0 {
                    parts.push(SegmentPart::Literal(rest[..pos].to_string()));
                }
                let after = &rest[pos + 1..];
                let close = after.find('}').ok_or("unbalanced '{'")?;
                let name = &after[..close];
                if name.contains('{') {
                    return Err("nested '{'".to_string());
                }
                if name.trim().is_empty() {
                    return Err("unnamed template variable".to_string());
                }
                parts.push(SegmentPart::Variable(name.to_string()));
                rest = &after[close + 1..];
            }
        }
    }
    Ok(TemplateSegment::Pattern(parts))
}

/// Splits a request path (already stripped of its server prefix) into
/// segments. Trailing slashes are ignored except for the root path.
pub fn split_request_path(path: &str) -> Vec<&str> {
    let trimmed = path.strip_prefix('/').unwrap_or(path);
    let trimmed = trimmed.strip_suffix('/').unwrap_or(trimmed);
    if trimmed.is_empty() {
        Vec::new()
    } else {
        trimmed.split('/').collect()
    }
}
