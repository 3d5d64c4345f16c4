//! Seeded random specs and traffic.
//!
//! A `GenSpec` is a small abstract API description that is rendered to an
//! OpenAPI document for the code under test, while the oracle works from the
//! `GenSpec` itself.

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use restcov::{HttpMethod, Interaction, InteractionLog};
use serde_json::{json, Map, Value};
use url::Url;

pub const LITERALS: [&str; 3] = ["a", "b", "c"];
pub const SEGMENT_VALUES: [&str; 5] = ["a", "b", "x1", "42", "c"];
pub const METHODS: [HttpMethod; 4] = [
    HttpMethod::Get,
    HttpMethod::Post,
    HttpMethod::Put,
    HttpMethod::Delete,
];
pub const REQUEST_TYPES: [&str; 4] = [
    "application/json",
    "application/xml",
    "text/plain",
    "application/*",
];
pub const RESPONSE_TYPES: [&str; 4] = ["application/json", "text/csv", "text/plain", "*/*"];
pub const RESPONSE_KEYS: [&str; 6] = ["200", "201", "404", "500", "2XX", "default"];
pub const STATUSES: [u16; 10] = [200, 201, 204, 301, 404, 418, 500, 503, 101, 400];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seg {
    Lit(String),
    Var(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loc {
    Path,
    Query,
    Header,
    Cookie,
}

impl Loc {
    pub fn as_str(self) -> &'static str {
        match self {
            Loc::Path => "path",
            Loc::Query => "query",
            Loc::Header => "header",
            Loc::Cookie => "cookie",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Unbounded,
    Boolean,
    Enum(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct GenParam {
    pub name: String,
    pub loc: Loc,
    pub domain: Domain,
}

#[derive(Debug, Clone)]
pub struct GenOp {
    pub segs: Vec<Seg>,
    pub method: HttpMethod,
    /// Path parameters first, one per variable segment.
    pub params: Vec<GenParam>,
    pub request_types: Option<Vec<String>>,
    pub responses: Vec<(String, Vec<String>)>,
}

impl GenOp {
    pub fn template(&self) -> String {
        template_of(&self.segs)
    }
}

pub fn template_of(segs: &[Seg]) -> String {
    if segs.is_empty() {
        return "/".to_string();
    }
    segs.iter()
        .map(|s| match s {
            Seg::Lit(l) => format!("/{l}"),
            Seg::Var(v) => format!("/{{{v}}}"),
        })
        .collect()
}

/// Templates with the same literal/variable layout are indistinguishable
/// by the matcher; used to keep saturation logs unambiguous.
pub fn shape_of(segs: &[Seg]) -> String {
    segs.iter()
        .map(|s| match s {
            Seg::Lit(l) => format!("/{l}"),
            Seg::Var(_) => "/{}".to_string(),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct GenSpec {
    /// Server base path, "" or e.g. "/api".
    pub base: String,
    pub ops: Vec<GenOp>,
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn gen_segments(rng: &mut StdRng, var_counter: &mut usize) -> Vec<Seg> {
    let len = rng.random_range(0..=3);
    (0..len)
        .map(|_| {
            if rng.random_bool(0.5) {
                Seg::Lit(LITERALS.choose(rng).unwrap().to_string())
            } else {
                *var_counter += 1;
                Seg::Var(format!("v{var_counter}"))
            }
        })
        .collect()
}

fn gen_domain(rng: &mut StdRng) -> Domain {
    match rng.random_range(0..3) {
        0 => Domain::Unbounded,
        1 => Domain::Boolean,
        _ => {
            let pool = ["red", "green", "blue", "1", "2.5"];
            let n = rng.random_range(1..=3);
            let mut lits: Vec<String> = pool
                .choose_multiple(rng, n)
                .map(|s| s.to_string())
                .collect();
            lits.sort();
            Domain::Enum(lits)
        }
    }
}

/// `distinct_shapes` keeps templates pairwise distinguishable.
pub fn gen_spec(rng: &mut StdRng, distinct_shapes: bool) -> GenSpec {
    let base = ["", "/api", "/v1/x"].choose(rng).unwrap().to_string();
    let mut var_counter = 0;
    let mut templates: Vec<Vec<Seg>> = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let segs = gen_segments(rng, &mut var_counter);
        let dup = templates.iter().any(|t| {
            template_of(t) == template_of(&segs)
                || (distinct_shapes && shape_of(t) == shape_of(&segs))
        });
        if !dup {
            templates.push(segs);
        }
    }

    let mut ops: Vec<GenOp> = Vec::new();
    let op_count = rng.random_range(0..=4);
    for _ in 0..op_count {
        let segs = templates.choose(rng).unwrap().clone();
        let method = *METHODS.choose(rng).unwrap();
        if ops.iter().any(|o| o.method == method && o.segs == segs) {
            continue;
        }
        let mut params: Vec<GenParam> = segs
            .iter()
            .filter_map(|s| match s {
                Seg::Var(v) => Some(GenParam {
                    name: v.clone(),
                    loc: Loc::Path,
                    domain: Domain::Unbounded,
                }),
                Seg::Lit(_) => None,
            })
            .collect();
        for _ in 0..rng.random_range(0..=3) {
            if params.len() >= 3 {
                break;
            }
            let loc = *[Loc::Query, Loc::Query, Loc::Header, Loc::Cookie]
                .choose(rng)
                .unwrap();
            let name = match loc {
                Loc::Header => format!("x-{}", ["p", "q"].choose(rng).unwrap()),
                _ => ["p", "q", "r"].choose(rng).unwrap().to_string(),
            };
            if params.iter().any(|p| p.name == name && p.loc == loc) {
                continue;
            }
            params.push(GenParam {
                name,
                loc,
                domain: gen_domain(rng),
            });
        }
        let request_types = rng.random_bool(0.5).then(|| {
            let n = rng.random_range(0..=2);
            REQUEST_TYPES
                .choose_multiple(rng, n)
                .map(|s| s.to_string())
                .collect()
        });
        let mut responses = Vec::new();
        let n = rng.random_range(0..=3);
        for key in RESPONSE_KEYS.choose_multiple(rng, n) {
            let m = rng.random_range(0..=2);
            let types = RESPONSE_TYPES
                .choose_multiple(rng, m)
                .map(|s| s.to_string())
                .collect();
            responses.push((key.to_string(), types));
        }
        ops.push(GenOp {
            segs,
            method,
            params,
            request_types,
            responses,
        });
    }
    GenSpec { base, ops }
}

fn content(types: &[String]) -> Value {
    Value::Object(types.iter().map(|t| (t.clone(), json!({}))).collect())
}

pub fn to_openapi(spec: &GenSpec) -> Value {
    let mut paths = Map::new();
    for op in &spec.ops {
        let mut o = Map::new();
        let params: Vec<Value> = op
            .params
            .iter()
            .map(|p| {
                let schema = match &p.domain {
                    Domain::Unbounded => json!({"type": "string"}),
                    Domain::Boolean => json!({"type": "boolean"}),
                    Domain::Enum(lits) => {
                        let values: Vec<Value> = lits
                            .iter()
                            .map(|l| match l.parse::<f64>() {
                                Ok(f) => json!(f),
                                Err(_) => json!(l),
                            })
                            .collect();
                        json!({"enum": values})
                    }
                };
                json!({"name": p.name, "in": p.loc.as_str(), "required": p.loc == Loc::Path, "schema": schema})
            })
            .collect();
        o.insert("parameters".into(), Value::Array(params));
        if let Some(types) = &op.request_types {
            o.insert("requestBody".into(), json!({"content": content(types)}));
        }
        let responses: Map<String, Value> = op
            .responses
            .iter()
            .map(|(k, types)| {
                (
                    k.clone(),
                    json!({"description": "", "content": content(types)}),
                )
            })
            .collect();
        o.insert("responses".into(), Value::Object(responses));
        let item = paths
            .entry(op.template())
            .or_insert_with(|| json!({}))
            .as_object_mut()
            .unwrap();
        item.insert(op.method.as_str().to_ascii_lowercase(), Value::Object(o));
    }
    json!({
        "openapi": "3.0.3",
        "info": {"title": "generated", "version": "1"},
        "servers": [{"url": format!("http://api.example.com{}", spec.base)}],
        "paths": paths,
    })
}

pub fn load(spec: &GenSpec) -> restcov::ApiModel {
    let doc = to_openapi(spec).to_string();
    restcov::load_spec(doc.as_bytes(), None).expect("generated spec loads")
}

fn random_value(rng: &mut StdRng, domain: &Domain) -> String {
    let mut pool: Vec<String> = vec!["zz".into(), "hello world".into(), "7".into()];
    match domain {
        Domain::Boolean => pool.extend(["true", "false", "TRUE", "False"].map(String::from)),
        Domain::Enum(lits) => pool.extend(lits.iter().cloned().chain(lits.iter().cloned())),
        Domain::Unbounded => {}
    }
    pool.choose(rng).unwrap().clone()
}

fn maybe_media(rng: &mut StdRng, pool: &[&str]) -> Option<String> {
    if rng.random_bool(0.2) {
        return None;
    }
    let mut m = pool.choose(rng).unwrap().to_string();
    if rng.random_bool(0.3) {
        m = m.to_ascii_uppercase();
    }
    if rng.random_bool(0.3) {
        m.push_str("; charset=utf-8");
    }
    Some(m)
}

fn encode_query(pairs: &[(String, String)]) -> String {
    url::form_urlencoded::Serializer::new(String::new())
        .extend_pairs(pairs)
        .finish()
}

/// One interaction aimed at a random operation, or random noise.
pub fn gen_interaction(rng: &mut StdRng, spec: &GenSpec) -> Interaction {
    let host = *["api.example.com", "127.0.0.1:9000"].choose(rng).unwrap();
    let aimed =
        (!spec.ops.is_empty() && rng.random_bool(0.85)).then(|| spec.ops.choose(rng).unwrap());
    let method = match aimed {
        Some(op) if rng.random_bool(0.85) => op.method,
        _ => *METHODS.choose(rng).unwrap(),
    };
    let (base, segs) = match aimed {
        Some(op) => (spec.base.clone(), op.segs.clone()),
        None => {
            let base = ["", "/api", "/elsewhere"].choose(rng).unwrap().to_string();
            let mut counter = 0;
            (base, gen_segments(rng, &mut counter))
        }
    };
    let mut path = base;
    for s in &segs {
        path.push('/');
        match s {
            Seg::Lit(l) => path.push_str(l),
            Seg::Var(_) => path.push_str(SEGMENT_VALUES.choose(rng).unwrap()),
        }
    }
    if path.is_empty() || rng.random_bool(0.1) {
        path.push('/');
    }

    let mut query = Vec::new();
    let mut headers = Vec::new();
    let mut cookies = Vec::new();
    if let Some(op) = aimed {
        for p in &op.params {
            let repeats = match rng.random_range(0..5) {
                0 | 1 => 0,
                4 => 2,
                _ => 1,
            };
            for _ in 0..repeats {
                let v = random_value(rng, &p.domain);
                match p.loc {
                    Loc::Path => {}
                    Loc::Query => query.push((p.name.clone(), v)),
                    Loc::Header => {
                        let name = if rng.random_bool(0.5) {
                            p.name.to_ascii_uppercase()
                        } else {
                            p.name.clone()
                        };
                        headers.push((name, v));
                    }
                    Loc::Cookie => cookies.push(format!("{}={}", p.name, v.replace(' ', ""))),
                }
            }
        }
    }
    if rng.random_bool(0.2) {
        query.push(("undocumented".into(), "1".into()));
    }
    if rng.random_bool(0.1) {
        cookies.push("tracking=abc".into());
    }
    if !cookies.is_empty() {
        headers.push(("Cookie".into(), cookies.join("; ")));
    }
    if let Some(m) = maybe_media(rng, &REQUEST_TYPES) {
        headers.push(("Content-Type".into(), m));
    }
    let mut url = format!("http://{host}{path}");
    if !query.is_empty() {
        url.push('?');
        url.push_str(&encode_query(&query));
    }

    let mut interaction = Interaction::new(
        method,
        Url::parse(&url).unwrap(),
        *STATUSES.choose(rng).unwrap(),
    );
    interaction.request_headers = headers;
    if let Some(m) = maybe_media(rng, &RESPONSE_TYPES) {
        interaction
            .response_headers
            .push(("content-type".into(), m));
    }
    interaction
}

pub fn gen_log(rng: &mut StdRng, spec: &GenSpec, max_len: usize) -> InteractionLog {
    let n = rng.random_range(0..=max_len);
    InteractionLog {
        interactions: (0..n).map(|_| gen_interaction(rng, spec)).collect(),
        source: "generated".into(),
    }
}

/// A log that covers every documented element of `spec` at least once.
/// Requires a spec generated with `distinct_shapes`.
pub fn saturating_log(spec: &GenSpec) -> InteractionLog {
    let mut interactions = Vec::new();
    let var_value = "zzz";
    for op in &spec.ops {
        let mut path = spec.base.clone();
        for s in &op.segs {
            path.push('/');
            path.push_str(match s {
                Seg::Lit(l) => l,
                Seg::Var(_) => var_value,
            });
        }
        if path.is_empty() {
            path.push('/');
        }
        let base = format!("http://api.example.com{path}");
        let req = |status: u16,
                   req_type: Option<&str>,
                   resp_type: Option<&str>,
                   extra: &[(String, String, Loc)]| {
            let mut query = Vec::new();
            let mut headers = Vec::new();
            let mut cookies = Vec::new();
            for (name, value, loc) in extra {
                match loc {
                    Loc::Query => query.push((name.clone(), value.clone())),
                    Loc::Header => headers.push((name.clone(), value.clone())),
                    Loc::Cookie => cookies.push(format!("{name}={value}")),
                    Loc::Path => {}
                }
            }
            if !cookies.is_empty() {
                headers.push(("Cookie".to_string(), cookies.join("; ")));
            }
            if let Some(t) = req_type {
                headers.push(("Content-Type".to_string(), t.to_string()));
            }
            let mut url = base.clone();
            if !query.is_empty() {
                url.push('?');
                url.push_str(&encode_query(&query));
            }
            let mut i = Interaction::new(op.method, Url::parse(&url).unwrap(), status);
            i.request_headers = headers;
            if let Some(t) = resp_type {
                i.response_headers
                    .push(("Content-Type".to_string(), t.to_string()));
            }
            i
        };

        // Every parameter with one value, then every literal.
        let all: Vec<(String, String, Loc)> = op
            .params
            .iter()
            .map(|p| (p.name.clone(), "v".to_string(), p.loc))
            .collect();
        interactions.push(req(200, None, None, &all));
        for p in &op.params {
            let lits: Vec<String> = match &p.domain {
                Domain::Boolean => vec!["true".into(), "false".into()],
                Domain::Enum(l) => l.clone(),
                Domain::Unbounded => vec![],
            };
            for lit in lits {
                interactions.push(req(200, None, None, &[(p.name.clone(), lit, p.loc)]));
            }
        }
        for t in op.request_types.iter().flatten() {
            interactions.push(req(200, Some(t), None, &[]));
        }
        for (key, types) in &op.responses {
            if let Ok(code) = key.parse::<u16>() {
                interactions.push(req(code, None, None, &[]));
            }
            for t in types {
                interactions.push(req(200, None, Some(t), &[]));
            }
        }
        interactions.push(req(500, None, None, &[]));
    }
    InteractionLog {
        interactions,
        source: "saturating".into(),
    }
}

/// A random log for JSONL round-trips: arbitrary bytes in bodies, unicode
/// in headers, millisecond timestamps.
pub fn gen_wire_log(rng: &mut StdRng) -> InteractionLog {
    let n = rng.random_range(0..=12);
    let mut interactions = Vec::new();
    for _ in 0..n {
        let method = *restcov::HttpMethod::ALL.choose(rng).unwrap();
        let path: String = (0..rng.random_range(0..4))
            .map(|_| {
                format!(
                    "/{}",
                    ["a", "b%20c", "d", "%C3%A9", "42"].choose(rng).unwrap()
                )
            })
            .collect();
        let url = format!(
            "{}://{}{}{}",
            ["http", "https"].choose(rng).unwrap(),
            ["h", "localhost:8080", "127.0.0.1:1"].choose(rng).unwrap(),
            if path.is_empty() {
                "/".to_string()
            } else {
                path
            },
            ["", "?x=1", "?a=b&a=c", "?q=%E2%9C%93"]
                .choose(rng)
                .unwrap()
        );
        let body = |rng: &mut StdRng| -> Option<Vec<u8>> {
            match rng.random_range(0..3) {
                0 => None,
                1 => Some(Vec::new()),
                _ => Some((0..rng.random_range(1..64)).map(|_| rng.random()).collect()),
            }
        };
        let headers = |rng: &mut StdRng| -> Vec<(String, String)> {
            (0..rng.random_range(0..4))
                .map(|_| {
                    (
                        ["content-type", "X-Thing", "accept"]
                            .choose(rng)
                            .unwrap()
                            .to_string(),
                        ["application/json", "ünïcødé ✓", "", "a, b; q=0.5"]
                            .choose(rng)
                            .unwrap()
                            .to_string(),
                    )
                })
                .collect()
        };
        let millis: i64 = rng.random_range(0..4_102_444_800_000);
        interactions.push(Interaction {
            timestamp: chrono::DateTime::from_timestamp_millis(millis).unwrap(),
            method,
            url: Url::parse(&url).unwrap(),
            request_headers: headers(rng),
            request_body: body(rng),
            status: rng.random_range(100..=599),
            response_headers: headers(rng),
            response_body: body(rng),
            truncated: rng.random_bool(0.1),
        });
    }
    InteractionLog {
        interactions,
        source: "wire".into(),
    }
}
