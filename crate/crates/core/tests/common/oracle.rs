//! Brute-force reference implementation working from a `GenSpec`.

use std::collections::BTreeSet;

use restcov::{CoverageReport, HttpMethod, Interaction, Metric};

use super::gen::{Domain, GenOp, GenSpec, Loc, Seg};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMatch {
    Op(usize),
    NoServerPrefix,
    NoPath,
    NoMethod,
}

fn segments_after_base<'a>(path: &'a str, base: &str) -> Option<Vec<&'a str>> {
    let rest = path.strip_prefix(base)?;
    if !rest.is_empty() && !rest.starts_with('/') {
        return None;
    }
    Some(rest.split('/').filter(|s| !s.is_empty()).collect())
}

fn template_matches(segs: &[Seg], request: &[&str]) -> bool {
    segs.len() == request.len()
        && segs.iter().zip(request).all(|(s, r)| match s {
            Seg::Lit(l) => l == r,
            Seg::Var(_) => !r.is_empty(),
        })
}

fn literal_count(op: &GenOp) -> usize {
    op.segs.iter().filter(|s| matches!(s, Seg::Lit(_))).count()
}

/// Tries every operation and keeps the most literal one.
pub fn oracle_match(spec: &GenSpec, method: HttpMethod, path: &str) -> OracleMatch {
    let Some(request) = segments_after_base(path, &spec.base) else {
        return OracleMatch::NoServerPrefix;
    };
    let candidates: Vec<usize> = (0..spec.ops.len())
        .filter(|&i| template_matches(&spec.ops[i].segs, &request))
        .collect();
    if candidates.is_empty() {
        return OracleMatch::NoPath;
    }
    let mut with_method: Vec<usize> = candidates
        .into_iter()
        .filter(|&i| spec.ops[i].method == method)
        .collect();
    if with_method.is_empty() {
        return OracleMatch::NoMethod;
    }
    with_method.sort_by(|&a, &b| {
        literal_count(&spec.ops[b])
            .cmp(&literal_count(&spec.ops[a]))
            .then_with(|| spec.ops[a].template().cmp(&spec.ops[b].template()))
    });
    OracleMatch::Op(with_method[0])
}

fn essence(raw: &str) -> Option<String> {
    let e = raw.split(';').next().unwrap().trim().to_lowercase();
    (!e.is_empty()).then_some(e)
}

fn first_content_type(headers: &[(String, String)]) -> Option<String> {
    headers
        .iter()
        .find(|(n, _)| n.to_lowercase() == "content-type")
        .and_then(|(_, v)| essence(v))
}

/// Every (location, name, value) the request carried, path parameters
/// excluded.
fn supplied_inputs(i: &Interaction) -> Vec<(Loc, String, String)> {
    let mut out = Vec::new();
    if let Some(q) = i.url.query() {
        for (k, v) in url::form_urlencoded::parse(q.as_bytes()) {
            out.push((Loc::Query, k.into_owned(), v.into_owned()));
        }
    }
    for (n, v) in &i.request_headers {
        out.push((Loc::Header, n.to_lowercase(), v.clone()));
        if n.to_lowercase() == "cookie" {
            for pair in v.split(';') {
                if let Some((k, val)) = pair.split_once('=') {
                    out.push((Loc::Cookie, k.trim().to_string(), val.trim().to_string()));
                }
            }
        }
    }
    out
}

fn literals(domain: &Domain) -> Vec<String> {
    match domain {
        Domain::Unbounded => vec![],
        Domain::Boolean => vec!["false".into(), "true".into()],
        Domain::Enum(l) => l.clone(),
    }
}

fn has_wildcard(types: &[String]) -> bool {
    types.iter().any(|t| t.contains('*'))
}

fn ratio(n: u64, d: u64) -> Option<(u64, u64)> {
    (d > 0).then_some((n, d))
}

/// Counts for each metric in `Metric::ALL` order; `None` is not computable.
pub fn oracle_counts(spec: &GenSpec, interactions: &[Interaction]) -> Vec<Option<(u64, u64)>> {
    let hits: Vec<(usize, &Interaction)> = interactions
        .iter()
        .filter_map(|i| match oracle_match(spec, i.method, i.url.path()) {
            OracleMatch::Op(k) => Some((k, i)),
            _ => None,
        })
        .collect();
    let hits_for = |k: usize| hits.iter().filter(move |(j, _)| *j == k).map(|(_, i)| *i);

    let templates: BTreeSet<String> = spec.ops.iter().map(|o| o.template()).collect();
    let hit_templates: BTreeSet<String> =
        hits.iter().map(|(k, _)| spec.ops[*k].template()).collect();
    let path = ratio(hit_templates.len() as u64, templates.len() as u64);

    let hit_ops: BTreeSet<usize> = hits.iter().map(|(k, _)| *k).collect();
    let operation = ratio(hit_ops.len() as u64, spec.ops.len() as u64);

    let (mut pn, mut pd, mut vn, mut vd) = (0, 0, 0, 0);
    let (mut qn, mut qd, mut sn, mut sd, mut rn, mut rd) = (0, 0, 0, 0, 0, 0);
    for (k, op) in spec.ops.iter().enumerate() {
        let supplied: Vec<(Loc, String, String)> = hits_for(k).flat_map(supplied_inputs).collect();
        for p in &op.params {
            let values: Vec<&String> = supplied
                .iter()
                .filter(|(loc, name, _)| {
                    *loc == p.loc
                        && match p.loc {
                            Loc::Header => *name == p.name.to_lowercase(),
                            _ => *name == p.name,
                        }
                })
                .map(|(_, _, v)| v)
                .collect();
            pd += 1;
            let present = match p.loc {
                Loc::Path => hits_for(k).next().is_some(),
                _ => !values.is_empty(),
            };
            if present {
                pn += 1;
            }
            for lit in literals(&p.domain) {
                vd += 1;
                let seen = values.iter().any(|v| match p.domain {
                    Domain::Boolean => v.to_lowercase() == lit,
                    _ => **v == lit,
                });
                if seen {
                    vn += 1;
                }
            }
        }

        if let Some(types) = &op.request_types {
            if !has_wildcard(types) {
                for t in types {
                    qd += 1;
                    if hits_for(k).any(|i| {
                        first_content_type(&i.request_headers).as_deref() == Some(t.as_str())
                    }) {
                        qn += 1;
                    }
                }
            }
        }

        let codes: BTreeSet<u16> = op
            .responses
            .iter()
            .filter_map(|(key, _)| key.parse().ok())
            .collect();
        for code in codes {
            sd += 1;
            if hits_for(k).any(|i| i.status == code) {
                sn += 1;
            }
        }

        let resp: BTreeSet<String> = op
            .responses
            .iter()
            .flat_map(|(_, t)| t.iter().cloned())
            .collect();
        let resp: Vec<String> = resp.into_iter().collect();
        if !has_wildcard(&resp) {
            for t in &resp {
                rd += 1;
                if hits_for(k)
                    .any(|i| first_content_type(&i.response_headers).as_deref() == Some(t.as_str()))
                {
                    rn += 1;
                }
            }
        }
    }

    let correct = hits.iter().any(|(_, i)| (200..300).contains(&i.status));
    let erroneous = hits.iter().any(|(_, i)| (400..600).contains(&i.status));
    let classes = Some((correct as u64 + erroneous as u64, 2));

    vec![
        path,
        operation,
        ratio(pn, pd),
        ratio(vn, vd),
        ratio(qn, qd),
        classes,
        ratio(sn, sd),
        ratio(rn, rd),
    ]
}

pub fn report_counts(report: &CoverageReport) -> Vec<Option<(u64, u64)>> {
    Metric::ALL
        .iter()
        .map(|m| report.metrics.get(*m).counts())
        .collect()
}
