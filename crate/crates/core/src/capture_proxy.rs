//! Recording reverse proxy.
//!
//! Point a testing tool at the proxy as if it were the API. Each request is
//! forwarded to `upstream_base` with its path and query appended verbatim,
//! the upstream response is relayed back, and the completed exchange is
//! appended to a native JSONL log. The recorded URL is the upstream URL, so
//! the log matches against the API's own server entries.
//!
//! All log appends go through a single writer task. A request handler waits
//! for its record to be written before it answers the client, which makes
//! "record written" and "exchange completed" the same event.

use std::collections::HashSet;
use std::convert::Infallible;
use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use bytes::Bytes;
use chrono::Utc;
use http_body_util::{BodyExt, Full};
use hyper::body::Incoming;
use hyper::header::{HeaderMap, HeaderValue, CONNECTION, HOST};
use hyper::server::conn::http1;
use hyper::service::service_fn;
use hyper::{Request, Response, StatusCode};
use hyper_util::client::legacy::connect::HttpConnector;
use hyper_util::client::legacy::Client;
use hyper_util::rt::{TokioExecutor, TokioIo};
use hyper_util::server::graceful::GracefulShutdown;
use tokio::io::AsyncWriteExt;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot, watch};
use url::Url;

use crate::method::HttpMethod;
use crate::traffic_log::{interaction_to_json_line, truncate_to_millis, Headers, Interaction};

pub const DEFAULT_MAX_BODY_BYTES: usize = 1024 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum ProxyError {
    #[error("invalid proxy configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot listen on {address}: {source}")]
    Bind {
        address: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write capture log {path}: {source}")]
    LogWrite {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProxyConfig {
    pub listen_address: String,
    pub upstream_base: Url,
    pub log_path: PathBuf,
    pub max_body_bytes: usize,
}

impl ProxyConfig {
    pub fn new(
        listen_address: impl Into<String>,
        upstream_base: &str,
        log_path: impl Into<PathBuf>,
        max_body_bytes: usize,
    ) -> Result<Self, ProxyError> {
        let invalid = |m: String| ProxyError::InvalidConfig(m);
        let upstream = Url::parse(upstream_base)
            .map_err(|e| invalid(format!("upstream {upstream_base:?}: {e}")))?;
        if upstream.scheme() != "http" {
            return Err(invalid(format!(
                "upstream must be a plain http URL, got scheme {:?}",
                upstream.scheme()
            )));
        }
        if upstream.host_str().is_none() {
            return Err(invalid("upstream has no host".to_string()));
        }
        if upstream.query().is_some() || upstream.fragment().is_some() {
            return Err(invalid(
                "upstream must not carry a query or fragment".to_string(),
            ));
        }
        if max_body_bytes == 0 {
            return Err(invalid("max_body_bytes must be positive".to_string()));
        }
        Ok(ProxyConfig {
            listen_address: listen_address.into(),
            upstream_base: upstream,
            log_path: log_path.into(),
            max_body_bytes,
        })
    }

    /// Upstream URL for an incoming path-and-query.
    fn upstream_url(&self, path_and_query: &str) -> String {
        let base = self.upstream_base.as_str().trim_end_matches('/');
        format!("{base}{path_and_query}")
    }

    fn upstream_authority(&self) -> String {
        let host = self.upstream_base.host_str().unwrap_or_default();
        match self.upstream_base.port() {
            Some(port) => format!("{host}:{port}"),
            None => host.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunSummary {
    pub requests_forwarded: u64,
    pub bytes_logged: u64,
    /// Requests answered with 502 because the upstream could not be reached.
    pub upstream_failures: u64,
}

const HOP_BY_HOP: [&str; 7] = [
    "connection",
    "keep-alive",
    "te",
    "trailer",
    "transfer-encoding",
    "upgrade",
    "proxy-connection",
];

fn is_hop_by_hop(name: &str, listed: &HashSet<String>) -> bool {
    let lower = name.to_ascii_lowercase();
    HOP_BY_HOP.contains(&lower.as_str()) || lower.starts_with("proxy-") || listed.contains(&lower)
}

/// Copies `headers` minus hop-by-hop headers, including any that the
/// `Connection` header names.
pub fn strip_hop_by_hop(headers: &HeaderMap) -> HeaderMap {
    let listed: HashSet<String> = headers
        .get_all(CONNECTION)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(','))
        .map(|t| t.trim().to_ascii_lowercase())
        .filter(|t| !t.is_empty())
        .collect();
    let mut out = HeaderMap::with_capacity(headers.len());
    for (name, value) in headers {
        if !is_hop_by_hop(name.as_str(), &listed) {
            out.append(name.clone(), value.clone());
        }
    }
    out
}

fn header_pairs(headers: &HeaderMap) -> Headers {
    headers
        .iter()
        .map(|(n, v)| {
            (
                n.as_str().to_string(),
                String::from_utf8_lossy(v.as_bytes()).into_owned(),
            )
        })
        .collect()
}

fn capture_body(body: &Bytes, limit: usize) -> (Option<Vec<u8>>, bool) {
    if body.is_empty() {
        (None, false)
    } else if body.len() > limit {
        (Some(body[..limit].to_vec()), true)
    } else {
        (Some(body.to_vec()), false)
    }
}

fn plain(status: StatusCode, message: String) -> Response<Full<Bytes>> {
    let mut resp = Response::new(Full::new(Bytes::from(message)));
    *resp.status_mut() = status;
    resp.headers_mut().insert(
        "content-type",
        HeaderValue::from_static("text/plain; charset=utf-8"),
    );
    resp
}

struct LogRecord {
    line: String,
    ack: oneshot::Sender<bool>,
}

#[derive(Default)]
struct WriterTotals {
    records: u64,
    bytes: u64,
    error: Option<std::io::Error>,
}

async fn log_writer(
    mut file: tokio::fs::File,
    mut rx: mpsc::Receiver<LogRecord>,
    failed: watch::Sender<bool>,
) -> WriterTotals {
    let mut totals = WriterTotals::default();
    while let Some(LogRecord { mut line, ack }) = rx.recv().await {
        if totals.error.is_some() {
            let _ = ack.send(false);
            continue;
        }
        line.push('\n');
        let written = async {
            file.write_all(line.as_bytes()).await?;
            file.flush().await
        }
        .await;
        match written {
            Ok(()) => {
                totals.records += 1;
                totals.bytes += line.len() as u64;
                let _ = ack.send(true);
            }
            Err(e) => {
                tracing::error!("capture log write failed: {e}");
                totals.error = Some(e);
                let _ = failed.send(true);
                let _ = ack.send(false);
            }
        }
    }
    totals
}

struct Shared {
    config: ProxyConfig,
    client: Client<HttpConnector, Full<Bytes>>,
    log: mpsc::Sender<LogRecord>,
    upstream_failures: std::sync::atomic::AtomicU64,
}

impl Shared {
    async fn handle(&self, req: Request<Incoming>) -> Response<Full<Bytes>> {
        let Ok(method) = req.method().as_str().parse::<HttpMethod>() else {
            return plain(
                StatusCode::NOT_IMPLEMENTED,
                format!(
                    "method {} is not supported by the capture proxy",
                    req.method()
                ),
            );
        };
        let path_and_query = req
            .uri()
            .path_and_query()
            .map(|pq| pq.as_str().to_string())
            .unwrap_or_else(|| "/".to_string());
        let target = self.config.upstream_url(&path_and_query);

        let (parts, body) = req.into_parts();
        let body = match body.collect().await {
            Ok(collected) => collected.to_bytes(),
            Err(e) => {
                return plain(
                    StatusCode::BAD_REQUEST,
                    format!("cannot read request body: {e}"),
                )
            }
        };

        let mut headers = strip_hop_by_hop(&parts.headers);
        match HeaderValue::from_str(&self.config.upstream_authority()) {
            Ok(host) => {
                headers.insert(HOST, host);
            }
            Err(_) => {
                headers.remove(HOST);
            }
        }

        let mut upstream_req = Request::new(Full::new(body.clone()));
        *upstream_req.method_mut() = parts.method.clone();
        *upstream_req.headers_mut() = headers.clone();
        match target.parse() {
            Ok(uri) => *upstream_req.uri_mut() = uri,
            Err(e) => {
                return plain(
                    StatusCode::BAD_REQUEST,
                    format!("cannot forward {target}: {e}"),
                )
            }
        }

        let upstream_resp = match self.client.request(upstream_req).await {
            Ok(resp) => resp,
            Err(e) => return self.unreachable(&target, e.to_string()),
        };
        let (resp_parts, resp_body) = upstream_resp.into_parts();
        let resp_body = match resp_body.collect().await {
            Ok(collected) => collected.to_bytes(),
            Err(e) => return self.unreachable(&target, e.to_string()),
        };
        let resp_headers = strip_hop_by_hop(&resp_parts.headers);

        let url = match crate::traffic_log::parse_http_url(&target) {
            Ok(url) => url,
            Err(e) => {
                return plain(
                    StatusCode::BAD_GATEWAY,
                    format!("unrecordable URL {target}: {e}"),
                )
            }
        };
        let limit = self.config.max_body_bytes;
        let (request_body, req_cut) = capture_body(&body, limit);
        let (response_body, resp_cut) = capture_body(&resp_body, limit);
        let interaction = Interaction {
            timestamp: truncate_to_millis(Utc::now()),
            method,
            url,
            request_headers: header_pairs(&headers),
            request_body,
            status: resp_parts.status.as_u16(),
            response_headers: header_pairs(&resp_headers),
            response_body,
            truncated: req_cut || resp_cut,
        };

        let (ack, acked) = oneshot::channel();
        let record = LogRecord {
            line: interaction_to_json_line(&interaction),
            ack,
        };
        let logged = self.log.send(record).await.is_ok() && acked.await.unwrap_or(false);
        if !logged {
            return plain(
                StatusCode::INTERNAL_SERVER_ERROR,
                "capture log write failed; exchange not recorded".to_string(),
            );
        }

        let mut resp = Response::new(Full::new(resp_body));
        *resp.status_mut() = resp_parts.status;
        *resp.headers_mut() = resp_headers;
        resp
    }

    fn unreachable(&self, target: &str, error: String) -> Response<Full<Bytes>> {
        self.upstream_failures
            .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        tracing::warn!("upstream unreachable for {target}: {error}");
        plain(
            StatusCode::BAD_GATEWAY,
            format!("upstream unreachable: {error}"),
        )
    }
}

/// A proxy whose listening socket and log file are already open.
pub struct CaptureProxy {
    config: ProxyConfig,
    listener: TcpListener,
    log_file: tokio::fs::File,
}

impl CaptureProxy {
    pub async fn bind(config: ProxyConfig) -> Result<Self, ProxyError> {
        let listener = TcpListener::bind(&config.listen_address)
            .await
            .map_err(|source| ProxyError::Bind {
                address: config.listen_address.clone(),
                source,
            })?;
        let log_file = tokio::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&config.log_path)
            .await
            .map_err(|source| ProxyError::LogWrite {
                path: config.log_path.display().to_string(),
                source,
            })?;
        Ok(CaptureProxy {
            config,
            listener,
            log_file,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener
            .local_addr()
            .expect("bound listener has a local address")
    }

    /// Serves until `shutdown` resolves (or a log write fails), then waits
    /// for in-flight exchanges to finish.
    pub async fn run<F>(self, shutdown: F) -> Result<RunSummary, ProxyError>
    where
        F: Future<Output = ()>,
    {
        let CaptureProxy {
            config,
            listener,
            log_file,
        } = self;
        let log_path = config.log_path.display().to_string();
        let (tx, rx) = mpsc::channel(256);
        let (failed_tx, mut failed_rx) = watch::channel(false);
        let writer = tokio::spawn(log_writer(log_file, rx, failed_tx));

        let shared = Arc::new(Shared {
            config,
            client: Client::builder(TokioExecutor::new()).build(HttpConnector::new()),
            log: tx,
            upstream_failures: Default::default(),
        });
        let graceful = GracefulShutdown::new();
        tokio::pin!(shutdown);

        loop {
            tokio::select! {
                _ = &mut shutdown => break,
                _ = failed_rx.changed() => break,
                accepted = listener.accept() => {
                    let (stream, peer) = match accepted {
                        Ok(conn) => conn,
                        Err(e) => {
                            tracing::warn!("accept failed: {e}");
                            continue;
                        }
                    };
                    tracing::debug!("connection from {peer}");
                    let shared = Arc::clone(&shared);
                    let service = service_fn(move |req| {
                        let shared = Arc::clone(&shared);
                        async move { Ok::<_, Infallible>(shared.handle(req).await) }
                    });
                    let conn = http1::Builder::new().serve_connection(TokioIo::new(stream), service);
                    let conn = graceful.watch(conn);
                    tokio::spawn(async move {
                        if let Err(e) = conn.await {
                            tracing::debug!("connection from {peer} ended: {e}");
                        }
                    });
                }
            }
        }

        drop(listener);
        graceful.shutdown().await;
        let upstream_failures = shared
            .upstream_failures
            .load(std::sync::atomic::Ordering::Relaxed);
        // Dropping the last sender lets the writer drain and finish.
        drop(shared);
        let totals = writer.await.map_err(|e| ProxyError::LogWrite {
            path: log_path.clone(),
            source: std::io::Error::other(e),
        })?;
        if let Some(source) = totals.error {
            return Err(ProxyError::LogWrite {
                path: log_path,
                source,
            });
        }
        Ok(RunSummary {
            requests_forwarded: totals.records,
            bytes_logged: totals.bytes,
            upstream_failures,
        })
    }
}

pub async fn run_proxy<F>(config: ProxyConfig, shutdown: F) -> Result<RunSummary, ProxyError>
where
    F: Future<Output = ()>,
{
    CaptureProxy::bind(config).await?.run(shutdown).await
}
