//! Puts the capture proxy in front of a toy upstream, sends a few requests
//! through it and analyzes the recorded log.
//!
//! cargo run --example record_with_proxy

use std::convert::Infallible;

use bytes::Bytes;
use http_body_util::{BodyExt, Full};
use hyper::server::conn::http1;
use hyper::service::service_fn;
use hyper::{Request, Response};
use hyper_util::client::legacy::Client;
use hyper_util::rt::{TokioExecutor, TokioIo};
use tokio::net::TcpListener;

use restcov::capture_proxy::{CaptureProxy, ProxyConfig, DEFAULT_MAX_BODY_BYTES};
use restcov::traffic_log::read_log_file;
use restcov::{compute_report, load_spec_file, match_log};

async fn upstream(
    req: Request<hyper::body::Incoming>,
) -> Result<Response<Full<Bytes>>, Infallible> {
    let (status, body) = match (req.method().as_str(), req.uri().path()) {
        ("GET", "/items") => (200, "[]"),
        ("POST", "/items") => (201, "{\"id\":1}"),
        ("GET", p) if p.starts_with("/items/") => (404, "missing"),
        _ => (404, "no route"),
    };
    let ct = if body.starts_with(['[', '{']) {
        "application/json"
    } else {
        "text/plain"
    };
    Ok(Response::builder()
        .status(status)
        .header("content-type", ct)
        .body(Full::new(Bytes::from(body)))
        .unwrap())
}

#[tokio::main]
async fn main() {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let upstream_addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        loop {
            let (stream, _) = listener.accept().await.unwrap();
            tokio::spawn(
                http1::Builder::new().serve_connection(TokioIo::new(stream), service_fn(upstream)),
            );
        }
    });

    let dir = std::env::temp_dir().join(format!("restcov-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let log_path = dir.join("capture.jsonl");
    let _ = std::fs::remove_file(&log_path);
    let config = ProxyConfig::new(
        "127.0.0.1:0",
        &format!("http://{upstream_addr}"),
        &log_path,
        DEFAULT_MAX_BODY_BYTES,
    )
    .unwrap();
    let proxy = CaptureProxy::bind(config).await.unwrap();
    let proxy_addr = proxy.local_addr();
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let running = tokio::spawn(proxy.run(async {
        let _ = stopped.await;
    }));

    let client: Client<_, Full<Bytes>> = Client::builder(TokioExecutor::new()).build_http();
    let requests = [
        ("GET", "/items?sort=asc", ""),
        ("POST", "/items", "{\"name\":\"pen\"}"),
        ("GET", "/items/9", ""),
    ];
    for (method, path, body) in requests {
        let mut req = Request::builder()
            .method(method)
            .uri(format!("http://{proxy_addr}{path}"));
        if !body.is_empty() {
            req = req.header("content-type", "application/json");
        }
        let resp = client
            .request(req.body(Full::new(Bytes::from(body))).unwrap())
            .await
            .unwrap();
        let status = resp.status();
        let text = resp.into_body().collect().await.unwrap().to_bytes();
        println!(
            "{method} {path} -> {status} {}",
            String::from_utf8_lossy(&text)
        );
    }
    let _ = stop.send(());
    let summary = running.await.unwrap().unwrap();
    println!(
        "recorded {} exchanges in {}",
        summary.requests_forwarded,
        log_path.display()
    );

    let model = load_spec_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/echo.yaml")).unwrap();
    let (log, _) = read_log_file(&log_path).unwrap();
    let report = compute_report(&model, &match_log(&model, &log));
    for (metric, value) in report.metrics.iter() {
        println!("{:<22} {value}", metric.name());
    }
    let _ = std::fs::remove_dir_all(&dir);
}
