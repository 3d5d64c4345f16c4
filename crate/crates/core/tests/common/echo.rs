//! A scripted upstream that answers with the status and content type the
//! request asks for, and remembers every exchange.

use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use bytes::Bytes;
use http_body_util::{BodyExt, Full};
use hyper::body::Incoming;
use hyper::server::conn::http1;
use hyper::service::service_fn;
use hyper::{Request, Response, StatusCode};
use hyper_util::rt::TokioIo;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EchoExchange {
    pub request_id: String,
    pub method: String,
    pub path_and_query: String,
    pub request_body: Vec<u8>,
    pub status: u16,
    pub response_body: Vec<u8>,
}

pub struct EchoServer {
    pub addr: SocketAddr,
    pub seen: Arc<Mutex<Vec<EchoExchange>>>,
    stop: Option<oneshot::Sender<()>>,
}

impl EchoServer {
    pub async fn start() -> EchoServer {
        let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let seen: Arc<Mutex<Vec<EchoExchange>>> = Arc::default();
        let (stop, mut stopped) = oneshot::channel::<()>();
        let log = Arc::clone(&seen);
        tokio::spawn(async move {
            loop {
                tokio::select! {
                    _ = &mut stopped => break,
                    accepted = listener.accept() => {
                        let Ok((stream, _)) = accepted else { continue };
                        let log = Arc::clone(&log);
                        let service = service_fn(move |req| {
                            let log = Arc::clone(&log);
                            async move { Ok::<_, Infallible>(answer(req, &log).await) }
                        });
                        tokio::spawn(async move {
                            let _ = http1::Builder::new().serve_connection(TokioIo::new(stream), service).await;
                        });
                    }
                }
            }
        });
        EchoServer {
            addr,
            seen,
            stop: Some(stop),
        }
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn exchanges(&self) -> Vec<EchoExchange> {
        self.seen.lock().unwrap().clone()
    }
}

impl Drop for EchoServer {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
    }
}

fn header(req: &Request<Incoming>, name: &str) -> Option<String> {
    req.headers()
        .get(name)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string)
}

async fn answer(req: Request<Incoming>, log: &Mutex<Vec<EchoExchange>>) -> Response<Full<Bytes>> {
    let request_id = header(&req, "x-request-id").unwrap_or_default();
    let status: u16 = header(&req, "x-echo-status")
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    let content_type = header(&req, "x-echo-type");
    let method = req.method().to_string();
    let path_and_query = req
        .uri()
        .path_and_query()
        .map(|p| p.to_string())
        .unwrap_or_default();
    let request_body = req.into_body().collect().await.unwrap().to_bytes().to_vec();

    let response_body = if status == 204 {
        Vec::new()
    } else {
        let mut body = format!("echo {request_id} {method} ").into_bytes();
        body.extend_from_slice(&request_body);
        body.extend_from_slice(&[0xff, 0x00, 0xfe]);
        body
    };
    log.lock().unwrap().push(EchoExchange {
        request_id,
        method,
        path_and_query,
        request_body,
        status,
        response_body: response_body.clone(),
    });

    let mut resp = Response::new(Full::new(Bytes::from(response_body)));
    *resp.status_mut() = StatusCode::from_u16(status).unwrap();
    if let Some(t) = content_type {
        resp.headers_mut()
            .insert("content-type", t.parse().unwrap());
    }
    resp
}
