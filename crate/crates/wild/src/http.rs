//! HTTP methods, wire-level request and response types, the resource
//! accessor abstraction, and a small HTTP/1.1 client over `std::net`.
//!
//! Both the client and the embedded server speak a deliberately plain
//! dialect: one request per connection, `Connection: close`, bodies framed
//! by `Content-Length`. The in-process accessor used by benchmarks routes
//! through the same message text as the socket path, so switching transports
//! never changes what a resource sees.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

pub const HTTPM_NS: &str = "http://www.w3.org/2011/http-methods#";
pub const HTTP_NS: &str = "http://www.w3.org/2011/http#";

/// The document IRI a request target addresses: everything up to `#`.
pub fn strip_fragment(iri: &str) -> &str {
    match iri.find('#') {
        Some(i) => &iri[..i],
        None => iri,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Get,
    Put,
    Post,
    Delete,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Get => "GET",
            Method::Put => "PUT",
            Method::Post => "POST",
            Method::Delete => "DELETE",
        }
    }

    pub fn from_token(s: &str) -> Option<Method> {
        match s {
            "GET" => Some(Method::Get),
            "PUT" => Some(Method::Put),
            "POST" => Some(Method::Post),
            "DELETE" => Some(Method::Delete),
            _ => None,
        }
    }

    /// The method's IRI in the W3C HTTP methods vocabulary.
    pub fn iri(&self) -> String {
        format!("{HTTPM_NS}{}", self.as_str())
    }

    pub fn from_iri(iri: &str) -> Option<Method> {
        iri.strip_prefix(HTTPM_NS).and_then(Method::from_token)
    }

    pub fn is_get(&self) -> bool {
        matches!(self, Method::Get)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A wire-level request: the body is already serialized text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub method: Method,
    pub target: String,
    pub body: String,
}

impl HttpRequest {
    pub fn get(target: impl Into<String>) -> Self {
        HttpRequest { method: Method::Get, target: target.into(), body: String::new() }
    }

    pub fn new(method: Method, target: impl Into<String>, body: impl Into<String>) -> Self {
        HttpRequest { method, target: target.into(), body: body.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    /// Header names lowercased.
    pub headers: BTreeMap<String, String>,
    pub body: String,
}

impl Response {
    pub fn new(status: u16) -> Self {
        Response { status, headers: BTreeMap::new(), body: String::new() }
    }

    pub fn with_body(status: u16, content_type: &str, body: impl Into<String>) -> Self {
        let mut r = Response::new(status);
        r.headers.insert("content-type".to_string(), content_type.to_string());
        r.body = body.into();
        r
    }

    pub fn header(mut self, name: &str, value: impl Into<String>) -> Self {
        self.headers.insert(name.to_ascii_lowercase(), value.into());
        self
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    pub fn location(&self) -> Option<&str> {
        self.headers.get("location").map(|s| s.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("invalid request target <{0}>")]
    BadTarget(String),
    #[error("cannot reach {target}: {msg}")]
    Unreachable { target: String, msg: String },
    #[error("timed out talking to {target}")]
    Timeout { target: String },
    #[error("malformed response from {target}: {msg}")]
    BadResponse { target: String, msg: String },
}

/// Anything that can answer HTTP requests addressed by absolute IRI: the
/// socket client, or an in-process server registry.
pub trait ResourceAccessor {
    fn request(&mut self, req: &HttpRequest) -> Result<Response, TransportError>;
}

/// HTTP/1.1 client; opens one connection per request.
#[derive(Debug, Clone)]
pub struct HttpClient {
    pub timeout: Duration,
}

impl Default for HttpClient {
    fn default() -> Self {
        HttpClient { timeout: Duration::from_secs(10) }
    }
}

impl HttpClient {
    pub fn new(timeout: Duration) -> Self {
        HttpClient { timeout }
    }
}

impl ResourceAccessor for HttpClient {
    fn request(&mut self, req: &HttpRequest) -> Result<Response, TransportError> {
        let url = url::Url::parse(&req.target)
            .map_err(|_| TransportError::BadTarget(req.target.clone()))?;
        if url.scheme() != "http" {
            return Err(TransportError::BadTarget(req.target.clone()));
        }
        let host = url.host_str().ok_or_else(|| TransportError::BadTarget(req.target.clone()))?;
        let port = url.port().unwrap_or(80);
        let addr = (host, port)
            .to_socket_addrs()
            .map_err(|e| TransportError::Unreachable {
                target: req.target.clone(),
                msg: e.to_string(),
            })?
            .next()
            .ok_or_else(|| TransportError::Unreachable {
                target: req.target.clone(),
                msg: "no address".to_string(),
            })?;
        let stream = TcpStream::connect_timeout(&addr, self.timeout).map_err(|e| {
            TransportError::Unreachable { target: req.target.clone(), msg: e.to_string() }
        })?;
        stream.set_read_timeout(Some(self.timeout)).ok();
        stream.set_write_timeout(Some(self.timeout)).ok();
        let mut path = url.path().to_string();
        if let Some(q) = url.query() {
            path.push('?');
            path.push_str(q);
        }
        let host_header = match url.port() {
            Some(p) => format!("{host}:{p}"),
            None => host.to_string(),
        };
        let text = format_request(req.method, &path, &host_header, &req.body);
        let mut stream = stream;
        stream.write_all(text.as_bytes()).map_err(|e| io_to_transport(e, &req.target))?;
        let mut reader = BufReader::new(stream);
        let raw = read_message(&mut reader, MsgKind::Response)
            .map_err(|e| io_to_transport(e, &req.target))?;
        parse_response(raw, &req.target)
    }
}

fn io_to_transport(e: std::io::Error, target: &str) -> TransportError {
    match e.kind() {
        std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock => {
            TransportError::Timeout { target: target.to_string() }
        }
        _ => TransportError::Unreachable { target: target.to_string(), msg: e.to_string() },
    }
}

pub(crate) fn format_request(method: Method, path: &str, host: &str, body: &str) -> String {
    let mut out = String::new();
    out.push_str(method.as_str());
    out.push(' ');
    out.push_str(if path.is_empty() { "/" } else { path });
    out.push_str(" HTTP/1.1\r\n");
    out.push_str("Host: ");
    out.push_str(host);
    out.push_str("\r\n");
    out.push_str("Accept: text/turtle\r\n");
    if !body.is_empty() || !method.is_get() {
        out.push_str("Content-Type: text/turtle\r\n");
        out.push_str(&format!("Content-Length: {}\r\n", body.len()));
    }
    out.push_str("Connection: close\r\n\r\n");
    out.push_str(body);
    out
}

pub(crate) fn format_response(r: &Response) -> String {
    let reason = match r.status {
        200 => "OK",
        201 => "Created",
        204 => "No Content",
        400 => "Bad Request",
        404 => "Not Found",
        405 => "Method Not Allowed",
        409 => "Conflict",
        415 => "Unsupported Media Type",
        500 => "Internal Server Error",
        _ => "Response",
    };
    let mut out = format!("HTTP/1.1 {} {}\r\n", r.status, reason);
    for (k, v) in &r.headers {
        out.push_str(&format!("{}: {}\r\n", header_case(k), v));
    }
    out.push_str(&format!("Content-Length: {}\r\n", r.body.len()));
    out.push_str("Connection: close\r\n\r\n");
    out.push_str(&r.body);
    out
}

fn header_case(lower: &str) -> String {
    lower
        .split('-')
        .map(|part| {
            let mut cs = part.chars();
            match cs.next() {
                Some(c) => c.to_ascii_uppercase().to_string() + cs.as_str(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join("-")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum MsgKind {
    Request,
    Response,
}

#[derive(Debug)]
pub(crate) struct RawMessage {
    pub start_line: String,
    pub headers: BTreeMap<String, String>,
    pub body: Vec<u8>,
}

/// Reads one HTTP message. Bodies are framed by `Content-Length`; a response
/// without one is read to end of stream.
pub(crate) fn read_message<R: BufRead>(
    r: &mut R,
    kind: MsgKind,
) -> std::io::Result<RawMessage> {
    let mut start_line = String::new();
    r.read_line(&mut start_line)?;
    let start_line = start_line.trim_end().to_string();
    if start_line.is_empty() {
        return Err(std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "empty message"));
    }
    let mut headers = BTreeMap::new();
    loop {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            headers.insert(name.trim().to_ascii_lowercase(), value.trim().to_string());
        }
    }
    let body = match headers.get("content-length") {
        Some(len) => {
            let len: usize = len.parse().map_err(|_| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, "bad Content-Length")
            })?;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf)?;
            buf
        }
        None if kind == MsgKind::Response => {
            let mut buf = Vec::new();
            r.read_to_end(&mut buf)?;
            buf
        }
        None => Vec::new(),
    };
    Ok(RawMessage { start_line, headers, body })
}

fn parse_response(raw: RawMessage, target: &str) -> Result<Response, TransportError> {
    let mut parts = raw.start_line.split_whitespace();
    let version = parts.next().unwrap_or("");
    if !version.starts_with("HTTP/") {
        return Err(TransportError::BadResponse {
            target: target.to_string(),
            msg: format!("bad status line '{}'", raw.start_line),
        });
    }
    let status: u16 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| TransportError::BadResponse {
            target: target.to_string(),
            msg: format!("bad status line '{}'", raw.start_line),
        })?;
    let body = String::from_utf8(raw.body).map_err(|_| TransportError::BadResponse {
        target: target.to_string(),
        msg: "body is not UTF-8".to_string(),
    })?;
    Ok(Response { status, headers: raw.headers, body })
}
