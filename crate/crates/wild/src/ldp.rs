//! A read-write Linked Data server: basic containers and RDF sources with
//! Turtle representations.
//!
//! State writes have one extra rule beyond plain HTTP: when a PUT carries a
//! lifecycle state triple about its target, the server applies it as a patch
//! (replacing the target's old state, keeping the rest of the document) and
//! only accepts single forward steps of the lifecycle. Writing the state the
//! resource already has is a no-op; skipping a state or moving backwards is
//! rejected with 409 and leaves the resource untouched. This makes the order
//! of same-cycle writes irrelevant and keeps the request log free of
//! out-of-order transitions no matter how clients race.
//!
//! Every wire-level request is logged with its outcome and, when one
//! happened, the lifecycle transition it caused. Setup helpers used to seed
//! worlds bypass the log so measurements only see workflow traffic.

use std::collections::BTreeMap;
use std::io::{BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use crate::http::{
    format_response, read_message, strip_fragment, HttpRequest, Method, MsgKind, Response,
    ResourceAccessor, TransportError,
};
use crate::rdf::{parse_turtle, serialize_turtle, Graph, Term, Triple};
use crate::vocab::{ldp, ssn, wild};

/// Predicates applied as patches when a PUT payload mentions them about its
/// target: the lifecycle state and the sensed value of a device.
const PATCH_PREDICATES: [&str; 2] = [wild::HAS_STATE, ssn::HAS_VALUE];

const STATES: [&str; 4] =
    [wild::UNINITIALISED, wild::INITIALISED, wild::ACTIVE, wild::DONE];

fn state_rank(t: &Term) -> Option<u8> {
    let iri = t.as_iri()?;
    STATES.iter().position(|s| *s == iri).map(|i| i as u8)
}

/// True iff writing `new` over `old` is allowed: same state, or exactly one
/// forward step of the lifecycle.
pub fn state_edge_ok(old: &Term, new: &Term) -> bool {
    match (state_rank(old), state_rank(new)) {
        (Some(o), Some(n)) => n == o || n == o + 1,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateChange {
    /// The resource (possibly fragment-bearing) whose state moved.
    pub subject: Term,
    pub old: Option<Term>,
    pub new: Term,
}

#[derive(Debug, Clone)]
pub struct LogEntry {
    pub method: Method,
    pub target: String,
    pub status: u16,
    pub change: Option<StateChange>,
}

#[derive(Debug)]
pub struct ServerState {
    /// Authority all resources live under, e.g. `http://127.0.0.1:4000`.
    base: String,
    /// Document IRI (no fragment) to stored graph.
    resources: BTreeMap<String, Graph>,
    containers: BTreeMap<String, u64>,
    pub log: Vec<LogEntry>,
}

impl ServerState {
    pub fn new(base: impl Into<String>) -> Self {
        let mut base = base.into();
        while base.ends_with('/') {
            base.pop();
        }
        ServerState { base, resources: BTreeMap::new(), containers: BTreeMap::new(), log: Vec::new() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    /// Registers a container. `path` is absolute ("/instances/") or a full
    /// IRI under the base; a trailing slash is added if missing.
    pub fn create_container(&mut self, path: &str) -> String {
        let mut uri = self.absolutize(path);
        if !uri.ends_with('/') {
            uri.push('/');
        }
        self.containers.entry(uri.clone()).or_insert(0);
        let mut g = Graph::new();
        g.insert(
            Triple::new(
                Term::iri(&uri),
                Term::iri(crate::rdf::RDF_TYPE),
                Term::iri(ldp::BASIC_CONTAINER),
            )
            .unwrap(),
        );
        self.resources.entry(uri.clone()).or_insert(g);
        self.link_into_parent(&uri);
        uri
    }

    /// Stores a document without logging; creates containment if the parent
    /// is a container. Setup only.
    pub fn put_resource(&mut self, uri: &str, graph: Graph) -> String {
        let uri = self.absolutize(strip_fragment(uri));
        let existed = self.resources.contains_key(&uri);
        self.resources.insert(uri.clone(), graph);
        if !existed {
            self.link_into_parent(&uri);
        }
        uri
    }

    pub fn resource(&self, uri: &str) -> Option<&Graph> {
        self.resources.get(strip_fragment(uri))
    }

    pub fn resources(&self) -> impl Iterator<Item = (&String, &Graph)> {
        self.resources.iter()
    }

    pub fn is_container(&self, uri: &str) -> bool {
        self.containers.contains_key(uri)
    }

    fn absolutize(&self, path_or_uri: &str) -> String {
        if path_or_uri.starts_with('/') {
            format!("{}{}", self.base, path_or_uri)
        } else {
            path_or_uri.to_string()
        }
    }

    fn link_into_parent(&mut self, uri: &str) {
        // For a container URI the trailing slash is part of the name, so the
        // parent boundary is the slash before it.
        let name = uri.strip_suffix('/').unwrap_or(uri);
        let Some(slash) = name.rfind('/') else { return };
        let parent = &name[..slash + 1];
        if parent != uri && self.containers.contains_key(parent) {
            let containment = Triple::new(
                Term::iri(parent),
                Term::iri(ldp::CONTAINS),
                Term::iri(uri),
            )
            .unwrap();
            self.resources.entry(parent.to_string()).or_default().insert(containment);
        }
    }

    /// Serves one wire-level request and logs it.
    pub fn handle(&mut self, method: Method, target: &str, body: &str) -> Response {
        let (response, change) = self.dispatch(method, target, body);
        self.log.push(LogEntry {
            method,
            target: target.to_string(),
            status: response.status,
            change,
        });
        response
    }

    fn dispatch(
        &mut self,
        method: Method,
        target: &str,
        body: &str,
    ) -> (Response, Option<StateChange>) {
        let doc = strip_fragment(target).to_string();
        match method {
            Method::Get => (self.get(&doc), None),
            Method::Put => self.put(&doc, body),
            Method::Post => self.post(&doc, body),
            Method::Delete => (self.delete(&doc), None),
        }
    }

    fn get(&self, doc: &str) -> Response {
        match self.resources.get(doc) {
            Some(g) => {
                let kind = if self.containers.contains_key(doc) {
                    ldp::BASIC_CONTAINER
                } else {
                    ldp::RESOURCE
                };
                Response::with_body(200, "text/turtle", serialize_turtle(g))
                    .header("Link", format!("<{kind}>; rel=\"type\""))
            }
            None => Response::new(404),
        }
    }

    fn put(&mut self, doc: &str, body: &str) -> (Response, Option<StateChange>) {
        if self.containers.contains_key(doc) {
            return (
                Response::with_body(405, "text/plain", "cannot replace a container"),
                None,
            );
        }
        let payload = match parse_turtle(body, Some(doc)) {
            Ok(g) => g,
            Err(e) => {
                return (
                    Response::with_body(400, "text/plain", format!("payload: {e}")),
                    None,
                )
            }
        };
        // Request targets lose their fragment on the wire, so the resource
        // whose lifecycle this write touches is found in the payload: the
        // subject within this document that carries a state.
        let in_doc =
            |s: &Term| s.as_iri().is_some_and(|iri| strip_fragment(iri) == doc);
        let has_state = Term::iri(wild::HAS_STATE);
        let state_writes: Vec<(Term, Term)> = payload
            .iter()
            .filter(|t| t.predicate == has_state && in_doc(&t.subject))
            .map(|t| (t.subject.clone(), t.object.clone()))
            .collect();
        if state_writes.len() > 1 {
            return (
                Response::with_body(400, "text/plain", "more than one state in the payload"),
                None,
            );
        }
        let state_write = state_writes.into_iter().next();
        let old_state = state_write.as_ref().and_then(|(subject, _)| {
            self.resources.get(doc).and_then(|g| g.object(subject, &has_state)).cloned()
        });
        if let Some((_, new)) = &state_write {
            if state_rank(new).is_none() {
                return (
                    Response::with_body(400, "text/plain", format!("unknown state {new}")),
                    None,
                );
            }
            if let Some(old) = &old_state {
                if !state_edge_ok(old, new) {
                    return (
                        Response::with_body(
                            409,
                            "text/plain",
                            format!("state may not move from {old} to {new}"),
                        ),
                        None,
                    );
                }
            }
        }
        let change = match &state_write {
            Some((subject, new)) if old_state.as_ref() != Some(new) => Some(StateChange {
                subject: subject.clone(),
                old: old_state.clone(),
                new: new.clone(),
            }),
            _ => None,
        };
        match self.resources.get_mut(doc) {
            Some(stored) => {
                let patch_pairs: Vec<(Term, Term)> = payload
                    .iter()
                    .filter(|t| {
                        PATCH_PREDICATES.iter().any(|p| t.predicate == Term::iri(p))
                            && in_doc(&t.subject)
                    })
                    .map(|t| (t.subject.clone(), t.predicate.clone()))
                    .collect();
                if patch_pairs.is_empty() {
                    *stored = payload;
                } else {
                    stored.retain(|t| {
                        !patch_pairs.contains(&(t.subject.clone(), t.predicate.clone()))
                    });
                    stored.merge(&payload);
                }
                (Response::new(200), change)
            }
            None => {
                self.resources.insert(doc.to_string(), payload);
                self.link_into_parent(doc);
                (Response::new(201).header("Location", doc), change)
            }
        }
    }

    fn post(&mut self, doc: &str, body: &str) -> (Response, Option<StateChange>) {
        if !self.resources.contains_key(doc) {
            return (Response::new(404), None);
        }
        let Some(counter) = self.containers.get_mut(doc) else {
            return (
                Response::with_body(405, "text/plain", "can only POST to a container"),
                None,
            );
        };
        *counter += 1;
        let member = format!("{doc}r{counter}");
        let payload = match parse_turtle(body, Some(&member)) {
            Ok(g) => g,
            Err(e) => {
                return (
                    Response::with_body(400, "text/plain", format!("payload: {e}")),
                    None,
                )
            }
        };
        // The created document's state, if any, is recorded as a change from
        // nothing so audits see where each lifecycle began.
        let change = payload
            .iter()
            .find(|t| t.predicate == Term::iri(wild::HAS_STATE))
            .map(|t| StateChange { subject: t.subject.clone(), old: None, new: t.object.clone() });
        self.resources.insert(member.clone(), payload);
        let containment =
            Triple::new(Term::iri(doc), Term::iri(ldp::CONTAINS), Term::iri(&member)).unwrap();
        self.resources.get_mut(doc).unwrap().insert(containment);
        (Response::new(201).header("Location", member), change)
    }

    fn delete(&mut self, doc: &str) -> Response {
        if self.resources.remove(doc).is_none() {
            return Response::new(404);
        }
        self.containers.remove(doc);
        if let Some(slash) = doc.rfind('/') {
            let parent = doc[..slash + 1].to_string();
            if let Some(parent_graph) = self.resources.get_mut(&parent) {
                let gone = Term::iri(doc);
                parent_graph.retain(|t| {
                    !(t.predicate == Term::iri(ldp::CONTAINS) && t.object == gone)
                });
            }
        }
        Response::new(204)
    }
}

/// Scans a request log for lifecycle transitions that are not single forward
/// steps; returns one line per violation. Creations (no old state) are starts,
/// not transitions.
pub fn audit_state_changes(log: &[LogEntry]) -> Vec<String> {
    let mut violations = Vec::new();
    for entry in log {
        let Some(change) = &entry.change else { continue };
        let Some(old) = &change.old else { continue };
        if old == &change.new || !state_edge_ok(old, &change.new) {
            violations.push(format!(
                "{} {} moved {} from {} to {}",
                entry.method, entry.target, change.subject, old, change.new
            ));
        }
    }
    violations
}

/// Routes requests to in-process servers by base-IRI prefix; serializes
/// through the same request text a socket would carry.
#[derive(Clone, Default)]
pub struct InProcAccessor {
    servers: Vec<(String, Arc<Mutex<ServerState>>)>,
}

impl InProcAccessor {
    pub fn new() -> Self {
        InProcAccessor::default()
    }

    pub fn mount(&mut self, server: Arc<Mutex<ServerState>>) {
        let base = server.lock().unwrap().base.clone();
        self.servers.push((base, server));
    }
}

impl ResourceAccessor for InProcAccessor {
    fn request(&mut self, req: &HttpRequest) -> Result<Response, TransportError> {
        let server = self
            .servers
            .iter()
            .filter(|(base, _)| {
                req.target.starts_with(base)
                    && matches!(
                        req.target.as_bytes().get(base.len()),
                        None | Some(b'/') | Some(b'#')
                    )
            })
            .max_by_key(|(base, _)| base.len());
        match server {
            Some((_, state)) => {
                let mut state = state.lock().unwrap();
                Ok(state.handle(req.method, &req.target, &req.body))
            }
            None => Err(TransportError::Unreachable {
                target: req.target.clone(),
                msg: "no server mounted for this IRI".to_string(),
            }),
        }
    }
}

/// A listening HTTP server around a [`ServerState`]; one thread per
/// connection, `Connection: close`.
pub struct LdpServer {
    state: Arc<Mutex<ServerState>>,
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
}

impl LdpServer {
    /// Binds 127.0.0.1 on the given port (0 picks a free one) and serves a
    /// fresh state whose base matches the bound address.
    pub fn spawn(port: u16) -> std::io::Result<LdpServer> {
        let listener = TcpListener::bind(("127.0.0.1", port))?;
        let addr = listener.local_addr()?;
        let state = Arc::new(Mutex::new(ServerState::new(format!(
            "http://127.0.0.1:{}",
            addr.port()
        ))));
        Self::spawn_with(listener, state)
    }

    fn spawn_with(
        listener: TcpListener,
        state: Arc<Mutex<ServerState>>,
    ) -> std::io::Result<LdpServer> {
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let accept_state = Arc::clone(&state);
        let accept_stop = Arc::clone(&stop);
        let accept_thread = std::thread::spawn(move || {
            for conn in listener.incoming() {
                if accept_stop.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = conn else { continue };
                let state = Arc::clone(&accept_state);
                std::thread::spawn(move || serve_connection(stream, state));
            }
        });
        Ok(LdpServer { state, addr, stop, accept_thread: Some(accept_thread) })
    }

    pub fn base(&self) -> String {
        self.state.lock().unwrap().base.clone()
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn state(&self) -> Arc<Mutex<ServerState>> {
        Arc::clone(&self.state)
    }
}

impl Drop for LdpServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Unblock accept with a throwaway connection.
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.accept_thread.take() {
            let _ = t.join();
        }
    }
}

fn serve_connection(stream: TcpStream, state: Arc<Mutex<ServerState>>) {
    let peer = stream.peer_addr().ok();
    let mut reader = BufReader::new(stream);
    let raw = match read_message(&mut reader, MsgKind::Request) {
        Ok(raw) => raw,
        Err(_) => return,
    };
    let mut parts = raw.start_line.split_whitespace();
    let method = parts.next().unwrap_or("");
    let path = parts.next().unwrap_or("/");
    let response = match Method::from_token(method) {
        Some(method) => {
            let mut state = state.lock().unwrap();
            let target = format!("{}{}", state.base, path);
            let body = String::from_utf8_lossy(&raw.body).into_owned();
            state.handle(method, &target, &body)
        }
        None => Response::with_body(405, "text/plain", format!("method {method} not supported")),
    };
    let mut stream = reader.into_inner();
    if stream.write_all(format_response(&response).as_bytes()).is_err() {
        log::debug!("client {peer:?} went away before the response");
    }
}
