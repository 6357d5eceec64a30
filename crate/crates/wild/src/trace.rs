//! Cycle-stamped workflow traces. The servers log every lifecycle
//! transition they accept; a collector drains that log after each engine
//! cycle and resolves which activity each touched instance belongs to.
//! The resulting event list prints one line per transition and projects
//! down to the completion word the net oracle checks.

use std::sync::{Arc, Mutex};

use crate::ldp::ServerState;
use crate::rdf::Term;
use crate::semantics::{ActivityKind, WorkflowModel};
use crate::vocab::wild;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub cycle: u64,
    /// The instance resource whose state moved.
    pub subject: Term,
    /// The activity it instantiates; None for the workflow instance.
    pub activity: Option<Term>,
    /// None when the write created the instance.
    pub old: Option<Term>,
    pub new: Term,
}

fn state_name(t: &Term) -> String {
    match t.as_iri() {
        Some(wild::UNINITIALISED) => "uninitialised".into(),
        Some(wild::INITIALISED) => "initialised".into(),
        Some(wild::ACTIVE) => "active".into(),
        Some(wild::DONE) => "done".into(),
        Some(other) => other.to_string(),
        None => t.to_string(),
    }
}

fn state_term(token: &str) -> Term {
    match token {
        "uninitialised" => Term::iri(wild::UNINITIALISED),
        "initialised" => Term::iri(wild::INITIALISED),
        "active" => Term::iri(wild::ACTIVE),
        "done" => Term::iri(wild::DONE),
        other => Term::iri(other),
    }
}

fn iri_text(t: &Term) -> String {
    t.as_iri().map(str::to_string).unwrap_or_else(|| t.to_string())
}

impl TraceEvent {
    /// `cycle <n> <instance> <activity> <old> <new>`, `-` for absent.
    pub fn line(&self) -> String {
        format!(
            "cycle {} {} {} {} {}",
            self.cycle,
            iri_text(&self.subject),
            self.activity.as_ref().map(iri_text).unwrap_or_else(|| "-".into()),
            self.old.as_ref().map(state_name).unwrap_or_else(|| "-".into()),
            state_name(&self.new),
        )
    }

    /// Parses a [`Self::line`] rendering back into an event. Anything that
    /// does not follow the six-token shape yields None.
    pub fn parse_line(line: &str) -> Option<TraceEvent> {
        let mut tokens = line.split_whitespace();
        if tokens.next()? != "cycle" {
            return None;
        }
        let cycle = tokens.next()?.parse().ok()?;
        let subject = Term::iri(tokens.next()?);
        let activity = match tokens.next()? {
            "-" => None,
            iri => Some(Term::iri(iri)),
        };
        let old = match tokens.next()? {
            "-" => None,
            token => Some(state_term(token)),
        };
        let new = state_term(tokens.next()?);
        if tokens.next().is_some() {
            return None;
        }
        Some(TraceEvent { cycle, subject, activity, old, new })
    }
}

/// Drains one server's request log cycle by cycle.
pub struct TraceCollector {
    server: Arc<Mutex<ServerState>>,
    mark: usize,
    events: Vec<TraceEvent>,
}

impl TraceCollector {
    /// Starts collecting at the log's current end, so world setup traffic
    /// never shows up in the trace.
    pub fn new(server: Arc<Mutex<ServerState>>) -> Self {
        let mark = server.lock().unwrap().log.len();
        TraceCollector {
            server,
            mark,
            events: Vec::new(),
        }
    }

    /// Stamps every transition logged since the last call with `cycle`.
    /// Returns how many events were added.
    pub fn collect(&mut self, cycle: u64) -> usize {
        let server = self.server.lock().unwrap();
        let fresh = &server.log[self.mark..];
        let mut added = 0;
        for entry in fresh {
            let Some(change) = &entry.change else { continue };
            if entry.status >= 300 {
                continue;
            }
            let inst_of = Term::iri(wild::ACTIVITY_INSTANCE_OF);
            let activity = server
                .resources()
                .find_map(|(_, g)| g.object(&change.subject, &inst_of).cloned());
            self.events.push(TraceEvent {
                cycle,
                subject: change.subject.clone(),
                activity,
                old: change.old.clone(),
                new: change.new.clone(),
            });
            added += 1;
        }
        self.mark = server.log.len();
        added
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<TraceEvent> {
        self.events
    }
}

/// The run's observable word: atomic activities in completion order.
pub fn completion_word(events: &[TraceEvent], model: &WorkflowModel) -> Vec<Term> {
    let done = Term::iri(wild::DONE);
    events
        .iter()
        .filter(|e| e.new == done)
        .filter_map(|e| e.activity.as_ref())
        .filter(|a| {
            model
                .activity(a)
                .is_some_and(|n| n.kind == ActivityKind::Atomic)
        })
        .cloned()
        .collect()
}
