//! The polling engine. Each cycle starts from an empty working memory,
//! loads the program's assertions, reaches a fixpoint of resource fetching
//! and derivation, and only then dispatches the non-GET requests the final
//! memory justifies. Nothing survives between cycles except the optional
//! fired-request marker, so every cycle's behaviour is a function of what
//! the servers said when asked.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::http::{strip_fragment, HttpRequest, ResourceAccessor};
use crate::rdf::{parse_turtle, serialize_turtle_with_base};
use crate::rules::{fire_request_rules, saturate_with, Program, RequestClass, WmDerive};
use crate::semantics::AskMaterializer;

/// Order in which one cycle's non-GET requests are sent. The servers
/// guard state transitions, so the order must not change outcomes;
/// shuffling exists to let tests and audits demonstrate exactly that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DispatchOrder {
    #[default]
    Sorted,
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EngineOptions {
    pub dispatch: DispatchOrder,
    /// Remember dispatched requests across cycles and send each one once.
    pub fired_marker: bool,
    /// Keep the dispatched requests of each cycle in its report.
    pub record_requests: bool,
}

/// A non-GET request the engine sent, with the status it got back.
#[derive(Debug, Clone)]
pub struct DispatchedRequest {
    pub request: HttpRequest,
    pub status: u16,
}

/// What one cycle observed and did.
#[derive(Debug, Clone, Default)]
pub struct CycleReport {
    pub cycle: u64,
    /// GET requests issued (at most one per fragment-stripped target).
    pub gets: usize,
    /// GETs that failed, answered outside 2xx, or returned unusable bodies.
    pub get_failures: usize,
    /// Working memory size after the final fixpoint.
    pub wm_size: usize,
    /// Non-GET requests sent and answered.
    pub dispatched: usize,
    /// 409 answers among them: transitions another request already made.
    pub conflicts: usize,
    /// Non-GET requests that failed at the transport.
    pub dispatch_failures: usize,
    /// Requests suppressed by the fired marker.
    pub skipped_fired: usize,
    /// Filled when the engine records requests.
    pub requests: Vec<DispatchedRequest>,
    pub elapsed: Duration,
}

pub struct Engine {
    program: Program,
    builtins: Vec<Box<dyn WmDerive>>,
    options: EngineOptions,
    cycle: u64,
    fired: BTreeSet<String>,
}

impl Engine {
    /// An engine over `program` that evaluates stored ASK conditions.
    pub fn new(program: Program) -> Self {
        Engine::with_options(program, EngineOptions::default())
    }

    pub fn with_options(program: Program, options: EngineOptions) -> Self {
        Engine {
            program,
            builtins: vec![Box::new(AskMaterializer::new())],
            options,
            cycle: 0,
            fired: BTreeSet::new(),
        }
    }

    pub fn push_builtin(&mut self, builtin: Box<dyn WmDerive>) {
        self.builtins.push(builtin);
    }

    pub fn cycles_run(&self) -> u64 {
        self.cycle
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// Runs one polling cycle against `accessor`.
    pub fn run_cycle(&mut self, accessor: &mut dyn ResourceAccessor) -> CycleReport {
        let start = Instant::now();
        self.cycle += 1;
        let mut report = CycleReport {
            cycle: self.cycle,
            ..CycleReport::default()
        };
        let builtins: Vec<&dyn WmDerive> = self.builtins.iter().map(|b| b.as_ref()).collect();

        // Fetch fixpoint: saturate, collect GET targets not yet fetched
        // this cycle, merge what they return, repeat until nothing new is
        // requested. Fragments never reach the wire.
        let mut wm = self.program.assertions.clone();
        let mut fetched: BTreeSet<String> = BTreeSet::new();
        loop {
            saturate_with(&mut wm, &self.program.derivations, &builtins);
            let wave: Vec<String> = fire_request_rules(&self.program.requests, &wm, RequestClass::Get)
                .into_iter()
                .map(|inst| strip_fragment(&inst.target).to_string())
                .filter(|t| fetched.insert(t.clone()))
                .collect();
            if wave.is_empty() {
                break;
            }
            for target in wave {
                report.gets += 1;
                match accessor.request(&HttpRequest::get(&target)) {
                    Ok(resp) if resp.is_success() => {
                        match parse_turtle(&resp.body, Some(&target)) {
                            Ok(g) => {
                                wm.merge(&g);
                            }
                            Err(e) => {
                                report.get_failures += 1;
                                log::warn!("GET {target}: unusable body: {e}");
                            }
                        }
                    }
                    Ok(resp) => {
                        report.get_failures += 1;
                        log::debug!("GET {target} answered {}", resp.status);
                    }
                    Err(e) => {
                        report.get_failures += 1;
                        log::warn!("GET {target}: {e}");
                    }
                }
            }
        }
        report.wm_size = wm.len();

        let mut instances = fire_request_rules(&self.program.requests, &wm, RequestClass::NonGet);
        if let DispatchOrder::Shuffled(seed) = self.options.dispatch {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(self.cycle));
            instances.shuffle(&mut rng);
        }

        for inst in instances {
            let body = if inst.payload.is_empty() {
                String::new()
            } else {
                serialize_turtle_with_base(&inst.payload, self.program.base.as_deref())
            };
            let marker = format!(
                "{}|{}|{}|{body}",
                inst.provenance
                    .as_ref()
                    .map(|p| p.to_string())
                    .unwrap_or_default(),
                inst.method,
                inst.target,
            );
            if self.options.fired_marker && self.fired.contains(&marker) {
                report.skipped_fired += 1;
                continue;
            }
            let request = HttpRequest::new(inst.method, &inst.target, body);
            match accessor.request(&request) {
                Ok(resp) => {
                    report.dispatched += 1;
                    if resp.status == 409 {
                        // Another request from this same cycle already
                        // moved the resource; the next cycle re-derives.
                        report.conflicts += 1;
                        log::info!("{} {} answered 409", request.method, request.target);
                    }
                    if self.options.fired_marker {
                        self.fired.insert(marker);
                    }
                    if self.options.record_requests {
                        report.requests.push(DispatchedRequest {
                            request,
                            status: resp.status,
                        });
                    }
                }
                Err(e) => {
                    report.dispatch_failures += 1;
                    log::warn!("{} {}: {e}", request.method, request.target);
                }
            }
        }
        report.elapsed = start.elapsed();
        report
    }

    /// Runs cycles until `stop` returns true, pausing so consecutive cycle
    /// starts are `interval` apart when cycles finish early.
    pub fn run_loop(
        &mut self,
        accessor: &mut dyn ResourceAccessor,
        interval: Duration,
        mut stop: impl FnMut(&CycleReport) -> bool,
    ) -> Vec<CycleReport> {
        let mut reports = Vec::new();
        loop {
            let started = Instant::now();
            let report = self.run_cycle(accessor);
            let finished = stop(&report);
            reports.push(report);
            if finished {
                return reports;
            }
            if let Some(rest) = interval.checked_sub(started.elapsed()) {
                std::thread::sleep(rest);
            }
        }
    }
}
