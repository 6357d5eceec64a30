//! World construction shared by the integration suites: a single
//! in-process server hosting devices, a model document, and the workflow
//! instance container, plus engines and trace plumbing around it.

use std::sync::{Arc, Mutex};

use wild::ldp::{audit_state_changes, InProcAccessor, ServerState};
use wild::modelgen::GeneratedWorkflow;
use wild::rdf::{parse_turtle, Graph, Term, Triple, RDF_TYPE};
use wild::runtime::{CycleReport, Engine, EngineOptions};
use wild::semantics::{rule_program, Mode, WorkflowModel};
use wild::trace::{TraceCollector, TraceEvent};
use wild::vocab::{ssn, wild as wv};

pub const BASE: &str = "http://a.test";
pub const MODEL_DOC: &str = "http://a.test/models";
pub const INSTANCE: &str = "http://a.test/instances/i1";
pub const CONTAINER: &str = "http://a.test/instances/";

/// ASK text as it must appear inside a double-quoted Turtle literal.
pub fn ask(device: &str, value: &str) -> String {
    format!(
        "ASK {{ <{BASE}/dev/{device}> <{}> \\\"{value}\\\" }}",
        ssn::HAS_VALUE
    )
}

/// An atomic activity that turns its device "on" and completes once a
/// fresh GET shows the new value.
pub fn atomic(frag: &str, device: &str) -> String {
    format!(
        "<#{frag}> a wild:AtomicActivity ;\n  \
           wild:hasPostcondition [ sp:text \"{post}\" ] ;\n  \
           wild:hasHttpRequest [ http:mthd httpm:PUT ;\n    \
             http:requestURI <{BASE}/dev/{device}> ;\n    \
             http:body \"<> <{val}> \\\"on\\\" .\" ] .\n",
        post = ask(device, "on"),
        val = ssn::HAS_VALUE,
    )
}

/// Guards a conditional branch on its device reading "go".
pub fn guard(frag: &str, device: &str) -> String {
    format!(
        "<#{frag}> wild:hasPrecondition [ sp:text \"{}\" ] .\n",
        ask(device, "go")
    )
}

pub fn model_text(root: &str, activities: &str) -> String {
    format!(
        "@prefix wild: <http://purl.org/wild/vocab#> .\n\
         @prefix sp: <http://spinrdf.org/sp#> .\n\
         @prefix http: <http://www.w3.org/2011/http#> .\n\
         @prefix httpm: <http://www.w3.org/2011/http-methods#> .\n\n\
         <#wf> a wild:Workflow ; wild:hasBehaviour <#{root}> .\n\n{activities}"
    )
}

pub struct World {
    pub server: Arc<Mutex<ServerState>>,
    pub acc: InProcAccessor,
    pub model: Option<WorkflowModel>,
}

/// One server with containers `/`, `/dev/`, `/instances/`, the given
/// devices, the model document, and an uninitialised workflow instance.
pub fn world(model: &str, devices: &[(&str, &str)]) -> World {
    let mut s = ServerState::new(BASE);
    s.create_container("/");
    s.create_container("/dev/");
    s.create_container("/instances/");
    for (name, value) in devices {
        let uri = format!("{BASE}/dev/{name}");
        let mut g = Graph::new();
        g.insert(
            Triple::new(Term::iri(&uri), Term::iri(ssn::HAS_VALUE), Term::lit(value)).unwrap(),
        );
        s.put_resource(&uri, g);
    }
    let graph = parse_turtle(model, Some(MODEL_DOC)).expect("model text parses");
    let wf = Term::iri(&format!("{MODEL_DOC}#wf"));
    let parsed = WorkflowModel::from_graph(&graph, &wf).ok();
    s.put_resource(MODEL_DOC, graph);
    let i1 = Term::iri(INSTANCE);
    let mut g = Graph::new();
    g.insert(Triple::new(i1.clone(), Term::iri(RDF_TYPE), Term::iri(wv::WORKFLOW_INSTANCE)).unwrap());
    g.insert(Triple::new(i1.clone(), Term::iri(wv::WORKFLOW_INSTANCE_OF), wf).unwrap());
    g.insert(Triple::new(i1, Term::iri(wv::HAS_STATE), Term::iri(wv::UNINITIALISED)).unwrap());
    s.put_resource(INSTANCE, g);
    let server = Arc::new(Mutex::new(s));
    let mut acc = InProcAccessor::new();
    acc.mount(server.clone());
    World {
        server,
        acc,
        model: parsed,
    }
}

/// World for a generated workflow, devices preset from the generator.
pub fn generated_world(gen: &GeneratedWorkflow) -> World {
    let presets: Vec<(&str, &str)> = gen
        .presets
        .iter()
        .map(|(n, v)| (n.as_str(), v.as_str()))
        .collect();
    world(&gen.text, &presets)
}

pub fn engine_for(world: &World, mode: Mode) -> Engine {
    engine_with(world, mode, EngineOptions::default())
}

pub fn engine_with(world: &World, mode: Mode, options: EngineOptions) -> Engine {
    let models: Vec<&WorkflowModel> = world.model.iter().collect();
    let program = rule_program(mode, &[format!("{BASE}/")], CONTAINER, &models);
    Engine::with_options(program, options)
}

pub fn instance_state(world: &World) -> Option<Term> {
    let s = world.server.lock().unwrap();
    let subject = Term::iri(INSTANCE);
    let has_state = Term::iri(wv::HAS_STATE);
    s.resource(INSTANCE)
        .and_then(|g| g.object(&subject, &has_state).cloned())
}

pub fn workflow_done(world: &World) -> bool {
    instance_state(world) == Some(Term::iri(wv::DONE))
}

/// Runs until the workflow instance is done, collecting the trace.
/// Panics past `max` cycles.
pub fn run_to_done(world: &mut World, mode: Mode, max: u64) -> (Vec<CycleReport>, Vec<TraceEvent>) {
    let mut engine = engine_for(world, mode);
    let mut collector = TraceCollector::new(world.server.clone());
    let mut reports = Vec::new();
    for _ in 0..max {
        let report = engine.run_cycle(&mut world.acc);
        collector.collect(report.cycle);
        reports.push(report);
        if workflow_done(world) {
            return (reports, collector.into_events());
        }
    }
    panic!("workflow not done after {max} cycles");
}

/// Runs exactly `n` cycles, done or not.
pub fn run_cycles(world: &mut World, mode: Mode, n: u64) -> Vec<CycleReport> {
    let mut engine = engine_for(world, mode);
    (0..n).map(|_| engine.run_cycle(&mut world.acc)).collect()
}

/// States of every instance of `activity`, in subject order.
pub fn instance_states(world: &World, activity: &Term) -> Vec<Term> {
    let s = world.server.lock().unwrap();
    let instance_of = Term::iri(wv::ACTIVITY_INSTANCE_OF);
    let has_state = Term::iri(wv::HAS_STATE);
    let mut out = Vec::new();
    for (_, g) in s.resources() {
        for t in g.iter() {
            if t.predicate == instance_of && &t.object == activity {
                if let Some(state) = g.object(&t.subject, &has_state) {
                    out.push(state.clone());
                }
            }
        }
    }
    out
}

/// Asserts the server log holds no lifecycle transition outside the
/// forward chain.
pub fn assert_clean_log(server: &Arc<Mutex<ServerState>>) {
    let s = server.lock().unwrap();
    let violations = audit_state_changes(&s.log);
    assert!(violations.is_empty(), "illegal transitions: {violations:?}");
}
