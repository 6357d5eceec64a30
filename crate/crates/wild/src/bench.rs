//! Smart-building load harness. Generates synthetic buildings as Linked
//! Data (rooms, lights, switches, one LDP server per building), installs
//! one of five fixed workload models per building, injects a workflow
//! instance per building, and runs the engine until every instance is
//! done. Request accounting comes from the server logs, so the numbers
//! cover everything the engine sent, GETs included.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::http::Method;
use crate::ldp::{InProcAccessor, ServerState};
use crate::rdf::{parse_turtle, Graph, Term, Triple, RDF_TYPE};
use crate::rules::Program;
use crate::runtime::{DispatchOrder, Engine, EngineOptions};
use crate::semantics::{rule_program, Mode, ModelError, WorkflowModel};
use crate::vocab::{brick, ssn, wild};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("a benchmark world needs at least one building")]
    NoBuildings,
    #[error("{workload} needs {lights} lights and {switches} switches per building, the spec provides {have_lights} and {have_switches}")]
    SpecTooSmall {
        workload: &'static str,
        lights: usize,
        switches: usize,
        have_lights: usize,
        have_switches: usize,
    },
    #[error("no workload installed")]
    NoWorkload,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("run hit the {cycles} cycle cap with {completed} of {expected} instances done")]
    Timeout {
        cycles: u64,
        completed: usize,
        expected: usize,
    },
}

/// Shape of the synthetic world: identical buildings, each served by its
/// own LDP server. `base_pattern` must contain `{k}`, replaced by the
/// building number to form that building's server base.
#[derive(Debug, Clone)]
pub struct BuildingSpec {
    pub buildings: usize,
    pub rooms: usize,
    pub lights_per_room: usize,
    pub switches_per_room: usize,
    pub base_pattern: String,
    /// Base of the server hosting the workflow instance container.
    pub hub_base: String,
}

impl Default for BuildingSpec {
    fn default() -> Self {
        BuildingSpec {
            buildings: 1,
            rooms: 2,
            lights_per_room: 5,
            switches_per_room: 1,
            base_pattern: "http://b{k}.bench".into(),
            hub_base: "http://hub.bench".into(),
        }
    }
}

impl BuildingSpec {
    pub fn with_buildings(buildings: usize) -> Self {
        BuildingSpec {
            buildings,
            ..BuildingSpec::default()
        }
    }

    pub fn building_base(&self, k: usize) -> String {
        self.base_pattern.replace("{k}", &k.to_string())
    }

    pub fn lights(&self) -> usize {
        self.rooms * self.lights_per_room
    }

    pub fn switches(&self) -> usize {
        self.rooms * self.switches_per_room
    }

    pub fn instance_container(&self) -> String {
        format!("{}/instances/", self.hub_base)
    }
}

/// The five workload models, smallest to largest. Atomic activities per
/// model: 2, 2, 4, 6, 9. Together they cover sequence, parallel split,
/// choice, and nesting three levels deep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Workload {
    W1,
    W2,
    W3,
    W4,
    W5,
}

/// Activity tree of a workload. Lights are numbered across the whole
/// building; a conditional branch is guarded by the numbered switch.
enum Node {
    Light(usize),
    Seq(Vec<Node>),
    Par(Vec<Node>),
    Cond(Vec<(usize, Node)>),
}

impl Workload {
    pub const ALL: [Workload; 5] = [
        Workload::W1,
        Workload::W2,
        Workload::W3,
        Workload::W4,
        Workload::W5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Workload::W1 => "W1",
            Workload::W2 => "W2",
            Workload::W3 => "W3",
            Workload::W4 => "W4",
            Workload::W5 => "W5",
        }
    }

    /// Atomic activities in the tree, untaken conditional branches
    /// included.
    pub fn atomics(self) -> usize {
        match self {
            Workload::W1 | Workload::W2 => 2,
            Workload::W3 => 4,
            Workload::W4 => 6,
            Workload::W5 => 9,
        }
    }

    fn switches_needed(self) -> usize {
        match self {
            Workload::W1 | Workload::W2 => 0,
            _ => 2,
        }
    }

    fn shape(self) -> Node {
        use Node::*;
        match self {
            Workload::W1 => Par(vec![Light(0), Light(1)]),
            Workload::W2 => Seq(vec![Light(0), Light(1)]),
            Workload::W3 => Seq(vec![
                Light(0),
                Cond(vec![(0, Light(1)), (1, Light(2))]),
                Light(3),
            ]),
            Workload::W4 => Seq(vec![
                Light(0),
                Par(vec![Light(1), Light(2)]),
                Cond(vec![(0, Light(3)), (1, Light(4))]),
                Light(5),
            ]),
            Workload::W5 => Seq(vec![
                Light(0),
                Par(vec![Seq(vec![Light(1), Light(2)]), Light(3)]),
                Cond(vec![(0, Light(4)), (1, Light(5))]),
                Seq(vec![Light(6), Light(7)]),
                Light(8),
            ]),
        }
    }
}

impl std::str::FromStr for Workload {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "w1" | "1" => Ok(Workload::W1),
            "w2" | "2" => Ok(Workload::W2),
            "w3" | "3" => Ok(Workload::W3),
            "w4" | "4" => Ok(Workload::W4),
            "w5" | "5" => Ok(Workload::W5),
            other => Err(format!("unknown workload {other:?}, expected w1..w5")),
        }
    }
}

fn light_uri(base: &str, j: usize) -> String {
    format!("{base}/dev/light{j}")
}

fn switch_uri(base: &str, j: usize) -> String {
    format!("{base}/dev/switch{j}")
}

/// ASK text as it must appear inside a double-quoted Turtle literal.
fn ask(device: &str, value: &str) -> String {
    format!("ASK {{ <{device}> <{}> \\\"{value}\\\" }}", ssn::HAS_VALUE)
}

struct Emit {
    body: String,
    next: usize,
}

impl Emit {
    fn node(&mut self, node: &Node, base: &str) -> String {
        let name = format!("n{}", self.next);
        self.next += 1;
        match node {
            Node::Light(j) => {
                let dev = light_uri(base, *j);
                let _ = writeln!(
                    self.body,
                    "<#{name}> a wild:AtomicActivity ;\n  \
                       wild:hasPostcondition [ sp:text \"{post}\" ] ;\n  \
                       wild:hasHttpRequest [ http:mthd httpm:PUT ;\n    \
                         http:requestURI <{dev}> ;\n    \
                         http:body \"<> <{val}> \\\"on\\\" .\" ] .\n",
                    post = ask(&dev, "on"),
                    val = ssn::HAS_VALUE,
                );
            }
            Node::Seq(children) | Node::Par(children) => {
                let kind = if matches!(node, Node::Seq(_)) {
                    "Sequential"
                } else {
                    "Parallel"
                };
                let list = children
                    .iter()
                    .map(|c| format!("<#{}>", self.node(c, base)))
                    .collect::<Vec<_>>()
                    .join(" ");
                let _ = writeln!(
                    self.body,
                    "<#{name}> a wild:{kind}Activity ; wild:hasChildActivities ( {list} ) .\n"
                );
            }
            Node::Cond(branches) => {
                let mut list = Vec::new();
                for (guard, child) in branches {
                    let child_name = self.node(child, base);
                    let _ = writeln!(
                        self.body,
                        "<#{child_name}> wild:hasPrecondition [ sp:text \"{}\" ] .",
                        ask(&switch_uri(base, *guard), "on")
                    );
                    list.push(format!("<#{child_name}>"));
                }
                let _ = writeln!(
                    self.body,
                    "<#{name}> a wild:ConditionalActivity ; wild:hasChildActivities ( {} ) .\n",
                    list.join(" ")
                );
            }
        }
        name
    }
}

/// Turtle text of `workload` acting on the building at `base`. The
/// workflow subject is `#wf` relative to the model document.
pub fn workload_text(workload: Workload, base: &str) -> String {
    let mut e = Emit {
        body: String::new(),
        next: 0,
    };
    let root = e.node(&workload.shape(), base);
    let mut text = String::from(
        "@prefix wild: <http://purl.org/wild/vocab#> .\n\
         @prefix sp: <http://spinrdf.org/sp#> .\n\
         @prefix http: <http://www.w3.org/2011/http#> .\n\
         @prefix httpm: <http://www.w3.org/2011/http-methods#> .\n\n",
    );
    let _ = writeln!(text, "<#wf> a wild:Workflow ; wild:hasBehaviour <#{root}> .\n");
    text.push_str(&e.body);
    text
}

/// The five models as they would read against the default single
/// building.
pub fn workloads() -> Vec<WorkflowModel> {
    let spec = BuildingSpec::default();
    let base = spec.building_base(0);
    Workload::ALL
        .iter()
        .map(|w| parse_workload(*w, &base).expect("built-in workloads validate"))
        .collect()
}

fn parse_workload(workload: Workload, base: &str) -> Result<WorkflowModel, ModelError> {
    let doc = format!("{base}/model");
    let text = workload_text(workload, base);
    let graph = parse_turtle(&text, Some(&doc)).expect("built-in workload text parses");
    WorkflowModel::from_graph(&graph, &Term::iri(&format!("{doc}#wf")))
}

/// A generated world: one server per building plus the hub holding the
/// instance container. Use `install_workload` before running.
pub struct BenchWorld {
    pub spec: BuildingSpec,
    pub buildings: Vec<Arc<Mutex<ServerState>>>,
    pub hub: Arc<Mutex<ServerState>>,
    pub workload: Option<Workload>,
    pub models: Vec<WorkflowModel>,
}

/// Mints the buildings: per building a root container, a device
/// container, typed rooms, and typed, located, writeable devices. Lights
/// start "off"; switch 0 reads "on" so a conditional's first branch is
/// the one taken, all other switches read "off".
pub fn generate(spec: &BuildingSpec) -> Result<BenchWorld, BenchError> {
    if spec.buildings == 0 {
        return Err(BenchError::NoBuildings);
    }
    let mut buildings = Vec::new();
    for k in 0..spec.buildings {
        let base = spec.building_base(k);
        let mut s = ServerState::new(&base);
        s.create_container("/");
        s.create_container("/dev/");
        for r in 0..spec.rooms {
            let room = format!("{base}/room{r}");
            let mut g = Graph::new();
            g.insert(room_triple(&room, RDF_TYPE, brick::ROOM));
            s.put_resource(&room, g);
        }
        for j in 0..spec.lights() {
            let room = format!("{base}/room{}", j / spec.lights_per_room);
            s.put_resource(
                &light_uri(&base, j),
                device_graph(&light_uri(&base, j), brick::LUMINAIRE, &room, "off"),
            );
        }
        for j in 0..spec.switches() {
            let room = format!("{base}/room{}", j / spec.switches_per_room);
            let value = if j == 0 { "on" } else { "off" };
            s.put_resource(
                &switch_uri(&base, j),
                device_graph(&switch_uri(&base, j), brick::SWITCH, &room, value),
            );
        }
        buildings.push(Arc::new(Mutex::new(s)));
    }
    let mut hub = ServerState::new(&spec.hub_base);
    hub.create_container("/");
    hub.create_container("/instances/");
    Ok(BenchWorld {
        spec: spec.clone(),
        buildings,
        hub: Arc::new(Mutex::new(hub)),
        workload: None,
        models: Vec::new(),
    })
}

fn room_triple(subject: &str, predicate: &str, object: &str) -> Triple {
    Triple::new(Term::iri(subject), Term::iri(predicate), Term::iri(object)).unwrap()
}

fn device_graph(uri: &str, class: &str, room: &str, value: &str) -> Graph {
    let mut g = Graph::new();
    g.insert(room_triple(uri, RDF_TYPE, class));
    g.insert(room_triple(uri, brick::HAS_LOCATION, room));
    g.insert(
        Triple::new(Term::iri(uri), Term::iri(ssn::HAS_VALUE), Term::lit(value)).unwrap(),
    );
    g
}

/// Hosts `workload`'s model on every building server and parses it back
/// into validated models.
pub fn install_workload(world: &mut BenchWorld, workload: Workload) -> Result<(), BenchError> {
    let need_lights = workload.atomics();
    let need_switches = workload.switches_needed();
    if world.spec.lights() < need_lights || world.spec.switches() < need_switches {
        return Err(BenchError::SpecTooSmall {
            workload: workload.name(),
            lights: need_lights,
            switches: need_switches,
            have_lights: world.spec.lights(),
            have_switches: world.spec.switches(),
        });
    }
    world.models.clear();
    for (k, server) in world.buildings.iter().enumerate() {
        let base = world.spec.building_base(k);
        let doc = format!("{base}/model");
        let text = workload_text(workload, &base);
        let graph = parse_turtle(&text, Some(&doc)).expect("workload text parses");
        let model = WorkflowModel::from_graph(&graph, &Term::iri(&format!("{doc}#wf")))?;
        server.lock().unwrap().put_resource(&doc, graph);
        world.models.push(model);
    }
    world.workload = Some(workload);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Pause between workflow instance injections.
    pub interval: Duration,
    /// Engine runs this long before the first injection.
    pub warmup: Duration,
    /// Minimum spacing between cycle starts; zero polls flat out.
    pub cycle_interval: Duration,
    pub max_cycles: u64,
    pub dispatch: DispatchOrder,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            interval: Duration::from_millis(200),
            warmup: Duration::ZERO,
            cycle_interval: Duration::ZERO,
            max_cycles: 10_000,
            dispatch: DispatchOrder::Sorted,
        }
    }
}

impl BenchConfig {
    /// No pacing at all: everything injected up front, cycles flat out.
    /// What the scaling measurements use.
    pub fn immediate() -> Self {
        BenchConfig {
            interval: Duration::ZERO,
            ..BenchConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub workload: Workload,
    pub buildings: usize,
    pub cycles: u64,
    /// GET requests across all servers.
    pub gets: u64,
    /// Non-GET requests across all servers.
    pub writes: u64,
    /// Requests that went to the hub rather than to a building.
    pub shared_requests: u64,
    /// Requests each building's server answered.
    pub building_requests: Vec<u64>,
    pub completed: usize,
    pub wall: Duration,
}

impl BenchReport {
    pub fn total_requests(&self) -> u64 {
        self.gets + self.writes
    }
}

fn engine_program(world: &BenchWorld) -> Result<Program, BenchError> {
    if world.models.is_empty() {
        return Err(BenchError::NoWorkload);
    }
    let mut seeds: Vec<String> = (0..world.spec.buildings)
        .map(|k| format!("{}/", world.spec.building_base(k)))
        .collect();
    seeds.push(world.spec.instance_container());
    let models: Vec<&WorkflowModel> = world.models.iter().collect();
    Ok(rule_program(
        Mode::Execute,
        &seeds,
        &world.spec.instance_container(),
        &models,
    ))
}

fn inject_instance(world: &BenchWorld, k: usize) {
    let doc = format!("{}i{k}", world.spec.instance_container());
    let wf = format!("{}/model#wf", world.spec.building_base(k));
    let subject = Term::iri(&doc);
    let mut g = Graph::new();
    g.insert(
        Triple::new(subject.clone(), Term::iri(RDF_TYPE), Term::iri(wild::WORKFLOW_INSTANCE))
            .unwrap(),
    );
    g.insert(
        Triple::new(subject.clone(), Term::iri(wild::WORKFLOW_INSTANCE_OF), Term::iri(&wf))
            .unwrap(),
    );
    g.insert(
        Triple::new(subject, Term::iri(wild::HAS_STATE), Term::iri(wild::UNINITIALISED)).unwrap(),
    );
    world.hub.lock().unwrap().put_resource(&doc, g);
}

fn done_instances(world: &BenchWorld, injected: usize) -> usize {
    let hub = world.hub.lock().unwrap();
    let has_state = Term::iri(wild::HAS_STATE);
    let done = Term::iri(wild::DONE);
    (0..injected)
        .filter(|k| {
            let doc = format!("{}i{k}", world.spec.instance_container());
            let subject = Term::iri(&doc);
            hub.resource(&doc)
                .and_then(|g| g.object(&subject, &has_state))
                == Some(&done)
        })
        .count()
}

/// How many injections are due `elapsed` into the run.
fn due(elapsed: Duration, cfg: &BenchConfig, total: usize) -> usize {
    if elapsed < cfg.warmup {
        return 0;
    }
    if cfg.interval.is_zero() {
        return total;
    }
    let past = (elapsed - cfg.warmup).as_secs_f64() / cfg.interval.as_secs_f64();
    (past as usize + 1).min(total)
}

/// Runs one engine over the whole world until every injected instance is
/// done. Worlds are single-use: instances stay behind after the run.
pub fn run_bench(world: &BenchWorld, cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let program = engine_program(world)?;
    let n = world.spec.buildings;
    let mut engine = Engine::with_options(
        program,
        EngineOptions {
            dispatch: cfg.dispatch,
            ..EngineOptions::default()
        },
    );
    let mut acc = InProcAccessor::new();
    for server in &world.buildings {
        acc.mount(server.clone());
    }
    acc.mount(world.hub.clone());
    let start = Instant::now();
    let mut injected = 0;
    let mut cycles = 0u64;
    loop {
        let target = due(start.elapsed(), cfg, n);
        while injected < target {
            inject_instance(world, injected);
            injected += 1;
        }
        let cycle_started = Instant::now();
        engine.run_cycle(&mut acc);
        cycles += 1;
        if injected == n && done_instances(world, injected) == n {
            break;
        }
        if cycles >= cfg.max_cycles {
            return Err(BenchError::Timeout {
                cycles,
                completed: done_instances(world, injected),
                expected: n,
            });
        }
        if let Some(left) = cfg.cycle_interval.checked_sub(cycle_started.elapsed()) {
            if !left.is_zero() {
                std::thread::sleep(left);
            }
        }
    }
    let wall = start.elapsed();
    let mut gets = 0;
    let mut writes = 0;
    let mut building_requests = Vec::new();
    for server in &world.buildings {
        let s = server.lock().unwrap();
        let mut count = 0;
        for e in &s.log {
            if e.method == Method::Get {
                gets += 1;
            } else {
                writes += 1;
            }
            count += 1;
        }
        building_requests.push(count);
    }
    let mut shared_requests = 0;
    {
        let hub = world.hub.lock().unwrap();
        for e in &hub.log {
            if e.method == Method::Get {
                gets += 1;
            } else {
                writes += 1;
            }
            shared_requests += 1;
        }
    }
    Ok(BenchReport {
        workload: world.workload.expect("engine_program checked models"),
        buildings: n,
        cycles,
        gets,
        writes,
        shared_requests,
        building_requests,
        completed: done_instances(world, injected),
        wall,
    })
}

/// Generate, install, run.
pub fn bench(
    spec: &BuildingSpec,
    workload: Workload,
    cfg: &BenchConfig,
) -> Result<BenchReport, BenchError> {
    let mut world = generate(spec)?;
    install_workload(&mut world, workload)?;
    run_bench(&world, cfg)
}

/// Every request any server in the world answered, in arrival order per
/// server: buildings first, then the hub.
pub fn request_log(world: &BenchWorld) -> Vec<(&'static str, String, u16)> {
    let mut out = Vec::new();
    for server in &world.buildings {
        let s = server.lock().unwrap();
        for e in &s.log {
            out.push((e.method.as_str(), e.target.clone(), e.status));
        }
    }
    let hub = world.hub.lock().unwrap();
    for e in &hub.log {
        out.push((e.method.as_str(), e.target.clone(), e.status));
    }
    out
}

/// Device values of one building keyed by path under the server base, so
/// worlds with different bases compare by position.
pub fn device_values(server: &Arc<Mutex<ServerState>>, base: &str) -> BTreeMap<String, String> {
    let s = server.lock().unwrap();
    let has_value = Term::iri(ssn::HAS_VALUE);
    let mut out = BTreeMap::new();
    for (uri, g) in s.resources() {
        let Some(path) = uri.strip_prefix(base) else { continue };
        let subject = Term::iri(uri);
        if let Some(value) = g.object(&subject, &has_value).and_then(Term::as_literal) {
            out.insert(path.to_string(), value.lexical().to_string());
        }
    }
    out
}

/// Least-squares fit of y = intercept + slope x.
#[derive(Debug, Clone, Copy)]
pub struct AffineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Coefficient of determination; 1.0 when the points sit on a line.
    pub r2: f64,
}

pub fn affine_fit(points: &[(f64, f64)]) -> AffineFit {
    assert!(points.len() >= 2, "a fit needs at least two points");
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 {
        if ss_res.abs() < 1e-12 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    AffineFit {
        intercept,
        slope,
        r2,
    }
}
