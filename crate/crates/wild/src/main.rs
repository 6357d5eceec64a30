//! Command line front end. `serve` hosts an LDP world over HTTP, `run`
//! publishes a workflow model and polls an instance of it to completion,
//! `verify` replays a recorded trace against the model's net, `validate`
//! checks a model file statically, and `bench` runs the smart-building
//! scaling benchmark. Exit codes: 0 success, 1 validation failure, 2
//! timeout, 3 transport failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use url::Url;

use wild::bench::{affine_fit, bench, BenchConfig, BenchError, BuildingSpec, Workload};
use wild::http::{HttpClient, HttpRequest, Method, ResourceAccessor};
use wild::ldp::{audit_state_changes, LdpServer, ServerState};
use wild::petri::{compile, conformance, Conformance};
use wild::rdf::{parse_turtle, Graph, Term, RDF_TYPE};
use wild::runtime::{DispatchOrder, Engine, EngineOptions};
use wild::semantics::{rule_program, validate_model, Mode, WorkflowModel};
use wild::trace::{completion_word, TraceEvent};
use wild::vocab::{ldp as ldpv, wild as wildv};

const EXIT_VALIDATION: i32 = 1;
const CLIENT_TIMEOUT: Duration = Duration::from_secs(5);

/// Failure classes, one per process exit code.
#[derive(Debug)]
enum CliError {
    Validation(String),
    Timeout(String),
    Transport(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Timeout(_) => 2,
            CliError::Transport(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Timeout(m) | CliError::Transport(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "wild", version, about = "Workflow engine over read-write linked data")]
struct Cli {
    /// -v logs engine activity, -vv adds debugging detail.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Host an LDP server until interrupted.
    Serve(ServeArgs),
    /// Publish a model, inject an instance, and poll it to completion.
    Run(RunArgs),
    /// Run the smart-building scaling benchmark.
    Bench(BenchArgs),
    /// Check a recorded trace against a workflow model.
    Verify(VerifyArgs),
    /// Statically check a workflow model file.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ServeArgs {
    /// Port to bind on 127.0.0.1.
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Path of the workflow instance container.
    #[arg(long, default_value = "/instances/")]
    container: String,
    /// Additional container created at this path (repeatable). Resources
    /// written into a container show up in its listing, which is how the
    /// engine discovers them.
    #[arg(long = "create", value_name = "PATH")]
    create: Vec<String>,
    /// Turtle files preloaded as resources, each published under the
    /// server base at its file stem. `{base}` in a file is replaced by
    /// the server origin.
    #[arg(value_name = "FILE")]
    files: Vec<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Observe conditions and keep workflow state; never act on the world.
    Monitor,
    /// Additionally send the requests of active atomic activities.
    Execute,
}

impl ModeArg {
    fn to_mode(self) -> Mode {
        match self {
            ModeArg::Monitor => Mode::Check,
            ModeArg::Execute => Mode::Execute,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Workflow model file (Turtle). `{base}` is replaced by the server
    /// origin, so one file runs against any port.
    #[arg(value_name = "MODEL")]
    model: PathBuf,
    /// Key-value file whose settings override the flags.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Instance container IRI on a running server. Omitted, the command
    /// embeds its own server.
    #[arg(long, value_name = "IRI")]
    container: Option<String>,
    /// Port for the embedded server (0 picks a free one).
    #[arg(long, default_value_t = 0)]
    port: u16,
    /// Extra resource polled every cycle (repeatable).
    #[arg(long = "seed", value_name = "IRI")]
    seeds: Vec<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Execute)]
    mode: ModeArg,
    /// Milliseconds between cycle starts.
    #[arg(long, default_value_t = 100)]
    interval: u64,
    /// Seconds before the run is abandoned.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    /// Send each distinct request once instead of re-deriving it.
    #[arg(long, default_value_t = false)]
    fired_marker: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Building counts to measure, comma separated.
    #[arg(long, default_value = "1,2,5,10", value_delimiter = ',')]
    buildings: Vec<usize>,
    /// Workloads to run: w1..w5 or all, comma separated.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    workloads: Vec<String>,
    /// Rooms per building.
    #[arg(long, default_value_t = 2)]
    rooms: usize,
    #[arg(long, default_value_t = 5)]
    lights_per_room: usize,
    #[arg(long, default_value_t = 1)]
    switches_per_room: usize,
    /// Milliseconds between instance injections (0 injects all up front).
    #[arg(long, default_value_t = 0)]
    interval: u64,
    /// Milliseconds the engine idles before the first injection.
    #[arg(long, default_value_t = 0)]
    warmup: u64,
    /// Cycle budget before a run counts as timed out.
    #[arg(long, default_value_t = 10_000)]
    max_cycles: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Workflow model file (Turtle).
    #[arg(value_name = "MODEL")]
    model: PathBuf,
    /// Trace log, one `cycle ...` line per transition, as `run` prints.
    #[arg(value_name = "TRACE")]
    trace: PathBuf,
    /// Document IRI the model was published at. Inferred from the trace's
    /// activity IRIs when omitted.
    #[arg(long, value_name = "IRI")]
    base: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Workflow model file (Turtle).
    #[arg(value_name = "MODEL")]
    model: PathBuf,
    /// Document IRI to resolve relative IRIs against.
    #[arg(long, value_name = "IRI")]
    base: Option<String>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout and exit 0; anything else is
            // a validation failure.
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let result = match &cli.command {
        Command::Serve(args) => cmd_serve(args),
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Validate(args) => cmd_validate(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}

/// Everything one engine run needs, resolved from the flags and then the
/// config file, whose settings win.
#[derive(Debug, Clone)]
struct EngineConfig {
    seeds: Vec<String>,
    container: Option<String>,
    port: u16,
    mode: Mode,
    interval: Duration,
    timeout: Duration,
    fired_marker: bool,
}

impl EngineConfig {
    fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let mut cfg = EngineConfig {
            seeds: args.seeds.clone(),
            container: args.container.clone(),
            port: args.port,
            mode: args.mode.to_mode(),
            interval: Duration::from_millis(args.interval),
            timeout: Duration::from_secs(args.timeout),
            fired_marker: args.fired_marker,
        };
        if let Some(path) = &args.config {
            cfg.apply_text(&read(path)?, &path.display().to_string())?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are
    /// skipped; unknown keys are errors. A `seed` line replaces the seeds
    /// from the flags; further `seed` lines accumulate.
    fn apply_text(&mut self, text: &str, source: &str) -> Result<(), CliError> {
        let bad = |n: usize, msg: String| CliError::Validation(format!("{source}:{}: {msg}", n + 1));
        let mut file_seeds = Vec::new();
        let mut saw_seed = false;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad(n, "expected key = value".into()));
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            match key.as_str() {
                "seed" => {
                    saw_seed = true;
                    file_seeds.push(value.to_string());
                }
                "container" => self.container = Some(value.to_string()),
                "port" => {
                    self.port = value.parse().map_err(|e| bad(n, format!("port: {e}")))?;
                }
                "mode" => {
                    self.mode = match value {
                        "monitor" => Mode::Check,
                        "execute" => Mode::Execute,
                        other => {
                            return Err(bad(n, format!("mode {other:?}, expected monitor or execute")))
                        }
                    };
                }
                "interval" => {
                    let ms: u64 = value.parse().map_err(|e| bad(n, format!("interval: {e}")))?;
                    self.interval = Duration::from_millis(ms);
                }
                "timeout" => {
                    let secs: u64 = value.parse().map_err(|e| bad(n, format!("timeout: {e}")))?;
                    self.timeout = Duration::from_secs(secs);
                }
                "fired-marker" | "fired_marker" => {
                    self.fired_marker =
                        value.parse().map_err(|e| bad(n, format!("fired-marker: {e}")))?;
                }
                other => return Err(bad(n, format!("unknown key {other:?}"))),
            }
        }
        if saw_seed {
            self.seeds = file_seeds;
        }
        Ok(())
    }

    fn check(&self) -> Result<(), CliError> {
        if self.interval.is_zero() {
            return Err(CliError::Validation("poll interval must be positive".into()));
        }
        if self.timeout.is_zero() {
            return Err(CliError::Validation("timeout must be positive".into()));
        }
        if let Some(container) = &self.container {
            absolute_http(container, "container")?;
        }
        for seed in &self.seeds {
            absolute_http(seed, "seed")?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn absolute_http(iri: &str, what: &str) -> Result<Url, CliError> {
    let url = Url::parse(iri)
        .map_err(|e| CliError::Validation(format!("{what} IRI {iri}: {e}")))?;
    if url.scheme() != "http" {
        return Err(CliError::Validation(format!(
            "{what} IRI {iri}: only http is supported"
        )));
    }
    Ok(url)
}

fn origin_of(url: &Url) -> Result<String, CliError> {
    let origin = url.origin();
    if !matches!(origin, url::Origin::Tuple(..)) {
        return Err(CliError::Validation(format!("{url}: no usable origin")));
    }
    Ok(origin.ascii_serialization())
}

/// `{base}` in model and data files stands for the server origin, so one
/// file works against any host and port.
fn substitute(text: &str, origin: &str) -> String {
    text.replace("{base}", origin)
}

fn iri_of(t: &Term) -> String {
    t.as_iri().map(str::to_string).unwrap_or_else(|| t.to_string())
}

fn workflows_in(g: &Graph) -> Vec<Term> {
    let ty = Term::iri(RDF_TYPE);
    let class = Term::iri(wildv::WORKFLOW);
    g.matching(None, Some(&ty), Some(&class)).map(|t| t.subject.clone()).collect()
}

/// Parses a model document and compiles its sole workflow.
fn parse_and_check(
    text: &str,
    doc: &str,
    path: &Path,
) -> Result<(Graph, Term, WorkflowModel), CliError> {
    let graph = parse_turtle(text, Some(doc))
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let workflows = workflows_in(&graph);
    let wf = match workflows.as_slice() {
        [one] => one.clone(),
        [] => {
            return Err(CliError::Validation(format!(
                "{}: no workflow found",
                path.display()
            )))
        }
        many => {
            return Err(CliError::Validation(format!(
                "{}: {} workflows found, expected exactly one",
                path.display(),
                many.len()
            )))
        }
    };
    let model = WorkflowModel::from_graph(&graph, &wf)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((graph, wf, model))
}

/// Absolute container path: leading slash enforced, trailing slash added.
fn normalize_path(path: &str) -> Result<String, CliError> {
    if !path.starts_with('/') || path.contains("://") {
        return Err(CliError::Validation(format!(
            "container path {path:?} must be absolute, like /instances/"
        )));
    }
    let mut path = path.to_string();
    if !path.ends_with('/') {
        path.push('/');
    }
    Ok(path)
}

/// Creates every container on the way to `path`, parent first, so the
/// chain is reachable from the root container. A final segment without a
/// trailing slash is a resource and is left alone.
fn create_container_chain(s: &mut ServerState, path: &str) {
    for boundary in path.match_indices('/').map(|(i, _)| i).skip(1) {
        s.create_container(&path[..boundary + 1]);
    }
}

fn cmd_serve(args: &ServeArgs) -> Result<(), CliError> {
    let container = normalize_path(&args.container)?;
    let extra: Vec<String> = args
        .create
        .iter()
        .map(|p| normalize_path(p))
        .collect::<Result<_, _>>()?;
    let server = LdpServer::spawn(args.port).map_err(|e| {
        CliError::Transport(format!("cannot bind 127.0.0.1:{}: {e}", args.port))
    })?;
    let base = server.base();
    let state = server.state();
    {
        let mut s = state.lock().unwrap();
        s.create_container("/");
        create_container_chain(&mut s, &container);
        for path in &extra {
            create_container_chain(&mut s, path);
        }
        for file in &args.files {
            let stem = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .filter(|s| !s.is_empty())
                .ok_or_else(|| {
                    CliError::Validation(format!(
                        "{}: cannot derive a resource name",
                        file.display()
                    ))
                })?;
            let uri = format!("{base}/{stem}");
            let text = substitute(&read(file)?, &base);
            let graph = parse_turtle(&text, Some(&uri))
                .map_err(|e| CliError::Validation(format!("{}: {e}", file.display())))?;
            s.put_resource(&uri, graph);
            println!("loaded {uri}");
        }
    }
    println!("serving {base}/ (instance container {base}{container})");
    loop {
        std::thread::sleep(Duration::from_secs(3600));
    }
}

/// Watches the instance container over HTTP and turns observed state
/// changes into trace events. The engine is the only writer and moves any
/// one instance at most a single lifecycle step per cycle, so polling at
/// cycle boundaries sees every transition exactly once.
struct StatePoller {
    client: HttpClient,
    container: String,
    known: BTreeMap<Term, (Option<Term>, Term)>,
}

impl StatePoller {
    fn new(client: HttpClient, container: String) -> Self {
        StatePoller { client, container, known: BTreeMap::new() }
    }

    fn state_of(&self, subject: &Term) -> Option<&Term> {
        self.known.get(subject).map(|(_, state)| state)
    }

    fn get_graph(&mut self, uri: &str) -> Option<Graph> {
        let resp = self.client.request(&HttpRequest::get(uri)).ok()?;
        if !resp.is_success() {
            return None;
        }
        parse_turtle(&resp.body, Some(uri)).ok()
    }

    fn poll(&mut self, cycle: u64) -> Vec<TraceEvent> {
        let container = self.container.clone();
        let mut events = Vec::new();
        let Some(listing) = self.get_graph(&container) else {
            return events;
        };
        let contains = Term::iri(ldpv::CONTAINS);
        let members: Vec<String> = listing
            .matching(None, Some(&contains), None)
            .filter_map(|t| t.object.as_iri().map(str::to_string))
            .collect();
        let has_state = Term::iri(wildv::HAS_STATE);
        let inst_of = Term::iri(wildv::ACTIVITY_INSTANCE_OF);
        for member in members {
            let Some(doc) = self.get_graph(&member) else { continue };
            let stated: Vec<Term> =
                doc.matching(None, Some(&has_state), None).map(|t| t.subject.clone()).collect();
            for subject in stated {
                let Some(new) = doc.object(&subject, &has_state).cloned() else { continue };
                let activity = doc.object(&subject, &inst_of).cloned();
                let old = self.known.get(&subject).map(|(_, s)| s.clone());
                if old.as_ref() != Some(&new) {
                    events.push(TraceEvent {
                        cycle,
                        subject: subject.clone(),
                        activity: activity.clone(),
                        old,
                        new: new.clone(),
                    });
                }
                self.known.insert(subject, (activity, new));
            }
        }
        events
    }
}

/// Checks the printed trace against the embedded server's log: every
/// printed transition must correspond to exactly one accepted write on
/// the instance container, and all logged lifecycle edges must be legal.
fn audit_trace(
    server: &LdpServer,
    mark: usize,
    container: &str,
    printed: &[TraceEvent],
) -> Vec<String> {
    let state = server.state();
    let s = state.lock().unwrap();
    let mut problems = audit_state_changes(&s.log);
    let key = |subject: &Term, old: &Option<Term>, new: &Term| {
        (iri_of(subject), old.as_ref().map(iri_of).unwrap_or_default(), iri_of(new))
    };
    let mut accepted: Vec<_> = s.log[mark..]
        .iter()
        .filter(|e| e.status < 300 && e.target.starts_with(container))
        .filter_map(|e| e.change.as_ref())
        .map(|c| key(&c.subject, &c.old, &c.new))
        .collect();
    let mut seen: Vec<_> = printed.iter().map(|e| key(&e.subject, &e.old, &e.new)).collect();
    accepted.sort();
    seen.sort();
    if accepted != seen {
        problems.push(format!(
            "printed transitions ({}) do not match accepted container writes ({})",
            seen.len(),
            accepted.len()
        ));
    }
    problems
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = EngineConfig::resolve(args)?;
    let raw = read(&args.model)?;

    // The model is validated before any server exists and before any
    // request goes out; the placeholder origin only affects how IRIs in
    // error messages print.
    parse_and_check(
        &substitute(&raw, "http://localhost"),
        "http://localhost/model",
        &args.model,
    )?;

    let embedded = match &cfg.container {
        Some(_) => None,
        None => Some(LdpServer::spawn(cfg.port).map_err(|e| {
            CliError::Transport(format!("cannot bind 127.0.0.1:{}: {e}", cfg.port))
        })?),
    };
    let (origin, container) = match &embedded {
        Some(server) => {
            // base() takes the state lock, so read it before locking.
            let base = server.base();
            let state = server.state();
            let mut s = state.lock().unwrap();
            s.create_container("/");
            let container = s.create_container("/instances/");
            (base, container)
        }
        None => {
            let mut container = cfg.container.clone().unwrap();
            if !container.ends_with('/') {
                container.push('/');
            }
            let url = absolute_http(&container, "container")?;
            (origin_of(&url)?, container)
        }
    };

    let model_doc = format!("{origin}/model");
    let text = substitute(&raw, &origin);
    let (_, wf, model) = parse_and_check(&text, &model_doc, &args.model)?;

    if let Some(server) = &embedded {
        // An execute run creates resources at the model's request targets;
        // their parent containers must exist for those resources to be
        // discoverable from the root.
        let state = server.state();
        let mut s = state.lock().unwrap();
        for node in model.nodes.values() {
            if let Some(req) = &node.request {
                if let Some(path) = req.target.strip_prefix(&origin) {
                    create_container_chain(&mut s, path);
                }
            }
        }
    }

    let mut client = HttpClient::new(CLIENT_TIMEOUT);
    let resp = client
        .request(&HttpRequest::new(Method::Put, &model_doc, text.clone()))
        .map_err(|e| CliError::Transport(format!("PUT {model_doc}: {e}")))?;
    if !resp.is_success() {
        return Err(CliError::Transport(format!(
            "PUT {model_doc} answered {}",
            resp.status
        )));
    }
    eprintln!("model {model_doc} ({} activities)", model.nodes.len());

    let body = format!(
        "<> a <{}> ;\n   <{}> <{}> ;\n   <{}> <{}> .\n",
        wildv::WORKFLOW_INSTANCE,
        wildv::WORKFLOW_INSTANCE_OF,
        iri_of(&wf),
        wildv::HAS_STATE,
        wildv::UNINITIALISED,
    );
    let resp = client
        .request(&HttpRequest::new(Method::Post, &container, body))
        .map_err(|e| CliError::Transport(format!("POST {container}: {e}")))?;
    if resp.status != 201 {
        return Err(CliError::Transport(format!(
            "POST {container} answered {}",
            resp.status
        )));
    }
    let instance = resp
        .location()
        .ok_or_else(|| CliError::Transport(format!("POST {container}: no Location header")))?
        .to_string();
    eprintln!("instance {instance} of {}", iri_of(&wf));

    let mut seeds = vec![format!("{origin}/"), container.clone()];
    seeds.extend(cfg.seeds.iter().cloned());
    let program = rule_program(cfg.mode, &seeds, &container, &[&model]);
    let mut engine = Engine::with_options(
        program,
        EngineOptions { fired_marker: cfg.fired_marker, ..EngineOptions::default() },
    );

    // Everything logged from here on is the engine's doing; the poller
    // baseline swallows the setup writes above.
    let log_mark = embedded.as_ref().map(|s| s.state().lock().unwrap().log.len());
    let mut poller = StatePoller::new(HttpClient::new(CLIENT_TIMEOUT), container.clone());
    let _ = poller.poll(0);

    let deadline = Instant::now() + cfg.timeout;
    let instance_term = Term::iri(&instance);
    let done = Term::iri(wildv::DONE);
    let mut printed: Vec<TraceEvent> = Vec::new();
    let mut finished = false;
    let mut engine_client = client.clone();
    let reports = engine.run_loop(&mut engine_client, cfg.interval, |report| {
        for event in poller.poll(report.cycle) {
            println!("{}", event.line());
            printed.push(event);
        }
        if poller.state_of(&instance_term) == Some(&done) {
            finished = true;
            return true;
        }
        Instant::now() >= deadline
    });

    let audit_problems = match (&embedded, log_mark) {
        (Some(server), Some(mark)) => audit_trace(server, mark, &container, &printed),
        _ => Vec::new(),
    };
    if !finished {
        for problem in &audit_problems {
            eprintln!("audit: {problem}");
        }
        return Err(CliError::Timeout(format!(
            "instance {instance} not done after {:?} ({} cycles, {} transitions)",
            cfg.timeout,
            reports.len(),
            printed.len()
        )));
    }
    let gets: usize = reports.iter().map(|r| r.gets).sum();
    let writes: usize = reports.iter().map(|r| r.dispatched).sum();
    eprintln!(
        "done in {} cycles ({} transitions, {gets} GETs, {writes} writes)",
        reports.len(),
        printed.len()
    );
    if !audit_problems.is_empty() {
        for problem in &audit_problems {
            eprintln!("audit: {problem}");
        }
        return Err(CliError::Validation(format!(
            "trace audit found {} problem(s)",
            audit_problems.len()
        )));
    }
    if embedded.is_some() {
        eprintln!("audit: {} printed transitions match the server log", printed.len());
    }
    Ok(())
}

fn resolve_workloads(names: &[String]) -> Result<Vec<Workload>, CliError> {
    if names.iter().any(|n| n.eq_ignore_ascii_case("all")) {
        return Ok(Workload::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in names {
        let w: Workload = name.parse().map_err(CliError::Validation)?;
        if !out.contains(&w) {
            out.push(w);
        }
    }
    if out.is_empty() {
        return Err(CliError::Validation("no workload selected".into()));
    }
    Ok(out)
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let workloads = resolve_workloads(&args.workloads)?;
    if args.buildings.is_empty() {
        return Err(CliError::Validation("at least one building count is needed".into()));
    }
    let cfg = BenchConfig {
        interval: Duration::from_millis(args.interval),
        warmup: Duration::from_millis(args.warmup),
        cycle_interval: Duration::ZERO,
        max_cycles: args.max_cycles,
        dispatch: DispatchOrder::Sorted,
    };
    println!("workload\tbuildings\tcycles\tgets\twrites\ttotal\tcompleted\twall_ms");
    for workload in &workloads {
        let mut request_points = Vec::new();
        let mut wall_points = Vec::new();
        for &n in &args.buildings {
            let spec = BuildingSpec {
                buildings: n,
                rooms: args.rooms,
                lights_per_room: args.lights_per_room,
                switches_per_room: args.switches_per_room,
                ..BuildingSpec::default()
            };
            let report = bench(&spec, *workload, &cfg).map_err(|e| match e {
                BenchError::Timeout { .. } => CliError::Timeout(e.to_string()),
                other => CliError::Validation(other.to_string()),
            })?;
            let wall_ms = report.wall.as_secs_f64() * 1000.0;
            println!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.1}",
                workload.name(),
                n,
                report.cycles,
                report.gets,
                report.writes,
                report.total_requests(),
                report.completed,
                wall_ms
            );
            request_points.push((n as f64, report.total_requests() as f64));
            wall_points.push((n as f64, wall_ms));
        }
        if request_points.len() >= 2 {
            let requests = affine_fit(&request_points);
            let wall = affine_fit(&wall_points);
            println!(
                "# {} requests = {:.1} + {:.1}*n (r2 {:.4}); wall_ms = {:.1} + {:.1}*n (r2 {:.4})",
                workload.name(),
                requests.intercept,
                requests.slope,
                requests.r2,
                wall.intercept,
                wall.slope,
                wall.r2
            );
        }
    }
    Ok(())
}

/// The document the trace's activity IRIs point into.
fn infer_model_doc(events: &[TraceEvent]) -> Option<String> {
    events.iter().find_map(|e| {
        let iri = e.activity.as_ref()?.as_iri()?;
        Some(iri.split('#').next().unwrap_or(iri).to_string())
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let trace_text = read(&args.trace)?;
    let mut events = Vec::new();
    for (n, raw) in trace_text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match TraceEvent::parse_line(line) {
            Some(event) => events.push(event),
            None => {
                return Err(CliError::Validation(format!(
                    "{}:{}: not a trace line",
                    args.trace.display(),
                    n + 1
                )))
            }
        }
    }
    // The model is parsed under the document the trace's activities point
    // into, so the IRIs line up; --base overrides the inference.
    let doc = args
        .base
        .clone()
        .or_else(|| infer_model_doc(&events))
        .unwrap_or_else(|| "http://localhost/model".into());
    let url = absolute_http(&doc, "base")?;
    let origin = origin_of(&url)?;
    let text = substitute(&read(&args.model)?, &origin);
    let (_, _, model) = parse_and_check(&text, &doc, &args.model)?;
    let word = completion_word(&events, &model);
    let net = compile(&model);
    match conformance(&net, &word) {
        Conformance::Conformant { complete: true } => {
            println!("true");
            eprintln!("conformant: {} completions, run complete", word.len());
            Ok(())
        }
        Conformance::Conformant { complete: false } => {
            println!("false at position {} (incomplete run)", word.len());
            Err(CliError::Validation(format!(
                "trace is a conformant prefix but the run never finished ({} completions)",
                word.len()
            )))
        }
        Conformance::Violation { position } => {
            println!("false at position {position} ({})", iri_of(&word[position]));
            Err(CliError::Validation(format!(
                "completion at position {position} cannot occur there"
            )))
        }
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let doc = args.base.clone().unwrap_or_else(|| "http://localhost/model".into());
    let url = absolute_http(&doc, "base")?;
    let origin = origin_of(&url)?;
    let text = substitute(&read(&args.model)?, &origin);
    let graph = parse_turtle(&text, Some(&doc))
        .map_err(|e| CliError::Validation(format!("{}: {e}", args.model.display())))?;
    let workflows = workflows_in(&graph);
    if workflows.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: no workflow found",
            args.model.display()
        )));
    }
    let mut invalid = 0;
    for wf in &workflows {
        let report = validate_model(&graph, wf);
        for warning in &report.warnings {
            println!("warning: {warning}");
        }
        match WorkflowModel::from_graph(&graph, wf) {
            Ok(model) => println!(
                "{}: valid ({} activities, {} atomic)",
                iri_of(wf),
                model.nodes.len(),
                model.atomics().count()
            ),
            Err(e) => {
                invalid += 1;
                println!("{}: invalid", iri_of(wf));
                for line in e.to_string().lines().skip(1) {
                    println!("  {line}");
                }
            }
        }
    }
    if invalid > 0 {
        return Err(CliError::Validation(format!("{invalid} invalid workflow(s)")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> EngineConfig {
        EngineConfig {
            seeds: vec!["http://flags.test/".into()],
            container: None,
            port: 0,
            mode: Mode::Execute,
            interval: Duration::from_millis(100),
            timeout: Duration::from_secs(60),
            fired_marker: false,
        }
    }

    #[test]
    fn config_file_settings_override_flags() {
        let mut cfg = base_config();
        cfg.apply_text(
            "# comment\n\nmode = monitor\ninterval = 250\ntimeout = 9\n\
             container = http://h.test/instances/\nfired-marker = true\nport = 81\n\
             seed = http://file.test/a\nseed = http://file.test/b\n",
            "test.conf",
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::Check);
        assert_eq!(cfg.interval, Duration::from_millis(250));
        assert_eq!(cfg.timeout, Duration::from_secs(9));
        assert_eq!(cfg.container.as_deref(), Some("http://h.test/instances/"));
        assert!(cfg.fired_marker);
        assert_eq!(cfg.port, 81);
        // The first seed line replaced the flag seeds.
        assert_eq!(cfg.seeds, vec!["http://file.test/a", "http://file.test/b"]);
        cfg.check().unwrap();
    }

    #[test]
    fn config_file_rejects_unknown_keys_and_shapeless_lines() {
        let mut cfg = base_config();
        let err = cfg.apply_text("colour = blue\n", "test.conf").unwrap_err();
        assert!(err.message().contains("unknown key"));
        let err = cfg.apply_text("just words\n", "test.conf").unwrap_err();
        assert!(err.message().contains("expected key = value"));
        let err = cfg.apply_text("mode = sideways\n", "test.conf").unwrap_err();
        assert!(err.message().contains("sideways"));
    }

    #[test]
    fn config_check_enforces_positive_pacing_and_absolute_iris() {
        let mut cfg = base_config();
        cfg.interval = Duration::ZERO;
        assert!(cfg.check().unwrap_err().message().contains("interval"));

        let mut cfg = base_config();
        cfg.timeout = Duration::ZERO;
        assert!(cfg.check().unwrap_err().message().contains("timeout"));

        let mut cfg = base_config();
        cfg.container = Some("/instances/".into());
        assert!(cfg.check().unwrap_err().message().contains("container"));

        let mut cfg = base_config();
        cfg.seeds = vec!["ftp://h.test/".into()];
        assert!(cfg.check().unwrap_err().message().contains("http"));
    }

    #[test]
    fn workload_selection_understands_all_and_dedups() {
        let all = resolve_workloads(&["all".into()]).unwrap();
        assert_eq!(all, Workload::ALL.to_vec());
        let picked =
            resolve_workloads(&["w2".into(), "W1".into(), "w2".into()]).unwrap();
        assert_eq!(picked, vec![Workload::W2, Workload::W1]);
        assert!(resolve_workloads(&["w9".into()]).is_err());
    }

    #[test]
    fn container_paths_are_normalized() {
        assert_eq!(normalize_path("/instances").unwrap(), "/instances/");
        assert_eq!(normalize_path("/").unwrap(), "/");
        assert!(normalize_path("instances/").is_err());
        assert!(normalize_path("http://h.test/c/").is_err());
    }

    #[test]
    fn container_chains_are_created_parent_first_and_linked() {
        let mut s = ServerState::new("http://h.test");
        s.create_container("/");
        create_container_chain(&mut s, "/a/b/c");
        assert!(s.is_container("http://h.test/a/"));
        assert!(s.is_container("http://h.test/a/b/"));
        // The final segment is a resource path, not a container.
        assert!(!s.is_container("http://h.test/a/b/c"));
        let contains = Term::iri(ldpv::CONTAINS);
        let root = s.resource("http://h.test/").unwrap();
        assert!(root
            .matching(None, Some(&contains), Some(&Term::iri("http://h.test/a/")))
            .next()
            .is_some());
        let a = s.resource("http://h.test/a/").unwrap();
        assert!(a
            .matching(None, Some(&contains), Some(&Term::iri("http://h.test/a/b/")))
            .next()
            .is_some());
    }

    #[test]
    fn model_doc_is_inferred_from_the_first_activity() {
        let events = vec![
            TraceEvent {
                cycle: 1,
                subject: Term::iri("http://h.test/instances/i1"),
                activity: None,
                old: None,
                new: Term::iri(wildv::INITIALISED),
            },
            TraceEvent {
                cycle: 2,
                subject: Term::iri("http://h.test/instances/r1"),
                activity: Some(Term::iri("http://h.test/model#a")),
                old: None,
                new: Term::iri(wildv::INITIALISED),
            },
        ];
        assert_eq!(infer_model_doc(&events).as_deref(), Some("http://h.test/model"));
        assert_eq!(infer_model_doc(&events[..1]), None);
    }

    #[test]
    fn base_placeholder_is_substituted_everywhere() {
        let text = "<{base}/dev/a> <{base}/p> \"{base}\" .";
        assert_eq!(
            substitute(text, "http://h.test"),
            "<http://h.test/dev/a> <http://h.test/p> \"http://h.test\" ."
        );
    }
}
