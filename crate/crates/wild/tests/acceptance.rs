//! The acceptance gate. Each criterion is one test, so the harness
//! prints exactly one pass/fail line per criterion; details go to stdout
//! for `--nocapture` runs.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    assert_clean_log, atomic, engine_for, generated_world, guard, instance_state,
    instance_states, model_text, run_cycles, run_to_done, workflow_done, world, World, BASE,
    CONTAINER, INSTANCE, MODEL_DOC,
};
use wild::bench::{
    affine_fit, bench, generate as bench_generate, install_workload, run_bench, BenchConfig,
    BuildingSpec, Workload,
};
use wild::http::{HttpClient, HttpRequest, Method, ResourceAccessor};
use wild::ldp::{audit_state_changes, LdpServer, ServerState};
use wild::modelgen::generate;
use wild::petri::{compile, conformance, firing_sequences};
use wild::query::{match_bgp, Bgp, PatternTerm, TriplePattern};
use wild::rdf::{parse_turtle, Graph, Term, Triple, RDF_TYPE};
use wild::rules::{saturate, DerivationRule};
use wild::semantics::Mode;
use wild::trace::{completion_word, TraceCollector, TraceEvent};
use wild::vocab::{ldp as ldpv, ssn, wild as wv};

struct Pattern {
    name: &'static str,
    text: String,
    presets: Vec<(&'static str, &'static str)>,
}

fn sequence_text() -> String {
    model_text(
        "root",
        &format!(
            "<#root> a wild:SequentialActivity ; wild:hasChildActivities ( <#a> <#b> ) .\n{}{}",
            atomic("a", "da"),
            atomic("b", "db")
        ),
    )
}

/// The five basic patterns in the tree encoding: sequence; parallel
/// split; synchronisation (an activity after a parallel block); exclusive
/// choice; simple merge (an activity after a choice).
fn patterns() -> Vec<Pattern> {
    let lights = vec![("da", "off"), ("db", "off")];
    let lights3 = vec![("da", "off"), ("db", "off"), ("dc", "off")];
    let guards = vec![("ga", "go"), ("gb", "stop")];
    let parallel = model_text(
        "root",
        &format!(
            "<#root> a wild:ParallelActivity ; wild:hasChildActivities ( <#a> <#b> ) .\n{}{}",
            atomic("a", "da"),
            atomic("b", "db")
        ),
    );
    let synchronisation = model_text(
        "root",
        &format!(
            "<#root> a wild:SequentialActivity ; wild:hasChildActivities ( <#p> <#c> ) .\n\
             <#p> a wild:ParallelActivity ; wild:hasChildActivities ( <#a> <#b> ) .\n{}{}{}",
            atomic("a", "da"),
            atomic("b", "db"),
            atomic("c", "dc")
        ),
    );
    let choice = model_text(
        "root",
        &format!(
            "<#root> a wild:ConditionalActivity ; wild:hasChildActivities ( <#a> <#b> ) .\n{}{}{}{}",
            guard("a", "ga"),
            guard("b", "gb"),
            atomic("a", "da"),
            atomic("b", "db")
        ),
    );
    let merge = model_text(
        "root",
        &format!(
            "<#root> a wild:SequentialActivity ; wild:hasChildActivities ( <#x> <#c> ) .\n\
             <#x> a wild:ConditionalActivity ; wild:hasChildActivities ( <#a> <#b> ) .\n{}{}{}{}{}",
            guard("a", "ga"),
            guard("b", "gb"),
            atomic("a", "da"),
            atomic("b", "db"),
            atomic("c", "dc")
        ),
    );
    vec![
        Pattern {
            name: "sequence",
            text: sequence_text(),
            presets: lights.clone(),
        },
        Pattern {
            name: "parallel split",
            text: parallel,
            presets: lights.clone(),
        },
        Pattern {
            name: "synchronisation",
            text: synchronisation,
            presets: lights3.clone(),
        },
        Pattern {
            name: "exclusive choice",
            text: choice,
            presets: [lights.clone(), guards.clone()].concat(),
        },
        Pattern {
            name: "simple merge",
            text: merge,
            presets: [lights3, guards].concat(),
        },
    ]
}

/// Membership of the run's completion word in the net's language, checked
/// both ways: by marking simulation and against the exhaustively
/// enumerated firing-sequence set.
fn assert_conformant(world: &World, events: &[TraceEvent], label: &str) {
    let model = world.model.as_ref().expect("validated model");
    let word = completion_word(events, model);
    assert!(!word.is_empty(), "{label}: no completions traced");
    let net = compile(model);
    let verdict = conformance(&net, &word);
    assert!(verdict.is_complete(), "{label}: {verdict:?} for {word:?}");
    let language = firing_sequences(&net, 200_000).expect("net language enumerable");
    assert!(
        language.contains(&word),
        "{label}: {word:?} missing from the enumerated language"
    );
}

#[test]
fn criterion_1_pattern_conformance() {
    let start = Instant::now();
    for p in patterns() {
        let mut w = world(&p.text, &p.presets);
        let (_, events) = run_to_done(&mut w, Mode::Execute, 40);
        assert_conformant(&w, &events, p.name);
        assert_clean_log(&w.server);
    }
    for seed in 0..50u64 {
        let gen = generate(seed, &format!("{BASE}/dev/"), 6);
        let mut w = generated_world(&gen);
        let (_, events) = run_to_done(&mut w, Mode::Execute, 80);
        assert_conformant(&w, &events, &format!("random model {seed}"));
        assert_clean_log(&w.server);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("criterion 1 pass: 5 patterns + 50 random models conform ({elapsed:?})");
}

#[test]
fn criterion_2_sequence_end_to_end() {
    let mut w = world(&sequence_text(), &[("da", "off"), ("db", "off")]);
    let mut engine = engine_for(&w, Mode::Execute);
    let mut collector = TraceCollector::new(w.server.clone());
    let server = w.server.clone();
    let reports = engine.run_loop(&mut w.acc, Duration::from_millis(1), move |r| {
        let s = server.lock().unwrap();
        let subject = Term::iri(INSTANCE);
        let state = s
            .resource(INSTANCE)
            .and_then(|g| g.object(&subject, &Term::iri(wv::HAS_STATE)).cloned());
        state == Some(Term::iri(wv::DONE)) || r.cycle >= 8
    });
    assert!(workflow_done(&w), "workflow instance not done");
    assert!(reports.len() <= 6, "took {} cycles", reports.len());
    collector.collect(reports.len() as u64);
    let model = w.model.as_ref().unwrap();
    let word = completion_word(&collector.into_events(), model);
    let a = Term::iri(&format!("{MODEL_DOC}#a"));
    let b = Term::iri(&format!("{MODEL_DOC}#b"));
    assert_eq!(word, vec![a, b], "trace must be [A done, B done]");
    assert_clean_log(&w.server);
    println!(
        "criterion 2 pass: sequence(A,B) done in {} cycles, trace [A done, B done]",
        reports.len()
    );
}

#[test]
fn criterion_3_state_machine_safety() {
    let clean = |server: &std::sync::Arc<std::sync::Mutex<ServerState>>| -> usize {
        let s = server.lock().unwrap();
        let violations = audit_state_changes(&s.log);
        assert!(violations.is_empty(), "illegal transitions: {violations:?}");
        s.log.len()
    };
    let mut audited = 0usize;
    for p in patterns() {
        let mut w = world(&p.text, &p.presets);
        run_to_done(&mut w, Mode::Execute, 40);
        audited += clean(&w.server);
    }
    for seed in 100..110u64 {
        let gen = generate(seed, &format!("{BASE}/dev/"), 6);
        let mut w = generated_world(&gen);
        run_to_done(&mut w, Mode::Execute, 80);
        audited += clean(&w.server);
    }
    let mut bw = bench_generate(&BuildingSpec::with_buildings(2)).unwrap();
    install_workload(&mut bw, Workload::W3).unwrap();
    run_bench(&bw, &BenchConfig::immediate()).unwrap();
    for s in &bw.buildings {
        audited += clean(s);
    }
    audited += clean(&bw.hub);
    // Direct adversarial writes: every skip, jump, and reversal is
    // refused and leaves no logged transition.
    let mut s = ServerState::new("http://adv.test");
    s.create_container("/");
    let doc = "http://adv.test/r1";
    let mut g = Graph::new();
    g.insert(
        Triple::new(Term::iri(doc), Term::iri(RDF_TYPE), Term::iri(wv::ACTIVITY_INSTANCE))
            .unwrap(),
    );
    g.insert(
        Triple::new(Term::iri(doc), Term::iri(wv::HAS_STATE), Term::iri(wv::UNINITIALISED))
            .unwrap(),
    );
    s.put_resource(doc, g);
    let put = |s: &mut ServerState, state: &str| {
        s.handle(
            Method::Put,
            doc,
            &format!("<{doc}> <{}> <{state}> .", wv::HAS_STATE),
        )
        .status
    };
    assert_eq!(put(&mut s, wv::ACTIVE), 409, "skip over initialised");
    assert_eq!(put(&mut s, wv::DONE), 409, "jump to done");
    assert_eq!(put(&mut s, wv::INITIALISED), 200);
    assert_eq!(put(&mut s, wv::DONE), 409, "skip over active");
    assert_eq!(put(&mut s, wv::UNINITIALISED), 409, "reversal");
    assert_eq!(put(&mut s, wv::ACTIVE), 200);
    assert_eq!(put(&mut s, wv::ACTIVE), 200, "same state is a no-op");
    assert_eq!(put(&mut s, wv::INITIALISED), 409, "reversal");
    assert_eq!(put(&mut s, wv::DONE), 200);
    assert_eq!(put(&mut s, wv::ACTIVE), 409, "reversal from done");
    let violations = audit_state_changes(&s.log);
    assert!(violations.is_empty(), "{violations:?}");
    audited += s.log.len();
    println!("criterion 3 pass: {audited} logged requests, zero illegal transitions");
}

#[test]
fn criterion_4_closed_world_list() {
    let head = "@prefix wild: <http://purl.org/wild/vocab#> .\n\
                @prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n\
                @prefix sp: <http://spinrdf.org/sp#> .\n\
                <#wf> a wild:Workflow ; wild:hasBehaviour <#root> .\n\
                <#a> a wild:AtomicActivity ; wild:hasPostcondition [ sp:text \"ASK { ?s ?p ?o }\" ] .\n";
    let unterminated = format!(
        "{head}<#root> a wild:SequentialActivity ; wild:hasChildActivities <#cell> .\n\
         <#cell> rdf:first <#a> .\n"
    );
    let mut w = world(&unterminated, &[]);
    assert!(w.model.is_none(), "a list without rdf:nil must not validate");
    run_cycles(&mut w, Mode::Check, 100);
    assert_eq!(
        instance_state(&w),
        Some(Term::iri(wv::ACTIVE)),
        "workflow must stay active forever"
    );
    let a = Term::iri(&format!("{MODEL_DOC}#a"));
    assert_eq!(
        instance_states(&w, &a),
        vec![Term::iri(wv::DONE)],
        "the child itself completes; only the list is unterminated"
    );
    let terminated = format!(
        "{head}<#root> a wild:SequentialActivity ; wild:hasChildActivities ( <#a> ) .\n"
    );
    let mut t = world(&terminated, &[]);
    let (reports, _) = run_to_done(&mut t, Mode::Check, 10);
    assert_clean_log(&w.server);
    assert_clean_log(&t.server);
    println!(
        "criterion 4 pass: unterminated list still active after 100 cycles, terminated twin done in {}",
        reports.len()
    );
}

const NODE_POOL: usize = 6;
const PRED_POOL: usize = 4;

fn random_program(seed: u64) -> (Graph, Vec<DerivationRule>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<Term> = (0..NODE_POOL)
        .map(|i| Term::iri(&format!("http://x.test/n{i}")))
        .collect();
    let preds: Vec<Term> = (0..PRED_POOL)
        .map(|i| Term::iri(&format!("http://x.test/p{i}")))
        .collect();
    let lits: Vec<Term> = ["v0", "v1", "v2"].iter().map(|v| Term::lit(v)).collect();
    let mut g = Graph::new();
    for _ in 0..rng.gen_range(0..=30) {
        let s = nodes[rng.gen_range(0..nodes.len())].clone();
        let p = preds[rng.gen_range(0..preds.len())].clone();
        let o = if rng.gen_bool(0.3) {
            lits[rng.gen_range(0..lits.len())].clone()
        } else {
            nodes[rng.gen_range(0..nodes.len())].clone()
        };
        g.insert(Triple::new(s, p, o).unwrap());
    }
    let vars = ["a", "b", "c"];
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(0..=6) {
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let s = if rng.gen_bool(0.5) {
                PatternTerm::var(vars[rng.gen_range(0..vars.len())])
            } else {
                PatternTerm::Term(nodes[rng.gen_range(0..nodes.len())].clone())
            };
            let p = if rng.gen_bool(0.3) {
                PatternTerm::var(vars[rng.gen_range(0..vars.len())])
            } else {
                PatternTerm::Term(preds[rng.gen_range(0..preds.len())].clone())
            };
            let o = if rng.gen_bool(0.5) {
                PatternTerm::var(vars[rng.gen_range(0..vars.len())])
            } else if rng.gen_bool(0.3) {
                PatternTerm::Term(lits[rng.gen_range(0..lits.len())].clone())
            } else {
                PatternTerm::Term(nodes[rng.gen_range(0..nodes.len())].clone())
            };
            body.push(TriplePattern::new(s, p, o));
        }
        // Safety: head variables must come from the body.
        let bound: Vec<PatternTerm> = body
            .iter()
            .flat_map(|tp| tp.variables().cloned())
            .map(PatternTerm::Var)
            .collect();
        let mut head_term = |consts: &[Term]| {
            if !bound.is_empty() && rng.gen_bool(0.5) {
                bound[rng.gen_range(0..bound.len())].clone()
            } else {
                PatternTerm::Term(consts[rng.gen_range(0..consts.len())].clone())
            }
        };
        let head = TriplePattern::new(
            head_term(&nodes),
            head_term(&preds),
            head_term(&nodes),
        );
        rules.push(DerivationRule {
            body: Bgp(body),
            head: vec![head],
        });
    }
    (g, rules)
}

/// Round-based reference fixpoint: fire every rule on the full graph
/// until nothing new appears. Instantiations that would not form a valid
/// triple are dropped, exactly as the engine drops them.
fn naive_fixpoint(start: &Graph, rules: &[DerivationRule]) -> Graph {
    let mut g = start.clone();
    loop {
        let mut fresh = Vec::new();
        for rule in rules {
            for sol in match_bgp(&rule.body, &g) {
                for pattern in &rule.head {
                    let term = |pt: &PatternTerm| match pt {
                        PatternTerm::Term(t) => t.clone(),
                        PatternTerm::Var(v) => sol[v].clone(),
                    };
                    if let Ok(t) = Triple::new(
                        term(&pattern.subject),
                        term(&pattern.predicate),
                        term(&pattern.object),
                    ) {
                        fresh.push(t);
                    }
                }
            }
        }
        let before = g.len();
        for t in fresh {
            g.insert(t);
        }
        if g.len() == before {
            return g;
        }
    }
}

#[test]
fn criterion_5_fixpoint_properties() {
    let mut shuffler = ChaCha8Rng::seed_from_u64(0xfeed);
    for i in 0..200u64 {
        let (g, rules) = random_program(i);
        let oracle = naive_fixpoint(&g, &rules);
        let mut semi = g.clone();
        saturate(&mut semi, &rules);
        assert_eq!(semi, oracle, "program {i}: semi-naive differs from naive");
        let mut again = semi.clone();
        let added = saturate(&mut again, &rules);
        assert_eq!(added, 0, "program {i}: saturate not idempotent");
        assert_eq!(again, semi, "program {i}: second pass changed the graph");
        let mut reversed_rules = rules.clone();
        reversed_rules.reverse();
        let mut reversed = g.clone();
        saturate(&mut reversed, &reversed_rules);
        assert_eq!(reversed, semi, "program {i}: rule order changed the fixpoint");
        let mut shuffled_rules = rules.clone();
        shuffled_rules.shuffle(&mut shuffler);
        let mut shuffled = g.clone();
        saturate(&mut shuffled, &shuffled_rules);
        assert_eq!(shuffled, semi, "program {i}: shuffled order changed the fixpoint");
    }
    println!("criterion 5 pass: 200 random programs, semi-naive == naive, idempotent, order-independent");
}

#[test]
fn criterion_6_ldp_protocol() {
    let server = LdpServer::spawn(0).unwrap();
    let base = server.base();
    {
        let state = server.state();
        let mut s = state.lock().unwrap();
        s.create_container("/");
        s.create_container("/things/");
    }
    let mut client = HttpClient::new(Duration::from_secs(5));
    let container = format!("{base}/things/");

    // POST creates a member and points at it with Location.
    let resp = client
        .request(&HttpRequest::new(
            Method::Post,
            &container,
            format!("<> <{}> \"fresh\" .", ssn::HAS_VALUE),
        ))
        .unwrap();
    assert_eq!(resp.status, 201);
    let member = resp.headers.get("location").expect("Location header").clone();
    assert!(member.starts_with(&container), "{member}");
    let got = client.request(&HttpRequest::get(&member)).unwrap();
    assert_eq!(got.status, 200);
    let mg = parse_turtle(&got.body, Some(&member)).unwrap();
    let m = Term::iri(&member);
    assert_eq!(
        mg.object(&m, &Term::iri(ssn::HAS_VALUE)),
        Some(&Term::lit("fresh")),
        "posted triples must be readable at the minted member"
    );

    // The containment triple shows up in the container listing.
    let listing = client.request(&HttpRequest::get(&container)).unwrap();
    let lg = parse_turtle(&listing.body, Some(&container)).unwrap();
    let containment =
        Triple::new(Term::iri(&container), Term::iri(ldpv::CONTAINS), m.clone()).unwrap();
    assert!(lg.iter().any(|t| *t == containment), "missing containment triple");

    // Containers cannot be replaced wholesale.
    let put_container = client
        .request(&HttpRequest::new(Method::Put, &container, "<> a <http://x.test/T> ."))
        .unwrap();
    assert_eq!(put_container.status, 405);

    // PUT is idempotent: replaying a full replace leaves the same state.
    let doc = format!("{base}/things/fixed");
    let body = format!("<> <{}> \"one\" . <> a <http://x.test/Kind> .", ssn::HAS_VALUE);
    let first = client.request(&HttpRequest::new(Method::Put, &doc, &body)).unwrap();
    assert_eq!(first.status, 201, "first PUT creates");
    let snap1 = client.request(&HttpRequest::get(&doc)).unwrap().body;
    let second = client.request(&HttpRequest::new(Method::Put, &doc, &body)).unwrap();
    assert_eq!(second.status, 200, "replay replaces in place");
    let snap2 = client.request(&HttpRequest::get(&doc)).unwrap().body;
    assert_eq!(
        parse_turtle(&snap1, Some(&doc)).unwrap(),
        parse_turtle(&snap2, Some(&doc)).unwrap(),
        "replaying a PUT must not change the resource"
    );

    // A state patch replaces the state and keeps every other triple.
    let inst = format!("{base}/things/run1");
    let seeded = format!(
        "<> a <{}> ; <{}> <{}> ; <{}> <{}> .",
        wv::ACTIVITY_INSTANCE,
        wv::ACTIVITY_INSTANCE_OF,
        "http://x.test/a",
        wv::HAS_STATE,
        wv::UNINITIALISED
    );
    let created = client.request(&HttpRequest::new(Method::Put, &inst, &seeded)).unwrap();
    assert_eq!(created.status, 201);
    let patch = format!("<{inst}> <{}> <{}> .", wv::HAS_STATE, wv::INITIALISED);
    let patched = client.request(&HttpRequest::new(Method::Put, &inst, &patch)).unwrap();
    assert_eq!(patched.status, 200);
    let after = client.request(&HttpRequest::get(&inst)).unwrap();
    let ag = parse_turtle(&after.body, Some(&inst)).unwrap();
    let subject = Term::iri(&inst);
    assert_eq!(
        ag.object(&subject, &Term::iri(wv::HAS_STATE)),
        Some(&Term::iri(wv::INITIALISED)),
        "state replaced"
    );
    assert_eq!(
        ag.object(&subject, &Term::iri(RDF_TYPE)),
        Some(&Term::iri(wv::ACTIVITY_INSTANCE)),
        "type preserved through the patch"
    );
    assert_eq!(
        ag.object(&subject, &Term::iri(wv::ACTIVITY_INSTANCE_OF)),
        Some(&Term::iri("http://x.test/a")),
        "membership preserved through the patch"
    );

    // An illegal transition is refused and changes nothing.
    let illegal = format!("<{inst}> <{}> <{}> .", wv::HAS_STATE, wv::DONE);
    let refused = client.request(&HttpRequest::new(Method::Put, &inst, &illegal)).unwrap();
    assert_eq!(refused.status, 409);
    let unchanged = client.request(&HttpRequest::get(&inst)).unwrap();
    assert_eq!(
        parse_turtle(&unchanged.body, Some(&inst)).unwrap(),
        ag,
        "a refused transition must not touch the resource"
    );

    let state = server.state();
    let s = state.lock().unwrap();
    let violations = audit_state_changes(&s.log);
    assert!(violations.is_empty(), "{violations:?}");
    println!("criterion 6 pass: POST/GET/PUT/patch protocol script over live HTTP, {} requests", s.log.len());
}

#[test]
fn criterion_7_benchmark_scaling() {
    let start = Instant::now();
    let scales = [1usize, 2, 5, 10];
    let mut wall_at_10: Vec<(Workload, Duration)> = Vec::new();
    for w in Workload::ALL {
        let mut request_points = Vec::new();
        let mut wall_points = Vec::new();
        for &n in &scales {
            let mut totals = BTreeSet::new();
            let mut best = Duration::MAX;
            for _ in 0..3 {
                let report =
                    bench(&BuildingSpec::with_buildings(n), w, &BenchConfig::immediate()).unwrap();
                assert_eq!(report.completed, n, "{} at scale {n}", w.name());
                totals.insert(report.total_requests());
                best = best.min(report.wall);
            }
            assert_eq!(
                totals.len(),
                1,
                "{} at scale {n}: request counts varied across identical runs: {totals:?}",
                w.name()
            );
            let total = *totals.iter().next().unwrap();
            request_points.push((n as f64, total as f64));
            wall_points.push((n as f64, best.as_secs_f64()));
            if n == 10 {
                wall_at_10.push((w, best));
            }
        }
        let requests_fit = affine_fit(&request_points);
        let wall_fit = affine_fit(&wall_points);
        println!(
            "criterion 7: {} requests {:?} fit r2={:.6}; wall fit r2={:.4}",
            w.name(),
            request_points.iter().map(|p| p.1 as u64).collect::<Vec<_>>(),
            requests_fit.r2,
            wall_fit.r2
        );
        assert!(
            requests_fit.r2 >= 0.98,
            "{}: request fit r2 {} below 0.98",
            w.name(),
            requests_fit.r2
        );
        assert!(
            wall_fit.r2 >= 0.98,
            "{}: wall fit r2 {} below 0.98",
            w.name(),
            wall_fit.r2
        );
    }
    for pair in wall_at_10.windows(2) {
        assert!(
            pair[0].1 <= pair[1].1,
            "wall ordering at 10 buildings broken: {wall_at_10:?}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(600), "took {elapsed:?}");
    println!("criterion 7 pass: affine request and wall fits at scales 1/2/5/10, W1..W5 ordered ({elapsed:?})");
}

#[test]
fn criterion_8_monitor_execute_separation() {
    // Monitor mode: the devices are already on, the engine only observes
    // and never writes outside the instance container.
    let mut monitor = world(&sequence_text(), &[("da", "on"), ("db", "on")]);
    run_to_done(&mut monitor, Mode::Check, 20);
    {
        let s = monitor.server.lock().unwrap();
        let mut instance_writes = 0;
        for e in &s.log {
            if e.method != Method::Get {
                assert!(
                    e.target.starts_with(CONTAINER),
                    "monitor mode wrote to the world: {} {}",
                    e.method.as_str(),
                    e.target
                );
                instance_writes += 1;
            }
        }
        assert!(instance_writes > 0, "lifecycle writes must still happen");
    }
    // Execute mode: each active atomic's request is observed at its
    // device, and the device changes.
    let mut exec = world(&sequence_text(), &[("da", "off"), ("db", "off")]);
    run_to_done(&mut exec, Mode::Execute, 20);
    {
        let s = exec.server.lock().unwrap();
        for dev in ["da", "db"] {
            let target = format!("{BASE}/dev/{dev}");
            assert!(
                s.log
                    .iter()
                    .any(|e| e.method == Method::Put && e.target == target && e.status == 200),
                "no request observed at {target}"
            );
            let subject = Term::iri(&target);
            let value = s
                .resource(&target)
                .and_then(|g| g.object(&subject, &Term::iri(ssn::HAS_VALUE)).cloned());
            assert_eq!(value, Some(Term::lit("on")), "{target} unchanged");
        }
    }
    assert_clean_log(&monitor.server);
    assert_clean_log(&exec.server);
    println!("criterion 8 pass: monitor wrote only instance state, execute reached both devices");
}
