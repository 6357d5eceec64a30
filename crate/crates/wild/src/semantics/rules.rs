//! Builds the operational rule program for a run: resource fetching,
//! workflow instantiation, state advancement for each composition pattern,
//! and (in execute mode) the world-facing requests of atomic activities.
//!
//! Every request rule that moves something to `wild:done` is paired with a
//! derivation rule of the same body deriving the same state triple into
//! working memory. Completions therefore cascade through enclosing
//! composites within a single cycle, while activations deliberately have
//! no such twin: a freshly activated instance only acts in the next cycle,
//! after its new state has been read back. The server refuses state writes
//! that skip or reverse a lifecycle step, so the dispatch order of the
//! requests collected from one cycle never matters.

use crate::http::Method;
use crate::query::{Bgp, PatternTerm, TriplePattern, Variable};
use crate::rdf::{Term, RDF_NIL, RDF_TYPE};
use crate::rules::{DerivationRule, Program, RequestRule};
use crate::vocab::{ldp, sp, wild};

use super::{builtin_derivations, ontology, WorkflowModel};

/// Base IRI of generated programs; POST payloads are relativized against
/// it so `<#it>` rebinds to the newly minted member on the server.
pub const RULE_BASE: &str = "http://purl.org/wild/rules";

/// Placeholder for the resource a POST is about to create.
pub const NEW_MEMBER: &str = "http://purl.org/wild/rules#it";

/// What the engine is allowed to do to the world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Observe and keep workflow state: lifecycle requests only.
    Check,
    /// Additionally dispatch the requests of active atomic activities.
    Execute,
}

fn v(name: &str) -> PatternTerm {
    PatternTerm::Var(Variable::new(name))
}

fn iri(s: &str) -> PatternTerm {
    PatternTerm::Term(Term::iri(s))
}

fn tp(
    s: impl Into<PatternTerm>,
    p: impl Into<PatternTerm>,
    o: impl Into<PatternTerm>,
) -> TriplePattern {
    TriplePattern::new(s, p, o)
}

/// `?j wild:hasState <state>` used both as payload and as twin head.
fn state_triple(instance: &str, state: &str) -> TriplePattern {
    tp(v(instance), iri(wild::HAS_STATE), iri(state))
}

struct ProgramBuilder {
    derivations: Vec<DerivationRule>,
    requests: Vec<RequestRule>,
}

impl ProgramBuilder {
    fn derive(&mut self, body: Vec<TriplePattern>, head: Vec<TriplePattern>) {
        self.derivations.push(DerivationRule {
            body: Bgp(body),
            head,
        });
    }

    fn get(&mut self, body: Vec<TriplePattern>, target: PatternTerm) {
        self.requests.push(RequestRule {
            body: Bgp(body),
            method: Method::Get,
            target,
            payload: vec![],
            provenance: None,
        });
    }

    fn put_state(&mut self, body: Vec<TriplePattern>, instance: &str, state: &str) {
        self.requests.push(RequestRule {
            body: Bgp(body),
            method: Method::Put,
            target: v(instance),
            payload: vec![state_triple(instance, state)],
            provenance: Some(v(instance)),
        });
    }

    /// A state-advancing PUT to done plus its working-memory twin.
    fn put_done_with_twin(&mut self, body: Vec<TriplePattern>, instance: &str) {
        self.put_state(body.clone(), instance, wild::DONE);
        self.derive(body, vec![state_triple(instance, wild::DONE)]);
    }

    fn post(
        &mut self,
        body: Vec<TriplePattern>,
        container: &str,
        payload: Vec<TriplePattern>,
        provenance: &str,
    ) {
        self.requests.push(RequestRule {
            body: Bgp(body),
            method: Method::Post,
            target: iri(container),
            payload,
            provenance: Some(v(provenance)),
        });
    }
}

/// Assembles the rule program for one run.
///
/// `seeds` are fetched unconditionally each cycle; membership and model
/// references found in working memory are followed from there. New
/// activity instances are minted in `instance_container`. `models` only
/// contributes in execute mode, where each atomic activity carrying a
/// request yields one request rule.
pub fn rule_program(
    mode: Mode,
    seeds: &[String],
    instance_container: &str,
    models: &[&WorkflowModel],
) -> Program {
    let mut b = ProgramBuilder {
        derivations: builtin_derivations().to_vec(),
        requests: Vec::new(),
    };

    // Resource fetching: seeds, container membership, model references.
    for seed in seeds {
        b.get(vec![], iri(seed));
    }
    b.get(
        vec![tp(v("c"), iri(ldp::CONTAINS), v("e"))],
        v("e"),
    );
    b.get(
        vec![tp(v("i"), iri(wild::WORKFLOW_INSTANCE_OF), v("m"))],
        v("m"),
    );

    instantiation(&mut b, instance_container);
    atomic_completion(&mut b);
    workflow_completion(&mut b);
    sequence_rules(&mut b);
    parallel_rules(&mut b);
    conditional_rules(&mut b);

    if mode == Mode::Execute {
        for model in models {
            for atomic in model.atomics() {
                let Some(req) = &atomic.request else { continue };
                b.requests.push(RequestRule {
                    body: Bgp(vec![
                        tp(v("j"), iri(wild::ACTIVITY_INSTANCE_OF), atomic.iri.clone()),
                        tp(v("j"), iri(wild::HAS_STATE), iri(wild::ACTIVE)),
                    ]),
                    method: req.method,
                    target: PatternTerm::Term(Term::iri(&req.target)),
                    payload: req
                        .payload
                        .iter()
                        .map(|t| {
                            tp(t.subject.clone(), t.predicate.clone(), t.object.clone())
                        })
                        .collect(),
                    provenance: Some(v("j")),
                });
            }
        }
    }

    let mut program = Program {
        base: Some(RULE_BASE.to_string()),
        assertions: ontology().clone(),
        derivations: b.derivations,
        requests: b.requests,
        ..Program::default()
    };
    for (pfx, ns) in [
        ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
        ("wild", wild::NS),
        ("sp", "http://spinrdf.org/sp#"),
        ("http", "http://www.w3.org/2011/http#"),
        ("httpm", "http://www.w3.org/2011/http-methods#"),
    ] {
        program.prefixes.insert(pfx.to_string(), ns.to_string());
    }
    program
}

/// Creating instances for a fresh workflow instance and starting it.
fn instantiation(b: &mut ProgramBuilder, container: &str) {
    // Root activity instance, created directly active.
    b.post(
        vec![
            tp(v("i"), iri(RDF_TYPE), iri(wild::WORKFLOW_INSTANCE)),
            tp(v("i"), iri(wild::HAS_STATE), iri(wild::UNINITIALISED)),
            tp(v("i"), iri(wild::WORKFLOW_INSTANCE_OF), v("m")),
            tp(v("m"), iri(wild::HAS_BEHAVIOUR), v("a")),
        ],
        container,
        vec![
            tp(iri(NEW_MEMBER), iri(wild::ACTIVITY_INSTANCE_OF), v("a")),
            tp(iri(NEW_MEMBER), iri(wild::IN_WORKFLOW_INSTANCE), v("i")),
            tp(iri(NEW_MEMBER), iri(wild::HAS_STATE), iri(wild::ACTIVE)),
        ],
        "i",
    );
    // Instances for every activity below the root, created initialised.
    b.post(
        vec![
            tp(v("i"), iri(wild::HAS_STATE), iri(wild::UNINITIALISED)),
            tp(v("i"), iri(wild::HAS_DESCENDANT_ACTIVITY), v("a")),
            tp(v("parent"), iri(wild::HAS_CHILD_ACTIVITY), v("a")),
        ],
        container,
        vec![
            tp(iri(NEW_MEMBER), iri(wild::ACTIVITY_INSTANCE_OF), v("a")),
            tp(iri(NEW_MEMBER), iri(wild::IN_WORKFLOW_INSTANCE), v("i")),
            tp(iri(NEW_MEMBER), iri(wild::HAS_STATE), iri(wild::INITIALISED)),
        ],
        "i",
    );
    // The workflow instance itself advances one step per cycle, so its
    // instances exist before anything observes it active.
    b.put_state(
        vec![
            tp(v("i"), iri(RDF_TYPE), iri(wild::WORKFLOW_INSTANCE)),
            tp(v("i"), iri(wild::HAS_STATE), iri(wild::UNINITIALISED)),
        ],
        "i",
        wild::INITIALISED,
    );
    b.put_state(
        vec![
            tp(v("i"), iri(RDF_TYPE), iri(wild::WORKFLOW_INSTANCE)),
            tp(v("i"), iri(wild::HAS_STATE), iri(wild::INITIALISED)),
        ],
        "i",
        wild::ACTIVE,
    );
}

/// An active atomic instance whose postcondition holds is done.
fn atomic_completion(b: &mut ProgramBuilder) {
    b.put_done_with_twin(
        vec![
            tp(v("i"), iri(wild::HAS_STATE), iri(wild::ACTIVE)),
            tp(v("i"), iri(wild::HAS_DESCENDANT_ACTIVITY), v("a")),
            tp(v("a"), iri(RDF_TYPE), iri(wild::ATOMIC_ACTIVITY)),
            tp(v("a"), iri(wild::HAS_POSTCONDITION), v("p")),
            tp(v("p"), iri(sp::HAS_BOOLEAN_RESULT), PatternTerm::Term(Term::lit_bool(true))),
            tp(v("j"), iri(wild::ACTIVITY_INSTANCE_OF), v("a")),
            tp(v("j"), iri(wild::IN_WORKFLOW_INSTANCE), v("i")),
            tp(v("j"), iri(wild::HAS_STATE), iri(wild::ACTIVE)),
        ],
        "j",
    );
}

/// The workflow instance is done once its behaviour's instance is.
fn workflow_completion(b: &mut ProgramBuilder) {
    b.put_done_with_twin(
        vec![
            tp(v("i"), iri(wild::HAS_STATE), iri(wild::ACTIVE)),
            tp(v("i"), iri(wild::WORKFLOW_INSTANCE_OF), v("m")),
            tp(v("m"), iri(wild::HAS_BEHAVIOUR), v("a")),
            tp(v("j"), iri(wild::ACTIVITY_INSTANCE_OF), v("a")),
            tp(v("j"), iri(wild::IN_WORKFLOW_INSTANCE), v("i")),
            tp(v("j"), iri(wild::HAS_STATE), iri(wild::DONE)),
        ],
        "i",
    );
}

/// Patterns shared by every composite rule: an active instance `js` of a
/// composite `s` of the given kind, inside workflow instance `i`.
fn active_composite(kind: &str, s: &str, js: &str) -> Vec<TriplePattern> {
    vec![
        tp(v(s), iri(RDF_TYPE), iri(kind)),
        tp(v(js), iri(wild::ACTIVITY_INSTANCE_OF), v(s)),
        tp(v(js), iri(wild::IN_WORKFLOW_INSTANCE), v("i")),
        tp(v(js), iri(wild::HAS_STATE), iri(wild::ACTIVE)),
    ]
}

/// `jx` is the instance of activity `x` in workflow instance `i`, holding
/// the given state.
fn instance_in_state(jx: &str, x: &str, state: &str) -> Vec<TriplePattern> {
    vec![
        tp(v(jx), iri(wild::ACTIVITY_INSTANCE_OF), v(x)),
        tp(v(jx), iri(wild::IN_WORKFLOW_INSTANCE), v("i")),
        tp(v(jx), iri(wild::HAS_STATE), iri(state)),
    ]
}

fn sequence_rules(b: &mut ProgramBuilder) {
    // First child becomes active once the sequence instance is.
    let mut body = active_composite(wild::SEQUENTIAL_ACTIVITY, "s", "js");
    body.push(tp(v("s"), iri(wild::HAS_CHILD_ACTIVITIES), v("l")));
    body.push(tp(v("l"), iri(crate::rdf::RDF_FIRST), v("a")));
    body.extend(instance_in_state("ja", "a", wild::INITIALISED));
    b.put_state(body, "ja", wild::ACTIVE);

    // A done child activates its successor.
    let mut body = active_composite(wild::SEQUENTIAL_ACTIVITY, "s", "js");
    body.push(tp(v("s"), iri(wild::CHILD_CELL), v("l")));
    body.push(tp(v("l"), iri(crate::rdf::RDF_FIRST), v("c")));
    body.push(tp(v("l"), iri(crate::rdf::RDF_REST), v("l2")));
    body.push(tp(v("l2"), iri(crate::rdf::RDF_FIRST), v("n")));
    body.extend(instance_in_state("jc", "c", wild::DONE));
    body.extend(instance_in_state("jn", "n", wild::INITIALISED));
    b.put_state(body, "jn", wild::ACTIVE);

    // The sequence is done when its last child is.
    let mut body = active_composite(wild::SEQUENTIAL_ACTIVITY, "s", "js");
    body.push(tp(v("s"), iri(wild::CHILD_CELL), v("l")));
    body.push(tp(v("l"), iri(crate::rdf::RDF_FIRST), v("c")));
    body.push(tp(v("l"), iri(crate::rdf::RDF_REST), iri(RDF_NIL)));
    body.extend(instance_in_state("jc", "c", wild::DONE));
    b.put_done_with_twin(body, "js");
}

fn parallel_rules(b: &mut ProgramBuilder) {
    // Every child of an active parallel instance starts at once.
    let mut body = active_composite(wild::PARALLEL_ACTIVITY, "s", "js");
    body.push(tp(v("s"), iri(wild::HAS_CHILD_ACTIVITY), v("c")));
    body.extend(instance_in_state("jc", "c", wild::INITIALISED));
    b.put_state(body, "jc", wild::ACTIVE);

    // Completion walks the child list front to back: an instance carries
    // the marker when it and everything before it in the list are done.
    let marker = |j: &str| {
        tp(
            v(j),
            iri(wild::DONE_FROM_LIST_ITEM_ONE),
            PatternTerm::Term(Term::lit_bool(true)),
        )
    };
    b.derive(
        vec![
            tp(v("s"), iri(RDF_TYPE), iri(wild::PARALLEL_ACTIVITY)),
            tp(v("s"), iri(wild::HAS_CHILD_ACTIVITIES), v("l")),
            tp(v("l"), iri(crate::rdf::RDF_FIRST), v("c")),
            tp(v("jc"), iri(wild::ACTIVITY_INSTANCE_OF), v("c")),
            tp(v("jc"), iri(wild::HAS_STATE), iri(wild::DONE)),
        ],
        vec![marker("jc")],
    );
    let mut body = vec![
        tp(v("s"), iri(RDF_TYPE), iri(wild::PARALLEL_ACTIVITY)),
        tp(v("s"), iri(wild::CHILD_CELL), v("l")),
        tp(v("l"), iri(crate::rdf::RDF_FIRST), v("c")),
        tp(v("l"), iri(crate::rdf::RDF_REST), v("l2")),
        tp(v("l2"), iri(crate::rdf::RDF_FIRST), v("n")),
        tp(v("jc"), iri(wild::ACTIVITY_INSTANCE_OF), v("c")),
        tp(v("jc"), iri(wild::IN_WORKFLOW_INSTANCE), v("i")),
        marker("jc"),
    ];
    body.extend(instance_in_state("jn", "n", wild::DONE));
    b.derive(body, vec![marker("jn")]);

    // Marker on the last child's instance closes the parallel.
    let mut body = active_composite(wild::PARALLEL_ACTIVITY, "s", "js");
    body.push(tp(v("s"), iri(wild::CHILD_CELL), v("l")));
    body.push(tp(v("l"), iri(crate::rdf::RDF_FIRST), v("c")));
    body.push(tp(v("l"), iri(crate::rdf::RDF_REST), iri(RDF_NIL)));
    body.push(tp(v("jc"), iri(wild::ACTIVITY_INSTANCE_OF), v("c")));
    body.push(tp(v("jc"), iri(wild::IN_WORKFLOW_INSTANCE), v("i")));
    body.push(marker("jc"));
    b.put_done_with_twin(body, "js");
}

fn conditional_rules(b: &mut ProgramBuilder) {
    // The branch choice only falls once every branch instance has been
    // observed initialised; the marker walks the list exactly like the
    // parallel completion marker does.
    let marker = |j: &str| {
        tp(
            v(j),
            iri(wild::INITIALISED_FROM_LIST_ITEM_ONE),
            PatternTerm::Term(Term::lit_bool(true)),
        )
    };
    b.derive(
        vec![
            tp(v("s"), iri(RDF_TYPE), iri(wild::CONDITIONAL_ACTIVITY)),
            tp(v("s"), iri(wild::HAS_CHILD_ACTIVITIES), v("l")),
            tp(v("l"), iri(crate::rdf::RDF_FIRST), v("c")),
            tp(v("jc"), iri(wild::ACTIVITY_INSTANCE_OF), v("c")),
            tp(v("jc"), iri(wild::HAS_STATE), iri(wild::INITIALISED)),
        ],
        vec![marker("jc")],
    );
    let mut body = vec![
        tp(v("s"), iri(RDF_TYPE), iri(wild::CONDITIONAL_ACTIVITY)),
        tp(v("s"), iri(wild::CHILD_CELL), v("l")),
        tp(v("l"), iri(crate::rdf::RDF_FIRST), v("c")),
        tp(v("l"), iri(crate::rdf::RDF_REST), v("l2")),
        tp(v("l2"), iri(crate::rdf::RDF_FIRST), v("n")),
        tp(v("jc"), iri(wild::ACTIVITY_INSTANCE_OF), v("c")),
        tp(v("jc"), iri(wild::IN_WORKFLOW_INSTANCE), v("i")),
        marker("jc"),
    ];
    body.extend(instance_in_state("jn", "n", wild::INITIALISED));
    b.derive(body, vec![marker("jn")]);

    // Branches whose precondition holds are activated.
    let mut body = active_composite(wild::CONDITIONAL_ACTIVITY, "s", "js");
    body.push(tp(v("s"), iri(wild::CHILD_CELL), v("lz")));
    body.push(tp(v("lz"), iri(crate::rdf::RDF_FIRST), v("d")));
    body.push(tp(v("lz"), iri(crate::rdf::RDF_REST), iri(RDF_NIL)));
    body.push(tp(v("jd"), iri(wild::ACTIVITY_INSTANCE_OF), v("d")));
    body.push(tp(v("jd"), iri(wild::IN_WORKFLOW_INSTANCE), v("i")));
    body.push(marker("jd"));
    body.push(tp(v("s"), iri(wild::HAS_CHILD_ACTIVITY), v("c")));
    body.push(tp(v("c"), iri(wild::HAS_PRECONDITION), v("p")));
    body.push(tp(
        v("p"),
        iri(sp::HAS_BOOLEAN_RESULT),
        PatternTerm::Term(Term::lit_bool(true)),
    ));
    body.extend(instance_in_state("jc", "c", wild::INITIALISED));
    b.put_state(body, "jc", wild::ACTIVE);

    // Any done branch closes the conditional.
    let mut body = active_composite(wild::CONDITIONAL_ACTIVITY, "s", "js");
    body.push(tp(v("s"), iri(wild::HAS_CHILD_ACTIVITY), v("c")));
    body.extend(instance_in_state("jc", "c", wild::DONE));
    b.put_done_with_twin(body, "js");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;
    use crate::rules::parse_program;
    use crate::semantics::WorkflowModel;

    fn sample_model() -> WorkflowModel {
        let text = r#"
        @prefix wild: <http://purl.org/wild/vocab#> .
        @prefix sp: <http://spinrdf.org/sp#> .
        @prefix http: <http://www.w3.org/2011/http#> .
        @prefix httpm: <http://www.w3.org/2011/http-methods#> .
        <#wf> a wild:Workflow ; wild:hasBehaviour <#root> .
        <#root> a wild:SequentialActivity ; wild:hasChildActivities ( <#a> ) .
        <#a> a wild:AtomicActivity ;
            wild:hasPostcondition [ sp:text "ASK { ?s ?p ?o }" ] ;
            wild:hasHttpRequest [
                http:mthd httpm:PUT ;
                http:requestURI <http://dev.test/light> ;
                http:body "<> <http://www.w3.org/ns/ssn/hasValue> \"on\" ."
            ] .
        "#;
        let g = parse_turtle(text, Some("http://m.test/wf")).unwrap();
        WorkflowModel::from_graph(&g, &Term::iri("http://m.test/wf#wf")).unwrap()
    }

    #[test]
    fn generated_program_is_safe_and_exports() {
        let model = sample_model();
        let program = rule_program(
            Mode::Execute,
            &["http://b.test/".to_string()],
            "http://i.test/instances/",
            &[&model],
        );
        program.validate().unwrap();
        let text = program.to_n3();
        let back = parse_program(&text, None).unwrap();
        assert_eq!(back.derivations, program.derivations);
        assert_eq!(back.requests, program.requests);
    }

    #[test]
    fn execute_mode_adds_exactly_the_model_requests() {
        let model = sample_model();
        let seeds = vec!["http://b.test/".to_string()];
        let check = rule_program(Mode::Check, &seeds, "http://i.test/", &[&model]);
        let exec = rule_program(Mode::Execute, &seeds, "http://i.test/", &[&model]);
        assert_eq!(exec.requests.len(), check.requests.len() + 1);
        assert_eq!(exec.derivations, check.derivations);
        let extra = exec.requests.last().unwrap();
        assert_eq!(extra.method, Method::Put);
        assert_eq!(extra.target, iri("http://dev.test/light"));
        assert_eq!(extra.payload.len(), 1);
    }

    #[test]
    fn every_done_put_has_a_twin_derivation() {
        let program = rule_program(Mode::Check, &[], "http://i.test/", &[]);
        let done = iri(wild::DONE);
        let done_puts: Vec<&RequestRule> = program
            .requests
            .iter()
            .filter(|r| {
                r.method == Method::Put
                    && r.payload.iter().any(|t| t.object == done)
            })
            .collect();
        // Atomic, workflow, sequence, parallel, conditional completion.
        assert_eq!(done_puts.len(), 5);
        for put in done_puts {
            assert!(
                program
                    .derivations
                    .iter()
                    .any(|d| d.body == put.body && d.head == put.payload),
                "missing twin for a done PUT"
            );
        }
        // Activations must not have twins: an activated instance must not
        // act before its state has been read back from the server.
        let active = iri(wild::ACTIVE);
        for put in program
            .requests
            .iter()
            .filter(|r| r.method == Method::Put && r.payload.iter().any(|t| t.object == active))
        {
            assert!(
                !program.derivations.iter().any(|d| d.body == put.body),
                "activation rule has a twin"
            );
        }
    }

    #[test]
    fn check_mode_requests_touch_only_lifecycle_state() {
        let program = rule_program(Mode::Check, &[], "http://i.test/", &[]);
        for r in &program.requests {
            if r.method == Method::Get {
                continue;
            }
            for t in &r.payload {
                let is_lifecycle = t.predicate == iri(wild::HAS_STATE)
                    || t.predicate == iri(wild::ACTIVITY_INSTANCE_OF)
                    || t.predicate == iri(wild::IN_WORKFLOW_INSTANCE);
                assert!(is_lifecycle, "unexpected payload triple {t:?}");
            }
        }
    }

    #[test]
    fn seed_rules_fire_unconditionally() {
        let seeds = vec![
            "http://b.test/".to_string(),
            "http://i.test/instances/".to_string(),
        ];
        let program = rule_program(Mode::Check, &seeds, "http://i.test/instances/", &[]);
        let unconditional: Vec<&RequestRule> = program
            .requests
            .iter()
            .filter(|r| r.body.0.is_empty())
            .collect();
        assert_eq!(unconditional.len(), 2);
        assert!(unconditional.iter().all(|r| r.method == Method::Get));
    }
}
