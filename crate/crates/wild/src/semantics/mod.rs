//! Workflow vocabulary semantics: the ontology graph every cycle starts
//! from, extraction and validation of workflow models, the derivation
//! rules that unfold schema entailment and child lists inside working
//! memory, and the materializer that evaluates stored ASK conditions.
//!
//! The operational rules built on top of these live in [`rules`].

pub mod rules;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

use crate::http::Method;
use crate::query::{parse_ask, solve, AskQuery, TripleIndex};
use crate::rdf::{parse_turtle, read_list, Graph, Term, Triple, RDF_TYPE};
use crate::rules::{parse_program, DerivationRule};
use crate::vocab::{httpv, sp, wild};

pub use rules::{rule_program, Mode, RULE_BASE};

const ONTOLOGY_TTL: &str = include_str!("ontology.ttl");

/// The class and property axioms shared by every working memory.
pub fn ontology() -> &'static Graph {
    static G: OnceLock<Graph> = OnceLock::new();
    G.get_or_init(|| parse_turtle(ONTOLOGY_TTL, None).expect("embedded ontology parses"))
}

/// Schema entailment (subclass, subproperty, domain, range, inverse),
/// child-list membership, and instance-to-activity reachability. These
/// run inside every cycle's working memory alongside the workflow rules.
pub fn builtin_derivations() -> &'static [DerivationRule] {
    static RULES: OnceLock<Vec<DerivationRule>> = OnceLock::new();
    RULES.get_or_init(|| {
        parse_program(BUILTIN_RULES, None)
            .expect("embedded derivation rules parse")
            .derivations
    })
}

const BUILTIN_RULES: &str = r#"
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix wild: <http://purl.org/wild/vocab#> .

{ ?c rdfs:subClassOf ?d . ?x rdf:type ?c . } => { ?x rdf:type ?d . } .
{ ?c rdfs:subClassOf ?d . ?d rdfs:subClassOf ?e . } => { ?c rdfs:subClassOf ?e . } .
{ ?p rdfs:subPropertyOf ?q . ?x ?p ?y . } => { ?x ?q ?y . } .
{ ?p rdfs:subPropertyOf ?q . ?q rdfs:subPropertyOf ?r . } => { ?p rdfs:subPropertyOf ?r . } .
{ ?p rdfs:domain ?c . ?x ?p ?y . } => { ?x rdf:type ?c . } .
{ ?p rdfs:range ?c . ?x ?p ?y . } => { ?y rdf:type ?c . } .
{ ?p owl:inverseOf ?q . } => { ?q owl:inverseOf ?p . } .
{ ?p owl:inverseOf ?q . ?x ?p ?y . } => { ?y ?q ?x . } .

# Walk child lists: every cons cell of a composite's list becomes a
# wild:childCell, and each cell's rdf:first a wild:hasChildActivity.
{ ?x wild:hasChildActivities ?l . } => { ?x wild:childCell ?l . } .
{ ?x wild:childCell ?l . ?l rdf:rest ?m . } => { ?x wild:childCell ?m . } .
{ ?x wild:childCell ?l . ?l rdf:first ?c . } => { ?x wild:hasChildActivity ?c . } .

# Activities a workflow instance is responsible for.
{ ?i wild:workflowInstanceOf ?m . ?m wild:hasBehaviour ?a . } => { ?i wild:hasDescendantActivity ?a . } .
{ ?i wild:hasDescendantActivity ?a . ?a wild:hasChildActivity ?c . } => { ?i wild:hasDescendantActivity ?c . } .
"#;

/// Derives `sp:hasBooleanResult true` for every stored pre- or
/// postcondition whose ASK query holds against working memory. Nothing is
/// derived for conditions that do not hold, so the derivation stays
/// monotone as the memory grows.
///
/// The number of stored conditions grows with the number of models in
/// play, so everything here is amortized: conditions and their texts are
/// collected in two passes over the memory, parsed queries are cached by
/// text, and all evaluations share one index over the memory.
#[derive(Default)]
pub struct AskMaterializer {
    warned: Mutex<BTreeSet<String>>,
    parsed: Mutex<HashMap<String, Option<AskQuery>>>,
}

impl AskMaterializer {
    pub fn new() -> Self {
        Self::default()
    }
}

impl crate::rules::WmDerive for AskMaterializer {
    fn derive(&self, wm: &Graph) -> Vec<Triple> {
        let has_pre = Term::iri(wild::HAS_PRECONDITION);
        let has_post = Term::iri(wild::HAS_POSTCONDITION);
        let text = Term::iri(sp::TEXT);
        let conditions: BTreeSet<&Term> = wm
            .iter()
            .filter(|t| t.predicate == has_pre || t.predicate == has_post)
            .map(|t| &t.object)
            .collect();
        if conditions.is_empty() {
            return Vec::new();
        }
        let texts: Vec<(&Term, &str)> = wm
            .iter()
            .filter(|t| t.predicate == text && conditions.contains(&t.subject))
            .filter_map(|t| match &t.object {
                Term::Literal(lit) => Some((&t.subject, lit.lexical())),
                _ => None,
            })
            .collect();
        let idx = TripleIndex::from_graph(wm);
        let mut parsed = self.parsed.lock().unwrap();
        let mut out = Vec::new();
        for (cond, lexical) in texts {
            let query = parsed.entry(lexical.to_string()).or_insert_with(|| {
                match parse_ask(lexical) {
                    Ok(query) => Some(query),
                    Err(e) => {
                        let mut warned = self.warned.lock().unwrap();
                        if warned.insert(lexical.to_string()) {
                            log::warn!("condition {cond} has an unusable ASK query: {e}");
                        }
                        None
                    }
                }
            });
            let Some(query) = query else { continue };
            let mut holds = false;
            solve(&query.pattern.0, &idx, &mut |_| {
                holds = true;
                false
            });
            if holds {
                out.push(
                    Triple::new(
                        cond.clone(),
                        Term::iri(sp::HAS_BOOLEAN_RESULT),
                        Term::lit_bool(true),
                    )
                    .unwrap(),
                );
            }
        }
        out
    }

    fn name(&self) -> &str {
        "ask-conditions"
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("workflow model {workflow} is invalid:\n{}", report.violations.join("\n"))]
    Invalid {
        workflow: Term,
        report: ValidationReport,
    },
}

/// Static checks on one workflow model.
#[derive(Debug, Default, Clone)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ActivityKind {
    Atomic,
    Sequential,
    Parallel,
    Conditional,
}

impl ActivityKind {
    fn from_class(iri: &str) -> Option<Self> {
        match iri {
            wild::ATOMIC_ACTIVITY => Some(ActivityKind::Atomic),
            wild::SEQUENTIAL_ACTIVITY => Some(ActivityKind::Sequential),
            wild::PARALLEL_ACTIVITY => Some(ActivityKind::Parallel),
            wild::CONDITIONAL_ACTIVITY => Some(ActivityKind::Conditional),
            _ => None,
        }
    }

    pub fn is_composite(self) -> bool {
        self != ActivityKind::Atomic
    }
}

/// A stored condition: the node carrying `sp:text` and the query text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub node: Term,
    pub text: String,
}

/// The world-facing request an atomic activity performs when executed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelRequest {
    pub method: Method,
    pub target: String,
    pub payload: Graph,
}

#[derive(Debug, Clone)]
pub struct ActivityNode {
    pub iri: Term,
    pub kind: ActivityKind,
    /// Child activities in list order; empty for atomics.
    pub children: Vec<Term>,
    pub precondition: Option<Condition>,
    pub postcondition: Option<Condition>,
    pub request: Option<ModelRequest>,
}

/// A validated workflow model extracted from a graph.
#[derive(Debug, Clone)]
pub struct WorkflowModel {
    pub iri: Term,
    pub root: Term,
    pub nodes: BTreeMap<Term, ActivityNode>,
}

impl WorkflowModel {
    /// Extracts and validates the model rooted at `workflow`'s behaviour.
    pub fn from_graph(g: &Graph, workflow: &Term) -> Result<Self, ModelError> {
        let (model, report) = extract(g, workflow);
        match model {
            Some(m) if report.is_valid() => Ok(m),
            _ => Err(ModelError::Invalid {
                workflow: workflow.clone(),
                report,
            }),
        }
    }

    pub fn activity(&self, iri: &Term) -> Option<&ActivityNode> {
        self.nodes.get(iri)
    }

    pub fn atomics(&self) -> impl Iterator<Item = &ActivityNode> {
        self.nodes.values().filter(|n| n.kind == ActivityKind::Atomic)
    }
}

/// Checks `workflow`'s model without requiring it to be valid.
pub fn validate_model(g: &Graph, workflow: &Term) -> ValidationReport {
    extract(g, workflow).1
}

fn extract(g: &Graph, workflow: &Term) -> (Option<WorkflowModel>, ValidationReport) {
    let mut report = ValidationReport::default();
    let has_behaviour = Term::iri(wild::HAS_BEHAVIOUR);
    let behaviours: Vec<&Term> = g.objects(workflow, &has_behaviour).collect();
    let root = match behaviours.as_slice() {
        [] => {
            report
                .violations
                .push(format!("{workflow} has no wild:hasBehaviour"));
            return (None, report);
        }
        [one] => (*one).clone(),
        many => {
            report.violations.push(format!(
                "{workflow} has {} behaviours; a model has exactly one",
                many.len()
            ));
            return (None, report);
        }
    };

    let mut nodes = BTreeMap::new();
    let mut queue = vec![root.clone()];
    let mut seen: BTreeSet<Term> = queue.iter().cloned().collect();
    while let Some(activity) = queue.pop() {
        let node = extract_node(g, &activity, &mut report);
        for child in &node.children {
            if !seen.insert(child.clone()) {
                report.violations.push(format!(
                    "{child} appears more than once in the activity tree of {workflow}"
                ));
                continue;
            }
            queue.push(child.clone());
        }
        if node.kind == ActivityKind::Conditional {
            for child in &node.children {
                let pre = Term::iri(wild::HAS_PRECONDITION);
                if g.objects(child, &pre).next().is_none() {
                    report.violations.push(format!(
                        "{child} is a conditional branch of {activity} but has no precondition"
                    ));
                }
            }
            if node.children.len() > 1 {
                report.warnings.push(format!(
                    "branch preconditions of {activity} are not checked for mutual exclusivity"
                ));
            }
        }
        nodes.insert(activity, node);
    }

    let model = WorkflowModel {
        iri: workflow.clone(),
        root,
        nodes,
    };
    (Some(model), report)
}

fn extract_node(g: &Graph, activity: &Term, report: &mut ValidationReport) -> ActivityNode {
    let rdf_type = Term::iri(RDF_TYPE);
    let kinds: BTreeSet<ActivityKind> = g
        .objects(activity, &rdf_type)
        .filter_map(|t| t.as_iri().and_then(ActivityKind::from_class))
        .collect();
    let kind = match kinds.len() {
        0 => {
            report.violations.push(format!(
                "{activity} is not typed as an atomic, sequential, parallel, or conditional activity"
            ));
            ActivityKind::Atomic
        }
        1 => *kinds.iter().next().unwrap(),
        _ => {
            report
                .violations
                .push(format!("{activity} has more than one activity type"));
            *kinds.iter().next().unwrap()
        }
    };

    let has_children = Term::iri(wild::HAS_CHILD_ACTIVITIES);
    let lists: Vec<&Term> = g.objects(activity, &has_children).collect();
    let mut children = Vec::new();
    if kind == ActivityKind::Atomic {
        if !lists.is_empty() {
            report
                .violations
                .push(format!("{activity} is atomic but declares child activities"));
        }
    } else {
        match lists.as_slice() {
            [] => report
                .violations
                .push(format!("{activity} is composite but has no child list")),
            [head] => match read_list(head, g) {
                Ok(items) if items.is_empty() => report
                    .violations
                    .push(format!("{activity} has an empty child list")),
                Ok(items) => {
                    for item in items {
                        if item.is_iri() {
                            children.push(item);
                        } else {
                            report.violations.push(format!(
                                "child {item} of {activity} is not an IRI"
                            ));
                        }
                    }
                }
                Err(e) => report
                    .violations
                    .push(format!("child list of {activity} is malformed: {e}")),
            },
            many => report.violations.push(format!(
                "{activity} has {} child lists; composites have exactly one",
                many.len()
            )),
        }
    }

    let precondition = extract_condition(g, activity, wild::HAS_PRECONDITION, report);
    let postcondition = extract_condition(g, activity, wild::HAS_POSTCONDITION, report);
    if kind == ActivityKind::Atomic && postcondition.is_none() {
        report.warnings.push(format!(
            "{activity} has no postcondition; its instances can never be observed done"
        ));
    }

    let request = extract_request(g, activity, report);

    ActivityNode {
        iri: activity.clone(),
        kind,
        children,
        precondition,
        postcondition,
        request,
    }
}

fn extract_condition(
    g: &Graph,
    activity: &Term,
    property: &str,
    report: &mut ValidationReport,
) -> Option<Condition> {
    let p = Term::iri(property);
    let node = g.object(activity, &p)?.clone();
    let text_p = Term::iri(sp::TEXT);
    let Some(Term::Literal(lit)) = g.object(&node, &text_p) else {
        report.violations.push(format!(
            "condition {node} of {activity} has no sp:text query"
        ));
        return None;
    };
    let text = lit.lexical().to_string();
    if let Err(e) = parse_ask(&text) {
        report.violations.push(format!(
            "condition {node} of {activity} is not a usable ASK query: {e}"
        ));
        return None;
    }
    Some(Condition { node, text })
}

fn extract_request(
    g: &Graph,
    activity: &Term,
    report: &mut ValidationReport,
) -> Option<ModelRequest> {
    let has_request = Term::iri(wild::HAS_HTTP_REQUEST);
    let node = g.object(activity, &has_request)?.clone();
    let mthd = Term::iri(httpv::MTHD);
    let method = match g.object(&node, &mthd).and_then(|m| m.as_iri()) {
        Some(iri) => match Method::from_iri(iri) {
            Some(m) => m,
            None => {
                report
                    .violations
                    .push(format!("request of {activity} has unknown method {iri}"));
                return None;
            }
        },
        None => {
            report
                .violations
                .push(format!("request of {activity} has no http:mthd"));
            return None;
        }
    };
    if method.is_get() {
        report.violations.push(format!(
            "request of {activity} is a GET; activity requests must change state"
        ));
        return None;
    }
    let uri_p = Term::iri(httpv::REQUEST_URI);
    let target = match g.object(&node, &uri_p).and_then(|t| t.as_iri()) {
        Some(iri) => iri.to_string(),
        None => {
            report
                .violations
                .push(format!("request of {activity} has no IRI http:requestURI"));
            return None;
        }
    };
    let body_p = Term::iri(httpv::BODY);
    let payload = match g.object(&node, &body_p) {
        Some(Term::Literal(lit)) => match parse_turtle(lit.lexical(), Some(&target)) {
            Ok(g) => g,
            Err(e) => {
                report
                    .violations
                    .push(format!("request body of {activity} is not Turtle: {e}"));
                return None;
            }
        },
        Some(other) => {
            report.violations.push(format!(
                "request body of {activity} must be a Turtle literal, found {other}"
            ));
            return None;
        }
        None => Graph::new(),
    };
    Some(ModelRequest {
        method,
        target,
        payload,
    })
}
