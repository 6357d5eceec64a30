//! Condition-action rules: derivation rules that extend working memory and
//! request rules whose heads describe HTTP requests.
//!
//! A rule file is Turtle plus `{ body } => { head }` implications. A head
//! either derives triples or describes exactly one request as a node with
//! `http:mthd`, `http:requestURI`, and optionally `http:body { ... }` and
//! `wild:onBehalfOf`; mixing both in one head is rejected. Every variable
//! used in a head must be bound by the body, so rule firing never invents
//! terms. Blank nodes inside rule formulas are read as variables.

mod eval;

pub use eval::{
    fire_request_rules, saturate, saturate_with, RequestClass, RequestInstance, WmDerive,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::http::Method;
use crate::query::{Bgp, PatternTerm, TriplePattern, Variable};
use crate::rdf::{
    escape_literal, ground_triple, parse_document, Dialect, Graph, PStatement, PTerm, PTriple,
    RdfError, Term,
};
use crate::vocab::{httpv, wild};

#[derive(Debug, thiserror::Error)]
pub enum RuleError {
    #[error(transparent)]
    Rdf(#[from] RdfError),
    #[error("line {line}, col {col}: variable ?{var} occurs in the rule head but is not bound by the body")]
    UnsafeVariable { var: String, line: u32, col: u32 },
    #[error("line {line}, col {col}: a blank node in a rule head would mint a fresh resource per firing; name it with an IRI instead")]
    BlankInHead { line: u32, col: u32 },
    #[error("line {line}, col {col}: rule head mixes derived triples with a request; split it into two rules")]
    MixedHead { line: u32, col: u32 },
    #[error("line {line}, col {col}: rule head is empty")]
    EmptyHead { line: u32, col: u32 },
    #[error("line {line}, col {col}: {msg}")]
    MalformedRequest { line: u32, col: u32, msg: String },
    #[error("line {line}, col {col}: {msg}")]
    MisplacedFormula { line: u32, col: u32, msg: String },
}

/// `{ body } => { head triples }`; firing adds the instantiated head to
/// working memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationRule {
    pub body: Bgp,
    pub head: Vec<TriplePattern>,
}

/// `{ body } => { request }`; firing emits an HTTP request per solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestRule {
    pub body: Bgp,
    pub method: Method,
    /// IRI or body-bound variable.
    pub target: PatternTerm,
    /// Instantiated per solution to form the request body; empty for GET.
    pub payload: Vec<TriplePattern>,
    /// The activity instance the request acts for, if any.
    pub provenance: Option<PatternTerm>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    /// Base IRI payload serialization relativizes against.
    pub base: Option<String>,
    pub prefixes: BTreeMap<String, String>,
    pub assertions: Graph,
    pub derivations: Vec<DerivationRule>,
    pub requests: Vec<RequestRule>,
}

impl Program {
    /// Checks rule safety for programs built in code; parsed programs are
    /// checked during parsing.
    pub fn validate(&self) -> Result<(), RuleError> {
        for rule in &self.derivations {
            let bound = body_vars(&rule.body);
            if rule.head.is_empty() {
                return Err(RuleError::EmptyHead { line: 0, col: 0 });
            }
            for pattern in &rule.head {
                for v in pattern.variables() {
                    if !bound.contains(v) {
                        return Err(unsafe_var(v, 0, 0));
                    }
                }
            }
        }
        for rule in &self.requests {
            let bound = body_vars(&rule.body);
            let mut head_vars: Vec<&Variable> = Vec::new();
            if let Some(v) = rule.target.as_var() {
                head_vars.push(v);
            }
            if let Some(PatternTerm::Var(v)) = &rule.provenance {
                head_vars.push(v);
            }
            for pattern in &rule.payload {
                head_vars.extend(pattern.variables());
            }
            for v in head_vars {
                if !bound.contains(v) {
                    return Err(unsafe_var(v, 0, 0));
                }
            }
            if rule.method.is_get() && !rule.payload.is_empty() {
                return Err(RuleError::MalformedRequest {
                    line: 0,
                    col: 0,
                    msg: "a GET request cannot carry a body".to_string(),
                });
            }
            if let PatternTerm::Term(t) = &rule.target {
                if !t.is_iri() {
                    return Err(RuleError::MalformedRequest {
                        line: 0,
                        col: 0,
                        msg: "request target must be an IRI or a variable".to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Serializes the program back to rule-file syntax. Assertions keep the
    /// program's prefixes; rules are written with absolute IRIs.
    pub fn to_n3(&self) -> String {
        let mut out = String::new();
        let mut assertions = self.assertions.clone();
        for (p, ns) in &self.prefixes {
            assertions.add_prefix(p, ns);
        }
        if let Some(base) = &self.base {
            let _ = writeln!(out, "@base <{base}> .");
        }
        out.push_str(&crate::rdf::serialize_turtle(&assertions));
        for rule in &self.derivations {
            if !out.is_empty() && !out.ends_with("\n\n") {
                out.push('\n');
            }
            let _ = write!(out, "{}\n=> {{\n", render_body(&rule.body));
            for pattern in &rule.head {
                let _ = writeln!(out, "    {}", render_pattern(pattern));
            }
            out.push_str("} .\n");
        }
        for rule in &self.requests {
            if !out.is_empty() && !out.ends_with("\n\n") {
                out.push('\n');
            }
            let _ = write!(out, "{}\n=> {{\n", render_body(&rule.body));
            let req = request_node_name(rule);
            let _ = writeln!(out, "    ?{req} <{}> <{}> .", httpv::MTHD, rule.method.iri());
            let _ = writeln!(
                out,
                "    ?{req} <{}> {} .",
                httpv::REQUEST_URI,
                render_pattern_term(&rule.target)
            );
            if let Some(p) = &rule.provenance {
                let _ = writeln!(
                    out,
                    "    ?{req} <{}> {} .",
                    wild::ON_BEHALF_OF,
                    render_pattern_term(p)
                );
            }
            if !rule.payload.is_empty() {
                let _ = writeln!(out, "    ?{req} <{}> {{", httpv::BODY);
                for pattern in &rule.payload {
                    let _ = writeln!(out, "        {}", render_pattern(pattern));
                }
                out.push_str("    } .\n");
            }
            out.push_str("} .\n");
        }
        out
    }
}

fn body_vars(body: &Bgp) -> BTreeSet<Variable> {
    body.variables().into_iter().cloned().collect()
}

fn unsafe_var(v: &Variable, line: u32, col: u32) -> RuleError {
    if v.name().starts_with("_bn") || v.name().starts_with("_anon") {
        RuleError::BlankInHead { line, col }
    } else {
        RuleError::UnsafeVariable { var: v.name().to_string(), line, col }
    }
}

fn request_node_name(rule: &RequestRule) -> String {
    let used = body_vars(&rule.body);
    let mut name = "_req".to_string();
    let mut n = 0;
    while used.contains(&Variable::new(&name)) {
        name = format!("_req{n}");
        n += 1;
    }
    name
}

fn render_body(body: &Bgp) -> String {
    let mut out = String::from("{\n");
    for pattern in &body.0 {
        let _ = writeln!(out, "    {}", render_pattern(pattern));
    }
    out.push('}');
    out
}

fn render_pattern(p: &TriplePattern) -> String {
    format!(
        "{} {} {} .",
        render_pattern_term(&p.subject),
        render_pattern_term(&p.predicate),
        render_pattern_term(&p.object)
    )
}

fn render_pattern_term(pt: &PatternTerm) -> String {
    match pt {
        PatternTerm::Var(v) => format!("?{}", v.name()),
        PatternTerm::Term(Term::Iri(i)) => format!("<{i}>"),
        PatternTerm::Term(Term::Blank(l)) => format!("_:{l}"),
        PatternTerm::Term(Term::Literal(l)) => {
            let mut s = format!("\"{}\"", escape_literal(l.lexical()));
            if let Some(lang) = l.lang() {
                let _ = write!(s, "@{lang}");
            } else if let Some(dt) = l.datatype() {
                let _ = write!(s, "^^<{dt}>");
            }
            s
        }
    }
}

/// Parses a rule file: prefix and base directives, ground assertions, and
/// implications. `base` seeds IRI resolution unless the document declares
/// its own.
pub fn parse_program(text: &str, base: Option<&str>) -> Result<Program, RuleError> {
    let parsed = parse_document(text, base, Dialect::Rules)?;
    let mut program = Program {
        base: parsed.base,
        prefixes: parsed.prefixes,
        ..Program::default()
    };
    for statement in parsed.statements {
        match statement {
            PStatement::Triples(triples) => {
                for t in &triples {
                    program.assertions.insert(ground_triple(t)?);
                }
            }
            PStatement::Rule { body, head, line, col } => {
                let body = convert_body(&body, line, col)?;
                if head.is_empty() {
                    return Err(RuleError::EmptyHead { line, col });
                }
                if head.iter().any(is_method_triple) {
                    program.requests.push(convert_request(body, &head, line, col)?);
                } else {
                    program.derivations.push(convert_derivation(body, &head, line, col)?);
                }
            }
        }
    }
    Ok(program)
}

fn is_method_triple(t: &PTriple) -> bool {
    matches!(&t.p, PTerm::Term(Term::Iri(i)) if i.as_ref() == httpv::MTHD)
}

fn convert_body(body: &[PTriple], line: u32, col: u32) -> Result<Bgp, RuleError> {
    let mut patterns = Vec::new();
    for t in body {
        patterns.push(convert_pattern(t, line, col, "rule body")?);
    }
    Ok(Bgp(patterns))
}

fn convert_pattern(
    t: &PTriple,
    line: u32,
    col: u32,
    place: &str,
) -> Result<TriplePattern, RuleError> {
    let conv = |p: &PTerm| -> Result<PatternTerm, RuleError> {
        match p {
            PTerm::Term(t) => Ok(PatternTerm::Term(t.clone())),
            PTerm::Var(v) => Ok(PatternTerm::var(v)),
            PTerm::Formula(_) => Err(RuleError::MisplacedFormula {
                line,
                col,
                msg: format!("a formula may only appear as the object of <{}> in a request head, not in a {place}", httpv::BODY),
            }),
        }
    };
    Ok(TriplePattern { subject: conv(&t.s)?, predicate: conv(&t.p)?, object: conv(&t.o)? })
}

fn convert_derivation(
    body: Bgp,
    head: &[PTriple],
    line: u32,
    col: u32,
) -> Result<DerivationRule, RuleError> {
    let bound = body_vars(&body);
    let mut patterns = Vec::new();
    for t in head {
        let pattern = convert_pattern(t, line, col, "derivation head")?;
        for v in pattern.variables() {
            if !bound.contains(v) {
                return Err(unsafe_var(v, line, col));
            }
        }
        patterns.push(pattern);
    }
    Ok(DerivationRule { body, head: patterns })
}

fn convert_request(
    body: Bgp,
    head: &[PTriple],
    line: u32,
    col: u32,
) -> Result<RequestRule, RuleError> {
    let bad = |msg: String| RuleError::MalformedRequest { line, col, msg };
    let method_triples: Vec<&PTriple> = head.iter().filter(|t| is_method_triple(t)).collect();
    if method_triples.len() > 1 {
        return Err(bad("a rule head describes exactly one request".to_string()));
    }
    let node = method_triples[0].s.clone();
    let mut method = None;
    let mut target = None;
    let mut payload = None;
    let mut provenance = None;
    for t in head {
        if t.s != node {
            return Err(RuleError::MixedHead { line, col });
        }
        let PTerm::Term(Term::Iri(pred)) = &t.p else {
            return Err(bad("request head predicates must be IRIs".to_string()));
        };
        match pred.as_ref() {
            p if p == httpv::MTHD => {
                let PTerm::Term(Term::Iri(m)) = &t.o else {
                    return Err(bad("the request method must be an IRI".to_string()));
                };
                method = Some(Method::from_iri(m).ok_or_else(|| {
                    bad(format!("unknown HTTP method <{m}>"))
                })?);
            }
            p if p == httpv::REQUEST_URI => {
                if target.is_some() {
                    return Err(bad("a request has exactly one target".to_string()));
                }
                target = Some(match &t.o {
                    PTerm::Var(v) => PatternTerm::var(v),
                    PTerm::Term(term @ Term::Iri(_)) => PatternTerm::Term(term.clone()),
                    _ => {
                        return Err(bad(
                            "request target must be an IRI or a variable".to_string(),
                        ))
                    }
                });
            }
            p if p == httpv::BODY => {
                if payload.is_some() {
                    return Err(bad("a request has at most one body".to_string()));
                }
                let PTerm::Formula(patterns) = &t.o else {
                    return Err(bad(format!(
                        "the object of <{}> must be a formula",
                        httpv::BODY
                    )));
                };
                let mut converted = Vec::new();
                for pt in patterns {
                    converted.push(convert_pattern(pt, line, col, "request payload")?);
                }
                payload = Some(converted);
            }
            p if p == wild::ON_BEHALF_OF => {
                if provenance.is_some() {
                    return Err(bad("a request acts for at most one instance".to_string()));
                }
                provenance = Some(match &t.o {
                    PTerm::Var(v) => PatternTerm::var(v),
                    PTerm::Term(term) => PatternTerm::Term(term.clone()),
                    PTerm::Formula(_) => {
                        return Err(bad("provenance must be a term".to_string()))
                    }
                });
            }
            other => {
                return Err(bad(format!("unexpected request property <{other}>")));
            }
        }
    }
    let method = method.expect("selected by is_method_triple");
    let Some(target) = target else {
        return Err(bad("request head lacks a target".to_string()));
    };
    let payload = payload.unwrap_or_default();
    if method.is_get() && !payload.is_empty() {
        return Err(bad("a GET request cannot carry a body".to_string()));
    }
    let bound = body_vars(&body);
    let check = |v: &Variable| -> Result<(), RuleError> {
        if bound.contains(v) {
            Ok(())
        } else {
            Err(unsafe_var(v, line, col))
        }
    };
    if let Some(v) = target.as_var() {
        check(v)?;
    }
    if let Some(PatternTerm::Var(v)) = &provenance {
        check(v)?;
    }
    for pattern in &payload {
        for v in pattern.variables() {
            check(v)?;
        }
    }
    Ok(RequestRule { body, method, target, payload, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRELUDE: &str = "\
@prefix : <http://example.org/> .
@prefix http: <http://www.w3.org/2011/http#> .
@prefix httpm: <http://www.w3.org/2011/http-methods#> .
@prefix wild: <http://purl.org/wild/vocab#> .
";

    fn parse(body: &str) -> Result<Program, RuleError> {
        parse_program(&format!("{PRELUDE}{body}"), Some("http://example.org/doc"))
    }

    #[test]
    fn assertions_and_both_rule_kinds_parse() {
        let p = parse(
            ":a :p :b .\n\
             { ?x :p ?y . } => { ?y :q ?x . } .\n\
             { ?x :needs ?t . } => { [] http:mthd httpm:GET ; http:requestURI ?t . } .\n",
        )
        .unwrap();
        assert_eq!(p.assertions.len(), 1);
        assert_eq!(p.derivations.len(), 1);
        assert_eq!(p.requests.len(), 1);
        assert_eq!(p.requests[0].method, Method::Get);
        assert_eq!(p.requests[0].target, PatternTerm::var("t"));
    }

    #[test]
    fn request_with_payload_and_provenance() {
        let p = parse(
            "{ ?j :state :ready . } => {\n\
               [] http:mthd httpm:PUT ;\n\
                  http:requestURI ?j ;\n\
                  wild:onBehalfOf ?j ;\n\
                  http:body { ?j :state :done . } .\n\
             } .\n",
        )
        .unwrap();
        let r = &p.requests[0];
        assert_eq!(r.method, Method::Put);
        assert_eq!(r.payload.len(), 1);
        assert_eq!(r.provenance, Some(PatternTerm::var("j")));
    }

    #[test]
    fn unsafe_head_variable_is_named() {
        let e = parse("{ ?x :p :b . } => { ?x :q ?z . } .").unwrap_err();
        match e {
            RuleError::UnsafeVariable { var, .. } => assert_eq!(var, "z"),
            other => panic!("expected UnsafeVariable, got {other:?}"),
        }
    }

    #[test]
    fn blank_in_head_is_rejected_distinctly() {
        let e = parse("{ ?x :p :b . } => { _:n :q ?x . } .").unwrap_err();
        assert!(matches!(e, RuleError::BlankInHead { .. }), "{e:?}");
    }

    #[test]
    fn mixed_head_rejected() {
        let e = parse(
            "{ ?x :p ?t . } => { ?x :q :b . [] http:mthd httpm:GET ; http:requestURI ?t . } .",
        )
        .unwrap_err();
        assert!(matches!(e, RuleError::MixedHead { .. }), "{e:?}");
    }

    #[test]
    fn get_with_body_rejected() {
        let e = parse(
            "{ ?x :p ?t . } => { [] http:mthd httpm:GET ; http:requestURI ?t ; http:body { ?x :p ?t . } . } .",
        )
        .unwrap_err();
        assert!(matches!(e, RuleError::MalformedRequest { .. }), "{e:?}");
    }

    #[test]
    fn formula_in_body_rejected() {
        let e = parse("{ ?x :p { ?y :q :b . } . } => { ?x :q :b . } .").unwrap_err();
        assert!(matches!(e, RuleError::MisplacedFormula { .. }), "{e:?}");
    }

    #[test]
    fn unknown_method_rejected() {
        let e = parse(
            "{ ?x :p ?t . } => { [] http:mthd httpm:PATCH ; http:requestURI ?t . } .",
        )
        .unwrap_err();
        assert!(matches!(e, RuleError::MalformedRequest { .. }), "{e:?}");
    }

    #[test]
    fn empty_body_rule_is_allowed() {
        let p = parse("{ } => { [] http:mthd httpm:GET ; http:requestURI :seed . } .").unwrap();
        assert!(p.requests[0].body.0.is_empty());
        assert!(matches!(&p.requests[0].target, PatternTerm::Term(Term::Iri(i)) if i.as_ref() == "http://example.org/seed"));
    }

    #[test]
    fn empty_head_rejected() {
        let e = parse("{ ?x :p :b . } => { } .").unwrap_err();
        assert!(matches!(e, RuleError::EmptyHead { .. }), "{e:?}");
    }

    #[test]
    fn roundtrips_through_export() {
        let text = format!(
            "{PRELUDE}\
             :a :p :b .\n\
             {{ ?x :p ?y . }} => {{ ?y :q ?x . }} .\n\
             {{ ?j :state :ready . }} => {{\n\
               [] http:mthd httpm:PUT ; http:requestURI ?j ; wild:onBehalfOf ?j ;\n\
                  http:body {{ ?j :state :done . :extra :p 4 . }} .\n\
             }} .\n\
             {{ }} => {{ [] http:mthd httpm:GET ; http:requestURI <http://example.org/seed> . }} .\n"
        );
        let p = parse_program(&text, Some("http://example.org/doc")).unwrap();
        let exported = p.to_n3();
        let p2 = parse_program(&exported, Some("http://example.org/doc")).unwrap();
        assert_eq!(p.assertions, p2.assertions);
        assert_eq!(p.derivations, p2.derivations);
        assert_eq!(p.requests, p2.requests);
    }
}
