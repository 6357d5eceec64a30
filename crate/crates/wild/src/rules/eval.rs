//! Forward-chaining evaluation of derivation rules and firing of request
//! rules.
//!
//! Saturation is semi-naive: after a full first pass, each later round only
//! considers rule instantiations that touch at least one triple derived in
//! the previous round. Working memory is a set, so saturation is idempotent
//! and insensitive to rule order; both properties are checked against a
//! naive reference evaluator in the tests.

use std::collections::BTreeSet;

use crate::http::Method;
use crate::query::{solve, solve_seeded, PatternTerm, Solution, TripleIndex, TriplePattern};
use crate::rdf::{Graph, Term, Triple};

use super::{DerivationRule, RequestRule};

/// A non-rule derivation step run between saturation passes; it sees the
/// whole working memory and returns triples to add. Must be monotone: adding
/// triples to the input must never remove triples from the output.
pub trait WmDerive {
    fn derive(&self, wm: &Graph) -> Vec<Triple>;
    /// Name used in logs.
    fn name(&self) -> &str;
}

/// Saturates `wm` under `rules`; returns the number of triples added.
pub fn saturate(wm: &mut Graph, rules: &[DerivationRule]) -> usize {
    saturate_with(wm, rules, &[])
}

/// Saturates under rules and extra derivation steps together: rules run to
/// fixpoint, then each step runs over the result, until nothing is new.
pub fn saturate_with(
    wm: &mut Graph,
    rules: &[DerivationRule],
    builtins: &[&dyn WmDerive],
) -> usize {
    let mut idx = TripleIndex::from_graph(wm);
    let mut added = 0usize;
    loop {
        added += saturate_index(&mut idx, rules, wm);
        let mut new_from_builtins = 0usize;
        for b in builtins {
            for t in b.derive(wm) {
                if idx.insert(t.clone()) {
                    wm.insert(t);
                    new_from_builtins += 1;
                }
            }
        }
        if new_from_builtins == 0 {
            return added;
        }
        added += new_from_builtins;
    }
}

fn saturate_index(idx: &mut TripleIndex, rules: &[DerivationRule], wm: &mut Graph) -> usize {
    let mut delta: Vec<Triple> = Vec::new();
    // First pass: evaluate every rule against the full store.
    for rule in rules {
        let mut sols = Vec::new();
        solve(&rule.body.0, idx, &mut |s| {
            sols.push(s.clone());
            true
        });
        for sol in &sols {
            for t in instantiate(&rule.head, sol) {
                if idx.insert(t.clone()) {
                    wm.insert(t.clone());
                    delta.push(t);
                }
            }
        }
    }
    let mut added = delta.len();
    // Later passes: each new instantiation must use a delta triple in at
    // least one body position; the other positions see the full store.
    while !delta.is_empty() {
        let mut next: Vec<Triple> = Vec::new();
        for rule in rules {
            for pos in 0..rule.body.0.len() {
                for seed in &delta {
                    if !compatible(&rule.body.0[pos], seed) {
                        continue;
                    }
                    let mut sols = Vec::new();
                    solve_seeded(&rule.body.0, pos, seed, idx, &mut |s| {
                        sols.push(s.clone());
                        true
                    });
                    for sol in &sols {
                        for t in instantiate(&rule.head, sol) {
                            if idx.insert(t.clone()) {
                                wm.insert(t.clone());
                                next.push(t);
                            }
                        }
                    }
                }
            }
        }
        added += next.len();
        delta = next;
    }
    added
}

/// Cheap constant check before attempting a seeded join: a pattern whose
/// constants disagree with the seed triple can never unify with it.
fn compatible(pattern: &TriplePattern, seed: &Triple) -> bool {
    let ok = |pt: &PatternTerm, term: &Term| match pt {
        PatternTerm::Term(c) => c == term,
        PatternTerm::Var(_) => true,
    };
    ok(&pattern.subject, &seed.subject)
        && ok(&pattern.predicate, &seed.predicate)
        && ok(&pattern.object, &seed.object)
}

/// Substitutes a solution into head patterns. Instantiations that would not
/// form a valid triple (literal subject, non-IRI predicate) are dropped with
/// a warning; rule safety guarantees every variable is bound.
fn instantiate(patterns: &[TriplePattern], sol: &Solution) -> Vec<Triple> {
    let mut out = Vec::new();
    for p in patterns {
        let s = subst(&p.subject, sol);
        let pr = subst(&p.predicate, sol);
        let o = subst(&p.object, sol);
        match Triple::new(s, pr, o) {
            Ok(t) => out.push(t),
            Err(e) => log::warn!("dropping ill-formed derived triple: {e}"),
        }
    }
    out
}

fn subst(pt: &PatternTerm, sol: &Solution) -> Term {
    match pt {
        PatternTerm::Term(t) => t.clone(),
        PatternTerm::Var(v) => sol
            .get(v)
            .cloned()
            .unwrap_or_else(|| panic!("unbound variable {v} in a checked rule head")),
    }
}

/// Which request rules to fire: the GET rules that drive data acquisition,
/// or everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestClass {
    Get,
    NonGet,
}

impl RequestClass {
    fn admits(&self, m: Method) -> bool {
        match self {
            RequestClass::Get => m.is_get(),
            RequestClass::NonGet => !m.is_get(),
        }
    }
}

/// One instantiated request, payload already ground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestInstance {
    pub method: Method,
    pub target: String,
    pub payload: Graph,
    pub provenance: Option<Term>,
    /// Index of the originating rule in the program's request list.
    pub rule_index: usize,
}

/// Fires the request rules of the given class against `wm`. Duplicate
/// instantiations (same method, target, and payload) collapse to one; the
/// result is sorted by target, then method, so callers see a deterministic
/// order that does not depend on rule order.
pub fn fire_request_rules(
    rules: &[RequestRule],
    wm: &Graph,
    class: RequestClass,
) -> Vec<RequestInstance> {
    let idx = TripleIndex::from_graph(wm);
    let mut seen: BTreeSet<(String, Method, Vec<Triple>)> = BTreeSet::new();
    let mut out = Vec::new();
    for (rule_index, rule) in rules.iter().enumerate() {
        if !class.admits(rule.method) {
            continue;
        }
        let mut sols = Vec::new();
        solve(&rule.body.0, &idx, &mut |s| {
            sols.push(s.clone());
            true
        });
        'sol: for sol in &sols {
            let target = match &rule.target {
                PatternTerm::Term(Term::Iri(i)) => i.to_string(),
                PatternTerm::Term(_) => unreachable!("validated at parse time"),
                PatternTerm::Var(v) => match sol.get(v) {
                    Some(Term::Iri(i)) => i.to_string(),
                    Some(other) => {
                        log::warn!("request target bound to non-IRI {other}; skipping");
                        continue 'sol;
                    }
                    None => unreachable!("unbound target in a checked rule"),
                },
            };
            let mut payload = Graph::new();
            for p in &rule.payload {
                let s = subst(&p.subject, sol);
                let pr = subst(&p.predicate, sol);
                let o = subst(&p.object, sol);
                match Triple::new(s, pr, o) {
                    Ok(t) => {
                        payload.insert(t);
                    }
                    Err(e) => {
                        log::warn!("request payload would be ill-formed ({e}); skipping");
                        continue 'sol;
                    }
                }
            }
            let provenance = rule.provenance.as_ref().map(|p| subst_pattern_term(p, sol));
            let key: (String, Method, Vec<Triple>) =
                (target.clone(), rule.method, payload.iter().cloned().collect());
            if seen.insert(key) {
                out.push(RequestInstance {
                    method: rule.method,
                    target,
                    payload,
                    provenance,
                    rule_index,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        (&a.target, a.method, a.payload.len()).cmp(&(&b.target, b.method, b.payload.len()))
    });
    out
}

fn subst_pattern_term(pt: &PatternTerm, sol: &Solution) -> Term {
    match pt {
        PatternTerm::Term(t) => t.clone(),
        PatternTerm::Var(v) => sol.get(v).cloned().expect("checked by rule safety"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{match_bgp, Bgp, Variable};
    use crate::rules::parse_program;

    fn iri(s: &str) -> Term {
        Term::iri(&format!("http://example.org/{s}"))
    }

    fn triple(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(iri(s), iri(p), iri(o)).unwrap()
    }

    /// Naive reference: applies every rule to the whole graph until nothing
    /// changes. Independent of the index and delta machinery.
    fn naive_saturate(wm: &Graph, rules: &[DerivationRule]) -> Graph {
        let mut g = wm.clone();
        loop {
            let before = g.len();
            for rule in rules {
                for sol in match_bgp(&rule.body, &g) {
                    for p in &rule.head {
                        let s = match &p.subject {
                            PatternTerm::Term(t) => t.clone(),
                            PatternTerm::Var(v) => sol.get(v).unwrap().clone(),
                        };
                        let pr = match &p.predicate {
                            PatternTerm::Term(t) => t.clone(),
                            PatternTerm::Var(v) => sol.get(v).unwrap().clone(),
                        };
                        let o = match &p.object {
                            PatternTerm::Term(t) => t.clone(),
                            PatternTerm::Var(v) => sol.get(v).unwrap().clone(),
                        };
                        if let Ok(t) = Triple::new(s, pr, o) {
                            g.insert(t);
                        }
                    }
                }
            }
            if g.len() == before {
                return g;
            }
        }
    }

    fn closure_rule() -> DerivationRule {
        DerivationRule {
            body: Bgp(vec![
                TriplePattern::new(PatternTerm::var("x"), iri("next"), PatternTerm::var("y")),
                TriplePattern::new(PatternTerm::var("y"), iri("reach"), PatternTerm::var("z")),
            ]),
            head: vec![TriplePattern::new(
                PatternTerm::var("x"),
                iri("reach"),
                PatternTerm::var("z"),
            )],
        }
    }

    fn base_rule() -> DerivationRule {
        DerivationRule {
            body: Bgp(vec![TriplePattern::new(
                PatternTerm::var("x"),
                iri("next"),
                PatternTerm::var("y"),
            )]),
            head: vec![TriplePattern::new(
                PatternTerm::var("x"),
                iri("reach"),
                PatternTerm::var("y"),
            )],
        }
    }

    #[test]
    fn six_node_chain_closes_to_fifteen_pairs() {
        // n1 -> n2 -> ... -> n6; reachability has 5+4+3+2+1 = 15 pairs.
        let mut wm = Graph::new();
        for i in 1..6 {
            wm.insert(triple(&format!("n{i}"), "next", &format!("n{}", i + 1)));
        }
        let added = saturate(&mut wm, &[base_rule(), closure_rule()]);
        let reach: Vec<&Triple> =
            wm.iter().filter(|t| t.predicate == iri("reach")).collect();
        assert_eq!(reach.len(), 15);
        assert_eq!(added, 15);
        assert!(wm.has(&iri("n1"), &iri("reach"), &iri("n6")));
        assert!(!wm.has(&iri("n6"), &iri("reach"), &iri("n1")));
    }

    #[test]
    fn saturation_is_idempotent() {
        let mut wm = Graph::new();
        for i in 1..6 {
            wm.insert(triple(&format!("n{i}"), "next", &format!("n{}", i + 1)));
        }
        let rules = [base_rule(), closure_rule()];
        saturate(&mut wm, &rules);
        let snapshot = wm.clone();
        let added = saturate(&mut wm, &rules);
        assert_eq!(added, 0);
        assert_eq!(wm, snapshot);
    }

    #[test]
    fn rule_order_does_not_matter() {
        let mut a = Graph::new();
        for i in 1..5 {
            a.insert(triple(&format!("n{i}"), "next", &format!("n{}", i + 1)));
        }
        let mut b = a.clone();
        saturate(&mut a, &[base_rule(), closure_rule()]);
        saturate(&mut b, &[closure_rule(), base_rule()]);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_body_rule_fires_once() {
        let rule = DerivationRule {
            body: Bgp(Vec::new()),
            head: vec![TriplePattern::new(iri("a"), iri("p"), iri("b"))],
        };
        let mut wm = Graph::new();
        assert_eq!(saturate(&mut wm, &[rule]), 1);
        assert!(wm.has(&iri("a"), &iri("p"), &iri("b")));
    }

    #[test]
    fn builtin_interleaves_with_rules_to_fixpoint() {
        // Rule: seed -> mark(a). Builtin: mark(x) present -> boost(x).
        // Rule: boost(x) -> mark(b) when x is a. Requires two alternations.
        struct Boost;
        impl WmDerive for Boost {
            fn derive(&self, wm: &Graph) -> Vec<Triple> {
                wm.iter()
                    .filter(|t| t.predicate == iri("mark"))
                    .map(|t| {
                        Triple::new(t.subject.clone(), iri("boost"), t.object.clone()).unwrap()
                    })
                    .collect()
            }
            fn name(&self) -> &str {
                "boost"
            }
        }
        let seed_rule = parse_rule_doc(
            "{ :root :is :seed . } => { :root :mark :a . } .
             { :root :boost :a . } => { :root :mark :b . } .",
        );
        let mut wm = Graph::new();
        wm.insert(triple("root", "is", "seed"));
        saturate_with(&mut wm, &seed_rule, &[&Boost]);
        assert!(wm.has(&iri("root"), &iri("mark"), &iri("b")));
        assert!(wm.has(&iri("root"), &iri("boost"), &iri("b")));
    }

    fn parse_rule_doc(rules: &str) -> Vec<DerivationRule> {
        let text = format!("@prefix : <http://example.org/> .\n{rules}");
        parse_program(&text, Some("http://example.org/doc")).unwrap().derivations
    }

    #[test]
    fn request_firing_dedups_and_sorts() {
        let text = "@prefix : <http://example.org/> .
@prefix http: <http://www.w3.org/2011/http#> .
@prefix httpm: <http://www.w3.org/2011/http-methods#> .
{ ?c :contains ?e . } => { [] http:mthd httpm:GET ; http:requestURI ?e . } .
{ ?c :alsoContains ?e . } => { [] http:mthd httpm:GET ; http:requestURI ?e . } .
{ ?x :state :ready . } => { [] http:mthd httpm:PUT ; http:requestURI ?x ; http:body { ?x :state :done . } . } .
";
        let program = parse_program(text, Some("http://example.org/doc")).unwrap();
        let mut wm = Graph::new();
        wm.insert(triple("c", "contains", "b"));
        wm.insert(triple("c", "contains", "a"));
        wm.insert(triple("c", "alsoContains", "a"));
        wm.insert(triple("x", "state", "ready"));

        let gets = fire_request_rules(&program.requests, &wm, RequestClass::Get);
        assert_eq!(gets.len(), 2, "duplicate GET for :a must collapse");
        assert_eq!(gets[0].target, "http://example.org/a");
        assert_eq!(gets[1].target, "http://example.org/b");

        let writes = fire_request_rules(&program.requests, &wm, RequestClass::NonGet);
        assert_eq!(writes.len(), 1);
        assert_eq!(writes[0].method, Method::Put);
        assert!(writes[0].payload.has(&iri("x"), &iri("state"), &iri("done")));
    }

    #[test]
    fn non_iri_target_instantiation_is_skipped() {
        let text = "@prefix : <http://example.org/> .
@prefix http: <http://www.w3.org/2011/http#> .
@prefix httpm: <http://www.w3.org/2011/http-methods#> .
{ ?x :targets ?t . } => { [] http:mthd httpm:GET ; http:requestURI ?t . } .
";
        let program = parse_program(text, Some("http://example.org/doc")).unwrap();
        let mut wm = Graph::new();
        wm.insert(Triple::new(iri("x"), iri("targets"), Term::lit("not an iri")).unwrap());
        wm.insert(triple("x", "targets", "ok"));
        let gets = fire_request_rules(&program.requests, &wm, RequestClass::Get);
        assert_eq!(gets.len(), 1);
        assert_eq!(gets[0].target, "http://example.org/ok");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pool_iri(i: usize) -> Term {
            Term::iri(&format!("http://example.org/t{i}"))
        }

        fn arb_graph() -> impl Strategy<Value = Graph> {
            proptest::collection::vec(((0usize..4), (0usize..3), (0usize..4)), 0..10).prop_map(
                |ts| {
                    ts.into_iter()
                        .map(|(s, p, o)| {
                            Triple::new(pool_iri(s), pool_iri(p), pool_iri(o)).unwrap()
                        })
                        .collect()
                },
            )
        }

        fn arb_pattern_term() -> impl Strategy<Value = PatternTerm> {
            prop_oneof![
                (0usize..4).prop_map(|i| PatternTerm::Term(pool_iri(i))),
                (0usize..3).prop_map(|i| PatternTerm::var(["x", "y", "z"][i])),
            ]
        }

        fn arb_rule() -> impl Strategy<Value = DerivationRule> {
            let body = proptest::collection::vec(
                (arb_pattern_term(), arb_pattern_term(), arb_pattern_term()).prop_map(
                    |(s, p, o)| TriplePattern { subject: s, predicate: p, object: o },
                ),
                1..3,
            );
            body.prop_flat_map(|body| {
                let bound: Vec<Variable> = Bgp(body.clone())
                    .variables()
                    .into_iter()
                    .cloned()
                    .collect();
                let head_term = move || {
                    let bound = bound.clone();
                    (0usize..8).prop_map(move |i| {
                        if i < 4 || bound.is_empty() {
                            PatternTerm::Term(pool_iri(i % 4))
                        } else {
                            PatternTerm::Var(bound[(i - 4) % bound.len()].clone())
                        }
                    })
                };
                proptest::collection::vec(
                    (head_term(), head_term(), head_term()).prop_map(|(s, p, o)| TriplePattern {
                        subject: s,
                        predicate: p,
                        object: o,
                    }),
                    1..3,
                )
                .prop_map(move |head| DerivationRule { body: Bgp(body.clone()), head })
            })
        }

        proptest! {
            #[test]
            fn seminaive_agrees_with_naive(
                g in arb_graph(),
                rules in proptest::collection::vec(arb_rule(), 0..4),
            ) {
                let mut fast = g.clone();
                saturate(&mut fast, &rules);
                let slow = naive_saturate(&g, &rules);
                prop_assert_eq!(fast, slow);
            }

            #[test]
            fn saturation_is_monotone_and_idempotent(
                g in arb_graph(),
                rules in proptest::collection::vec(arb_rule(), 0..4),
            ) {
                let mut once = g.clone();
                saturate(&mut once, &rules);
                for t in g.iter() {
                    prop_assert!(once.has(&t.subject, &t.predicate, &t.object));
                }
                let mut twice = once.clone();
                let added = saturate(&mut twice, &rules);
                prop_assert_eq!(added, 0);
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn rule_order_is_irrelevant(
                g in arb_graph(),
                rules in proptest::collection::vec(arb_rule(), 0..4),
            ) {
                let mut forward = g.clone();
                saturate(&mut forward, &rules);
                let mut reversed_rules = rules.clone();
                reversed_rules.reverse();
                let mut backward = g.clone();
                saturate(&mut backward, &reversed_rules);
                prop_assert_eq!(forward, backward);
            }
        }
    }
}
