//! Graph isomorphism up to blank node relabelling.
//!
//! Ground triples must match exactly; blank nodes are matched by iterative
//! signature refinement followed by backtracking inside refinement classes.
//! Intended for the small graphs that show up in tests and protocol
//! round-trips, not for adversarial inputs.

use std::collections::{BTreeMap, BTreeSet};

use super::{Graph, Term, Triple};

pub fn isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let ground = |g: &Graph| -> BTreeSet<Triple> {
        g.iter().filter(|t| !has_blank(t)).cloned().collect()
    };
    if ground(a) != ground(b) {
        return false;
    }
    let blanks_a = blank_terms(a);
    let blanks_b = blank_terms(b);
    if blanks_a.len() != blanks_b.len() {
        return false;
    }
    if blanks_a.is_empty() {
        return true;
    }
    let sig_a = refine(a, &blanks_a);
    let sig_b = refine(b, &blanks_b);
    {
        let mut counts_a: BTreeMap<&str, usize> = BTreeMap::new();
        let mut counts_b: BTreeMap<&str, usize> = BTreeMap::new();
        for s in sig_a.values() {
            *counts_a.entry(s).or_default() += 1;
        }
        for s in sig_b.values() {
            *counts_b.entry(s).or_default() += 1;
        }
        if counts_a != counts_b {
            return false;
        }
    }
    let blanks_a: Vec<Term> = blanks_a.into_iter().collect();
    let mut mapping: BTreeMap<Term, Term> = BTreeMap::new();
    let mut used: BTreeSet<Term> = BTreeSet::new();
    assign(a, b, &blanks_a, 0, &sig_a, &sig_b, &mut mapping, &mut used)
}

fn has_blank(t: &Triple) -> bool {
    t.subject.is_blank() || t.predicate.is_blank() || t.object.is_blank()
}

fn blank_terms(g: &Graph) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for t in g.iter() {
        for term in [&t.subject, &t.object] {
            if term.is_blank() {
                out.insert(term.clone());
            }
        }
        if t.predicate.is_blank() {
            out.insert(t.predicate.clone());
        }
    }
    out
}

/// Iteratively refines a per-blank signature from the triples it occurs in,
/// abstracting neighbouring blanks by their previous-round signature.
fn refine(g: &Graph, blanks: &BTreeSet<Term>) -> BTreeMap<Term, String> {
    let mut sig: BTreeMap<Term, String> = blanks.iter().map(|b| (b.clone(), String::new())).collect();
    for _ in 0..3 {
        let mut next: BTreeMap<Term, String> = BTreeMap::new();
        for b in blanks {
            let mut parts: Vec<String> = Vec::new();
            for t in g.iter() {
                let render = |term: &Term| -> String {
                    if term == b {
                        "SELF".to_string()
                    } else if term.is_blank() {
                        format!("B[{}]", sig[term])
                    } else {
                        term.to_string()
                    }
                };
                if t.subject == *b || t.object == *b || t.predicate == *b {
                    parts.push(format!("({} {} {})", render(&t.subject), render(&t.predicate), render(&t.object)));
                }
            }
            parts.sort();
            next.insert(b.clone(), parts.join("|"));
        }
        if next == sig {
            break;
        }
        sig = next;
    }
    sig
}

#[allow(clippy::too_many_arguments)]
fn assign(
    a: &Graph,
    b: &Graph,
    blanks_a: &[Term],
    idx: usize,
    sig_a: &BTreeMap<Term, String>,
    sig_b: &BTreeMap<Term, String>,
    mapping: &mut BTreeMap<Term, Term>,
    used: &mut BTreeSet<Term>,
) -> bool {
    if idx == blanks_a.len() {
        return apply_mapping(a, mapping) == *b.triples();
    }
    let cur = &blanks_a[idx];
    let candidates: Vec<Term> = sig_b
        .iter()
        .filter(|(term, s)| !used.contains(*term) && **s == sig_a[cur])
        .map(|(term, _)| term.clone())
        .collect();
    for cand in candidates {
        mapping.insert(cur.clone(), cand.clone());
        used.insert(cand.clone());
        if assign(a, b, blanks_a, idx + 1, sig_a, sig_b, mapping, used) {
            return true;
        }
        mapping.remove(cur);
        used.remove(&cand);
    }
    false
}

fn apply_mapping(a: &Graph, mapping: &BTreeMap<Term, Term>) -> BTreeSet<Triple> {
    let map = |t: &Term| -> Term {
        if t.is_blank() {
            mapping.get(t).cloned().unwrap_or_else(|| t.clone())
        } else {
            t.clone()
        }
    };
    a.iter()
        .map(|t| Triple {
            subject: map(&t.subject),
            predicate: map(&t.predicate),
            object: map(&t.object),
        })
        .collect()
}
