//! RDF terms, triples, and graphs with set semantics.
//!
//! The term model is deliberately small: IRIs, blank nodes, and literals
//! (lexical form plus optional datatype or language tag). Literals compare
//! by lexical form, so `"01"^^xsd:integer` and `"1"^^xsd:integer` are
//! distinct terms. Graphs are sets of triples plus a prefix map used only
//! for serialization; the prefix map never affects matching or equality of
//! individual triples.
//!
//! Blank node labels are made globally fresh whenever a document is parsed,
//! so merging graphs that came from different documents keeps their blank
//! nodes apart without any renaming at merge time. Merging a graph with
//! itself is therefore still a no-op, which keeps union associative,
//! commutative, and idempotent.

mod iso;
pub(crate) mod lex;
mod parser;
mod turtle;

pub use iso::isomorphic;
pub use turtle::{parse_turtle, serialize_turtle, serialize_turtle_with_base};

pub(crate) use parser::{
    ground_triple, parse_document, Dialect, PTerm, PTriple, Statement as PStatement,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_FIRST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#first";
pub const RDF_REST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#rest";
pub const RDF_NIL: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#nil";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

#[derive(Debug, thiserror::Error)]
pub enum RdfError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("a literal cannot be the subject of a triple")]
    LiteralSubject,
    #[error("the predicate of a triple must be an IRI")]
    NonIriPredicate,
    #[error("malformed list: {0}")]
    List(#[from] ListError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ListError {
    #[error("chain does not reach rdf:nil")]
    NotTerminated,
    #[error("node {0} lacks an rdf:first value")]
    MissingFirst(Term),
    #[error("node {0} has more than one rdf:first or rdf:rest value")]
    Ambiguous(Term),
}

/// A literal value: lexical form plus optional datatype IRI or language tag.
/// A literal never carries both a datatype and a language tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: Arc<str>,
    datatype: Option<Arc<str>>,
    lang: Option<Arc<str>>,
}

impl Literal {
    pub fn plain(lexical: &str) -> Self {
        Literal { lexical: lexical.into(), datatype: None, lang: None }
    }

    pub fn typed(lexical: &str, datatype: &str) -> Self {
        Literal { lexical: lexical.into(), datatype: Some(datatype.into()), lang: None }
    }

    pub fn tagged(lexical: &str, lang: &str) -> Self {
        Literal { lexical: lexical.into(), datatype: None, lang: Some(lang.into()) }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&str> {
        self.datatype.as_deref()
    }

    pub fn lang(&self) -> Option<&str> {
        self.lang.as_deref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Arc<str>),
    Blank(Arc<str>),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: &str) -> Self {
        Term::Iri(value.into())
    }

    pub fn blank(label: &str) -> Self {
        Term::Blank(label.into())
    }

    pub fn lit(value: &str) -> Self {
        Term::Literal(Literal::plain(value))
    }

    pub fn lit_typed(value: &str, datatype: &str) -> Self {
        Term::Literal(Literal::typed(value, datatype))
    }

    pub fn lit_lang(value: &str, lang: &str) -> Self {
        Term::Literal(Literal::tagged(value, lang))
    }

    pub fn lit_bool(value: bool) -> Self {
        Term::Literal(Literal::typed(if value { "true" } else { "false" }, XSD_BOOLEAN))
    }

    pub fn lit_int(value: i64) -> Self {
        Term::Literal(Literal::typed(&value.to_string(), XSD_INTEGER))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(v) => write!(f, "<{v}>"),
            Term::Blank(l) => write!(f, "_:{l}"),
            Term::Literal(l) => {
                write!(f, "\"{}\"", escape_literal(&l.lexical))?;
                if let Some(lang) = &l.lang {
                    write!(f, "@{lang}")?;
                } else if let Some(dt) = &l.datatype {
                    write!(f, "^^<{dt}>")?;
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    /// Validating constructor: literals cannot be subjects and predicates
    /// must be IRIs.
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Triple, RdfError> {
        if subject.is_literal() {
            return Err(RdfError::LiteralSubject);
        }
        if !predicate.is_iri() {
            return Err(RdfError::NonIriPredicate);
        }
        Ok(Triple { subject, predicate, object })
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

static BLANK_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Mints a blank node with a label never handed out before in this process.
pub fn fresh_blank() -> Term {
    let n = BLANK_COUNTER.fetch_add(1, Ordering::Relaxed);
    Term::Blank(format!("b{n}").into())
}

/// A set of triples plus a prefix map kept for serialization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, String>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn insert_new(&mut self, s: Term, p: Term, o: Term) -> Result<bool, RdfError> {
        Ok(self.insert(Triple::new(s, p, o)?))
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn has(&self, s: &Term, p: &Term, o: &Term) -> bool {
        self.triples.contains(&Triple {
            subject: s.clone(),
            predicate: p.clone(),
            object: o.clone(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn retain(&mut self, keep: impl FnMut(&Triple) -> bool) {
        self.triples.retain(keep);
    }

    pub fn add_prefix(&mut self, prefix: &str, iri: &str) {
        self.prefixes.insert(prefix.to_string(), iri.to_string());
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// Triples matching an optional subject/predicate/object filter.
    pub fn matching<'g>(
        &'g self,
        s: Option<&'g Term>,
        p: Option<&'g Term>,
        o: Option<&'g Term>,
    ) -> impl Iterator<Item = &'g Triple> {
        self.triples.iter().filter(move |t| {
            s.is_none_or(|s| *s == t.subject)
                && p.is_none_or(|p| *p == t.predicate)
                && o.is_none_or(|o| *o == t.object)
        })
    }

    pub fn objects<'g>(&'g self, s: &'g Term, p: &'g Term) -> impl Iterator<Item = &'g Term> {
        self.matching(Some(s), Some(p), None).map(|t| &t.object)
    }

    pub fn object<'g>(&'g self, s: &Term, p: &Term) -> Option<&'g Term> {
        self.triples
            .iter()
            .find(|t| t.subject == *s && t.predicate == *p)
            .map(|t| &t.object)
    }

    pub fn subjects<'g>(&'g self, p: &'g Term, o: &'g Term) -> impl Iterator<Item = &'g Term> {
        self.matching(None, Some(p), Some(o)).map(|t| &t.subject)
    }

    /// Set union of triples and prefix maps. Blank nodes keep their labels;
    /// documents parsed separately already carry distinct labels.
    pub fn merge(&mut self, other: &Graph) {
        for t in &other.triples {
            self.triples.insert(t.clone());
        }
        for (p, iri) in &other.prefixes {
            self.prefixes.entry(p.clone()).or_insert_with(|| iri.clone());
        }
    }

    pub fn union(mut a: Graph, b: &Graph) -> Graph {
        a.merge(b);
        a
    }

    pub fn blank_labels(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            for term in [&t.subject, &t.predicate, &t.object] {
                if let Term::Blank(l) = term {
                    out.insert(l.as_ref());
                }
            }
        }
        out
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph { triples: iter.into_iter().collect(), prefixes: BTreeMap::new() }
    }
}

/// Builds the RDF collection encoding of `items` in `g`, returning the head
/// term (`rdf:nil` for an empty list, otherwise a fresh blank node).
pub fn make_list(items: &[Term], g: &mut Graph) -> Term {
    let nil = Term::iri(RDF_NIL);
    let first = Term::iri(RDF_FIRST);
    let rest = Term::iri(RDF_REST);
    let mut head = nil;
    for item in items.iter().rev() {
        let cell = fresh_blank();
        g.insert(Triple { subject: cell.clone(), predicate: first.clone(), object: item.clone() });
        g.insert(Triple { subject: cell.clone(), predicate: rest.clone(), object: head });
        head = cell;
    }
    head
}

/// Reads the RDF collection starting at `head` out of `g`.
///
/// Every cell must carry exactly one `rdf:first` and exactly one `rdf:rest`,
/// and the rest chain must reach `rdf:nil`; cycles and dangling chains report
/// [`ListError::NotTerminated`].
pub fn read_list(head: &Term, g: &Graph) -> Result<Vec<Term>, ListError> {
    let nil = Term::iri(RDF_NIL);
    let first = Term::iri(RDF_FIRST);
    let rest = Term::iri(RDF_REST);
    let mut items = Vec::new();
    let mut seen = BTreeSet::new();
    let mut cell = head.clone();
    while cell != nil {
        if !seen.insert(cell.clone()) {
            return Err(ListError::NotTerminated);
        }
        let firsts: Vec<&Term> = g.objects(&cell, &first).collect();
        let rests: Vec<&Term> = g.objects(&cell, &rest).collect();
        if firsts.len() > 1 || rests.len() > 1 {
            return Err(ListError::Ambiguous(cell));
        }
        let value = firsts.first().ok_or_else(|| ListError::MissingFirst(cell.clone()))?;
        items.push((*value).clone());
        match rests.first() {
            Some(next) => cell = (*next).clone(),
            None => return Err(ListError::NotTerminated),
        }
    }
    Ok(items)
}
