//! Basic graph pattern matching and ASK queries.
//!
//! The query language is a deliberately small SPARQL subset: one basic
//! graph pattern, no FILTER, OPTIONAL, UNION, or subqueries; those are
//! rejected with an explicit error rather than ignored. Blank nodes in
//! patterns act as variables scoped to the query. Matching enumerates every
//! homomorphism from the pattern into the graph and collapses the result to
//! a set, so pattern order never changes the outcome.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::rdf::{Graph, RdfError, Term, Triple};

#[derive(Debug, thiserror::Error)]
pub enum QueryError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("line {line}, col {col}: {feature} is not supported in this query subset")]
    Unsupported { line: u32, col: u32, feature: String },
}

impl From<RdfError> for QueryError {
    fn from(e: RdfError) -> Self {
        match e {
            RdfError::Syntax { line, col, msg } => QueryError::Syntax { line, col, msg },
            other => QueryError::Syntax { line: 0, col: 0, msg: other.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: &str) -> Self {
        Variable(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    Term(Term),
    Var(Variable),
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Var(Variable::new(name))
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }
}

impl From<Term> for PatternTerm {
    fn from(t: Term) -> Self {
        PatternTerm::Term(t)
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Term(t) => write!(f, "{t}"),
            PatternTerm::Var(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(
        subject: impl Into<PatternTerm>,
        predicate: impl Into<PatternTerm>,
        object: impl Into<PatternTerm>,
    ) -> Self {
        TriplePattern {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn terms(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.terms().into_iter().filter_map(|t| t.as_var())
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A basic graph pattern: a conjunction of triple patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bgp(pub Vec<TriplePattern>);

impl Bgp {
    pub fn variables(&self) -> BTreeSet<&Variable> {
        self.0.iter().flat_map(|p| p.variables()).collect()
    }
}

pub type Solution = BTreeMap<Variable, Term>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AskQuery {
    pub pattern: Bgp,
}

/// All distinct solutions of `bgp` against `g`.
pub fn match_bgp(bgp: &Bgp, g: &Graph) -> Vec<Solution> {
    let idx = TripleIndex::from_graph(g);
    let mut out: BTreeSet<Solution> = BTreeSet::new();
    solve(&bgp.0, &idx, &mut |s| {
        out.insert(s.clone());
        true
    });
    out.into_iter().collect()
}

/// True iff the pattern has at least one solution.
pub fn ask(q: &AskQuery, g: &Graph) -> bool {
    let idx = TripleIndex::from_graph(g);
    let mut found = false;
    solve(&q.pattern.0, &idx, &mut |_| {
        found = true;
        false
    });
    found
}

/// Triple store with per-position indexes, shared by the matcher and the
/// rule evaluator. Grows monotonically; never removes triples.
pub(crate) struct TripleIndex {
    triples: Vec<Triple>,
    set: HashSet<Triple>,
    by_s: HashMap<Term, Vec<u32>>,
    by_p: HashMap<Term, Vec<u32>>,
    by_o: HashMap<Term, Vec<u32>>,
}

impl TripleIndex {
    pub(crate) fn new() -> Self {
        TripleIndex {
            triples: Vec::new(),
            set: HashSet::new(),
            by_s: HashMap::new(),
            by_p: HashMap::new(),
            by_o: HashMap::new(),
        }
    }

    pub(crate) fn from_graph(g: &Graph) -> Self {
        let mut idx = TripleIndex::new();
        for t in g.iter() {
            idx.insert(t.clone());
        }
        idx
    }

    pub(crate) fn insert(&mut self, t: Triple) -> bool {
        if !self.set.insert(t.clone()) {
            return false;
        }
        let i = self.triples.len() as u32;
        self.by_s.entry(t.subject.clone()).or_default().push(i);
        self.by_p.entry(t.predicate.clone()).or_default().push(i);
        self.by_o.entry(t.object.clone()).or_default().push(i);
        self.triples.push(t);
        true
    }

    pub(crate) fn get(&self, i: u32) -> &Triple {
        &self.triples[i as usize]
    }

    /// Indices of candidate triples for the given bound positions: the
    /// smallest applicable index list, or the full store when nothing is
    /// bound.
    fn candidates(
        &self,
        s: Option<&Term>,
        p: Option<&Term>,
        o: Option<&Term>,
    ) -> Candidates<'_> {
        let empty: &[u32] = &[];
        let mut best: Option<&[u32]> = None;
        if let Some(t) = s {
            let list = self.by_s.get(t).map(|v| v.as_slice()).unwrap_or(empty);
            if best.is_none_or(|b| list.len() < b.len()) {
                best = Some(list);
            }
        }
        if let Some(t) = p {
            let list = self.by_p.get(t).map(|v| v.as_slice()).unwrap_or(empty);
            if best.is_none_or(|b| list.len() < b.len()) {
                best = Some(list);
            }
        }
        if let Some(t) = o {
            let list = self.by_o.get(t).map(|v| v.as_slice()).unwrap_or(empty);
            if best.is_none_or(|b| list.len() < b.len()) {
                best = Some(list);
            }
        }
        match best {
            Some(list) => Candidates::List(list.iter()),
            None => Candidates::All(0..self.triples.len() as u32),
        }
    }

    /// Upper bound on how many triples [`Self::candidates`] would yield for
    /// the given bound positions.
    fn estimate(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> usize {
        let mut best = self.triples.len();
        if let Some(t) = s {
            best = best.min(self.by_s.get(t).map_or(0, |v| v.len()));
        }
        if let Some(t) = p {
            best = best.min(self.by_p.get(t).map_or(0, |v| v.len()));
        }
        if let Some(t) = o {
            best = best.min(self.by_o.get(t).map_or(0, |v| v.len()));
        }
        best
    }
}

enum Candidates<'a> {
    List(std::slice::Iter<'a, u32>),
    All(std::ops::Range<u32>),
}

impl Iterator for Candidates<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        match self {
            Candidates::List(it) => it.next().copied(),
            Candidates::All(r) => r.next(),
        }
    }
}

fn bound(pt: &PatternTerm, binding: &Solution) -> Option<Term> {
    match pt {
        PatternTerm::Term(t) => Some(t.clone()),
        PatternTerm::Var(v) => binding.get(v).cloned(),
    }
}

/// Enumerates homomorphisms of `patterns` into `idx`, invoking `emit` per
/// solution; `emit` returns false to stop early. At every step the pattern
/// with the fewest index candidates under the current binding is joined
/// next, so a pattern pinned to a rare constant is taken before one that
/// merely has many positions bound. Starts from an empty binding.
pub(crate) fn solve(
    patterns: &[TriplePattern],
    idx: &TripleIndex,
    emit: &mut dyn FnMut(&Solution) -> bool,
) -> bool {
    let mut remaining: Vec<usize> = (0..patterns.len()).collect();
    let mut binding = Solution::new();
    solve_rec(patterns, &mut remaining, idx, &mut binding, emit)
}

/// Like [`solve`] but requires the pattern at `seed_pos` to match one
/// designated triple; used by the delta-driven evaluator.
pub(crate) fn solve_seeded(
    patterns: &[TriplePattern],
    seed_pos: usize,
    seed: &Triple,
    idx: &TripleIndex,
    emit: &mut dyn FnMut(&Solution) -> bool,
) -> bool {
    let mut binding = Solution::new();
    if !unify(&patterns[seed_pos], seed, &mut binding) {
        return true;
    }
    let mut remaining: Vec<usize> =
        (0..patterns.len()).filter(|i| *i != seed_pos).collect();
    solve_rec(patterns, &mut remaining, idx, &mut binding, emit)
}

fn solve_rec(
    patterns: &[TriplePattern],
    remaining: &mut Vec<usize>,
    idx: &TripleIndex,
    binding: &mut Solution,
    emit: &mut dyn FnMut(&Solution) -> bool,
) -> bool {
    let Some(pick) = pick_most_selective(patterns, remaining, binding, idx) else {
        return emit(binding);
    };
    let pos_in_remaining = remaining.iter().position(|i| *i == pick).unwrap();
    remaining.swap_remove(pos_in_remaining);
    let pattern = &patterns[pick];
    let s = bound(&pattern.subject, binding);
    let p = bound(&pattern.predicate, binding);
    let o = bound(&pattern.object, binding);
    let mut keep_going = true;
    for ci in idx.candidates(s.as_ref(), p.as_ref(), o.as_ref()) {
        let t = idx.get(ci);
        let mut added: Vec<Variable> = Vec::new();
        if unify_tracking(pattern, t, binding, &mut added) {
            keep_going = solve_rec(patterns, remaining, idx, binding, emit);
        }
        for v in added {
            binding.remove(&v);
        }
        if !keep_going {
            break;
        }
    }
    remaining.push(pick);
    keep_going
}

fn pick_most_selective(
    patterns: &[TriplePattern],
    remaining: &[usize],
    binding: &Solution,
    idx: &TripleIndex,
) -> Option<usize> {
    remaining.iter().copied().min_by_key(|i| {
        let pattern = &patterns[*i];
        let s = bound(&pattern.subject, binding);
        let p = bound(&pattern.predicate, binding);
        let o = bound(&pattern.object, binding);
        // Ties go to the earliest pattern, keeping the order deterministic.
        (idx.estimate(s.as_ref(), p.as_ref(), o.as_ref()), *i)
    })
}

fn unify(pattern: &TriplePattern, t: &Triple, binding: &mut Solution) -> bool {
    let mut added = Vec::new();
    if unify_tracking(pattern, t, binding, &mut added) {
        true
    } else {
        for v in added {
            binding.remove(&v);
        }
        false
    }
}

fn unify_tracking(
    pattern: &TriplePattern,
    t: &Triple,
    binding: &mut Solution,
    added: &mut Vec<Variable>,
) -> bool {
    let pairs = [
        (&pattern.subject, &t.subject),
        (&pattern.predicate, &t.predicate),
        (&pattern.object, &t.object),
    ];
    for (pt, term) in pairs {
        match pt {
            PatternTerm::Term(expected) => {
                if expected != term {
                    for v in added.drain(..) {
                        binding.remove(&v);
                    }
                    return false;
                }
            }
            PatternTerm::Var(v) => match binding.get(v) {
                Some(existing) => {
                    if existing != term {
                        for v in added.drain(..) {
                            binding.remove(&v);
                        }
                        return false;
                    }
                }
                None => {
                    binding.insert(v.clone(), term.clone());
                    added.push(v.clone());
                }
            },
        }
    }
    true
}

/// Parses `PREFIX` declarations followed by `ASK { ... }`. Unsupported
/// SPARQL features produce [`QueryError::Unsupported`].
pub fn parse_ask(text: &str) -> Result<AskQuery, QueryError> {
    parse_ask_with_base(text, None)
}

pub fn parse_ask_with_base(text: &str, base: Option<&str>) -> Result<AskQuery, QueryError> {
    if let Some((line, col, feature)) = prescan_unsupported(text) {
        return Err(QueryError::Unsupported { line, col, feature });
    }
    AskParser::new(text, base)?.parse()
}

const UNSUPPORTED: &[&str] = &[
    "SELECT", "CONSTRUCT", "DESCRIBE", "FILTER", "OPTIONAL", "UNION", "GRAPH", "SERVICE",
    "MINUS", "BIND", "VALUES", "EXISTS", "LIMIT", "OFFSET", "ORDER",
];

/// Scans raw query text for unsupported SPARQL keywords before tokenizing,
/// so a query using them is rejected by name even when its expression syntax
/// (operators, stars) would otherwise fail the tokenizer with a less helpful
/// message. IRIs, strings, comments, prefixed names, and variables are
/// skipped.
fn prescan_unsupported(text: &str) -> Option<(u32, u32, String)> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            '<' => {
                while i < chars.len() && chars[i] != '>' {
                    advance(&mut i, &mut line, &mut col);
                }
                if i < chars.len() {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            '"' | '\'' => {
                let quote = c;
                advance(&mut i, &mut line, &mut col);
                while i < chars.len() && chars[i] != quote {
                    if chars[i] == '\\' {
                        advance(&mut i, &mut line, &mut col);
                        if i >= chars.len() {
                            break;
                        }
                    }
                    advance(&mut i, &mut line, &mut col);
                }
                if i < chars.len() {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            '?' | '$' | '@' => {
                advance(&mut i, &mut line, &mut col);
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            c if c.is_ascii_alphabetic() => {
                let (start_line, start_col) = (line, col);
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '-')
                {
                    advance(&mut i, &mut line, &mut col);
                }
                let word: String = chars[start..i].iter().collect();
                // A ':' right after the word makes it a prefixed name, not a
                // keyword; a ':' right before makes it a pname local part.
                let pname = (i < chars.len() && chars[i] == ':')
                    || (start > 0 && chars[start - 1] == ':');
                if !pname {
                    if let Some(k) =
                        UNSUPPORTED.iter().find(|k| word.eq_ignore_ascii_case(k))
                    {
                        return Some((start_line, start_col, k.to_string()));
                    }
                }
            }
            _ => advance(&mut i, &mut line, &mut col),
        }
    }
    None
}

struct AskParser {
    toks: Vec<crate::rdf::lex::Spanned>,
    pos: usize,
    base: Option<url::Url>,
    prefixes: BTreeMap<String, String>,
    blank_vars: HashMap<String, Variable>,
    anon: u32,
}

impl AskParser {
    fn new(text: &str, base: Option<&str>) -> Result<Self, QueryError> {
        let base = match base {
            Some(b) => Some(url::Url::parse(b).map_err(|e| QueryError::Syntax {
                line: 0,
                col: 0,
                msg: format!("invalid base IRI <{b}>: {e}"),
            })?),
            None => None,
        };
        Ok(AskParser {
            toks: crate::rdf::lex::tokenize(text)?,
            pos: 0,
            base,
            prefixes: BTreeMap::new(),
            blank_vars: HashMap::new(),
            anon: 0,
        })
    }

    fn peek(&self) -> &crate::rdf::lex::Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> crate::rdf::lex::Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, QueryError> {
        let s = self.peek();
        Err(QueryError::Syntax { line: s.line, col: s.col, msg: msg.into() })
    }

    fn check_supported(&self, word: &str, line: u32, col: u32) -> Result<(), QueryError> {
        if UNSUPPORTED.iter().any(|k| word.eq_ignore_ascii_case(k)) {
            return Err(QueryError::Unsupported {
                line,
                col,
                feature: word.to_uppercase(),
            });
        }
        Ok(())
    }

    fn parse(&mut self) -> Result<AskQuery, QueryError> {
        use crate::rdf::lex::Tok;
        loop {
            match &self.peek().tok {
                Tok::Word(w) if w.eq_ignore_ascii_case("prefix") => {
                    self.bump();
                    let got = self.bump();
                    let Tok::Pname { prefix, local } = got.tok else {
                        return Err(QueryError::Syntax {
                            line: got.line,
                            col: got.col,
                            msg: "expected prefix name".to_string(),
                        });
                    };
                    if !local.is_empty() {
                        return Err(QueryError::Syntax {
                            line: got.line,
                            col: got.col,
                            msg: "prefix declaration must end in ':'".to_string(),
                        });
                    }
                    let iri = self.bump();
                    let Tok::Iri(raw) = iri.tok else {
                        return Err(QueryError::Syntax {
                            line: iri.line,
                            col: iri.col,
                            msg: "expected IRI in prefix declaration".to_string(),
                        });
                    };
                    let resolved = self.resolve(&raw, iri.line, iri.col)?;
                    self.prefixes.insert(prefix, resolved);
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("ask") => {
                    self.bump();
                    break;
                }
                Tok::Word(w) => {
                    let (line, col) = (self.peek().line, self.peek().col);
                    self.check_supported(&w.clone(), line, col)?;
                    return self.fail(format!("expected ASK, found '{w}'"));
                }
                other => return self.fail(format!("expected ASK, found '{other}'")),
            }
        }
        use crate::rdf::lex::Tok as T;
        if self.peek().tok != T::LBrace {
            return self.fail("expected '{' after ASK");
        }
        self.bump();
        let mut patterns = Vec::new();
        loop {
            if self.peek().tok == T::RBrace {
                self.bump();
                break;
            }
            self.triple_block(&mut patterns)?;
            match &self.peek().tok {
                T::Dot => {
                    self.bump();
                }
                T::RBrace => {}
                other => return self.fail(format!("expected '.' or '}}', found '{other}'")),
            }
        }
        if self.peek().tok != T::Eof {
            return self.fail("unexpected input after ASK pattern");
        }
        Ok(AskQuery { pattern: Bgp(patterns) })
    }

    fn triple_block(&mut self, acc: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        use crate::rdf::lex::Tok as T;
        let subject = self.pattern_term(true)?;
        loop {
            let predicate = self.pattern_term(false)?;
            loop {
                let object = self.pattern_term(false)?;
                acc.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek().tok == T::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            if self.peek().tok == T::Semi {
                self.bump();
                if matches!(self.peek().tok, T::Dot | T::RBrace) {
                    return Ok(());
                }
            } else {
                return Ok(());
            }
        }
    }

    fn pattern_term(&mut self, _subject: bool) -> Result<PatternTerm, QueryError> {
        use crate::rdf::lex::Tok as T;
        let s = self.bump();
        match s.tok {
            T::Var(name) => Ok(PatternTerm::var(&name)),
            T::Iri(raw) => {
                let iri = self.resolve(&raw, s.line, s.col)?;
                Ok(PatternTerm::Term(Term::iri(&iri)))
            }
            T::Pname { prefix, local } => match self.prefixes.get(&prefix) {
                Some(ns) => Ok(PatternTerm::Term(Term::iri(&format!("{ns}{local}")))),
                None => Err(QueryError::Syntax {
                    line: s.line,
                    col: s.col,
                    msg: format!("unknown prefix '{prefix}:'"),
                }),
            },
            T::Blank(label) => {
                let n = self.blank_vars.len();
                let var = self
                    .blank_vars
                    .entry(label)
                    .or_insert_with(|| Variable::new(&format!("_bn{n}")))
                    .clone();
                Ok(PatternTerm::Var(var))
            }
            T::LBracket => {
                let close = self.bump();
                if close.tok != T::RBracket {
                    return Err(QueryError::Syntax {
                        line: close.line,
                        col: close.col,
                        msg: "only '[]' is supported in patterns".to_string(),
                    });
                }
                let var = Variable::new(&format!("_anon{}", self.anon));
                self.anon += 1;
                Ok(PatternTerm::Var(var))
            }
            T::Str(value) => {
                match &self.peek().tok {
                    T::CaretCaret => {
                        self.bump();
                        let dt = self.bump();
                        let datatype = match dt.tok {
                            T::Iri(raw) => self.resolve(&raw, dt.line, dt.col)?,
                            T::Pname { prefix, local } => match self.prefixes.get(&prefix) {
                                Some(ns) => format!("{ns}{local}"),
                                None => {
                                    return Err(QueryError::Syntax {
                                        line: dt.line,
                                        col: dt.col,
                                        msg: format!("unknown prefix '{prefix}:'"),
                                    })
                                }
                            },
                            other => {
                                return Err(QueryError::Syntax {
                                    line: dt.line,
                                    col: dt.col,
                                    msg: format!("expected datatype IRI, found '{other}'"),
                                })
                            }
                        };
                        Ok(PatternTerm::Term(Term::lit_typed(&value, &datatype)))
                    }
                    T::At(_) => {
                        let T::At(lang) = self.bump().tok else { unreachable!() };
                        Ok(PatternTerm::Term(Term::lit_lang(&value, &lang)))
                    }
                    _ => Ok(PatternTerm::Term(Term::lit(&value))),
                }
            }
            T::Int(lex) => Ok(PatternTerm::Term(Term::lit_typed(&lex, crate::rdf::XSD_INTEGER))),
            T::Word(w) if w == "a" => Ok(PatternTerm::Term(Term::iri(crate::rdf::RDF_TYPE))),
            T::Word(w) if w == "true" || w == "false" => {
                Ok(PatternTerm::Term(Term::lit_typed(&w, crate::rdf::XSD_BOOLEAN)))
            }
            T::Word(w) => {
                self.check_supported(&w, s.line, s.col)?;
                Err(QueryError::Syntax {
                    line: s.line,
                    col: s.col,
                    msg: format!("unexpected '{w}' in pattern"),
                })
            }
            other => Err(QueryError::Syntax {
                line: s.line,
                col: s.col,
                msg: format!("unexpected '{other}' in pattern"),
            }),
        }
    }

    fn resolve(&self, raw: &str, line: u32, col: u32) -> Result<String, QueryError> {
        let absolute = {
            let mut chars = raw.chars();
            matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
                && raw.contains(':')
                && raw
                    .chars()
                    .take_while(|c| *c != ':')
                    .all(|c| c.is_ascii_alphanumeric() || c == '+' || c == '.' || c == '-')
        };
        if absolute {
            return Ok(raw.to_string());
        }
        match &self.base {
            Some(base) => base.join(raw).map(|u| u.to_string()).map_err(|e| {
                QueryError::Syntax { line, col, msg: format!("cannot resolve <{raw}>: {e}") }
            }),
            None => Err(QueryError::Syntax {
                line,
                col,
                msg: format!("relative IRI <{raw}> without a base"),
            }),
        }
    }
}
