//! Statement-level parser shared by the Turtle reader and the rule-file
//! reader. Both dialects use the same node grammar; the rule dialect adds
//! variables, `{ ... } => { ... }` implications, and formulas in object
//! position (used for request payloads).
//!
//! Blank node labels from the document are replaced with globally fresh
//! labels. Inside formulas, blank nodes and collection cells become
//! variables instead, matching their existential reading in rule bodies.

use std::collections::{BTreeMap, HashMap};

use url::Url;

use super::lex::{err, tokenize, Spanned, Tok};
use super::{fresh_blank, RdfError, Term, RDF_FIRST, RDF_NIL, RDF_REST, RDF_TYPE, XSD_BOOLEAN, XSD_INTEGER};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum PTerm {
    Term(Term),
    Var(String),
    Formula(Vec<PTriple>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PTriple {
    pub s: PTerm,
    pub p: PTerm,
    pub o: PTerm,
}

#[derive(Debug)]
pub(crate) enum Statement {
    Triples(Vec<PTriple>),
    Rule { body: Vec<PTriple>, head: Vec<PTriple>, line: u32, col: u32 },
}

#[derive(Debug)]
pub(crate) struct ParseOutput {
    pub statements: Vec<Statement>,
    pub prefixes: BTreeMap<String, String>,
    pub base: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dialect {
    Turtle,
    Rules,
}

pub(crate) fn parse_document(
    text: &str,
    base: Option<&str>,
    dialect: Dialect,
) -> Result<ParseOutput, RdfError> {
    let base = match base {
        Some(b) => Some(
            Url::parse(b)
                .map_err(|e| err(0, 0, format!("invalid base IRI <{b}>: {e}")))?,
        ),
        None => None,
    };
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        dialect,
        base,
        prefixes: BTreeMap::new(),
        doc_blanks: HashMap::new(),
        formula_blanks: HashMap::new(),
        anon_counter: 0,
        statements: Vec::new(),
    };
    p.run()?;
    Ok(ParseOutput {
        statements: p.statements,
        prefixes: p.prefixes,
        base: p.base.map(|u| u.to_string()),
    })
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    dialect: Dialect,
    base: Option<Url>,
    prefixes: BTreeMap<String, String>,
    doc_blanks: HashMap<String, Term>,
    /// Blank labels seen inside the formulas of the current rule statement;
    /// they map to variables scoped to that statement.
    formula_blanks: HashMap<String, String>,
    anon_counter: u64,
    statements: Vec<Statement>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), RdfError> {
        let got = self.bump();
        if got.tok == tok {
            Ok(())
        } else {
            Err(err(got.line, got.col, format!("expected '{tok}', found '{}'", got.tok)))
        }
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, RdfError> {
        let s = self.peek();
        Err(err(s.line, s.col, msg))
    }

    fn run(&mut self) -> Result<(), RdfError> {
        loop {
            match &self.peek().tok {
                Tok::Eof => return Ok(()),
                Tok::At(w) if w == "prefix" => {
                    self.bump();
                    self.prefix_directive()?;
                    self.expect(Tok::Dot)?;
                }
                Tok::At(w) if w == "base" => {
                    self.bump();
                    self.base_directive()?;
                    self.expect(Tok::Dot)?;
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("prefix") => {
                    self.bump();
                    self.prefix_directive()?;
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("base") => {
                    self.bump();
                    self.base_directive()?;
                }
                _ => self.statement()?,
            }
        }
    }

    fn prefix_directive(&mut self) -> Result<(), RdfError> {
        let got = self.bump();
        let Tok::Pname { prefix, local } = got.tok else {
            return Err(err(got.line, got.col, "expected prefix name"));
        };
        if !local.is_empty() {
            return Err(err(got.line, got.col, "prefix declaration must end in ':'"));
        }
        let iri = self.bump();
        let Tok::Iri(raw) = iri.tok else {
            return Err(err(iri.line, iri.col, "expected IRI in prefix declaration"));
        };
        let resolved = self.resolve_iri(&raw, iri.line, iri.col)?;
        self.prefixes.insert(prefix, resolved);
        Ok(())
    }

    fn base_directive(&mut self) -> Result<(), RdfError> {
        let iri = self.bump();
        let Tok::Iri(raw) = iri.tok else {
            return Err(err(iri.line, iri.col, "expected IRI in base declaration"));
        };
        let resolved = self.resolve_iri(&raw, iri.line, iri.col)?;
        self.base = Some(
            Url::parse(&resolved)
                .map_err(|e| err(iri.line, iri.col, format!("invalid base IRI: {e}")))?,
        );
        Ok(())
    }

    fn statement(&mut self) -> Result<(), RdfError> {
        self.formula_blanks.clear();
        if self.peek().tok == Tok::LBrace {
            if self.dialect != Dialect::Rules {
                return self.fail("formulas are not allowed in Turtle documents");
            }
            let (line, col) = (self.peek().line, self.peek().col);
            let body = self.formula()?;
            self.expect(Tok::Implies)?;
            if self.peek().tok != Tok::LBrace {
                return self.fail("expected '{' after '=>'");
            }
            let head = self.formula()?;
            self.expect(Tok::Dot)?;
            self.statements.push(Statement::Rule { body, head, line, col });
            return Ok(());
        }
        let mut acc = Vec::new();
        self.triples(false, &mut acc)?;
        self.expect(Tok::Dot)?;
        self.statements.push(Statement::Triples(acc));
        Ok(())
    }

    /// `{ t1 . t2 . ... }` with the final dot optional.
    fn formula(&mut self) -> Result<Vec<PTriple>, RdfError> {
        self.expect(Tok::LBrace)?;
        let mut acc = Vec::new();
        loop {
            if self.peek().tok == Tok::RBrace {
                self.bump();
                return Ok(acc);
            }
            self.triples(true, &mut acc)?;
            if self.peek().tok == Tok::Dot {
                self.bump();
            } else if self.peek().tok != Tok::RBrace {
                return self.fail("expected '.' or '}' in formula");
            }
        }
    }

    fn triples(&mut self, in_formula: bool, acc: &mut Vec<PTriple>) -> Result<(), RdfError> {
        let subject = match self.peek().tok {
            Tok::LBracket => self.bracket_node(in_formula, acc)?,
            Tok::LParen => self.collection(in_formula, acc)?,
            _ => self.node(in_formula, acc)?,
        };
        self.predicate_object_list(&subject, in_formula, acc)
    }

    fn predicate_object_list(
        &mut self,
        subject: &PTerm,
        in_formula: bool,
        acc: &mut Vec<PTriple>,
    ) -> Result<(), RdfError> {
        loop {
            let predicate = self.verb(in_formula, acc)?;
            loop {
                let object = self.object(in_formula, acc)?;
                acc.push(PTriple { s: subject.clone(), p: predicate.clone(), o: object });
                if self.peek().tok == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            if self.peek().tok == Tok::Semi {
                self.bump();
                // A semicolon may dangle before '.' or ']' or '}'.
                if matches!(self.peek().tok, Tok::Dot | Tok::RBracket | Tok::RBrace) {
                    return Ok(());
                }
            } else {
                return Ok(());
            }
        }
    }

    fn verb(&mut self, in_formula: bool, acc: &mut Vec<PTriple>) -> Result<PTerm, RdfError> {
        if let Tok::Word(w) = &self.peek().tok {
            if w == "a" {
                self.bump();
                return Ok(PTerm::Term(Term::iri(RDF_TYPE)));
            }
        }
        self.node(in_formula, acc)
    }

    fn object(&mut self, in_formula: bool, acc: &mut Vec<PTriple>) -> Result<PTerm, RdfError> {
        match self.peek().tok {
            Tok::LBracket => self.bracket_node(in_formula, acc),
            Tok::LParen => self.collection(in_formula, acc),
            Tok::LBrace => {
                if self.dialect != Dialect::Rules || !in_formula {
                    self.fail("formulas are only allowed inside rules")
                } else {
                    Ok(PTerm::Formula(self.formula()?))
                }
            }
            _ => self.node(in_formula, acc),
        }
    }

    /// A single node token: IRI, prefixed name, blank label, variable, or
    /// literal.
    fn node(&mut self, in_formula: bool, _acc: &mut [PTriple]) -> Result<PTerm, RdfError> {
        let s = self.bump();
        match s.tok {
            Tok::Iri(raw) => {
                let iri = self.resolve_iri(&raw, s.line, s.col)?;
                Ok(PTerm::Term(Term::iri(&iri)))
            }
            Tok::Pname { prefix, local } => {
                let Some(ns) = self.prefixes.get(&prefix) else {
                    return Err(err(s.line, s.col, format!("unknown prefix '{prefix}:'")));
                };
                Ok(PTerm::Term(Term::iri(&format!("{ns}{local}"))))
            }
            Tok::Blank(label) => {
                if in_formula {
                    let next = self.formula_blanks.len();
                    let name = self
                        .formula_blanks
                        .entry(label)
                        .or_insert_with(|| format!("_bn{next}"))
                        .clone();
                    Ok(PTerm::Var(name))
                } else {
                    let term =
                        self.doc_blanks.entry(label).or_insert_with(fresh_blank).clone();
                    Ok(PTerm::Term(term))
                }
            }
            Tok::Var(name) => {
                if self.dialect != Dialect::Rules {
                    return Err(err(s.line, s.col, "variables are not allowed in Turtle"));
                }
                if !in_formula {
                    return Err(err(s.line, s.col, "variables are only allowed inside rules"));
                }
                Ok(PTerm::Var(name))
            }
            Tok::Str(value) => {
                match &self.peek().tok {
                    Tok::CaretCaret => {
                        self.bump();
                        let dt = self.bump();
                        let datatype = match dt.tok {
                            Tok::Iri(raw) => self.resolve_iri(&raw, dt.line, dt.col)?,
                            Tok::Pname { prefix, local } => {
                                let Some(ns) = self.prefixes.get(&prefix) else {
                                    return Err(err(
                                        dt.line,
                                        dt.col,
                                        format!("unknown prefix '{prefix}:'"),
                                    ));
                                };
                                format!("{ns}{local}")
                            }
                            other => {
                                return Err(err(
                                    dt.line,
                                    dt.col,
                                    format!("expected datatype IRI, found '{other}'"),
                                ))
                            }
                        };
                        Ok(PTerm::Term(Term::lit_typed(&value, &datatype)))
                    }
                    Tok::At(_) => {
                        let Tok::At(lang) = self.bump().tok else { unreachable!() };
                        Ok(PTerm::Term(Term::lit_lang(&value, &lang)))
                    }
                    _ => Ok(PTerm::Term(Term::lit(&value))),
                }
            }
            Tok::Int(lex) => Ok(PTerm::Term(Term::lit_typed(&lex, XSD_INTEGER))),
            Tok::Word(w) if w == "true" || w == "false" => {
                Ok(PTerm::Term(Term::lit_typed(&w, XSD_BOOLEAN)))
            }
            other => Err(err(s.line, s.col, format!("unexpected '{other}'"))),
        }
    }

    /// `[]` or `[ predicateObjectList ]`.
    fn bracket_node(
        &mut self,
        in_formula: bool,
        acc: &mut Vec<PTriple>,
    ) -> Result<PTerm, RdfError> {
        self.expect(Tok::LBracket)?;
        let subject = self.anon_node(in_formula);
        if self.peek().tok == Tok::RBracket {
            self.bump();
            return Ok(subject);
        }
        self.predicate_object_list(&subject, in_formula, acc)?;
        self.expect(Tok::RBracket)?;
        Ok(subject)
    }

    /// `( o1 o2 ... )` expanded to rdf:first/rdf:rest cells.
    fn collection(&mut self, in_formula: bool, acc: &mut Vec<PTriple>) -> Result<PTerm, RdfError> {
        self.expect(Tok::LParen)?;
        let mut items = Vec::new();
        while self.peek().tok != Tok::RParen {
            items.push(self.object(in_formula, acc)?);
        }
        self.bump();
        let first = PTerm::Term(Term::iri(RDF_FIRST));
        let rest = PTerm::Term(Term::iri(RDF_REST));
        let mut head = PTerm::Term(Term::iri(RDF_NIL));
        for item in items.into_iter().rev() {
            let cell = self.anon_node(in_formula);
            acc.push(PTriple { s: cell.clone(), p: first.clone(), o: item });
            acc.push(PTriple { s: cell.clone(), p: rest.clone(), o: head });
            head = cell;
        }
        Ok(head)
    }

    fn anon_node(&mut self, in_formula: bool) -> PTerm {
        if in_formula {
            let n = self.anon_counter;
            self.anon_counter += 1;
            PTerm::Var(format!("_anon{n}"))
        } else {
            PTerm::Term(fresh_blank())
        }
    }

    fn resolve_iri(&self, raw: &str, line: u32, col: u32) -> Result<String, RdfError> {
        if has_scheme(raw) {
            return Ok(raw.to_string());
        }
        match &self.base {
            Some(base) => base
                .join(raw)
                .map(|u| u.to_string())
                .map_err(|e| err(line, col, format!("cannot resolve <{raw}>: {e}"))),
            None => Err(err(line, col, format!("relative IRI <{raw}> without a base"))),
        }
    }
}

fn has_scheme(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    for c in chars {
        match c {
            ':' => return true,
            c if c.is_ascii_alphanumeric() || c == '+' || c == '.' || c == '-' => {}
            _ => return false,
        }
    }
    false
}

/// Converts a parsed triple to a ground [`Triple`], rejecting variables and
/// formulas. Used by the Turtle reader and for rule-file assertions.
pub(crate) fn ground_triple(t: &PTriple) -> Result<super::Triple, RdfError> {
    let to_term = |p: &PTerm| match p {
        PTerm::Term(t) => Ok(t.clone()),
        PTerm::Var(v) => Err(RdfError::Syntax {
            line: 0,
            col: 0,
            msg: format!("variable ?{v} outside a rule"),
        }),
        PTerm::Formula(_) => Err(RdfError::Syntax {
            line: 0,
            col: 0,
            msg: "formula outside a rule".to_string(),
        }),
    };
    super::Triple::new(to_term(&t.s)?, to_term(&t.p)?, to_term(&t.o)?)
}
