//! Turtle reading and writing for the subset this engine speaks: prefixes,
//! base declarations, IRIs, blank nodes, collections, the `a` keyword, and
//! plain/typed/language-tagged literals with integer and boolean shorthand.

use super::parser::{ground_triple, parse_document, Dialect};
use super::{escape_literal, Graph, RdfError, Term, XSD_BOOLEAN, XSD_INTEGER};

/// Parses a Turtle document. Relative IRIs resolve against `base`; a
/// document with relative IRIs and no base is an error. Blank node labels
/// are freshened, so parsing the same document twice never shares blanks.
pub fn parse_turtle(text: &str, base: Option<&str>) -> Result<Graph, RdfError> {
    let out = parse_document(text, base, Dialect::Turtle)?;
    let mut g = Graph::new();
    for (p, iri) in out.prefixes {
        g.add_prefix(&p, &iri);
    }
    for stmt in &out.statements {
        if let super::parser::Statement::Triples(triples) = stmt {
            for t in triples {
                g.insert(ground_triple(t)?);
            }
        }
    }
    Ok(g)
}

/// Serializes with absolute IRIs, compressed through the graph's prefix map
/// where the local part is a safe name.
pub fn serialize_turtle(g: &Graph) -> String {
    serialize_turtle_with_base(g, None)
}

/// Serializes like [`serialize_turtle`], additionally writing IRIs under
/// `base` relative: `base` itself becomes `<>` and `base#frag` becomes
/// `<#frag>`. Used for request payloads whose subject must rebase to the
/// resource the server assigns.
pub fn serialize_turtle_with_base(g: &Graph, base: Option<&str>) -> String {
    let mut out = String::new();
    for (prefix, iri) in g.prefixes() {
        out.push_str(&format!("@prefix {prefix}: <{iri}> .\n"));
    }
    if !g.prefixes().is_empty() && !g.is_empty() {
        out.push('\n');
    }
    let mut last_subject: Option<&Term> = None;
    for t in g.iter() {
        if last_subject == Some(&t.subject) {
            // Replace the closing " .\n" of the previous line with " ;".
            out.pop();
            out.pop();
            out.push_str(";\n    ");
        } else {
            last_subject = Some(&t.subject);
            out.push_str(&render_term(&t.subject, g, base));
            out.push(' ');
        }
        out.push_str(&render_term(&t.predicate, g, base));
        out.push(' ');
        out.push_str(&render_term(&t.object, g, base));
        out.push_str(" .\n");
    }
    out
}

fn render_term(term: &Term, g: &Graph, base: Option<&str>) -> String {
    match term {
        Term::Iri(iri) => render_iri(iri, g, base),
        Term::Blank(label) => {
            let safe: String = label
                .chars()
                .map(|c| if c.is_alphanumeric() || c == '_' { c } else { '_' })
                .collect();
            format!("_:{safe}")
        }
        Term::Literal(lit) => {
            if lit.lang().is_none() {
                match lit.datatype() {
                    Some(XSD_INTEGER) if lit.lexical().parse::<i64>().is_ok() => {
                        return lit.lexical().to_string();
                    }
                    Some(XSD_BOOLEAN) if lit.lexical() == "true" || lit.lexical() == "false" => {
                        return lit.lexical().to_string();
                    }
                    _ => {}
                }
            }
            let mut s = format!("\"{}\"", escape_literal(lit.lexical()));
            if let Some(lang) = lit.lang() {
                s.push('@');
                s.push_str(lang);
            } else if let Some(dt) = lit.datatype() {
                s.push_str("^^");
                s.push_str(&render_iri(dt, g, None));
            }
            s
        }
    }
}

fn render_iri(iri: &str, g: &Graph, base: Option<&str>) -> String {
    if let Some(base) = base {
        if iri == base {
            return "<>".to_string();
        }
        if let Some(frag) = iri.strip_prefix(base) {
            if let Some(frag) = frag.strip_prefix('#') {
                return format!("<#{frag}>");
            }
        }
    }
    for (prefix, ns) in g.prefixes() {
        if let Some(local) = iri.strip_prefix(ns) {
            if is_safe_local(local) {
                return format!("{prefix}:{local}");
            }
        }
    }
    format!("<{iri}>")
}

fn is_safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        None => return true,
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

#[cfg(test)]
mod tests {
    use super::super::isomorphic;
    use super::*;

    #[test]
    fn collection_expands_by_hand_count() {
        // (1 2) is two cells: 2 firsts, 2 rests, plus the linking triple.
        let g = parse_turtle(
            "@prefix : <http://example.org/> . :s :p (1 2) .",
            None,
        )
        .unwrap();
        assert_eq!(g.len(), 5);
        let first = Term::iri(super::super::RDF_FIRST);
        let rest = Term::iri(super::super::RDF_REST);
        assert_eq!(g.matching(None, Some(&first), None).count(), 2);
        assert_eq!(g.matching(None, Some(&rest), None).count(), 2);
        let link = g
            .object(&Term::iri("http://example.org/s"), &Term::iri("http://example.org/p"))
            .unwrap();
        let items = super::super::read_list(&link.clone(), &g).unwrap();
        assert_eq!(items, vec![Term::lit_typed("1", XSD_INTEGER), Term::lit_typed("2", XSD_INTEGER)]);
    }

    #[test]
    fn separately_parsed_blanks_stay_apart() {
        let doc = "@prefix : <http://example.org/> . _:b :p :o .";
        let a = parse_turtle(doc, None).unwrap();
        let b = parse_turtle(doc, None).unwrap();
        let merged = Graph::union(a, &b);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged.blank_labels().len(), 2);
    }

    #[test]
    fn same_label_within_one_document_is_one_node() {
        let g = parse_turtle(
            "@prefix : <http://example.org/> . _:b :p :o . _:b :q :o2 .",
            None,
        )
        .unwrap();
        assert_eq!(g.blank_labels().len(), 1);
    }

    #[test]
    fn relative_iri_needs_base() {
        let e = parse_turtle("<doc> <p> <o> .", None);
        assert!(e.is_err());
        let g = parse_turtle("<doc> <#p> <o> .", Some("http://example.org/dir/x")).unwrap();
        assert!(g.has(
            &Term::iri("http://example.org/dir/doc"),
            &Term::iri("http://example.org/dir/x#p"),
            &Term::iri("http://example.org/dir/o"),
        ));
    }

    #[test]
    fn fragment_resolves_against_document() {
        let g = parse_turtle("<#it> <#p> <> .", Some("http://example.org/res/1")).unwrap();
        assert!(g.has(
            &Term::iri("http://example.org/res/1#it"),
            &Term::iri("http://example.org/res/1#p"),
            &Term::iri("http://example.org/res/1"),
        ));
    }

    #[test]
    fn base_directive_applies() {
        let g = parse_turtle("@base <http://example.org/a/> . <x> <p> <y> .", None).unwrap();
        assert!(g.has(
            &Term::iri("http://example.org/a/x"),
            &Term::iri("http://example.org/a/p"),
            &Term::iri("http://example.org/a/y"),
        ));
    }

    #[test]
    fn sparql_style_prefix_accepted() {
        let g = parse_turtle("PREFIX ex: <http://example.org/>\nex:s ex:p ex:o .", None).unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn unknown_prefix_rejected() {
        assert!(parse_turtle("ex:s ex:p ex:o .", None).is_err());
    }

    #[test]
    fn literal_forms_roundtrip() {
        let doc = r#"@prefix : <http://example.org/> .
:s :p "plain", "tagged"@en, "typed"^^:dt, 42, true, "esc\"aped\n" ."#;
        let g = parse_turtle(doc, None).unwrap();
        let re = parse_turtle(&serialize_turtle(&g), None).unwrap();
        assert_eq!(g.triples(), re.triples());
    }

    #[test]
    fn roundtrip_with_blanks_is_isomorphic() {
        let doc = r#"@prefix : <http://example.org/> .
:s :p (1 2 3) .
_:x :q :s ; :r [ :inner "v" ] ."#;
        let g = parse_turtle(doc, None).unwrap();
        let re = parse_turtle(&serialize_turtle(&g), None).unwrap();
        assert!(isomorphic(&g, &re));
    }

    #[test]
    fn relativized_serialization_rebases() {
        let g = parse_turtle("<#it> <http://p/x> <> .", Some("http://example.org/r")).unwrap();
        let text = serialize_turtle_with_base(&g, Some("http://example.org/r"));
        assert!(text.contains("<#it>"));
        assert!(text.contains("<>"));
        let re = parse_turtle(&text, Some("http://other.org/s")).unwrap();
        assert!(re.has(
            &Term::iri("http://other.org/s#it"),
            &Term::iri("http://p/x"),
            &Term::iri("http://other.org/s"),
        ));
    }

    #[test]
    fn variables_rejected_in_turtle() {
        assert!(parse_turtle("?s <http://p> <http://o> .", None).is_err());
        assert!(parse_turtle("{ <http://s> <http://p> <http://o> } => {} .", None).is_err());
    }
}
