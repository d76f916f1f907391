//! One-way OWL export in Turtle.
//!
//! Concepts become `owl:Class`es (parents as `rdfs:subClassOf`), lemmas become
//! language-tagged `rdfs:label`s on the classes they lexicalize, glosses become
//! `skos:definition`s. Expressions are also emitted as individuals so that
//! synonym, translation and acronym links survive as annotation triples.
//! Subjects, predicates and objects are written in sorted order.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{ConceptId, ExpressionId, Ontology, ValueType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwlOptions {
    /// Namespace root; concepts live under `<base>concept:`, expressions under
    /// `<base>expression:` and so on.
    pub base: String,
}

impl Default for OwlOptions {
    fn default() -> Self {
        OwlOptions {
            base: "urn:ontoserv:".to_string(),
        }
    }
}

/// Escapes a Turtle string literal body.
fn literal(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn tagged(text: &str, lang: impl std::fmt::Display) -> String {
    format!("{}@{lang}", literal(text))
}

fn concept(id: &ConceptId) -> String {
    format!("c:{id}")
}

fn expression(id: &ExpressionId) -> String {
    format!("x:{id}")
}

fn xsd(value_type: ValueType) -> &'static str {
    match value_type {
        ValueType::Text => "xsd:string",
        ValueType::Number => "xsd:decimal",
        ValueType::Boolean => "xsd:boolean",
        ValueType::Date => "xsd:date",
    }
}

type Statements<'a> = Vec<(&'a str, Vec<String>)>;

/// Writes `subject` with its predicate/object list, objects sorted per predicate.
fn block(out: &mut String, subject: &str, mut statements: Statements) {
    statements.retain(|(_, objects)| !objects.is_empty());
    for (_, objects) in statements.iter_mut() {
        objects.sort();
        objects.dedup();
    }
    let _ = write!(out, "\n{subject}");
    let last = statements.len().saturating_sub(1);
    for (i, (predicate, objects)) in statements.iter().enumerate() {
        let sep = if i == last { " ." } else { " ;" };
        let _ = write!(out, "\n    {predicate} {}{sep}", objects.join(", "));
    }
    out.push('\n');
}

pub fn export_owl(ontology: &Ontology) -> String {
    export_owl_with(ontology, &OwlOptions::default())
}

pub fn export_owl_with(ontology: &Ontology, options: &OwlOptions) -> String {
    let base = &options.base;
    let mut out = String::new();
    for (prefix, iri) in [
        ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#".to_string()),
        ("rdfs", "http://www.w3.org/2000/01/rdf-schema#".to_string()),
        ("owl", "http://www.w3.org/2002/07/owl#".to_string()),
        ("xsd", "http://www.w3.org/2001/XMLSchema#".to_string()),
        ("skos", "http://www.w3.org/2004/02/skos/core#".to_string()),
        ("os", format!("{base}vocab#")),
        ("c", format!("{base}concept:")),
        ("x", format!("{base}expression:")),
        ("p", format!("{base}property:")),
        ("r", format!("{base}relation:")),
    ] {
        let _ = writeln!(out, "@prefix {prefix}: <{iri}> .");
    }

    let sectors: Vec<String> = ontology.sectors().iter().map(|s| literal(s)).collect();
    block(
        &mut out,
        &format!("<{base}ontology>"),
        vec![
            ("a", vec!["owl:Ontology".to_string()]),
            ("os:referenceLanguage", vec![literal(ontology.reference_language().as_str())]),
            ("os:sector", sectors),
        ],
    );

    if ontology.is_empty() {
        return out;
    }

    for (name, kind) in [
        ("os:Expression", "owl:Class"),
        ("os:lexicalizes", "owl:AnnotationProperty"),
        ("os:synonym", "owl:AnnotationProperty"),
        ("os:translation", "owl:AnnotationProperty"),
        ("os:acronymOf", "owl:AnnotationProperty"),
        ("os:variant", "owl:AnnotationProperty"),
        ("os:cardinality", "owl:AnnotationProperty"),
    ] {
        block(&mut out, name, vec![("a", vec![kind.to_string()])]);
    }

    for c in ontology.concepts() {
        let labels: Vec<String> = ontology
            .expressions_of(&c.id)
            .filter_map(|x| ontology.expression(x))
            .map(|e| tagged(&e.lemma, e.language))
            .collect();
        block(
            &mut out,
            &concept(&c.id),
            vec![
                ("a", vec!["owl:Class".to_string()]),
                ("rdfs:subClassOf", c.parents.iter().map(concept).collect()),
                ("rdfs:label", labels),
                (
                    "skos:definition",
                    c.glosses.iter().map(|(l, g)| tagged(g, l)).collect(),
                ),
            ],
        );
    }

    let mut properties: BTreeSet<(String, Statements)> = BTreeSet::new();
    for c in ontology.concepts() {
        for p in &c.properties {
            let mut comment = Vec::new();
            if !p.description.is_empty() {
                comment.push(literal(&p.description));
            }
            properties.insert((
                format!("p:{}:{}", c.id, p.name),
                vec![
                    ("a", vec!["owl:DatatypeProperty".to_string()]),
                    ("rdfs:label", vec![literal(&p.name)]),
                    ("rdfs:comment", comment),
                    ("rdfs:domain", vec![concept(&c.id)]),
                    ("rdfs:range", vec![xsd(p.value_type).to_string()]),
                ],
            ));
        }
        for r in &c.relations {
            properties.insert((
                format!("r:{}:{}:{}", c.id, r.name.replace(|ch: char| !ch.is_ascii_alphanumeric() && ch != '_', "_"), r.target),
                vec![
                    ("a", vec!["owl:ObjectProperty".to_string()]),
                    ("rdfs:label", vec![literal(&r.name)]),
                    ("rdfs:domain", vec![concept(&r.source)]),
                    ("rdfs:range", vec![concept(&r.target)]),
                    ("os:cardinality", vec![literal(r.cardinality.as_str())]),
                ],
            ));
        }
    }
    for (subject, statements) in properties {
        block(&mut out, &subject, statements);
    }

    for e in ontology.expressions() {
        let variants = ontology
            .variants_of(&e.id)
            .iter()
            .map(|v| tagged(&v.form, e.language))
            .collect();
        block(
            &mut out,
            &expression(&e.id),
            vec![
                ("a", vec!["owl:NamedIndividual".to_string(), "os:Expression".to_string()]),
                ("skos:prefLabel", vec![tagged(&e.lemma, e.language)]),
                ("os:lexicalizes", e.concepts.iter().map(concept).collect()),
                ("os:synonym", e.synonyms.iter().map(expression).collect()),
                ("os:translation", e.translations.iter().map(expression).collect()),
                ("os:acronymOf", e.acronym_of.iter().map(expression).collect()),
                ("os:variant", variants),
            ],
        );
    }
    out
}
