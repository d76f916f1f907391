//! Canonical JSON persistence of sectoral and mother ontologies.
//!
//! Unknown keys are rejected. Export sorts every collection by id so the output
//! is byte-stable for a given ontology.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    is_token, Cardinality, Concept, ConceptId, ConceptProperty, Expression, ExpressionId,
    ExpressionVariant, Ontology, OntologyBuilder, SemanticRelation, ValueType, VariantKind,
};
use crate::error::{CoreError, Result};
use crate::lang::LanguageCode;
use crate::text::Analyzer;

pub const FORMAT_VERSION: &str = "1";
/// Sector tag of a mother ontology document; the real tags go in `sectors`.
pub const MERGED_SECTOR: &str = "__merged__";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format_version: String,
    sector: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sectors: Option<Vec<String>>,
    reference_language: LanguageCode,
    #[serde(default)]
    concepts: Vec<ConceptDoc>,
    #[serde(default)]
    expressions: Vec<ExpressionDoc>,
    #[serde(default)]
    variants: Vec<VariantDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConceptDoc {
    id: ConceptId,
    #[serde(default)]
    glosses: BTreeMap<LanguageCode, String>,
    #[serde(default)]
    parents: Vec<ConceptId>,
    #[serde(default)]
    properties: Vec<PropertyDoc>,
    #[serde(default)]
    relations: Vec<RelationDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PropertyDoc {
    name: String,
    #[serde(default)]
    description: String,
    value_type: ValueType,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationDoc {
    name: String,
    target: ConceptId,
    cardinality: Cardinality,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpressionDoc {
    id: ExpressionId,
    language: LanguageCode,
    lemma: String,
    #[serde(default)]
    concepts: Vec<ConceptId>,
    #[serde(default)]
    synonyms: Vec<ExpressionId>,
    #[serde(default)]
    translations: Vec<ExpressionId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    acronym_of: Option<ExpressionId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariantDoc {
    expression: ExpressionId,
    form: String,
    kind: VariantKind,
}

fn schema(field: &str, message: impl Into<String>) -> CoreError {
    CoreError::Schema {
        field: Some(field.to_string()),
        message: message.into(),
    }
}

/// Parses a canonical document using the bundled analyzer.
pub fn import_canonical(document: &str) -> Result<Ontology> {
    import_canonical_with(document, &Analyzer::default())
}

/// Parses a canonical document; `analyzer` determines the lexicon keys.
pub fn import_canonical_with(document: &str, analyzer: &Analyzer) -> Result<Ontology> {
    let doc: Document = serde_json::from_str(document).map_err(CoreError::from_json)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(schema(
            "format_version",
            format!("unsupported version {:?}, expected {FORMAT_VERSION:?}", doc.format_version),
        ));
    }

    let mut builder = OntologyBuilder::new(doc.reference_language);
    match (doc.sector.as_str(), doc.sectors) {
        (MERGED_SECTOR, Some(sectors)) => {
            for s in sectors {
                if !is_token(&s) {
                    return Err(schema("sectors", format!("{s:?} is not a valid sector tag")));
                }
                builder.add_sector(s);
            }
        }
        (MERGED_SECTOR, None) => {
            return Err(schema("sectors", "a merged document must list its sectors"));
        }
        (sector, None) if is_token(sector) => builder.add_sector(sector),
        (sector, None) => {
            return Err(schema("sector", format!("{sector:?} is not a valid sector tag")));
        }
        (_, Some(_)) => {
            return Err(schema("sectors", "only merged documents carry a sector list"));
        }
    }

    for c in doc.concepts {
        let mut concept = Concept::new(c.id.clone());
        concept.glosses = c.glosses;
        concept.parents = c.parents.into_iter().collect();
        for p in c.properties {
            if !is_token(&p.name) {
                return Err(schema("properties.name", format!("{:?} is not a valid property name", p.name)));
            }
            concept.properties.push(ConceptProperty {
                name: p.name,
                description: p.description,
                value_type: p.value_type,
                owner: c.id.clone(),
            });
        }
        for r in c.relations {
            if r.name.trim().is_empty() {
                return Err(schema("relations.name", format!("empty relation name on {}", c.id)));
            }
            concept.relations.push(SemanticRelation {
                name: r.name,
                source: c.id.clone(),
                target: r.target,
                cardinality: r.cardinality,
            });
        }
        builder.add_concept(concept);
    }

    for e in doc.expressions {
        let lemma = e.lemma.trim();
        if lemma.is_empty() {
            return Err(schema("lemma", format!("empty lemma on {}", e.id)));
        }
        builder.add_expression(Expression {
            id: e.id,
            language: e.language,
            lemma: lemma.to_string(),
            concepts: e.concepts.into_iter().collect(),
            synonyms: e.synonyms.into_iter().collect(),
            translations: e.translations.into_iter().collect(),
            acronym_of: e.acronym_of,
        });
    }

    for v in doc.variants {
        let form = v.form.trim();
        if form.is_empty() {
            return Err(schema("form", format!("empty variant form on {}", v.expression)));
        }
        builder.add_variant(ExpressionVariant {
            expression: v.expression,
            form: form.to_string(),
            kind: v.kind,
        });
    }

    Ok(builder.build(analyzer))
}

fn sorted<T: Ord + Clone>(set: &BTreeSet<T>) -> Vec<T> {
    set.iter().cloned().collect()
}

/// Pretty-printed canonical document with sorted ids and a trailing newline.
pub fn export_canonical(ontology: &Ontology) -> String {
    let (sector, sectors) = match ontology.sectors().len() {
        1 => (ontology.sectors().iter().next().cloned().unwrap_or_default(), None),
        _ => (MERGED_SECTOR.to_string(), Some(ontology.sectors().iter().cloned().collect())),
    };
    let doc = Document {
        format_version: FORMAT_VERSION.to_string(),
        sector,
        sectors,
        reference_language: ontology.reference_language(),
        concepts: ontology
            .concepts()
            .map(|c| ConceptDoc {
                id: c.id.clone(),
                glosses: c.glosses.clone(),
                parents: sorted(&c.parents),
                properties: {
                    let mut props: Vec<PropertyDoc> = c
                        .properties
                        .iter()
                        .map(|p| PropertyDoc {
                            name: p.name.clone(),
                            description: p.description.clone(),
                            value_type: p.value_type,
                        })
                        .collect();
                    props.sort_by(|a, b| a.name.cmp(&b.name));
                    props
                },
                relations: {
                    let mut rels: Vec<&SemanticRelation> = c.relations.iter().collect();
                    rels.sort_by(|a, b| (&a.name, &a.target, a.cardinality).cmp(&(&b.name, &b.target, b.cardinality)));
                    rels.into_iter()
                        .map(|r| RelationDoc {
                            name: r.name.clone(),
                            target: r.target.clone(),
                            cardinality: r.cardinality,
                        })
                        .collect()
                },
            })
            .collect(),
        expressions: ontology
            .expressions()
            .map(|e| ExpressionDoc {
                id: e.id.clone(),
                language: e.language,
                lemma: e.lemma.clone(),
                concepts: sorted(&e.concepts),
                synonyms: sorted(&e.synonyms),
                translations: sorted(&e.translations),
                acronym_of: e.acronym_of.clone(),
            })
            .collect(),
        variants: ontology
            .variants()
            .iter()
            .map(|v| VariantDoc {
                expression: v.expression.clone(),
                form: v.form.clone(),
                kind: v.kind,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("canonical document serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    type Links = Vec<(String, String, &'static str)>;

    /// Independent structural view: sorted id sets and link pairs.
    fn structure(o: &Ontology) -> (Vec<String>, Vec<String>, Vec<String>, Links) {
        let concepts = o.concepts().map(|c| c.id.to_string()).collect();
        let expressions = o.expressions().map(|e| e.id.to_string()).collect();
        let variants = o
            .variants()
            .iter()
            .map(|v| format!("{}|{}|{}", v.expression, v.form, v.kind.as_str()))
            .collect();
        let mut links = Vec::new();
        for e in o.expressions() {
            for s in &e.synonyms {
                links.push((e.id.to_string(), s.to_string(), "syn"));
            }
            for t in &e.translations {
                links.push((e.id.to_string(), t.to_string(), "trans"));
            }
        }
        links.sort();
        (concepts, expressions, variants, links)
    }

    #[test]
    fn empty_round_trip() {
        let empty = Ontology::empty(&Analyzer::default());
        let text = export_canonical(&empty);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["reference_language"], "fr");
        assert_eq!(value["concepts"], serde_json::json!([]));
        assert_eq!(value["sector"], MERGED_SECTOR);
        let back = import_canonical(&text).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn duty_free_round_trip() {
        let o = duty_free();
        let text = export_canonical(&o);
        let back = import_canonical(&text).unwrap();
        assert_eq!(structure(&o), structure(&back));
        assert_eq!(export_canonical(&back), text);
        // symmetric links survive
        let (_, _, _, links) = structure(&back);
        assert!(links.contains(&("fr:customs:franchise".into(), "en:customs:duty_free".into(), "trans")));
    }

    #[test]
    fn unknown_top_level_key_names_the_key() {
        let text = r#"{"format_version":"1","sector":"customs","reference_language":"fr","colour":"blue"}"#;
        match import_canonical(text) {
            Err(CoreError::Schema { field, .. }) => assert_eq!(field.as_deref(), Some("colour")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_position() {
        let text = "{\n\"format_version\": \"1\",\n\"sector\": customs}";
        match import_canonical(text) {
            Err(CoreError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_rules() {
        let cases = [
            (r#"{"format_version":"2","sector":"s","reference_language":"fr"}"#, "format_version"),
            (r#"{"format_version":"1","sector":"__merged__","reference_language":"fr"}"#, "sectors"),
            (r#"{"format_version":"1","sector":"a b","reference_language":"fr"}"#, "sector"),
            (
                r#"{"format_version":"1","sector":"s","reference_language":"fr",
                    "expressions":[{"id":"fr:s:x","language":"fr","lemma":"  "}]}"#,
                "lemma",
            ),
        ];
        for (text, field) in cases {
            match import_canonical(text) {
                Err(CoreError::Schema { field: f, .. }) => assert_eq!(f.as_deref(), Some(field), "{text}"),
                other => panic!("{text}: unexpected {other:?}"),
            }
        }
        let bad_card = r#"{"format_version":"1","sector":"s","reference_language":"fr",
            "concepts":[{"id":"s:a","relations":[{"name":"r","target":"s:a","cardinality":"2..3"}]}]}"#;
        assert!(matches!(import_canonical(bad_card), Err(CoreError::Schema { .. })));
        let bad_lang = r#"{"format_version":"1","sector":"s","reference_language":"FR"}"#;
        assert!(matches!(import_canonical(bad_lang), Err(CoreError::Schema { .. })));
    }

    #[test]
    fn merged_document_keeps_sectors() {
        let text = r#"{"format_version":"1","sector":"__merged__","sectors":["customs","tourism"],"reference_language":"fr"}"#;
        let o = import_canonical(text).unwrap();
        assert_eq!(o.sectors().len(), 2);
        let again = import_canonical(&export_canonical(&o)).unwrap();
        assert_eq!(again.sectors(), o.sectors());
    }
}
