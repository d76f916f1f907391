use std::collections::BTreeSet;

use ontoserv_core::catalog::{Catalog, ServiceRecord};
use ontoserv_core::ontology::{Concept, ConceptId, ExpansionPolicy, Expression, ExpressionId, Ontology, Provenance, VariantKind};
use ontoserv_core::reformulate::{EnrichedQuery, Term, TermKey};
use ontoserv_core::text::Analyzer;
use ontoserv_core::LanguageCode;
use rand::seq::SliceRandom;
use rand::Rng;

pub const LANGUAGES: [LanguageCode; 3] = [LanguageCode::FR, LanguageCode::AR, LanguageCode::EN];

/// Small per-language vocabularies, so random texts collide often.
pub fn vocabulary(language: LanguageCode) -> &'static [&'static str] {
    match language.as_str() {
        "ar" => &["جمرك", "رسوم", "تأشيرة", "سيارة", "مسافر", "اعفاء", "تصريح", "فندق"],
        "en" => &["duty", "free", "visa", "car", "traveler", "tariff", "declaration", "hotel"],
        _ => &["douane", "franchise", "visa", "voiture", "voyageur", "tarif", "declaration", "hotel"],
    }
}

pub fn word<R: Rng>(rng: &mut R, language: LanguageCode) -> &'static str {
    vocabulary(language).choose(rng).copied().unwrap()
}

pub fn phrase<R: Rng>(rng: &mut R, language: LanguageCode, max_words: usize) -> String {
    let n = rng.gen_range(1..=max_words);
    (0..n).map(|_| word(rng, language)).collect::<Vec<_>>().join(" ")
}

pub fn language<R: Rng>(rng: &mut R) -> LanguageCode {
    *LANGUAGES.choose(rng).unwrap()
}

fn cid(sector: &str, i: usize) -> ConceptId {
    format!("{sector}:c{i}").parse().unwrap()
}

fn pick<R: Rng, T: Clone>(rng: &mut R, items: &[T]) -> Option<T> {
    items.choose(rng).cloned()
}

/// Random single-sector ontology with up to `max_expressions` expressions and
/// random synonym, translation, concept and hierarchy edges. Hierarchy edges
/// point from higher to lower concept numbers, so there are no cycles.
pub fn ontology<R: Rng>(rng: &mut R, sector: &str, max_expressions: usize) -> Ontology {
    let n_concepts = rng.gen_range(1..=8);
    let mut concepts: Vec<Concept> = (0..n_concepts).map(|i| Concept::new(cid(sector, i))).collect();
    for (i, c) in concepts.iter_mut().enumerate().skip(1) {
        if rng.gen_bool(0.5) {
            let parent = rng.gen_range(0..i);
            c.parents.insert(cid(sector, parent));
        }
    }

    let n_expr = rng.gen_range(1..=max_expressions);
    let mut exprs: Vec<Expression> = (0..n_expr)
        .map(|i| {
            let lang = language(rng);
            let id: ExpressionId = format!("{lang}:{sector}:e{i}").parse().unwrap();
            let mut e = Expression::new(id, phrase(rng, lang, 2));
            for _ in 0..rng.gen_range(0..=2) {
                e.concepts.insert(cid(sector, rng.gen_range(0..n_concepts)));
            }
            e
        })
        .collect();

    let ids: Vec<ExpressionId> = exprs.iter().map(|e| e.id.clone()).collect();
    for e in exprs.iter_mut() {
        for _ in 0..rng.gen_range(0..=2) {
            let Some(other) = pick(rng, &ids) else { continue };
            if other == e.id {
                continue;
            }
            if other.language() == e.language {
                e.synonyms.insert(other);
            } else {
                e.translations.insert(other);
            }
        }
    }

    let mut b = Ontology::builder(LanguageCode::FR).sector(sector);
    for c in concepts {
        b = b.concept(c);
    }
    let mut variants: Vec<(ExpressionId, String)> = Vec::new();
    for e in &exprs {
        if rng.gen_bool(0.3) {
            variants.push((e.id.clone(), phrase(rng, e.language, 2)));
        }
    }
    for e in exprs {
        b = b.expression(e);
    }
    for (id, form) in variants {
        b = b.variant(&id, &form, VariantKind::Spelling);
    }
    b.build(&Analyzer::default())
}

pub fn policy<R: Rng>(rng: &mut R) -> ExpansionPolicy {
    let w = |rng: &mut R| *[0.0, 0.25, 0.5, 0.8, 0.9, 1.0].choose(rng).unwrap();
    ExpansionPolicy {
        weight_synonym: w(rng),
        weight_translation: w(rng),
        weight_hierarchy: w(rng),
        max_added_per_term: rng.gen_range(0..=12),
        max_total_terms: rng.gen_range(1..=64),
        depth: rng.gen_range(1..=3),
    }
}

/// A record with text in one to three languages drawn from the vocabularies.
pub fn record<R: Rng>(rng: &mut R, id: &str, concept_pool: &[ConceptId]) -> ServiceRecord {
    let mut langs: Vec<LanguageCode> = LANGUAGES.to_vec();
    langs.shuffle(rng);
    langs.truncate(rng.gen_range(1..=3));
    let mut r = ServiceRecord {
        id: id.to_string(),
        sector: ["customs", "tourism"].choose(rng).unwrap().to_string(),
        administration: "admin".into(),
        url: format!("https://services.example.ma/{id}"),
        titles: Default::default(),
        descriptions: Default::default(),
        keywords: Vec::new(),
        concepts: BTreeSet::new(),
    };
    for &l in &langs {
        r.titles.insert(l, phrase(rng, l, 3));
        if rng.gen_bool(0.6) {
            r.descriptions.insert(l, phrase(rng, l, 5));
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        r.keywords.push(phrase(rng, langs[0], 2));
    }
    for _ in 0..rng.gen_range(0..=2) {
        if let Some(c) = pick(rng, concept_pool) {
            r.concepts.insert(c);
        }
    }
    r
}

pub fn concept_pool() -> Vec<ConceptId> {
    (0..5).map(|i| cid("customs", i)).collect()
}

pub fn catalog<R: Rng>(rng: &mut R, max_services: usize) -> Catalog {
    let pool = concept_pool();
    let n = rng.gen_range(0..=max_services);
    Catalog::from_records((0..n).map(|i| record(rng, &format!("s{i:02}"), &pool))).unwrap()
}

/// Random enriched query over the generator vocabularies and concept pool.
pub fn enriched_query<R: Rng>(rng: &mut R) -> EnrichedQuery {
    let pool = concept_pool();
    let provenances = [
        Provenance::Original,
        Provenance::Variant,
        Provenance::Synonym,
        Provenance::Translation,
        Provenance::Hierarchy,
        Provenance::Concept,
    ];
    let n = rng.gen_range(0..=6);
    let mut terms = Vec::new();
    for _ in 0..n {
        let key = if rng.gen_bool(0.25) {
            TermKey::concept(pick(rng, &pool).unwrap())
        } else {
            let l = language(rng);
            let tokens = ontoserv_core::text::tokenize(&phrase(rng, l, 2), l);
            TermKey::text(l, tokens.join(" "))
        };
        let weight = *[1.0, 0.8, 0.5, 0.4, 0.25].choose(rng).unwrap();
        terms.push(Term {
            key,
            weight,
            provenance: *provenances.choose(rng).unwrap(),
        });
    }
    EnrichedQuery::from_terms(language(rng), terms)
}

/// Query text mixing vocabulary words, stopwords, punctuation and case.
pub fn query_text<R: Rng>(rng: &mut R, language: LanguageCode) -> String {
    let stop: &[&str] = match language.as_str() {
        "ar" => &["في", "من", "على"],
        "en" => &["the", "of", "for"],
        _ => &["de", "la", "pour", "les"],
    };
    let n = rng.gen_range(1..=8);
    let mut parts = Vec::new();
    for _ in 0..n {
        let w = if rng.gen_bool(0.3) { *stop.choose(rng).unwrap() } else { word(rng, language) };
        let w = if rng.gen_bool(0.2) { w.to_uppercase() } else { w.to_string() };
        parts.push(w);
        if rng.gen_bool(0.2) {
            parts.push([",", "?", "-", "!"].choose(rng).unwrap().to_string());
        }
    }
    parts.join(" ")
}
