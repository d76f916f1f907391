use std::collections::{BTreeMap, BTreeSet};

use ontoserv_core::catalog::{Catalog, Field, ServiceRecord};
use ontoserv_core::ontology::{ExpansionPolicy, Expansion, ExpressionId, Ontology, Provenance};
use ontoserv_core::profile::UserProfile;
use ontoserv_core::reformulate::{EnrichedQuery, TermKey};
use ontoserv_core::search::{MatchedTerm, RankOptions, SearchResult};
use ontoserv_core::text::tokenize;
use ontoserv_core::LanguageCode;

/// Every edge leaving `id`, parallel edges included, found by scanning the
/// whole ontology.
fn edges(o: &Ontology, id: &ExpressionId, p: &ExpansionPolicy) -> Vec<(ExpressionId, f64, Provenance)> {
    let Some(e) = o.expression(id) else { return Vec::new() };
    let mut out = Vec::new();
    for s in &e.synonyms {
        out.push((s.clone(), p.weight_synonym, Provenance::Synonym));
    }
    for t in &e.translations {
        out.push((t.clone(), p.weight_translation, Provenance::Translation));
    }
    for other in o.expressions() {
        if e.concepts.iter().any(|c| other.concepts.contains(c)) {
            let prov = if other.language == e.language { Provenance::Synonym } else { Provenance::Translation };
            out.push((other.id.clone(), p.weight_synonym, prov));
        }
        let related = other.concepts.iter().any(|oc| {
            e.concepts.iter().any(|c| {
                let c_parent_of_oc = o.concept(oc).is_some_and(|x| x.parents.contains(c));
                let oc_parent_of_c = o.concept(c).is_some_and(|x| x.parents.contains(oc));
                c_parent_of_oc || oc_parent_of_c
            })
        });
        if related {
            out.push((other.id.clone(), p.weight_hierarchy, Provenance::Hierarchy));
        }
    }
    out.retain(|(t, w, _)| t != id && *w > 0.0 && o.expression(t).is_some());
    out
}

fn better(a: (f64, Provenance), b: (f64, Provenance)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Enumerates every walk of at most `depth` edges from `seed` and keeps, per
/// end point, the best product of weights (then the nearest walk provenance).
pub fn expand(o: &Ontology, seed: &ExpressionId, p: &ExpansionPolicy) -> Vec<Expansion> {
    let mut memo: BTreeMap<ExpressionId, Vec<(ExpressionId, f64, Provenance)>> = BTreeMap::new();
    let mut best: BTreeMap<ExpressionId, (f64, Provenance)> = BTreeMap::new();
    let mut stack = vec![(seed.clone(), 1.0f64, Provenance::Original, 0usize)];
    while let Some((node, w, prov, hops)) = stack.pop() {
        if hops == p.depth {
            continue;
        }
        let out = memo.entry(node.clone()).or_insert_with(|| edges(o, &node, p)).clone();
        for (target, ew, ep) in out {
            let walk = (w * ew, prov.max(ep));
            if &target != seed && best.get(&target).is_none_or(|&b| better(walk, b)) {
                best.insert(target.clone(), walk);
            }
            stack.push((target, walk.0, walk.1, hops + 1));
        }
    }
    let mut reached: Vec<Expansion> = best
        .into_iter()
        .map(|(expression, (weight, provenance))| Expansion { expression, weight, provenance })
        .collect();
    reached.sort_by(|a, b| b.weight.partial_cmp(&a.weight).unwrap().then(a.expression.cmp(&b.expression)));
    reached.truncate(p.max_added_per_term);
    let mut all = vec![Expansion {
        expression: seed.clone(),
        weight: 1.0,
        provenance: Provenance::Original,
    }];
    all.extend(reached);
    all
}

/// Tokens of one field of a record in one language.
fn field_tokens(r: &ServiceRecord, field: Field, lang: LanguageCode) -> BTreeSet<String> {
    let texts: Vec<&String> = match field {
        Field::Title => r.titles.get(&lang).into_iter().collect(),
        Field::Description => r.descriptions.get(&lang).into_iter().collect(),
        Field::Keyword => {
            let has_lang = r.titles.contains_key(&lang) || r.descriptions.contains_key(&lang);
            if has_lang { r.keywords.iter().collect() } else { Vec::new() }
        }
        Field::Annotation => Vec::new(),
    };
    texts.into_iter().flat_map(|t| tokenize(t, lang)).collect()
}

fn hit_fields(r: &ServiceRecord, key: &TermKey) -> Vec<Field> {
    match key {
        TermKey::Concept { concept } => {
            if r.concepts.contains(concept) { vec![Field::Annotation] } else { vec![] }
        }
        TermKey::Text { language, form } => [Field::Title, Field::Description, Field::Keyword]
            .into_iter()
            .filter(|&f| {
                let toks = field_tokens(r, f, *language);
                form.split(' ').all(|t| toks.contains(t))
            })
            .collect(),
    }
}

/// Scans every service and applies the scoring formula term by term.
pub fn rank(query: &EnrichedQuery, catalog: &Catalog, profile: Option<&UserProfile>, options: &RankOptions) -> Vec<SearchResult> {
    let fw = &options.field_weights;
    let n = catalog.len() as f64;
    let mut terms = query.terms.clone();
    terms.sort_by(|a, b| a.key.cmp(&b.key));

    let hits: Vec<Vec<(String, Vec<Field>)>> = terms
        .iter()
        .map(|t| {
            catalog
                .iter()
                .map(|r| (r.id.clone(), hit_fields(r, &t.key)))
                .filter(|(_, f)| !f.is_empty())
                .collect()
        })
        .collect();

    let mut results = Vec::new();
    for r in catalog.iter() {
        let mut matched = Vec::new();
        let mut base = 0.0;
        for (t, th) in terms.iter().zip(&hits) {
            let Some((_, fields)) = th.iter().find(|(id, _)| *id == r.id) else { continue };
            let mut field = fields[0];
            for &f in &fields[1..] {
                if fw.get(f) > fw.get(field) {
                    field = f;
                }
            }
            let idf = (1.0 + n / th.len() as f64).ln();
            base += t.weight * fw.get(field) * idf;
            matched.push(MatchedTerm {
                key: t.key.clone(),
                weight: t.weight,
                provenance: t.provenance,
                field,
                idf,
            });
        }
        if base <= 0.0 {
            continue;
        }
        let mut interest: f64 = 0.0;
        if let Some(p) = profile {
            for c in &r.concepts {
                interest = interest.max(p.interests.get(c).copied().unwrap_or(0.0));
            }
            interest = interest.max(p.sector_interests.get(&r.sector).copied().unwrap_or(0.0));
        }
        let factor = 1.0 + options.alpha * interest;
        results.push(SearchResult {
            service: r.id.clone(),
            score: base * factor,
            base_score: base,
            personalization_factor: factor,
            matched_terms: matched,
        });
    }
    results.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap().then(a.service.cmp(&b.service)));
    results.truncate(options.k);
    results
}

/// The preferred segmentation among all segmentations into lexicon keys and
/// single unmatched tokens: the lexicographically largest sequence of
/// (length, matched) pairs.
pub fn segmentation(tokens: &[String], lang: LanguageCode, o: &Ontology) -> Vec<(usize, bool)> {
    fn all(tokens: &[String], lang: LanguageCode, o: &Ontology) -> Vec<Vec<(usize, bool)>> {
        if tokens.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for len in 1..=tokens.len() {
            let matched = o.lexicon().get_tokens(lang, &tokens[..len]).is_some();
            if !matched && len > 1 {
                continue;
            }
            for rest in all(&tokens[len..], lang, o) {
                let mut seg = vec![(len, matched)];
                seg.extend(rest);
                out.push(seg);
            }
        }
        out
    }
    all(tokens, lang, o).into_iter().max().unwrap_or_default()
}

/// Everything an ontology holds, in comparable form.
pub type Structure = (
    Vec<String>,
    LanguageCode,
    Vec<ontoserv_core::ontology::Concept>,
    Vec<ontoserv_core::ontology::Expression>,
    Vec<ontoserv_core::ontology::ExpressionVariant>,
    Vec<(ontoserv_core::ontology::LexiconKey, BTreeSet<ExpressionId>)>,
);

pub fn structure(o: &Ontology) -> Structure {
    let mut variants = o.variants().to_vec();
    variants.sort();
    (
        o.sectors().iter().cloned().collect(),
        o.reference_language(),
        o.concepts().cloned().collect(),
        o.expressions().cloned().collect(),
        variants,
        o.lexicon().iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
    )
}
