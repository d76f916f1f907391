//! Scoring, personalized ranking and result explanations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{Field, IndexedCatalog, ServiceIndex};
use crate::exec::Execution;
use crate::ontology::Provenance;
use crate::profile::UserProfile;
use crate::reformulate::{EnrichedQuery, Term, TermKey};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldWeights {
    pub annotation: f64,
    pub title: f64,
    pub keyword: f64,
    pub description: f64,
}

impl Default for FieldWeights {
    fn default() -> Self {
        FieldWeights {
            annotation: 1.0,
            title: 0.7,
            keyword: 0.6,
            description: 0.4,
        }
    }
}

impl FieldWeights {
    pub fn get(&self, field: Field) -> f64 {
        match field {
            Field::Annotation => self.annotation,
            Field::Title => self.title,
            Field::Keyword => self.keyword,
            Field::Description => self.description,
        }
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        for field in Field::ALL {
            let w = self.get(field);
            if !(0.0..=1.0).contains(&w) {
                return Err(format!("{} weight must lie in [0, 1], got {w}", field.as_str()));
            }
        }
        Ok(())
    }

    /// Highest-weighted field of `fields`; the earlier field wins a tie.
    fn best(&self, fields: impl IntoIterator<Item = Field>) -> Option<Field> {
        fields
            .into_iter()
            .fold(None, |best: Option<Field>, f| match best {
                Some(b) if self.get(b) >= self.get(f) => Some(b),
                _ => Some(f),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankOptions {
    pub field_weights: FieldWeights,
    /// Personalization strength.
    pub alpha: f64,
    pub k: usize,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            field_weights: FieldWeights::default(),
            alpha: 0.25,
            k: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedTerm {
    pub key: TermKey,
    pub weight: f64,
    pub provenance: Provenance,
    pub field: Field,
    pub idf: f64,
}

impl MatchedTerm {
    pub fn contribution(&self, weights: &FieldWeights) -> f64 {
        self.weight * weights.get(self.field) * self.idf
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub service: String,
    /// Personalized score.
    pub score: f64,
    pub base_score: f64,
    pub personalization_factor: f64,
    pub matched_terms: Vec<MatchedTerm>,
}

/// `ln(1 + N/df)`.
pub fn idf(doc_count: usize, df: usize) -> f64 {
    if df == 0 {
        return 0.0;
    }
    (1.0 + doc_count as f64 / df as f64).ln()
}

/// Services a term hits and the fields it hits in each.
fn resolve(index: &ServiceIndex, key: &TermKey) -> BTreeMap<String, Vec<Field>> {
    match key {
        TermKey::Text { language, form } => {
            let tokens: Vec<String> = form.split(' ').map(str::to_owned).collect();
            index
                .text_hits(*language, &tokens)
                .into_iter()
                .map(|(s, fields)| (s.to_string(), fields.into_iter().collect()))
                .collect()
        }
        TermKey::Concept { concept } => index
            .concept_hits(concept)
            .into_iter()
            .map(|s| (s.to_string(), vec![Field::Annotation]))
            .collect(),
    }
}

/// Per-term hits, resolved once per query.
struct Resolved<'q> {
    term: &'q Term,
    idf: f64,
    hits: BTreeMap<String, Vec<Field>>,
}

fn resolve_all<'q>(query: &'q EnrichedQuery, index: &ServiceIndex, exec: Execution) -> Vec<Resolved<'q>> {
    let n = index.doc_count();
    let terms: Vec<&'q Term> = query.terms.iter().collect();
    exec.map(&terms, |&term| {
        let hits = resolve(index, &term.key);
        Resolved {
            term,
            idf: idf(n, hits.len()),
            hits,
        }
    })
}

fn matched(r: &Resolved<'_>, fields: &[Field], weights: &FieldWeights) -> Option<MatchedTerm> {
    let field = weights.best(fields.iter().copied())?;
    Some(MatchedTerm {
        key: r.term.key.clone(),
        weight: r.term.weight,
        provenance: r.term.provenance,
        field,
        idf: r.idf,
    })
}

fn sum(terms: &[MatchedTerm], weights: &FieldWeights) -> f64 {
    terms.iter().map(|m| m.contribution(weights)).sum()
}

/// Base score of one service and the terms that hit it, in key order.
pub fn score(query: &EnrichedQuery, service: &str, index: &ServiceIndex, weights: &FieldWeights) -> (f64, Vec<MatchedTerm>) {
    let terms: Vec<MatchedTerm> = resolve_all(query, index, Execution::Sequential)
        .iter()
        .filter_map(|r| matched(r, r.hits.get(service)?, weights))
        .collect();
    (sum(&terms, weights), terms)
}

/// Ranks every service hit by the query. Scores are summed over terms in key
/// order, so both execution strategies give bit-identical results.
pub fn rank(
    query: &EnrichedQuery,
    store: &IndexedCatalog,
    profile: Option<&UserProfile>,
    options: &RankOptions,
    exec: Execution,
) -> Vec<SearchResult> {
    if options.k == 0 {
        return Vec::new();
    }
    let weights = &options.field_weights;
    let mut per_service: BTreeMap<&str, Vec<MatchedTerm>> = BTreeMap::new();
    let resolved = resolve_all(query, store.index(), exec);
    for r in &resolved {
        for (service, fields) in &r.hits {
            if let Some(m) = matched(r, fields, weights) {
                per_service.entry(service.as_str()).or_default().push(m);
            }
        }
    }

    let mut results: Vec<SearchResult> = per_service
        .into_iter()
        .filter_map(|(service, matched_terms)| {
            let base = sum(&matched_terms, weights);
            if base <= 0.0 {
                return None;
            }
            let interest = match (profile, store.catalog().get(service)) {
                (Some(p), Some(record)) => p.interest(record),
                _ => 0.0,
            };
            let factor = 1.0 + options.alpha * interest;
            Some(SearchResult {
                service: service.to_string(),
                score: base * factor,
                base_score: base,
                personalization_factor: factor,
                matched_terms,
            })
        })
        .collect();
    results.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.service.cmp(&b.service)));
    results.truncate(options.k);
    results
}

/// Ranks several queries against one snapshot.
pub fn rank_batch(
    queries: &[EnrichedQuery],
    store: &IndexedCatalog,
    profile: Option<&UserProfile>,
    options: &RankOptions,
    exec: Execution,
) -> Vec<Vec<SearchResult>> {
    exec.map(queries, |q| rank(q, store, profile, options, Execution::Sequential))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationLine {
    pub term: String,
    pub provenance: Provenance,
    pub weight: f64,
    pub field: Field,
    pub idf: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub service: String,
    pub score: f64,
    pub base_score: f64,
    pub personalization_factor: f64,
    pub lines: Vec<ExplanationLine>,
}

impl std::fmt::Display for Explanation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{}  score {:.4} = base {:.4} x {:.4}",
            self.service, self.score, self.base_score, self.personalization_factor
        )?;
        for l in &self.lines {
            writeln!(
                f,
                "  {:<11} {:<30} w={:.2} field={:<11} idf={:.4} -> {:.4}",
                l.provenance.as_str(),
                l.term,
                l.weight,
                l.field.as_str(),
                l.idf,
                l.contribution
            )?;
        }
        Ok(())
    }
}

pub fn explain(result: &SearchResult, weights: &FieldWeights) -> Explanation {
    Explanation {
        service: result.service.clone(),
        score: result.score,
        base_score: result.base_score,
        personalization_factor: result.personalization_factor,
        lines: result
            .matched_terms
            .iter()
            .map(|m| ExplanationLine {
                term: m.key.to_string(),
                provenance: m.provenance,
                weight: m.weight,
                field: m.field,
                idf: m.idf,
                contribution: m.contribution(weights),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::lang::LanguageCode;
    use crate::text::Analyzer;

    fn store(json: serde_json::Value) -> IndexedCatalog {
        IndexedCatalog::new(Catalog::ingest(&json.to_string()).unwrap(), Analyzer::default(), Execution::Sequential)
    }

    fn svc(id: &str, title: &str, concepts: &[&str]) -> serde_json::Value {
        serde_json::json!({"id": id, "sector": "customs", "administration": "ADII",
            "url": format!("https://x.ma/{id}"), "titles": {"fr": title}, "concepts": concepts})
    }

    fn term(key: TermKey, weight: f64, provenance: Provenance) -> Term {
        Term { key, weight, provenance }
    }

    fn original(form: &str) -> Term {
        term(TermKey::text(LanguageCode::FR, form), 1.0, Provenance::Original)
    }

    #[test]
    fn empty_query_scores_zero() {
        let s = store(serde_json::json!([svc("a", "visa", &[])]));
        let q = EnrichedQuery::from_terms(LanguageCode::FR, []);
        assert_eq!(score(&q, "a", s.index(), &FieldWeights::default()), (0.0, vec![]));
        assert!(rank(&q, &s, None, &RankOptions::default(), Execution::Sequential).is_empty());
    }

    #[test]
    fn title_and_annotation_arithmetic() {
        let s = store(serde_json::json!([svc("a", "visa", &["customs:duty_free"])]));
        let w = FieldWeights::default();
        let q = EnrichedQuery::from_terms(LanguageCode::FR, [original("visa")]);
        let (title_only, _) = score(&q, "a", s.index(), &w);
        assert_eq!(title_only, 1.0 * 0.7 * 2f64.ln());
        let c = TermKey::concept("customs:duty_free".parse().unwrap());
        let q = EnrichedQuery::from_terms(LanguageCode::FR, [term(c, 1.0, Provenance::Concept)]);
        let (annotation, m) = score(&q, "a", s.index(), &w);
        assert_eq!(annotation, 2f64.ln());
        assert_eq!(m[0].field, Field::Annotation);
        assert!(annotation > title_only);
    }

    #[test]
    fn concept_key_does_not_hit_text() {
        let s = store(serde_json::json!([svc("a", "customs duty_free", &[])]));
        let c = TermKey::concept("customs:duty_free".parse().unwrap());
        let q = EnrichedQuery::from_terms(LanguageCode::FR, [term(c, 1.0, Provenance::Concept)]);
        assert!(rank(&q, &s, None, &RankOptions::default(), Execution::Sequential).is_empty());
    }

    #[test]
    fn interest_breaks_a_tie() {
        let s = store(serde_json::json!([svc("a", "visa", &[]), {
            "id": "b", "sector": "tourism", "administration": "x", "url": "https://x.ma/b", "titles": {"fr": "visa"}
        }]));
        let q = EnrichedQuery::from_terms(LanguageCode::FR, [original("visa")]);
        let plain = rank(&q, &s, None, &RankOptions::default(), Execution::Sequential);
        assert_eq!(plain.iter().map(|r| r.service.as_str()).collect::<Vec<_>>(), vec!["a", "b"]);
        let mut p = UserProfile::new("u").unwrap();
        p.sector_interests.insert("tourism".into(), 1.0);
        let personal = rank(&q, &s, Some(&p), &RankOptions::default(), Execution::Sequential);
        assert_eq!(personal[0].service, "b");
        assert_eq!(personal[0].personalization_factor, 1.25);
        let no_alpha = RankOptions { alpha: 0.0, ..Default::default() };
        assert_eq!(rank(&q, &s, Some(&p), &no_alpha, Execution::Sequential), plain);
    }

    #[test]
    fn k_truncates() {
        let s = store(serde_json::json!([svc("a", "visa", &[]), svc("b", "visa", &[]), svc("c", "visa", &[])]));
        let q = EnrichedQuery::from_terms(LanguageCode::FR, [original("visa")]);
        for k in 0..4 {
            let opts = RankOptions { k, ..Default::default() };
            assert_eq!(rank(&q, &s, None, &opts, Execution::Sequential).len(), k);
        }
    }

    #[test]
    fn best_field_is_used_per_term() {
        let s = store(serde_json::json!([{
            "id": "a", "sector": "s", "administration": "x", "url": "https://x.ma/a",
            "titles": {"fr": "visa"}, "descriptions": {"fr": "visa visa"}, "keywords": ["visa"]
        }]));
        let q = EnrichedQuery::from_terms(LanguageCode::FR, [original("visa")]);
        let r = rank(&q, &s, None, &RankOptions::default(), Execution::Sequential);
        assert_eq!(r[0].matched_terms[0].field, Field::Title);
        let kw = RankOptions {
            field_weights: FieldWeights { keyword: 0.9, ..Default::default() },
            ..Default::default()
        };
        let r = rank(&q, &s, None, &kw, Execution::Sequential);
        assert_eq!(r[0].matched_terms[0].field, Field::Keyword);
    }

    #[test]
    fn explanation_echoes_provenance() {
        let s = store(serde_json::json!([svc("a", "franchise", &[])]));
        let q = EnrichedQuery::from_terms(
            LanguageCode::EN,
            [term(TermKey::text(LanguageCode::FR, "franchise"), 0.8, Provenance::Translation)],
        );
        let r = rank(&q, &s, None, &RankOptions::default(), Execution::Sequential);
        let e = explain(&r[0], &FieldWeights::default());
        assert_eq!(e.lines.len(), 1);
        assert_eq!(e.lines[0].provenance, Provenance::Translation);
        assert_eq!(e.lines[0].weight, 0.8);
        assert!(e.to_string().contains("translation"));
    }

    #[test]
    fn zero_field_weight_excludes() {
        let s = store(serde_json::json!([svc("a", "visa", &[])]));
        let q = EnrichedQuery::from_terms(LanguageCode::FR, [original("visa")]);
        let opts = RankOptions {
            field_weights: FieldWeights { title: 0.0, ..Default::default() },
            ..Default::default()
        };
        assert!(rank(&q, &s, None, &opts, Execution::Sequential).is_empty());
    }

    #[test]
    fn strategies_agree() {
        let s = store(serde_json::json!([svc("a", "visa franchise", &["customs:x"]), svc("b", "franchise", &[])]));
        let q = EnrichedQuery::from_terms(
            LanguageCode::FR,
            [original("visa"), original("franchise"), term(TermKey::concept("customs:x".parse().unwrap()), 0.8, Provenance::Concept)],
        );
        let o = RankOptions::default();
        assert_eq!(rank(&q, &s, None, &o, Execution::Sequential), rank(&q, &s, None, &o, Execution::Parallel));
        let batch = rank_batch(&[q.clone(), q.clone()], &s, None, &o, Execution::Parallel);
        assert_eq!(batch[1], rank(&q, &s, None, &o, Execution::Sequential));
    }
}
