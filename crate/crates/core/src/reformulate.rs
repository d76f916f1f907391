//! Two-step query reformulation: filtering to key terms, then enrichment with
//! weighted ontology terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::lang::LanguageCode;
use crate::ontology::{ConceptId, ExpansionPolicy, ExpressionId, Lexicon, Ontology, Provenance};
use crate::text::Analyzer;

pub const MAX_QUERY_CHARS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawQuery {
    pub text: String,
    /// Detected from the text when absent.
    #[serde(default)]
    pub language: Option<LanguageCode>,
}

impl RawQuery {
    pub fn new(text: impl Into<String>) -> Self {
        RawQuery {
            text: text.into(),
            language: None,
        }
    }

    pub fn in_language(text: impl Into<String>, language: LanguageCode) -> Self {
        RawQuery {
            text: text.into(),
            language: Some(language),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredQuery {
    pub language: LanguageCode,
    pub tokens: Vec<String>,
}

impl FilteredQuery {
    pub fn new(analyzer: &Analyzer, tokens: &[String], language: LanguageCode) -> Self {
        FilteredQuery {
            language,
            tokens: analyzer.filter(tokens, language),
        }
    }
}

/// A stretch of the filtered token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Segment {
    /// Token positions `span` (inclusive) form a lexicon key.
    Matched {
        span: RangeInclusive<usize>,
        expressions: BTreeSet<ExpressionId>,
    },
    Unmatched { position: usize, token: String },
}

/// What an enriched term matches against the index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TermKey {
    /// Space-joined normalized tokens.
    Text { language: LanguageCode, form: String },
    Concept { concept: ConceptId },
}

impl TermKey {
    pub fn text(language: LanguageCode, form: impl Into<String>) -> Self {
        TermKey::Text {
            language,
            form: form.into(),
        }
    }

    pub fn concept(concept: ConceptId) -> Self {
        TermKey::Concept { concept }
    }
}

impl fmt::Display for TermKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermKey::Text { language, form } => write!(f, "{language}:\"{form}\""),
            TermKey::Concept { concept } => write!(f, "<{concept}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub key: TermKey,
    pub weight: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedQuery {
    pub language: LanguageCode,
    /// Filtered tokens the terms were derived from.
    pub tokens: Vec<String>,
    pub segments: Vec<Segment>,
    /// Sorted by key, one entry per key.
    pub terms: Vec<Term>,
}

impl EnrichedQuery {
    pub fn get(&self, key: &TermKey) -> Option<&Term> {
        self.terms
            .binary_search_by(|t| t.key.cmp(key))
            .ok()
            .map(|i| &self.terms[i])
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Builds a query directly from terms; later duplicates of a key merge as in
    /// enrichment.
    pub fn from_terms(language: LanguageCode, terms: impl IntoIterator<Item = Term>) -> Self {
        let mut acc = Terms::default();
        for t in terms {
            acc.offer(t.key, t.weight, t.provenance);
        }
        EnrichedQuery {
            language,
            tokens: Vec::new(),
            segments: Vec::new(),
            terms: acc.into_sorted(),
        }
    }
}

/// Greedy leftmost-longest segmentation of the filtered tokens against the lexicon.
pub fn match_terms(filtered: &FilteredQuery, lexicon: &Lexicon) -> Vec<Segment> {
    let tokens = &filtered.tokens;
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < tokens.len() {
        let longest = lexicon.longest_key().min(tokens.len() - i);
        for len in (1..=longest).rev() {
            if let Some(ids) = lexicon.get_tokens(filtered.language, &tokens[i..i + len]) {
                out.push(Segment::Matched {
                    span: i..=i + len - 1,
                    expressions: ids.clone(),
                });
                i += len;
                continue 'outer;
            }
        }
        out.push(Segment::Unmatched {
            position: i,
            token: tokens[i].clone(),
        });
        i += 1;
    }
    out
}

#[derive(Default)]
struct Terms(BTreeMap<TermKey, (f64, Provenance)>);

impl Terms {
    /// Keeps the larger weight; equal weights keep the earlier provenance.
    fn offer(&mut self, key: TermKey, weight: f64, provenance: Provenance) {
        match self.0.get(&key) {
            Some(&(w, p)) if w > weight || (w == weight && p <= provenance) => {}
            _ => {
                self.0.insert(key, (weight, provenance));
            }
        }
    }

    fn into_sorted(self) -> Vec<Term> {
        self.0
            .into_iter()
            .map(|(key, (weight, provenance))| Term { key, weight, provenance })
            .collect()
    }
}

fn text_key(analyzer: &Analyzer, form: &str, language: LanguageCode) -> Option<TermKey> {
    let tokens = analyzer.form_key(form, language);
    (!tokens.is_empty()).then(|| TermKey::text(language, tokens.join(" ")))
}

/// Adds the expansion of every matched expression to the filtered tokens.
///
/// When more than `max_total_terms` keys result, the filtered tokens are kept
/// first (in query order), then the remaining terms by weight descending and
/// key ascending.
pub fn enrich(filtered: &FilteredQuery, segments: &[Segment], ontology: &Ontology, policy: &ExpansionPolicy) -> EnrichedQuery {
    let analyzer = ontology.analyzer();
    let mut terms = Terms::default();
    for segment in segments {
        let Segment::Matched { expressions, .. } = segment else {
            continue;
        };
        for seed in expressions {
            let Ok(expansion) = ontology.expand(seed, policy) else {
                continue;
            };
            for x in expansion {
                let Some(e) = ontology.expression(&x.expression) else {
                    continue;
                };
                if let Some(key) = text_key(analyzer, &e.lemma, e.language) {
                    terms.offer(key, x.weight, x.provenance);
                }
                for v in ontology.variants_of(&e.id) {
                    if let Some(key) = text_key(analyzer, &v.form, e.language) {
                        terms.offer(key, x.weight, Provenance::Variant);
                    }
                }
                for c in &e.concepts {
                    terms.offer(TermKey::concept(c.clone()), x.weight, Provenance::Concept);
                }
            }
        }
    }

    let mut originals: Vec<TermKey> = Vec::new();
    for token in &filtered.tokens {
        let key = TermKey::text(filtered.language, token.as_str());
        if !originals.contains(&key) {
            terms.offer(key.clone(), 1.0, Provenance::Original);
            originals.push(key);
        }
    }

    let mut all = terms.into_sorted();
    if all.len() > policy.max_total_terms {
        let rank = |t: &Term| originals.iter().position(|k| *k == t.key).unwrap_or(usize::MAX);
        all.sort_by(|a, b| {
            rank(a)
                .cmp(&rank(b))
                .then_with(|| b.weight.total_cmp(&a.weight))
                .then_with(|| a.key.cmp(&b.key))
        });
        all.truncate(policy.max_total_terms);
        all.sort_by(|a, b| a.key.cmp(&b.key));
    }

    EnrichedQuery {
        language: filtered.language,
        tokens: filtered.tokens.clone(),
        segments: segments.to_vec(),
        terms: all,
    }
}

/// detect language → tokenize → filter → match → enrich.
pub fn reformulate(raw: &RawQuery, ontology: &Ontology, policy: &ExpansionPolicy) -> Result<EnrichedQuery> {
    let text = raw.text.trim();
    let len = text.chars().count();
    if len > MAX_QUERY_CHARS {
        return Err(CoreError::QueryTooLong {
            len,
            max: MAX_QUERY_CHARS,
        });
    }
    let analyzer = ontology.analyzer();
    let language = match raw.language {
        Some(l) => l,
        None => analyzer.detect_language(text)?,
    };
    let tokens = analyzer.tokenize(text, language);
    if tokens.is_empty() {
        return Err(CoreError::EmptyQuery);
    }
    let filtered = FilteredQuery::new(analyzer, &tokens, language);
    let segments = match_terms(&filtered, ontology.lexicon());
    Ok(enrich(&filtered, &segments, ontology, policy))
}
