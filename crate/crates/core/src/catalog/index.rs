use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Catalog, ServiceRecord};
use crate::error::{CoreError, Result};
use crate::exec::Execution;
use crate::lang::LanguageCode;
use crate::ontology::ConceptId;
use crate::text::Analyzer;

/// Where in a record a posting comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Title,
    Description,
    Keyword,
    Annotation,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::Title, Field::Description, Field::Keyword, Field::Annotation];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Description => "description",
            Field::Keyword => "keyword",
            Field::Annotation => "annotation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKey {
    Text { language: LanguageCode, token: String },
    Concept(ConceptId),
}

impl IndexKey {
    pub fn text(language: LanguageCode, token: impl Into<String>) -> Self {
        IndexKey::Text {
            language,
            token: token.into(),
        }
    }
}

/// One (service, field) occurrence count under a key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Posting {
    pub service: String,
    pub field: Field,
    pub count: u32,
}

type Hits = BTreeMap<String, BTreeMap<Field, u32>>;

/// Inverted index over titles, descriptions, keywords and annotations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ServiceIndex {
    postings: BTreeMap<IndexKey, Hits>,
    services: BTreeSet<String>,
}

/// Postings contributed by one record, with occurrence counts.
fn record_postings(record: &ServiceRecord, analyzer: &Analyzer) -> BTreeMap<(IndexKey, Field), u32> {
    let mut out = BTreeMap::new();
    let mut put = |language, text: &str, field| {
        for token in analyzer.tokenize(text, language) {
            *out.entry((IndexKey::text(language, token), field)).or_insert(0) += 1;
        }
    };
    for (&language, text) in &record.titles {
        put(language, text, Field::Title);
    }
    for (&language, text) in &record.descriptions {
        put(language, text, Field::Description);
    }
    for language in record.languages() {
        for keyword in &record.keywords {
            put(language, keyword, Field::Keyword);
        }
    }
    for concept in &record.concepts {
        out.insert((IndexKey::Concept(concept.clone()), Field::Annotation), 1);
    }
    out
}

impl ServiceIndex {
    pub fn build(catalog: &Catalog, analyzer: &Analyzer, exec: Execution) -> Self {
        let records: Vec<&ServiceRecord> = catalog.iter().collect();
        let per_record = exec.map(&records, |r| record_postings(r, analyzer));
        let mut index = ServiceIndex::default();
        for (record, postings) in records.iter().zip(per_record) {
            index.insert(&record.id, postings);
        }
        index
    }

    fn insert(&mut self, id: &str, postings: BTreeMap<(IndexKey, Field), u32>) {
        self.services.insert(id.to_string());
        for ((key, field), count) in postings {
            self.postings
                .entry(key)
                .or_default()
                .entry(id.to_string())
                .or_default()
                .insert(field, count);
        }
    }

    /// Indexes a record that is not currently indexed.
    pub fn add(&mut self, record: &ServiceRecord, analyzer: &Analyzer) {
        self.insert(&record.id, record_postings(record, analyzer));
    }

    /// Removes every posting `record` contributed.
    pub fn remove(&mut self, record: &ServiceRecord, analyzer: &Analyzer) {
        self.services.remove(&record.id);
        let keys: BTreeSet<IndexKey> = record_postings(record, analyzer).into_keys().map(|(k, _)| k).collect();
        for key in keys {
            if let Some(hits) = self.postings.get_mut(&key) {
                hits.remove(&record.id);
                if hits.is_empty() {
                    self.postings.remove(&key);
                }
            }
        }
    }

    /// Number of indexed services.
    pub fn doc_count(&self) -> usize {
        self.services.len()
    }

    pub fn services(&self) -> BTreeSet<&str> {
        self.services.iter().map(String::as_str).collect()
    }

    pub fn contains_service(&self, id: &str) -> bool {
        self.services.contains(id)
    }

    pub fn key_count(&self) -> usize {
        self.postings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.postings.is_empty()
    }

    /// Services and per-field counts posted under `key`.
    pub fn hits(&self, key: &IndexKey) -> Option<&BTreeMap<String, BTreeMap<Field, u32>>> {
        self.postings.get(key)
    }

    /// Number of services posted under `key`.
    pub fn df(&self, key: &IndexKey) -> usize {
        self.postings.get(key).map_or(0, BTreeMap::len)
    }

    pub fn postings(&self, key: &IndexKey) -> Vec<Posting> {
        self.postings
            .get(key)
            .into_iter()
            .flat_map(|hits| {
                hits.iter().flat_map(|(service, fields)| {
                    fields.iter().map(move |(&field, &count)| Posting {
                        service: service.clone(),
                        field,
                        count,
                    })
                })
            })
            .collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = &IndexKey> {
        self.postings.keys()
    }

    /// (service, field) pairs in which every token of `tokens` occurs.
    pub fn text_hits(&self, language: LanguageCode, tokens: &[String]) -> BTreeMap<&str, BTreeSet<Field>> {
        let mut result: Option<BTreeMap<&str, BTreeSet<Field>>> = None;
        for token in tokens {
            let Some(hits) = self.postings.get(&IndexKey::text(language, token.as_str())) else {
                return BTreeMap::new();
            };
            let these: BTreeMap<&str, BTreeSet<Field>> = hits
                .iter()
                .map(|(s, fields)| (s.as_str(), fields.keys().copied().collect()))
                .collect();
            result = Some(match result {
                None => these,
                Some(prev) => prev
                    .into_iter()
                    .filter_map(|(s, fields)| {
                        let common: BTreeSet<Field> = these.get(s)?.intersection(&fields).copied().collect();
                        (!common.is_empty()).then_some((s, common))
                    })
                    .collect(),
            });
        }
        result.unwrap_or_default()
    }

    /// Services annotated with `concept`.
    pub fn concept_hits(&self, concept: &ConceptId) -> BTreeSet<&str> {
        self.postings
            .get(&IndexKey::Concept(concept.clone()))
            .map(|hits| hits.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn to_json(&self) -> String {
        let doc = IndexDoc {
            services: self.services.iter().cloned().collect(),
            postings: self
                .postings
                .keys()
                .map(|key| KeyEntry {
                    key: key.clone(),
                    postings: self.postings(key),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("index serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: IndexDoc = serde_json::from_str(text).map_err(CoreError::from_json)?;
        let mut index = ServiceIndex {
            postings: BTreeMap::new(),
            services: doc.services.into_iter().collect(),
        };
        for entry in doc.postings {
            for p in entry.postings {
                if !index.services.contains(&p.service) {
                    return Err(CoreError::Schema {
                        field: Some("postings".into()),
                        message: format!("posting refers to unindexed service {:?}", p.service),
                    });
                }
                index
                    .postings
                    .entry(entry.key.clone())
                    .or_default()
                    .entry(p.service)
                    .or_default()
                    .insert(p.field, p.count);
            }
        }
        Ok(index)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexDoc {
    services: Vec<String>,
    postings: Vec<KeyEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyEntry {
    key: IndexKey,
    postings: Vec<Posting>,
}
