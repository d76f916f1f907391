use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::lang::LanguageCode;
use crate::ontology::{is_token, ConceptId, IssueCode, Ontology, ValidationIssue, ValidationReport};

/// One e-service as published by its administration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceRecord {
    pub id: String,
    pub sector: String,
    pub administration: String,
    pub url: String,
    pub titles: BTreeMap<LanguageCode, String>,
    #[serde(default)]
    pub descriptions: BTreeMap<LanguageCode, String>,
    #[serde(default)]
    pub keywords: Vec<String>,
    /// Concept annotations.
    #[serde(default)]
    pub concepts: BTreeSet<ConceptId>,
}

impl ServiceRecord {
    pub fn check(&self) -> Result<()> {
        let invalid = |reason: &str| CoreError::InvalidRecord {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if !is_token(&self.id) {
            return Err(invalid("id must be a non-empty token of [A-Za-z0-9_-]"));
        }
        if !is_token(&self.sector) {
            return Err(invalid("sector must be a non-empty token"));
        }
        if self.titles.values().all(|t| t.trim().is_empty()) {
            return Err(invalid("at least one non-empty title is required"));
        }
        match url::Url::parse(&self.url) {
            Ok(u) if !u.cannot_be_a_base() => {}
            _ => return Err(invalid("url must be absolute")),
        }
        Ok(())
    }

    /// Languages the record has text in. Keywords are indexed under each.
    pub fn languages(&self) -> BTreeSet<LanguageCode> {
        self.titles.keys().chain(self.descriptions.keys()).copied().collect()
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    id: String,
    sector: String,
    administration: String,
    url: String,
    #[serde(default)]
    title_fr: String,
    #[serde(default)]
    title_ar: String,
    #[serde(default)]
    title_en: String,
    #[serde(default)]
    desc_fr: String,
    #[serde(default)]
    desc_ar: String,
    #[serde(default)]
    desc_en: String,
    #[serde(default)]
    keywords: String,
    #[serde(default)]
    concepts: String,
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(';').map(str::trim).filter(|p| !p.is_empty())
}

impl CsvRow {
    fn into_record(self) -> Result<ServiceRecord> {
        let per_lang = |fr: String, ar: String, en: String| {
            [(LanguageCode::FR, fr), (LanguageCode::AR, ar), (LanguageCode::EN, en)]
                .into_iter()
                .filter(|(_, t)| !t.trim().is_empty())
                .collect::<BTreeMap<_, _>>()
        };
        let concepts = split_list(&self.concepts)
            .map(str::parse::<ConceptId>)
            .collect::<Result<_>>()?;
        Ok(ServiceRecord {
            titles: per_lang(self.title_fr, self.title_ar, self.title_en),
            descriptions: per_lang(self.desc_fr, self.desc_ar, self.desc_en),
            keywords: split_list(&self.keywords).map(str::to_owned).collect(),
            concepts,
            id: self.id,
            sector: self.sector,
            administration: self.administration,
            url: self.url,
        })
    }
}

/// Service records keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    records: BTreeMap<String, ServiceRecord>,
}

impl Catalog {
    pub fn from_records(records: impl IntoIterator<Item = ServiceRecord>) -> Result<Self> {
        let mut catalog = Catalog::default();
        for r in records {
            r.check()?;
            if catalog.records.contains_key(&r.id) {
                return Err(CoreError::DuplicateServiceId(r.id));
            }
            catalog.records.insert(r.id.clone(), r);
        }
        Ok(catalog)
    }

    /// Reads a catalog document, JSON when it starts with `[`, CSV otherwise.
    pub fn ingest(text: &str) -> Result<Self> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        if text.trim_start().starts_with('[') || text.trim().is_empty() {
            Self::ingest_json(text)
        } else {
            Self::ingest_csv(text)
        }
    }

    pub fn ingest_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Catalog::default());
        }
        let records: Vec<ServiceRecord> = serde_json::from_str(text).map_err(CoreError::from_json)?;
        Self::from_records(records)
    }

    pub fn ingest_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut records = Vec::new();
        for row in reader.deserialize::<CsvRow>() {
            let row = row.map_err(|e| {
                let (line, column) = e
                    .position()
                    .map(|p| (p.line() as usize, 1))
                    .unwrap_or((0, 0));
                CoreError::Parse {
                    line,
                    column,
                    message: e.to_string(),
                }
            })?;
            records.push(row.into_record()?);
        }
        Self::from_records(records)
    }

    /// Pretty JSON array in id order.
    pub fn to_json(&self) -> String {
        let records: Vec<&ServiceRecord> = self.records.values().collect();
        let mut out = serde_json::to_string_pretty(&records).expect("records serialize");
        out.push('\n');
        out
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ServiceRecord> {
        self.records.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &ServiceRecord> {
        self.records.values()
    }

    /// Inserts or replaces; returns the previous record.
    pub fn upsert(&mut self, record: ServiceRecord) -> Result<Option<ServiceRecord>> {
        record.check()?;
        Ok(self.records.insert(record.id.clone(), record))
    }

    pub fn remove(&mut self, id: &str) -> Result<ServiceRecord> {
        self.records
            .remove(id)
            .ok_or_else(|| CoreError::UnknownServiceId(id.to_string()))
    }

    /// Warnings for annotations the ontology does not define.
    pub fn check_annotations(&self, ontology: &Ontology) -> ValidationReport {
        let issues = self
            .iter()
            .flat_map(|r| {
                r.concepts
                    .iter()
                    .filter(|c| ontology.concept(c).is_none())
                    .map(move |c| {
                        ValidationIssue::warning(
                            IssueCode::UnresolvedAnnotation,
                            r.id.clone(),
                            format!("annotation {c} is not defined by the ontology"),
                        )
                    })
            })
            .collect();
        ValidationReport::from_issues(issues)
    }
}
