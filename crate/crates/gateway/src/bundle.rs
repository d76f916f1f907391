//! On-disk index directory written by `ontoserv index` and read by
//! `ontoserv search`: the merged ontology, the catalog, the inverted index and
//! a manifest carrying the analyzer settings they were built with.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ontoserv_core::catalog::{Catalog, IndexedCatalog, ServiceIndex};
use ontoserv_core::ontology::{export_canonical, import_canonical_with, Ontology};
use ontoserv_core::text::Analyzer;
use ontoserv_core::LanguageCode;
use serde::{Deserialize, Serialize};

use crate::error::GatewayError;

pub const FORMAT_VERSION: u32 = 1;

pub const MANIFEST: &str = "manifest.json";
pub const ONTOLOGY: &str = "ontology.json";
pub const SERVICES: &str = "services.json";
pub const INDEX: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub default_language: LanguageCode,
    pub reference_language: LanguageCode,
    pub sectors: BTreeSet<String>,
    pub stopwords: BTreeMap<LanguageCode, BTreeSet<String>>,
    pub concepts: usize,
    pub expressions: usize,
    pub services: usize,
    pub index_keys: usize,
}

impl Manifest {
    pub fn describe(ontology: &Ontology, services: &IndexedCatalog) -> Self {
        let analyzer = services.analyzer();
        Manifest {
            format_version: FORMAT_VERSION,
            default_language: analyzer.default_language(),
            reference_language: ontology.reference_language(),
            sectors: ontology.sectors().clone(),
            stopwords: analyzer.stopwords().clone(),
            concepts: ontology.concepts().len(),
            expressions: ontology.expressions().len(),
            services: services.catalog().len(),
            index_keys: services.index().key_count(),
        }
    }

    pub fn analyzer(&self) -> Analyzer {
        let mut analyzer = Analyzer::without_stopwords(self.default_language);
        for (&language, words) in &self.stopwords {
            analyzer.set_stopwords(language, words.iter().map(String::as_str));
        }
        analyzer
    }
}

fn write(path: &Path, text: &str) -> Result<(), GatewayError> {
    std::fs::write(path, text).map_err(|e| GatewayError::io(path, e))
}

fn read(path: &Path) -> Result<String, GatewayError> {
    std::fs::read_to_string(path).map_err(|e| GatewayError::io(path, e))
}

pub fn save(dir: &Path, ontology: &Ontology, services: &IndexedCatalog) -> Result<Manifest, GatewayError> {
    std::fs::create_dir_all(dir).map_err(|e| GatewayError::io(dir, e))?;
    let manifest = Manifest::describe(ontology, services);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write(&dir.join(MANIFEST), &text)?;
    write(&dir.join(ONTOLOGY), &export_canonical(ontology))?;
    write(&dir.join(SERVICES), &services.catalog().to_json())?;
    write(&dir.join(INDEX), &services.index().to_json())?;
    Ok(manifest)
}

pub fn open(dir: &Path) -> Result<(Manifest, Ontology, IndexedCatalog), GatewayError> {
    let path = dir.join(MANIFEST);
    let manifest: Manifest = serde_json::from_str(&read(&path)?).map_err(|e| GatewayError::Config {
        path: path.clone(),
        message: e.to_string(),
    })?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(GatewayError::Config {
            path,
            message: format!("unsupported format version {}", manifest.format_version),
        });
    }
    let analyzer = manifest.analyzer();

    let path = dir.join(ONTOLOGY);
    let ontology = import_canonical_with(&read(&path)?, &analyzer).map_err(|e| GatewayError::load(&path, e))?;
    let path = dir.join(SERVICES);
    let catalog = Catalog::ingest_json(&read(&path)?).map_err(|e| GatewayError::load(&path, e))?;
    let path = dir.join(INDEX);
    let index = ServiceIndex::from_json(&read(&path)?).map_err(|e| GatewayError::load(&path, e))?;
    let services = IndexedCatalog::from_parts(catalog, index, analyzer).map_err(|e| GatewayError::load(&path, e))?;
    Ok((manifest, ontology, services))
}

#[cfg(test)]
mod tests {
    use ontoserv_core::catalog::ServiceRecord;
    use ontoserv_core::Execution;

    use super::*;

    fn sample() -> (Ontology, IndexedCatalog) {
        let ontology = Ontology::empty(&Analyzer::default());
        let mut record = ServiceRecord {
            id: "s1".into(),
            sector: "customs".into(),
            administration: "Douane".into(),
            url: "https://example.org/s1".into(),
            titles: BTreeMap::new(),
            descriptions: BTreeMap::new(),
            keywords: vec!["tarif".into()],
            concepts: BTreeSet::new(),
        };
        record.titles.insert(LanguageCode::FR, "Franchise des voyageurs".into());
        let catalog = Catalog::from_records([record]).unwrap();
        let mut analyzer = Analyzer::new(LanguageCode::AR);
        analyzer.set_stopwords(LanguageCode::EN, ["the"]);
        (ontology, IndexedCatalog::new(catalog, analyzer, Execution::Sequential))
    }

    #[test]
    fn save_then_open_restores_everything() {
        let dir = tempfile::tempdir().unwrap();
        let (ontology, services) = sample();
        let written = save(dir.path(), &ontology, &services).unwrap();
        assert_eq!(written.services, 1);
        let (manifest, o, s) = open(dir.path()).unwrap();
        assert_eq!(manifest, written);
        assert_eq!(export_canonical(&o), export_canonical(&ontology));
        assert_eq!(s.catalog(), services.catalog());
        assert_eq!(s.index(), services.index());
        assert_eq!(s.analyzer(), services.analyzer());
    }

    #[test]
    fn unknown_format_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (ontology, services) = sample();
        save(dir.path(), &ontology, &services).unwrap();
        let path = dir.path().join(MANIFEST);
        let text = std::fs::read_to_string(&path).unwrap().replace("\"format_version\": 1", "\"format_version\": 9");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(open(dir.path()), Err(GatewayError::Config { .. })));
    }
}
