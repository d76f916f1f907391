//! Descriptive database of e-services and its inverted index.

mod index;
mod record;

pub use index::{Field, IndexKey, Posting, ServiceIndex};
pub use record::{Catalog, ServiceRecord};

use crate::error::{CoreError, Result};
use crate::exec::Execution;
use crate::text::Analyzer;

/// Outcome of an upsert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Upsert {
    Created,
    Replaced,
}

/// A catalog together with the index that mirrors it.
///
/// Mutations update the index incrementally; the result is always equal to a
/// full rebuild over the mutated catalog.
#[derive(Debug, Clone)]
pub struct IndexedCatalog {
    catalog: Catalog,
    index: ServiceIndex,
    analyzer: Analyzer,
}

impl IndexedCatalog {
    pub fn new(catalog: Catalog, analyzer: Analyzer, exec: Execution) -> Self {
        let index = ServiceIndex::build(&catalog, &analyzer, exec);
        IndexedCatalog {
            catalog,
            index,
            analyzer,
        }
    }

    /// Pairs a catalog with a previously persisted index. The index must have
    /// been built from this catalog with the same analyzer.
    pub fn from_parts(catalog: Catalog, index: ServiceIndex, analyzer: Analyzer) -> Result<Self> {
        if index.services() != catalog.ids().collect() {
            return Err(CoreError::InvalidRecord {
                id: String::new(),
                reason: "index does not cover the same services as the catalog".into(),
            });
        }
        Ok(IndexedCatalog {
            catalog,
            index,
            analyzer,
        })
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn index(&self) -> &ServiceIndex {
        &self.index
    }

    pub fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    pub fn upsert(&mut self, record: ServiceRecord) -> Result<Upsert> {
        record.check()?;
        let outcome = match self.catalog.get(&record.id) {
            Some(old) => {
                self.index.remove(old, &self.analyzer);
                Upsert::Replaced
            }
            None => Upsert::Created,
        };
        self.index.add(&record, &self.analyzer);
        self.catalog.upsert(record)?;
        Ok(outcome)
    }

    /// Insert that refuses to overwrite.
    pub fn create(&mut self, record: ServiceRecord) -> Result<()> {
        if self.catalog.get(&record.id).is_some() {
            return Err(CoreError::DuplicateServiceId(record.id));
        }
        self.upsert(record).map(|_| ())
    }

    pub fn remove(&mut self, id: &str) -> Result<ServiceRecord> {
        let old = self.catalog.remove(id)?;
        self.index.remove(&old, &self.analyzer);
        Ok(old)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, title: &str) -> ServiceRecord {
        serde_json::from_value(serde_json::json!({
            "id": id, "sector": "customs", "administration": "ADII",
            "url": format!("https://example.ma/{id}"), "titles": {"fr": title}
        }))
        .unwrap()
    }

    #[test]
    fn upsert_then_remove_matches_rebuild() {
        let mut store = IndexedCatalog::new(Catalog::default(), Analyzer::default(), Execution::Sequential);
        assert_eq!(store.upsert(rec("a", "Franchise douanière")).unwrap(), Upsert::Created);
        assert_eq!(store.catalog().len(), 1);
        assert_eq!(store.upsert(rec("b", "Dédouanement")).unwrap(), Upsert::Created);
        assert_eq!(store.upsert(rec("a", "Tarif douanier")).unwrap(), Upsert::Replaced);
        assert_eq!(store.catalog().len(), 2);
        assert_eq!(store.catalog().get("a").unwrap().titles.values().next().unwrap(), "Tarif douanier");
        store.remove("b").unwrap();
        let rebuilt = ServiceIndex::build(store.catalog(), store.analyzer(), Execution::Sequential);
        assert_eq!(store.index(), &rebuilt);
    }

    #[test]
    fn create_rejects_existing_and_remove_rejects_absent() {
        let mut store = IndexedCatalog::new(Catalog::default(), Analyzer::default(), Execution::Sequential);
        store.create(rec("a", "x")).unwrap();
        assert!(matches!(store.create(rec("a", "y")), Err(CoreError::DuplicateServiceId(_))));
        assert!(matches!(store.remove("zz"), Err(CoreError::UnknownServiceId(_))));
    }

    #[test]
    fn invalid_record_leaves_store_untouched() {
        let mut store = IndexedCatalog::new(Catalog::default(), Analyzer::default(), Execution::Sequential);
        let mut bad = rec("a", "x");
        bad.titles.clear();
        assert!(store.upsert(bad).is_err());
        assert_eq!(store.catalog().len(), 0);
        assert_eq!(store.index().doc_count(), 0);
    }
}
