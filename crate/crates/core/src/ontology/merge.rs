use std::collections::BTreeSet;

use super::{Ontology, OntologyBuilder};
use crate::error::{CoreError, Result};
use crate::lang::LanguageCode;
use crate::text::Analyzer;

/// Builds the mother ontology as the disjoint union of sectoral ontologies.
///
/// Every input must validate without errors and sector tags must be pairwise
/// distinct. Ids are sector-namespaced, so expressions sharing a lemma across
/// sectors coexist and both appear under the shared lexicon key.
pub fn merge(sectorals: &[Ontology], reference_language: LanguageCode, analyzer: &Analyzer) -> Result<Ontology> {
    let mut seen = BTreeSet::new();
    for o in sectorals {
        for sector in o.sectors() {
            if !seen.insert(sector.as_str()) {
                return Err(CoreError::DuplicateSector(sector.clone()));
            }
        }
    }
    for o in sectorals {
        let report = o.validate();
        if report.has_errors() {
            let sectors: Vec<&str> = o.sectors().iter().map(String::as_str).collect();
            return Err(CoreError::InvalidInput {
                sectors: sectors.join(","),
                report,
            });
        }
    }

    let mut builder = OntologyBuilder::new(reference_language);
    for o in sectorals {
        for sector in o.sectors() {
            builder.add_sector(sector.clone());
        }
        for c in o.concepts() {
            builder.add_concept(c.clone());
        }
        for e in o.expressions() {
            builder.add_expression(e.clone());
        }
        for v in o.variants() {
            builder.add_variant(v.clone());
        }
    }
    Ok(builder.build(analyzer))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::super::fixtures::*;
    use super::super::*;
    use super::*;

    fn sector_with(sector: &str, concepts: usize, visa: bool) -> Ontology {
        let mut b = Ontology::builder(LanguageCode::FR).sector(sector);
        for i in 0..concepts {
            let c = cid(&format!("{sector}:c{i}"));
            let mut e = Expression::new(xid(&format!("fr:{sector}:c{i}")), format!("terme {sector} {i}"));
            e.concepts.insert(c.clone());
            b = b.concept(Concept::new(c)).expression(e);
        }
        if visa {
            let c = cid(&format!("{sector}:visa"));
            let mut e = Expression::new(xid(&format!("fr:{sector}:visa")), "visa");
            e.concepts.insert(c.clone());
            b = b.concept(Concept::new(c)).expression(e);
        }
        b.build(&Analyzer::default())
    }

    #[test]
    fn merge_of_nothing_is_empty() {
        let m = merge(&[], LanguageCode::FR, &Analyzer::default()).unwrap();
        assert!(m.is_empty());
        assert!(m.sectors().is_empty());
        assert_eq!(m.reference_language(), LanguageCode::FR);
    }

    #[test]
    fn concept_counts_add_up() {
        let customs = sector_with("customs", 2, false);
        let tourism = sector_with("tourism", 3, false);
        let m = merge(&[customs, tourism], LanguageCode::FR, &Analyzer::default()).unwrap();
        assert_eq!(m.concepts().len(), 5);
        assert_eq!(m.sectors().len(), 2);
        assert!(!m.validate().has_errors());
    }

    #[test]
    fn shared_lemma_maps_to_both_sectors() {
        let customs = sector_with("customs", 0, true);
        let tourism = sector_with("tourism", 0, true);
        let m = merge(&[customs, tourism], LanguageCode::FR, &Analyzer::default()).unwrap();
        let key = LexiconKey {
            language: LanguageCode::FR,
            form: "visa".into(),
        };
        let expected: BTreeSet<_> = [xid("fr:customs:visa"), xid("fr:tourism:visa")].into();
        assert_eq!(m.lexicon().get(&key), Some(&expected));
    }

    #[test]
    fn duplicate_sector_rejected() {
        let a = sector_with("customs", 1, false);
        let b = sector_with("customs", 1, false);
        let err = merge(&[a, b], LanguageCode::FR, &Analyzer::default()).unwrap_err();
        assert!(matches!(err, CoreError::DuplicateSector(s) if s == "customs"));
    }

    #[test]
    fn invalid_input_rejected() {
        let mut c = Concept::new(cid("bad:a"));
        c.parents.insert(cid("bad:a"));
        let bad = Ontology::builder(LanguageCode::FR)
            .sector("bad")
            .concept(c)
            .build(&Analyzer::default());
        let err = merge(&[duty_free(), bad], LanguageCode::FR, &Analyzer::default()).unwrap_err();
        assert!(matches!(err, CoreError::InvalidInput { .. }));
    }

    #[test]
    fn merge_is_order_insensitive() {
        let a = sector_with("customs", 2, true);
        let b = sector_with("tourism", 3, true);
        let ab = merge(&[a.clone(), b.clone()], LanguageCode::FR, &Analyzer::default()).unwrap();
        let ba = merge(&[b, a], LanguageCode::FR, &Analyzer::default()).unwrap();
        assert_eq!(export_canonical(&ab), export_canonical(&ba));
    }
}
