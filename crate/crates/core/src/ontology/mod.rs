//! Three-level multilingual ontology: language-independent concepts, language
//! specific expressions (lemmas) linked by synonymy and translation, and
//! expression variants (alternate surface forms).
//!
//! An [`Ontology`] is immutable once built. Derived structures (the surface-form
//! lexicon, concept→expression and parent→child maps) are computed at build time
//! so every query operation is a read-only borrow.

mod canonical;
mod expand;
mod ids;
mod merge;
mod owl;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::lang::LanguageCode;
use crate::text::Analyzer;

pub use canonical::{export_canonical, import_canonical, import_canonical_with, FORMAT_VERSION, MERGED_SECTOR};
pub use expand::{expand, Expansion, ExpansionPolicy, Provenance};
pub use ids::{is_token, ConceptId, ExpressionId};
pub use merge::merge;
pub use owl::{export_owl, export_owl_with, OwlOptions};
pub use validate::{validate, IssueCode, Severity, ValidationIssue, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Text,
    Number,
    Boolean,
    Date,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Cardinality {
    #[serde(rename = "1..1")]
    ExactlyOne,
    #[serde(rename = "0..1")]
    AtMostOne,
    #[serde(rename = "1..n")]
    AtLeastOne,
    #[serde(rename = "0..n")]
    Any,
}

impl Cardinality {
    pub fn as_str(self) -> &'static str {
        match self {
            Cardinality::ExactlyOne => "1..1",
            Cardinality::AtMostOne => "0..1",
            Cardinality::AtLeastOne => "1..n",
            Cardinality::Any => "0..n",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantKind {
    Inflection,
    Spelling,
    Abbreviation,
    Acronym,
}

impl VariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Inflection => "inflection",
            VariantKind::Spelling => "spelling",
            VariantKind::Abbreviation => "abbreviation",
            VariantKind::Acronym => "acronym",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptProperty {
    pub name: String,
    pub description: String,
    pub value_type: ValueType,
    pub owner: ConceptId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticRelation {
    pub name: String,
    pub source: ConceptId,
    pub target: ConceptId,
    pub cardinality: Cardinality,
}

/// Abstract meaning. Carries no surface text besides optional glosses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub id: ConceptId,
    pub glosses: BTreeMap<LanguageCode, String>,
    pub parents: BTreeSet<ConceptId>,
    pub properties: Vec<ConceptProperty>,
    pub relations: Vec<SemanticRelation>,
}

impl Concept {
    pub fn new(id: ConceptId) -> Self {
        Concept {
            id,
            glosses: BTreeMap::new(),
            parents: BTreeSet::new(),
            properties: Vec::new(),
            relations: Vec::new(),
        }
    }
}

/// Language-specific lexical entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expression {
    pub id: ExpressionId,
    pub language: LanguageCode,
    pub lemma: String,
    pub concepts: BTreeSet<ConceptId>,
    pub synonyms: BTreeSet<ExpressionId>,
    pub translations: BTreeSet<ExpressionId>,
    pub acronym_of: Option<ExpressionId>,
}

impl Expression {
    pub fn new(id: ExpressionId, lemma: impl Into<String>) -> Self {
        Expression {
            language: id.language(),
            id,
            lemma: lemma.into(),
            concepts: BTreeSet::new(),
            synonyms: BTreeSet::new(),
            translations: BTreeSet::new(),
            acronym_of: None,
        }
    }
}

/// Alternate surface form of one expression. Not a lexicon entry of its own.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExpressionVariant {
    pub expression: ExpressionId,
    pub form: String,
    pub kind: VariantKind,
}

/// Lexicon key: language plus the space-joined normalized token sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LexiconKey {
    pub language: LanguageCode,
    pub form: String,
}

impl LexiconKey {
    pub fn from_tokens(language: LanguageCode, tokens: &[String]) -> Self {
        LexiconKey {
            language,
            form: tokens.join(" "),
        }
    }
}

/// Index of every lemma and variant form, after normalization and stopword
/// filtering, to the expressions carrying it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<LexiconKey, BTreeSet<ExpressionId>>,
    longest_key: usize,
}

impl Lexicon {
    pub fn build<'a>(
        expressions: impl IntoIterator<Item = &'a Expression>,
        variants: impl IntoIterator<Item = &'a ExpressionVariant>,
        analyzer: &Analyzer,
    ) -> Self {
        let mut lexicon = Lexicon::default();
        for e in expressions {
            lexicon.insert(analyzer.form_key(&e.lemma, e.language), e.language, &e.id);
        }
        for v in variants {
            let language = v.expression.language();
            lexicon.insert(analyzer.form_key(&v.form, language), language, &v.expression);
        }
        lexicon
    }

    fn insert(&mut self, tokens: Vec<String>, language: LanguageCode, id: &ExpressionId) {
        if tokens.is_empty() {
            return;
        }
        self.longest_key = self.longest_key.max(tokens.len());
        self.entries
            .entry(LexiconKey::from_tokens(language, &tokens))
            .or_default()
            .insert(id.clone());
    }

    pub fn get(&self, key: &LexiconKey) -> Option<&BTreeSet<ExpressionId>> {
        self.entries.get(key)
    }

    pub fn get_tokens(&self, language: LanguageCode, tokens: &[String]) -> Option<&BTreeSet<ExpressionId>> {
        self.entries.get(&LexiconKey::from_tokens(language, tokens))
    }

    /// Length in tokens of the longest key.
    pub fn longest_key(&self) -> usize {
        self.longest_key
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LexiconKey, &BTreeSet<ExpressionId>)> {
        self.entries.iter()
    }
}

/// Accumulates ontology content before freezing it into an [`Ontology`].
///
/// Duplicate ids are kept out of the collections (first one wins) but recorded so
/// validation can report them.
#[derive(Debug, Clone)]
pub struct OntologyBuilder {
    sectors: BTreeSet<String>,
    reference_language: LanguageCode,
    concepts: BTreeMap<ConceptId, Concept>,
    expressions: BTreeMap<ExpressionId, Expression>,
    variants: Vec<ExpressionVariant>,
    issues: Vec<ValidationIssue>,
}

impl OntologyBuilder {
    pub fn new(reference_language: LanguageCode) -> Self {
        OntologyBuilder {
            sectors: BTreeSet::new(),
            reference_language,
            concepts: BTreeMap::new(),
            expressions: BTreeMap::new(),
            variants: Vec::new(),
            issues: Vec::new(),
        }
    }

    pub fn sector(mut self, sector: impl Into<String>) -> Self {
        self.add_sector(sector);
        self
    }

    pub fn add_sector(&mut self, sector: impl Into<String>) {
        self.sectors.insert(sector.into());
    }

    pub fn add_concept(&mut self, concept: Concept) {
        if self.concepts.contains_key(&concept.id) {
            self.issues.push(ValidationIssue::error(
                IssueCode::DuplicateId,
                concept.id.as_str(),
                format!("concept {} is defined more than once", concept.id),
            ));
        } else {
            self.concepts.insert(concept.id.clone(), concept);
        }
    }

    pub fn add_expression(&mut self, expression: Expression) {
        if self.expressions.contains_key(&expression.id) {
            self.issues.push(ValidationIssue::error(
                IssueCode::DuplicateId,
                expression.id.as_str(),
                format!("expression {} is defined more than once", expression.id),
            ));
        } else {
            self.expressions.insert(expression.id.clone(), expression);
        }
    }

    pub fn add_variant(&mut self, variant: ExpressionVariant) {
        self.variants.push(variant);
    }

    pub fn concept(mut self, concept: Concept) -> Self {
        self.add_concept(concept);
        self
    }

    pub fn expression(mut self, expression: Expression) -> Self {
        self.add_expression(expression);
        self
    }

    pub fn variant(mut self, expression: &ExpressionId, form: &str, kind: VariantKind) -> Self {
        self.add_variant(ExpressionVariant {
            expression: expression.clone(),
            form: form.to_string(),
            kind,
        });
        self
    }

    /// Closes synonym/translation links symmetrically, de-duplicates variants and
    /// derives the lexicon and lookup maps.
    pub fn build(mut self, analyzer: &Analyzer) -> Ontology {
        close_symmetric(&mut self.expressions, |e| &mut e.synonyms);
        close_symmetric(&mut self.expressions, |e| &mut e.translations);

        self.variants.sort();
        let mut seen = BTreeSet::new();
        let mut variants = Vec::with_capacity(self.variants.len());
        for v in self.variants {
            let key = analyzer.form_key(&v.form, v.expression.language()).join(" ");
            if seen.insert((v.expression.clone(), key)) {
                variants.push(v);
            } else {
                self.issues.push(ValidationIssue::error(
                    IssueCode::DuplicateId,
                    v.expression.as_str(),
                    format!("variant form {:?} of {} is defined more than once", v.form, v.expression),
                ));
            }
        }

        Ontology::assemble(
            self.sectors,
            self.reference_language,
            self.concepts,
            self.expressions,
            variants,
            self.issues,
            analyzer.clone(),
        )
    }
}

fn close_symmetric(
    expressions: &mut BTreeMap<ExpressionId, Expression>,
    links: impl Fn(&mut Expression) -> &mut BTreeSet<ExpressionId>,
) {
    let mut reverse: Vec<(ExpressionId, ExpressionId)> = Vec::new();
    for (id, e) in expressions.iter_mut() {
        for other in links(e).iter() {
            reverse.push((other.clone(), id.clone()));
        }
    }
    for (target, source) in reverse {
        if let Some(e) = expressions.get_mut(&target) {
            links(e).insert(source);
        }
    }
}

/// An immutable, fully indexed ontology (sectoral or merged).
#[derive(Debug, Clone)]
pub struct Ontology {
    sectors: BTreeSet<String>,
    reference_language: LanguageCode,
    concepts: BTreeMap<ConceptId, Concept>,
    expressions: BTreeMap<ExpressionId, Expression>,
    variants: Vec<ExpressionVariant>,
    load_issues: Vec<ValidationIssue>,
    analyzer: Analyzer,
    lexicon: Lexicon,
    concept_expressions: BTreeMap<ConceptId, BTreeSet<ExpressionId>>,
    children: BTreeMap<ConceptId, BTreeSet<ConceptId>>,
    variant_ranges: BTreeMap<ExpressionId, (usize, usize)>,
}

impl Ontology {
    pub fn builder(reference_language: LanguageCode) -> OntologyBuilder {
        OntologyBuilder::new(reference_language)
    }

    /// Ontology with no sectors and no content.
    pub fn empty(analyzer: &Analyzer) -> Self {
        OntologyBuilder::new(LanguageCode::FR).build(analyzer)
    }

    fn assemble(
        sectors: BTreeSet<String>,
        reference_language: LanguageCode,
        concepts: BTreeMap<ConceptId, Concept>,
        expressions: BTreeMap<ExpressionId, Expression>,
        variants: Vec<ExpressionVariant>,
        load_issues: Vec<ValidationIssue>,
        analyzer: Analyzer,
    ) -> Self {
        let lexicon = Lexicon::build(expressions.values(), &variants, &analyzer);

        let mut concept_expressions: BTreeMap<ConceptId, BTreeSet<ExpressionId>> = BTreeMap::new();
        for e in expressions.values() {
            for c in &e.concepts {
                concept_expressions.entry(c.clone()).or_default().insert(e.id.clone());
            }
        }

        let mut children: BTreeMap<ConceptId, BTreeSet<ConceptId>> = BTreeMap::new();
        for c in concepts.values() {
            for p in &c.parents {
                children.entry(p.clone()).or_default().insert(c.id.clone());
            }
        }

        let mut variant_ranges = BTreeMap::new();
        let mut start = 0;
        while start < variants.len() {
            let id = &variants[start].expression;
            let end = start + variants[start..].iter().take_while(|v| &v.expression == id).count();
            variant_ranges.insert(id.clone(), (start, end));
            start = end;
        }

        Ontology {
            sectors,
            reference_language,
            concepts,
            expressions,
            variants,
            load_issues,
            analyzer,
            lexicon,
            concept_expressions,
            children,
            variant_ranges,
        }
    }

    pub fn sectors(&self) -> &BTreeSet<String> {
        &self.sectors
    }

    pub fn reference_language(&self) -> LanguageCode {
        self.reference_language
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.expressions.is_empty() && self.variants.is_empty()
    }

    pub fn concepts(&self) -> impl ExactSizeIterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn concept(&self, id: &ConceptId) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn expressions(&self) -> impl ExactSizeIterator<Item = &Expression> {
        self.expressions.values()
    }

    pub fn expression(&self, id: &ExpressionId) -> Option<&Expression> {
        self.expressions.get(id)
    }

    /// All variants, sorted by (expression, form, kind).
    pub fn variants(&self) -> &[ExpressionVariant] {
        &self.variants
    }

    pub fn variants_of(&self, id: &ExpressionId) -> &[ExpressionVariant] {
        match self.variant_ranges.get(id) {
            Some(&(start, end)) => &self.variants[start..end],
            None => &[],
        }
    }

    /// Expressions lexicalizing `concept`.
    pub fn expressions_of(&self, concept: &ConceptId) -> impl Iterator<Item = &ExpressionId> {
        self.concept_expressions.get(concept).into_iter().flatten()
    }

    /// Direct children of `concept` in the is-a hierarchy.
    pub fn children_of(&self, concept: &ConceptId) -> impl Iterator<Item = &ConceptId> {
        self.children.get(concept).into_iter().flatten()
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    pub(crate) fn load_issues(&self) -> &[ValidationIssue] {
        &self.load_issues
    }

    /// Recomputes the lexicon from lemmas and variants.
    pub fn rebuild_lexicon(&self) -> Lexicon {
        Lexicon::build(self.expressions.values(), &self.variants, &self.analyzer)
    }

    /// Expressions whose lemma or a variant normalizes to the same key as `form`.
    pub fn lookup_surface(&self, form: &str, language: LanguageCode) -> BTreeSet<ExpressionId> {
        let key = self.analyzer.form_key(form, language);
        self.lexicon
            .get_tokens(language, &key)
            .cloned()
            .unwrap_or_default()
    }

    pub fn expand(&self, seed: &ExpressionId, policy: &ExpansionPolicy) -> crate::Result<Vec<Expansion>> {
        expand(self, seed, policy)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn links_are_closed_symmetrically() {
        let o = duty_free();
        let f = o.expression(&xid("fr:customs:franchise")).unwrap();
        assert!(f.translations.contains(&xid("en:customs:duty_free")));
        let a = o.expression(&xid("ar:customs:duty_free")).unwrap();
        assert!(a.translations.contains(&xid("en:customs:duty_free")));
        assert!(!a.translations.contains(&xid("fr:customs:franchise")));
    }

    #[test]
    fn lookup_folds_case_and_hyphen() {
        let o = duty_free();
        let hit = o.lookup_surface("Duty Free", LanguageCode::EN);
        assert_eq!(hit, BTreeSet::from([xid("en:customs:duty_free")]));
        assert_eq!(o.lookup_surface("DUTY-FREE", LanguageCode::EN), hit);
        assert!(o.lookup_surface("zzz-unknown", LanguageCode::FR).is_empty());
        // language is part of the key
        assert!(o.lookup_surface("duty free", LanguageCode::FR).is_empty());
    }

    #[test]
    fn every_lemma_finds_its_expression() {
        let o = duty_free();
        for e in o.expressions() {
            assert!(o.lookup_surface(&e.lemma, e.language).contains(&e.id), "{}", e.id);
        }
    }

    #[test]
    fn arabic_lemma_with_stopword_is_keyed_without_it() {
        let o = duty_free();
        let key = LexiconKey {
            language: LanguageCode::AR,
            form: "معفي الرسوم".to_string(),
        };
        assert!(o.lexicon().get(&key).is_some());
    }

    #[test]
    fn lexicon_rebuild_is_identical() {
        let o = duty_free();
        assert_eq!(&o.rebuild_lexicon(), o.lexicon());
        assert_eq!(o.lexicon().longest_key(), 2);
    }

    #[test]
    fn derived_maps() {
        let o = duty_free();
        assert_eq!(o.expressions_of(&cid("customs:duty_free")).count(), 3);
        assert_eq!(o.variants_of(&xid("en:customs:duty_free")).len(), 1);
        assert!(o.variants_of(&xid("fr:customs:franchise")).is_empty());
    }

    #[test]
    fn duplicate_variant_form_is_recorded() {
        let id = xid("en:customs:duty_free");
        let o = Ontology::builder(LanguageCode::FR)
            .sector("customs")
            .expression(Expression::new(id.clone(), "duty-free"))
            .variant(&id, "Duty Free", VariantKind::Spelling)
            .variant(&id, "duty free", VariantKind::Spelling)
            .build(&Analyzer::default());
        assert_eq!(o.variants().len(), 1);
        assert_eq!(o.load_issues().len(), 1);
    }
}
