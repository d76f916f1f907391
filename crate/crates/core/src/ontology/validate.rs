use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ConceptId, Ontology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueCode {
    DanglingReference,
    CrossLanguageViolation,
    HierarchyCycle,
    DuplicateId,
    DuplicateProperty,
    SectorMismatch,
    LanguageMismatch,
    IsARelation,
    EmptyForm,
    NoConcept,
    UnknownLanguage,
    MissingReferenceLexicalization,
    UnindexableForm,
    UnresolvedAnnotation,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::DanglingReference => "dangling-reference",
            IssueCode::CrossLanguageViolation => "cross-language-violation",
            IssueCode::HierarchyCycle => "hierarchy-cycle",
            IssueCode::DuplicateId => "duplicate-id",
            IssueCode::DuplicateProperty => "duplicate-property",
            IssueCode::SectorMismatch => "sector-mismatch",
            IssueCode::LanguageMismatch => "language-mismatch",
            IssueCode::IsARelation => "is-a-relation",
            IssueCode::EmptyForm => "empty-form",
            IssueCode::NoConcept => "no-concept",
            IssueCode::UnknownLanguage => "unknown-language",
            IssueCode::MissingReferenceLexicalization => "missing-reference-lexicalization",
            IssueCode::UnindexableForm => "unindexable-form",
            IssueCode::UnresolvedAnnotation => "unresolved-annotation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub code: IssueCode,
    pub subject: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn error(code: IssueCode, subject: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationIssue {
            severity: Severity::Error,
            code,
            subject: subject.into(),
            message: message.into(),
        }
    }

    pub fn warning(code: IssueCode, subject: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationIssue {
            severity: Severity::Warning,
            code,
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}] {}: {}", self.code.as_str(), self.subject, self.message)
    }
}

/// Every violation found, errors first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn from_issues(mut issues: Vec<ValidationIssue>) -> Self {
        issues.sort();
        issues.dedup();
        ValidationReport { issues }
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.error_count() > 0
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn with_code(&self, code: IssueCode) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(move |i| i.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        write!(
            f,
            "{} error(s), {} warning(s)",
            self.error_count(),
            self.warnings().count()
        )
    }
}

pub fn validate(ontology: &Ontology) -> ValidationReport {
    let mut issues: Vec<ValidationIssue> = ontology.load_issues().to_vec();
    let sectors = ontology.sectors();
    let analyzer = ontology.analyzer();

    for concept in ontology.concepts() {
        let id = concept.id.as_str();
        if !sectors.contains(concept.id.sector()) {
            issues.push(ValidationIssue::error(
                IssueCode::SectorMismatch,
                id,
                format!("sector {:?} is not one of this ontology's sectors", concept.id.sector()),
            ));
        }
        for parent in &concept.parents {
            if ontology.concept(parent).is_none() {
                issues.push(ValidationIssue::error(
                    IssueCode::DanglingReference,
                    id,
                    format!("parent {parent} does not exist"),
                ));
            }
        }
        for lang in concept.glosses.keys().filter(|l| !l.is_supported()) {
            issues.push(ValidationIssue::warning(
                IssueCode::UnknownLanguage,
                id,
                format!("gloss in unknown language {lang}"),
            ));
        }
        let mut names = BTreeSet::new();
        for prop in &concept.properties {
            if !names.insert(prop.name.as_str()) {
                issues.push(ValidationIssue::error(
                    IssueCode::DuplicateProperty,
                    id,
                    format!("property {:?} is declared more than once", prop.name),
                ));
            }
            if prop.owner != concept.id {
                issues.push(ValidationIssue::error(
                    IssueCode::DanglingReference,
                    id,
                    format!("property {:?} is owned by {}", prop.name, prop.owner),
                ));
            }
        }
        for rel in &concept.relations {
            if rel.source != concept.id || ontology.concept(&rel.target).is_none() {
                issues.push(ValidationIssue::error(
                    IssueCode::DanglingReference,
                    id,
                    format!("relation {:?} {} -> {} does not resolve", rel.name, rel.source, rel.target),
                ));
            }
            if rel.name == "is-a" && rel.source == rel.target {
                issues.push(ValidationIssue::error(
                    IssueCode::IsARelation,
                    id,
                    "is-a self-loop; hierarchy belongs in parents",
                ));
            }
        }
        let reference = ontology.reference_language();
        let lexicalized = ontology
            .expressions_of(&concept.id)
            .any(|e| e.language() == reference);
        if !lexicalized {
            issues.push(ValidationIssue::warning(
                IssueCode::MissingReferenceLexicalization,
                id,
                format!("no expression in reference language {reference}"),
            ));
        }
    }

    issues.extend(hierarchy_cycles(ontology));

    for expr in ontology.expressions() {
        let id = expr.id.as_str();
        if !sectors.contains(expr.id.sector()) {
            issues.push(ValidationIssue::error(
                IssueCode::SectorMismatch,
                id,
                format!("sector {:?} is not one of this ontology's sectors", expr.id.sector()),
            ));
        }
        if expr.id.language() != expr.language {
            issues.push(ValidationIssue::error(
                IssueCode::LanguageMismatch,
                id,
                format!("id prefix disagrees with language {}", expr.language),
            ));
        }
        if !expr.language.is_supported() {
            issues.push(ValidationIssue::warning(
                IssueCode::UnknownLanguage,
                id,
                format!("unknown language {}", expr.language),
            ));
        }
        if expr.lemma.trim().is_empty() {
            issues.push(ValidationIssue::error(IssueCode::EmptyForm, id, "empty lemma"));
        } else if analyzer.form_key(&expr.lemma, expr.language).is_empty() {
            issues.push(ValidationIssue::warning(
                IssueCode::UnindexableForm,
                id,
                format!("lemma {:?} yields no tokens", expr.lemma),
            ));
        }
        if expr.concepts.is_empty() {
            issues.push(ValidationIssue::warning(
                IssueCode::NoConcept,
                id,
                "expression is not linked to any concept",
            ));
        }
        for c in &expr.concepts {
            if ontology.concept(c).is_none() {
                issues.push(ValidationIssue::error(
                    IssueCode::DanglingReference,
                    id,
                    format!("concept {c} does not exist"),
                ));
            }
        }
        for (links, same_language, kind) in [
            (&expr.synonyms, true, "synonym"),
            (&expr.translations, false, "translation"),
        ] {
            for other in links {
                match ontology.expression(other) {
                    None => issues.push(ValidationIssue::error(
                        IssueCode::DanglingReference,
                        id,
                        format!("{kind} {other} does not exist"),
                    )),
                    // one report per unordered pair
                    Some(o) if expr.id < o.id && (o.language == expr.language) != same_language => {
                        let rule = if same_language {
                            "synonyms must share a language"
                        } else {
                            "translations must cross languages"
                        };
                        issues.push(ValidationIssue::error(
                            IssueCode::CrossLanguageViolation,
                            id,
                            format!("{kind} link to {other}: {rule}"),
                        ));
                    }
                    Some(_) => {}
                }
            }
        }
        if let Some(target) = &expr.acronym_of {
            if ontology.expression(target).is_none() {
                issues.push(ValidationIssue::error(
                    IssueCode::DanglingReference,
                    id,
                    format!("acronym_of {target} does not exist"),
                ));
            }
        }
    }

    for v in ontology.variants() {
        let subject = v.expression.as_str();
        if ontology.expression(&v.expression).is_none() {
            issues.push(ValidationIssue::error(
                IssueCode::DanglingReference,
                subject,
                format!("variant {:?} belongs to a missing expression", v.form),
            ));
        }
        if v.form.trim().is_empty() {
            issues.push(ValidationIssue::error(IssueCode::EmptyForm, subject, "empty variant form"));
        } else if analyzer.form_key(&v.form, v.expression.language()).is_empty() {
            issues.push(ValidationIssue::warning(
                IssueCode::UnindexableForm,
                subject,
                format!("variant {:?} yields no tokens", v.form),
            ));
        }
    }

    ValidationReport::from_issues(issues)
}

/// One error per strongly connected component of the parent graph that
/// contains a cycle, listing one concrete cycle through its smallest member.
fn hierarchy_cycles(ontology: &Ontology) -> Vec<ValidationIssue> {
    let graph: BTreeMap<&ConceptId, Vec<&ConceptId>> = ontology
        .concepts()
        .map(|c| {
            let parents = c.parents.iter().filter(|p| ontology.concept(p).is_some()).collect();
            (&c.id, parents)
        })
        .collect();

    let mut issues = Vec::new();
    for component in strongly_connected(&graph) {
        let start = component[0];
        let cyclic = component.len() > 1 || graph[start].contains(&start);
        if !cyclic {
            continue;
        }
        let members: BTreeSet<&ConceptId> = component.iter().copied().collect();
        let cycle = shortest_cycle(&graph, &members, start);
        let rendered: Vec<&str> = cycle.iter().map(|c| c.as_str()).collect();
        issues.push(ValidationIssue::error(
            IssueCode::HierarchyCycle,
            start.as_str(),
            format!("is-a cycle: {}", rendered.join(" -> ")),
        ));
    }
    issues
}

/// Tarjan's algorithm; components are returned with members sorted.
fn strongly_connected<'a>(graph: &BTreeMap<&'a ConceptId, Vec<&'a ConceptId>>) -> Vec<Vec<&'a ConceptId>> {
    struct State<'a> {
        index: BTreeMap<&'a ConceptId, usize>,
        low: BTreeMap<&'a ConceptId, usize>,
        stack: Vec<&'a ConceptId>,
        on_stack: BTreeSet<&'a ConceptId>,
        out: Vec<Vec<&'a ConceptId>>,
    }

    fn visit<'a>(
        v: &'a ConceptId,
        graph: &BTreeMap<&'a ConceptId, Vec<&'a ConceptId>>,
        st: &mut State<'a>,
    ) {
        let i = st.index.len();
        st.index.insert(v, i);
        st.low.insert(v, i);
        st.stack.push(v);
        st.on_stack.insert(v);
        for &w in &graph[v] {
            if !st.index.contains_key(w) {
                visit(w, graph, st);
                let lw = st.low[w];
                let lv = st.low.get_mut(v).expect("visited");
                *lv = (*lv).min(lw);
            } else if st.on_stack.contains(w) {
                let iw = st.index[w];
                let lv = st.low.get_mut(v).expect("visited");
                *lv = (*lv).min(iw);
            }
        }
        if st.low[v] == st.index[v] {
            let mut component = Vec::new();
            while let Some(w) = st.stack.pop() {
                st.on_stack.remove(w);
                component.push(w);
                if w == v {
                    break;
                }
            }
            component.sort();
            st.out.push(component);
        }
    }

    let mut st = State {
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on_stack: BTreeSet::new(),
        out: Vec::new(),
    };
    for &v in graph.keys() {
        if !st.index.contains_key(v) {
            visit(v, graph, &mut st);
        }
    }
    st.out.sort();
    st.out
}

fn shortest_cycle<'a>(
    graph: &BTreeMap<&'a ConceptId, Vec<&'a ConceptId>>,
    members: &BTreeSet<&'a ConceptId>,
    start: &'a ConceptId,
) -> Vec<&'a ConceptId> {
    let mut prev: BTreeMap<&ConceptId, &ConceptId> = BTreeMap::new();
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &graph[v] {
            if !members.contains(w) {
                continue;
            }
            if w == start {
                let mut path = vec![start];
                let mut cur = v;
                while cur != start {
                    path.push(cur);
                    cur = prev[cur];
                }
                path.push(start);
                let end = path.len() - 1;
                path[1..end].reverse();
                return path;
            }
            if w != start && !prev.contains_key(w) {
                prev.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    vec![start]
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::*;
    use super::*;
    use crate::lang::LanguageCode;
    use crate::text::Analyzer;

    fn concept_with_parents(id: &str, parents: &[&str]) -> Concept {
        let mut c = Concept::new(cid(id));
        c.parents = parents.iter().map(|p| cid(p)).collect();
        c
    }

    /// Brute force: a concept is on a cycle iff it can reach itself.
    fn brute_force_cyclic(edges: &BTreeMap<String, Vec<String>>) -> BTreeSet<String> {
        let mut cyclic = BTreeSet::new();
        for start in edges.keys() {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<&String> = edges[start].iter().collect();
            while let Some(v) = stack.pop() {
                if v == start {
                    cyclic.insert(start.clone());
                    break;
                }
                if seen.insert(v.clone()) {
                    stack.extend(edges.get(v).into_iter().flatten());
                }
            }
        }
        cyclic
    }

    #[test]
    fn empty_ontology_has_empty_report() {
        let o = Ontology::empty(&Analyzer::default());
        assert!(o.validate().is_empty());
    }

    #[test]
    fn duty_free_fixture_is_clean() {
        let report = duty_free().validate();
        assert!(!report.has_errors(), "{report}");
    }

    #[test]
    fn same_language_translation_is_one_error() {
        let mut a = Expression::new(xid("fr:customs:a"), "visa");
        a.translations.insert(xid("fr:customs:b"));
        let b = Expression::new(xid("fr:customs:b"), "visa de sortie");
        let o = Ontology::builder(LanguageCode::FR)
            .sector("customs")
            .expression(a)
            .expression(b)
            .build(&Analyzer::default());
        let report = o.validate();
        let errors: Vec<_> = report.errors().collect();
        assert_eq!(errors.len(), 1, "{report}");
        assert_eq!(errors[0].code, IssueCode::CrossLanguageViolation);
    }

    #[test]
    fn cross_language_synonym_is_error() {
        let mut a = Expression::new(xid("fr:customs:a"), "visa");
        a.synonyms.insert(xid("en:customs:b"));
        let o = Ontology::builder(LanguageCode::FR)
            .sector("customs")
            .expression(a)
            .expression(Expression::new(xid("en:customs:b"), "visa"))
            .build(&Analyzer::default());
        assert_eq!(o.validate().with_code(IssueCode::CrossLanguageViolation).count(), 1);
    }

    #[test]
    fn three_cycle_is_one_error_listing_the_cycle() {
        let o = Ontology::builder(LanguageCode::FR)
            .sector("s")
            .concept(concept_with_parents("s:a", &["s:b"]))
            .concept(concept_with_parents("s:b", &["s:c"]))
            .concept(concept_with_parents("s:c", &["s:a"]))
            .concept(concept_with_parents("s:d", &["s:a"]))
            .build(&Analyzer::default());

        let edges: BTreeMap<String, Vec<String>> = o
            .concepts()
            .map(|c| (c.id.to_string(), c.parents.iter().map(|p| p.to_string()).collect()))
            .collect();
        let expected: BTreeSet<String> = ["s:a", "s:b", "s:c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(brute_force_cyclic(&edges), expected);

        let report = o.validate();
        let cycles: Vec<_> = report.with_code(IssueCode::HierarchyCycle).collect();
        assert_eq!(cycles.len(), 1);
        assert!(cycles[0].message.ends_with("s:a -> s:b -> s:c -> s:a"), "{}", cycles[0].message);
        assert_eq!(report.error_count(), 1, "{report}");
    }

    #[test]
    fn self_parent_is_a_cycle() {
        let o = Ontology::builder(LanguageCode::FR)
            .sector("s")
            .concept(concept_with_parents("s:a", &["s:a"]))
            .build(&Analyzer::default());
        assert_eq!(o.validate().with_code(IssueCode::HierarchyCycle).count(), 1);
    }

    #[test]
    fn dangling_and_duplicate_ids() {
        let mut e = Expression::new(xid("fr:s:x"), "x");
        e.concepts.insert(cid("s:missing"));
        e.synonyms.insert(xid("fr:s:ghost"));
        let o = Ontology::builder(LanguageCode::FR)
            .sector("s")
            .concept(concept_with_parents("s:a", &["s:nowhere"]))
            .concept(Concept::new(cid("s:a")))
            .expression(e)
            .build(&Analyzer::default());
        let report = o.validate();
        assert_eq!(report.with_code(IssueCode::DanglingReference).count(), 3, "{report}");
        assert_eq!(report.with_code(IssueCode::DuplicateId).count(), 1, "{report}");
    }

    #[test]
    fn warnings_for_orphans_and_unknown_languages() {
        let o = Ontology::builder(LanguageCode::FR)
            .sector("s")
            .concept(Concept::new(cid("s:a")))
            .expression(Expression::new(xid("de:s:x"), "Zoll"))
            .build(&Analyzer::default());
        let report = o.validate();
        assert!(!report.has_errors(), "{report}");
        assert_eq!(report.with_code(IssueCode::NoConcept).count(), 1);
        assert_eq!(report.with_code(IssueCode::UnknownLanguage).count(), 1);
        assert_eq!(report.with_code(IssueCode::MissingReferenceLexicalization).count(), 1);
    }

    #[test]
    fn isa_self_relation_and_sector_mismatch() {
        let mut c = Concept::new(cid("s:a"));
        c.relations.push(SemanticRelation {
            name: "is-a".into(),
            source: cid("s:a"),
            target: cid("s:a"),
            cardinality: Cardinality::Any,
        });
        let o = Ontology::builder(LanguageCode::FR)
            .sector("other")
            .concept(c)
            .build(&Analyzer::default());
        let report = o.validate();
        assert_eq!(report.with_code(IssueCode::IsARelation).count(), 1);
        assert_eq!(report.with_code(IssueCode::SectorMismatch).count(), 1);
    }
}
