//! Weighted breadth-first expansion of an expression over the lexical graph.
//!
//! Edges leaving an expression:
//! - explicit synonym links (`weight_synonym`, provenance synonym)
//! - explicit translation links (`weight_translation`, provenance translation)
//! - co-lexicalizations, i.e. other expressions of one of its concepts
//!   (`weight_synonym`; synonym within a language, translation across)
//! - expressions of a direct parent or child concept (`weight_hierarchy`)
//!
//! A result's weight is the best product of edge weights over all walks of at
//! most `depth` hops. Its provenance is the most distant edge kind on that walk
//! (synonym < translation < hierarchy); among equal weights the nearer
//! provenance wins.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ExpressionId, Ontology};
use crate::error::{CoreError, Result};

/// How a term entered an enriched query. Declaration order is the preference
/// order used to break ties between equal weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Original,
    Variant,
    Synonym,
    Translation,
    Hierarchy,
    Concept,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Original => "original",
            Provenance::Variant => "variant",
            Provenance::Synonym => "synonym",
            Provenance::Translation => "translation",
            Provenance::Hierarchy => "hierarchy",
            Provenance::Concept => "concept",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionPolicy {
    pub weight_synonym: f64,
    pub weight_translation: f64,
    pub weight_hierarchy: f64,
    pub max_added_per_term: usize,
    pub max_total_terms: usize,
    pub depth: usize,
}

impl Default for ExpansionPolicy {
    fn default() -> Self {
        ExpansionPolicy {
            weight_synonym: 0.8,
            weight_translation: 0.8,
            weight_hierarchy: 0.5,
            max_added_per_term: 8,
            max_total_terms: 64,
            depth: 1,
        }
    }
}

impl ExpansionPolicy {
    pub fn check(&self) -> std::result::Result<(), String> {
        for (name, w) in [
            ("weight_synonym", self.weight_synonym),
            ("weight_translation", self.weight_translation),
            ("weight_hierarchy", self.weight_hierarchy),
        ] {
            if !(0.0..=1.0).contains(&w) {
                return Err(format!("{name} must lie in [0, 1], got {w}"));
            }
        }
        if self.max_total_terms == 0 {
            return Err("max_total_terms must be positive".into());
        }
        if self.depth == 0 {
            return Err("depth must be positive".into());
        }
        Ok(())
    }

    /// Largest configured edge weight.
    pub fn max_weight(&self) -> f64 {
        self.weight_synonym
            .max(self.weight_translation)
            .max(self.weight_hierarchy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub expression: ExpressionId,
    pub weight: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Reach {
    weight: f64,
    provenance: Provenance,
}

impl Reach {
    fn beats(&self, other: &Reach) -> bool {
        match self.weight.partial_cmp(&other.weight) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Equal) => self.provenance < other.provenance,
            _ => false,
        }
    }

    fn extend(&self, edge: &Reach) -> Reach {
        Reach {
            weight: self.weight * edge.weight,
            provenance: self.provenance.max(edge.provenance),
        }
    }
}

fn offer(map: &mut BTreeMap<ExpressionId, Reach>, id: &ExpressionId, reach: Reach) {
    match map.get(id) {
        Some(existing) if !reach.beats(existing) => {}
        _ => {
            map.insert(id.clone(), reach);
        }
    }
}

/// Best single edge to every neighbour of `id`.
pub(crate) fn neighbours(
    ontology: &Ontology,
    id: &ExpressionId,
    policy: &ExpansionPolicy,
) -> BTreeMap<ExpressionId, (f64, Provenance)> {
    let mut out: BTreeMap<ExpressionId, Reach> = BTreeMap::new();
    let Some(expr) = ontology.expression(id) else {
        return BTreeMap::new();
    };
    let mut push = |other: &ExpressionId, weight: f64, provenance: Provenance| {
        if other != id && weight > 0.0 && ontology.expression(other).is_some() {
            offer(&mut out, other, Reach { weight, provenance });
        }
    };

    for s in &expr.synonyms {
        push(s, policy.weight_synonym, Provenance::Synonym);
    }
    for t in &expr.translations {
        push(t, policy.weight_translation, Provenance::Translation);
    }
    for concept in &expr.concepts {
        for other in ontology.expressions_of(concept) {
            let provenance = if other.language() == expr.language {
                Provenance::Synonym
            } else {
                Provenance::Translation
            };
            push(other, policy.weight_synonym, provenance);
        }
        let parents = ontology
            .concept(concept)
            .into_iter()
            .flat_map(|c| c.parents.iter());
        for related in parents.chain(ontology.children_of(concept)) {
            for other in ontology.expressions_of(related) {
                push(other, policy.weight_hierarchy, Provenance::Hierarchy);
            }
        }
    }
    out.into_iter()
        .map(|(k, r)| (k, (r.weight, r.provenance)))
        .collect()
}

/// The seed (weight 1, original) followed by at most `max_added_per_term`
/// reached expressions ordered by weight descending then id ascending.
pub fn expand(ontology: &Ontology, seed: &ExpressionId, policy: &ExpansionPolicy) -> Result<Vec<Expansion>> {
    if ontology.expression(seed).is_none() {
        return Err(CoreError::UnknownExpression(seed.to_string()));
    }

    let mut best: BTreeMap<ExpressionId, Reach> = BTreeMap::new();
    let start = Reach {
        weight: 1.0,
        provenance: Provenance::Original,
    };
    // Walks of exactly `hop` edges, best value per end point.
    let mut layer: BTreeMap<ExpressionId, Reach> = BTreeMap::from([(seed.clone(), start)]);
    let mut adjacency: BTreeMap<ExpressionId, BTreeMap<ExpressionId, (f64, Provenance)>> = BTreeMap::new();

    for _hop in 0..policy.depth {
        let mut next: BTreeMap<ExpressionId, Reach> = BTreeMap::new();
        for (node, reach) in &layer {
            let edges = adjacency
                .entry(node.clone())
                .or_insert_with(|| neighbours(ontology, node, policy));
            for (other, &(weight, provenance)) in edges.iter() {
                let walked = reach.extend(&Reach { weight, provenance });
                offer(&mut next, other, walked);
            }
        }
        for (id, reach) in &next {
            if id != seed {
                offer(&mut best, id, *reach);
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }

    let mut reached: Vec<Expansion> = best
        .into_iter()
        .map(|(expression, r)| Expansion {
            expression,
            weight: r.weight,
            provenance: r.provenance,
        })
        .collect();
    reached.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then_with(|| a.expression.cmp(&b.expression))
    });
    reached.truncate(policy.max_added_per_term);

    let mut out = Vec::with_capacity(reached.len() + 1);
    out.push(Expansion {
        expression: seed.clone(),
        weight: 1.0,
        provenance: Provenance::Original,
    });
    out.extend(reached);
    Ok(out)
}
