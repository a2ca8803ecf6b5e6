//! Entailment by forward chaining.
//!
//! Only concept facts are ever derived: role and data facts are fixed by the
//! ABox, so materialization indexes them once and then re-applies the TBox
//! (set-at-a-time) until a round adds nothing.

use std::collections::{BTreeSet, HashMap};

use super::{ConceptExpr, FactStore, Ontology, OntologyError};

/// Missing data values encountered while evaluating thresholds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Coverage {
    /// `(property, individual)` pairs that had no value.
    pub missing: BTreeSet<(String, String)>,
}

impl Coverage {
    pub fn warnings(&self) -> usize {
        self.missing.len()
    }
}

/// Whether `individual` satisfies `expr` in the interpretation given by `facts`.
///
/// A threshold on a property the individual has no value for is false, and the
/// gap is recorded in `coverage`.
pub fn satisfies(expr: &ConceptExpr, individual: &str, facts: &FactStore, coverage: &mut Coverage) -> bool {
    match expr {
        ConceptExpr::Atomic(concept) => facts.has_concept(concept, individual),
        ConceptExpr::ExistsNominal { role, individual: object } => facts.has_role(role, individual, object),
        ConceptExpr::ExistsConcept { role, concept } => facts
            .role_objects(role, individual)
            .any(|object| facts.has_concept(concept, object)),
        ConceptExpr::DataThreshold {
            property,
            comparator,
            threshold,
        } => match facts.data_value(property, individual) {
            Some(value) => comparator.holds(value, threshold),
            None => {
                coverage.missing.insert((property.clone(), individual.to_string()));
                false
            }
        },
        ConceptExpr::Conjunction(parts) => {
            // Evaluate every conjunct so coverage gaps are reported even after a false one.
            let mut all = true;
            for part in parts {
                all &= satisfies(part, individual, facts, coverage);
            }
            all
        }
    }
}

type Members = BTreeSet<usize>;

struct Index<'a> {
    names: Vec<&'a str>,
    /// role -> object -> subjects
    by_object: HashMap<&'a str, HashMap<usize, Members>>,
    /// property -> (individual, value)
    data: HashMap<&'a str, Vec<(usize, &'a crate::decimal::Decimal)>>,
    concepts: HashMap<String, Members>,
}

impl<'a> Index<'a> {
    fn build(facts: &'a FactStore) -> Self {
        let names: Vec<&str> = facts.individuals.iter().map(String::as_str).collect();
        let id = |name: &str| names.binary_search(&name).expect("fact individual is registered");
        let mut by_object: HashMap<&str, HashMap<usize, Members>> = HashMap::new();
        for (role, subject, object) in &facts.role_facts {
            by_object
                .entry(role.as_str())
                .or_default()
                .entry(id(object))
                .or_default()
                .insert(id(subject));
        }
        let mut data: HashMap<&str, Vec<_>> = HashMap::new();
        for ((property, individual), value) in &facts.data_facts {
            data.entry(property.as_str()).or_default().push((id(individual), value));
        }
        let mut concepts: HashMap<String, Members> = HashMap::new();
        for (concept, individual) in &facts.concept_facts {
            concepts.entry(concept.clone()).or_default().insert(id(individual));
        }
        Index {
            names,
            by_object,
            data,
            concepts,
        }
    }

    fn id(&self, name: &str) -> Option<usize> {
        self.names.binary_search(&name).ok()
    }

    fn eval(&self, expr: &ConceptExpr) -> Members {
        match expr {
            ConceptExpr::Atomic(concept) => self.concepts.get(concept).cloned().unwrap_or_default(),
            ConceptExpr::ExistsNominal { role, individual } => self
                .id(individual)
                .and_then(|object| self.by_object.get(role.as_str())?.get(&object).cloned())
                .unwrap_or_default(),
            ConceptExpr::ExistsConcept { role, concept } => {
                let (Some(edges), Some(fillers)) = (self.by_object.get(role.as_str()), self.concepts.get(concept)) else {
                    return Members::new();
                };
                fillers
                    .iter()
                    .filter_map(|object| edges.get(object))
                    .flatten()
                    .copied()
                    .collect()
            }
            ConceptExpr::DataThreshold {
                property,
                comparator,
                threshold,
            } => self
                .data
                .get(property.as_str())
                .map(|values| {
                    values
                        .iter()
                        .filter(|(_, v)| comparator.holds(v, threshold))
                        .map(|(i, _)| *i)
                        .collect()
                })
                .unwrap_or_default(),
            ConceptExpr::Conjunction(parts) => {
                let mut iter = parts.iter();
                let mut acc = iter.next().map(|p| self.eval(p)).unwrap_or_default();
                for part in iter {
                    if acc.is_empty() {
                        break;
                    }
                    let next = self.eval(part);
                    acc.retain(|i| next.contains(i));
                }
                acc
            }
        }
    }
}

/// Least fixpoint of `facts` under the TBox of `ontology`.
///
/// Idempotent and monotone in `facts`. Each round either adds a concept fact
/// or terminates, so at most `|concepts| × |individuals|` rounds run.
pub fn materialize(ontology: &Ontology, facts: &FactStore) -> FactStore {
    let mut index = Index::build(facts);
    loop {
        let mut changed = false;
        for axiom in &ontology.tbox {
            let derived = index.eval(&axiom.lhs);
            if derived.is_empty() {
                continue;
            }
            let target = index.concepts.entry(axiom.rhs.clone()).or_default();
            for i in derived {
                changed |= target.insert(i);
            }
        }
        if !changed {
            break;
        }
    }

    let mut out = facts.clone();
    for (concept, members) in &index.concepts {
        for &i in members {
            out.add_concept(concept.clone(), index.names[i]);
        }
    }
    out
}

/// Individuals entailed to belong to `concept`, in lexicographic order.
///
/// `facts` must already be materialized.
pub fn extension(concept: &str, ontology: &Ontology, facts: &FactStore) -> Result<Vec<String>, OntologyError> {
    if !ontology.concepts.contains(concept) {
        return Err(OntologyError::UnknownConcept(concept.to_string()));
    }
    let lo = (concept.to_string(), String::new());
    Ok(facts
        .concept_facts
        .range(lo..)
        .take_while(|(c, _)| c == concept)
        .map(|(_, i)| i.clone())
        .collect())
}
