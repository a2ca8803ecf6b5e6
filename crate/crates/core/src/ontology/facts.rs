use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::decimal::Decimal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactError {
    #[error("conflicting values for {property}({individual}): {existing} vs {new}")]
    ConflictingData {
        property: String,
        individual: String,
        existing: Decimal,
        new: Decimal,
    },
}

/// ABox assertions: concept memberships, role edges, and numeric data values.
///
/// All collections are ordered so that iteration and serialization are canonical.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactStore {
    /// Every individual mentioned by any fact, plus registered rows with no facts.
    pub individuals: BTreeSet<String>,
    /// `(concept, individual)`
    pub concept_facts: BTreeSet<(String, String)>,
    /// `(role, subject, object)`
    pub role_facts: BTreeSet<(String, String, String)>,
    /// `(property, individual) -> value`
    pub data_facts: BTreeMap<(String, String), Decimal>,
}

impl FactStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_individual(&mut self, individual: impl Into<String>) {
        self.individuals.insert(individual.into());
    }

    /// Returns `true` when the fact was not already present.
    pub fn add_concept(&mut self, concept: impl Into<String>, individual: impl Into<String>) -> bool {
        let individual = individual.into();
        self.individuals.insert(individual.clone());
        self.concept_facts.insert((concept.into(), individual))
    }

    pub fn add_role(&mut self, role: impl Into<String>, subject: impl Into<String>, object: impl Into<String>) -> bool {
        let (subject, object) = (subject.into(), object.into());
        self.individuals.insert(subject.clone());
        self.individuals.insert(object.clone());
        self.role_facts.insert((role.into(), subject, object))
    }

    /// A repeated identical assertion is accepted; a differing one is an error.
    pub fn add_data(
        &mut self,
        property: impl Into<String>,
        individual: impl Into<String>,
        value: Decimal,
    ) -> Result<(), FactError> {
        let key = (property.into(), individual.into());
        if let Some(existing) = self.data_facts.get(&key) {
            if *existing != value {
                return Err(FactError::ConflictingData {
                    property: key.0,
                    individual: key.1,
                    existing: existing.clone(),
                    new: value,
                });
            }
            return Ok(());
        }
        self.individuals.insert(key.1.clone());
        self.data_facts.insert(key, value);
        Ok(())
    }

    pub fn has_concept(&self, concept: &str, individual: &str) -> bool {
        self.concept_facts.contains(&(concept.to_string(), individual.to_string()))
    }

    pub fn has_role(&self, role: &str, subject: &str, object: &str) -> bool {
        self.role_facts
            .contains(&(role.to_string(), subject.to_string(), object.to_string()))
    }

    pub fn data_value(&self, property: &str, individual: &str) -> Option<&Decimal> {
        self.data_facts.get(&(property.to_string(), individual.to_string()))
    }

    /// Objects `b` with `role(subject, b)`.
    pub fn role_objects<'a>(&'a self, role: &'a str, subject: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        let lo = (role.to_string(), subject.to_string(), String::new());
        self.role_facts
            .range(lo..)
            .take_while(move |(r, s, _)| r == role && s == subject)
            .map(|(_, _, o)| o.as_str())
    }

    /// `true` when every fact of `self` is also a fact of `other`.
    pub fn is_subset_of(&self, other: &FactStore) -> bool {
        self.individuals.is_subset(&other.individuals)
            && self.concept_facts.is_subset(&other.concept_facts)
            && self.role_facts.is_subset(&other.role_facts)
            && self
                .data_facts
                .iter()
                .all(|(k, v)| other.data_facts.get(k) == Some(v))
    }

    /// Canonical JSON bytes of the store.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct DataFact<'a> {
            property: &'a str,
            individual: &'a str,
            value: &'a Decimal,
        }
        #[derive(Serialize)]
        struct Canonical<'a> {
            concept_facts: &'a BTreeSet<(String, String)>,
            data_facts: Vec<DataFact<'a>>,
            individuals: &'a BTreeSet<String>,
            role_facts: &'a BTreeSet<(String, String, String)>,
        }
        let canonical = Canonical {
            concept_facts: &self.concept_facts,
            data_facts: self
                .data_facts
                .iter()
                .map(|((property, individual), value)| DataFact {
                    property,
                    individual,
                    value,
                })
                .collect(),
            individuals: &self.individuals,
            role_facts: &self.role_facts,
        };
        serde_json::to_vec(&canonical).expect("fact store serializes")
    }
}
