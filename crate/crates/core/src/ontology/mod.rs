//! Restricted description-logic ontologies and their entailments.
//!
//! An [`Ontology`] holds a vocabulary (concepts, roles, numeric data
//! properties, named individuals) and a TBox of subsumption axioms whose
//! right-hand side is always an atomic concept. Facts about dataset rows live
//! in a [`FactStore`]; [`materialize`] closes a store under the TBox by forward
//! chaining, after which [`extension`] reads off the individuals entailed to
//! belong to a concept.
//!
//! The supported left-hand sides are atomic concepts, `exists(role, {a})`,
//! `exists(role, C)`, numeric thresholds on data properties, and flat
//! conjunctions of these. There is no negation, so every ontology in this
//! profile is consistent and materialization is a least fixpoint.

mod facts;
mod parser;
mod print;
mod reasoner;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::decimal::Decimal;

pub use facts::{FactError, FactStore};
pub use parser::parse_ontology;
pub use reasoner::{extension, materialize, satisfies, Coverage};

/// Comparison operator of a data threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Comparator {
    pub fn holds(self, value: &Decimal, threshold: &Decimal) -> bool {
        match self {
            Comparator::Lt => value < threshold,
            Comparator::Le => value <= threshold,
            Comparator::Gt => value > threshold,
            Comparator::Ge => value >= threshold,
            Comparator::Eq => value == threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
        }
    }
}

/// Left-hand side of an axiom.
///
/// The derived ordering is the canonical conjunct order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConceptExpr {
    Atomic(String),
    ExistsNominal {
        role: String,
        individual: String,
    },
    ExistsConcept {
        role: String,
        concept: String,
    },
    DataThreshold {
        property: String,
        comparator: Comparator,
        threshold: Decimal,
    },
    /// Flat, sorted, at least two conjuncts. Build through [`ConceptExpr::conjunction`].
    Conjunction(Vec<ConceptExpr>),
}

impl ConceptExpr {
    pub fn atomic(name: impl Into<String>) -> Self {
        ConceptExpr::Atomic(name.into())
    }

    /// Flattens nested conjunctions and sorts the conjuncts.
    ///
    /// Returns `None` when fewer than two conjuncts remain.
    pub fn conjunction(parts: Vec<ConceptExpr>) -> Option<Self> {
        let mut flat = Vec::with_capacity(parts.len());
        for part in parts {
            match part {
                ConceptExpr::Conjunction(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() < 2 {
            return None;
        }
        flat.sort();
        Some(ConceptExpr::Conjunction(flat))
    }
}

/// `lhs ⊑ rhs` with an atomic right-hand side.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Axiom {
    pub lhs: ConceptExpr,
    pub rhs: String,
}

/// Which vocabulary set a name belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameKind {
    Concept,
    Role,
    DataProperty,
    Individual,
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameKind::Concept => "concept",
            NameKind::Role => "role",
            NameKind::DataProperty => "data property",
            NameKind::Individual => "individual",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: undeclared name `{name}`")]
    Undeclared {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("{line}:{column}: `{name}` is already declared as a {previous}")]
    DuplicateDeclaration {
        line: usize,
        column: usize,
        name: String,
        previous: NameKind,
    },
    #[error("{line}:{column}: right-hand side of an axiom must be a single concept name")]
    NonAtomicRhs { line: usize, column: usize },
    #[error("{line}:{column}: `{name}` is a {found}, expected a {expected}")]
    WrongKind {
        line: usize,
        column: usize,
        name: String,
        expected: NameKind,
        found: NameKind,
    },
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
}

/// A parsed and validated ontology.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub data_properties: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
    pub tbox: Vec<Axiom>,
    pub sensitive_markers: BTreeSet<String>,
}

impl Ontology {
    pub fn kind_of(&self, name: &str) -> Option<NameKind> {
        if self.concepts.contains(name) {
            Some(NameKind::Concept)
        } else if self.roles.contains(name) {
            Some(NameKind::Role)
        } else if self.data_properties.contains(name) {
            Some(NameKind::DataProperty)
        } else if self.individuals.contains(name) {
            Some(NameKind::Individual)
        } else {
            None
        }
    }

    /// Sensitive concepts in lexicographic order (the mask column order).
    pub fn sensitive_concepts(&self) -> Vec<String> {
        self.sensitive_markers.iter().cloned().collect()
    }

    pub fn is_sensitive(&self, concept: &str) -> bool {
        self.sensitive_markers.contains(concept)
    }
}
