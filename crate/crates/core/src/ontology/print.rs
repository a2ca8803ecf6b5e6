use std::fmt;

use super::{Axiom, ConceptExpr, Ontology};

impl fmt::Display for ConceptExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptExpr::Atomic(name) => f.write_str(name),
            ConceptExpr::ExistsNominal { role, individual } => write!(f, "exists({role}, {{{individual}}})"),
            ConceptExpr::ExistsConcept { role, concept } => write!(f, "exists({role}, {concept})"),
            ConceptExpr::DataThreshold {
                property,
                comparator,
                threshold,
            } => write!(f, "{property} {} {threshold}", comparator.symbol()),
            ConceptExpr::Conjunction(parts) => {
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" and ")?;
                    }
                    write!(f, "{part}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "axiom {} => {}.", self.lhs, self.rhs)
    }
}

/// Canonical text: declarations sorted within each kind, then axioms in source order.
impl fmt::Display for Ontology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for concept in &self.concepts {
            if self.sensitive_markers.contains(concept) {
                writeln!(f, "sensitive concept {concept}.")?;
            } else {
                writeln!(f, "concept {concept}.")?;
            }
        }
        for role in &self.roles {
            writeln!(f, "role {role}.")?;
        }
        for property in &self.data_properties {
            writeln!(f, "data {property}.")?;
        }
        for individual in &self.individuals {
            writeln!(f, "individual {individual}.")?;
        }
        for axiom in &self.tbox {
            writeln!(f, "{axiom}")?;
        }
        Ok(())
    }
}
