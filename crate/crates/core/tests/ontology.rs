mod common;

use common::{direct_entails, naive_materialize, random_kb, rng};
use fairtransport::ontology::{extension, materialize, parse_ontology, ConceptExpr, FactStore};
use fairtransport::sigma::{ingest_bytes, BindingConfig};
use fairtransport::synth;
use proptest::prelude::*;

#[test]
fn materialize_matches_naive_fixpoint_on_random_kbs() {
    let mut derived = 0;
    for seed in 0..40 {
        let kb = random_kb(&mut rng(seed), 15, 30);
        let ontology = parse_ontology(&kb.source).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", kb.source));
        let fast = materialize(&ontology, &kb.facts);
        let slow = naive_materialize(&ontology, &kb.facts);
        assert_eq!(fast, slow, "seed {seed}\n{}", kb.source);
        derived += fast.concept_facts.len() - kb.facts.concept_facts.len();
    }
    // The generator must actually exercise the rules.
    assert!(derived > 50, "only {derived} derived facts");
}

#[test]
fn every_derived_fact_has_a_firing_axiom() {
    for seed in 100..120 {
        let kb = random_kb(&mut rng(seed), 15, 30);
        let ontology = parse_ontology(&kb.source).unwrap();
        let closed = materialize(&ontology, &kb.facts);
        for (concept, ind) in closed.concept_facts.difference(&kb.facts.concept_facts) {
            assert!(
                ontology
                    .tbox
                    .iter()
                    .any(|ax| &ax.rhs == concept && direct_entails(&ax.lhs, ind, &closed)),
                "seed {seed}: {concept}({ind}) is unsupported"
            );
        }
        // Closed: no axiom can fire any further.
        for ax in &ontology.tbox {
            for ind in &closed.individuals {
                if direct_entails(&ax.lhs, ind, &closed) {
                    assert!(closed.has_concept(&ax.rhs, ind));
                }
            }
        }
    }
}

#[test]
fn john_doe_is_sensitive() {
    let ontology = parse_ontology(synth::LOAN_ONTOLOGY).unwrap();
    let binding = BindingConfig::from_json(synth::LOAN_BINDING.as_bytes()).unwrap();
    let ingested = ingest_bytes(synth::LOAN_CSV.as_bytes(), &binding, &ontology).unwrap();
    let closed = materialize(&ontology, &ingested.facts);
    assert!(closed.has_concept("SensitiveAttribute", "JohnDoe"));
    assert!(closed.has_concept("ProxyForLowIncome", "JohnDoe"));
    assert!(closed.has_concept("LowIncomeZIP", "ZIP_12345"));
    assert_eq!(
        extension("SensitiveAttribute", &ontology, &closed).unwrap(),
        ["JohnDoe", "MariaGarcia"]
    );
    assert!(!closed.has_concept("LowIncomeZIP", "ZIP_67890"));
}

#[test]
fn nominal_alone_suffices_without_income_data() {
    let ontology = parse_ontology(synth::LOAN_ONTOLOGY).unwrap();
    let mut facts = FactStore::new();
    facts.add_role("livesInZIP", "JohnDoe", "ZIP_12345");
    let closed = materialize(&ontology, &facts);
    assert!(closed.has_concept("SensitiveAttribute", "JohnDoe"));
}

#[test]
fn printed_ontology_reparses_to_itself() {
    for seed in 200..220 {
        let kb = random_kb(&mut rng(seed), 15, 10);
        let ontology = parse_ontology(&kb.source).unwrap();
        let again = parse_ontology(&ontology.to_string()).unwrap();
        assert_eq!(ontology, again, "seed {seed}");
    }
}

#[test]
fn parse_errors_are_reported() {
    assert!(parse_ontology("concept A. axiom B => A.").is_err());
    assert!(parse_ontology("concept A. concept A.").is_err());
    assert!(parse_ontology("concept A. concept B. axiom A => A and B.").is_err());
    assert!(parse_ontology("role r. concept A. axiom r => A.").is_err());
    assert!(parse_ontology("concept A axiom").is_err());
}

#[test]
fn conjunction_needs_every_part() {
    let ontology = parse_ontology("concept A. concept B. concept C. axiom A and B => C.").unwrap();
    let mut facts = FactStore::new();
    facts.add_concept("A", "x");
    facts.add_concept("A", "y");
    facts.add_concept("B", "y");
    let closed = materialize(&ontology, &facts);
    assert!(!closed.has_concept("C", "x"));
    assert!(closed.has_concept("C", "y"));
    let lhs = ConceptExpr::conjunction(vec![ConceptExpr::atomic("A"), ConceptExpr::atomic("B")]).unwrap();
    assert!(direct_entails(&lhs, "y", &closed));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn materialize_is_idempotent_and_extensive(seed in any::<u64>()) {
        let kb = random_kb(&mut rng(seed), 10, 12);
        let ontology = parse_ontology(&kb.source).unwrap();
        let once = materialize(&ontology, &kb.facts);
        prop_assert!(kb.facts.is_subset_of(&once));
        prop_assert_eq!(materialize(&ontology, &once), once);
    }

    #[test]
    fn materialize_is_monotone(seed in any::<u64>(), drop in 0usize..8) {
        let kb = random_kb(&mut rng(seed), 10, 12);
        let ontology = parse_ontology(&kb.source).unwrap();
        let mut smaller = kb.facts.clone();
        if let Some(fact) = smaller.role_facts.iter().nth(drop).cloned() {
            smaller.role_facts.remove(&fact);
        }
        if let Some(fact) = smaller.concept_facts.iter().nth(drop).cloned() {
            smaller.concept_facts.remove(&fact);
        }
        prop_assert!(materialize(&ontology, &smaller).is_subset_of(&materialize(&ontology, &kb.facts)));
    }
}
