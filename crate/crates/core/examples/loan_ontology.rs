//! Parse the bundled loan ontology, ingest the four applicants and list who
//! is entailed to be sensitive.

use fairtransport::ontology::{extension, materialize, parse_ontology};
use fairtransport::sigma::{ingest_bytes, BindingConfig};
use fairtransport::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ontology = parse_ontology(synth::LOAN_ONTOLOGY)?;
    println!("{ontology}");

    let binding = BindingConfig::from_json(synth::LOAN_BINDING.as_bytes())?;
    let ingested = ingest_bytes(synth::LOAN_CSV.as_bytes(), &binding, &ontology)?;
    let facts = materialize(&ontology, &ingested.facts);
    println!(
        "{} asserted concept facts, {} after materialization",
        ingested.facts.concept_facts.len(),
        facts.concept_facts.len()
    );
    for concept in ontology.sensitive_concepts() {
        println!("{concept}: {:?}", extension(&concept, &ontology, &facts)?);
    }
    println!("LowIncomeZIP: {:?}", extension("LowIncomeZIP", &ontology, &facts)?);
    Ok(())
}
