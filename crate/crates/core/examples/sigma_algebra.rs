//! Build the mask matrix for the leaky loan data, group rows into atoms and
//! evaluate a few events of the generated σ-algebra.

use fairtransport::ontology::{materialize, parse_ontology};
use fairtransport::sigma::{atoms, build_mask, event_membership, ingest_bytes, BindingConfig, EventExpr};
use fairtransport::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ontology = parse_ontology(synth::LOAN_ONTOLOGY)?;
    let binding = BindingConfig::from_json(synth::LOAN_BINDING.as_bytes())?;
    let ingested = ingest_bytes(synth::leaky_loan_csv(1, 5).as_bytes(), &binding, &ontology)?;
    let facts = materialize(&ontology, &ingested.facts);
    let mask = build_mask(&ontology, &facts, &ingested.dataset, false)?;
    let partition = atoms(&mask);

    println!("generators: {:?}", mask.concepts());
    println!("{} rows, {} atoms, |σ-algebra| = {:?}", mask.n_rows(), partition.n_atoms(), partition.algebra_size());
    for (id, sig) in partition.signatures().iter().enumerate() {
        println!("  atom {id}: signature {sig:?}, {} rows", partition.sizes()[id]);
    }
    for text in ["C0", "!C0", "C0 & !C1", "C0 | C1", "all"] {
        let expr: EventExpr = text.parse()?;
        let rows = event_membership(&expr, &partition, &mask)?;
        println!("{text:>10}: {} rows", rows.len());
    }
    Ok(())
}
