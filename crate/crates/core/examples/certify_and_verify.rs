//! Certify the loan fixture, verify the certificate, then edit one byte of
//! the data and verify again.

use fairtransport::certify::verify_certificate;
use fairtransport::pipeline::{cmd_certify, RunConfig, CERT_FILE};
use fairtransport::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let paths = synth::loan_fixture().write_to(dir.path())?;
    let cfg = RunConfig::new(&paths.ontology, &paths.binding, &paths.dataset, dir.path().join("out"), 42);
    let (_, cert) = cmd_certify(&cfg, chrono::Utc::now())?;
    println!("{}\n", cert.to_canonical_json()?);

    let bytes = std::fs::read(cfg.out.join(CERT_FILE))?;
    println!("{}\n", verify_certificate(&bytes, &paths.ontology, &paths.binding, &paths.dataset)?);

    let data = std::fs::read_to_string(&paths.dataset)?.replacen("640", "641", 1);
    std::fs::write(&paths.dataset, data)?;
    println!("{}", verify_certificate(&bytes, &paths.ontology, &paths.binding, &paths.dataset)?);
    Ok(())
}
