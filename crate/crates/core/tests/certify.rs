mod common;

use std::fs;
use std::sync::OnceLock;

use chrono::{TimeZone, Utc};
use common::rng;
use fairtransport::certify::{
    canonicalize, sha256_hex, verify_certificate, verify_inputs, CertError, Certificate, FieldStatus,
};
use fairtransport::pipeline::{self, Inputs, PipelineError, RunConfig, CERT_FILE};
use fairtransport::synth::{self, Fixture, FixturePaths};
use fairtransport::transport::Method;
use proptest::prelude::*;
use rand::Rng;
use tempfile::TempDir;

const INPUT_DIGESTS: [&str; 3] = ["ontology_sha256", "binding_sha256", "dataset_sha256"];

fn setup(fixture: &Fixture) -> (TempDir, FixturePaths) {
    let dir = TempDir::new().unwrap();
    let paths = fixture.write_to(&dir.path().join("in")).unwrap();
    (dir, paths)
}

fn config(dir: &TempDir, paths: &FixturePaths, out: &str) -> RunConfig {
    let mut cfg = RunConfig::new(&paths.ontology, &paths.binding, &paths.dataset, dir.path().join(out), 42);
    cfg.permutations = 199;
    cfg
}

fn certify(cfg: &RunConfig) -> (Certificate, Vec<u8>) {
    let t = Utc.with_ymd_and_hms(2026, 1, 2, 3, 4, 5).unwrap();
    let (_, cert) = pipeline::cmd_certify(cfg, t).unwrap();
    (cert, fs::read(cfg.out.join(CERT_FILE)).unwrap())
}

#[test]
fn certificates_are_deterministic() {
    let (dir, paths) = setup(&synth::loan_fixture());
    let (_, a) = certify(&config(&dir, &paths, "a"));
    let (_, b) = certify(&config(&dir, &paths, "b"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(canonicalize(&text).unwrap(), text);
    assert!(text.contains("\"created_utc\":\"2026-01-02T03:04:05Z\""));
}

#[test]
fn certify_then_verify_passes() {
    for method in [Method::Quantile1d, Method::Algorithm1] {
        let (dir, paths) = setup(&synth::loan_fixture());
        let mut cfg = config(&dir, &paths, "out");
        cfg.method = method;
        let (cert, bytes) = certify(&cfg);
        assert_eq!(cert.ontology_sha256, sha256_hex(synth::LOAN_ONTOLOGY.as_bytes()));
        let report = verify_certificate(&bytes, &paths.ontology, &paths.binding, &paths.dataset).unwrap();
        assert!(report.pass, "{report}");
        assert_eq!(report.fields.len(), 6);
        assert!(report.recompute_error.is_none());
        assert!(report.to_string().ends_with("overall: PASS"));
    }
}

#[test]
fn flipped_bytes_flip_their_digest() {
    let fixture = synth::loan_fixture();
    let (dir, paths) = setup(&fixture);
    let (cert, _) = certify(&config(&dir, &paths, "out"));
    let clean = Inputs::read(&paths.ontology, &paths.binding, &paths.dataset).unwrap();
    let mut r = rng(9);
    for _ in 0..60 {
        let which = r.random_range(0..3);
        let mut inputs = clean.clone();
        let file = match which {
            0 => &mut inputs.ontology,
            1 => &mut inputs.binding,
            _ => &mut inputs.dataset,
        };
        let at = r.random_range(0..file.len());
        file[at] ^= 1 << r.random_range(0..8);
        let report = verify_inputs(&cert, &inputs);
        assert!(!report.pass);
        for (k, name) in INPUT_DIGESTS.iter().enumerate() {
            let expected = if k == which { FieldStatus::Mismatch } else { FieldStatus::Match };
            assert_eq!(report.field(name).unwrap().status, expected, "{name} after flipping file {which} at {at}");
        }
    }
}

#[test]
fn added_proxy_axiom_is_pinpointed() {
    let fixture = synth::loan_fixture();
    let (dir, paths) = setup(&fixture);
    let (_, bytes) = certify(&config(&dir, &paths, "out"));
    let edited = format!(
        "{}individual ZIP_67890.\naxiom exists(livesInZIP, {{ZIP_67890}}) => ProxyForLowIncome.\n",
        synth::LOAN_ONTOLOGY
    );
    fs::write(&paths.ontology, edited).unwrap();
    let report = verify_certificate(&bytes, &paths.ontology, &paths.binding, &paths.dataset).unwrap();
    let mismatches = report.mismatches();
    assert!(mismatches.contains(&"ontology_sha256"));
    assert!(mismatches.contains(&"mask_sha256"));
    assert!(!mismatches.contains(&"binding_sha256"));
    assert!(!mismatches.contains(&"dataset_sha256"));
    assert!(report.to_string().ends_with("overall: FAIL"));
}

#[test]
fn unparseable_input_reports_derived_fields_unavailable() {
    let (dir, paths) = setup(&synth::loan_fixture());
    let (_, bytes) = certify(&config(&dir, &paths, "out"));
    fs::write(&paths.binding, b"{ not json").unwrap();
    let report = verify_certificate(&bytes, &paths.ontology, &paths.binding, &paths.dataset).unwrap();
    assert!(report.recompute_error.is_some());
    assert_eq!(report.field("mask_sha256").unwrap().recomputed, "unavailable");
    assert_eq!(report.field("ontology_sha256").unwrap().status, FieldStatus::Match);
}

#[test]
fn truncated_digest_is_a_schema_error() {
    let (dir, paths) = setup(&synth::loan_fixture());
    let (cert, _) = certify(&config(&dir, &paths, "out"));
    let text = cert.to_canonical_json().unwrap();
    let truncated = text.replace(&cert.dataset_sha256, &cert.dataset_sha256[..63]);
    let err = verify_certificate(truncated.as_bytes(), &paths.ontology, &paths.binding, &paths.dataset).unwrap_err();
    assert!(matches!(err, PipelineError::Cert(CertError::Schema(_))), "{err}");
}

#[test]
fn numeric_fields_compare_with_relative_tolerance() {
    let (dir, paths) = setup(&synth::loan_fixture());
    let (cert, _) = certify(&config(&dir, &paths, "out"));
    let inputs = Inputs::read(&paths.ontology, &paths.binding, &paths.dataset).unwrap();

    let mut nudged = cert.clone();
    nudged.reconstruction_error *= 1.0 + 1e-12;
    assert!(verify_inputs(&nudged, &inputs).pass);

    let mut forged = cert.clone();
    forged.reconstruction_error *= 0.9;
    let report = verify_inputs(&forged, &inputs);
    assert_eq!(report.mismatches(), ["reconstruction_error"]);

    let mut forged = cert.clone();
    forged.hsic.statistic += 1e-3;
    assert_eq!(verify_inputs(&forged, &inputs).mismatches(), ["hsic.statistic"]);

    // The timestamp is not part of the comparison.
    let mut later = cert;
    later.created_utc = "2030-06-01T00:00:00Z".into();
    assert!(verify_inputs(&later, &inputs).pass);
}

#[test]
fn verification_uses_the_certified_seed() {
    let (dir, paths) = setup(&synth::loan_fixture());
    let (cert, _) = certify(&config(&dir, &paths, "out"));
    let inputs = Inputs::read(&paths.ontology, &paths.binding, &paths.dataset).unwrap();
    let mut reseeded = cert.clone();
    reseeded.hsic.seed += 1;
    // The statistic does not depend on the seed, so verification still passes.
    assert!(verify_inputs(&reseeded, &inputs).pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_serialization_is_a_fixpoint(
        recon in 0.0f64..1e6,
        stat in 0.0f64..1.0,
        p in 0.0f64..=1.0,
        eps in prop::option::of(1e-6f64..10.0),
        seed in any::<u64>(),
        missing in any::<u64>(),
    ) {
        let mut cert = sample_certificate().clone();
        cert.reconstruction_error = recon;
        cert.hsic.statistic = stat;
        cert.hsic.p_value = p;
        cert.hsic.seed = seed;
        cert.missing_data_warnings = missing;
        cert.method = if eps.is_some() { Method::Algorithm1 } else { Method::Quantile1d };
        cert.epsilon = eps;
        let text = cert.to_canonical_json().unwrap();
        prop_assert_eq!(canonicalize(&text).unwrap(), text.clone());
        let back = Certificate::from_json(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &cert);
        prop_assert_eq!(back.to_canonical_json().unwrap(), text);
    }
}

fn sample_certificate() -> &'static Certificate {
    static CERT: OnceLock<Certificate> = OnceLock::new();
    CERT.get_or_init(|| {
        let (dir, paths) = setup(&synth::loan_fixture());
        certify(&config(&dir, &paths, "out")).0
    })
}
