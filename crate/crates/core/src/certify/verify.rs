use std::fmt;
use std::path::Path;

use serde::Serialize;

use super::{sha256_hex, Certificate};
use crate::pipeline::{run_chain, Inputs, PipelineError};

/// Relative tolerance for the recomputed floating-point fields.
pub const VERIFY_RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FieldStatus {
    Match,
    Mismatch,
}

impl fmt::Display for FieldStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            FieldStatus::Match => "MATCH",
            FieldStatus::Mismatch => "MISMATCH",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldCheck {
    pub field: String,
    pub status: FieldStatus,
    pub certified: String,
    pub recomputed: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub fields: Vec<FieldCheck>,
    /// Why the pipeline could not be re-run, if it failed.
    pub recompute_error: Option<String>,
}

impl VerificationReport {
    pub fn field(&self, name: &str) -> Option<&FieldCheck> {
        self.fields.iter().find(|f| f.field == name)
    }

    /// Names of the fields that did not match.
    pub fn mismatches(&self) -> Vec<&str> {
        self.fields
            .iter()
            .filter(|f| f.status == FieldStatus::Mismatch)
            .map(|f| f.field.as_str())
            .collect()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.fields.iter().map(|c| c.field.len()).max().unwrap_or(0);
        for c in &self.fields {
            writeln!(f, "{:<width$}  {:<8}  certified={}  recomputed={}", c.field, c.status, c.certified, c.recomputed)?;
        }
        if let Some(e) = &self.recompute_error {
            writeln!(f, "recomputation failed: {e}")?;
        }
        write!(f, "overall: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= VERIFY_RELATIVE_TOLERANCE * a.abs().max(b.abs())
}

fn check(field: &str, certified: String, recomputed: String, ok: bool) -> FieldCheck {
    FieldCheck {
        field: field.to_string(),
        status: if ok { FieldStatus::Match } else { FieldStatus::Mismatch },
        certified,
        recomputed,
    }
}

/// Re-derives a certificate's contents from the disclosed inputs.
///
/// Input digests are always recomputed. The pipeline is then re-run with the
/// certificate's method, epsilon, permutation count and seed; if it fails
/// (for example because a tampered file no longer parses) the derived fields
/// are reported as mismatches. The timestamp is not compared.
pub fn verify_certificate(
    cert_bytes: &[u8],
    ontology: &Path,
    binding: &Path,
    dataset: &Path,
) -> Result<VerificationReport, PipelineError> {
    let cert = Certificate::from_json(cert_bytes)?;
    let inputs = Inputs::read(ontology, binding, dataset)?;
    Ok(verify_inputs(&cert, &inputs))
}

/// [`verify_certificate`] over already-loaded inputs.
pub fn verify_inputs(cert: &Certificate, inputs: &Inputs) -> VerificationReport {
    let mut fields = Vec::new();
    for (name, bytes, certified) in [
        ("ontology_sha256", &inputs.ontology, &cert.ontology_sha256),
        ("binding_sha256", &inputs.binding, &cert.binding_sha256),
        ("dataset_sha256", &inputs.dataset, &cert.dataset_sha256),
    ] {
        let got = sha256_hex(bytes);
        let ok = &got == certified;
        fields.push(check(name, certified.clone(), got, ok));
    }

    // Trivial masks need no override here: a certificate only exists if the
    // original run accepted its mask.
    let chain = run_chain(inputs, cert.method, cert.epsilon, cert.hsic.permutations, cert.hsic.seed, true);
    let recompute_error = match chain {
        Ok(chain) => {
            let mask = sha256_hex(&chain.compiled.mask.canonical_bytes());
            let ok = mask == cert.mask_sha256;
            fields.push(check("mask_sha256", cert.mask_sha256.clone(), mask, ok));
            let r = chain.projection.reconstruction_error;
            fields.push(check(
                "reconstruction_error",
                format!("{:?}", cert.reconstruction_error),
                format!("{r:?}"),
                close(r, cert.reconstruction_error),
            ));
            let s = chain.audit.hsic.statistic;
            fields.push(check(
                "hsic.statistic",
                format!("{:?}", cert.hsic.statistic),
                format!("{s:?}"),
                close(s, cert.hsic.statistic),
            ));
            None
        }
        Err(e) => {
            for (name, certified) in [
                ("mask_sha256", cert.mask_sha256.clone()),
                ("reconstruction_error", format!("{:?}", cert.reconstruction_error)),
                ("hsic.statistic", format!("{:?}", cert.hsic.statistic)),
            ] {
                fields.push(check(name, certified, "unavailable".into(), false));
            }
            Some(e.to_string())
        }
    };
    let pass = fields.iter().all(|f| f.status == FieldStatus::Match);
    VerificationReport {
        pass,
        fields,
        recompute_error,
    }
}

