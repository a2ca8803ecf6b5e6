//! Tamper-evident certificates.
//!
//! A [`Certificate`] binds the SHA-256 digests of the exact input bytes and
//! of the canonical mask serialization to the projection and audit results.
//! It is stored as canonical JSON: keys sorted, no whitespace, numbers in
//! shortest round-trip form. [`verify_certificate`] re-derives everything
//! from the inputs and compares.

mod verify;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::audit::{AuditReport, ConditionalGapReport, HsicResult};
use crate::sigma::MaskMatrix;
use crate::transport::{FairProjection, Method};

pub use verify::{verify_certificate, verify_inputs, FieldCheck, FieldStatus, VerificationReport, VERIFY_RELATIVE_TOLERANCE};

pub const SCHEMA_VERSION: &str = "fairtransport-cert/1";
pub const CONTEXT: &str = "urn:fairtransport:certificate:v1";

#[derive(Debug, Error)]
pub enum CertError {
    #[error("certificate is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("certificate schema violation: {0}")]
    Schema(String),
    #[error("cannot serialize non-finite number in field {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub schema_version: String,
    pub ontology_sha256: String,
    pub binding_sha256: String,
    pub dataset_sha256: String,
    pub mask_sha256: String,
    pub method: Method,
    /// `null` for the quantile method.
    pub epsilon: Option<f64>,
    pub reconstruction_error: f64,
    pub hsic: HsicResult,
    pub gaps: ConditionalGapReport,
    pub missing_data_warnings: u64,
    pub created_utc: String,
    pub context: String,
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// RFC 3339 with second precision and a `Z` suffix.
pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Everything a certificate is computed from.
pub struct CertificateInputs<'a> {
    pub ontology_bytes: &'a [u8],
    pub binding_bytes: &'a [u8],
    pub dataset_bytes: &'a [u8],
    pub mask: &'a MaskMatrix,
    pub projection: &'a FairProjection,
    pub audit: &'a AuditReport,
    pub missing_data_warnings: u64,
    pub created_utc: DateTime<Utc>,
}

pub fn build_certificate(inputs: &CertificateInputs<'_>) -> Result<Certificate, CertError> {
    if inputs.projection.y.nrows() != inputs.mask.n_rows() {
        return Err(CertError::Schema(format!(
            "projection has {} rows but the mask has {}",
            inputs.projection.y.nrows(),
            inputs.mask.n_rows()
        )));
    }
    let cert = Certificate {
        schema_version: SCHEMA_VERSION.to_string(),
        ontology_sha256: sha256_hex(inputs.ontology_bytes),
        binding_sha256: sha256_hex(inputs.binding_bytes),
        dataset_sha256: sha256_hex(inputs.dataset_bytes),
        mask_sha256: sha256_hex(&inputs.mask.canonical_bytes()),
        method: inputs.projection.method,
        epsilon: inputs.projection.plan.as_ref().map(|p| p.epsilon),
        reconstruction_error: inputs.projection.reconstruction_error,
        hsic: inputs.audit.hsic.clone(),
        gaps: inputs.audit.gaps.clone(),
        missing_data_warnings: inputs.missing_data_warnings,
        created_utc: format_timestamp(inputs.created_utc),
        context: CONTEXT.to_string(),
    };
    cert.validate()?;
    Ok(cert)
}

fn is_digest(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

impl Certificate {
    pub fn validate(&self) -> Result<(), CertError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CertError::Schema(format!("unsupported schema_version {:?}", self.schema_version)));
        }
        for (name, value) in self.digests() {
            if !is_digest(value) {
                return Err(CertError::Schema(format!("{name} must be 64 lowercase hex characters")));
            }
        }
        match (self.method, self.epsilon) {
            (Method::Algorithm1, Some(e)) if e > 0.0 && e.is_finite() => {}
            (Method::Algorithm1, _) => return Err(CertError::Schema("algorithm1 requires a positive epsilon".into())),
            (Method::Quantile1d, None) => {}
            (Method::Quantile1d, Some(_)) => return Err(CertError::Schema("quantile1d takes no epsilon".into())),
        }
        let numbers = [
            ("reconstruction_error", self.reconstruction_error),
            ("hsic.statistic", self.hsic.statistic),
            ("hsic.p_value", self.hsic.p_value),
            ("hsic.bandwidth", self.hsic.bandwidth),
            ("gaps.max_mean_gap", self.gaps.max_mean_gap),
            ("gaps.max_w2_gap_1d", self.gaps.max_w2_gap_1d),
        ];
        for (name, v) in numbers {
            if !v.is_finite() {
                return Err(CertError::NonFinite(name));
            }
            if v < 0.0 {
                return Err(CertError::Schema(format!("{name} is negative")));
            }
        }
        if !(0.0..=1.0).contains(&self.hsic.p_value) {
            return Err(CertError::Schema("hsic.p_value outside [0, 1]".into()));
        }
        DateTime::parse_from_rfc3339(&self.created_utc)
            .map_err(|e| CertError::Schema(format!("created_utc: {e}")))?;
        Ok(())
    }

    /// The four digest fields in a fixed order.
    pub fn digests(&self) -> [(&'static str, &str); 4] {
        [
            ("ontology_sha256", &self.ontology_sha256),
            ("binding_sha256", &self.binding_sha256),
            ("dataset_sha256", &self.dataset_sha256),
            ("mask_sha256", &self.mask_sha256),
        ]
    }

    /// Canonical JSON text, no trailing newline.
    pub fn to_canonical_json(&self) -> Result<String, CertError> {
        self.validate()?;
        to_canonical_json(self)
    }

    /// Parses and validates a certificate.
    pub fn from_json(bytes: &[u8]) -> Result<Self, CertError> {
        let cert: Certificate = serde_json::from_slice(bytes)?;
        cert.validate()?;
        Ok(cert)
    }
}

/// Serializes through `serde_json::Value`, whose maps are ordered by key,
/// so any serializable value comes out with sorted keys and no whitespace.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, CertError> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string(&v)?)
}

/// Re-serializes arbitrary JSON text in canonical form.
pub fn canonicalize(text: &str) -> Result<String, CertError> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    Ok(serde_json::to_string(&v)?)
}
