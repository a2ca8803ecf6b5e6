//! File-level pipeline stages: compile, project, audit, certify.
//!
//! Every stage recomputes the chain from the input bytes, so the outputs are
//! pure functions of `(input bytes, RunConfig)` and running the stages one by
//! one writes exactly the same files as a single `certify`.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{self, AuditError, AuditReport, DEFAULT_PERMUTATIONS};
use crate::certify::{build_certificate, to_canonical_json, CertError, Certificate, CertificateInputs};
use crate::ontology::{materialize, parse_ontology, FactStore, Ontology, OntologyError};
use crate::sigma::{atoms, build_mask, ingest_bytes, AtomPartition, BindingConfig, Dataset, MaskMatrix, SigmaError};
use crate::transport::{
    project_algorithm1, project_quantile_1d, AtomSummary, FairProjection, Method, QuantileDiagnostics, TransportError,
};

pub const RUN_FILE: &str = "run.json";
pub const MASK_FILE: &str = "mask.fmm";
pub const ATOMS_FILE: &str = "atoms.json";
pub const FAIR_FILE: &str = "fair.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";
pub const AUDIT_FILE: &str = "audit.json";
pub const RAW_AUDIT_FILE: &str = "audit_raw.json";
pub const CERT_FILE: &str = "cert.json";

pub const DEFAULT_P_THRESHOLD: f64 = 0.05;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("ontology is not valid UTF-8")]
    OntologyNotUtf8,
    #[error("ontology: {0}")]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
    #[error("projection: {0}")]
    Transport(#[from] TransportError),
    #[error("audit: {0}")]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Everything that determines the pipeline outputs besides the input bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ontology: PathBuf,
    pub binding: PathBuf,
    pub data: PathBuf,
    pub out: PathBuf,
    pub method: Method,
    /// Algorithm 1 only; `None` derives the default from the cost matrix.
    pub epsilon: Option<f64>,
    pub permutations: u32,
    pub seed: u64,
    pub p_threshold: f64,
    pub allow_trivial: bool,
}

impl RunConfig {
    /// A configuration with default method, permutations and threshold.
    pub fn new(ontology: impl Into<PathBuf>, binding: impl Into<PathBuf>, data: impl Into<PathBuf>, out: impl Into<PathBuf>, seed: u64) -> Self {
        RunConfig {
            ontology: ontology.into(),
            binding: binding.into(),
            data: data.into(),
            out: out.into(),
            method: Method::Quantile1d,
            epsilon: None,
            permutations: DEFAULT_PERMUTATIONS,
            seed,
            p_threshold: DEFAULT_P_THRESHOLD,
            allow_trivial: false,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if let Some(e) = self.epsilon {
            if !(e > 0.0) || !e.is_finite() {
                return Err(PipelineError::Config(format!("epsilon must be positive, got {e}")));
            }
            if self.method == Method::Quantile1d {
                return Err(PipelineError::Config("epsilon only applies to algorithm1".into()));
            }
        }
        if self.permutations < 99 {
            return Err(PipelineError::Config(format!(
                "at least 99 permutations are required, got {}",
                self.permutations
            )));
        }
        if !(0.0..=1.0).contains(&self.p_threshold) {
            return Err(PipelineError::Config(format!("p-threshold must lie in [0, 1], got {}", self.p_threshold)));
        }
        Ok(())
    }
}

/// Raw bytes of the three inputs, read once so hashing and parsing see the same data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inputs {
    pub ontology: Vec<u8>,
    pub binding: Vec<u8>,
    pub dataset: Vec<u8>,
}

impl Inputs {
    pub fn read(ontology: &Path, binding: &Path, dataset: &Path) -> Result<Self, PipelineError> {
        Ok(Inputs {
            ontology: fs::read(ontology).map_err(io_err(ontology))?,
            binding: fs::read(binding).map_err(io_err(binding))?,
            dataset: fs::read(dataset).map_err(io_err(dataset))?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub ontology: Ontology,
    pub dataset: Dataset,
    /// Materialized facts.
    pub facts: FactStore,
    pub mask: MaskMatrix,
    pub partition: AtomPartition,
    /// Empty cells in bound columns.
    pub missing_cells: usize,
}

/// Parse, ingest, materialize, build the mask and its atoms.
pub fn compile(inputs: &Inputs, allow_trivial: bool) -> Result<Compiled, PipelineError> {
    let source = std::str::from_utf8(&inputs.ontology).map_err(|_| PipelineError::OntologyNotUtf8)?;
    let ontology = parse_ontology(source)?;
    let binding = BindingConfig::from_json(&inputs.binding)?;
    let ingested = ingest_bytes(&inputs.dataset, &binding, &ontology)?;
    let facts = materialize(&ontology, &ingested.facts);
    let mask = build_mask(&ontology, &facts, &ingested.dataset, allow_trivial)?;
    let partition = atoms(&mask);
    Ok(Compiled {
        ontology,
        dataset: ingested.dataset,
        facts,
        mask,
        partition,
        missing_cells: ingested.missing_cells,
    })
}

pub fn project(compiled: &Compiled, method: Method, epsilon: Option<f64>) -> Result<FairProjection, PipelineError> {
    let x = compiled.dataset.features()?;
    Ok(match method {
        Method::Algorithm1 => project_algorithm1(&x, &compiled.partition, epsilon)?,
        Method::Quantile1d => project_quantile_1d(&x, &compiled.partition)?,
    })
}

/// Results of one pass through compile → project → audit.
#[derive(Debug, Clone)]
pub struct Chain {
    pub compiled: Compiled,
    pub projection: FairProjection,
    pub audit: AuditReport,
}

pub fn run_chain(
    inputs: &Inputs,
    method: Method,
    epsilon: Option<f64>,
    permutations: u32,
    seed: u64,
    allow_trivial: bool,
) -> Result<Chain, PipelineError> {
    let compiled = compile(inputs, allow_trivial)?;
    let projection = project(&compiled, method, epsilon)?;
    let audit = audit::audit(projection.y.view(), &compiled.partition, permutations, seed)?;
    Ok(Chain {
        compiled,
        projection,
        audit,
    })
}

/// Whether an audit clears the configured p-value threshold. Vacuous audits
/// always pass.
pub fn passes_threshold(report: &AuditReport, p_threshold: f64) -> bool {
    report.vacuous || report.hsic.p_value >= p_threshold
}

#[derive(Serialize)]
struct AtomEntry<'a> {
    id: usize,
    signature: String,
    size: usize,
    rows: Vec<&'a str>,
}

#[derive(Serialize)]
struct AtomListing<'a> {
    concepts: &'a [String],
    n_rows: usize,
    missing_data_warnings: usize,
    algebra_size: Option<String>,
    atoms: Vec<AtomEntry<'a>>,
}

/// Atom listing: concept order, then each atom's signature, size and row ids.
pub fn atoms_json(compiled: &Compiled) -> Result<String, PipelineError> {
    let p = &compiled.partition;
    let ids = compiled.mask.row_ids();
    let listing = AtomListing {
        concepts: compiled.mask.concepts(),
        n_rows: p.n_rows(),
        missing_data_warnings: compiled.missing_cells,
        algebra_size: p.algebra_size().map(|s| s.to_string()),
        atoms: p
            .groups()
            .into_iter()
            .enumerate()
            .map(|(id, rows)| AtomEntry {
                id,
                signature: p.signatures()[id].iter().map(|&b| char::from(b'0' + b)).collect(),
                size: rows.len(),
                rows: rows.iter().map(|&i| ids[i].as_str()).collect(),
            })
            .collect(),
    };
    Ok(to_canonical_json(&listing)?)
}

/// `Y` as CSV with `fair_`-prefixed headers. Numbers use the shortest
/// representation that round-trips.
pub fn fair_csv(names: &[String], y: &ndarray::Array2<f64>) -> String {
    let mut out = names.iter().map(|n| format!("fair_{n}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in y.rows() {
        out.push_str(&row.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    method: Method,
    epsilon: Option<f64>,
    iterations: Option<usize>,
    marginal_residual: Option<f64>,
    converged: Option<bool>,
    reconstruction_error: f64,
    per_atom: &'a [AtomSummary],
    quantile: Option<&'a QuantileDiagnostics>,
}

pub fn diagnostics_json(projection: &FairProjection) -> Result<String, PipelineError> {
    let plan = projection.plan.as_ref();
    let d = Diagnostics {
        method: projection.method,
        epsilon: plan.map(|p| p.epsilon),
        iterations: plan.map(|p| p.iterations),
        marginal_residual: plan.map(|p| p.marginal_residual),
        converged: plan.map(|p| p.converged),
        reconstruction_error: projection.reconstruction_error,
        per_atom: &projection.per_atom_summary,
        quantile: projection.quantile.as_ref(),
    };
    Ok(to_canonical_json(&d)?)
}

fn write(out: &Path, name: &str, contents: &[u8]) -> Result<(), PipelineError> {
    let path = out.join(name);
    fs::write(&path, contents).map_err(io_err(&path))
}

fn prepare(cfg: &RunConfig) -> Result<Inputs, PipelineError> {
    cfg.validate()?;
    let inputs = Inputs::read(&cfg.ontology, &cfg.binding, &cfg.data)?;
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    write(&cfg.out, RUN_FILE, to_canonical_json(cfg)?.as_bytes())?;
    Ok(inputs)
}

fn write_compiled(cfg: &RunConfig, compiled: &Compiled) -> Result<(), PipelineError> {
    write(&cfg.out, MASK_FILE, &compiled.mask.canonical_bytes())?;
    write(&cfg.out, ATOMS_FILE, atoms_json(compiled)?.as_bytes())
}

fn write_projection(cfg: &RunConfig, compiled: &Compiled, projection: &FairProjection) -> Result<(), PipelineError> {
    write(&cfg.out, FAIR_FILE, fair_csv(&compiled.dataset.feature_columns, &projection.y).as_bytes())?;
    write(&cfg.out, DIAGNOSTICS_FILE, diagnostics_json(projection)?.as_bytes())
}

/// `compile`: writes `mask.fmm` and `atoms.json`.
pub fn cmd_compile(cfg: &RunConfig) -> Result<Compiled, PipelineError> {
    let inputs = prepare(cfg)?;
    let compiled = compile(&inputs, cfg.allow_trivial)?;
    write_compiled(cfg, &compiled)?;
    Ok(compiled)
}

/// `project`: also writes `fair.csv` and `diagnostics.json`.
pub fn cmd_project(cfg: &RunConfig) -> Result<(Compiled, FairProjection), PipelineError> {
    let inputs = prepare(cfg)?;
    let compiled = compile(&inputs, cfg.allow_trivial)?;
    write_compiled(cfg, &compiled)?;
    let projection = project(&compiled, cfg.method, cfg.epsilon)?;
    write_projection(cfg, &compiled, &projection)?;
    Ok((compiled, projection))
}

/// `audit`: audits `Y` into `audit.json`, or with `raw` the unprojected
/// features into `audit_raw.json`.
pub fn cmd_audit(cfg: &RunConfig, raw: bool) -> Result<AuditReport, PipelineError> {
    let inputs = prepare(cfg)?;
    let compiled = compile(&inputs, cfg.allow_trivial)?;
    write_compiled(cfg, &compiled)?;
    let report = if raw {
        let x = compiled.dataset.features()?;
        let report = audit::audit(x.values().view(), &compiled.partition, cfg.permutations, cfg.seed)?;
        write(&cfg.out, RAW_AUDIT_FILE, to_canonical_json(&report)?.as_bytes())?;
        report
    } else {
        let projection = project(&compiled, cfg.method, cfg.epsilon)?;
        write_projection(cfg, &compiled, &projection)?;
        let report = audit::audit(projection.y.view(), &compiled.partition, cfg.permutations, cfg.seed)?;
        write(&cfg.out, AUDIT_FILE, to_canonical_json(&report)?.as_bytes())?;
        report
    };
    Ok(report)
}

/// `certify`: runs the full chain, writes every intermediate and `cert.json`.
pub fn cmd_certify(cfg: &RunConfig, created_utc: DateTime<Utc>) -> Result<(Chain, Certificate), PipelineError> {
    let inputs = prepare(cfg)?;
    let chain = run_chain(&inputs, cfg.method, cfg.epsilon, cfg.permutations, cfg.seed, cfg.allow_trivial)?;
    write_compiled(cfg, &chain.compiled)?;
    write_projection(cfg, &chain.compiled, &chain.projection)?;
    write(&cfg.out, AUDIT_FILE, to_canonical_json(&chain.audit)?.as_bytes())?;
    let cert = build_certificate(&CertificateInputs {
        ontology_bytes: &inputs.ontology,
        binding_bytes: &inputs.binding,
        dataset_bytes: &inputs.dataset,
        mask: &chain.compiled.mask,
        projection: &chain.projection,
        audit: &chain.audit,
        missing_data_warnings: chain.compiled.missing_cells as u64,
        created_utc,
    })?;
    write(&cfg.out, CERT_FILE, cert.to_canonical_json()?.as_bytes())?;
    Ok((chain, cert))
}
